"""
Checkpoint Service

Saves and loads networks as versioned JSON documents.
"""
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import orjson
from pydantic import ValidationError

from svdunlearn.core.config import settings
from svdunlearn.core.exceptions import CheckpointFormatException, CheckpointNotFoundException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.core.serialization import PathLike, read_json, write_json
from svdunlearn.models.network import Network
from svdunlearn.schemas.checkpoint import CheckpointDocument
from svdunlearn.schemas.training import TrainConfig

logger = get_logger("checkpoint")


class CheckpointService:
    """Service for checkpoint persistence."""

    @staticmethod
    def to_document(
            model: Network,
            train_config: Optional[TrainConfig] = None,
            metadata: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        return {
            "format_version": settings.CHECKPOINT_FORMAT_VERSION,
            "architecture": model.architecture.model_dump(mode="json"),
            "parameters": {name: value.tolist() for name, value in model.state_dict().items()},
            "train_config": train_config.model_dump(mode="json") if train_config else None,
            "seed": model.seed,
            "metadata": metadata or {},
        }

    @staticmethod
    def save(
            model: Network,
            path: PathLike,
            train_config: Optional[TrainConfig] = None,
            metadata: Optional[Dict[str, Any]] = None,
    ) -> Path:
        document = CheckpointService.to_document(model, train_config, metadata)
        written = write_json(path, document)
        logger.info(f"Checkpoint saved: {written}")
        return written

    @staticmethod
    def from_document(raw: Dict[str, Any]) -> Tuple[Network, CheckpointDocument]:
        try:
            document = CheckpointDocument.model_validate(raw)
        except ValidationError as exc:
            raise CheckpointFormatException(f"Invalid checkpoint document: {exc.error_count()} errors") from exc
        if document.format_version > settings.CHECKPOINT_FORMAT_VERSION:
            raise CheckpointFormatException(
                f"Checkpoint format version {document.format_version} is newer than supported "
                f"version {settings.CHECKPOINT_FORMAT_VERSION}"
            )

        model = Network(document.architecture, seed=document.seed)
        try:
            model.load_state_dict({name: np.asarray(values) for name, values in document.parameters.items()})
        except ValueError as exc:
            raise CheckpointFormatException(f"Checkpoint parameters do not match the architecture: {exc}") from exc
        return model, document

    @staticmethod
    def load(path: PathLike) -> Tuple[Network, CheckpointDocument]:
        path = Path(path)
        if not path.is_file():
            raise CheckpointNotFoundException(path)
        try:
            raw = read_json(path)
        except orjson.JSONDecodeError as exc:
            raise CheckpointFormatException(f"Checkpoint {path} is not valid JSON") from exc
        model, document = CheckpointService.from_document(raw)
        logger.info(f"Checkpoint loaded: {path}")
        return model, document
