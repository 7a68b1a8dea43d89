"""
Byte-stable file writers.

Files are written to a temporary sibling and moved into place, so a failed run
never leaves a partial output behind.
"""
import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import orjson

PathLike = Union[str, Path]

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def dumps_json(document: Any) -> bytes:
    return orjson.dumps(document, option=JSON_OPTIONS) + b"\n"


def write_json(path: PathLike, document: Any) -> Path:
    return atomic_write_bytes(path, dumps_json(document))


def read_json(path: PathLike) -> Any:
    return orjson.loads(Path(path).read_bytes())


def format_float(value: float) -> str:
    return format(float(value), ".10g")


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows with a fixed header; floats use a stable short format."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return atomic_write_bytes(path, buffer.getvalue().encode("utf-8"))
