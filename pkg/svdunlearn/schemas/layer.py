from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field


class LinearSpec(BaseModel):
    """Fully connected layer: y = x W^T + b."""
    kind: Literal["linear"] = "linear"
    in_features: int = Field(..., ge=1)
    out_features: int = Field(..., ge=1)


class Conv2dSpec(BaseModel):
    """2-D convolution over C_i x H x W inputs."""
    kind: Literal["conv2d"] = "conv2d"
    in_channels: int = Field(..., ge=1)
    out_channels: int = Field(..., ge=1)
    kernel: int = Field(..., ge=1)
    stride: int = Field(default=1, ge=1)
    padding: int = Field(default=0, ge=0)


class ReLUSpec(BaseModel):
    kind: Literal["relu"] = "relu"


class BatchNorm1dSpec(BaseModel):
    """Batch normalization over a feature vector."""
    kind: Literal["batchnorm1d"] = "batchnorm1d"
    num_features: int = Field(..., ge=1)
    epsilon: float = Field(default=1e-5, gt=0)
    momentum: float = Field(default=0.1, gt=0, le=1)


class FlattenSpec(BaseModel):
    """Reshapes N x C x H x W activations into N x (C*H*W)."""
    kind: Literal["flatten"] = "flatten"


LayerSpec = Annotated[
    Union[LinearSpec, Conv2dSpec, ReLUSpec, BatchNorm1dSpec, FlattenSpec],
    Field(discriminator="kind"),
]


class ArchitectureSpec(BaseModel):
    """Ordered layer list plus the per-sample input shape."""
    layers: List[LayerSpec]
    input_shape: Optional[Tuple[int, int, int]] = Field(
        default=None, description="C x H x W when the first layer is a convolution"
    )


def mlp_architecture(
        in_features: int,
        hidden: int,
        num_classes: int,
        depth: int,
        batchnorm: bool = True,
) -> ArchitectureSpec:
    """`depth` linear layers; every hidden linear layer is followed by BatchNorm and ReLU."""
    layers: list = []
    width = in_features
    for _ in range(depth - 1):
        layers.append(LinearSpec(in_features=width, out_features=hidden))
        if batchnorm:
            layers.append(BatchNorm1dSpec(num_features=hidden))
        layers.append(ReLUSpec())
        width = hidden
    layers.append(LinearSpec(in_features=width, out_features=num_classes))
    return ArchitectureSpec(layers=layers)
