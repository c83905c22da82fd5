from .layers import (
    AvgPool2D,
    BatchNorm2D,
    Conv2D,
    Dense,
    DepthwiseConv2D,
    Dropout,
    GlobalAvgPool,
    MaxPool2D,
    Module,
    Parallel,
    Param,
    ReLU,
    ReLU6,
    Residual,
    Sequential,
    SqueezeExcite,
    Swish,
    cross_entropy,
    softmax,
)
from .optim import Adam

__all__ = [
    "AvgPool2D", "BatchNorm2D", "Conv2D", "Dense", "DepthwiseConv2D",
    "Dropout", "GlobalAvgPool", "MaxPool2D", "Module", "Parallel", "Param",
    "ReLU", "ReLU6", "Residual", "Sequential", "SqueezeExcite", "Swish",
    "cross_entropy", "softmax", "Adam",
]
