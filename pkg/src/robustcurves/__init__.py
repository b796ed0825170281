"""Adversarial robustness curves: exact, attack-estimated, and synthetic."""

__version__ = "0.1.0"

from .core import (
    ATOL,
    Dataset,
    DegenerateInputError,
    HorizonError,
    InvalidInputError,
    LabeledPoint,
    NormKind,
    ParseError,
    UnsupportedDimensionError,
    UnsupportedNormError,
    ValidationError,
    dual_exponent,
    dual_norm,
    dual_norm_value,
    norm,
)
from .models import (
    BinaryLinear,
    Conv2D,
    Dense,
    MultiClassNet,
    ReLU,
    Threshold1D,
    batch_forward,
    batch_predict,
    forward,
    load_model,
    loss_gradient,
    predict,
    save_model,
)
