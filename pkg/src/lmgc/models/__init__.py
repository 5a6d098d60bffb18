"""Probability models consumed by the arithmetic coder."""

from .builtin import (
    MODEL_ID_ADAPTIVE_BASE,
    MODEL_ID_BRIDGE,
    MODEL_ID_STATIC_CUSTOM,
    MODEL_ID_STATIC_UNIFORM,
    AdaptiveModel,
    StaticModel,
)
from .bridge import ENDPOINT_ENV_VAR, BridgeModel
from .pmf import MAX_PRECISION_BITS, QuantizedPMF, quantize_pmf, quantize_weights

__all__ = [
    "AdaptiveModel",
    "StaticModel",
    "BridgeModel",
    "QuantizedPMF",
    "quantize_pmf",
    "quantize_weights",
    "MAX_PRECISION_BITS",
    "MODEL_ID_STATIC_UNIFORM",
    "MODEL_ID_STATIC_CUSTOM",
    "MODEL_ID_ADAPTIVE_BASE",
    "MODEL_ID_BRIDGE",
    "ENDPOINT_ENV_VAR",
]
