"""HTTP bridge between the halluc data pipeline and pretrained models."""

from .app import create_app
from .backends import Backend, StubBackend, SubwordPrediction, TransformersBackend
from .projection import project_subword_to_word
from .wire import (
    MASK_TOKEN,
    MAX_TEXT_CHARS,
    MAX_TOKENS_PER_REQUEST,
    InfillRequest,
    InfillResponse,
    PredictRequest,
    PredictResponse,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "InfillRequest",
    "InfillResponse",
    "MASK_TOKEN",
    "MAX_TEXT_CHARS",
    "MAX_TOKENS_PER_REQUEST",
    "PredictRequest",
    "PredictResponse",
    "StubBackend",
    "SubwordPrediction",
    "TransformersBackend",
    "create_app",
    "project_subword_to_word",
    "__version__",
]
