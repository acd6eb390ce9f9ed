from .app import ServiceConfig, create_app
from .encoders import DEFAULT_MODEL, EncoderError, SbertEncoder, StubEncoder

__all__ = [
    "DEFAULT_MODEL",
    "EncoderError",
    "SbertEncoder",
    "ServiceConfig",
    "StubEncoder",
    "create_app",
]
