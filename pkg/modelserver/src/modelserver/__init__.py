"""Reference HTTP server for the logits wire protocol."""

__version__ = "0.1.0"

from .app import create_app
from .models import DEFAULT_VOCAB, FileStub, ServedModel, UniformStub, load_model

__all__ = [
    "create_app",
    "load_model",
    "ServedModel",
    "UniformStub",
    "FileStub",
    "DEFAULT_VOCAB",
]
