"""HTTP sidecar serving unit-norm sentence embeddings in batches."""

from .app import create_app, load_config
from .models import HashModel, ModelRegistry

__version__ = "0.1.0"

__all__ = ["create_app", "load_config", "HashModel", "ModelRegistry"]
