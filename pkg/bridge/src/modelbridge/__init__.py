"""HTTP service exposing victim and infiller models over the defense wire protocol."""

from .config import BridgeConfig
from .service import ModelStore, create_app, serve

__version__ = "0.1.0"

__all__ = ["BridgeConfig", "ModelStore", "create_app", "serve", "__version__"]
