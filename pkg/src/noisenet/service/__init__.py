"""HTTP service: classification, labeling queue, and model lifecycle."""

from .app import create_app, serve
from .config import ServiceConfig, load_service_config
from .store import EventStore, ModelRegistry

__all__ = [
    "create_app",
    "serve",
    "ServiceConfig",
    "load_service_config",
    "EventStore",
    "ModelRegistry",
]
