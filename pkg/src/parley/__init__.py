"""Interview copilot session engine."""

from .config import EngineConfig, load_config
from .session import Session, SessionEvent, input_event, replay

__all__ = ["EngineConfig", "load_config", "Session", "SessionEvent",
           "input_event", "replay"]
__version__ = "0.1.0"
