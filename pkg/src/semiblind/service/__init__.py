from .app import app, create_app, handle_check, handle_run, handle_sweep
from .schemas import CheckItem, CheckResponse, MetricsRow, RunResponse, SimRequest

__all__ = [
    "app", "create_app", "handle_check", "handle_run", "handle_sweep",
    "CheckItem", "CheckResponse", "MetricsRow", "RunResponse", "SimRequest",
]
