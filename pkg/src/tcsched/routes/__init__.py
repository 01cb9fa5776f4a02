"""Route modules for the tc-sched API."""

from .logs import router as logs_router
from .schedules import router as schedules_router
from .tasksets import router as tasksets_router

__all__ = [
    'logs_router',
    'schedules_router',
    'tasksets_router',
]
