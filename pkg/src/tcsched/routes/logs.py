"""Recent log records kept in memory."""

from typing import Optional

from fastapi import APIRouter, HTTPException, Query

from ..logging_config import NAMESPACES, get_buffer_handler

router = APIRouter(prefix="/api", tags=["logs"])


@router.get("/logs")
def get_logs(
    count: int = Query(100, ge=1, le=5000),
    namespace: Optional[str] = None,
    level: Optional[str] = None,
):
    """Most recent log entries, oldest first."""
    if namespace is not None and namespace not in NAMESPACES and namespace != 'general':
        raise HTTPException(422, f"unknown namespace {namespace!r}")
    try:
        return {"logs": get_buffer_handler().get_history(count, namespace=namespace, min_level=level)}
    except ValueError as e:
        raise HTTPException(422, str(e))


@router.delete("/logs")
def clear_logs():
    """Empty the log buffer."""
    get_buffer_handler().clear_buffer()
    return {"cleared": True}
