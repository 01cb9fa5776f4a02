"""FastAPI server for tc-sched.

This module initializes the FastAPI application and registers the
taskset, schedule and log routes.
"""

# Load environment variables before other imports
from dotenv import load_dotenv
load_dotenv()

from fastapi import FastAPI  # noqa: E402
from fastapi.middleware.cors import CORSMiddleware  # noqa: E402

from .logging_config import get_logger, setup_logging  # noqa: E402

setup_logging()
logger = get_logger(__name__, namespace='api')

from .routes import logs_router, schedules_router, tasksets_router  # noqa: E402

app = FastAPI(title="tc-sched")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST", "DELETE"],
    allow_headers=["*"],
)

app.include_router(tasksets_router)
app.include_router(schedules_router)
app.include_router(logs_router)


@app.get("/api/health")
def health():
    return {"status": "ok"}


def run(host: str, port: int) -> None:
    """Serve the API with uvicorn."""
    import uvicorn

    logger.info(f"serving tc-sched on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port)
