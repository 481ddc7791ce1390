import logging
import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse
from fastapi.templating import Jinja2Templates

from app import __version__
from app.core.dependencies import LOG_LEVEL_ENV_VAR, get_data_dir, get_runs_dir

# Configure logging
logging.basicConfig(
    level=os.environ.get(LOG_LEVEL_ENV_VAR, "INFO").upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


app = FastAPI(
    title="Power Production at Risk",
    version=__version__,
    description="Report API over county water-scarcity and stream-temperature risk runs.",
)

# HTML templates (Jinja2)
templates = Jinja2Templates(directory=str(Path(__file__).resolve().parent / "templates"))


@app.get("/", response_class=HTMLResponse)
async def index(request: Request) -> HTMLResponse:
    """
    Landing page listing the available runs.
    """
    runs_dir = get_runs_dir()
    runs = sorted(d.name for d in runs_dir.iterdir() if d.is_dir() and (d / "config.json").is_file())
    return templates.TemplateResponse(
        request,
        "index.html",
        {
            "title": "Power Production at Risk",
            "runs": runs,
        },
    )


@app.get("/health")
async def health() -> dict:
    """
    Lightweight health check endpoint.
    """
    return {"status": "ok"}


@app.get("/information")
async def information() -> dict:
    return {
        "name": app.title,
        "version": app.version,
        "data_dir": str(get_data_dir()),
        "scenarios": ["RCP2.6", "RCP8.5"],
        "statistics": ["median", "min2", "p80", "max2"],
        "windows": ["2010s", "2020s", "2030s", "2040s"],
    }


try:
    from app.api.reports import router as reports_router

    app.include_router(reports_router, tags=["reports"])
    logger.info("Successfully loaded reports router")
except ImportError as e:
    logger.warning(f"Failed to import reports router: {e}")
except Exception as e:
    logger.error(f"Error loading reports router: {e}", exc_info=True)


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=True,
    )
