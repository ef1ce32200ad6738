"""
Replay translation server (FastAPI)
"""
import logging
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI

from app.api import translate
from app.core.config import settings
from app.services.translation.fixture import FixtureBackend

logger = logging.getLogger(__name__)


def create_app(backend: Optional[FixtureBackend] = None) -> FastAPI:
    """Build the app; a given backend replaces the FIXTURE_SERVER_PATH one"""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        # Startup
        if backend is not None:
            logger.info(f"✅ Replay fixture loaded: {len(backend.table)} entries")
        yield
        # Shutdown
        logger.info("❌ Replay server stopped")

    app = FastAPI(
        title=settings.APP_NAME,
        description="Line-aligned replay translation endpoint for offline audits",
        version="1.0.0",
        docs_url="/docs",
        redoc_url="/redoc",
        lifespan=lifespan,
    )

    app.include_router(
        translate.router,
        prefix=settings.API_V1_PREFIX,
        tags=["Translation"],
    )

    if backend is not None:
        app.dependency_overrides[translate.get_fixture_backend] = lambda: backend

    @app.get("/health")
    async def health_check():
        """Health check endpoint"""
        return {"status": "healthy"}

    return app


app = create_app()


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.DEBUG,
    )
