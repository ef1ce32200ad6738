"""
Replay translation API endpoints
"""
import logging
from functools import lru_cache
from typing import List

from fastapi import APIRouter, Depends, HTTPException, status
from pydantic import BaseModel, Field

from app.core.config import settings
from app.core.errors import MalformedFixture
from app.schemas.translation import EngineDescriptor
from app.services.translation.fixture import FixtureBackend, fixture_backend

logger = logging.getLogger(__name__)

router = APIRouter()


class TranslateRequest(BaseModel):
    source_lang: str = Field(..., description="Source language code, e.g. 'hu'")
    target_lang: str = Field(..., description="Target language code, e.g. 'en'")
    lines: List[str] = Field(..., description="Ordered source lines")


class TranslateResponse(BaseModel):
    lines: List[str]


@lru_cache(maxsize=1)
def get_fixture_backend() -> FixtureBackend:
    """Backend behind the endpoint, loaded once from FIXTURE_SERVER_PATH"""
    if not settings.FIXTURE_SERVER_PATH:
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="FIXTURE_SERVER_PATH is not configured",
        )
    try:
        return fixture_backend(
            settings.FIXTURE_SERVER_PATH,
            EngineDescriptor(engine_id="replay"),
        )
    except MalformedFixture as e:
        raise HTTPException(status_code=status.HTTP_503_SERVICE_UNAVAILABLE, detail=e.to_dict())


@router.post("/translate", response_model=TranslateResponse)
async def translate(
    request: TranslateRequest,
    backend: FixtureBackend = Depends(get_fixture_backend),
):
    """
    Translate an ordered batch of lines

    - **lines**: answered one-to-one from the fixture
    - unknown lines → 422 listing them
    """
    descriptor = backend.descriptor
    if (request.source_lang, request.target_lang) != (descriptor.source_lang, descriptor.target_lang):
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail={
                "error": "UnsupportedLanguagePair",
                "supported": [descriptor.source_lang, descriptor.target_lang],
            },
        )

    missing = backend.missing(request.lines)
    if missing:
        logger.info(f"[Replay] {len(missing)} of {len(request.lines)} lines missing from fixture")
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail={"error": "MissingFixture", "missing": missing},
        )

    return TranslateResponse(lines=await backend.translate_batch(request.lines))
