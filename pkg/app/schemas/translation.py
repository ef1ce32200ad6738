"""
Translation schemas
"""
from datetime import datetime
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.sentences import SentenceRef


class EngineKind(str, Enum):
    FIXTURE = "fixture"
    HTTP = "http"
    LLM = "llm"


class EngineDescriptor(BaseModel):
    """Translation engine snapshot an audit ran against"""
    model_config = ConfigDict(frozen=True)

    engine_id: str = Field(min_length=1)
    endpoint: Optional[str] = None
    source_lang: str = "hu"
    target_lang: str = "en"
    retrieved_at: Optional[datetime] = None


class TranslationFailure(BaseModel):
    """Per-unit error marker"""
    model_config = ConfigDict(frozen=True)

    code: str
    message: str = ""


class TranslationRecord(BaseModel):
    """Engine output for one sentence unit"""
    model_config = ConfigDict(frozen=True)

    sentence_ref: SentenceRef
    source_text: str
    target_text: Optional[str] = None
    engine: EngineDescriptor
    failure: Optional[TranslationFailure] = None

    @model_validator(mode="after")
    def target_or_failure(self):
        if self.failure is None and not self.target_text:
            raise ValueError("successful record needs a non-empty target_text")
        if self.failure is not None and self.target_text is not None:
            raise ValueError("failed record carries no target_text")
        return self

    @property
    def ok(self) -> bool:
        return self.failure is None

    def to_artifact_json(self) -> str:
        # retrieved_at lives in the manifest, not in data files
        return self.model_dump_json(exclude={"engine": {"retrieved_at"}})


class CacheEntry(BaseModel):
    """One line of the replay cache"""
    key: str
    engine: str
    source_lang: str
    target_lang: str
    src: str
    tgt: str
    retrieved_at: datetime
    checksum: str = ""
