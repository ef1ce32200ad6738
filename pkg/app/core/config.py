"""
Application configuration
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings

from app.core.errors import ConfigError
from app.schemas.aggregation import WeightBasis
from app.schemas.scoring import ReferenceKind
from app.schemas.translation import EngineDescriptor, EngineKind


class Settings(BaseSettings):
    """Process-level settings and secrets (.env)"""

    # App
    APP_NAME: str = "Pronoun Bias Audit"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Replay server
    HOST: str = "127.0.0.1"
    PORT: int = 8000
    API_V1_PREFIX: str = "/api/v1"
    FIXTURE_SERVER_PATH: Optional[str] = None  # TSV the replay server answers from

    # Translation APIs
    TRANSLATION_API_KEY: Optional[str] = None  # Bearer token for the HTTP backend
    OPENROUTER_API_KEY: Optional[str] = None
    OPENROUTER_BASE_URL: str = "https://openrouter.ai/api/v1"

    # HTTP client
    HTTP_TIMEOUT_SECONDS: float = 30.0
    HTTP_MAX_RETRIES: int = 5
    HTTP_BACKOFF_SECONDS: float = 1.0

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


# Global settings instance
settings = Settings()


class InputsConfig(BaseModel):
    """Input files of an audit"""
    occupations: Path
    categories_feor: Path
    categories_soc: Path
    crosswalk: Path
    sectors: Path
    survey: Optional[Path] = None
    templates: Optional[Path] = None
    adjectives: Optional[Path] = None
    pronoun_lexicon: Optional[Path] = None


class EngineConfig(BaseModel):
    """Translation engine selection"""
    engine_id: str = Field(min_length=1)
    kind: EngineKind = EngineKind.FIXTURE
    endpoint: Optional[str] = None
    source_lang: str = "hu"
    target_lang: str = "en"
    fixture: Optional[Path] = None
    model: Optional[str] = None

    @model_validator(mode="after")
    def backend_fields(self):
        if self.kind == EngineKind.FIXTURE and self.fixture is None:
            raise ValueError("engine.fixture is required for kind=fixture")
        if self.kind == EngineKind.HTTP and not self.endpoint:
            raise ValueError("engine.endpoint is required for kind=http")
        if self.kind == EngineKind.LLM and not self.model:
            raise ValueError("engine.model is required for kind=llm")
        return self

    def descriptor(self) -> EngineDescriptor:
        endpoint = self.endpoint
        if endpoint is None and self.kind == EngineKind.LLM:
            endpoint = self.model
        return EngineDescriptor(
            engine_id=self.engine_id,
            endpoint=endpoint,
            source_lang=self.source_lang,
            target_lang=self.target_lang,
        )


class TranslationConfig(BaseModel):
    """Batching, parallelism and rate limits"""
    batch_size: int = Field(100, ge=1)
    jobs: int = Field(4, ge=1)
    max_requests_per_second: float = Field(5.0, gt=0)
    max_retries: Optional[int] = Field(None, ge=0)  # falls back to HTTP_MAX_RETRIES
    backoff_seconds: Optional[float] = Field(None, ge=0)  # falls back to HTTP_BACKOFF_SECONDS
    cache: Optional[Path] = None


class AuditConfig(BaseModel):
    """Single JSON document driving a pipeline run"""
    inputs: InputsConfig
    engine: EngineConfig
    translation: TranslationConfig = TranslationConfig()
    templates: List[str] = ["base"]
    adjective_template: str = "adj"
    adjectives: Optional[List[str]] = None  # None = every adjective in the file
    scoring_template: str = "base"
    references: List[ReferenceKind] = [
        ReferenceKind.SOURCE_STATS,
        ReferenceKind.TARGET_STATS,
        ReferenceKind.PERCEPTION,
    ]
    weight_basis: WeightBasis = WeightBasis.EMPLOYMENT
    output_dir: Path = Path("out")
    display_precision: int = Field(1, ge=0, le=6)

    @field_validator("references")
    @classmethod
    def references_unique(cls, v: List[ReferenceKind]) -> List[ReferenceKind]:
        if not v:
            raise ValueError("at least one reference kind must be enabled")
        # keep declaration order, drop repeats
        return list(dict.fromkeys(v))

    @model_validator(mode="after")
    def cross_checks(self):
        if self.scoring_template not in self.templates:
            raise ValueError(f"scoring_template '{self.scoring_template}' is not among templates")
        if ReferenceKind.PERCEPTION in self.references and self.inputs.survey is None:
            raise ValueError("inputs.survey is required when the perception reference is enabled")
        return self

    @property
    def cache_path(self) -> Path:
        return self.translation.cache or self.output_dir / "cache" / "translations.jsonl"

    def max_retries(self, app_settings: Settings) -> int:
        if self.translation.max_retries is not None:
            return self.translation.max_retries
        return app_settings.HTTP_MAX_RETRIES

    def backoff_seconds(self, app_settings: Settings) -> float:
        if self.translation.backoff_seconds is not None:
            return self.translation.backoff_seconds
        return app_settings.HTTP_BACKOFF_SECONDS


def _resolve(base: Path, value: Any) -> Any:
    if value is None:
        return None
    path = Path(value)
    return str(path if path.is_absolute() else base / path)


def load_audit_config(
    path: Path,
    *,
    output_dir: Optional[Path] = None,
    references: Optional[List[str]] = None,
    engine_id: Optional[str] = None,
    jobs: Optional[int] = None,
) -> AuditConfig:
    """
    Read the audit JSON and apply command-line overrides.

    Precedence: flags > config file > defaults. Relative paths inside the
    file resolve against the file's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", path=path)

    try:
        raw: Dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}", path=path)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", path=path)

    base = path.resolve().parent

    inputs = dict(raw.get("inputs") or {})
    for key, value in list(inputs.items()):
        inputs[key] = _resolve(base, value)
    raw["inputs"] = inputs

    engine = dict(raw.get("engine") or {})
    if "fixture" in engine:
        engine["fixture"] = _resolve(base, engine["fixture"])
    if engine_id is not None:
        engine["engine_id"] = engine_id
    raw["engine"] = engine

    translation = dict(raw.get("translation") or {})
    if "cache" in translation:
        translation["cache"] = _resolve(base, translation["cache"])
    if jobs is not None:
        translation["jobs"] = jobs
    raw["translation"] = translation

    if output_dir is not None:
        raw["output_dir"] = str(Path(output_dir).resolve())
    else:
        raw["output_dir"] = _resolve(base, raw.get("output_dir", "out"))

    if references:
        raw["references"] = list(references)

    try:
        config = AuditConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}", path=path)

    missing = [
        f"inputs.{name}"
        for name, value in config.inputs.model_dump().items()
        if value is not None and not Path(value).exists()
    ]
    if config.engine.fixture is not None and not config.engine.fixture.exists():
        missing.append("engine.fixture")
    if missing:
        raise ConfigError(f"referenced paths do not exist: {', '.join(missing)}", path=path)

    return config
