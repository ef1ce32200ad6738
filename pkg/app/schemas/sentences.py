"""
Sentence generation schemas
"""
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

OCC_PLACEHOLDER = "{occ}"
ADJ_PLACEHOLDER = "{adj}"


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class SentenceTemplate(BaseModel):
    """Source-language sentence pattern"""
    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    pattern: str

    @field_validator("pattern")
    @classmethod
    def single_occupation_slot(cls, v: str) -> str:
        if v.count(OCC_PLACEHOLDER) != 1:
            raise ValueError(f"pattern must contain exactly one {OCC_PLACEHOLDER}")
        if v.count(ADJ_PLACEHOLDER) > 1:
            raise ValueError(f"pattern may contain at most one {ADJ_PLACEHOLDER}")
        return v

    @computed_field
    @property
    def capitalized(self) -> bool:
        return self.pattern[:1].isupper()

    @computed_field
    @property
    def article_present(self) -> bool:
        return "egy" in self.pattern.lower().split()

    @property
    def takes_adjective(self) -> bool:
        return ADJ_PLACEHOLDER in self.pattern


class AdjectiveVariant(BaseModel):
    """Adjective phrase inserted before the occupation"""
    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    text: str = Field(min_length=1)
    polarity: Polarity
    intensified: bool = False


class SentenceRef(BaseModel):
    """Provenance key of a sentence"""
    model_config = ConfigDict(frozen=True)

    occupation_id: str
    template_id: str
    adjective_id: Optional[str] = None

    def sort_key(self) -> Tuple[str, str, str]:
        return (self.occupation_id, self.template_id, self.adjective_id or "")


class SentenceUnit(BaseModel):
    """Rendered source sentence"""
    model_config = ConfigDict(frozen=True)

    occupation_id: str
    template_id: str
    adjective_id: Optional[str] = None
    source_text: str

    @property
    def ref(self) -> SentenceRef:
        return SentenceRef(
            occupation_id=self.occupation_id,
            template_id=self.template_id,
            adjective_id=self.adjective_id,
        )
