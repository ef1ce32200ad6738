"""
Pronoun classification schemas
"""
from enum import Enum
from typing import Dict

from pydantic import BaseModel, ConfigDict


class GenderLabel(str, Enum):
    """Pronoun gender of a translated sentence"""
    MASCULINE = "masculine"
    FEMININE = "feminine"
    NEUTRAL = "neutral"
    AMBIGUOUS = "ambiguous"
    UNDETECTED = "undetected"

    @property
    def scoreable(self) -> bool:
        return self in (GenderLabel.MASCULINE, GenderLabel.FEMININE)


class PronounGender(str, Enum):
    M = "M"
    F = "F"
    N = "N"


class PronounRole(str, Enum):
    SUBJECT = "subject"
    OBJECT = "object"
    POSSESSIVE = "possessive"


class PronounEntry(BaseModel):
    """Lexicon row"""
    model_config = ConfigDict(frozen=True)

    token: str
    gender: PronounGender
    role: PronounRole = PronounRole.SUBJECT


class LabelCounts(BaseModel):
    """Per-label tallies for the coverage report"""
    masculine: int = 0
    feminine: int = 0
    neutral: int = 0
    ambiguous: int = 0
    undetected: int = 0
    translation_failures: int = 0

    def as_tuple(self):
        return (self.masculine, self.feminine, self.neutral, self.ambiguous, self.undetected)

    def as_dict(self) -> Dict[str, int]:
        return self.model_dump()
