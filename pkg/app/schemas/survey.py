"""
Perception survey schemas
"""
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class LikertTally(BaseModel):
    """Response counts for one occupation, 1 = very masculine … 6 = very feminine"""
    model_config = ConfigDict(frozen=True)

    occupation_id: str
    counts: Tuple[int, int, int, int, int, int]

    @field_validator("counts")
    @classmethod
    def counts_non_negative(cls, v):
        if any(c < 0 for c in v):
            raise ValueError("counts must be non-negative")
        return v

    @property
    def total(self) -> int:
        return sum(self.counts)


class PerceptionScore(BaseModel):
    """Masculinity/femininity score derived from a tally"""
    model_config = ConfigDict(frozen=True)

    masculinity: float = Field(ge=0.0, le=1.0)
    femininity: float = Field(ge=0.0, le=1.0)
