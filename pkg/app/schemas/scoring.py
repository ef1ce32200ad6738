"""
Bias scoring schemas
"""
import math
from enum import Enum
from typing import Dict, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict

from app.schemas.gendering import GenderLabel
from app.schemas.lexicon import ClassificationSystem, GenderShare

UNBOUNDED = "unbounded"

BiasValue = Union[float, Literal["unbounded"]]


class ReferenceKind(str, Enum):
    """Reference point an optimal translator is built on"""
    SOURCE_STATS = "source"  # source-country employment statistics
    TARGET_STATS = "target"  # target-country employment statistics
    PERCEPTION = "perception"  # survey masculinity/femininity scores

    @property
    def system(self) -> ClassificationSystem:
        """Classification used for grouping and weights"""
        if self == ReferenceKind.TARGET_STATS:
            return ClassificationSystem.SOC
        return ClassificationSystem.FEOR


class Direction(str, Enum):
    AGAINST_WOMEN = "against_women"
    AGAINST_MEN = "against_men"
    NONE = "none"


class ResolvedReference(BaseModel):
    """Shares of one reference kind plus what had to be left out"""
    kind: ReferenceKind
    shares: Dict[str, GenderShare] = {}
    omitted: Dict[str, str] = {}  # occupation id -> reason

    @property
    def coverage(self) -> int:
        return len(self.shares)


class BiasResult(BaseModel):
    """Bias of one occupation against one reference"""
    model_config = ConfigDict(frozen=True)

    occupation_id: str
    reference: ReferenceKind
    label: GenderLabel
    error_points: float
    optimal_error: float
    bias: BiasValue
    direction: Direction
    female_share: float
    male_share: float

    @property
    def unbounded(self) -> bool:
        return self.bias == UNBOUNDED

    @property
    def finite_bias(self) -> Optional[float]:
        if self.unbounded:
            return None
        return float(self.bias)

    @property
    def wrong(self) -> bool:
        return self.direction != Direction.NONE

    @property
    def share(self) -> GenderShare:
        return GenderShare(female=self.female_share, male=self.male_share)


class SkippedScore(BaseModel):
    """Occupation that could not be scored"""
    occupation_id: str
    reference: ReferenceKind
    reason: str


def is_finite_bias(value: BiasValue) -> bool:
    return value != UNBOUNDED and math.isfinite(float(value))
