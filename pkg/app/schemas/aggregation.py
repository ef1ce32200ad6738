"""
Aggregate report schemas
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel

from app.schemas.scoring import ReferenceKind


class Dominance(str, Enum):
    FEMALE_DOMINATED = "female_dominated"
    MALE_DOMINATED = "male_dominated"


class WeightBasis(str, Enum):
    EMPLOYMENT = "employment"  # everyone in the occupation
    GENDER_HEADCOUNT = "gender_headcount"  # only the dominant gender's head count


class CategoryBias(BaseModel):
    """Mean bias of the occupations sharing a category"""
    reference: ReferenceKind
    category_code: str
    category_name: str = ""
    mean_bias: Optional[float] = None  # None when every member is unbounded
    n_members: int
    unbounded_count: int = 0


class SectorDominanceBias(BaseModel):
    """Weighted bias of one dominance class inside one sector"""
    reference: ReferenceKind
    sector_id: str
    dominance: Dominance
    weighted_bias: Optional[float] = None
    n_occupations: int
    unbounded_count: int = 0
    unweighted_count: int = 0  # finite B but no employment count
    total_weight: float = 0.0


class SectorReport(BaseModel):
    """Both dominance classes of a sector"""
    reference: ReferenceKind
    sector_id: str
    sector_name: str = ""
    weights_basis: WeightBasis = WeightBasis.EMPLOYMENT
    female_dominated: Optional[SectorDominanceBias] = None
    male_dominated: Optional[SectorDominanceBias] = None

    @property
    def female_dominated_bias(self) -> Optional[float]:
        return self.female_dominated.weighted_bias if self.female_dominated else None

    @property
    def male_dominated_bias(self) -> Optional[float]:
        return self.male_dominated.weighted_bias if self.male_dominated else None


class ChangeMatrix(BaseModel):
    """Pronoun flips between the base sentence and its adjective variant"""
    adjective_id: str
    she_she: int = 0
    he_he: int = 0
    she_he: int = 0
    he_she: int = 0

    @property
    def n_paired(self) -> int:
        return self.she_she + self.he_he + self.she_he + self.he_she

    @property
    def changed(self) -> int:
        return self.she_he + self.he_she

    @property
    def changed_pct(self) -> float:
        return 100.0 * self.changed / self.n_paired if self.n_paired else 0.0

    @property
    def unchanged_pct(self) -> float:
        return 100.0 - self.changed_pct if self.n_paired else 0.0

    @property
    def dominant_change(self) -> str:
        if self.changed == 0:
            return "none"
        if self.she_he > self.he_she:
            return "she_to_he"
        if self.he_she > self.she_he:
            return "he_to_she"
        return "balanced"


class BiasDistribution(BaseModel):
    """Spread of the finite positive bias scores"""
    min: Optional[float] = None
    median: Optional[float] = None
    max: Optional[float] = None
    count: int = 0


class DirectionSplit(BaseModel):
    he_for_she: float
    she_for_he: float


class SummaryStats(BaseModel):
    """Corpus-level summary for one reference"""
    reference: ReferenceKind
    n_scoreable: int
    n_wrong: int
    wrong_fraction: float
    wrong_direction_split: Optional[DirectionSplit] = None  # None when nothing is wrong
    n_female_dominated: int
    n_male_dominated: int
    wrong_given_female_dominated: Optional[float] = None
    wrong_given_male_dominated: Optional[float] = None
    bias_distribution: BiasDistribution
    unbounded_count: int


class PronounDistribution(BaseModel):
    """Fractions of masculine / feminine / other labels"""
    variant: str = "base"
    n: int
    masculine: float
    feminine: float
    other: float


class MisgenderedRow(BaseModel):
    occupation_id: str
    name: str
    label: str
    direction: str
    primary_bias: Optional[float] = None
    primary_unbounded: bool = False
    secondary_bias: Optional[float] = None
    secondary_unbounded: bool = False


class CorrelationResult(BaseModel):
    """Perception vs statistics association"""
    pearson_r: float
    n: int
    occupations: List[str]
