"""
Occupation registry schemas
"""
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

SHARE_TOLERANCE = 1e-9


class ClassificationSystem(str, Enum):
    """Occupational classification system"""
    FEOR = "FEOR"  # source country (Hungary)
    SOC = "SOC"  # target country (U.S.)


class ExclusionKind(str, Enum):
    """Why an occupation is kept out of the audit"""
    GENDER_MARKED_NAME = "GenderMarkedName"
    RELIGIOUS_OCCUPATION = "ReligiousOccupation"
    NOT_WELL_KNOWN = "NotWellKnown"
    OTHER = "Other"


class ExclusionRule(BaseModel):
    """Exclusion reason attached to an occupation"""
    model_config = ConfigDict(frozen=True)

    kind: ExclusionKind
    note: str = ""


class GenderShare(BaseModel):
    """Female/male split of an occupation, as fractions"""
    model_config = ConfigDict(frozen=True)

    female: float = Field(ge=0.0, le=1.0)
    male: float = Field(ge=0.0, le=1.0)

    @classmethod
    def from_percent(cls, female_pct: float, male_pct: float) -> "GenderShare":
        return cls(female=female_pct / 100, male=male_pct / 100)

    @classmethod
    def from_female(cls, female: float) -> "GenderShare":
        return cls(female=female, male=1.0 - female)

    @property
    def is_consistent(self) -> bool:
        return abs(self.female + self.male - 1.0) <= SHARE_TOLERANCE

    @property
    def female_dominated(self) -> bool:
        return self.female > self.male

    @property
    def male_dominated(self) -> bool:
        return self.male > self.female

    @property
    def is_tie(self) -> bool:
        return self.female == self.male


class OccupationCategory(BaseModel):
    """FEOR or SOC category with its statistics"""
    model_config = ConfigDict(frozen=True)

    code: str
    system: ClassificationSystem
    name: str
    share: Optional[GenderShare] = None  # None = suppressed / not published
    employment_count: Optional[int] = None
    members: Tuple[str, ...] = ()

    @property
    def suppressed(self) -> bool:
        return self.share is None


class Occupation(BaseModel):
    """Audited occupation"""
    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    name_source: str = Field(min_length=1)
    name_gloss: Optional[str] = None
    feor_code: str
    soc_code: Optional[str] = None
    soc_override: bool = False  # SOC link comes from a manually corrected crosswalk entry
    isco_code: Optional[str] = None
    sector_id: str
    excluded: Optional[ExclusionRule] = None

    @property
    def is_scoreable(self) -> bool:
        return self.excluded is None

    @property
    def label(self) -> str:
        return self.name_gloss or self.name_source


class CrosswalkEntry(BaseModel):
    """FEOR → ISCO → SOC mapping row"""
    model_config = ConfigDict(frozen=True)

    feor_code: str
    isco_code: Optional[str] = None
    soc_code: str
    override: bool = False


class IssueKind(str, Enum):
    """Registry validation findings"""
    SHARE_SUM_VIOLATION = "ShareSumViolation"
    MISSING_SHARE = "MissingShare"
    NEGATIVE_COUNT = "NegativeCount"
    DANGLING_CROSSWALK = "DanglingCrosswalk"
    AMBIGUOUS_CROSSWALK = "AmbiguousCrosswalk"
    UNLISTED_CROSSWALK_PAIR = "UnlistedCrosswalkPair"
    UNKNOWN_SECTOR = "UnknownSector"
    MISSING_WEIGHT = "MissingWeight"


class IssueSeverity(str, Enum):
    ERROR = "error"  # validate fails
    WARNING = "warning"  # reported; the occupation drops out of what it cannot support


FATAL_ISSUE_KINDS = frozenset({
    IssueKind.SHARE_SUM_VIOLATION,
    IssueKind.NEGATIVE_COUNT,
    IssueKind.DANGLING_CROSSWALK,
})


class Issue(BaseModel):
    """Single validation finding"""
    kind: IssueKind
    subject: str
    message: str
    severity: Optional[IssueSeverity] = None

    @model_validator(mode="after")
    def _default_severity(self) -> "Issue":
        if self.severity is None:
            self.severity = IssueSeverity.ERROR if self.kind in FATAL_ISSUE_KINDS else IssueSeverity.WARNING
        return self

    @property
    def fatal(self) -> bool:
        return self.severity == IssueSeverity.ERROR


class Registry(BaseModel):
    """Immutable occupation registry"""
    model_config = ConfigDict(frozen=True)

    occupations: Tuple[Occupation, ...] = ()
    feor: Dict[str, OccupationCategory] = {}
    soc: Dict[str, OccupationCategory] = {}
    crosswalk: Tuple[CrosswalkEntry, ...] = ()
    sectors: Dict[str, str] = {}

    def get(self, occupation_id: str) -> Occupation:
        for occupation in self.occupations:
            if occupation.id == occupation_id:
                return occupation
        raise KeyError(occupation_id)

    def by_id(self) -> Dict[str, Occupation]:
        return {occupation.id: occupation for occupation in self.occupations}

    def scoreable(self) -> List[Occupation]:
        return [o for o in self.occupations if o.is_scoreable]

    def categories(self, system: ClassificationSystem) -> Dict[str, OccupationCategory]:
        return self.feor if system == ClassificationSystem.FEOR else self.soc

    def category_of(
        self, occupation: Occupation, system: ClassificationSystem
    ) -> Optional[OccupationCategory]:
        code = occupation.feor_code if system == ClassificationSystem.FEOR else occupation.soc_code
        if code is None:
            return None
        return self.categories(system).get(code)

    def to_json(self) -> str:
        """Byte-stable serialization"""
        return self.model_dump_json(indent=2) + "\n"
