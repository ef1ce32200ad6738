"""
Perception survey: Likert transform and perception reference
"""
import logging
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Dict, Iterable, List, Union

from app.core.errors import EmptyTally, MalformedRow, OutOfRange
from app.core.storage import iter_rows, read_csv_table
from app.schemas.lexicon import GenderShare
from app.schemas.scoring import ReferenceKind, ResolvedReference
from app.schemas.survey import LikertTally, PerceptionScore

logger = logging.getLogger(__name__)

SURVEY_COLUMNS = ("occupation_id", "c1", "c2", "c3", "c4", "c5", "c6")

# response -> weight; the scale is symmetric around its middle
LIKERT_WEIGHTS = {1: 2.5, 2: 1.5, 3: 0.5, 4: 0.5, 5: 1.5, 6: 2.5}


def likert_weight(response: int) -> float:
    if isinstance(response, bool) or response not in LIKERT_WEIGHTS:
        raise OutOfRange(f"Likert response must be 1..6, got {response!r}", response=response)
    return LIKERT_WEIGHTS[response]


def perception_scores(tally: LikertTally) -> PerceptionScore:
    """Masculinity = weighted responses 1-3 over all; femininity = weighted 4-6 over all"""
    if tally.total <= 0:
        raise EmptyTally(f"tally for {tally.occupation_id} has no responses", occupation=tally.occupation_id)

    c1, c2, c3, c4, c5, c6 = tally.counts
    # summed outside-in on both sides so reversing the counts swaps the scores exactly
    masc = likert_weight(1) * c1 + likert_weight(2) * c2 + likert_weight(3) * c3
    fem = likert_weight(6) * c6 + likert_weight(5) * c5 + likert_weight(4) * c4
    total = masc + fem
    return PerceptionScore(masculinity=masc / total, femininity=fem / total)


def perception_reference(tallies: Iterable[LikertTally]) -> Dict[str, GenderShare]:
    """Femininity becomes the female share, masculinity the male share"""
    shares: Dict[str, GenderShare] = {}
    for tally in tallies:
        score = perception_scores(tally)
        shares[tally.occupation_id] = GenderShare(female=score.femininity, male=score.masculinity)
    return dict(sorted(shares.items()))


def resolve_perception(tallies: Iterable[LikertTally], scoreable_ids: Iterable[str]) -> ResolvedReference:
    """Perception reference restricted to scoreable occupations; the rest are omitted as unsurveyed"""
    shares = perception_reference(tallies)
    scoreable = sorted(set(scoreable_ids))
    return ResolvedReference(
        kind=ReferenceKind.PERCEPTION,
        shares={occ_id: shares[occ_id] for occ_id in scoreable if occ_id in shares},
        omitted={occ_id: "unsurveyed" for occ_id in scoreable if occ_id not in shares},
    )


def load_tallies(survey_file: Union[str, Path]) -> List[LikertTally]:
    """Read survey.csv; zero-total rows load fine and fail at scoring time"""
    frame = read_csv_table(survey_file, SURVEY_COLUMNS)
    tallies: List[LikertTally] = []
    seen = set()

    for line, row in iter_rows(frame):
        occ_id = row["occupation_id"]
        if not occ_id:
            raise MalformedRow(survey_file, line, "occupation_id is empty")
        if occ_id in seen:
            raise MalformedRow(survey_file, line, f"duplicate tally for {occ_id}")
        seen.add(occ_id)

        counts = []
        for column in SURVEY_COLUMNS[1:]:
            value = row[column]
            if not value.isdigit():
                raise MalformedRow(survey_file, line, f"{column} must be a non-negative integer, got {value!r}")
            counts.append(int(value))
        tallies.append(LikertTally(occupation_id=occ_id, counts=tuple(counts)))

    logger.info(f"[Survey] Loaded {len(tallies)} tallies from {survey_file}")
    return tallies


def display_percent(fraction: float) -> int:
    """Integer percent, rounded half-up"""
    return int((Decimal(str(fraction)) * 100).quantize(Decimal("1"), rounding=ROUND_HALF_UP))
