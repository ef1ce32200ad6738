"""
Bias scoring against an optimal deterministic translator
"""
import logging
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from app.core.errors import InvalidOrder, MissingReference, UnscorableLabel
from app.schemas.gendering import GenderLabel
from app.schemas.lexicon import GenderShare
from app.schemas.scoring import (
    UNBOUNDED,
    BiasResult,
    BiasValue,
    Direction,
    ReferenceKind,
    ResolvedReference,
    SkippedScore,
)

logger = logging.getLogger(__name__)

ReferenceMap = Union[ResolvedReference, Mapping[str, GenderShare]]


def error_points(label: GenderLabel, share: GenderShare) -> float:
    """Percentage points of workers the chosen pronoun leaves out"""
    if label == GenderLabel.MASCULINE:
        return 100.0 * share.female
    if label == GenderLabel.FEMININE:
        return 100.0 * share.male
    raise UnscorableLabel(f"label {label.value} cannot be scored", label=label.value)


def optimal_error(share: GenderShare) -> float:
    return 100.0 * min(share.female, share.male)


def bias_score(e_t: float, e_o: float) -> BiasValue:
    """B = (E_t - E_o) / E_o; Unbounded when only the engine errs on a unanimous occupation"""
    if e_t < e_o:
        raise InvalidOrder(f"E_t {e_t} is below E_o {e_o}", e_t=e_t, e_o=e_o)
    if e_o > 0:
        return (e_t - e_o) / e_o
    if e_t == 0:
        return 0.0
    return UNBOUNDED


def direction(label: GenderLabel, share: GenderShare, bias: BiasValue) -> Direction:
    if bias != UNBOUNDED and bias == 0:
        return Direction.NONE
    if label == GenderLabel.MASCULINE and share.female > share.male:
        return Direction.AGAINST_WOMEN
    if label == GenderLabel.FEMININE and share.male > share.female:
        return Direction.AGAINST_MEN
    return Direction.NONE


def _shares(reference: ReferenceMap) -> Mapping[str, GenderShare]:
    return reference.shares if isinstance(reference, ResolvedReference) else reference


def score_occupation(
    occupation_id: str,
    label: GenderLabel,
    reference: ReferenceMap,
    kind: Optional[ReferenceKind] = None,
) -> BiasResult:
    if not label.scoreable:
        raise UnscorableLabel(f"label {label.value} cannot be scored", occupation=occupation_id, label=label.value)
    if kind is None:
        if not isinstance(reference, ResolvedReference):
            raise ValueError("kind is required when reference is a plain map")
        kind = reference.kind

    share = _shares(reference).get(occupation_id)
    if share is None:
        raise MissingReference(
            f"no {kind.value} share for occupation {occupation_id}",
            occupation=occupation_id, reference=kind.value,
        )

    e_t = error_points(label, share)
    e_o = optimal_error(share)
    bias = bias_score(e_t, e_o)
    return BiasResult(
        occupation_id=occupation_id,
        reference=kind,
        label=label,
        error_points=e_t,
        optimal_error=e_o,
        bias=bias,
        direction=direction(label, share, bias),
        female_share=share.female,
        male_share=share.male,
    )


def score_labels(
    labels: Mapping[str, GenderLabel], reference: ResolvedReference
) -> Tuple[List[BiasResult], List[SkippedScore]]:
    """Score every occupation that has both a scoreable label and a share"""
    results: List[BiasResult] = []
    skipped: List[SkippedScore] = []

    for occupation_id in sorted(labels):
        label = labels[occupation_id]
        if not label.scoreable:
            skipped.append(SkippedScore(
                occupation_id=occupation_id, reference=reference.kind, reason=f"unscorable_label:{label.value}",
            ))
        elif occupation_id not in reference.shares:
            skipped.append(SkippedScore(
                occupation_id=occupation_id, reference=reference.kind, reason="no_reference",
            ))
        else:
            results.append(score_occupation(occupation_id, label, reference))

    logger.info(
        f"[Score] {reference.kind.value}: {len(results)} scored, {len(skipped)} skipped, "
        f"{sum(1 for r in results if r.wrong)} wrong"
    )
    return results, skipped


def probabilistic_expected_error(share: GenderShare) -> float:
    """Expected error points of a translator drawing Feminine with probability = female share"""
    p = share.female
    return 200.0 * p * (1.0 - p)


def simulate_probabilistic_error(share: GenderShare, draws: int = 1_000_000, seed: int = 0) -> float:
    """Monte-Carlo estimate of probabilistic_expected_error"""
    rng = np.random.default_rng(seed)
    p = share.female
    feminine = rng.random(draws) < p
    # a feminine draw misses the men, a masculine draw misses the women
    errors = np.where(feminine, 100.0 * (1.0 - p), 100.0 * p)
    return float(errors.mean())


def display_bias(value: BiasValue, precision: int = 1) -> str:
    """Half-up rounding for reports; Unbounded stays a marker"""
    if value == UNBOUNDED:
        return UNBOUNDED
    quantum = Decimal(1).scaleb(-precision)
    rounded = Decimal(str(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)
    if rounded == 0:
        return "0"
    return str(rounded)


def results_frame_rows(results: Iterable[BiasResult], precision: int = 1) -> List[Dict[str, object]]:
    """Rows of scores.csv"""
    rows = []
    for r in results:
        rows.append({
            "occupation_id": r.occupation_id,
            "reference": r.reference.value,
            "label": r.label.value,
            "e_t": r.error_points,
            "e_o": r.optimal_error,
            "bias": "" if r.unbounded else float(r.bias),
            "bias_display": display_bias(r.bias, precision),
            "direction": r.direction.value,
            "unbounded_flag": 1 if r.unbounded else 0,
        })
    return rows
