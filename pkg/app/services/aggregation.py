"""
Roll-ups of per-occupation bias: categories, sectors, summaries, adjective effects
"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from app.core.errors import EmptyGroup, InsufficientData, MissingWeight
from app.schemas.aggregation import (
    BiasDistribution,
    CategoryBias,
    ChangeMatrix,
    CorrelationResult,
    DirectionSplit,
    Dominance,
    MisgenderedRow,
    PronounDistribution,
    SectorDominanceBias,
    SectorReport,
    SummaryStats,
    WeightBasis,
)
from app.schemas.gendering import GenderLabel
from app.schemas.lexicon import GenderShare, Registry
from app.schemas.scoring import BiasResult, Direction, ReferenceKind
from app.services.lexicon import employment_weight

logger = logging.getLogger(__name__)


def _single_reference(results: Sequence[BiasResult]) -> Optional[ReferenceKind]:
    kinds = {r.reference for r in results}
    if len(kinds) > 1:
        raise ValueError(f"results mix reference kinds: {sorted(k.value for k in kinds)}")
    return kinds.pop() if kinds else None


def _dominance(result: BiasResult) -> Optional[Dominance]:
    if result.female_share > result.male_share:
        return Dominance.FEMALE_DOMINATED
    if result.male_share > result.female_share:
        return Dominance.MALE_DOMINATED
    return None  # exact tie


def category_bias(
    results: Sequence[BiasResult],
    category_code: str = "",
    category_name: str = "",
) -> CategoryBias:
    """Unweighted mean of the members' finite B"""
    results = list(results)
    if not results:
        raise EmptyGroup(f"category {category_code or '?'} has no scored occupations", category=category_code)
    reference = _single_reference(results)

    finite = [r.finite_bias for r in results if not r.unbounded]
    return CategoryBias(
        reference=reference,
        category_code=category_code,
        category_name=category_name,
        mean_bias=float(np.mean(finite)) if finite else None,
        n_members=len(results),
        unbounded_count=len(results) - len(finite),
    )


def category_biases(
    results: Sequence[BiasResult], registry: Registry, kind: ReferenceKind
) -> List[CategoryBias]:
    """Group by FEOR category (source, perception) or SOC category (target)"""
    system = kind.system
    groups: Dict[str, List[BiasResult]] = defaultdict(list)
    by_id = registry.by_id()

    for result in results:
        occupation = by_id.get(result.occupation_id)
        category = registry.category_of(occupation, system) if occupation else None
        if category is not None:
            groups[category.code].append(result)

    categories = registry.categories(system)
    return [
        category_bias(groups[code], code, categories[code].name)
        for code in sorted(groups)
    ]


def occupation_weight(
    result: BiasResult, registry: Registry, basis: WeightBasis = WeightBasis.EMPLOYMENT
) -> float:
    occupation = registry.get(result.occupation_id)
    weight = employment_weight(registry, occupation, result.reference.system)
    if basis == WeightBasis.GENDER_HEADCOUNT:
        weight *= max(result.female_share, result.male_share)
    if weight <= 0:
        raise MissingWeight(
            f"occupation {result.occupation_id} has a non-positive weight",
            occupation=result.occupation_id,
        )
    return weight


def sector_dominance_bias(
    results: Sequence[BiasResult],
    registry: Registry,
    sector_id: str,
    dominance: Dominance,
    basis: WeightBasis = WeightBasis.EMPLOYMENT,
) -> SectorDominanceBias:
    """Weighted mean of B over one dominance class of one sector; weightless occupations are counted, not averaged"""
    reference = _single_reference(results)
    by_id = registry.by_id()
    members = [
        r for r in results
        if r.occupation_id in by_id
        and by_id[r.occupation_id].sector_id == sector_id
        and _dominance(r) == dominance
    ]
    if not members:
        raise EmptyGroup(
            f"sector {sector_id} has no {dominance.value} occupations",
            sector=sector_id, dominance=dominance.value,
        )

    finite = [r for r in members if not r.unbounded]
    weighted_results, weights, unweighted = [], [], 0
    for r in finite:
        try:
            weights.append(occupation_weight(r, registry, basis))
        except MissingWeight as e:
            logger.warning(f"[Aggregate] {e.message}; left out of sector {sector_id}")
            unweighted += 1
            continue
        weighted_results.append(r)

    weighted = (
        float(np.average([r.finite_bias for r in weighted_results], weights=weights))
        if weighted_results else None
    )
    return SectorDominanceBias(
        reference=reference,
        sector_id=sector_id,
        dominance=dominance,
        weighted_bias=weighted,
        n_occupations=len(members),
        unbounded_count=len(members) - len(finite),
        unweighted_count=unweighted,
        total_weight=float(sum(weights)),
    )


def _sector_ids(results: Sequence[BiasResult], registry: Registry) -> List[str]:
    by_id = registry.by_id()
    return sorted({by_id[r.occupation_id].sector_id for r in results if r.occupation_id in by_id})


def sector_bias(
    results: Sequence[BiasResult],
    registry: Registry,
    dominance: Dominance,
    basis: WeightBasis = WeightBasis.EMPLOYMENT,
) -> List[SectorDominanceBias]:
    """One entry per sector that has occupations in the class; the others are absent"""
    entries = []
    for sector_id in _sector_ids(results, registry):
        try:
            entries.append(sector_dominance_bias(results, registry, sector_id, dominance, basis))
        except EmptyGroup as e:
            logger.debug(f"[Aggregate] {e.message}")
    return entries


def sector_report(
    results: Sequence[BiasResult],
    registry: Registry,
    basis: WeightBasis = WeightBasis.EMPLOYMENT,
) -> List[SectorReport]:
    reference = _single_reference(results)
    female = {e.sector_id: e for e in sector_bias(results, registry, Dominance.FEMALE_DOMINATED, basis)}
    male = {e.sector_id: e for e in sector_bias(results, registry, Dominance.MALE_DOMINATED, basis)}
    return [
        SectorReport(
            reference=reference,
            sector_id=sector_id,
            sector_name=registry.sectors.get(sector_id, ""),
            weights_basis=basis,
            female_dominated=female.get(sector_id),
            male_dominated=male.get(sector_id),
        )
        for sector_id in _sector_ids(results, registry)
    ]


def summary_stats(results: Sequence[BiasResult], reference: ReferenceKind) -> SummaryStats:
    results = [r for r in results if r.reference == reference]
    n = len(results)
    wrong = [r for r in results if r.wrong]

    split = None
    if wrong:
        he_for_she = sum(1 for r in wrong if r.direction == Direction.AGAINST_WOMEN)
        split = DirectionSplit(
            he_for_she=he_for_she / len(wrong),
            she_for_he=(len(wrong) - he_for_she) / len(wrong),
        )

    female = [r for r in results if _dominance(r) == Dominance.FEMALE_DOMINATED]
    male = [r for r in results if _dominance(r) == Dominance.MALE_DOMINATED]

    def rate(group: List[BiasResult]) -> Optional[float]:
        return sum(1 for r in group if r.wrong) / len(group) if group else None

    positive = sorted(r.finite_bias for r in results if not r.unbounded and r.finite_bias > 0)
    distribution = BiasDistribution(count=len(positive))
    if positive:
        distribution = BiasDistribution(
            min=positive[0],
            median=float(np.median(positive)),
            max=positive[-1],
            count=len(positive),
        )

    return SummaryStats(
        reference=reference,
        n_scoreable=n,
        n_wrong=len(wrong),
        wrong_fraction=len(wrong) / n if n else 0.0,
        wrong_direction_split=split,
        n_female_dominated=len(female),
        n_male_dominated=len(male),
        wrong_given_female_dominated=rate(female),
        wrong_given_male_dominated=rate(male),
        bias_distribution=distribution,
        unbounded_count=sum(1 for r in results if r.unbounded),
    )


def adjective_change_matrix(
    base_labels: Mapping[str, GenderLabel],
    adjective_labels: Mapping[str, GenderLabel],
    adjective_id: str,
) -> ChangeMatrix:
    """Cross-tabulate he/she between base and adjective sentences of the same occupation"""
    matrix = ChangeMatrix(adjective_id=adjective_id)
    she, he = GenderLabel.FEMININE, GenderLabel.MASCULINE
    cells = {(she, she): "she_she", (he, he): "he_he", (she, he): "she_he", (he, she): "he_she"}

    for occupation_id in sorted(set(base_labels) & set(adjective_labels)):
        cell = cells.get((base_labels[occupation_id], adjective_labels[occupation_id]))
        if cell is not None:
            setattr(matrix, cell, getattr(matrix, cell) + 1)
    return matrix


def pronoun_distribution(labels: Iterable[GenderLabel], variant: str = "base") -> PronounDistribution:
    labels = list(labels)
    n = len(labels)
    if n == 0:
        return PronounDistribution(variant=variant, n=0, masculine=0.0, feminine=0.0, other=0.0)
    masculine = sum(1 for label in labels if label == GenderLabel.MASCULINE)
    feminine = sum(1 for label in labels if label == GenderLabel.FEMININE)
    return PronounDistribution(
        variant=variant,
        n=n,
        masculine=masculine / n,
        feminine=feminine / n,
        other=(n - masculine - feminine) / n,
    )


def pronoun_table(
    base_labels: Mapping[str, GenderLabel],
    adjective_labels: Mapping[str, Mapping[str, GenderLabel]],
) -> List[PronounDistribution]:
    rows = [pronoun_distribution(base_labels.values(), "base")]
    for adjective_id, labels in adjective_labels.items():
        rows.append(pronoun_distribution(labels.values(), adjective_id))
    return rows


def _female(value) -> float:
    return value.female if isinstance(value, GenderShare) else float(value)


def perception_correlation(
    perception: Mapping[str, GenderShare], census: Mapping[str, GenderShare]
) -> CorrelationResult:
    """Pearson r between femininity and female employment share over shared occupations"""
    common = sorted(set(perception) & set(census))
    if len(common) < 3:
        raise InsufficientData(f"need at least 3 shared occupations, got {len(common)}", n=len(common))

    x = np.array([_female(perception[o]) for o in common])
    y = np.array([_female(census[o]) for o in common])
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise InsufficientData("one of the inputs is constant", n=len(common))

    r, _ = stats.pearsonr(x, y)
    return CorrelationResult(pearson_r=float(r), n=len(common), occupations=common)


def perception_scatter(
    perception: Mapping[str, GenderShare], census: Mapping[str, GenderShare], registry: Registry
) -> List[dict]:
    """Plot-ready points: femininity vs female employment share"""
    by_id = registry.by_id()
    return [
        {
            "occupation_id": occ_id,
            "name": by_id[occ_id].label if occ_id in by_id else occ_id,
            "femininity": _female(perception[occ_id]),
            "female_share": _female(census[occ_id]),
        }
        for occ_id in sorted(set(perception) & set(census))
    ]


def misgendered_table(
    results_by_reference: Mapping[ReferenceKind, Sequence[BiasResult]],
    registry: Registry,
    primary: ReferenceKind = ReferenceKind.PERCEPTION,
    secondary: ReferenceKind = ReferenceKind.SOURCE_STATS,
) -> List[MisgenderedRow]:
    """Occupations wrong under the primary reference, with their bias under both"""
    primary_results = results_by_reference.get(primary, [])
    secondary_by_id = {r.occupation_id: r for r in results_by_reference.get(secondary, [])}
    by_id = registry.by_id()

    rows = []
    for result in sorted(primary_results, key=lambda r: r.occupation_id):
        if not result.wrong:
            continue
        other = secondary_by_id.get(result.occupation_id)
        rows.append(MisgenderedRow(
            occupation_id=result.occupation_id,
            name=by_id[result.occupation_id].label if result.occupation_id in by_id else result.occupation_id,
            label=result.label.value,
            direction=result.direction.value,
            primary_bias=result.finite_bias,
            primary_unbounded=result.unbounded,
            secondary_bias=other.finite_bias if other else None,
            secondary_unbounded=other.unbounded if other else False,
        ))
    return rows
