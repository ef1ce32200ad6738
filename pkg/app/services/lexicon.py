"""
Occupation registry: loading, SOC resolution, validation and reference shares
"""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from app.core.errors import (
    DuplicateOccupation,
    MalformedRow,
    MissingCategory,
    MissingReference,
    MissingWeight,
)
from app.core.storage import iter_rows, read_csv_table
from app.schemas.lexicon import (
    ClassificationSystem,
    CrosswalkEntry,
    ExclusionKind,
    ExclusionRule,
    GenderShare,
    Issue,
    IssueKind,
    Occupation,
    OccupationCategory,
    Registry,
)
from app.schemas.scoring import ReferenceKind, ResolvedReference

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

OCCUPATION_COLUMNS = (
    "id", "name_source", "name_gloss", "feor_code", "soc_code",
    "isco_code", "sector_id", "excluded_kind", "excluded_note",
)
CATEGORY_COLUMNS = ("code", "name", "female_pct", "male_pct", "employment_count")
CROSSWALK_COLUMNS = ("feor_code", "isco_code", "soc_code", "override")
SECTOR_COLUMNS = ("sector_id", "name")

OMITTED_SUPPRESSED = "suppressed"
OMITTED_UNLINKED = "unlinked"


def _parse_percent(value: str, path: PathLike, line: int, column: str) -> float:
    try:
        pct = float(value)
    except ValueError:
        raise MalformedRow(path, line, f"{column} is not a number: {value!r}")
    if not 0.0 <= pct <= 100.0:
        raise MalformedRow(path, line, f"{column} out of range 0-100: {value}")
    return pct


def _parse_count(value: str, path: PathLike, line: int) -> Optional[int]:
    if value == "":
        return None
    try:
        number = float(value)
    except ValueError:
        raise MalformedRow(path, line, f"employment_count is not a number: {value!r}")
    if not number.is_integer():
        raise MalformedRow(path, line, f"employment_count is not an integer: {value}")
    return int(number)


def _load_categories(
    path: PathLike, system: ClassificationSystem
) -> Dict[str, Tuple[str, Optional[GenderShare], Optional[int]]]:
    frame = read_csv_table(path, CATEGORY_COLUMNS)
    rows: Dict[str, Tuple[str, Optional[GenderShare], Optional[int]]] = {}

    for line, row in iter_rows(frame):
        code = row["code"]
        if not code:
            raise MalformedRow(path, line, "code is empty")
        if code in rows:
            raise MalformedRow(path, line, f"duplicate {system.value} code {code}")

        female, male = row["female_pct"], row["male_pct"]
        if female == "" and male == "":
            share = None  # suppressed / not published
        elif female == "" or male == "":
            raise MalformedRow(path, line, "female_pct and male_pct must both be set or both blank")
        else:
            share = GenderShare.from_percent(
                _parse_percent(female, path, line, "female_pct"),
                _parse_percent(male, path, line, "male_pct"),
            )

        rows[code] = (row["name"], share, _parse_count(row["employment_count"], path, line))

    return rows


def _load_crosswalk(path: PathLike) -> List[CrosswalkEntry]:
    frame = read_csv_table(path, CROSSWALK_COLUMNS)
    entries: List[CrosswalkEntry] = []
    seen = set()

    for line, row in iter_rows(frame):
        if not row["feor_code"] or not row["soc_code"]:
            raise MalformedRow(path, line, "feor_code and soc_code are required")
        if row["override"] not in ("0", "1", ""):
            raise MalformedRow(path, line, f"override must be 0 or 1, got {row['override']!r}")
        pair = (row["feor_code"], row["soc_code"])
        if pair in seen:
            raise MalformedRow(path, line, f"duplicate crosswalk pair {pair[0]} -> {pair[1]}")
        seen.add(pair)
        entries.append(
            CrosswalkEntry(
                feor_code=row["feor_code"],
                isco_code=row["isco_code"] or None,
                soc_code=row["soc_code"],
                override=row["override"] == "1",
            )
        )

    return entries


def load_sectors(sectors_file: PathLike) -> Dict[str, str]:
    """Read sectors.csv into sector_id -> name"""
    frame = read_csv_table(sectors_file, SECTOR_COLUMNS)
    sectors: Dict[str, str] = {}
    for line, row in iter_rows(frame):
        if not row["sector_id"]:
            raise MalformedRow(sectors_file, line, "sector_id is empty")
        if row["sector_id"] in sectors:
            raise MalformedRow(sectors_file, line, f"duplicate sector {row['sector_id']}")
        sectors[row["sector_id"]] = row["name"]
    return dict(sorted(sectors.items()))


def crosswalk_candidates(feor_code: str, crosswalk: Iterable[CrosswalkEntry]) -> List[CrosswalkEntry]:
    """SOC candidates for a FEOR code; manual overrides replace the official rows"""
    entries = [e for e in crosswalk if e.feor_code == feor_code]
    overrides = [e for e in entries if e.override]
    return overrides or entries


def _parse_exclusion(row: dict, path: PathLike, line: int) -> Optional[ExclusionRule]:
    kind, note = row["excluded_kind"], row["excluded_note"]
    if not kind:
        if note:
            raise MalformedRow(path, line, "excluded_note given without excluded_kind")
        return None
    try:
        return ExclusionRule(kind=ExclusionKind(kind), note=note)
    except ValueError:
        raise MalformedRow(path, line, f"unknown exclusion kind {kind!r}")


def load_registry(
    occupations_file: PathLike,
    categories_files: Sequence[PathLike],
    crosswalk_file: PathLike,
    sectors_file: Optional[PathLike] = None,
) -> Registry:
    """
    Load the occupation registry.

    categories_files is the (FEOR, SOC) pair of category tables.
    """
    if len(categories_files) != 2:
        raise ValueError("categories_files must be the (FEOR, SOC) pair")
    feor_path, soc_path = categories_files

    feor_rows = _load_categories(feor_path, ClassificationSystem.FEOR)
    soc_rows = _load_categories(soc_path, ClassificationSystem.SOC)
    crosswalk = _load_crosswalk(crosswalk_file)
    sectors = load_sectors(sectors_file) if sectors_file is not None else {}

    frame = read_csv_table(occupations_file, OCCUPATION_COLUMNS)
    occupations: List[Occupation] = []
    ids, names = set(), set()

    for line, row in iter_rows(frame):
        occ_id, name = row["id"], row["name_source"]
        if not occ_id:
            raise MalformedRow(occupations_file, line, "id is empty")
        if not name:
            raise MalformedRow(occupations_file, line, "name_source is empty")
        if not row["feor_code"]:
            raise MalformedRow(occupations_file, line, "feor_code is empty")
        if not row["sector_id"]:
            raise MalformedRow(occupations_file, line, "sector_id is empty")
        if occ_id in ids:
            raise DuplicateOccupation(f"duplicate occupation id {occ_id}", id=occ_id, line=line)
        if name in names:
            raise DuplicateOccupation(f"duplicate occupation name {name}", name=name, line=line)
        ids.add(occ_id)
        names.add(name)

        feor_code = row["feor_code"]
        if feor_code not in feor_rows:
            raise MissingCategory(
                f"occupation {occ_id} references unknown FEOR code {feor_code}",
                occupation=occ_id, code=feor_code, line=line,
            )

        soc_code: Optional[str] = row["soc_code"] or None
        soc_override = False
        isco_code: Optional[str] = row["isco_code"] or None

        if soc_code is not None:
            if soc_code not in soc_rows:
                raise MissingCategory(
                    f"occupation {occ_id} references unknown SOC code {soc_code}",
                    occupation=occ_id, code=soc_code, line=line,
                )
            match = [e for e in crosswalk if e.feor_code == feor_code and e.soc_code == soc_code]
            soc_override = any(e.override for e in match)
            if isco_code is None and match:
                isco_code = match[0].isco_code
        else:
            candidates = crosswalk_candidates(feor_code, crosswalk)
            if len(candidates) == 1:
                soc_code = candidates[0].soc_code
                soc_override = candidates[0].override
                if isco_code is None:
                    isco_code = candidates[0].isco_code
            elif candidates and isco_code is None:
                iscos = {e.isco_code for e in candidates}
                if len(iscos) == 1:
                    isco_code = iscos.pop()

        occupations.append(
            Occupation(
                id=occ_id,
                name_source=name,
                name_gloss=row["name_gloss"] or None,
                feor_code=feor_code,
                soc_code=soc_code,
                soc_override=soc_override,
                isco_code=isco_code,
                sector_id=row["sector_id"],
                excluded=_parse_exclusion(row, occupations_file, line),
            )
        )

    occupations.sort(key=lambda o: o.id)

    members: Dict[Tuple[ClassificationSystem, str], List[str]] = defaultdict(list)
    for occupation in occupations:
        members[(ClassificationSystem.FEOR, occupation.feor_code)].append(occupation.id)
        if occupation.soc_code is not None:
            members[(ClassificationSystem.SOC, occupation.soc_code)].append(occupation.id)

    def build(rows, system: ClassificationSystem) -> Dict[str, OccupationCategory]:
        return {
            code: OccupationCategory(
                code=code,
                system=system,
                name=name,
                share=share,
                employment_count=count,
                members=tuple(members.get((system, code), ())),
            )
            for code, (name, share, count) in sorted(rows.items())
        }

    registry = Registry(
        occupations=tuple(occupations),
        feor=build(feor_rows, ClassificationSystem.FEOR),
        soc=build(soc_rows, ClassificationSystem.SOC),
        crosswalk=tuple(sorted(crosswalk, key=lambda e: (e.feor_code, e.soc_code))),
        sectors=sectors,
    )

    logger.info(
        f"[Lexicon] Loaded {len(occupations)} occupations "
        f"({len(registry.scoreable())} scoreable), {len(registry.feor)} FEOR / "
        f"{len(registry.soc)} SOC categories, {len(crosswalk)} crosswalk rows"
    )
    return registry


def validate_registry(registry: Registry) -> List[Issue]:
    """Consistency checks; an empty list means the registry is clean"""
    issues: List[Issue] = []

    for system in ClassificationSystem:
        for code, category in registry.categories(system).items():
            subject = f"{system.value}:{code}"
            if category.share is not None and not category.share.is_consistent:
                total = category.share.female + category.share.male
                issues.append(Issue(
                    kind=IssueKind.SHARE_SUM_VIOLATION,
                    subject=subject,
                    message=f"female + male = {total:.6f}, expected 1",
                ))
            if category.employment_count is not None and category.employment_count < 0:
                issues.append(Issue(
                    kind=IssueKind.NEGATIVE_COUNT,
                    subject=subject,
                    message=f"employment_count {category.employment_count} is negative",
                ))

    for entry in registry.crosswalk:
        dangling = []
        if entry.feor_code not in registry.feor:
            dangling.append(f"FEOR {entry.feor_code}")
        if entry.soc_code not in registry.soc:
            dangling.append(f"SOC {entry.soc_code}")
        if dangling:
            issues.append(Issue(
                kind=IssueKind.DANGLING_CROSSWALK,
                subject=f"{entry.feor_code}->{entry.soc_code}",
                message=f"unknown {' and '.join(dangling)}",
            ))

    pairs = {(e.feor_code, e.soc_code) for e in registry.crosswalk}
    for occupation in registry.scoreable():
        feor = registry.feor.get(occupation.feor_code)
        if feor is not None and feor.share is None:
            issues.append(Issue(
                kind=IssueKind.MISSING_SHARE,
                subject=occupation.id,
                message=f"FEOR category {occupation.feor_code} has no gender share",
            ))

        if occupation.soc_code is None:
            candidates = crosswalk_candidates(occupation.feor_code, registry.crosswalk)
            if len(candidates) > 1:
                codes = ", ".join(e.soc_code for e in candidates)
                issues.append(Issue(
                    kind=IssueKind.AMBIGUOUS_CROSSWALK,
                    subject=occupation.id,
                    message=f"FEOR {occupation.feor_code} maps to several SOC codes: {codes}",
                ))
        elif registry.crosswalk and (occupation.feor_code, occupation.soc_code) not in pairs:
            issues.append(Issue(
                kind=IssueKind.UNLISTED_CROSSWALK_PAIR,
                subject=occupation.id,
                message=f"pair {occupation.feor_code} -> {occupation.soc_code} is not in the crosswalk",
            ))

        for system in ClassificationSystem:
            category = registry.category_of(occupation, system)
            if category is not None and category.share is not None and category.employment_count is None:
                issues.append(Issue(
                    kind=IssueKind.MISSING_WEIGHT,
                    subject=occupation.id,
                    message=f"{system.value} category {category.code} has a share but no employment count",
                ))

        if registry.sectors and occupation.sector_id not in registry.sectors:
            issues.append(Issue(
                kind=IssueKind.UNKNOWN_SECTOR,
                subject=occupation.id,
                message=f"sector {occupation.sector_id} is not listed",
            ))

    issues.sort(key=lambda i: (i.kind.value, i.subject))
    if issues:
        logger.warning(f"[Lexicon] Validation found {len(issues)} issue(s)")
    return issues


def resolve_reference(registry: Registry, kind: ReferenceKind) -> ResolvedReference:
    """Statistical shares per scoreable occupation; suppressed or unlinked ones are listed as omitted"""
    if kind == ReferenceKind.PERCEPTION:
        raise MissingReference("perception shares come from survey tallies, not the registry", kind=kind.value)

    system = kind.system
    shares: Dict[str, GenderShare] = {}
    omitted: Dict[str, str] = {}

    for occupation in registry.scoreable():
        category = registry.category_of(occupation, system)
        if category is None:
            omitted[occupation.id] = OMITTED_UNLINKED
        elif category.share is None:
            omitted[occupation.id] = OMITTED_SUPPRESSED
        else:
            shares[occupation.id] = category.share

    logger.debug(f"[Lexicon] {kind.value}: {len(shares)} covered, {len(omitted)} omitted")
    return ResolvedReference(kind=kind, shares=shares, omitted=omitted)


def employment_weight(
    registry: Registry, occupation: Occupation, system: ClassificationSystem
) -> float:
    """Category head count split evenly over its non-excluded occupations"""
    category = registry.category_of(occupation, system)
    if category is None or category.employment_count is None:
        raise MissingWeight(
            f"occupation {occupation.id} has no {system.value} employment count",
            occupation=occupation.id, system=system.value,
        )
    by_id = registry.by_id()
    active = [m for m in category.members if m in by_id and by_id[m].is_scoreable]
    if not active:
        raise MissingWeight(f"category {category.code} has no scoreable members", code=category.code)
    return category.employment_count / len(active)


def sector_coverage(
    registry: Registry, resolutions: Iterable[ResolvedReference]
) -> List[dict]:
    """Scoreable occupations per sector that each reference covers"""
    resolutions = list(resolutions)
    sector_ids = sorted(set(registry.sectors) | {o.sector_id for o in registry.scoreable()})
    rows = []
    for sector_id in sector_ids:
        in_sector = [o.id for o in registry.scoreable() if o.sector_id == sector_id]
        for resolution in resolutions:
            rows.append({
                "sector_id": sector_id,
                "reference": resolution.kind.value,
                "n_occupations": sum(1 for occ_id in in_sector if occ_id in resolution.shares),
                "n_total": len(in_sector),
            })
    return rows
