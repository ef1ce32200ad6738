"""
Sentence generation from occupation names
"""
import logging
import re
from pathlib import Path
from typing import Iterable, List, Optional, Union

from pydantic import ValidationError

from app.core.errors import ConfigError, MalformedRow, PlaceholderMismatch
from app.core.storage import iter_rows, read_csv_table
from app.schemas.lexicon import Occupation, Registry
from app.schemas.sentences import (
    ADJ_PLACEHOLDER,
    OCC_PLACEHOLDER,
    AdjectiveVariant,
    Polarity,
    SentenceTemplate,
    SentenceUnit,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEFAULT_TEMPLATES = (
    SentenceTemplate(id="base", pattern="ő egy {occ}"),
    SentenceTemplate(id="capital", pattern="Ő egy {occ}"),
    SentenceTemplate(id="no_article", pattern="ő {occ}"),
    SentenceTemplate(id="adj", pattern="ő egy {adj} {occ}"),
)

DEFAULT_ADJECTIVES = (
    AdjectiveVariant(id="jo", text="jó", polarity=Polarity.POSITIVE, intensified=False),
    AdjectiveVariant(id="nagyon_jo", text="nagyon jó", polarity=Polarity.POSITIVE, intensified=True),
    AdjectiveVariant(id="rossz", text="rossz", polarity=Polarity.NEGATIVE, intensified=False),
    AdjectiveVariant(id="nagyon_rossz", text="nagyon rossz", polarity=Polarity.NEGATIVE, intensified=True),
)


def render(
    occupation: Occupation,
    template: SentenceTemplate,
    adjective: Optional[AdjectiveVariant] = None,
) -> SentenceUnit:
    """Plain substitution of the occupation (and adjective) into the pattern"""
    if template.takes_adjective and adjective is None:
        raise PlaceholderMismatch(
            f"template {template.id} needs an adjective", template=template.id
        )
    if not template.takes_adjective and adjective is not None:
        raise PlaceholderMismatch(
            f"template {template.id} has no {ADJ_PLACEHOLDER} slot", template=template.id
        )

    text = template.pattern
    if adjective is not None:
        text = text.replace(ADJ_PLACEHOLDER, adjective.text)
    text = text.replace(OCC_PLACEHOLDER, occupation.name_source).rstrip()

    return SentenceUnit(
        occupation_id=occupation.id,
        template_id=template.id,
        adjective_id=adjective.id if adjective else None,
        source_text=text,
    )


def generate_corpus(
    registry: Registry,
    templates: Iterable[SentenceTemplate],
    adjectives: Iterable[AdjectiveVariant],
) -> List[SentenceUnit]:
    """
    One base unit per (occupation, template without {adj}) and one unit per
    (occupation, template with {adj}, adjective). Excluded occupations are skipped.
    """
    templates = list(templates)
    adjectives = list(adjectives)
    units: List[SentenceUnit] = []

    for occupation in registry.scoreable():
        for template in templates:
            if template.takes_adjective:
                units.extend(render(occupation, template, adjective) for adjective in adjectives)
            else:
                units.append(render(occupation, template))

    units.sort(key=lambda u: u.ref.sort_key())
    logger.info(f"[Sentences] Generated {len(units)} units for {len(registry.scoreable())} occupations")
    return units


def parse_occupation(
    template: SentenceTemplate,
    source_text: str,
    adjective: Optional[AdjectiveVariant] = None,
) -> str:
    """Recover the occupation name from a rendered sentence"""
    pattern = re.escape(template.pattern.rstrip())
    if template.takes_adjective:
        if adjective is None:
            raise PlaceholderMismatch(f"template {template.id} needs an adjective", template=template.id)
        pattern = pattern.replace(re.escape(ADJ_PLACEHOLDER), re.escape(adjective.text))
    pattern = pattern.replace(re.escape(OCC_PLACEHOLDER), "(?P<occ>.+?)")

    match = re.fullmatch(pattern, source_text)
    if match is None:
        raise PlaceholderMismatch(
            f"{source_text!r} does not match template {template.id}", template=template.id
        )
    return match.group("occ")


def export_document(units: Iterable[SentenceUnit]) -> str:
    """One sentence per line, LF endings"""
    return "".join(f"{unit.source_text}\n" for unit in units)


def load_templates(templates_file: Optional[PathLike] = None) -> List[SentenceTemplate]:
    if templates_file is None:
        return list(DEFAULT_TEMPLATES)

    frame = read_csv_table(templates_file, ("id", "pattern"))
    templates: List[SentenceTemplate] = []
    for line, row in iter_rows(frame):
        if any(t.id == row["id"] for t in templates):
            raise MalformedRow(templates_file, line, f"duplicate template {row['id']}")
        try:
            templates.append(SentenceTemplate(id=row["id"], pattern=row["pattern"]))
        except ValidationError as e:
            raise MalformedRow(templates_file, line, e.errors()[0]["msg"])
    return templates


def load_adjectives(adjectives_file: Optional[PathLike] = None) -> List[AdjectiveVariant]:
    if adjectives_file is None:
        return list(DEFAULT_ADJECTIVES)

    frame = read_csv_table(adjectives_file, ("id", "text", "polarity", "intensified"))
    adjectives: List[AdjectiveVariant] = []
    for line, row in iter_rows(frame):
        if any(a.id == row["id"] for a in adjectives):
            raise MalformedRow(adjectives_file, line, f"duplicate adjective {row['id']}")
        if row["intensified"] not in ("0", "1"):
            raise MalformedRow(adjectives_file, line, "intensified must be 0 or 1")
        try:
            adjectives.append(
                AdjectiveVariant(
                    id=row["id"],
                    text=row["text"],
                    polarity=row["polarity"],
                    intensified=row["intensified"] == "1",
                )
            )
        except ValidationError as e:
            raise MalformedRow(adjectives_file, line, e.errors()[0]["msg"])
    return adjectives


def select(items: list, ids: Optional[Iterable[str]], what: str) -> list:
    """Keep the requested ids in the requested order; None keeps everything"""
    if ids is None:
        return list(items)
    by_id = {item.id: item for item in items}
    unknown = [i for i in ids if i not in by_id]
    if unknown:
        raise ConfigError(f"unknown {what}: {', '.join(unknown)}", ids=unknown)
    return [by_id[i] for i in ids]
