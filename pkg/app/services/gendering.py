"""
Rule-based pronoun gender classification of translated sentences
"""
import logging
import re
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from app.core.errors import MalformedRow
from app.core.storage import iter_rows, read_csv_table
from app.schemas.gendering import GenderLabel, LabelCounts, PronounEntry, PronounGender, PronounRole
from app.schemas.sentences import SentenceRef
from app.schemas.translation import TranslationRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEFAULT_LEXICON_PATH = Path(__file__).resolve().parent.parent / "resources" / "pronoun_lexicon_en.csv"

TOKEN = re.compile(r"\w+(?:'\w+)*")  # apostrophes only inside words


def load_lexicon(lexicon_file: Optional[PathLike] = None) -> Dict[str, PronounEntry]:
    """token,gender[,role] rows; role defaults to subject"""
    path = lexicon_file or DEFAULT_LEXICON_PATH
    frame = read_csv_table(path, ("token", "gender"))
    has_role = "role" in frame.columns
    lexicon: Dict[str, PronounEntry] = {}

    for line, row in iter_rows(frame):
        token = row["token"].lower()
        if not token:
            raise MalformedRow(path, line, "token is empty")
        if token in lexicon:
            raise MalformedRow(path, line, f"duplicate token {token!r}")
        try:
            lexicon[token] = PronounEntry(
                token=token,
                gender=PronounGender(row["gender"].upper()),
                role=PronounRole(row["role"] or "subject") if has_role else PronounRole.SUBJECT,
            )
        except ValueError as e:
            raise MalformedRow(path, line, str(e))

    return lexicon


@lru_cache(maxsize=1)
def default_lexicon() -> Dict[str, PronounEntry]:
    return load_lexicon(DEFAULT_LEXICON_PATH)


def tokenize(text: str) -> List[str]:
    return TOKEN.findall(text.lower().replace("’", "'"))


def _decide(genders: List[PronounGender], first: Optional[PronounGender]) -> GenderLabel:
    if PronounGender.M in genders and PronounGender.F in genders:
        return GenderLabel.AMBIGUOUS
    if first is not None:
        genders = [first]
    if PronounGender.M in genders:
        return GenderLabel.MASCULINE
    if PronounGender.F in genders:
        return GenderLabel.FEMININE
    return GenderLabel.NEUTRAL


def classify(target_text: str, lexicon: Optional[Dict[str, PronounEntry]] = None) -> GenderLabel:
    """
    Label a sentence by its pronouns.

    Subject pronouns decide; object and possessive pronouns count only when
    no subject pronoun is present. Conflicting genders give Ambiguous, and a
    sentence-initial subject pronoun takes precedence over later agreeing ones.
    """
    lexicon = lexicon if lexicon is not None else default_lexicon()
    tokens = tokenize(target_text)
    entries = [lexicon[t] for t in tokens if t in lexicon]
    if not entries:
        return GenderLabel.UNDETECTED

    subject = [e.gender for e in entries if e.role == PronounRole.SUBJECT]
    if subject:
        head = lexicon.get(tokens[0])
        first = head.gender if head is not None and head.role == PronounRole.SUBJECT else None
        return _decide(subject, first)
    return _decide([e.gender for e in entries], None)


def classify_corpus(
    records: Iterable[TranslationRecord],
    lexicon: Optional[Dict[str, PronounEntry]] = None,
) -> Dict[SentenceRef, GenderLabel]:
    """Failed translations are labelled Undetected"""
    lexicon = lexicon if lexicon is not None else default_lexicon()
    labels: Dict[SentenceRef, GenderLabel] = {}
    for record in records:
        if not record.ok:
            labels[record.sentence_ref] = GenderLabel.UNDETECTED
        else:
            labels[record.sentence_ref] = classify(record.target_text, lexicon)
    return labels


def label_counts(labels: Iterable[GenderLabel], translation_failures: int = 0) -> LabelCounts:
    counts = LabelCounts(translation_failures=translation_failures)
    for label in labels:
        setattr(counts, label.value, getattr(counts, label.value) + 1)
    return counts


def corpus_label_counts(
    records: Iterable[TranslationRecord], labels: Dict[SentenceRef, GenderLabel]
) -> LabelCounts:
    records = list(records)
    failures = sum(1 for r in records if not r.ok)
    counts = label_counts(labels.values(), translation_failures=failures)
    logger.info(f"[Classify] {len(labels)} labels: {counts.as_dict()}")
    return counts
