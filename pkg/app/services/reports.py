"""
Tabular artifacts and the markdown report
"""
import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import pandas as pd

from app.core.config import AuditConfig
from app.schemas.aggregation import (
    CategoryBias,
    ChangeMatrix,
    MisgenderedRow,
    PronounDistribution,
    SectorReport,
)
from app.services.scoring import display_bias

SCORE_COLUMNS = [
    "occupation_id", "reference", "label", "e_t", "e_o",
    "bias", "bias_display", "direction", "unbounded_flag",
]
CATEGORY_COLUMNS = [
    "reference", "category_code", "category_name", "mean_bias",
    "mean_bias_display", "n_members", "unbounded_count",
]
SECTOR_COLUMNS = [
    "reference", "sector_id", "dominance", "weighted_bias",
    "n_occupations", "unbounded_count", "unweighted_count", "weights_basis",
]
CHANGE_COLUMNS = [
    "adjective_id", "she_she", "he_he", "she_he", "he_she",
    "n_paired", "changed_pct", "unchanged_pct", "dominant_change",
]
PRONOUN_COLUMNS = ["variant", "n", "masculine", "feminine", "other"]
MISGENDERED_COLUMNS = [
    "occupation_id", "name", "label", "direction",
    "primary_bias", "primary_unbounded", "secondary_bias", "secondary_unbounded",
]


def _blank(value: Optional[float]):
    return "" if value is None else value


def categories_frame(categories: Iterable[CategoryBias], precision: int = 1) -> pd.DataFrame:
    rows = [
        {
            "reference": c.reference.value,
            "category_code": c.category_code,
            "category_name": c.category_name,
            "mean_bias": _blank(c.mean_bias),
            "mean_bias_display": "" if c.mean_bias is None else display_bias(c.mean_bias, precision),
            "n_members": c.n_members,
            "unbounded_count": c.unbounded_count,
        }
        for c in categories
    ]
    return pd.DataFrame(rows, columns=CATEGORY_COLUMNS)


def sectors_frame(sector_reports: Iterable[SectorReport]) -> pd.DataFrame:
    """Absent dominance classes produce no row"""
    rows = []
    for report in sector_reports:
        for entry in (report.female_dominated, report.male_dominated):
            if entry is None:
                continue
            rows.append({
                "reference": report.reference.value,
                "sector_id": report.sector_id,
                "dominance": entry.dominance.value,
                "weighted_bias": _blank(entry.weighted_bias),
                "n_occupations": entry.n_occupations,
                "unbounded_count": entry.unbounded_count,
                "unweighted_count": entry.unweighted_count,
                "weights_basis": report.weights_basis.value,
            })
    return pd.DataFrame(rows, columns=SECTOR_COLUMNS)


def change_matrix_frame(matrix: ChangeMatrix) -> pd.DataFrame:
    return pd.DataFrame([{
        "adjective_id": matrix.adjective_id,
        "she_she": matrix.she_she,
        "he_he": matrix.he_he,
        "she_he": matrix.she_he,
        "he_she": matrix.he_she,
        "n_paired": matrix.n_paired,
        "changed_pct": matrix.changed_pct,
        "unchanged_pct": matrix.unchanged_pct,
        "dominant_change": matrix.dominant_change,
    }], columns=CHANGE_COLUMNS)


def pronoun_frame(rows: Sequence[PronounDistribution]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in rows], columns=PRONOUN_COLUMNS)


def misgendered_frame(rows: Sequence[MisgenderedRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [{**r.model_dump(), "primary_bias": _blank(r.primary_bias), "secondary_bias": _blank(r.secondary_bias)} for r in rows],
        columns=MISGENDERED_COLUMNS,
    )


def _pct(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{100 * value:.1f}%"


def _num(value, precision: int) -> str:
    if value is None or value == "" or (isinstance(value, float) and pd.isna(value)):
        return "n/a"
    return display_bias(float(value), precision)


def _table(header: List[str], rows: List[List[str]]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(str(c) for c in row) + " |" for row in rows)
    return lines


def _read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def render_report(out: Path, config: AuditConfig) -> str:
    """Markdown summary built from the aggregate artifacts"""
    out = Path(out)
    agg = out / "aggregate"
    precision = config.display_precision
    summaries = json.loads((agg / "summary.json").read_text(encoding="utf-8"))
    label_counts = json.loads((out / "label_counts.json").read_text(encoding="utf-8"))
    coverage = json.loads((out / "score_coverage.json").read_text(encoding="utf-8"))

    lines = [
        "# Pronoun bias audit",
        "",
        f"Engine: `{config.engine.engine_id}` ({config.engine.source_lang} → {config.engine.target_lang}); "
        f"scoring template `{config.scoring_template}`.",
        "",
        "## Labels",
        "",
    ]
    lines += _table(
        ["masculine", "feminine", "neutral", "ambiguous", "undetected", "translation failures"],
        [[label_counts.get(k, 0) for k in (
            "masculine", "feminine", "neutral", "ambiguous", "undetected", "translation_failures")]],
    )

    lines += ["", "## Summary per reference", ""]
    rows = []
    for reference, s in summaries.items():
        split = s.get("wrong_direction_split") or {}
        dist = s["bias_distribution"]
        rows.append([
            reference,
            s["n_scoreable"],
            f"{s['n_wrong']} ({_pct(s['wrong_fraction'])})",
            _pct(split.get("he_for_she")),
            _pct(s["wrong_given_female_dominated"]),
            _pct(s["wrong_given_male_dominated"]),
            _num(dist["min"], precision),
            _num(dist["median"], precision),
            _num(dist["max"], precision),
            s["unbounded_count"],
        ])
    lines += _table(
        ["reference", "scoreable", "wrong", "he for she", "wrong | F-dom", "wrong | M-dom",
         "min B", "median B", "max B", "unbounded"],
        rows,
    )

    lines += ["", "## Coverage", ""]
    lines += _table(
        ["reference", "covered", "scored", "omitted"],
        [
            [ref, c["covered"], c["scored"], ", ".join(f"{k} ({v})" for k, v in sorted(c["omitted"].items())) or "-"]
            for ref, c in coverage.items()
        ],
    )

    sectors = _read_csv(agg / "sectors.csv")
    lines += [
        "",
        "## Sectors",
        "",
        "Weights split each category's head count evenly over its occupations (an approximation).",
        "",
    ]
    lines += _table(
        ["reference", "sector", "dominance", "weighted B", "occupations", "unbounded", "unweighted"],
        [
            [r["reference"], r["sector_id"], r["dominance"], _num(r["weighted_bias"], precision),
             r["n_occupations"], r["unbounded_count"], r["unweighted_count"]]
            for r in sectors.to_dict(orient="records")
        ],
    )

    matrices = sorted((agg / "change_matrices").glob("*.csv")) if (agg / "change_matrices").exists() else []
    if matrices:
        lines += ["", "## Adjective effects", ""]
        rows = []
        for path in matrices:
            m = _read_csv(path).to_dict(orient="records")[0]
            rows.append([
                m["adjective_id"], m["she_she"], m["he_he"], m["she_he"], m["he_she"],
                f"{float(m['changed_pct']):.1f}%", m["dominant_change"],
            ])
        lines += _table(["adjective", "she→she", "he→he", "she→he", "he→she", "changed", "dominant change"], rows)

    pronouns = _read_csv(agg / "pronoun_distribution.csv")
    lines += ["", "## Pronoun distribution", ""]
    lines += _table(
        ["variant", "n", "masculine", "feminine", "other"],
        [
            [r["variant"], r["n"], _pct(float(r["masculine"])), _pct(float(r["feminine"])), _pct(float(r["other"]))]
            for r in pronouns.to_dict(orient="records")
        ],
    )

    correlation_path = agg / "correlation.json"
    if correlation_path.exists():
        correlation = json.loads(correlation_path.read_text(encoding="utf-8"))
        lines += ["", "## Perception vs statistics", ""]
        if correlation.get("pearson_r") is None:
            lines.append(f"Correlation not available: {correlation.get('reason', 'insufficient data')}.")
        else:
            lines.append(
                f"Pearson r between femininity and female employment share: "
                f"{correlation['pearson_r']:.3f} over {correlation['n']} occupations."
            )

    misgendered = _read_csv(agg / "misgendered.csv")
    if len(misgendered):
        lines += ["", "## Misgendered occupations", ""]
        lines += _table(
            ["occupation", "label", "direction", "B (primary)", "B (secondary)"],
            [
                [
                    r["name"], r["label"], r["direction"],
                    "unbounded" if r["primary_unbounded"] == "True" else _num(r["primary_bias"], precision),
                    "unbounded" if r["secondary_unbounded"] == "True" else _num(r["secondary_bias"], precision),
                ]
                for r in misgendered.to_dict(orient="records")
            ],
        )

    return "\n".join(lines) + "\n"
