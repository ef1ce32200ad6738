"""
Staged audit pipeline: each stage reads the previous stage's artifacts and writes its own
"""
import asyncio
import json
import logging
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import pandas as pd

from app.core.config import AuditConfig, Settings, settings as default_settings
from app.core.errors import ConfigError, InsufficientData, MissingArtifact, RegistryInvalid
from app.core.storage import (
    canonical_json,
    read_jsonl,
    sha256_file,
    write_csv_atomic,
    write_json_atomic,
    write_jsonl_atomic,
    write_text_atomic,
)
from app.schemas.gendering import GenderLabel
from app.schemas.lexicon import Registry
from app.schemas.scoring import BiasResult, ReferenceKind, ResolvedReference
from app.schemas.sentences import SentenceUnit
from app.schemas.translation import TranslationRecord
from app.services import aggregation, lexicon, reports, scoring, sentences, survey
from app.services.gendering import classify_corpus, corpus_label_counts, load_lexicon
from app.services.translation import TranslationBackend, TranslationCache, build_backend, translate_corpus

logger = logging.getLogger(__name__)


class Stage(str, Enum):
    VALIDATE = "validate"
    GENERATE = "generate"
    TRANSLATE = "translate"
    CLASSIFY = "classify"
    SCORE = "score"
    AGGREGATE = "aggregate"
    REPORT = "report"
    ALL = "all"


PIPELINE_ORDER = [
    Stage.VALIDATE,
    Stage.GENERATE,
    Stage.TRANSLATE,
    Stage.CLASSIFY,
    Stage.SCORE,
    Stage.AGGREGATE,
    Stage.REPORT,
]

# artifact names relative to the output directory
REGISTRY_JSON = "registry.json"
ISSUES_JSON = "issues.json"
REFERENCES_JSON = "references.json"
CORPUS_JSONL = "corpus.jsonl"
CORPUS_TXT = "corpus.txt"
TRANSLATIONS_JSONL = "translations.jsonl"
LABELS_JSONL = "labels.jsonl"
LABEL_COUNTS_JSON = "label_counts.json"
SCORES_JSONL = "scores.jsonl"
SCORES_CSV = "scores.csv"
SCORE_COVERAGE_JSON = "score_coverage.json"
AGGREGATE_DIR = "aggregate"
REPORT_MD = "report.md"
MANIFEST_JSONL = "manifest.jsonl"


class AuditPipeline:
    """Runs pipeline stages for one audit config"""

    def __init__(
        self,
        config: AuditConfig,
        settings: Settings = default_settings,
        backend_factory: Optional[Callable[[AuditConfig, Settings], TranslationBackend]] = None,
    ):
        self.config = config
        self.settings = settings
        self.out = Path(config.output_dir)
        self.backend_factory = backend_factory or build_backend
        self.last_query_count: Optional[int] = None

    # ---------- helpers ----------

    def path(self, name: str) -> Path:
        return self.out / name

    def _require(self, name: str, stage: Stage) -> Path:
        path = self.path(name)
        if not path.exists():
            raise MissingArtifact(
                f"{stage.value} needs {name}; run the earlier stages first",
                artifact=str(path), stage=stage.value,
            )
        return path

    def _record(
        self,
        stage: Stage,
        inputs: Iterable[Path],
        outputs: Iterable[Path],
        **extra,
    ) -> None:
        """Append one provenance line; timestamps live only here"""
        entry = {
            "stage": stage.value,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "inputs": {str(p): sha256_file(p) for p in inputs},
            "outputs": {self._relative(p): sha256_file(p) for p in outputs},
            **extra,
        }
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.path(MANIFEST_JSONL), "a", encoding="utf-8", newline="\n") as f:
            f.write(canonical_json(entry) + "\n")

    def _relative(self, path: Path) -> str:
        try:
            return str(path.relative_to(self.out))
        except ValueError:
            return str(path)

    def _input_files(self) -> List[Path]:
        return [Path(p) for p in self.config.inputs.model_dump().values() if p is not None]

    def _load_registry(self, stage: Stage) -> Registry:
        path = self._require(REGISTRY_JSON, stage)
        return Registry.model_validate_json(path.read_text(encoding="utf-8"))

    def _load_references(self, stage: Stage) -> Dict[ReferenceKind, ResolvedReference]:
        path = self._require(REFERENCES_JSON, stage)
        payload = json.loads(path.read_text(encoding="utf-8"))
        return {ReferenceKind(k): ResolvedReference.model_validate(v) for k, v in payload.items()}

    def _load_labels(self, stage: Stage) -> List[dict]:
        return read_jsonl(self._require(LABELS_JSONL, stage))

    def _labels_for(
        self, rows: List[dict], template_id: str, adjective_id: Optional[str] = None
    ) -> Dict[str, GenderLabel]:
        return {
            row["occupation_id"]: GenderLabel(row["label"])
            for row in rows
            if row["template_id"] == template_id and row["adjective_id"] == adjective_id
        }

    def _load_scores(self, stage: Stage) -> Dict[ReferenceKind, List[BiasResult]]:
        results: Dict[ReferenceKind, List[BiasResult]] = {}
        for row in read_jsonl(self._require(SCORES_JSONL, stage)):
            result = BiasResult.model_validate(row)
            results.setdefault(result.reference, []).append(result)
        return results

    def _adjective_ids(self, adjectives_available: Iterable[str]) -> List[str]:
        if self.config.adjectives is not None:
            return list(self.config.adjectives)
        return list(adjectives_available)

    # ---------- stages ----------

    def validate(self) -> List:
        """Load the registry, check it, resolve the enabled references"""
        inputs = self.config.inputs
        registry = lexicon.load_registry(
            inputs.occupations,
            (inputs.categories_feor, inputs.categories_soc),
            inputs.crosswalk,
            inputs.sectors,
        )
        issues = lexicon.validate_registry(registry)

        references: Dict[str, dict] = {}
        for kind in self.config.references:
            if kind == ReferenceKind.PERCEPTION:
                tallies = survey.load_tallies(inputs.survey)
                resolved = survey.resolve_perception(tallies, (o.id for o in registry.scoreable()))
            else:
                resolved = lexicon.resolve_reference(registry, kind)
            references[kind.value] = resolved.model_dump(mode="json")

        outputs = [
            write_text_atomic(self.path(REGISTRY_JSON), registry.to_json()),
            write_json_atomic(self.path(ISSUES_JSON), [i.model_dump(mode="json") for i in issues]),
            write_json_atomic(self.path(REFERENCES_JSON), references),
        ]
        fatal = [i for i in issues if i.fatal]
        self._record(
            Stage.VALIDATE, self._input_files(), outputs,
            issues=len(issues), fatal_issues=len(fatal),
        )

        if fatal:
            raise RegistryInvalid(
                f"registry has {len(fatal)} fatal issue(s); see {ISSUES_JSON}",
                issues=len(fatal),
            )
        for issue in issues:
            logger.warning(f"[Validate] {issue.kind.value} {issue.subject}: {issue.message}")
        return issues

    def _selected_templates(self) -> Tuple[list, list]:
        all_templates = sentences.load_templates(self.config.inputs.templates)
        all_adjectives = sentences.load_adjectives(self.config.inputs.adjectives)

        base = sentences.select(all_templates, self.config.templates, "templates")
        for template in base:
            if template.takes_adjective:
                raise ConfigError(f"template {template.id} has an adjective slot; list it as adjective_template")

        adjectives = sentences.select(
            all_adjectives, self._adjective_ids(a.id for a in all_adjectives), "adjectives"
        )
        templates = list(base)
        if adjectives:
            adj_template = sentences.select(all_templates, [self.config.adjective_template], "templates")[0]
            if not adj_template.takes_adjective:
                raise ConfigError(f"adjective_template {adj_template.id} has no adjective slot")
            templates.append(adj_template)
        return templates, adjectives

    def generate(self) -> List[SentenceUnit]:
        registry_path = self._require(REGISTRY_JSON, Stage.GENERATE)
        registry = self._load_registry(Stage.GENERATE)
        templates, adjectives = self._selected_templates()

        units = sentences.generate_corpus(registry, templates, adjectives)
        outputs = [
            write_jsonl_atomic(self.path(CORPUS_JSONL), (u.model_dump_json() for u in units)),
            write_text_atomic(self.path(CORPUS_TXT), sentences.export_document(units)),
        ]
        inputs = [registry_path] + [
            Path(p) for p in (self.config.inputs.templates, self.config.inputs.adjectives) if p
        ]
        self._record(Stage.GENERATE, inputs, outputs, units=len(units))
        return units

    async def translate_async(self) -> List[TranslationRecord]:
        corpus_path = self._require(CORPUS_JSONL, Stage.TRANSLATE)
        units = [SentenceUnit.model_validate(row) for row in read_jsonl(corpus_path)]

        cache = TranslationCache(self.config.cache_path)
        backend = self.backend_factory(self.config, self.settings)
        try:
            records = await translate_corpus(
                units,
                backend,
                cache,
                batch_size=self.config.translation.batch_size,
                jobs=self.config.translation.jobs,
            )
        finally:
            await backend.aclose()
        self.last_query_count = backend.query_count

        outputs = [
            write_jsonl_atomic(self.path(TRANSLATIONS_JSONL), (r.to_artifact_json() for r in records)),
        ]
        stamps = sorted(r.engine.retrieved_at.isoformat() for r in records if r.engine.retrieved_at)
        self._record(
            Stage.TRANSLATE,
            [corpus_path],
            outputs,
            engine=backend.descriptor.model_dump(mode="json", exclude={"retrieved_at"}),
            retrieved_at={"min": stamps[0], "max": stamps[-1]} if stamps else None,
            backend_queries=backend.query_count,
            failures=sum(1 for r in records if not r.ok),
        )
        logger.info(f"[Translate] {len(records)} records, {backend.query_count} backend queries")
        return records

    def translate(self) -> List[TranslationRecord]:
        return asyncio.run(self.translate_async())

    def classify(self) -> Dict:
        translations_path = self._require(TRANSLATIONS_JSONL, Stage.CLASSIFY)
        records = [TranslationRecord.model_validate(row) for row in read_jsonl(translations_path)]
        pronouns = load_lexicon(self.config.inputs.pronoun_lexicon)

        labels = classify_corpus(records, pronouns)
        counts = corpus_label_counts(records, labels)

        rows = [
            canonical_json({
                "occupation_id": ref.occupation_id,
                "template_id": ref.template_id,
                "adjective_id": ref.adjective_id,
                "label": label.value,
            })
            for ref, label in sorted(labels.items(), key=lambda item: item[0].sort_key())
        ]
        outputs = [
            write_jsonl_atomic(self.path(LABELS_JSONL), rows),
            write_json_atomic(self.path(LABEL_COUNTS_JSON), counts.as_dict()),
        ]
        inputs = [translations_path]
        if self.config.inputs.pronoun_lexicon:
            inputs.append(Path(self.config.inputs.pronoun_lexicon))
        self._record(Stage.CLASSIFY, inputs, outputs)
        return labels

    def score(self) -> Dict[ReferenceKind, List[BiasResult]]:
        labels_path = self._require(LABELS_JSONL, Stage.SCORE)
        references_path = self._require(REFERENCES_JSON, Stage.SCORE)
        references = self._load_references(Stage.SCORE)
        base_labels = self._labels_for(self._load_labels(Stage.SCORE), self.config.scoring_template)

        by_reference: Dict[ReferenceKind, List[BiasResult]] = {}
        coverage: Dict[str, dict] = {}
        for kind in self.config.references:
            if kind not in references:
                raise MissingArtifact(
                    f"{REFERENCES_JSON} has no {kind.value} reference; rerun validate",
                    reference=kind.value,
                )
            resolved = references[kind]
            results, skipped = scoring.score_labels(base_labels, resolved)
            by_reference[kind] = results
            coverage[kind.value] = {
                "covered": resolved.coverage,
                "scored": len(results),
                "omitted": resolved.omitted,
                "skipped": {s.occupation_id: s.reason for s in skipped},
            }

        ordered = [r for kind in self.config.references for r in by_reference[kind]]
        precision = self.config.display_precision
        outputs = [
            write_jsonl_atomic(self.path(SCORES_JSONL), (r.model_dump_json() for r in ordered)),
            write_csv_atomic(
                self.path(SCORES_CSV),
                pd.DataFrame(scoring.results_frame_rows(ordered, precision), columns=reports.SCORE_COLUMNS),
            ),
            write_json_atomic(self.path(SCORE_COVERAGE_JSON), coverage),
        ]
        self._record(Stage.SCORE, [labels_path, references_path], outputs)
        return by_reference

    def aggregate(self) -> Dict[str, object]:
        scores_path = self._require(SCORES_JSONL, Stage.AGGREGATE)
        labels_path = self._require(LABELS_JSONL, Stage.AGGREGATE)
        registry_path = self._require(REGISTRY_JSON, Stage.AGGREGATE)
        references_path = self._require(REFERENCES_JSON, Stage.AGGREGATE)

        registry = self._load_registry(Stage.AGGREGATE)
        references = self._load_references(Stage.AGGREGATE)
        results = self._load_scores(Stage.AGGREGATE)
        label_rows = self._load_labels(Stage.AGGREGATE)
        basis = self.config.weight_basis
        precision = self.config.display_precision
        agg = self.out / AGGREGATE_DIR
        outputs: List[Path] = []

        categories, sector_reports, summaries = [], [], {}
        for kind in self.config.references:
            kind_results = results.get(kind, [])
            categories.extend(aggregation.category_biases(kind_results, registry, kind))
            sector_reports.extend(aggregation.sector_report(kind_results, registry, basis))
            summaries[kind.value] = aggregation.summary_stats(kind_results, kind).model_dump(mode="json")

        outputs.append(write_csv_atomic(agg / "categories.csv", reports.categories_frame(categories, precision)))
        outputs.append(write_csv_atomic(agg / "sectors.csv", reports.sectors_frame(sector_reports)))
        outputs.append(write_csv_atomic(
            agg / "sector_coverage.csv",
            pd.DataFrame(
                lexicon.sector_coverage(registry, [references[k] for k in self.config.references if k in references]),
                columns=["sector_id", "reference", "n_occupations", "n_total"],
            ),
        ))
        outputs.append(write_json_atomic(agg / "summary.json", summaries))

        base_labels = self._labels_for(label_rows, self.config.scoring_template)
        adjective_ids = sorted({row["adjective_id"] for row in label_rows if row["adjective_id"]})
        if self.config.adjectives is not None:
            adjective_ids = [a for a in self.config.adjectives if a in adjective_ids]
        adjective_labels = {
            adj: self._labels_for(label_rows, self.config.adjective_template, adj) for adj in adjective_ids
        }
        for adj, labels in adjective_labels.items():
            matrix = aggregation.adjective_change_matrix(base_labels, labels, adj)
            outputs.append(write_csv_atomic(agg / "change_matrices" / f"{adj}.csv", reports.change_matrix_frame(matrix)))
        outputs.append(write_csv_atomic(
            agg / "pronoun_distribution.csv",
            reports.pronoun_frame(aggregation.pronoun_table(base_labels, adjective_labels)),
        ))

        perception = references.get(ReferenceKind.PERCEPTION)
        census = references.get(ReferenceKind.SOURCE_STATS)
        if perception is not None and census is not None:
            try:
                correlation = aggregation.perception_correlation(perception.shares, census.shares).model_dump(mode="json")
            except InsufficientData as e:
                correlation = {"pearson_r": None, "n": e.context.get("n"), "reason": e.message}
            outputs.append(write_json_atomic(agg / "correlation.json", correlation))
            outputs.append(write_csv_atomic(
                agg / "perception_scatter.csv",
                pd.DataFrame(
                    aggregation.perception_scatter(perception.shares, census.shares, registry),
                    columns=["occupation_id", "name", "femininity", "female_share"],
                ),
            ))

        primary = ReferenceKind.PERCEPTION if ReferenceKind.PERCEPTION in results else self.config.references[0]
        secondary = ReferenceKind.SOURCE_STATS if primary != ReferenceKind.SOURCE_STATS else ReferenceKind.TARGET_STATS
        outputs.append(write_csv_atomic(
            agg / "misgendered.csv",
            reports.misgendered_frame(aggregation.misgendered_table(results, registry, primary, secondary)),
        ))

        self._record(Stage.AGGREGATE, [scores_path, labels_path, registry_path, references_path], outputs)
        return summaries

    def report(self) -> Path:
        agg = self.out / AGGREGATE_DIR
        summary_path = self._require(f"{AGGREGATE_DIR}/summary.json", Stage.REPORT)
        inputs = [summary_path] + sorted(p for p in agg.rglob("*.csv")) + sorted(agg.glob("*.json"))
        inputs = list(dict.fromkeys(inputs))
        for name in (LABEL_COUNTS_JSON, SCORE_COVERAGE_JSON):
            inputs.append(self._require(name, Stage.REPORT))

        text = reports.render_report(self.out, self.config)
        output = write_text_atomic(self.path(REPORT_MD), text)
        self._record(Stage.REPORT, inputs, [output])
        return output

    # ---------- dispatch ----------

    def run_stage(self, stage: Stage) -> None:
        stages = PIPELINE_ORDER if stage == Stage.ALL else [stage]
        for current in stages:
            logger.info(f"[Pipeline] Stage {current.value}")
            getattr(self, current.value)()
