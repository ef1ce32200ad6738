"""
Audit command line: one subcommand per pipeline stage, plus the replay server
"""
import json
import logging
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from app.core.config import load_audit_config, settings
from app.core.errors import AuditError, InternalError
from app.core.logging import setup_logging
from app.core.storage import write_json_atomic
from app.schemas.scoring import ReferenceKind
from app.services.pipeline import AGGREGATE_DIR, AuditPipeline, Stage

logger = logging.getLogger(__name__)

app = typer.Typer(help="Audit gendered-pronoun bias of a translation engine", add_completion=False)
console = Console()

STAGE_HELP = {
    Stage.VALIDATE: "Load and check the occupation registry; resolve reference shares.",
    Stage.GENERATE: "Render source sentences for every scoreable occupation.",
    Stage.TRANSLATE: "Translate the corpus through the configured engine and replay cache.",
    Stage.CLASSIFY: "Label each translation with its pronoun gender.",
    Stage.SCORE: "Compute error points and bias per occupation and reference.",
    Stage.AGGREGATE: "Roll scores up to categories, sectors and summaries.",
    Stage.REPORT: "Write report.md from the aggregate tables.",
    Stage.ALL: "Run every stage in order.",
}


def _fail(error: AuditError, out_dir: Optional[Path]) -> None:
    report = error.to_dict()
    typer.echo(json.dumps(report, ensure_ascii=False), err=True)
    if out_dir is not None:
        try:
            write_json_atomic(out_dir / "error.json", report)
        except OSError as e:
            logger.warning(f"[CLI] Could not write error report: {e}")
    raise typer.Exit(code=error.exit_code)


def _print_summary(out_dir: Path) -> None:
    summary_path = out_dir / AGGREGATE_DIR / "summary.json"
    if not summary_path.exists():
        return
    summaries = json.loads(summary_path.read_text(encoding="utf-8"))

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Reference")
    table.add_column("Scoreable", justify="right")
    table.add_column("Wrong", justify="right")
    table.add_column("He for she", justify="right")
    table.add_column("Median B", justify="right")
    table.add_column("Unbounded", justify="right")
    for reference, s in summaries.items():
        split = s.get("wrong_direction_split") or {}
        median = s["bias_distribution"]["median"]
        table.add_row(
            reference,
            str(s["n_scoreable"]),
            f"{100 * s['wrong_fraction']:.1f}%",
            "-" if not split else f"{100 * split['he_for_she']:.1f}%",
            "-" if median is None else f"{median:.2f}",
            str(s["unbounded_count"]),
        )
    console.print(table)


def _run(
    stage: Stage,
    config: Path,
    out: Optional[Path],
    reference: Optional[List[ReferenceKind]],
    engine: Optional[str],
    jobs: Optional[int],
    verbose: bool,
) -> None:
    setup_logging("DEBUG" if verbose else settings.LOG_LEVEL)
    out_dir = out.resolve() if out is not None else None

    try:
        audit_config = load_audit_config(
            config,
            output_dir=out,
            references=[r.value for r in reference] if reference else None,
            engine_id=engine,
            jobs=jobs,
        )
        out_dir = Path(audit_config.output_dir)
        pipeline = AuditPipeline(audit_config, settings)

        console.print(Panel(f"[bold cyan]Stage:[/bold cyan] {stage.value}  [dim]→ {out_dir}[/dim]", border_style="blue"))
        with console.status(f"[bold green]Running {stage.value}..."):
            pipeline.run_stage(stage)
    except AuditError as e:
        _fail(e, out_dir)
    except Exception as e:
        logger.exception(f"[CLI] Unexpected failure in {stage.value}")
        _fail(InternalError(f"{type(e).__name__}: {e}", stage=stage.value), out_dir)

    stale = out_dir / "error.json"
    if stale.exists():
        stale.unlink()

    if stage in (Stage.AGGREGATE, Stage.REPORT, Stage.ALL):
        _print_summary(out_dir)
    if pipeline.last_query_count is not None:
        console.print(f"[dim]Backend queries: {pipeline.last_query_count}[/dim]")
    console.print(Panel(f"[bold green]{stage.value}: done[/bold green]", border_style="green"))


def _register(stage: Stage) -> None:
    def command(
        config: Path = typer.Option(..., "--config", "-c", help="Audit config JSON"),
        out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory (overrides output_dir)"),
        reference: Optional[List[ReferenceKind]] = typer.Option(
            None, "--reference", "-r", help="Reference to score against (repeatable)"
        ),
        engine: Optional[str] = typer.Option(None, "--engine", help="Engine id (overrides engine.engine_id)"),
        jobs: Optional[int] = typer.Option(None, "--jobs", "-j", min=1, help="Parallel translation batches"),
        verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
    ):
        _run(stage, config, out, reference, engine, jobs, verbose)

    command.__doc__ = STAGE_HELP[stage]
    app.command(name=stage.value)(command)


for _stage in Stage:
    _register(_stage)


@app.command()
def serve(
    fixture: Optional[Path] = typer.Option(None, "--fixture", "-f", help="Translations TSV to answer from"),
    host: str = typer.Option(settings.HOST, "--host"),
    port: int = typer.Option(settings.PORT, "--port"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """Run the replay translation server."""
    import uvicorn

    from app.main import create_app
    from app.schemas.translation import EngineDescriptor
    from app.services.translation.fixture import fixture_backend

    setup_logging("DEBUG" if verbose else settings.LOG_LEVEL)
    path = fixture or (Path(settings.FIXTURE_SERVER_PATH) if settings.FIXTURE_SERVER_PATH else None)
    if path is None or not path.is_file():
        console.print(f"[bold red]Fixture file not found:[/bold red] {path}")
        raise typer.Exit(code=2)

    try:
        backend = fixture_backend(path, EngineDescriptor(engine_id="replay"))
    except AuditError as e:
        _fail(e, None)

    console.print(Panel(f"[bold cyan]Replay server[/bold cyan] http://{host}:{port}{settings.API_V1_PREFIX}/translate", border_style="blue"))
    uvicorn.run(create_app(backend), host=host, port=port)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
