"""Operator CLI: corpus validation, benchmarking, synthesis, reports, serving.

Thin wrappers over the core modules: each subcommand parses arguments, calls
one entry point, prints a short summary, and exits 1 on operational failure
(usage errors exit 2 via click).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .corpus import CorpusError, load_corpus, resolve_corpus_path, validate_corpus
from .evalbench import EvalError, load_ratings_csv, render_report, run_benchmark
from .gateway import GatewayError, MockBackend, MockScript, OpenAIChatBackend, PricingTable
from .pipeline import PipelineConfig
from .sandbox import SandboxConfigError, SandboxExecutor
from .service import DEFAULT_MOCK_SCRIPT, ServiceConfig, serve
from .synthgen import SynthError, synthesize_dataset
from .tokens import dump_tokens

OPERATIONAL_ERRORS = (
    CorpusError,
    EvalError,
    GatewayError,
    SandboxConfigError,
    SynthError,
    OSError,
    ValueError,
)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _build_backend(backend, mock_script, base_url, model, api_key_env):
    if backend == "mock":
        return MockBackend(MockScript.from_json_file(mock_script or DEFAULT_MOCK_SCRIPT))
    if not base_url or not model:
        raise click.UsageError("--backend openai requires --base-url and --model")
    return OpenAIChatBackend(base_url=base_url, model=model, api_key_env=api_key_env)


@click.group()
def main() -> None:
    """Program repair and hint generation toolkit."""


@main.command()
@click.argument("corpus")
@click.option("--workers", default=4, show_default=True)
def validate(corpus: str, workers: int) -> None:
    """Check reference solutions pass and every bug fails at least one test."""
    try:
        loaded = load_corpus(resolve_corpus_path(corpus))
        executor = SandboxExecutor(workers=workers)
        report = validate_corpus(loaded, executor)
    except OPERATIONAL_ERRORS as exc:
        _fail(str(exc))
    click.echo(f"corpus {loaded.name}: {len(loaded.tasks)} tasks, {len(loaded.bugs)} bugs")
    for bug_report in report.bugs:
        click.echo(f"  {bug_report.bug_id}: failing {list(bug_report.failing_ids)}")
    if not report.ok:
        for problem in report.problems:
            click.echo(f"PROBLEM: {problem}", err=True)
        sys.exit(1)
    click.echo("validation OK")


@main.command()
@click.argument("corpus")
@click.option("--backend", type=click.Choice(["mock", "openai"]), default="mock", show_default=True)
@click.option("--n-r", "n_r", default=10, show_default=True, help="repair samples per instance")
@click.option("--runs", default=3, show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--mock-script", type=click.Path(exists=True, path_type=Path))
@click.option("--base-url")
@click.option("--model")
@click.option("--api-key-env", default="OPENAI_API_KEY", show_default=True)
@click.option("--pricing", type=click.Path(exists=True, path_type=Path))
@click.option("--seed", type=int)
@click.option("--workers", default=4, show_default=True)
def bench(corpus, backend, n_r, runs, out, mock_script, base_url, model, api_key_env, pricing, seed, workers):
    """Benchmark the feedback pipeline over a corpus's evaluation bugs."""
    try:
        loaded = load_corpus(resolve_corpus_path(corpus))
        backend_obj = _build_backend(backend, mock_script, base_url, model, api_key_env)
        pricing_table = (
            PricingTable.from_json_file(pricing) if pricing else PricingTable.zero(backend_obj.backend_id)
        )
        executor = SandboxExecutor(workers=workers)
        cfg = PipelineConfig(n_r=n_r, seed=seed)
        result = run_benchmark(
            loaded, cfg, backend_obj, executor,
            runs=runs, out_dir=out / loaded.name, pricing=pricing_table,
        )
        render_report(out)
    except OPERATIONAL_ERRORS as exc:
        _fail(str(exc))
    metrics = result.metrics
    click.echo(
        f"{loaded.name}: RPass {metrics.rpass_mean:.1f} ({metrics.rpass_stderr:.1f})"
        + (
            f", REdit {metrics.redit_mean:.1f} ({metrics.redit_stderr:.1f})"
            if metrics.redit_mean is not None
            else ", REdit n/a"
        )
    )
    if result.instance_errors:
        click.echo(f"{len(result.instance_errors)} instance errors (see metrics.json)", err=True)
    click.echo(f"report written to {out / 'report.txt'}")


@main.command()
@click.argument("corpus")
@click.option("--teacher", type=click.Choice(["mock", "openai"]), default="mock", show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--percent", default=100.0, show_default=True)
@click.option("--max-tuples", default=5, show_default=True)
@click.option("--mock-script", type=click.Path(exists=True, path_type=Path))
@click.option("--base-url")
@click.option("--model")
@click.option("--api-key-env", default="OPENAI_API_KEY", show_default=True)
@click.option("--gen-bugs/--no-gen-bugs", default=True, show_default=True,
              help="also prompt the teacher for synthetic buggy programs")
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--workers", default=4, show_default=True)
def synth(corpus, teacher, out, percent, max_tuples, mock_script, base_url, model, api_key_env, gen_bugs, seed, workers):
    """Generate an instruction-tuning dataset (JSONL) from a corpus."""
    try:
        loaded = load_corpus(resolve_corpus_path(corpus))
        teacher_obj = _build_backend(teacher, mock_script, base_url, model, api_key_env)
        executor = SandboxExecutor(workers=workers)
        report = synthesize_dataset(
            loaded, teacher_obj, executor, out,
            generate_synthetic_bugs=gen_bugs,
            max_tuples=max_tuples, percent=percent, seed=seed,
        )
    except OPERATIONAL_ERRORS as exc:
        _fail(str(exc))
    click.echo(
        f"bugs {report.bugs_used}, tuples {report.tuples_valid}/{report.tuples_total} valid, "
        f"exported {report.tuples_exported} tuples -> {report.instances} instances"
    )
    click.echo(f"dataset written to {out}")


@main.command()
@click.argument("out_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--ratings", type=click.Path(exists=True, path_type=Path))
@click.option("--rater", help="primary rater id when the CSV has multiple raters")
def report(out_dir, ratings, rater):
    """Re-render report.json and report.txt from stored benchmark artifacts."""
    try:
        loaded_ratings = load_ratings_csv(ratings) if ratings else None
        render_report(out_dir, ratings=loaded_ratings, primary_rater=rater)
    except OPERATIONAL_ERRORS as exc:
        _fail(str(exc))
    click.echo((out_dir / "report.txt").read_text(), nl=False)


@main.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
def tokens(file):
    """Dump the token stream of a source file, one token per line."""
    click.echo(dump_tokens(file.read_text(encoding="utf-8")), nl=False)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--host")
@click.option("--port", type=int)
def serve_cmd(config_path, host, port):
    """Run the learner-facing HTTP service."""
    try:
        config = ServiceConfig.from_json_file(config_path) if config_path else ServiceConfig()
        if host:
            config = config.model_copy(update={"host": host})
        if port:
            config = config.model_copy(update={"port": port})
        serve(config)
    except OPERATIONAL_ERRORS as exc:
        _fail(str(exc))


main.add_command(serve_cmd, name="serve")


if __name__ == "__main__":
    main()
