"""Benchmark runner and metrics: repair pass rates, edit distances, hint
quality aggregation, inter-rater agreement, and report rendering.

A benchmark run executes the feedback pipeline for every evaluation bug of a
corpus, repeated over independent runs; every bundle is persisted so each
report cell can be recomputed from disk.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .corpus import BuggyProgram, Corpus, canonical_json
from .gateway import PricingTable, TelemetrySink
from .pipeline import FeedbackBundle, PipelineConfig, PipelineError, run_feedback
from .sandbox import SandboxExecutor
from .tokens import token_edit_distance, tokenize

RATINGS_HEADER = [
    "instance_id",
    "rater_id",
    "hcorrect",
    "hinformative",
    "hconceal",
    "hcomprehensible",
]


class EvalError(Exception):
    pass


def _mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error; stderr is 0 for a single value."""
    vals = list(values)
    mean = statistics.fmean(vals)
    if len(vals) < 2:
        return mean, 0.0
    return mean, statistics.stdev(vals) / math.sqrt(len(vals))


@dataclass(frozen=True)
class HintRating:
    instance_id: str
    rater_id: str
    hcorrect: int
    hinformative: int
    hconceal: int
    hcomprehensible: int

    def __post_init__(self) -> None:
        for name in ("hcorrect", "hinformative", "hconceal", "hcomprehensible"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1")

    @property
    def hgood(self) -> int:
        return int(
            self.hcorrect and self.hinformative and self.hconceal and self.hcomprehensible
        )


def load_ratings_csv(path) -> list[HintRating]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RATINGS_HEADER:
            raise EvalError(
                f"ratings CSV header must be {','.join(RATINGS_HEADER)}, got {reader.fieldnames}"
            )
        return [
            HintRating(
                instance_id=row["instance_id"],
                rater_id=row["rater_id"],
                hcorrect=int(row["hcorrect"]),
                hinformative=int(row["hinformative"]),
                hconceal=int(row["hconceal"]),
                hcomprehensible=int(row["hcomprehensible"]),
            )
            for row in reader
        ]


def aggregate_hgood(
    ratings: Sequence[HintRating], primary_rater: Optional[str] = None
) -> dict:
    """HGood is the conjunction of the four attributes; percentages are over
    rated instances. With multiple raters, pick one via primary_rater."""
    if not ratings:
        raise EvalError("no ratings")
    seen = set()
    for rating in ratings:
        key = (rating.instance_id, rating.rater_id)
        if key in seen:
            raise EvalError(f"duplicate rating for {key}")
        seen.add(key)
    raters = sorted({r.rater_id for r in ratings})
    if primary_rater is None:
        if len(raters) > 1:
            raise EvalError(
                f"multiple raters present ({raters}); pass primary_rater to pick one"
            )
        selected = list(ratings)
    else:
        selected = [r for r in ratings if r.rater_id == primary_rater]
        if not selected:
            raise EvalError(f"no ratings by rater {primary_rater!r}")
    by_instance = {}
    for rating in selected:
        if rating.instance_id in by_instance:
            raise EvalError(f"multiple ratings for instance {rating.instance_id!r}")
        by_instance[rating.instance_id] = rating
    n = len(by_instance)
    pct = lambda total: 100.0 * total / n  # noqa: E731
    return {
        "instances": n,
        "hgood_pct": pct(sum(r.hgood for r in by_instance.values())),
        "hcorrect_pct": pct(sum(r.hcorrect for r in by_instance.values())),
        "hinformative_pct": pct(sum(r.hinformative for r in by_instance.values())),
        "hconceal_pct": pct(sum(r.hconceal for r in by_instance.values())),
        "hcomprehensible_pct": pct(sum(r.hcomprehensible for r in by_instance.values())),
    }


@dataclass(frozen=True)
class AgreementReport:
    both_positive: int
    first_only: int
    second_only: int
    both_negative: int
    p_o: float
    p_e: float
    kappa: Optional[float]
    degenerate: bool

    def to_json_dict(self) -> dict:
        return {
            "contingency": {
                "both_positive": self.both_positive,
                "first_only": self.first_only,
                "second_only": self.second_only,
                "both_negative": self.both_negative,
            },
            "p_o": self.p_o,
            "p_e": self.p_e,
            "kappa": self.kappa,
            "degenerate": self.degenerate,
        }


def cohens_kappa(pairs: Sequence[tuple[int, int]]) -> AgreementReport:
    """Two-rater binary kappa from the 2x2 contingency table."""
    if not pairs:
        raise EvalError("kappa needs at least one rating pair")
    a = b = c = d = 0
    for first, second in pairs:
        if first not in (0, 1) or second not in (0, 1):
            raise EvalError(f"ratings must be binary, got {(first, second)}")
        if first and second:
            a += 1
        elif first and not second:
            b += 1
        elif second:
            c += 1
        else:
            d += 1
    n = len(pairs)
    p_o = (a + d) / n
    p_e = ((a + b) * (a + c) + (c + d) * (b + d)) / (n * n)
    if p_e == 1.0:
        return AgreementReport(a, b, c, d, p_o, p_e, kappa=None, degenerate=True)
    kappa = (p_o - p_e) / (1.0 - p_e)
    return AgreementReport(a, b, c, d, p_o, p_e, kappa=kappa, degenerate=False)


@dataclass(frozen=True)
class RepairMetrics:
    per_run_rpass: tuple[float, ...]
    per_run_redit: tuple[Optional[float], ...]
    rpass_mean: float
    rpass_stderr: float
    redit_mean: Optional[float]
    redit_stderr: Optional[float]

    @classmethod
    def from_runs(
        cls,
        per_run_rpass: Sequence[float],
        per_run_redit: Sequence[Optional[float]],
    ) -> "RepairMetrics":
        rpass_mean, rpass_stderr = _mean_stderr(per_run_rpass)
        redit_values = [v for v in per_run_redit if v is not None]
        if redit_values:
            redit_mean, redit_stderr = _mean_stderr(redit_values)
        else:
            redit_mean = redit_stderr = None
        return cls(
            per_run_rpass=tuple(per_run_rpass),
            per_run_redit=tuple(per_run_redit),
            rpass_mean=rpass_mean,
            rpass_stderr=rpass_stderr,
            redit_mean=redit_mean,
            redit_stderr=redit_stderr,
        )

    def to_json_dict(self) -> dict:
        return {
            "per_run_rpass": list(self.per_run_rpass),
            "per_run_redit": list(self.per_run_redit),
            "rpass": {"mean": self.rpass_mean, "stderr": self.rpass_stderr},
            "redit": {"mean": self.redit_mean, "stderr": self.redit_stderr},
        }


@dataclass
class BenchmarkResult:
    corpus_name: str
    backend_id: str
    metrics: RepairMetrics
    out_dir: Path
    instance_errors: list[str] = field(default_factory=list)


def bundle_filename(bug_id: str, run_index: int) -> str:
    return f"{bug_id}__run{run_index}.json"


def run_benchmark(
    corpus: Corpus,
    cfg: PipelineConfig,
    backend,
    executor: SandboxExecutor,
    runs: int = 3,
    out_dir=None,
    pricing: Optional[PricingTable] = None,
    sink: Optional[TelemetrySink] = None,
) -> BenchmarkResult:
    """Run the pipeline for every evaluation bug x run, persisting bundles.

    Instance failures count in the RPass denominator but never the numerator,
    and are flagged in the stored metrics.
    """
    if out_dir is None:
        raise EvalError("out_dir is required: bundles must be persisted")
    out_dir = Path(out_dir)
    bundles_dir = out_dir / "bundles"
    bundles_dir.mkdir(parents=True, exist_ok=True)
    eval_bugs = corpus.evaluation_bugs
    if not eval_bugs:
        raise EvalError(f"corpus {corpus.name!r} has no evaluation bugs")

    per_run_rpass: list[float] = []
    per_run_redit: list[Optional[float]] = []
    per_run_records: list[dict] = []
    instance_errors: list[str] = []
    cost_values: list[float] = []
    latency_values: list[int] = []

    for run_index in range(runs):
        run_cfg = cfg
        if cfg.seed is not None:
            run_cfg = PipelineConfig(**{**cfg.to_json_dict(), "seed": cfg.seed + run_index})
        found = 0
        redits: list[int] = []
        instances: dict[str, dict] = {}
        for bug in eval_bugs:
            task = corpus.task_by_id(bug.task_id)
            instance_id = f"{bug.id}__run{run_index}"
            try:
                bundle = run_feedback(task, bug, run_cfg, backend, executor, pricing=pricing, sink=sink)
            except (PipelineError, Exception) as exc:  # noqa: BLE001 - instance isolation
                instance_errors.append(f"{instance_id}: {exc}")
                instances[bug.id] = {"error": str(exc), "found": False, "edit_distance": None}
                (bundles_dir / bundle_filename(bug.id, run_index)).write_text(
                    canonical_json({"error": str(exc), "bug_id": bug.id, "run": run_index}),
                    encoding="utf-8",
                )
                continue
            (bundles_dir / bundle_filename(bug.id, run_index)).write_text(
                bundle.to_json(), encoding="utf-8"
            )
            cost_values.append(bundle.telemetry.usd_cost)
            latency_values.append(bundle.telemetry.total_latency_ms)
            if not bundle.repair.empty:
                found += 1
                redits.append(bundle.repair.selected.edit_distance)
                instances[bug.id] = {
                    "found": True,
                    "edit_distance": bundle.repair.selected.edit_distance,
                }
            else:
                instances[bug.id] = {"found": False, "edit_distance": None}
        rpass = 100.0 * found / len(eval_bugs)
        redit = statistics.fmean(redits) if redits else None
        per_run_rpass.append(rpass)
        per_run_redit.append(redit)
        per_run_records.append(
            {
                "run": run_index,
                "rpass_pct": rpass,
                "redit_mean": redit,
                "found": found,
                "total": len(eval_bugs),
                "instances": instances,
            }
        )

    metrics = RepairMetrics.from_runs(per_run_rpass, per_run_redit)
    machine = f"{platform.node()}/{platform.machine()}"
    metrics_doc = {
        "corpus": corpus.name,
        "backend_id": backend.backend_id,
        "backend_class": backend.backend_class,
        "config": cfg.to_json_dict(),
        "runs": runs,
        "machine": machine,
        "per_run": per_run_records,
        "repair_metrics": metrics.to_json_dict(),
        "usd_cost_mean": statistics.fmean(cost_values) if cost_values else None,
        "latency_ms_mean": statistics.fmean(latency_values) if latency_values else None,
        "instance_errors": instance_errors,
    }
    (out_dir / "metrics.json").write_text(canonical_json(metrics_doc), encoding="utf-8")
    return BenchmarkResult(
        corpus_name=corpus.name,
        backend_id=backend.backend_id,
        metrics=metrics,
        out_dir=out_dir,
        instance_errors=instance_errors,
    )


def recompute_redit_from_store(out_dir, corpus: Corpus) -> dict:
    """Recompute every stored instance's edit distance from raw sources.

    Cross-checks that reported REdit values are pure functions of the stored
    bundles (selected repair vs buggy source)."""
    out = {}
    bundles_dir = Path(out_dir) / "bundles"
    for path in sorted(bundles_dir.glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        if "error" in data or data.get("repair", {}).get("selected") is None:
            continue
        bug = corpus.bug_by_id(data["bug_id"])
        recomputed = token_edit_distance(
            tokenize(bug.source), tokenize(data["repair"]["selected"]["source"])
        )
        out[path.stem] = {
            "stored": data["repair"]["selected"]["edit_distance"],
            "recomputed": recomputed,
        }
    return out


@dataclass(frozen=True)
class MinEditReport:
    per_bug: dict
    mean: float
    stderr: float

    def to_json_dict(self) -> dict:
        return {"per_bug": self.per_bug, "mean": self.mean, "stderr": self.stderr}


def compute_min_edit(
    eval_bugs: Sequence[BuggyProgram], training_bugs: Sequence[BuggyProgram]
) -> MinEditReport:
    """Per evaluation bug: distance to its closest training-set counterpart."""
    if not eval_bugs:
        raise EvalError("evaluation set is empty")
    if not training_bugs:
        raise EvalError("training set is empty")
    train_streams = [tokenize(b.source) for b in training_bugs]
    per_bug = {}
    for bug in eval_bugs:
        stream = tokenize(bug.source)
        per_bug[bug.id] = min(token_edit_distance(stream, t) for t in train_streams)
    mean, stderr = _mean_stderr(list(per_bug.values()))
    return MinEditReport(per_bug=per_bug, mean=mean, stderr=stderr)


def _fmt(value, digits=1) -> str:
    if value is None:
        return "n/a"
    return f"{value:.{digits}f}"


def _fmt_pair(mean, stderr, digits=1) -> str:
    if mean is None:
        return "n/a"
    return f"{_fmt(mean, digits)} ({_fmt(stderr, digits)})"


def render_report(
    out_root,
    ratings: Optional[Sequence[HintRating]] = None,
    primary_rater: Optional[str] = None,
) -> dict:
    """Assemble report.json and report.txt from persisted benchmark artifacts.

    out_root either holds metrics.json directly or one subdirectory per
    domain. Rating/instance id mismatches are listed but never fatal.
    """
    out_root = Path(out_root)
    metric_files = sorted(out_root.glob("*/metrics.json"))
    if (out_root / "metrics.json").exists():
        metric_files.insert(0, out_root / "metrics.json")
    if not metric_files:
        raise EvalError(f"no metrics.json found under {out_root}")

    domains = []  # (metrics doc, set of its bundle instance ids)
    warnings: list[str] = []
    known_instances: set[str] = set()
    for metrics_path in metric_files:
        doc = json.loads(metrics_path.read_text(encoding="utf-8"))
        instance_ids = {p.stem for p in (metrics_path.parent / "bundles").glob("*.json")}
        known_instances |= instance_ids
        domains.append((doc, instance_ids))
        warnings.extend(doc.get("instance_errors", []))

    hgood_by_domain: dict[str, Optional[dict]] = {doc["corpus"]: None for doc, _ in domains}
    overall_hgood = None
    if ratings:
        unmatched = sorted(
            {r.instance_id for r in ratings if r.instance_id not in known_instances}
        )
        if unmatched:
            warnings.append(f"ratings reference unknown instances: {unmatched}")
        matched = [r for r in ratings if r.instance_id in known_instances]
        if matched:
            overall_hgood = aggregate_hgood(matched, primary_rater=primary_rater)
            for doc, instance_ids in domains:
                domain_ratings = [r for r in matched if r.instance_id in instance_ids]
                if domain_ratings:
                    hgood_by_domain[doc["corpus"]] = aggregate_hgood(
                        domain_ratings, primary_rater=primary_rater
                    )

    report = {
        "domains": [
            {
                "domain": doc["corpus"],
                "backend_id": doc["backend_id"],
                "hgood_pct": (hgood_by_domain[doc["corpus"]] or {}).get("hgood_pct"),
                "rpass": doc["repair_metrics"]["rpass"],
                "redit": doc["repair_metrics"]["redit"],
                "usd_cost_mean": doc["usd_cost_mean"],
                "latency_ms_mean": doc["latency_ms_mean"],
                "machine": doc["machine"],
                "runs": doc["runs"],
                "config": doc["config"],
            }
            for doc, _ in domains
        ],
        "all_domains": {"hgood": overall_hgood},
        "warnings": warnings,
    }

    lines = []
    header = f"{'domain':<16} {'HGood%':>8} {'RPass%':>16} {'REdit':>16}"
    lines.append(header)
    lines.append("-" * len(header))
    for block in report["domains"]:
        lines.append(
            f"{block['domain']:<16} "
            f"{_fmt(block['hgood_pct']):>8} "
            f"{_fmt_pair(block['rpass']['mean'], block['rpass']['stderr']):>16} "
            f"{_fmt_pair(block['redit']['mean'], block['redit']['stderr']):>16}"
        )
    if overall_hgood is not None:
        lines.append(f"{'all-domains':<16} {_fmt(overall_hgood['hgood_pct']):>8}")
    lines.append("")
    backend_header = (
        f"{'backend':<24} {'inference_s':>12} {'cost_usd':>12} {'machine':<24}"
    )
    lines.append(backend_header)
    lines.append("-" * len(backend_header))
    for block in report["domains"]:
        seconds = (
            block["latency_ms_mean"] / 1000.0 if block["latency_ms_mean"] is not None else None
        )
        lines.append(
            f"{block['backend_id']:<24} "
            f"{_fmt(seconds, 2):>12} "
            f"{_fmt(block['usd_cost_mean'], 6):>12} "
            f"{block['machine']:<24}"
        )
    if warnings:
        lines.append("")
        lines.append("warnings:")
        lines.extend(f"  - {w}" for w in warnings)

    (out_root / "report.json").write_text(canonical_json(report), encoding="utf-8")
    (out_root / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report
