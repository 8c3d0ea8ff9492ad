"""Feedback generation: failing tests -> sampled repairs -> validated closest
repair -> hint plus concealed explanation.

The repair stage samples n_r candidate programs at temperature t_r, validates
every extracted candidate against the full test suite, and keeps the passing
candidate closest to the buggy program in token edit distance. The hint stage
makes one call at temperature t_h and parses an EXPLANATION:/HINT: labeled
response; only the hint is learner-facing.
"""

from __future__ import annotations

import ast
import json
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .corpus import BuggyProgram, FailingTestSet, NotBuggyError, Task, select_failing_tests
from .gateway import (
    Completion,
    GenerationBatch,
    PricingTable,
    SamplingParams,
    TelemetrySink,
    cost_of,
    generate,
)
from .sandbox import CaseStatus, ExecutionRequest, SandboxExecutor, SuiteVerdict
from .tokens import token_edit_distance, tokenize

BUNDLE_SCHEMA_VERSION = 1
PROMPT_DIR = Path(__file__).parent / "data" / "prompts"

_PLACEHOLDERS_REPAIR = ("problem_description", "failing_test_cases", "buggy_program")
_PLACEHOLDERS_HINT = _PLACEHOLDERS_REPAIR + ("repaired_program", "explanation_request")

FORMAT_REMINDER = (
    "Your previous reply did not follow the required format. Answer again with "
    "exactly two labeled parts: a line starting with 'EXPLANATION:' followed by "
    "the detailed explanation, then a line starting with 'HINT:' followed by the "
    "single concise hint."
)


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class HintFormatError(PipelineError):
    def __init__(self, raw_text: str):
        self.raw_text = raw_text
        super().__init__("hint", f"unparseable hint response after retry: {raw_text[:200]!r}")


@dataclass(frozen=True)
class PipelineConfig:
    n_r: int = 10
    t_r: float = 0.7
    t_h: float = 0.1
    failing_k: int = 3
    max_tokens_repair: int = 1024
    max_tokens_hint: int = 768
    prompt_set: str = "default-v1"
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_r < 1:
            raise ValueError("n_r must be >= 1")
        if self.failing_k < 1:
            raise ValueError("failing_k must be >= 1")

    def to_json_dict(self) -> dict:
        return {
            "n_r": self.n_r,
            "t_r": self.t_r,
            "t_h": self.t_h,
            "failing_k": self.failing_k,
            "max_tokens_repair": self.max_tokens_repair,
            "max_tokens_hint": self.max_tokens_hint,
            "prompt_set": self.prompt_set,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PromptBundle:
    id: str
    repair_system: str
    repair_template: str
    hint_system: str
    hint_template: str
    explanation_request: str

    def __post_init__(self) -> None:
        for name in _PLACEHOLDERS_REPAIR:
            if "{" + name + "}" not in self.repair_template:
                raise ValueError(f"repair_template missing placeholder {{{name}}}")
        for name in _PLACEHOLDERS_HINT:
            if "{" + name + "}" not in self.hint_template:
                raise ValueError(f"hint_template missing placeholder {{{name}}}")

    @classmethod
    def load(cls, bundle_id: str) -> "PromptBundle":
        path = Path(bundle_id)
        if not path.is_file():
            path = PROMPT_DIR / f"{bundle_id}.json"
        if not path.is_file():
            raise PipelineError("prompts", f"prompt bundle not found: {bundle_id!r}")
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls(
            id=data["id"],
            repair_system=data["repair_system"],
            repair_template=data["repair_template"],
            hint_system=data["hint_system"],
            hint_template=data["hint_template"],
            explanation_request=data["explanation_request"],
        )


def render_template(template: str, values: dict) -> str:
    """Pure placeholder substitution: only known {name} slots are replaced,
    so braces inside program text survive untouched."""
    out = template
    for name, value in values.items():
        out = out.replace("{" + name + "}", value)
    return out


def render_failing_tests(task: Task, failing: FailingTestSet) -> str:
    """One evidence line per failing case: call -> expected vs observed."""
    lines = []
    for entry in failing.entries:
        call = f"{task.entry_function}({', '.join(json.dumps(a) for a in entry.case.args)})"
        expected = json.dumps(entry.case.expected)
        result = entry.result
        if result.status == CaseStatus.TIMEOUT:
            got = "timed out"
        elif result.status == CaseStatus.ERROR:
            first_line = (result.stderr_excerpt or "error").strip().splitlines()
            got = f"raised an error ({first_line[0] if first_line else 'error'})"
        else:
            got = f"got {json.dumps(result.actual)}"
        lines.append(f"{call} -> expected {expected}, {got}")
    return "\n".join(lines)


_FENCE_RE = re.compile(r"```[ \t]*[A-Za-z0-9_+-]*[ \t]*\n(.*?)```", re.DOTALL)


def _defines_entry(source: str, entry_function: str) -> bool:
    return re.search(rf"^\s*def\s+{re.escape(entry_function)}\s*\(", source, re.MULTILINE) is not None


def _parses(source: str) -> bool:
    try:
        ast.parse(source)
        return True
    except (SyntaxError, ValueError):
        return False


def extract_program(response: str, entry_function: str) -> Optional[str]:
    """Pull candidate source out of a model response.

    First fenced code block wins. Otherwise the longest run of lines that
    lexes cleanly, parses, and defines the entry function; prose fails the
    parse check, so bare code embedded in an answer is recovered intact.
    """
    match = _FENCE_RE.search(response)
    if match:
        return match.group(1)
    lines = response.splitlines()
    n = len(lines)
    def_lines = [
        i for i, line in enumerate(lines) if _defines_entry(line, entry_function)
    ]
    if not def_lines:
        return None
    best: Optional[str] = None
    best_len = 0
    for start in range(n):
        reachable_defs = [d for d in def_lines if d >= start]
        if not reachable_defs:
            break
        for end in range(n, start, -1):
            if end - start <= best_len:
                break
            if not any(start <= d < end for d in def_lines):
                continue
            chunk = "\n".join(lines[start:end]).strip("\n")
            if not chunk:
                continue
            if tokenize(chunk).had_errors or not _parses(chunk):
                continue
            if not _defines_entry(chunk, entry_function):
                continue
            best = chunk
            best_len = end - start
            break
    return best


def extract_programs(response: str, entry_function: str, limit: int = 5) -> list[str]:
    """All fenced code blocks (up to limit); falls back to single extraction."""
    blocks = [m.group(1) for m in _FENCE_RE.finditer(response)]
    if blocks:
        return blocks[:limit]
    single = extract_program(response, entry_function)
    return [single] if single is not None else []


_HINT_MARKER_RE = re.compile(r"(?:^|\n)\s*\**HINT\**\s*:\s*", re.IGNORECASE)
_EXPL_MARKER_RE = re.compile(r"(?:^|\n)\s*\**EXPLANATION\**\s*:\s*", re.IGNORECASE)


def parse_hint_response(text: str) -> Optional[tuple[str, str]]:
    """Split a labeled response into (explanation, hint); None when unparseable."""
    hint_match = _HINT_MARKER_RE.search(text)
    if not hint_match:
        return None
    hint = text[hint_match.end() :].strip()
    if not hint:
        return None
    head = text[: hint_match.start()]
    expl_match = _EXPL_MARKER_RE.search(head)
    explanation = head[expl_match.end() :].strip() if expl_match else head.strip()
    return explanation, hint


@dataclass(frozen=True)
class CandidateRepair:
    sample_index: int
    source: Optional[str]
    verdict: Optional[SuiteVerdict]
    edit_distance: Optional[int]

    @property
    def passed(self) -> bool:
        return self.verdict is not None and self.verdict.all_passed

    def to_json_dict(self) -> dict:
        return {
            "sample_index": self.sample_index,
            "source": self.source,
            "verdict": self.verdict.to_json_dict() if self.verdict else None,
            "edit_distance": self.edit_distance,
        }


@dataclass(frozen=True)
class SelectedRepair:
    source: str
    edit_distance: int
    sample_index: int

    def to_json_dict(self) -> dict:
        return {
            "source": self.source,
            "edit_distance": self.edit_distance,
            "sample_index": self.sample_index,
        }


@dataclass(frozen=True)
class RepairOutcome:
    candidates: tuple[CandidateRepair, ...]
    selected: Optional[SelectedRepair]
    degraded: bool = False

    @property
    def empty(self) -> bool:
        return self.selected is None

    def to_json_dict(self) -> dict:
        return {
            "candidates": [c.to_json_dict() for c in self.candidates],
            "selected": self.selected.to_json_dict() if self.selected else None,
            "empty": self.empty,
            "degraded": self.degraded,
        }


@dataclass
class StageTelemetry:
    latency_ms: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    usd_cost: float = 0.0
    degraded: bool = False

    def absorb(self, completions: list[Completion], pricing: PricingTable) -> None:
        self.prompt_tokens += sum(c.prompt_tokens for c in completions)
        self.completion_tokens += sum(c.completion_tokens for c in completions)
        self.usd_cost += cost_of(completions, pricing)

    def to_json_dict(self) -> dict:
        return {
            "latency_ms": self.latency_ms,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "usd_cost": self.usd_cost,
            "degraded": self.degraded,
        }


@dataclass
class BundleTelemetry:
    backend_id: str
    backend_class: str
    total_latency_ms: int = 0
    usd_cost: float = 0.0
    per_stage: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "backend_class": self.backend_class,
            "total_latency_ms": self.total_latency_ms,
            "usd_cost": self.usd_cost,
            "per_stage": {k: v.to_json_dict() for k, v in self.per_stage.items()},
        }


@dataclass(frozen=True)
class FeedbackBundle:
    task_id: str
    bug_id: str
    repair: RepairOutcome
    explanation: str
    hint: str
    telemetry: BundleTelemetry
    config_used: PipelineConfig
    failing_case_ids: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": BUNDLE_SCHEMA_VERSION,
            "task_id": self.task_id,
            "bug_id": self.bug_id,
            "repair": self.repair.to_json_dict(),
            "explanation": self.explanation,
            "hint": self.hint,
            "telemetry": self.telemetry.to_json_dict(),
            "config_used": self.config_used.to_json_dict(),
            "failing_case_ids": list(self.failing_case_ids),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


_TIMING_KEYS = {"latency_ms", "total_latency_ms", "duration_ms"}


def stable_view(obj):
    """Bundle JSON with timing fields removed, for golden-file comparison."""
    if isinstance(obj, dict):
        return {k: stable_view(v) for k, v in obj.items() if k not in _TIMING_KEYS}
    if isinstance(obj, list):
        return [stable_view(v) for v in obj]
    return obj


def _repair_messages(task: Task, bug: BuggyProgram, failing: FailingTestSet, prompts: PromptBundle) -> list[dict]:
    user = render_template(
        prompts.repair_template,
        {
            "problem_description": task.description,
            "failing_test_cases": render_failing_tests(task, failing),
            "buggy_program": bug.source,
        },
    )
    return [
        {"role": "system", "content": prompts.repair_system},
        {"role": "user", "content": user},
    ]


def _hint_messages(
    task: Task,
    bug: BuggyProgram,
    failing: FailingTestSet,
    repair: RepairOutcome,
    prompts: PromptBundle,
) -> list[dict]:
    if repair.selected is not None:
        repaired_section = (
            "Repaired program (for your reasoning only, never to be shown):\n"
            f"```python\n{repair.selected.source}\n```\n\n"
        )
    else:
        repaired_section = ""
    user = render_template(
        prompts.hint_template,
        {
            "problem_description": task.description,
            "failing_test_cases": render_failing_tests(task, failing),
            "buggy_program": bug.source,
            "repaired_program": repaired_section,
            "explanation_request": prompts.explanation_request,
        },
    )
    return [
        {"role": "system", "content": prompts.hint_system},
        {"role": "user", "content": user},
    ]


def generate_repair(
    task: Task,
    bug: BuggyProgram,
    cfg: PipelineConfig,
    backend,
    executor: SandboxExecutor,
    failing: Optional[FailingTestSet] = None,
    pricing: Optional[PricingTable] = None,
    sink: Optional[TelemetrySink] = None,
    telemetry_out: Optional[StageTelemetry] = None,
) -> RepairOutcome:
    """Sample n_r candidates, validate against the full suite, keep the
    closest passing one (ties to the lowest sample index)."""
    pricing = pricing or PricingTable.zero(backend.backend_id)
    if failing is None:
        failing = select_failing_tests(bug, task, executor, k=cfg.failing_k)
    prompts = PromptBundle.load(cfg.prompt_set)
    messages = _repair_messages(task, bug, failing, prompts)
    params = SamplingParams(
        temperature=cfg.t_r, n=cfg.n_r, max_tokens=cfg.max_tokens_repair, seed=cfg.seed
    )
    started = time.monotonic()
    batch: GenerationBatch = generate(backend, messages, params, sink=sink)

    indexed_sources: list[tuple[int, Optional[str]]] = []
    completion_iter = iter(batch.completions)
    failed_indices = {e.sample_index for e in batch.errors}
    for sample_index in range(cfg.n_r):
        if sample_index in failed_indices:
            indexed_sources.append((sample_index, None))
        else:
            completion = next(completion_iter)
            indexed_sources.append(
                (sample_index, extract_program(completion.text, task.entry_function))
            )

    to_validate = [(i, src) for i, src in indexed_sources if src is not None]
    requests = [
        ExecutionRequest(
            program=src,
            entry_function=task.entry_function,
            cases=task.suite.cases,
            prelude=task.prelude,
            limits=executor.limits,
        )
        for _, src in to_validate
    ]
    verdicts = executor.run_parallel(requests)
    verdict_by_index = {i: v for (i, _), v in zip(to_validate, verdicts)}

    bug_stream = tokenize(bug.source)
    candidates = []
    for sample_index, source in indexed_sources:
        verdict = verdict_by_index.get(sample_index)
        distance = None
        if verdict is not None and verdict.all_passed and source is not None:
            distance = token_edit_distance(bug_stream, tokenize(source))
        candidates.append(
            CandidateRepair(
                sample_index=sample_index,
                source=source,
                verdict=verdict,
                edit_distance=distance,
            )
        )

    passing = [c for c in candidates if c.passed]
    selected = None
    if passing:
        best = min(passing, key=lambda c: (c.edit_distance, c.sample_index))
        selected = SelectedRepair(
            source=best.source,
            edit_distance=best.edit_distance,
            sample_index=best.sample_index,
        )
    outcome = RepairOutcome(
        candidates=tuple(candidates), selected=selected, degraded=batch.degraded
    )
    if telemetry_out is not None:
        telemetry_out.latency_ms = int((time.monotonic() - started) * 1000)
        telemetry_out.degraded = batch.degraded
        telemetry_out.absorb(batch.completions, pricing)
    return outcome


def generate_hint(
    task: Task,
    bug: BuggyProgram,
    repair: RepairOutcome,
    failing: FailingTestSet,
    cfg: PipelineConfig,
    backend,
    pricing: Optional[PricingTable] = None,
    sink: Optional[TelemetrySink] = None,
    telemetry_out: Optional[StageTelemetry] = None,
) -> dict:
    """One call at t_h; returns {"hint": ..., "explanation": ...}.

    An unparseable response earns a single reprompt with a format reminder;
    a second failure raises HintFormatError carrying the raw text.
    """
    pricing = pricing or PricingTable.zero(backend.backend_id)
    prompts = PromptBundle.load(cfg.prompt_set)
    messages = _hint_messages(task, bug, failing, repair, prompts)
    params = SamplingParams(
        temperature=cfg.t_h, n=1, max_tokens=cfg.max_tokens_hint, seed=cfg.seed
    )
    started = time.monotonic()
    completions: list[Completion] = []

    batch = generate(backend, messages, params, sink=sink)
    completions.extend(batch.completions)
    raw = batch.completions[0].text
    parsed = parse_hint_response(raw)
    if parsed is None:
        retry_messages = messages + [
            {"role": "assistant", "content": raw},
            {"role": "user", "content": FORMAT_REMINDER},
        ]
        batch = generate(backend, retry_messages, params, sink=sink)
        completions.extend(batch.completions)
        raw = batch.completions[0].text
        parsed = parse_hint_response(raw)
    if telemetry_out is not None:
        telemetry_out.latency_ms = int((time.monotonic() - started) * 1000)
        telemetry_out.absorb(completions, pricing)
    if parsed is None:
        raise HintFormatError(raw)
    explanation, hint = parsed
    return {"hint": hint, "explanation": explanation}


def run_feedback(
    task: Task,
    bug: BuggyProgram,
    cfg: PipelineConfig,
    backend,
    executor: SandboxExecutor,
    pricing: Optional[PricingTable] = None,
    sink: Optional[TelemetrySink] = None,
) -> FeedbackBundle:
    """Full technique: failing tests -> repair candidates -> hint bundle."""
    pricing = pricing or PricingTable.zero(backend.backend_id)
    telemetry = BundleTelemetry(
        backend_id=backend.backend_id, backend_class=backend.backend_class
    )
    total_start = time.monotonic()

    stage = StageTelemetry()
    select_start = time.monotonic()
    failing = select_failing_tests(bug, task, executor, k=cfg.failing_k)
    stage.latency_ms = int((time.monotonic() - select_start) * 1000)
    telemetry.per_stage["select_failing"] = stage

    repair_stage = StageTelemetry()
    try:
        repair = generate_repair(
            task, bug, cfg, backend, executor,
            failing=failing, pricing=pricing, sink=sink, telemetry_out=repair_stage,
        )
    except NotBuggyError:
        raise
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("repair", str(exc)) from exc
    telemetry.per_stage["repair"] = repair_stage

    hint_stage = StageTelemetry()
    try:
        hint_result = generate_hint(
            task, bug, repair, failing, cfg, backend,
            pricing=pricing, sink=sink, telemetry_out=hint_stage,
        )
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("hint", str(exc)) from exc
    telemetry.per_stage["hint"] = hint_stage

    telemetry.total_latency_ms = int((time.monotonic() - total_start) * 1000)
    telemetry.usd_cost = repair_stage.usd_cost + hint_stage.usd_cost
    return FeedbackBundle(
        task_id=task.id,
        bug_id=bug.id,
        repair=repair,
        explanation=hint_result["explanation"],
        hint=hint_result["hint"],
        telemetry=telemetry,
        config_used=cfg,
        failing_case_ids=tuple(failing.case_ids()),
    )
