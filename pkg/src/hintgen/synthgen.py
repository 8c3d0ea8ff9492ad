"""Synthetic training data: teacher-generated buggy programs, feedback tuples,
and assembly into four instruction-tuning instance types exported as JSONL.

Instance inputs render through the same prompt bundle the inference pipeline
uses, so a model trained on this data sees exactly the query shapes it will
receive when serving.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .corpus import BuggyProgram, Corpus, Origin, Split, Task, select_failing_tests
from .gateway import GatewayError, SamplingParams, TelemetrySink, generate
from .pipeline import (
    PromptBundle,
    extract_program,
    extract_programs,
    parse_hint_response,
    render_failing_tests,
    render_template,
)
from .sandbox import ExecutionRequest, SandboxExecutor

logger = logging.getLogger(__name__)

MISTAKE_CATALOG_PATH = Path(__file__).parent / "data" / "mistakes.json"

DEFAULT_MAX_TUPLES = 5
DEFAULT_TEACHER_TEMPERATURE = 0.7
SAMPLE_SEED = 13

BUGGY_PROGRAMS_SYSTEM = (
    "You study the kinds of mistakes novice Python programmers really make and "
    "can reproduce them faithfully."
)

BUGGY_PROGRAMS_TEMPLATE = (
    "Below is a Python programming problem and a category of student mistake.\n\n"
    "Problem description:\n{problem_description}\n\n"
    "Category of mistake:\n{mistake_description}\n\n"
    "Write 5 distinct buggy implementations that students making this kind of "
    "mistake might plausibly submit. Vary the code structure and style across "
    "the five programs. Put each program in its own fenced code block."
)

TUPLE_REQUEST = (
    "Do three things. (1) Fix the program while changing as little as possible; "
    "reply with the complete fixed program in a single fenced code block. "
    "(2) After the code, add a line starting with 'EXPLANATION:' followed by a "
    "detailed description of the bug(s) and the changes that fix them. "
    "(3) Finally add a line starting with 'HINT:' followed by one concise, "
    "friendly, Socratic-style hint about a single bug that does not reveal the fix."
)

EXPLANATION_ONLY_REQUEST = (
    "Reply with a line starting with 'EXPLANATION:' followed by a detailed "
    "description of the bug(s) in the program and the changes needed to fix them."
)

HINT_ONLY_REQUEST = (
    "Reply with a line starting with 'HINT:' followed by one concise, friendly, "
    "Socratic-style hint about a single bug. Do not reveal the corrected code or "
    "the exact change."
)


class SynthError(Exception):
    pass


@dataclass(frozen=True)
class MistakeType:
    id: str
    description: str

    def __post_init__(self) -> None:
        if not self.description:
            raise ValueError("mistake description must be non-empty")


def load_mistake_catalog(path=None) -> list[MistakeType]:
    data = json.loads(Path(path or MISTAKE_CATALOG_PATH).read_text(encoding="utf-8"))
    return [MistakeType(id=entry["id"], description=entry["description"]) for entry in data]


@dataclass(frozen=True)
class FeedbackTuple:
    id: str
    bug_id: str
    task_id: str
    problem_description: str
    buggy_source: str
    failing_rendered: str
    repaired_source: str
    explanation: str
    hint: str
    valid: bool


class InstanceType(str, Enum):
    REPAIR = "repair"
    EXPLANATION = "explanation"
    HINT = "hint"
    FULL_CHAIN = "full_chain"


@dataclass(frozen=True)
class TrainingInstance:
    instance_type: InstanceType
    messages: tuple
    source_tuple_id: str
    task_id: str
    bug_id: str

    def to_json_dict(self) -> dict:
        return {
            "messages": [dict(m) for m in self.messages],
            "meta": {
                "instance_type": self.instance_type.value,
                "source_tuple_id": self.source_tuple_id,
                "task_id": self.task_id,
                "bug_id": self.bug_id,
            },
        }


def _suite_request(task: Task, source: str, executor: SandboxExecutor) -> ExecutionRequest:
    return ExecutionRequest(
        program=source,
        entry_function=task.entry_function,
        cases=task.suite.cases,
        prelude=task.prelude,
        limits=executor.limits,
    )


def generate_buggy_programs(
    task: Task,
    mistake: MistakeType,
    teacher,
    executor: SandboxExecutor,
    sink: Optional[TelemetrySink] = None,
    temperature: float = DEFAULT_TEACHER_TEMPERATURE,
) -> list[BuggyProgram]:
    """One teacher call per mistake type; keeps only programs that lex and
    actually fail at least one test of the task's suite."""
    user = render_template(
        BUGGY_PROGRAMS_TEMPLATE,
        {"problem_description": task.description, "mistake_description": mistake.description},
    )
    messages = [
        {"role": "system", "content": BUGGY_PROGRAMS_SYSTEM},
        {"role": "user", "content": user},
    ]
    try:
        batch = generate(
            teacher, messages, SamplingParams(temperature=temperature, n=1, max_tokens=2048),
            sink=sink,
        )
    except GatewayError as exc:
        logger.warning("teacher failed for mistake type %r: %s", mistake.id, exc)
        return []
    sources = extract_programs(batch.completions[0].text, task.entry_function, limit=5)

    from .tokens import tokenize

    lexable = [s for s in sources if not tokenize(s).had_errors]
    verdicts = executor.run_parallel([_suite_request(task, s, executor) for s in lexable])
    survivors = []
    for index, (source, verdict) in enumerate(zip(lexable, verdicts)):
        if verdict.all_passed:
            continue  # accidentally correct: useless as a buggy example
        survivors.append(
            BuggyProgram(
                id=f"{task.id}-{mistake.id}-{index}",
                task_id=task.id,
                source=source,
                origin=Origin.MODEL_GENERATED,
                split=Split.TRAINING,
            )
        )
    if not survivors:
        logger.warning("no usable buggy programs for mistake type %r on task %r", mistake.id, task.id)
    return survivors


def generate_tuples(
    bug: BuggyProgram,
    task: Task,
    teacher,
    executor: SandboxExecutor,
    max_tuples: int = DEFAULT_MAX_TUPLES,
    prompts: Optional[PromptBundle] = None,
    failing_k: int = 3,
    sink: Optional[TelemetrySink] = None,
    temperature: float = DEFAULT_TEACHER_TEMPERATURE,
) -> list[FeedbackTuple]:
    """Up to max_tuples independent (repair, explanation, hint) tuples.

    Responses that cannot be parsed are skipped; tuples whose repair does not
    pass the full suite are kept but marked invalid (export filters them)."""
    prompts = prompts or PromptBundle.load("default-v1")
    failing = select_failing_tests(bug, task, executor, k=failing_k)
    failing_rendered = render_failing_tests(task, failing)
    user = render_template(
        prompts.hint_template,
        {
            "problem_description": task.description,
            "failing_test_cases": failing_rendered,
            "buggy_program": bug.source,
            "repaired_program": "",
            "explanation_request": TUPLE_REQUEST,
        },
    )
    messages = [
        {"role": "system", "content": prompts.repair_system},
        {"role": "user", "content": user},
    ]
    batch = generate(
        teacher,
        messages,
        SamplingParams(temperature=temperature, n=max_tuples, max_tokens=2048),
        sink=sink,
    )

    parsed = []
    for completion in batch.completions:
        repaired = extract_program(completion.text, task.entry_function)
        sections = parse_hint_response(completion.text)
        if repaired is None or sections is None:
            continue
        explanation, hint = sections
        parsed.append((repaired, explanation, hint))

    verdicts = executor.run_parallel(
        [_suite_request(task, repaired, executor) for repaired, _, _ in parsed]
    )
    tuples = []
    for index, ((repaired, explanation, hint), verdict) in enumerate(zip(parsed, verdicts)):
        tuples.append(
            FeedbackTuple(
                id=f"{bug.id}-t{index}",
                bug_id=bug.id,
                task_id=task.id,
                problem_description=task.description,
                buggy_source=bug.source,
                failing_rendered=failing_rendered,
                repaired_source=repaired,
                explanation=explanation,
                hint=hint,
                valid=verdict.all_passed,
            )
        )
    return tuples


def valid_tuples(tuples: Sequence[FeedbackTuple]) -> list[FeedbackTuple]:
    return [t for t in tuples if t.valid]


def _fenced(code: str) -> str:
    body = code if code.endswith("\n") else code + "\n"
    return f"```python\n{body}```"


def assemble_instances(
    tuples: Sequence[FeedbackTuple], prompts: Optional[PromptBundle] = None
) -> list[TrainingInstance]:
    """Exactly four instances per tuple: repair, explanation, hint, full_chain."""
    prompts = prompts or PromptBundle.load("default-v1")
    instances: list[TrainingInstance] = []
    for t in tuples:
        if not t.valid:
            raise SynthError(f"tuple {t.id!r} is invalid; filter before assembly")
        base_values = {
            "problem_description": t.problem_description,
            "failing_test_cases": t.failing_rendered,
            "buggy_program": t.buggy_source,
            "repaired_program": "",
        }

        repair_user = render_template(
            prompts.repair_template,
            {k: v for k, v in base_values.items() if k != "repaired_program"},
        )
        spec_by_type = [
            (
                InstanceType.REPAIR,
                prompts.repair_system,
                repair_user,
                _fenced(t.repaired_source),
            ),
            (
                InstanceType.EXPLANATION,
                prompts.hint_system,
                render_template(
                    prompts.hint_template,
                    {**base_values, "explanation_request": EXPLANATION_ONLY_REQUEST},
                ),
                f"EXPLANATION: {t.explanation}",
            ),
            (
                InstanceType.HINT,
                prompts.hint_system,
                render_template(
                    prompts.hint_template,
                    {**base_values, "explanation_request": HINT_ONLY_REQUEST},
                ),
                f"HINT: {t.hint}",
            ),
            (
                InstanceType.FULL_CHAIN,
                prompts.repair_system,
                render_template(
                    prompts.hint_template,
                    {**base_values, "explanation_request": TUPLE_REQUEST},
                ),
                f"{_fenced(t.repaired_source)}\n\nEXPLANATION: {t.explanation}\nHINT: {t.hint}",
            ),
        ]
        for instance_type, system, user, target in spec_by_type:
            instances.append(
                TrainingInstance(
                    instance_type=instance_type,
                    messages=(
                        {"role": "system", "content": system},
                        {"role": "user", "content": user},
                        {"role": "assistant", "content": target},
                    ),
                    source_tuple_id=t.id,
                    task_id=t.task_id,
                    bug_id=t.bug_id,
                )
            )
    return instances


def sample_tuples(
    tuples: Sequence[FeedbackTuple], percent: float, seed: int = SAMPLE_SEED
) -> list[FeedbackTuple]:
    """Uniform deterministic subsample of ceil(percent% of tuples), original order."""
    if not (0 <= percent <= 100):
        raise SynthError("percent must be within [0, 100]")
    tuples = list(tuples)
    count = math.ceil(len(tuples) * percent / 100.0)
    if count >= len(tuples):
        return tuples
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(tuples)), count))
    return [tuples[i] for i in chosen]


def export_jsonl(
    instances: Sequence[TrainingInstance],
    path,
    corpus: Optional[Corpus] = None,
    executor: Optional[SandboxExecutor] = None,
) -> dict:
    """Write chat-format JSONL plus a manifest of per-type/per-task counts.

    When a corpus and executor are supplied, every distinct target repair is
    re-validated against its suite and the evaluation split is checked for
    leakage before anything is written."""
    path = Path(path)
    if corpus is not None:
        eval_ids = {b.id for b in corpus.evaluation_bugs}
        leaked = sorted({i.bug_id for i in instances} & eval_ids)
        if leaked:
            raise SynthError(f"evaluation-split bugs leaked into training export: {leaked}")
        if executor is not None:
            _revalidate_targets(instances, corpus, executor)

    per_type: dict[str, int] = {t.value: 0 for t in InstanceType}
    per_task: dict[str, int] = {}
    tuple_ids = set()
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for instance in instances:
            fh.write(json.dumps(instance.to_json_dict(), ensure_ascii=False, sort_keys=True) + "\n")
            per_type[instance.instance_type.value] += 1
            per_task[instance.task_id] = per_task.get(instance.task_id, 0) + 1
            tuple_ids.add(instance.source_tuple_id)
    manifest = {
        "total_instances": len(instances),
        "total_tuples": len(tuple_ids),
        "per_type": per_type,
        "per_task": dict(sorted(per_task.items())),
    }
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return manifest


def _revalidate_targets(
    instances: Sequence[TrainingInstance], corpus: Corpus, executor: SandboxExecutor
) -> None:
    repairs = {}
    for instance in instances:
        if instance.instance_type == InstanceType.REPAIR:
            target = instance.messages[-1]["content"]
            source = target.split("```python\n", 1)[-1].rsplit("```", 1)[0]
            repairs[(instance.task_id, instance.source_tuple_id)] = source
    requests = []
    keys = []
    for (task_id, tuple_id), source in repairs.items():
        task = corpus.task_by_id(task_id)
        requests.append(_suite_request(task, source, executor))
        keys.append(tuple_id)
    for tuple_id, verdict in zip(keys, executor.run_parallel(requests)):
        if not verdict.all_passed:
            raise SynthError(
                f"target repair for tuple {tuple_id!r} no longer passes its suite: "
                f"failing {list(verdict.failing_ids)}"
            )


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


@dataclass
class SynthesisReport:
    bugs_used: int
    tuples_total: int
    tuples_valid: int
    tuples_exported: int
    instances: int
    manifest: dict


def synthesize_dataset(
    corpus: Corpus,
    teacher,
    executor: SandboxExecutor,
    out_path,
    mistakes: Optional[Sequence[MistakeType]] = None,
    generate_synthetic_bugs: bool = True,
    max_tuples: int = DEFAULT_MAX_TUPLES,
    percent: float = 100.0,
    seed: int = SAMPLE_SEED,
    sink: Optional[TelemetrySink] = None,
) -> SynthesisReport:
    """End-to-end synthesis: bugs -> tuples -> filter -> sample -> export."""
    prompts = PromptBundle.load("default-v1")
    bugs: list[BuggyProgram] = list(corpus.training_bugs)
    if generate_synthetic_bugs:
        catalog = list(mistakes) if mistakes is not None else load_mistake_catalog()
        for task in corpus.tasks:
            for mistake in catalog:
                bugs.extend(generate_buggy_programs(task, mistake, teacher, executor, sink=sink))

    all_tuples: list[FeedbackTuple] = []
    for bug in bugs:
        task = corpus.task_by_id(bug.task_id)
        try:
            all_tuples.extend(
                generate_tuples(
                    bug, task, teacher, executor,
                    max_tuples=max_tuples, prompts=prompts, sink=sink,
                )
            )
        except GatewayError as exc:
            logger.warning("tuple generation failed for bug %r: %s", bug.id, exc)

    usable = valid_tuples(all_tuples)
    exported_tuples = sample_tuples(usable, percent, seed=seed)
    instances = assemble_instances(exported_tuples, prompts=prompts)
    manifest = export_jsonl(instances, out_path, corpus=corpus, executor=executor)
    return SynthesisReport(
        bugs_used=len(bugs),
        tuples_total=len(all_tuples),
        tuples_valid=len(usable),
        tuples_exported=len(exported_tuples),
        instances=len(instances),
        manifest=manifest,
    )
