"""Domain data model: tasks, test suites, buggy programs, and corpus loading.

A corpus lives in a directory: ``manifest.json`` naming the corpus plus one
JSON file per task and a ``.py``/``.json`` sidecar pair per buggy program.
All JSON is written in canonical form (sorted keys, two-space indent, LF,
trailing newline) so serialization round-trips byte-identically.
"""

from __future__ import annotations

import json
import keyword
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .sandbox import (
    CaseStatus,
    ExecutionRequest,
    Limits,
    SandboxExecutor,
    SuiteVerdict,
    CaseResult,
)

SCHEMA_VERSION = 1


class CorpusError(Exception):
    def __init__(self, message: str, path: Optional[str] = None, field: Optional[str] = None):
        self.path = path
        self.field = field
        detail = message
        if path:
            detail += f" [file: {path}" + (f", field: {field}]" if field else "]")
        super().__init__(detail)


class NotBuggyError(Exception):
    """The program passes the whole suite, so there is nothing to fix."""


class Difficulty(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


class Origin(str, Enum):
    REAL_WORLD = "real_world"
    DESIGNED = "designed"
    MODEL_GENERATED = "model_generated"


class Split(str, Enum):
    EVALUATION = "evaluation"
    TRAINING = "training"


@dataclass(frozen=True)
class CompareMode:
    mode: str  # "exact" | "boolean" | "float_tol"
    eps: Optional[float] = None

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "boolean", "float_tol"):
            raise ValueError(f"unknown compare mode: {self.mode!r}")
        if self.mode == "float_tol":
            if self.eps is None or self.eps <= 0:
                raise ValueError("float_tol requires eps > 0")
        elif self.eps is not None:
            raise ValueError(f"eps only applies to float_tol, not {self.mode}")

    def to_wire(self):
        if self.mode == "float_tol":
            return {"float_tol": self.eps}
        return self.mode

    @classmethod
    def from_wire(cls, value) -> "CompareMode":
        if isinstance(value, str):
            return cls(value)
        if isinstance(value, dict) and set(value) == {"float_tol"}:
            return cls("float_tol", float(value["float_tol"]))
        raise ValueError(f"bad compare_mode value: {value!r}")


EXACT = CompareMode("exact")
BOOLEAN = CompareMode("boolean")


def float_tol(eps: float = 1e-6) -> CompareMode:
    return CompareMode("float_tol", eps)


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # domain type, not a pytest class

    id: str
    args: tuple
    expected: object
    compare_mode: CompareMode = EXACT
    timeout_ms: int = 5000

    def __post_init__(self) -> None:
        if self.timeout_ms < 100:
            raise ValueError("timeout_ms must be >= 100")
        try:
            json.dumps(list(self.args))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"args not JSON-serializable: {exc}") from exc


@dataclass(frozen=True)
class TestSuite:
    __test__ = False  # domain type, not a pytest class

    cases: tuple[TestCase, ...]

    def __post_init__(self) -> None:
        ids = [c.id for c in self.cases]
        if len(set(ids)) != len(ids):
            raise ValueError("test case ids must be unique")

    def __len__(self) -> int:
        return len(self.cases)


@dataclass(frozen=True)
class Task:
    id: str
    title: str
    description: str
    entry_function: str
    suite: TestSuite
    difficulty: Difficulty
    prelude: Optional[str] = None
    solution: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.entry_function.isidentifier() or keyword.iskeyword(self.entry_function):
            raise ValueError(f"entry_function is not a valid identifier: {self.entry_function!r}")
        if not self.suite.cases:
            raise ValueError(f"task {self.id!r} has an empty test suite")


@dataclass(frozen=True)
class BuggyProgram:
    id: str
    task_id: str
    source: str
    origin: Origin
    split: Split


@dataclass(frozen=True)
class Corpus:
    name: str
    tasks: tuple[Task, ...]
    bugs: tuple[BuggyProgram, ...]

    def __post_init__(self) -> None:
        task_ids = [t.id for t in self.tasks]
        if len(set(task_ids)) != len(task_ids):
            raise ValueError("duplicate task ids")
        bug_ids = [b.id for b in self.bugs]
        if len(set(bug_ids)) != len(bug_ids):
            raise ValueError("duplicate bug ids")
        known = set(task_ids)
        for bug in self.bugs:
            if bug.task_id not in known:
                raise ValueError(f"bug {bug.id!r} references unknown task {bug.task_id!r}")

    def task_by_id(self, task_id: str) -> Task:
        for task in self.tasks:
            if task.id == task_id:
                return task
        raise KeyError(task_id)

    def bug_by_id(self, bug_id: str) -> BuggyProgram:
        for bug in self.bugs:
            if bug.id == bug_id:
                return bug
        raise KeyError(bug_id)

    def bugs_in_split(self, split: Split) -> tuple[BuggyProgram, ...]:
        return tuple(b for b in self.bugs if b.split == split)

    @property
    def evaluation_bugs(self) -> tuple[BuggyProgram, ...]:
        return self.bugs_in_split(Split.EVALUATION)

    @property
    def training_bugs(self) -> tuple[BuggyProgram, ...]:
        return self.bugs_in_split(Split.TRAINING)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _case_to_json(case: TestCase) -> dict:
    return {
        "id": case.id,
        "args": list(case.args),
        "expected": case.expected,
        "compare_mode": case.compare_mode.to_wire(),
        "timeout_ms": case.timeout_ms,
    }


def _case_from_json(obj: dict, path: str) -> TestCase:
    for fieldname in ("id", "args", "expected", "compare_mode", "timeout_ms"):
        if fieldname not in obj:
            raise CorpusError(f"test case missing {fieldname!r}", path=path, field=fieldname)
    try:
        return TestCase(
            id=str(obj["id"]),
            args=tuple(obj["args"]),
            expected=obj["expected"],
            compare_mode=CompareMode.from_wire(obj["compare_mode"]),
            timeout_ms=int(obj["timeout_ms"]),
        )
    except ValueError as exc:
        raise CorpusError(f"malformed test case: {exc}", path=path, field=str(obj.get("id"))) from exc


def _task_to_json(task: Task) -> dict:
    return {
        "id": task.id,
        "title": task.title,
        "description": task.description,
        "entry_function": task.entry_function,
        "difficulty": task.difficulty.value,
        "prelude": task.prelude,
        "solution": task.solution,
        "suite": [_case_to_json(c) for c in task.suite.cases],
    }


def _task_from_json(obj: dict, path: str) -> Task:
    for fieldname in ("id", "title", "description", "entry_function", "difficulty", "suite"):
        if fieldname not in obj:
            raise CorpusError(f"task missing {fieldname!r}", path=path, field=fieldname)
    cases = tuple(_case_from_json(c, path) for c in obj["suite"])
    try:
        return Task(
            id=str(obj["id"]),
            title=str(obj["title"]),
            description=str(obj["description"]),
            entry_function=str(obj["entry_function"]),
            suite=TestSuite(cases),
            difficulty=Difficulty(obj["difficulty"]),
            prelude=obj.get("prelude"),
            solution=obj.get("solution"),
        )
    except ValueError as exc:
        raise CorpusError(f"malformed task: {exc}", path=path) from exc


def load_corpus(root) -> Corpus:
    root = Path(root)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise CorpusError("missing manifest", path=str(manifest_path))
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"manifest is not valid JSON: {exc}", path=str(manifest_path)) from exc
    for fieldname in ("name", "schema_version", "tasks", "bugs"):
        if fieldname not in manifest:
            raise CorpusError(f"manifest missing {fieldname!r}", path=str(manifest_path), field=fieldname)
    if manifest["schema_version"] != SCHEMA_VERSION:
        raise CorpusError(
            f"unsupported schema_version {manifest['schema_version']!r} (expected {SCHEMA_VERSION})",
            path=str(manifest_path),
            field="schema_version",
        )

    tasks = []
    for rel in manifest["tasks"]:
        task_path = root / rel
        if not task_path.exists():
            raise CorpusError("task file missing", path=str(task_path))
        obj = json.loads(task_path.read_text(encoding="utf-8"))
        tasks.append(_task_from_json(obj, str(task_path)))

    bugs = []
    for rel in manifest["bugs"]:
        sidecar_path = root / rel
        if not sidecar_path.exists():
            raise CorpusError("bug sidecar missing", path=str(sidecar_path))
        source_path = sidecar_path.with_suffix(".py")
        if not source_path.exists():
            raise CorpusError("bug source missing", path=str(source_path))
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        for fieldname in ("task_id", "origin", "split"):
            if fieldname not in sidecar:
                raise CorpusError(f"bug sidecar missing {fieldname!r}", path=str(sidecar_path), field=fieldname)
        try:
            bugs.append(
                BuggyProgram(
                    id=sidecar_path.stem,
                    task_id=str(sidecar["task_id"]),
                    source=source_path.read_text(encoding="utf-8"),
                    origin=Origin(sidecar["origin"]),
                    split=Split(sidecar["split"]),
                )
            )
        except ValueError as exc:
            raise CorpusError(f"malformed bug sidecar: {exc}", path=str(sidecar_path)) from exc

    try:
        return Corpus(name=str(manifest["name"]), tasks=tuple(tasks), bugs=tuple(bugs))
    except ValueError as exc:
        raise CorpusError(str(exc), path=str(manifest_path)) from exc


def serialize_corpus(corpus: Corpus, root) -> None:
    """Write the corpus directory in canonical form (see module docstring)."""
    root = Path(root)
    (root / "tasks").mkdir(parents=True, exist_ok=True)
    (root / "bugs").mkdir(parents=True, exist_ok=True)
    manifest = {
        "name": corpus.name,
        "schema_version": SCHEMA_VERSION,
        "tasks": [f"tasks/{t.id}.json" for t in corpus.tasks],
        "bugs": [f"bugs/{b.id}.json" for b in corpus.bugs],
    }
    (root / "manifest.json").write_text(canonical_json(manifest), encoding="utf-8")
    for task in corpus.tasks:
        (root / "tasks" / f"{task.id}.json").write_text(
            canonical_json(_task_to_json(task)), encoding="utf-8"
        )
    for bug in corpus.bugs:
        (root / "bugs" / f"{bug.id}.json").write_text(
            canonical_json({"task_id": bug.task_id, "origin": bug.origin.value, "split": bug.split.value}),
            encoding="utf-8",
        )
        (root / "bugs" / f"{bug.id}.py").write_text(bug.source, encoding="utf-8")


BUNDLED_CORPUS_ROOT = Path(__file__).parent / "data" / "corpus"


def list_bundled_corpora() -> list[str]:
    if not BUNDLED_CORPUS_ROOT.exists():
        return []
    return sorted(p.name for p in BUNDLED_CORPUS_ROOT.iterdir() if p.is_dir())


def resolve_corpus_path(name_or_path) -> Path:
    """Accept a directory path or the name of a bundled corpus."""
    candidate = Path(name_or_path)
    if candidate.is_dir():
        return candidate
    bundled = BUNDLED_CORPUS_ROOT / str(name_or_path)
    if bundled.is_dir():
        return bundled
    raise CorpusError(
        f"corpus not found: {name_or_path!r} (bundled: {', '.join(list_bundled_corpora())})"
    )


@dataclass(frozen=True)
class TaskValidation:
    task_id: str
    solution_present: bool
    solution_passed: Optional[bool]
    failing_ids: tuple[str, ...]


@dataclass(frozen=True)
class BugValidation:
    bug_id: str
    failing_ids: tuple[str, ...]

    @property
    def not_buggy(self) -> bool:
        return not self.failing_ids


@dataclass(frozen=True)
class ValidationReport:
    corpus_name: str
    tasks: tuple[TaskValidation, ...]
    bugs: tuple[BugValidation, ...]

    @property
    def problems(self) -> list[str]:
        out = []
        for t in self.tasks:
            if t.solution_present and not t.solution_passed:
                out.append(
                    f"task {t.task_id}: reference solution fails cases {list(t.failing_ids)}"
                )
        for b in self.bugs:
            if b.not_buggy:
                out.append(f"bug {b.bug_id}: not buggy (passes the whole suite)")
        return out

    @property
    def ok(self) -> bool:
        return not self.problems


def _suite_request(task: Task, source: str, limits: Optional[Limits] = None) -> ExecutionRequest:
    return ExecutionRequest(
        program=source,
        entry_function=task.entry_function,
        cases=task.suite.cases,
        prelude=task.prelude,
        limits=limits or Limits(),
    )


def validate_corpus(corpus: Corpus, executor: SandboxExecutor) -> ValidationReport:
    """Check reference solutions pass and every bug fails at least one test."""
    requests = []
    keys = []
    for task in corpus.tasks:
        if task.solution is not None:
            requests.append(_suite_request(task, task.solution))
            keys.append(("task", task.id))
    for bug in corpus.bugs:
        task = corpus.task_by_id(bug.task_id)
        requests.append(_suite_request(task, bug.source))
        keys.append(("bug", bug.id))

    verdicts = executor.run_parallel(requests)
    by_key = dict(zip(keys, verdicts))

    task_reports = []
    for task in corpus.tasks:
        verdict = by_key.get(("task", task.id))
        task_reports.append(
            TaskValidation(
                task_id=task.id,
                solution_present=task.solution is not None,
                solution_passed=verdict.all_passed if verdict else None,
                failing_ids=verdict.failing_ids if verdict else (),
            )
        )
    bug_reports = [
        BugValidation(bug_id=bug.id, failing_ids=by_key[("bug", bug.id)].failing_ids)
        for bug in corpus.bugs
    ]
    return ValidationReport(corpus.name, tuple(task_reports), tuple(bug_reports))


@dataclass(frozen=True)
class FailingCase:
    case: TestCase
    result: CaseResult


@dataclass(frozen=True)
class FailingTestSet:
    task_id: str
    bug_id: str
    entries: tuple[FailingCase, ...]

    def case_ids(self) -> list[str]:
        return [e.case.id for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def select_failing_tests(
    bug: BuggyProgram,
    task: Task,
    executor: SandboxExecutor,
    k: Optional[int] = 3,
    verdict: Optional[SuiteVerdict] = None,
) -> FailingTestSet:
    """First min(k, #failing) failing cases in suite order, with evidence.

    Pass ``k=None`` for the unbounded set. A precomputed suite verdict may be
    supplied to avoid re-running the program.
    """
    if bug.task_id != task.id:
        raise ValueError(f"bug {bug.id!r} does not belong to task {task.id!r}")
    if k is not None and (not isinstance(k, int) or isinstance(k, bool) or k < 1):
        if not (isinstance(k, float) and math.isinf(k) and k > 0):
            raise ValueError("k must be a positive integer or None")
        k = None
    if verdict is None:
        verdict = executor.run_suite(_suite_request(task, bug.source))
    by_id = {r.case_id: r for r in verdict.results}
    failing = [
        FailingCase(case, by_id[case.id])
        for case in task.suite.cases
        if by_id[case.id].status != CaseStatus.PASS
    ]
    if not failing:
        raise NotBuggyError(f"program {bug.id!r} passes all tests; not buggy")
    if k is not None:
        failing = failing[:k]
    return FailingTestSet(task_id=task.id, bug_id=bug.id, entries=tuple(failing))
