"""Subprocess sandbox for running untrusted learner programs against test suites.

Each execution request runs in its own interpreter process driven by the
bundled harness script (see ``harness.py``). The engine talks to the child
over a line-oriented JSON protocol: request JSON on stdin, one verdict line
per case on stdout, then ``{"done": true}``.

Trust level is classroom code, not adversarial malware: processes get a
fresh temp working directory, a wall-clock kill, and a best-effort network
guard, but no container-grade isolation.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Sequence

if TYPE_CHECKING:
    from .corpus import TestCase

HARNESS_PATH = Path(__file__).parent / "harness.py"

DEFAULT_WALL_TIMEOUT_MS = 5000
DEFAULT_TOTAL_TIMEOUT_MS = 30000
DEFAULT_MAX_OUTPUT_BYTES = 64 * 1024


class SandboxError(Exception):
    pass


class SandboxConfigError(SandboxError):
    """The configured interpreter is missing or unusable."""


class CaseStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Limits:
    wall_timeout_ms: int = DEFAULT_WALL_TIMEOUT_MS
    total_timeout_ms: int = DEFAULT_TOTAL_TIMEOUT_MS
    max_output_bytes: int = DEFAULT_MAX_OUTPUT_BYTES

    def __post_init__(self) -> None:
        if min(self.wall_timeout_ms, self.total_timeout_ms, self.max_output_bytes) <= 0:
            raise ValueError("limits must be positive")
        if self.total_timeout_ms < self.wall_timeout_ms:
            raise ValueError("total_timeout_ms must cover at least one case timeout")


@dataclass(frozen=True)
class ExecutionRequest:
    program: str
    entry_function: str
    cases: Sequence["TestCase"]
    prelude: Optional[str] = None
    limits: Limits = field(default_factory=Limits)

    def to_wire(self) -> dict:
        return {
            "prelude": self.prelude,
            "program": self.program,
            "entry_function": self.entry_function,
            "cases": [
                {
                    "id": c.id,
                    "args": list(c.args),
                    "expected": c.expected,
                    "compare_mode": c.compare_mode.to_wire(),
                    "timeout_ms": c.timeout_ms,
                }
                for c in self.cases
            ],
            "limits": {
                "wall_timeout_ms": self.limits.wall_timeout_ms,
                "total_timeout_ms": self.limits.total_timeout_ms,
                "max_output_bytes": self.limits.max_output_bytes,
            },
        }


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    status: CaseStatus
    actual: object
    stderr_excerpt: str
    duration_ms: int

    def to_json_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "status": self.status.value,
            "actual": self.actual,
            "stderr_excerpt": self.stderr_excerpt,
            "duration_ms": self.duration_ms,
        }


@dataclass(frozen=True)
class SuiteVerdict:
    results: tuple[CaseResult, ...]
    all_passed: bool
    failing_ids: tuple[str, ...]

    @classmethod
    def from_results(cls, results: Sequence[CaseResult]) -> "SuiteVerdict":
        failing = tuple(
            r.case_id for r in results if r.status != CaseStatus.PASS
        )
        return cls(tuple(results), not failing, failing)

    def to_json_dict(self) -> dict:
        return {
            "results": [r.to_json_dict() for r in self.results],
            "all_passed": self.all_passed,
            "failing_ids": list(self.failing_ids),
        }


def _child_env() -> dict:
    env = {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "PYTHONHASHSEED": "0",
        "PYTHONDONTWRITEBYTECODE": "1",
        "PYTHONIOENCODING": "utf-8",
        "LC_ALL": "C.UTF-8",
    }
    return env


class SandboxExecutor:
    """Runs execution requests in isolated interpreter subprocesses.

    Safe for concurrent callers: every run_suite call owns its own process
    and temp directory; run_parallel fans out over a bounded thread pool.
    """

    def __init__(
        self,
        interpreter: Optional[str] = None,
        limits: Optional[Limits] = None,
        workers: int = 4,
    ) -> None:
        self.interpreter = interpreter or sys.executable
        if not Path(self.interpreter).exists():
            raise SandboxConfigError(
                f"subject-language interpreter not found: {self.interpreter}"
            )
        if not HARNESS_PATH.exists():
            raise SandboxConfigError(f"harness script missing: {HARNESS_PATH}")
        self.limits = limits or Limits()
        self.workers = max(1, workers)

    def run_suite(self, request: ExecutionRequest) -> SuiteVerdict:
        payload = json.dumps(request.to_wire(), ensure_ascii=False)
        deadline_s = request.limits.total_timeout_ms / 1000.0 + 1.0
        with tempfile.TemporaryDirectory(prefix="hintgen-sbx-") as tmp:
            workdir = Path(tmp) / "work"
            workdir.mkdir()
            proc = subprocess.Popen(
                [self.interpreter, str(HARNESS_PATH)],
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                cwd=str(workdir),
                env=_child_env(),
                text=True,
                encoding="utf-8",
            )
            killed = False
            try:
                out, _ = proc.communicate(payload, timeout=deadline_s)
            except subprocess.TimeoutExpired:
                killed = True
                proc.kill()
                out, _ = proc.communicate()
        return self._assemble_verdict(request, out or "", killed, proc.returncode)

    def _assemble_verdict(
        self,
        request: ExecutionRequest,
        stdout_text: str,
        killed: bool,
        returncode: Optional[int],
    ) -> SuiteVerdict:
        wanted = [c.id for c in request.cases]
        seen: dict[str, CaseResult] = {}
        done = False
        protocol_error = None
        for line in stdout_text.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                continue  # diagnostics are ignored by contract
            if not isinstance(obj, dict):
                continue
            if obj.get("done") is True:
                done = True
                break
            if {"case_id", "status"} <= obj.keys():
                try:
                    result = CaseResult(
                        case_id=str(obj["case_id"]),
                        status=CaseStatus(obj["status"]),
                        actual=obj.get("actual"),
                        stderr_excerpt=str(obj.get("stderr", "")),
                        duration_ms=int(obj.get("duration_ms", 0)),
                    )
                except (ValueError, TypeError) as exc:
                    protocol_error = f"malformed verdict line: {exc}"
                    break
                if result.case_id in wanted:
                    seen[result.case_id] = result
            else:
                protocol_error = f"unexpected protocol line: {line[:120]}"
                break

        if done and returncode not in (0, None) and protocol_error is None:
            protocol_error = f"harness exited {returncode} after done"
        if done and protocol_error is None and len(seen) == len(wanted):
            return SuiteVerdict.from_results([seen[cid] for cid in wanted])

        # Fill the gaps: first missing case after an external kill was the
        # one that hung; everything else never ran.
        results = []
        first_missing = True
        for cid in wanted:
            if cid in seen:
                results.append(seen[cid])
                continue
            if killed and first_missing:
                status, note = CaseStatus.TIMEOUT, "killed: total time limit exceeded"
            else:
                status = CaseStatus.ERROR
                note = protocol_error or (
                    "killed: total time limit exceeded"
                    if killed
                    else f"harness ended without verdict (exit={returncode})"
                )
            first_missing = False
            results.append(
                CaseResult(
                    case_id=cid,
                    status=status,
                    actual=None,
                    stderr_excerpt=note,
                    duration_ms=0,
                )
            )
        return SuiteVerdict.from_results(results)

    def run_parallel(
        self, requests: Sequence[ExecutionRequest], workers: Optional[int] = None
    ) -> list[SuiteVerdict]:
        """Run requests concurrently; results come back in request order."""
        if not requests:
            return []
        pool_size = max(1, workers or self.workers)

        def _one(req: ExecutionRequest) -> SuiteVerdict:
            try:
                return self.run_suite(req)
            except SandboxError:
                raise
            except Exception as exc:  # keep the batch alive, surface in place
                return SuiteVerdict.from_results(
                    [
                        CaseResult(
                            case_id=c.id,
                            status=CaseStatus.ERROR,
                            actual=None,
                            stderr_excerpt=f"sandbox failure: {exc}",
                            duration_ms=0,
                        )
                        for c in req.cases
                    ]
                )

        with ThreadPoolExecutor(max_workers=pool_size) as pool:
            return list(pool.map(_one, requests))
