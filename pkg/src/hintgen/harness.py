"""In-interpreter test harness, executed inside the sandbox interpreter process.

Reads one execution-request JSON object from stdin, runs each test case
against the submitted program, and emits one verdict JSON line per case
followed by a final ``{"done": true}`` line.

This file is self-contained on purpose: it is launched as a plain script
(``python harness.py``) inside the sandboxed interpreter and must not import
anything from the surrounding package. Everything it needs ships in stdlib.
"""

from __future__ import annotations

import copy
import io
import json
import os
import signal
import sys
import time
import traceback

_REQUEST_FIELDS = {"prelude", "program", "entry_function", "cases", "limits"}
_CASE_FIELDS = {"id", "args", "expected", "compare_mode", "timeout_ms"}
_LIMIT_FIELDS = {"wall_timeout_ms", "total_timeout_ms", "max_output_bytes"}

# Hook a task prelude may define to turn raw JSON args into domain objects
# (e.g. wrap plain lists into linked-list values) before the entry call.
ARG_ADAPTER_NAME = "__adapt_args__"


class _CaseTimeout(BaseException):
    """BaseException so learner-side ``except Exception`` cannot swallow it."""


def _on_alarm(signum, frame):
    raise _CaseTimeout()


def _normalize(value):
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, dict):
        return {k: _normalize(v) for k, v in value.items()}
    return value


def _approx_equal(a, b, eps):
    if isinstance(a, bool) or isinstance(b, bool):
        return a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return abs(a - b) <= eps
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(
            _approx_equal(x, y, eps) for x, y in zip(a, b)
        )
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(
            _approx_equal(a[k], b[k], eps) for k in a
        )
    return a == b


def _compare(actual, expected, mode):
    if mode == "exact":
        return _normalize(actual) == expected
    if mode == "boolean":
        return isinstance(actual, bool) and actual == expected
    if isinstance(mode, dict) and "float_tol" in mode:
        return _approx_equal(_normalize(actual), expected, float(mode["float_tol"]))
    raise ValueError(f"unknown compare_mode: {mode!r}")


def _jsonable(value):
    normalized = _normalize(value)
    try:
        json.dumps(normalized)
        return normalized
    except (TypeError, ValueError):
        return repr(value)


def _validate_request(req):
    if not isinstance(req, dict):
        raise ValueError("request must be a JSON object")
    unknown = set(req) - _REQUEST_FIELDS
    if unknown:
        raise ValueError(f"unknown request fields: {sorted(unknown)}")
    for field in ("program", "entry_function", "cases", "limits"):
        if field not in req:
            raise ValueError(f"missing request field: {field}")
    unknown = set(req["limits"]) - _LIMIT_FIELDS
    if unknown:
        raise ValueError(f"unknown limit fields: {sorted(unknown)}")
    for case in req["cases"]:
        unknown = set(case) - _CASE_FIELDS
        if unknown:
            raise ValueError(f"unknown case fields: {sorted(unknown)}")
        for field in _CASE_FIELDS:
            if field not in case:
                raise ValueError(f"case missing field: {field}")


def _disable_network():
    # Classroom-grade guard, not a security boundary: keeps accidental
    # network use (requests to solution sites, telemetry) from working.
    try:
        import socket

        def _denied(*args, **kwargs):
            raise OSError("network access is disabled inside the test sandbox")

        socket.socket = _denied
        socket.create_connection = _denied
        socket.getaddrinfo = _denied
    except Exception:
        pass


class _OutputCapture:
    """Redirects fd 1/2 into a scratch file so program prints cannot reach
    the verdict stream; verdicts are written to a duplicate of the real fd 1."""

    def __init__(self):
        self.real_stdout = os.dup(1)
        self.scratch = os.open(
            os.path.join(os.getcwd(), ".program-output"),
            os.O_RDWR | os.O_CREAT | os.O_TRUNC,
        )
        sys.stdout.flush()
        sys.stderr.flush()
        os.dup2(self.scratch, 1)
        os.dup2(self.scratch, 2)
        self._read_pos = 0

    def emit(self, obj):
        line = json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n"
        os.write(self.real_stdout, line.encode("utf-8"))

    def drain(self, max_bytes):
        """Program output produced since the previous drain, truncated."""
        sys.stdout.flush()
        sys.stderr.flush()
        end = os.lseek(self.scratch, 0, os.SEEK_END)
        size = end - self._read_pos
        os.lseek(self.scratch, self._read_pos, os.SEEK_SET)
        data = os.read(self.scratch, min(size, max_bytes))
        truncated = size > max_bytes
        self._read_pos = end
        text = data.decode("utf-8", errors="replace")
        if truncated:
            text += "...[output truncated]"
        return text


def _error_text(exc):
    return "".join(traceback.format_exception_only(type(exc), exc)).strip()


def run(raw_request: str) -> int:
    capture = _OutputCapture()
    try:
        request = json.loads(raw_request)
        _validate_request(request)
    except Exception as exc:
        # No reliable case list: report the failure as a diagnostic and bail.
        os.write(capture.real_stdout, f"harness: bad request: {exc}\n".encode())
        return 1

    cases = request["cases"]
    limits = request["limits"]
    max_output = int(limits["max_output_bytes"])
    wall_ms = int(limits["wall_timeout_ms"])

    _disable_network()
    signal.signal(signal.SIGALRM, _on_alarm)

    namespace: dict = {"__name__": "__main__"}
    load_error = None
    try:
        if request.get("prelude"):
            exec(compile(request["prelude"], "<prelude>", "exec"), namespace)
        exec(compile(request["program"], "<program>", "exec"), namespace)
    except BaseException as exc:  # includes SystemExit from learner code
        load_error = _error_text(exc)

    entry_name = request["entry_function"]
    entry = namespace.get(entry_name)
    if load_error is None and not callable(entry):
        load_error = f"entry function {entry_name!r} is not defined"
    adapter = namespace.get(ARG_ADAPTER_NAME)

    for case in cases:
        output_excerpt = ""
        if load_error is not None:
            capture.emit(
                {
                    "case_id": case["id"],
                    "status": "error",
                    "actual": None,
                    "stderr": load_error,
                    "duration_ms": 0,
                }
            )
            continue

        timeout_ms = min(int(case["timeout_ms"]), wall_ms)
        args = copy.deepcopy(case["args"])
        status = "error"
        actual = None
        err = ""
        start = time.monotonic()
        signal.setitimer(signal.ITIMER_REAL, timeout_ms / 1000.0)
        try:
            if adapter is not None:
                args = adapter(args)
            result = entry(*args)
            passed = _compare(result, case["expected"], case["compare_mode"])
            status = "pass" if passed else "fail"
            actual = _jsonable(result)
        except _CaseTimeout:
            status = "timeout"
        except BaseException as exc:
            status = "error"
            err = _error_text(exc)
        finally:
            signal.setitimer(signal.ITIMER_REAL, 0)
        duration_ms = int((time.monotonic() - start) * 1000)
        output_excerpt = capture.drain(max_output)
        stderr_text = err
        if output_excerpt:
            stderr_text = (err + "\n" if err else "") + output_excerpt
        capture.emit(
            {
                "case_id": case["id"],
                "status": status,
                "actual": actual,
                "stderr": stderr_text[: max_output + 64],
                "duration_ms": duration_ms,
            }
        )

    capture.emit({"done": True})
    return 0


def main() -> int:
    return run(sys.stdin.read())


if __name__ == "__main__":
    sys.exit(main())
