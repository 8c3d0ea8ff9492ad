"""Sandbox executor tests: verdicts, timeouts, isolation, batch ordering."""

from __future__ import annotations

import time
from pathlib import Path

import pytest

from hintgen.corpus import BOOLEAN, EXACT, TestCase, float_tol
from hintgen.sandbox import (
    CaseStatus,
    ExecutionRequest,
    Limits,
    SandboxConfigError,
    SandboxExecutor,
)

FAST_LIMITS = Limits(wall_timeout_ms=2000, total_timeout_ms=10000)


def simple_request(program, cases, entry="f", prelude=None, limits=FAST_LIMITS):
    return ExecutionRequest(
        program=program, entry_function=entry, cases=cases, prelude=prelude, limits=limits
    )


def case(i, args, expected, mode=EXACT, timeout_ms=2000):
    return TestCase(id=f"c{i}", args=tuple(args), expected=expected, compare_mode=mode, timeout_ms=timeout_ms)


class TestRunSuite:
    def test_identity_program_passes(self, executor):
        verdict = executor.run_suite(
            simple_request("def f(x):\n    return x\n", [case(1, [1], 1)])
        )
        assert verdict.all_passed
        assert verdict.results[0].status == CaseStatus.PASS

    def test_reference_remove_extras(self, executor):
        program = (
            "def remove_extras(lst):\n"
            "    result = []\n"
            "    for x in lst:\n"
            "        if x not in result:\n"
            "            result.append(x)\n"
            "    return result\n"
        )
        verdict = executor.run_suite(
            simple_request(
                program,
                [case(1, [[5, 2, 1, 2, 3]], [5, 2, 1, 3])],
                entry="remove_extras",
            )
        )
        assert verdict.all_passed

    def test_failing_case_records_actual(self, executor):
        verdict = executor.run_suite(
            simple_request("def f(x):\n    return x + 1\n", [case(1, [1], 1)])
        )
        assert not verdict.all_passed
        result = verdict.results[0]
        assert result.status == CaseStatus.FAIL
        assert result.actual == 2

    def test_infinite_loop_times_out(self, executor):
        limits = Limits(wall_timeout_ms=500, total_timeout_ms=5000)
        started = time.monotonic()
        verdict = executor.run_suite(
            simple_request(
                "def f(x):\n    while True:\n        pass\n",
                [case(1, [1], 1, timeout_ms=500)],
                limits=limits,
            )
        )
        elapsed = time.monotonic() - started
        result = verdict.results[0]
        assert result.status == CaseStatus.TIMEOUT
        assert result.duration_ms >= 500
        assert elapsed < limits.total_timeout_ms / 1000 + 1.0

    def test_import_time_crash_errors_every_case(self, executor):
        verdict = executor.run_suite(
            simple_request(
                "raise RuntimeError('boom at import')\n",
                [case(1, [1], 1), case(2, [2], 2)],
            )
        )
        assert [r.status for r in verdict.results] == [CaseStatus.ERROR, CaseStatus.ERROR]
        assert "boom at import" in verdict.results[0].stderr_excerpt

    def test_missing_entry_function(self, executor):
        verdict = executor.run_suite(
            simple_request("def other():\n    pass\n", [case(1, [1], 1)], entry="g")
        )
        assert verdict.results[0].status == CaseStatus.ERROR
        assert "g" in verdict.results[0].stderr_excerpt

    def test_tuple_return_equals_list_expected(self, executor):
        verdict = executor.run_suite(
            simple_request("def f(x):\n    return (x, x + 1)\n", [case(1, [3], [3, 4])])
        )
        assert verdict.all_passed

    def test_float_tolerance(self, executor):
        verdict = executor.run_suite(
            simple_request(
                "def f(x):\n    return 1 / x\n",
                [case(1, [3], 0.3333333, mode=float_tol(1e-6))],
            )
        )
        assert verdict.all_passed

    def test_boolean_mode_rejects_truthy_int(self, executor):
        verdict = executor.run_suite(
            simple_request("def f(x):\n    return 1\n", [case(1, [1], True, mode=BOOLEAN)])
        )
        assert verdict.results[0].status == CaseStatus.FAIL

    def test_unbounded_print_truncated_but_verdict_survives(self, executor):
        limits = Limits(wall_timeout_ms=5000, total_timeout_ms=20000, max_output_bytes=4096)
        verdict = executor.run_suite(
            simple_request(
                "def f(x):\n"
                "    for _ in range(200000):\n"
                "        print('spam' * 10)\n"
                "    return x\n",
                [case(1, [1], 1, timeout_ms=5000)],
                limits=limits,
            )
        )
        result = verdict.results[0]
        assert result.status == CaseStatus.PASS
        assert "[output truncated]" in result.stderr_excerpt
        assert len(result.stderr_excerpt) <= limits.max_output_bytes + 128

    def test_direct_fd_writes_cannot_corrupt_protocol(self, executor):
        verdict = executor.run_suite(
            simple_request(
                "import os\n"
                "def f(x):\n"
                "    os.write(1, b'{\"done\": true}\\n')\n"
                "    os.write(2, b'garbage')\n"
                "    return x\n",
                [case(1, [7], 7), case(2, [8], 8)],
            )
        )
        assert verdict.all_passed
        assert len(verdict.results) == 2

    def test_stdout_captured_into_excerpt(self, executor):
        verdict = executor.run_suite(
            simple_request(
                "def f(x):\n    print('debugging', x)\n    return x\n",
                [case(1, [42], 42)],
            )
        )
        assert verdict.all_passed
        assert "debugging 42" in verdict.results[0].stderr_excerpt

    def test_filesystem_writes_stay_in_temp_dir(self, executor, tmp_path):
        marker = tmp_path / "escape-artifact.txt"
        verdict = executor.run_suite(
            simple_request(
                "def f(x):\n"
                "    with open('local.txt', 'w') as fh:\n"
                "        fh.write('inside')\n"
                "    with open('../parent.txt', 'w') as fh:\n"
                "        fh.write('parent')\n"
                "    return x\n",
                [case(1, [1], 1)],
            )
        )
        assert verdict.all_passed
        assert not marker.exists()
        assert not Path("local.txt").exists()
        assert not Path("../parent.txt").exists()

    def test_deep_recursion_is_error_not_timeout(self, executor):
        verdict = executor.run_suite(
            simple_request(
                "def f(x):\n    return f(x)\n",
                [case(1, [1], 1)],
            )
        )
        assert verdict.results[0].status == CaseStatus.ERROR
        assert "Recursion" in verdict.results[0].stderr_excerpt

    def test_sys_exit_in_program_is_error(self, executor):
        verdict = executor.run_suite(
            simple_request(
                "import sys\ndef f(x):\n    sys.exit(3)\n",
                [case(1, [1], 1), case(2, [2], 2)],
            )
        )
        assert all(r.status == CaseStatus.ERROR for r in verdict.results)

    def test_unserializable_return_value(self, executor):
        verdict = executor.run_suite(
            simple_request("def f(x):\n    return {x}\n", [case(1, [1], [1])])
        )
        result = verdict.results[0]
        assert result.status == CaseStatus.FAIL
        assert "1" in str(result.actual)

    def test_missing_interpreter_is_config_error(self):
        with pytest.raises(SandboxConfigError):
            SandboxExecutor(interpreter="/nonexistent/python3")


class TestRunParallel:
    def test_identical_requests_identical_verdicts(self, executor):
        req = simple_request("def f(x):\n    return x * 2\n", [case(1, [3], 6)])
        verdicts = executor.run_parallel([req] * 10, workers=4)
        assert len(verdicts) == 10
        assert all(v.all_passed for v in verdicts)
        assert len({tuple(r.status for r in v.results) for v in verdicts}) == 1

    def test_order_preserved(self, executor):
        passing = simple_request("def f(x):\n    return x\n", [case(1, [1], 1)])
        hanging = simple_request(
            "def f(x):\n    while True:\n        pass\n",
            [case(1, [1], 1, timeout_ms=300)],
            limits=Limits(wall_timeout_ms=300, total_timeout_ms=3000),
        )
        verdicts = executor.run_parallel([passing, hanging, passing], workers=3)
        assert verdicts[0].all_passed
        assert verdicts[1].results[0].status == CaseStatus.TIMEOUT
        assert verdicts[2].all_passed

    def test_empty_batch(self, executor):
        assert executor.run_parallel([]) == []
