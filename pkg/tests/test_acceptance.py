"""Acceptance suite: one test per gate criterion, each printing a PASS/FAIL
line. Everything runs against the mock backend with no network access."""

from __future__ import annotations

import functools
import json
import math
import random
import time
from pathlib import Path

import pytest
from oracles import kappa_permutation_oracle, levenshtein_oracle
from test_evalbench import bench_backend, make_bench_corpus

from hintgen.corpus import load_corpus, resolve_corpus_path
from hintgen.evalbench import (
    HintRating,
    RepairMetrics,
    aggregate_hgood,
    cohens_kappa,
    recompute_redit_from_store,
    run_benchmark,
)
from hintgen.gateway import (
    Completion,
    MockBackend,
    MockScript,
    Pricing,
    PricingTable,
    SamplingParams,
    cost_of,
    generate,
)
from hintgen.pipeline import PipelineConfig, run_feedback, stable_view
from hintgen.sandbox import CaseStatus, ExecutionRequest, Limits
from hintgen.synthgen import assemble_instances, export_jsonl, sample_tuples
from hintgen.tokens import (
    Token,
    TokenKind,
    TokenStream,
    dump_tokens,
    source_edit_distance,
    token_edit_distance,
)
from test_synthgen import make_tuple

GOLDEN_LEXER_DIR = Path(__file__).parent / "golden" / "lexer"
GOLDEN_BUNDLE = Path(__file__).parent / "golden" / "feedback_bundle_demo.json"
DEMO_SCRIPT = (
    Path(__file__).resolve().parents[1] / "src" / "hintgen" / "data" / "mockscripts" / "demo.json"
)


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"[ACCEPTANCE] {name}: PASS")

        return wrapper

    return decorate


_ALPHABET = [
    (TokenKind.NAME, "x"),
    (TokenKind.NAME, "y"),
    (TokenKind.OP, "="),
    (TokenKind.OP, "+"),
    (TokenKind.NUMBER, "1"),
    (TokenKind.NEWLINE, ""),
]


def _stream(pairs) -> TokenStream:
    return TokenStream(
        tuple(Token(k, t, 1, i) for i, (k, t) in enumerate(pairs)), False
    )


@criterion("edit-distance oracle (>=500 cases, exact, <10s)")
def test_edit_distance_oracle():
    rng = random.Random(424242)
    started = time.monotonic()
    checked = 0
    while checked < 500:
        a = tuple(rng.choice(_ALPHABET) for _ in range(rng.randint(0, 6)))
        b = tuple(rng.choice(_ALPHABET) for _ in range(rng.randint(0, 6)))
        assert token_edit_distance(_stream(a), _stream(b)) == levenshtein_oracle(a, b)
        checked += 1
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"oracle comparison took {elapsed:.1f}s"


@criterion("lexer conformance (20-program golden corpus, byte-exact)")
def test_lexer_golden_corpus():
    sources = sorted(GOLDEN_LEXER_DIR.glob("p*.py"))
    assert len(sources) == 20
    for source in sources:
        golden = source.with_suffix(".tokens").read_bytes()
        assert dump_tokens(source.read_text()).encode() == golden, source.name


@criterion("lexer: comment/whitespace edits yield distance 0")
def test_comment_whitespace_edits_free():
    base = "def f(a, b):\n    total = a + b\n    return total\n"
    commented = "def f(a, b):  # adds two numbers\n    total = a + b\n    # done\n    return total\n"
    respaced = "def f(a,b):\n    total=a+b\n    return   total\n"
    assert source_edit_distance(base, commented) == 0
    assert source_edit_distance(base, respaced) == 0


@pytest.fixture(scope="module")
def demo_setup():
    corpus = load_corpus(resolve_corpus_path("intro-basics"))
    backend = MockBackend(MockScript.from_json_file(DEMO_SCRIPT))
    return corpus, backend


@criterion("repair selection: distances {7,3,9} -> 3 selected")
def test_repair_selection_minimum_distance(demo_setup, executor):
    corpus, backend = demo_setup
    task = corpus.task_by_id("duplicate-elimination")
    bug = corpus.bug_by_id("duplicate-elimination-inverted")
    bundle = run_feedback(task, bug, PipelineConfig(n_r=5), backend, executor)
    passing = sorted(
        c.edit_distance for c in bundle.repair.candidates if c.passed
    )
    assert passing == [3, 7, 9]
    assert bundle.repair.selected.edit_distance == 3


@criterion("repair selection: all-failing -> empty repair, hint still generated")
def test_empty_repair_still_hints(demo_setup, executor):
    corpus, backend = demo_setup
    task = corpus.task_by_id("top-k")
    bug = corpus.bug_by_id("top-k-forgot-reverse")
    bundle = run_feedback(task, bug, PipelineConfig(n_r=3), backend, executor)
    assert bundle.repair.empty
    assert bundle.repair.selected is None
    assert bundle.hint.strip()


@criterion("repair selection: deterministic golden bundle (latency excluded)")
def test_golden_feedback_bundle(demo_setup, executor):
    corpus, backend = demo_setup
    task = corpus.task_by_id("duplicate-elimination")
    bug = corpus.bug_by_id("duplicate-elimination-inverted")
    bundle = run_feedback(task, bug, PipelineConfig(n_r=5), backend, executor)
    got = json.dumps(stable_view(bundle.to_json_dict()), sort_keys=True, indent=2) + "\n"
    assert got == GOLDEN_BUNDLE.read_text()


@criterion("metric arithmetic: 3 of 5 repairs -> RPass 60%")
def test_rpass_sixty(executor, tmp_path):
    corpus = make_bench_corpus()
    result = run_benchmark(
        corpus, PipelineConfig(n_r=2), bench_backend(), executor, runs=2, out_dir=tmp_path
    )
    assert result.metrics.per_run_rpass == (60.0, 60.0)
    assert result.metrics.rpass_stderr == 0.0


@criterion("metric arithmetic: runs {60,80} -> mean 70, stderr 10 (1e-9)")
def test_mean_stderr_hand_example():
    metrics = RepairMetrics.from_runs([60.0, 80.0], [None, None])
    assert abs(metrics.rpass_mean - 70.0) <= 1e-9
    assert abs(metrics.rpass_stderr - 10.0) <= 1e-9


@criterion("metric arithmetic: REdit recomputation from stored sources exact")
def test_redit_recomputation(executor, tmp_path):
    corpus = make_bench_corpus()
    run_benchmark(
        corpus, PipelineConfig(n_r=2), bench_backend(), executor, runs=1, out_dir=tmp_path
    )
    recomputed = recompute_redit_from_store(tmp_path, corpus)
    assert recomputed
    for name, entry in recomputed.items():
        assert entry["stored"] == entry["recomputed"], name


@criterion("HGood AND-semantics: one zero attribute -> 75%")
def test_hgood_and_semantics():
    ratings = [
        HintRating("i1", "r1", 1, 1, 1, 1),
        HintRating("i2", "r1", 1, 1, 1, 1),
        HintRating("i3", "r1", 1, 1, 0, 1),
        HintRating("i4", "r1", 1, 1, 1, 1),
    ]
    assert aggregate_hgood(ratings)["hgood_pct"] == 75.0


@criterion("Cohen's kappa: (20,5,10,15) -> 0.4 exactly; perfect -> 1.0")
def test_kappa_exact_values():
    pairs = [(1, 1)] * 20 + [(1, 0)] * 5 + [(0, 1)] * 10 + [(0, 0)] * 15
    report = cohens_kappa(pairs)
    assert report.kappa == pytest.approx(0.4, abs=1e-12)
    assert report.kappa == pytest.approx(kappa_permutation_oracle(pairs), abs=1e-12)
    perfect = cohens_kappa([(1, 1)] * 6 + [(0, 0)] * 4)
    assert perfect.kappa == pytest.approx(1.0, abs=1e-12)


@criterion("Cohen's kappa: random balanced n=10^4 -> |kappa| < 0.05")
def test_kappa_random_balanced():
    rng = random.Random(90210)
    pairs = [(rng.randint(0, 1), rng.randint(0, 1)) for _ in range(10_000)]
    assert abs(cohens_kappa(pairs).kappa) < 0.05


@criterion("synthgen accounting: instances = 4 x valid tuples; 826 -> 3304")
def test_synthgen_accounting(tmp_path):
    tuples = [make_tuple(i) for i in range(826)]
    instances = assemble_instances(tuples)
    assert len(instances) == 3304
    manifest = export_jsonl(instances, tmp_path / "basic.jsonl")
    assert manifest["total_instances"] == 3304
    assert manifest["total_tuples"] == 826
    assert sum(manifest["per_type"].values()) == 3304
    assert set(manifest["per_type"].values()) == {826}


@criterion("synthgen: invalid-repair tuples filtered before assembly")
def test_invalid_tuples_filtered(intro_corpus, executor):
    from hintgen.gateway import MockRule
    from hintgen.synthgen import generate_tuples, valid_tuples
    from test_synthgen import GOOD_FIX, BAD_FIX

    bug = intro_corpus.bug_by_id("duplicate-elimination-inverted")
    task = intro_corpus.task_by_id(bug.task_id)

    def response(fix):
        return f"```python\n{fix}```\nEXPLANATION: inverted check\nHINT: when to append?"

    rules = tuple(
        MockRule(
            pattern="Do three things",
            sample_index=i,
            response=response(GOOD_FIX if i != 2 else BAD_FIX),
        )
        for i in range(5)
    )
    teacher = MockBackend(MockScript(rules=rules))
    tuples = generate_tuples(bug, task, teacher, executor, max_tuples=5)
    usable = valid_tuples(tuples)
    assert len(tuples) == 5
    assert len(usable) == 4
    assert len(assemble_instances(usable)) == 16


@criterion("synthgen: exported target repairs re-pass their suites")
def test_exported_repairs_revalidated(intro_corpus, executor, tmp_path):
    tuples = [make_tuple(i) for i in range(3)]
    manifest = export_jsonl(
        assemble_instances(tuples), tmp_path / "out.jsonl",
        corpus=intro_corpus, executor=executor,
    )
    assert manifest["total_instances"] == 12


@criterion("synthgen: percent 50 halves tuples deterministically")
def test_percent_sampling(tmp_path):
    tuples = [make_tuple(i) for i in range(10)]
    half_a = sample_tuples(tuples, 50, seed=13)
    half_b = sample_tuples(tuples, 50, seed=13)
    assert len(half_a) == math.ceil(0.5 * len(tuples))
    assert [t.id for t in half_a] == [t.id for t in half_b]
    manifest = export_jsonl(assemble_instances(half_a), tmp_path / "half.jsonl")
    assert manifest["total_tuples"] == 5


def _case(i, args, expected, timeout_ms=2000):
    from hintgen.corpus import TestCase

    return TestCase(id=f"c{i}", args=tuple(args), expected=expected, timeout_ms=timeout_ms)


@criterion("sandbox: infinite loop times out within limit + 1s")
def test_sandbox_timeout_bound(executor):
    limits = Limits(wall_timeout_ms=500, total_timeout_ms=4000)
    started = time.monotonic()
    verdict = executor.run_suite(
        ExecutionRequest(
            program="def f(x):\n    while True:\n        pass\n",
            entry_function="f",
            cases=[_case(1, [1], 1, timeout_ms=500)],
            limits=limits,
        )
    )
    elapsed = time.monotonic() - started
    assert verdict.results[0].status == CaseStatus.TIMEOUT
    assert elapsed <= 0.5 + 1.0, f"took {elapsed:.2f}s"


@criterion("sandbox: unbounded print truncated, verdict still produced")
def test_sandbox_output_truncation(executor):
    limits = Limits(wall_timeout_ms=5000, total_timeout_ms=20000, max_output_bytes=2048)
    verdict = executor.run_suite(
        ExecutionRequest(
            program=(
                "def f(x):\n"
                "    for _ in range(100000):\n"
                "        print('y' * 50)\n"
                "    return x\n"
            ),
            entry_function="f",
            cases=[_case(1, [1], 1, timeout_ms=5000)],
            limits=limits,
        )
    )
    result = verdict.results[0]
    assert result.status == CaseStatus.PASS
    assert "[output truncated]" in result.stderr_excerpt


@criterion("sandbox: import-time crash -> per-case error statuses")
def test_sandbox_import_crash(executor):
    verdict = executor.run_suite(
        ExecutionRequest(
            program="raise ValueError('dead on arrival')\n",
            entry_function="f",
            cases=[_case(1, [1], 1), _case(2, [2], 2), _case(3, [3], 3)],
        )
    )
    assert [r.status for r in verdict.results] == [CaseStatus.ERROR] * 3
    assert all("dead on arrival" in r.stderr_excerpt for r in verdict.results)


@criterion("sandbox: filesystem escape attempt has no effect outside temp dir")
def test_sandbox_filesystem_escape(executor, tmp_path):
    probe = tmp_path / "probe.txt"
    verdict = executor.run_suite(
        ExecutionRequest(
            program=(
                "import os\n"
                "def f(x):\n"
                "    open('inside.txt', 'w').write('in')\n"
                "    open(os.path.join('..', 'up.txt'), 'w').write('up')\n"
                "    return x\n"
            ),
            entry_function="f",
            cases=[_case(1, [1], 1)],
        )
    )
    assert verdict.all_passed
    assert not probe.exists()
    assert not Path("inside.txt").exists()
    assert not Path("up.txt").exists()
    leftovers = list(Path("/tmp").glob("hintgen-sbx-*"))
    assert not leftovers, f"sandbox temp dirs not cleaned: {leftovers}"


@criterion("cost accounting: 1000/500 tokens at 10/30 USD per 1M -> 0.025 exactly")
def test_cost_exact():
    pricing = PricingTable({"backend": Pricing(10.0, 30.0)})
    completion = Completion(
        text="t", prompt_tokens=1000, completion_tokens=500, latency_ms=1, backend_id="backend"
    )
    assert cost_of([completion], pricing) == 0.025


@criterion("cost accounting: mock backend costs 0")
def test_cost_mock_zero():
    backend = MockBackend()
    batch = generate(
        backend, [{"role": "user", "content": "anything"}], SamplingParams(n=4)
    )
    assert cost_of(batch.completions, PricingTable.zero("mock")) == 0.0
