"""Synthetic data tests: bug generation filters, tuple validity, assembly
accounting, JSONL export, and deterministic subsampling."""

from __future__ import annotations

import json
import logging

import pytest

from hintgen.corpus import BuggyProgram, Origin, Split
from hintgen.gateway import MockBackend, MockRule, MockScript
from hintgen.synthgen import (
    FeedbackTuple,
    InstanceType,
    MistakeType,
    SynthError,
    assemble_instances,
    export_jsonl,
    generate_buggy_programs,
    generate_tuples,
    load_mistake_catalog,
    read_jsonl,
    sample_tuples,
    synthesize_dataset,
    valid_tuples,
)

GOOD_FIX = "def remove_extras(lst):\n    result = []\n    for x in lst:\n        if x not in result:\n            result.append(x)\n    return result\n"
BAD_FIX = "def remove_extras(lst):\n    return lst\n"


def make_tuple(i, valid=True, bug_id="bug-1", task_id="duplicate-elimination"):
    return FeedbackTuple(
        id=f"{bug_id}-t{i}",
        bug_id=bug_id,
        task_id=task_id,
        problem_description="Remove repeated elements, keeping first occurrences.",
        buggy_source="def remove_extras(lst):\n    return lst\n",
        failing_rendered="remove_extras([1, 1]) -> expected [1], got [1, 1]",
        repaired_source=GOOD_FIX,
        explanation="The function returns its input unchanged instead of filtering.",
        hint="What should happen when an element was already seen?",
        valid=valid,
    )


class TestMistakeCatalog:
    def test_default_catalog_has_eight_entries(self):
        catalog = load_mistake_catalog()
        assert len(catalog) == 8
        assert {m.id for m in catalog} >= {"syntax", "loop-range", "wrong-operator"}

    def test_empty_description_rejected(self):
        with pytest.raises(ValueError):
            MistakeType(id="x", description="")


class TestGenerateBuggyPrograms:
    def test_accidentally_correct_programs_filtered(self, intro_corpus, executor):
        task = intro_corpus.task_by_id("duplicate-elimination")
        mistake = MistakeType(id="loop-range", description="bad loop bounds")
        buggy1 = "def remove_extras(lst):\n    return lst\n"
        buggy2 = "def remove_extras(lst):\n    return lst[1:]\n"
        buggy3 = "def remove_extras(lst):\n    return []\n"
        blocks = "\n".join(
            f"```python\n{p}```" for p in (buggy1, GOOD_FIX, buggy2, GOOD_FIX, buggy3)
        )
        backend = MockBackend(
            MockScript(rules=(MockRule(pattern="buggy implementations", response=blocks),))
        )
        survivors = generate_buggy_programs(task, mistake, backend, executor)
        assert len(survivors) == 3
        assert all(b.origin == Origin.MODEL_GENERATED for b in survivors)
        assert all(b.split == Split.TRAINING for b in survivors)

    def test_prose_response_yields_zero_with_warning(self, intro_corpus, executor, caplog):
        task = intro_corpus.task_by_id("duplicate-elimination")
        mistake = MistakeType(id="syntax", description="syntax mistakes")
        backend = MockBackend(MockScript(rules=(), default_response="I would rather not."))
        with caplog.at_level(logging.WARNING):
            survivors = generate_buggy_programs(task, mistake, backend, executor)
        assert survivors == []
        assert any("syntax" in record.message for record in caplog.records)


class TestGenerateTuples:
    def _teacher(self, responses_by_index):
        rules = tuple(
            MockRule(pattern="Do three things", sample_index=i, response=resp)
            for i, resp in responses_by_index.items()
        )
        return MockBackend(MockScript(rules=rules, default_response="no labels"))

    @staticmethod
    def _response(fix):
        return (
            f"```python\n{fix}```\n"
            "EXPLANATION: the filter condition is missing entirely\n"
            "HINT: How does your function decide to keep an element?"
        )

    def test_four_of_five_valid(self, intro_corpus, executor):
        bug = intro_corpus.bug_by_id("duplicate-elimination-inverted")
        task = intro_corpus.task_by_id(bug.task_id)
        teacher = self._teacher(
            {
                0: self._response(GOOD_FIX),
                1: self._response(GOOD_FIX),
                2: self._response(BAD_FIX),  # parses but fails the suite
                3: self._response(GOOD_FIX),
                4: self._response(GOOD_FIX),
            }
        )
        tuples = generate_tuples(bug, task, teacher, executor, max_tuples=5)
        assert len(tuples) == 5
        assert len(valid_tuples(tuples)) == 4

    def test_unparseable_responses_skipped(self, intro_corpus, executor):
        bug = intro_corpus.bug_by_id("duplicate-elimination-inverted")
        task = intro_corpus.task_by_id(bug.task_id)
        teacher = self._teacher({0: self._response(GOOD_FIX)})  # others: "no labels"
        tuples = generate_tuples(bug, task, teacher, executor, max_tuples=3)
        assert len(tuples) == 1

    def test_max_tuples_cap(self, intro_corpus, executor):
        bug = intro_corpus.bug_by_id("duplicate-elimination-inverted")
        task = intro_corpus.task_by_id(bug.task_id)
        teacher = self._teacher({0: self._response(GOOD_FIX)})
        tuples = generate_tuples(bug, task, teacher, executor, max_tuples=1)
        assert len(tuples) == 1

    def test_zero_valid_contributes_nothing(self):
        assert valid_tuples([make_tuple(0, valid=False)]) == []


class TestAssembleInstances:
    def test_one_tuple_gives_one_of_each_type(self):
        instances = assemble_instances([make_tuple(0)])
        assert [i.instance_type for i in instances] == [
            InstanceType.REPAIR,
            InstanceType.EXPLANATION,
            InstanceType.HINT,
            InstanceType.FULL_CHAIN,
        ]
        assert all(i.source_tuple_id == "bug-1-t0" for i in instances)

    def test_zero_tuples(self):
        assert assemble_instances([]) == []

    def test_invalid_tuple_rejected(self):
        with pytest.raises(SynthError, match="invalid"):
            assemble_instances([make_tuple(0, valid=False)])

    def test_accounting_rule_four_per_tuple(self):
        tuples = [make_tuple(i) for i in range(7)]
        assert len(assemble_instances(tuples)) == 28

    def test_inference_format_match(self):
        instances = assemble_instances([make_tuple(0)])
        repair = instances[0]
        assert "Fix the program while making as few changes as possible" in repair.messages[1]["content"]
        assert repair.messages[2]["content"].startswith("```python\n")
        full_chain = instances[3]
        assert "EXPLANATION:" in full_chain.messages[2]["content"]
        assert "HINT:" in full_chain.messages[2]["content"]

    def test_targets_carry_tuple_content(self):
        instances = assemble_instances([make_tuple(0)])
        by_type = {i.instance_type: i for i in instances}
        assert "already seen" in by_type[InstanceType.HINT].messages[2]["content"]
        assert "unchanged" in by_type[InstanceType.EXPLANATION].messages[2]["content"]


class TestExportJsonl:
    def test_four_instances_four_lines_and_manifest(self, tmp_path):
        instances = assemble_instances([make_tuple(0)])
        out = tmp_path / "train.jsonl"
        manifest = export_jsonl(instances, out)
        assert manifest["per_type"] == {
            "repair": 1,
            "explanation": 1,
            "hint": 1,
            "full_chain": 1,
        }
        assert len(out.read_text().splitlines()) == 4
        assert json.loads((tmp_path / "train.jsonl.manifest.json").read_text()) == manifest

    def test_round_trip(self, tmp_path):
        instances = assemble_instances([make_tuple(i) for i in range(3)])
        out = tmp_path / "train.jsonl"
        export_jsonl(instances, out)
        rows = read_jsonl(out)
        assert len(rows) == len(instances)
        for row, instance in zip(rows, instances):
            assert row == instance.to_json_dict()

    def test_manifest_totals_are_4x_tuples(self, tmp_path):
        tuples = [make_tuple(i) for i in range(9)]
        manifest = export_jsonl(assemble_instances(tuples), tmp_path / "t.jsonl")
        assert manifest["total_instances"] == 4 * len(tuples)
        assert manifest["total_tuples"] == len(tuples)

    def test_exported_repairs_revalidated(self, intro_corpus, executor, tmp_path):
        instances = assemble_instances([make_tuple(0)])
        manifest = export_jsonl(
            instances, tmp_path / "t.jsonl", corpus=intro_corpus, executor=executor
        )
        assert manifest["total_instances"] == 4

    def test_broken_target_repair_fails_export(self, intro_corpus, executor, tmp_path):
        broken = FeedbackTuple(
            id="bug-1-t0",
            bug_id="bug-1",
            task_id="duplicate-elimination",
            problem_description="d",
            buggy_source="def remove_extras(lst):\n    return lst\n",
            failing_rendered="f",
            repaired_source=BAD_FIX,
            explanation="e",
            hint="h",
            valid=True,  # wrongly marked valid: export must catch it
        )
        with pytest.raises(SynthError, match="no longer passes"):
            export_jsonl(
                assemble_instances([broken]), tmp_path / "t.jsonl",
                corpus=intro_corpus, executor=executor,
            )

    def test_eval_split_leakage_blocked(self, intro_corpus, executor, tmp_path):
        leaked = make_tuple(0, bug_id="duplicate-elimination-inverted")
        with pytest.raises(SynthError, match="leaked"):
            export_jsonl(
                assemble_instances([leaked]), tmp_path / "t.jsonl", corpus=intro_corpus
            )


class TestSampleTuples:
    def test_half_percent_ceils(self):
        tuples = [make_tuple(i) for i in range(5)]
        assert len(sample_tuples(tuples, 50)) == 3  # ceil(2.5)

    def test_deterministic_for_fixed_seed(self):
        tuples = [make_tuple(i) for i in range(20)]
        first = [t.id for t in sample_tuples(tuples, 30, seed=7)]
        second = [t.id for t in sample_tuples(tuples, 30, seed=7)]
        assert first == second

    def test_original_order_preserved(self):
        tuples = [make_tuple(i) for i in range(20)]
        chosen = sample_tuples(tuples, 40, seed=3)
        ids = [t.id for t in chosen]
        assert ids == sorted(ids, key=lambda s: int(s.rsplit("t", 1)[1]))

    def test_hundred_percent_identity(self):
        tuples = [make_tuple(i) for i in range(4)]
        assert sample_tuples(tuples, 100) == tuples


class TestSynthesizeDataset:
    def test_end_to_end_with_mock_teacher(self, intro_corpus, executor, tmp_path):
        response = (
            f"```python\n{GOOD_FIX}```\n"
            "EXPLANATION: the condition is inverted\n"
            "HINT: When should an element be appended?"
        )
        teacher = MockBackend(
            MockScript(
                rules=(MockRule(pattern="remove_extras.*Do three things", response=response),),
                default_response="no code here",
            )
        )
        # restrict to one task's bugs to keep runtime small
        from hintgen.corpus import Corpus

        small = Corpus(
            name=intro_corpus.name,
            tasks=intro_corpus.tasks,
            bugs=tuple(
                b for b in intro_corpus.bugs if b.task_id == "duplicate-elimination"
            ),
        )
        report = synthesize_dataset(
            small, teacher, executor, tmp_path / "train.jsonl",
            generate_synthetic_bugs=False, max_tuples=2,
        )
        assert report.tuples_valid > 0
        assert report.instances == 4 * report.tuples_exported
        assert (tmp_path / "train.jsonl").exists()
        assert report.manifest["total_instances"] == report.instances
