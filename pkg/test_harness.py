#!/usr/bin/env python3
"""
Test suite for the verification harness
Validates corpus loading, result rows and the duckdb summary
"""

from dataclasses import replace

import pytest

from harness import COLUMNS, CORPUS_CASES, Harness, HarnessConfig, load_case
from interpreter import run
from outcome import Success

TINY = HarnessConfig(
    seeds=2,
    corpus_seeds=2,
    random_graphs=2,
    closure_graphs=2,
    exhaustive_nodes=1,
    cycle_graphs=2,
    sp_graphs=2,
    sp_max_edges=4,
    mutants=1,
    confluence_max_edges=4,
    fuel=500,
)


class TestLoadCase:
    """Test corpus loading"""

    @pytest.mark.parametrize("name", CORPUS_CASES)
    def test_every_input_has_an_expectation(self, name):
        case = load_case(name)
        assert case.inputs, f"{name} has no inputs"
        assert set(case.inputs) == set(case.expected)
        for expected in case.expected.values():
            assert expected["outcome"] in ("success", "fail", "diverge", "crash")

    def test_transclosure_case(self):
        case = load_case("transclosure")
        assert set(case.inputs) == {"cycle4", "dag4", "path3"}
        assert case.expected["cycle4"]["applications"] == 8
        text, graph = case.inputs["path3"]
        assert text.startswith("node a empty\n")
        assert len(graph.edges) == 2

    def test_variant(self):
        case = load_case("cyclecheck")
        _, graph = case.inputs["dag3"]
        result = run(case.variant("P"), graph)
        assert isinstance(result.outcome, Success)
        assert len(result.outcome.graph.nodes) == 4


class TestResults:
    """Test result rows and reporting"""

    def test_record_and_failures(self):
        harness = Harness(TINY)
        harness.record("demo", "holds", "a", True)
        harness.record("demo", "holds", "b", False, "broken")
        assert not harness.all_passed
        failures = harness.failures()
        assert list(failures["input"]) == ["b"]
        assert list(harness.results().columns) == COLUMNS

    def test_summary(self):
        harness = Harness(TINY)
        harness.record("demo", "holds", "a", True)
        harness.record("demo", "holds", "b", False)
        harness.record("demo", "other", "a", True)
        summary = harness.summary()
        assert list(summary.columns) == ["case_name", "check_name", "inputs", "passed", "failed", "skipped"]
        holds = summary[summary["check_name"] == "holds"].iloc[0]
        assert (int(holds["inputs"]), int(holds["passed"]), int(holds["failed"]), int(holds["skipped"])) == (2, 1, 1, 0)

    def test_skipped_rows(self):
        """Skipped inputs neither pass nor fail"""
        harness = Harness(TINY)
        harness.record("demo", "holds", "a", True)
        harness.record("demo", "holds", "b", True, "too big", skipped=True)
        assert harness.all_passed
        holds = harness.summary().iloc[0]
        assert (int(holds["passed"]), int(holds["failed"]), int(holds["skipped"])) == (1, 0, 1)

    def test_explore_or_skip(self):
        harness = Harness(replace(TINY, sample_branch_cap=1))
        case = load_case("transclosure")
        _, graph = case.inputs["cycle4"]
        assert harness.explore_or_skip("transclosure", "demo", "cycle4", case.program, graph) is None
        (row,) = harness.rows
        assert row["skipped"] and row["passed"]
        assert row["detail"].startswith("skipped:")

    def test_log_messages(self):
        messages = []
        harness = Harness(TINY, log=messages.append)
        harness.verify("condrule")
        assert any("condrule" in m for m in messages)


class TestVerify:
    """Run small versions of the claim checks"""

    @pytest.mark.parametrize("name", ["condrule", "transclosure", "cyclecheck", "seriesparallel", "colouring"])
    def test_case_passes(self, name):
        harness = Harness(TINY)
        results = harness.verify(name)
        failed = results[~results["passed"]]
        assert failed.empty, failed.to_string()
        assert set(results["case_name"]) == {name}

    def test_transclosure_counts_every_execution(self):
        results = Harness(TINY).verify("transclosure")
        row = results[results["check_name"] == "every execution uses 8 applications"].iloc[0]
        assert row["passed"] and row["detail"] == "applications [8]"
        assert "every execution uses <= |V|^2 applications" in set(results["check_name"])

    def test_colouring_checks_colour_sum(self):
        results = Harness(TINY).verify("colouring")
        sums = results[results["check_name"] == "colour sum rises by one per inc"]
        assert len(sums) == TINY.random_graphs
        assert sums["passed"].all()
        assert "every outcome is a colouring of 1..k" in set(results["check_name"])

    def test_laws(self):
        harness = Harness(TINY)
        results = harness.verify("laws")
        assert harness.all_passed, results[~results["passed"]].to_string()
        assert "inlining keeps outcomes" in set(results["check_name"])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
