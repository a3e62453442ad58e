"""
Verification harness
Runs the corpus programs against their claims and oracles, one result row per (case, check, input)
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import duckdb
import pandas as pd

from case_studies import (
    all_digraphs,
    bridge_graph,
    check_colouring,
    colour_sum,
    colours_set,
    complete_digraph,
    cycle_graph,
    gen_series_parallel,
    join_series_overlap,
    nonedge_count,
    normal_forms,
    oracle_is_cyclic,
    oracle_transitive_closure,
    random_host_graph,
    with_isolated_node,
)
from elaborate import elaborate
from gp_syntax import format_program, load_program, parse_program, with_main
from host_format import format_host_graph, parse_host_graph
from host_graph import EMPTY_KEY, build_graph, canonical_key, indegree, isomorphic
from interpreter import DEFAULT_BRANCH_CAP, DEFAULT_FUEL, ExecConfig, StateSpaceLimit, outcomes, run
from outcome import Success
from rules import find_matches

CORPUS_DIR = Path(__file__).resolve().parent / "corpus"
CORPUS_CASES = ("transclosure", "colouring", "cyclecheck", "seriesparallel", "condrule")
VERIFY_CASES = ("transclosure", "colouring", "cyclecheck", "seriesparallel", "condrule", "laws")
COLUMNS = ["case_name", "check_name", "input", "passed", "skipped", "detail"]

SUMMARY_SQL = """
SELECT
    case_name,
    check_name,
    COUNT(*) AS inputs,
    SUM(CASE WHEN passed AND NOT skipped THEN 1 ELSE 0 END) AS passed,
    SUM(CASE WHEN passed THEN 0 ELSE 1 END) AS failed,
    SUM(CASE WHEN skipped THEN 1 ELSE 0 END) AS skipped
FROM
    results
GROUP BY
    case_name, check_name
ORDER BY
    case_name, check_name
"""


@dataclass(frozen=True)
class HarnessConfig:
    """Sizes of the property checks; the defaults are the full acceptance runs"""

    seed: int = 0
    seeds: int = 100
    corpus_seeds: int = 10
    random_graphs: int = 200
    closure_graphs: int = 100
    exhaustive_nodes: int = 3
    cycle_graphs: int = 100
    sp_graphs: int = 100
    sp_max_edges: int = 12
    mutants: int = 20
    confluence_max_edges: int = 8
    fuel: int = DEFAULT_FUEL
    branch_cap: int = DEFAULT_BRANCH_CAP
    # state cap when enumerating every execution on a random graph; larger graphs are skipped
    sample_branch_cap: int = 5000


@dataclass
class CaseProgram:
    name: str
    ast: object
    program: object
    inputs: dict  # input name -> (file text, HostGraph)
    expected: dict  # input name -> expectation dict

    def variant(self, command):
        """Same declarations, different Main"""
        return elaborate(with_main(self.ast, command))


def load_case(name, corpus_dir=CORPUS_DIR):
    """Load corpus/<name>: program, input graphs and expected outcomes"""
    case_dir = Path(corpus_dir) / name
    program_path = case_dir / "program.gp"
    ast = load_program(program_path)
    program = elaborate(ast, path=str(program_path))

    inputs = {}
    for path in sorted((case_dir / "inputs").glob("*.host")):
        text = path.read_text(encoding="utf-8")
        inputs[path.stem] = (text, parse_host_graph(text, path=str(path)))

    expected = {}
    for path in sorted((case_dir / "expected").glob("*.json")):
        with open(path, "r", encoding="utf-8") as f:
            expected[path.stem] = json.load(f)
    return CaseProgram(name, ast, program, inputs, expected)


def _size(graph):
    return len(graph.nodes) + len(graph.edges)


def _is_prefix_of_naturals(values, limit):
    return bool(values) and values == set(range(1, max(values) + 1)) and max(values) <= limit


def _extends(before, after):
    """Every node and edge of before is in after under the same id, label and endpoints"""
    return all(after.nodes.get(v) == label for v, label in before.nodes.items()) and all(
        after.edges.get(e) == edge for e, edge in before.edges.items()
    )


def _grows_by_at_most_max_plus_one(sets):
    """Each colour set equals the previous one, or the previous one plus its max + 1"""
    for before, after in zip(sets, sets[1:]):
        if after != before and after != before | {max(before) + 1}:
            return False
    return True


class Harness:
    """Collects check results into a DataFrame and summarises them with SQL"""

    def __init__(self, config=None, corpus_dir=CORPUS_DIR, log=None):
        self.config = config or HarnessConfig()
        self.corpus_dir = corpus_dir
        self.log = log or (lambda msg: None)
        self.rows = []
        self._cases = {}

    def case(self, name):
        if name not in self._cases:
            self._cases[name] = load_case(name, self.corpus_dir)
        return self._cases[name]

    def record(self, case, check, item, passed, detail="", skipped=False):
        self.rows.append(
            {
                "case_name": case,
                "check_name": check,
                "input": item,
                "passed": bool(passed),
                "skipped": skipped,
                "detail": detail,
            }
        )
        return passed

    def exec_config(self, seed, trace=False):
        return ExecConfig(seed=seed, fuel=self.config.fuel, trace=trace, branch_cap=self.config.branch_cap)

    def explore(self, program, graph):
        return outcomes(program, graph, fuel=self.config.fuel, branch_cap=self.config.branch_cap)

    def explore_or_skip(self, case, check, item, program, graph):
        """Outcomes under the sample cap, or None after recording the input as skipped"""
        try:
            return outcomes(program, graph, fuel=self.config.fuel, branch_cap=self.config.sample_branch_cap)
        except StateSpaceLimit as e:
            self.log(f"⏭️  {case}/{check}: {item} skipped ({e})")
            self.record(case, check, item, True, f"skipped: {e}", skipped=True)
            return None

    # ---------- corpus files ----------

    def check_corpus(self, name):
        """Round-trips and expected outcomes for every input file of a case"""
        self.log(f"📂 Corpus: {name}")
        case = self.case(name)
        self.record(name, "program round-trip", "program.gp", parse_program(format_program(case.ast)) == case.ast)

        for item, (text, graph) in case.inputs.items():
            self.record(name, "host round-trip", item, format_host_graph(graph) == text)
            expected = case.expected.get(item)
            if expected is None:
                continue
            want = parse_host_graph(expected["result"]) if "result" in expected else None

            detail = ""
            for seed in range(self.config.corpus_seeds):
                result = run(case.program, graph, self.exec_config(seed))
                if result.outcome.kind != expected["outcome"]:
                    detail = f"seed {seed}: {result.outcome.kind}"
                elif want is not None and not isomorphic(result.outcome.graph, want):
                    detail = f"seed {seed}: unexpected result graph"
                elif "applications" in expected and result.steps != expected["applications"]:
                    detail = f"seed {seed}: {result.steps} applications"
                if detail:
                    break
            self.record(name, "seeded runs", item, not detail, detail)

            found = self.explore(case.program, graph)
            kinds = {c[0] for c in found.classes}
            passed = kinds == {expected["outcome"]}
            if want is not None:
                passed = passed and canonical_key(want) in found.successes
            if "classes" in expected:
                passed = passed and len(found.classes) == expected["classes"]
            if "min_classes" in expected:
                passed = passed and len(found.classes) >= expected["min_classes"]
            self.record(name, "enumerated outcomes", item, passed, f"{len(found.classes)} classes")

            sound = all(
                found.contains(run(case.program, graph, self.exec_config(seed)).outcome)
                for seed in range(self.config.corpus_seeds)
            )
            self.record(name, "runs within outcomes", item, sound)

    # ---------- transitive closure ----------

    def check_transclosure(self):
        cfg = self.config
        case = self.case("transclosure")
        self.log("🔗 Transitive closure")

        cycle, k4 = cycle_graph(4), complete_digraph(4)
        bad = [
            seed
            for seed in range(cfg.seeds)
            if not self._closes(run(case.program, cycle, self.exec_config(seed)), k4, steps=8)
        ]
        self.record("transclosure", "4-cycle to K4 in 8 applications", "cycle4", not bad, f"bad seeds {bad[:5]}")
        found = self.explore(case.program, cycle)
        k4_key = canonical_key(k4)
        self.record("transclosure", "4-cycle enumerated", "cycle4", found.classes == {("success", k4_key)})
        spent = found.spent.get(k4_key, {})
        self.record(
            "transclosure",
            "every execution uses 8 applications",
            "cycle4",
            set(spent) == {8},
            f"applications {sorted(spent)}",
        )

        rng = random.Random(cfg.seed)
        for i in range(cfg.random_graphs):
            graph = random_host_graph(rng, 8, loops=True)
            item = f"random-{i}"
            limit = len(graph.nodes) ** 2
            bad = {}
            for seed in range(cfg.corpus_seeds):
                result = run(case.program, graph, self.exec_config(seed, trace=True))
                if not isinstance(result.outcome, Success) or result.steps > limit:
                    bad.setdefault("applications <= |V|^2", f"seed {seed}: {result.outcome.kind}, {result.steps} applications")
                    continue
                previous = graph
                for step in result.trace:
                    if nonedge_count(previous) - nonedge_count(step.graph) != 1:
                        bad.setdefault("each link removes one non-edge", f"seed {seed}: step {step.step}")
                    if not _extends(previous, step.graph):
                        bad.setdefault("each link embeds its input", f"seed {seed}: step {step.step}")
                    previous = step.graph
            for check in ("applications <= |V|^2", "each link removes one non-edge", "each link embeds its input"):
                self.record("transclosure", check, item, check not in bad, bad.get(check, ""))

            check = "every execution uses <= |V|^2 applications"
            found = self.explore_or_skip("transclosure", check, item, case.program, graph)
            if found is not None:
                most = max((max(c) for c in found.spent.values()), default=0)
                ok = {c[0] for c in found.classes} == {"success"} and most <= limit
                self.record("transclosure", check, item, ok, f"at most {most} applications")

        for n in range(cfg.exhaustive_nodes + 1):
            for j, graph in enumerate(all_digraphs(n)):
                want = canonical_key(oracle_transitive_closure(graph))
                found = self.explore(case.program, graph)
                self.record("transclosure", "closure matches oracle", f"all{n}-{j}", found.classes == {("success", want)})

        for i in range(cfg.closure_graphs):
            graph = random_host_graph(rng, 6, loops=True)
            result = run(case.program, graph, self.exec_config(i))
            ok = self._closes(result, oracle_transitive_closure(graph))
            self.record("transclosure", "closure matches oracle", f"random6-{i}", ok)

    @staticmethod
    def _closes(result, want, steps=None):
        if not isinstance(result.outcome, Success) or not isomorphic(result.outcome.graph, want):
            return False
        return steps is None or result.steps == steps

    # ---------- colouring ----------

    def check_colouring(self):
        cfg = self.config
        case = self.case("colouring")
        inc = case.ast.rules["inc"]
        self.log("🎨 Colouring")

        checks = (
            "terminates",
            "colours form 1..n after every inc",
            "inc adds no colour or max + 1",
            "colour sum rises by one per inc",
            "application bounds",
            "correct colouring, inc exhausted",
        )
        rng = random.Random(cfg.seed + 1)
        for i in range(cfg.random_graphs):
            graph = random_host_graph(rng, 8, labels=i % 2 == 0)
            item = f"random-{i}"
            n = len(graph.nodes)
            bound = n * (n + 1) // 2 - n
            bad = {}
            for seed in range(cfg.corpus_seeds):
                result = run(case.program, graph, self.exec_config(seed, trace=True))
                if not isinstance(result.outcome, Success):
                    bad.setdefault("terminates", f"seed {seed}: {result.outcome.kind}")
                    continue
                coloured = result.outcome.graph
                incs = [step.graph for step in result.trace if step.rule == "inc"]
                prefixes = [colours_set(h) for h in incs]
                if not (_is_prefix_of_naturals(colours_set(coloured), n) and all(_is_prefix_of_naturals(c, n) for c in prefixes)):
                    bad.setdefault("colours form 1..n after every inc", f"seed {seed}")
                if not _grows_by_at_most_max_plus_one([{1}, *prefixes]):
                    bad.setdefault("inc adds no colour or max + 1", f"seed {seed}")
                # every node holds colour 1 before the first inc
                sums = [n, *(colour_sum(h) for h in incs)]
                if any(after - before != 1 for before, after in zip(sums, sums[1:])) or sums[-1] > n * (n + 1) // 2:
                    bad.setdefault("colour sum rises by one per inc", f"seed {seed}: sums {sums}")
                if len(incs) > bound or result.steps > 2 * n + bound:
                    bad.setdefault("application bounds", f"seed {seed}: {len(incs)} inc, {result.steps} total")
                if not check_colouring(graph, coloured) or find_matches(inc, coloured):
                    bad.setdefault("correct colouring, inc exhausted", f"seed {seed}")
            for check in checks:
                self.record("colouring", check, item, check not in bad, bad.get(check, ""))

            check = "every outcome is a colouring of 1..k"
            found = self.explore_or_skip("colouring", check, item, case.program, graph)
            if found is not None:
                most = max((max(c) for c in found.spent.values()), default=0)
                ok = (
                    {c[0] for c in found.classes} == {"success"}
                    and all(check_colouring(graph, h) and _is_prefix_of_naturals(colours_set(h), n) for h in found.graphs)
                    and most <= 2 * n + bound
                )
                self.record("colouring", check, item, ok, f"{len(found.successes)} classes, at most {most} applications")

        for n in range(cfg.exhaustive_nodes + 1):
            for j, graph in enumerate(all_digraphs(n, loops=False)):
                found = self.explore(case.program, graph)
                ok = not found.fail and not found.diverge and all(check_colouring(graph, h) for h in found.graphs)
                self.record("colouring", "every outcome is a colouring", f"all{n}-{j}", ok)

        path = build_graph(["a", "b", "c"], [("e1", "a", "b"), ("e2", "b", "c")])
        found = self.explore(case.program, path)
        self.record("colouring", "different colourings", "path3", len(found.successes) >= 2)

    # ---------- cycle check ----------

    def check_cyclecheck(self):
        cfg = self.config
        case = self.case("cyclecheck")
        marker = {True: case.variant("P"), False: case.variant("Q")}
        deleting = case.variant("delete!")
        self.log("🔁 Cycle check")

        graphs = [(f"all{n}-{j}", g) for n in range(cfg.exhaustive_nodes + 1) for j, g in enumerate(all_digraphs(n))]
        rng = random.Random(cfg.seed + 2)
        graphs += [(f"random-{i}", random_host_graph(rng, 6, 0.25, loops=True)) for i in range(cfg.cycle_graphs)]

        for item, graph in graphs:
            cyclic = oracle_is_cyclic(graph)
            want = self.explore(marker[cyclic], graph).classes
            got = self.explore(case.program, graph).classes
            self.record("cyclecheck", "P on cyclic, Q otherwise", item, got == want, "cyclic" if cyclic else "acyclic")
            steps = run(deleting, graph, self.exec_config(cfg.seed, trace=True)).trace
            self.record(
                "cyclecheck", "delete keeps cyclicity", item, all(oracle_is_cyclic(s.graph) == cyclic for s in steps)
            )
            if graph.nodes and not cyclic:
                self.record(
                    "cyclecheck", "acyclic has a source", item, any(indegree(graph, v) == 0 for v in graph.nodes)
                )

    # ---------- series-parallel ----------

    def check_seriesparallel(self):
        cfg = self.config
        case = self.case("seriesparallel")
        reduce_rules = [case.ast.rules["series"], case.ast.rules["parallel"]]
        self.log("⚡ Series-parallel")

        sp_graphs = [(f"sp-{i}", gen_series_parallel(cfg.seed + i, cfg.sp_max_edges)[1]) for i in range(cfg.sp_graphs)]
        non_sp = [("bridge", bridge_graph())]
        non_sp += [
            (f"mutant-{i}", with_isolated_node(gen_series_parallel(cfg.seed + 1000 + i, cfg.sp_max_edges)[1]))
            for i in range(cfg.mutants)
        ]

        for item, graph in sp_graphs:
            results = [run(case.program, graph, self.exec_config(s, trace=True)) for s in range(cfg.corpus_seeds)]
            ok = all(isinstance(r.outcome, Success) and not r.outcome.graph.nodes for r in results)
            self.record("seriesparallel", "runs return the empty graph", item, ok)
            found = self.explore(case.program, graph)
            self.record("seriesparallel", "all executions return the empty graph", item, found.classes == {("success", EMPTY_KEY)})
            self.record("seriesparallel", "reduce shrinks the graph", item, all(self._shrinks(graph, r.trace) for r in results))

        for item, graph in non_sp:
            results = [run(case.program, graph, self.exec_config(s)) for s in range(cfg.corpus_seeds)]
            self.record("seriesparallel", "runs fail", item, all(r.outcome.kind == "fail" for r in results))
            found = self.explore(case.program, graph)
            self.record("seriesparallel", "all executions fail", item, found.classes == {("fail",)})

        for item, graph in sp_graphs + non_sp:
            if len(graph.edges) > cfg.confluence_max_edges:
                continue
            forms = normal_forms(reduce_rules, graph, cfg.branch_cap)
            self.record("seriesparallel", "unique normal form", item, len(forms) == 1, f"{len(forms)} forms")

        pair = join_series_overlap(case.ast.rules["series"])
        single_edge = build_graph(["1", "2"], [("e", "1", "2")])
        self.record(
            "seriesparallel",
            "critical pair joins",
            "path a:b:c",
            pair.joinable and isomorphic(pair.joined_first, single_edge),
        )

    @staticmethod
    def _shrinks(start, steps):
        previous = _size(start)
        for step in steps:
            if step.rule in ("series", "parallel") and _size(step.graph) >= previous:
                return False
            previous = _size(step.graph)
        return True

    # ---------- interpreter laws ----------

    def check_laws(self):
        cfg = self.config
        self.log("⚖️  Interpreter laws")
        tc = self.case("transclosure")
        cc = self.case("cyclecheck")
        colouring = self.case("colouring")

        for name in CORPUS_CASES:
            case = self.case(name)
            stay = case.variant("fail!")
            for item, (_, graph) in case.inputs.items():
                found = self.explore(stay, graph)
                self.record("laws", "fail! keeps the input", f"{name}/{item}", found.classes == {("success", canonical_key(graph))})

        either, p, q = cc.variant("P or Q"), cc.variant("P"), cc.variant("Q")
        inline = cc.variant("if (delete!; {edge, loop}) then P else Q")
        for item, (_, graph) in cc.inputs.items():
            union = self.explore(p, graph).classes | self.explore(q, graph).classes
            self.record("laws", "or is union", f"cyclecheck/{item}", self.explore(either, graph).classes == union)
            self.record(
                "laws",
                "inlining keeps outcomes",
                f"cyclecheck/{item}",
                self.explore(inline, graph).classes == self.explore(cc.program, graph).classes,
            )

        link_or_skip, link, skip = tc.variant("link or skip"), tc.variant("link"), tc.variant("skip")
        skip_then, try_link = tc.variant("skip; link!"), tc.variant("try link")
        for item, (_, graph) in tc.inputs.items():
            union = self.explore(link, graph).classes | self.explore(skip, graph).classes
            self.record("laws", "or is union", f"transclosure/{item}", self.explore(link_or_skip, graph).classes == union)
            self.record(
                "laws",
                "skip is neutral",
                f"transclosure/{item}",
                self.explore(skip_then, graph).classes == self.explore(tc.program, graph).classes,
            )
            once = self.explore(link, graph)
            want = {c for c in once.classes if c[0] == "success"}
            if once.fail:
                want.add(("success", canonical_key(graph)))
            self.record(
                "laws", "bare try keeps or restores", f"transclosure/{item}", self.explore(try_link, graph).classes == want
            )

        for case, rule in ((tc, "link"), (colouring, "inc")):
            for item, (_, graph) in case.inputs.items():
                result = run(case.program, graph, self.exec_config(cfg.seed))
                ok = isinstance(result.outcome, Success) and not find_matches(case.ast.rules[rule], result.outcome.graph)
                self.record("laws", f"{rule} not applicable after loop", f"{case.name}/{item}", ok)

    # ---------- reporting ----------

    def verify(self, name):
        """Run one case (or `all`) and return the results table"""
        names = VERIFY_CASES if name == "all" else (name,)
        for case_name in names:
            if case_name == "laws":
                self.check_laws()
                continue
            self.check_corpus(case_name)
            if case_name != "condrule":
                getattr(self, f"check_{case_name}")()
        return self.results()

    def results(self):
        frame = pd.DataFrame(self.rows, columns=COLUMNS)
        frame["passed"] = frame["passed"].astype(bool)
        frame["skipped"] = frame["skipped"].astype(bool)
        return frame

    def summary(self):
        results = self.results()  # noqa: F841  read by name in SUMMARY_SQL
        return duckdb.query(SUMMARY_SQL).to_df()

    def failures(self):
        results = self.results()
        return results[~results["passed"]]

    @property
    def all_passed(self):
        return all(row["passed"] for row in self.rows)
