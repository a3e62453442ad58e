"""
Program interpreter
Seeded single runs with step traces, and exhaustive outcome enumeration up to isomorphism
"""

from __future__ import annotations

import heapq
import random
from collections import Counter
from dataclasses import dataclass, field

from elaborate import CBreak, CFail, CIf, CLoop, COr, CRuleSet, CSeq, CSkip, CTry
from host_graph import canonical_key, id_sort_key
from outcome import DIVERGE, FAIL, Crash, Diverge, Fail, Success
from rules import EvaluationError, applications, apply_match

DEFAULT_SEED = 0
DEFAULT_FUEL = 10000
DEFAULT_BRANCH_CAP = 100000


class StateSpaceLimit(Exception):
    """Exhaustive exploration visited more states than the branch cap allows"""


@dataclass(frozen=True)
class ExecConfig:
    seed: int = DEFAULT_SEED
    fuel: int = DEFAULT_FUEL
    trace: bool = False
    branch_cap: int = DEFAULT_BRANCH_CAP

    def __post_init__(self):
        if self.fuel <= 0:
            raise ValueError(f"fuel must be positive, got {self.fuel}")
        if self.branch_cap <= 0:
            raise ValueError(f"branch cap must be positive, got {self.branch_cap}")


@dataclass(frozen=True)
class TraceStep:
    """One rule application of a run"""

    step: int
    rule: str
    node_map: dict
    edge_map: dict
    graph: object

    @property
    def key(self):
        return canonical_key(self.graph)

    def format(self):
        nodes = ", ".join(f"{k}={v}" for k, v in sorted(self.node_map.items(), key=lambda kv: id_sort_key(kv[0])))
        edges = ", ".join(f"{k}={v}" for k, v in sorted(self.edge_map.items(), key=lambda kv: id_sort_key(kv[0])))
        return (
            f"step {self.step}: {self.rule} @ nodes[{nodes}] edges[{edges}]"
            f" -> {len(self.graph.nodes)},{len(self.graph.edges)}"
        )

    def to_json(self):
        return {
            "step": self.step,
            "rule": self.rule,
            "nodes": dict(self.node_map),
            "edges": dict(self.edge_map),
            "node_count": len(self.graph.nodes),
            "edge_count": len(self.graph.edges),
        }


@dataclass
class RunResult:
    outcome: object
    steps: int
    trace: list = field(default_factory=list)


@dataclass(frozen=True)
class _Broken:
    """A break travelling up to its loop"""

    graph: object
    loop_id: int


class _Runner:
    def __init__(self, cfg):
        self.rng = random.Random(cfg.seed)
        self.fuel = cfg.fuel
        self.steps = 0
        self.record = cfg.trace
        self.trace = []

    def choose(self, candidates):
        return candidates[self.rng.randrange(len(candidates))]

    def execute(self, cmd, graph):
        if isinstance(cmd, CRuleSet):
            return self.call(cmd.rules, graph)
        if isinstance(cmd, CSeq):
            for sub in cmd.commands:
                result = self.execute(sub, graph)
                if not isinstance(result, Success):
                    return result
                graph = result.graph
            return Success(graph)
        if isinstance(cmd, (CIf, CTry)):
            result = self.execute(cmd.condition, graph)
            if isinstance(result, Success):
                return self.execute(cmd.then, graph if isinstance(cmd, CIf) else result.graph)
            if isinstance(result, Fail):
                return self.execute(cmd.else_, graph)
            return result
        if isinstance(cmd, CLoop):
            return self.loop(cmd, graph)
        if isinstance(cmd, COr):
            branch = cmd.left if self.rng.randrange(2) == 0 else cmd.right
            return self.execute(branch, graph)
        if isinstance(cmd, CBreak):
            return _Broken(graph, cmd.loop_id)
        if isinstance(cmd, CSkip):
            return Success(graph)
        if isinstance(cmd, CFail):
            return FAIL
        raise TypeError(f"not a core command: {cmd!r}")

    def call(self, rules, graph):
        try:
            candidates = applications(rules, graph)
            if not candidates:
                return FAIL
            if self.fuel == 0:
                return DIVERGE
            rule, match = self.choose(candidates)
            result = apply_match(rule, graph, match)
        except EvaluationError as e:
            return Crash(str(e))
        self.fuel -= 1
        self.steps += 1
        if self.record:
            self.trace.append(TraceStep(self.steps, rule.name, dict(match.node_map), dict(match.edge_map), result))
        return Success(result)

    def loop(self, cmd, graph):
        while True:
            before = self.fuel
            result = self.execute(cmd.body, graph)
            if isinstance(result, Fail):
                return Success(graph)
            if isinstance(result, _Broken) and result.loop_id == cmd.loop_id:
                return Success(result.graph)
            if not isinstance(result, Success):
                return result
            if self.fuel == before:
                # an iteration that used no fuel still burns one unit
                if self.fuel == 0:
                    return DIVERGE
                self.fuel -= 1
            graph = result.graph


def run(program, graph, cfg=None):
    """
    Execute program once, resolving every choice with a seeded uniform chooser

    Args:
        program: CoreProgram
        graph: input HostGraph
        cfg: ExecConfig (seed, fuel, trace)

    Returns:
        RunResult: outcome (Success, Fail, Diverge or Crash), rule applications and trace
    """
    cfg = cfg or ExecConfig()
    runner = _Runner(cfg)
    outcome = runner.execute(program.body, graph)
    return RunResult(outcome, runner.steps, runner.trace)


def trace(program, graph, cfg=None):
    """Trace records of the run with the same program, graph and config"""
    cfg = cfg or ExecConfig()
    cfg = ExecConfig(cfg.seed, cfg.fuel, True, cfg.branch_cap)
    return run(program, graph, cfg).trace


# ---------- Exhaustive enumeration ----------

# Result tuples of the enumeration; fuel is what remains afterwards:
#   ("success", key, fuel)   ("fail", fuel)   ("break", loop_id, key, fuel)
#   ("diverge",)             ("crash", message)


@dataclass
class OutcomeSet:
    """Outcome classes of a program on one input, with the number of executions reaching each"""

    successes: dict = field(default_factory=dict)  # canonical key -> (graph, executions)
    fail: int = 0
    diverge: int = 0
    crashes: Counter = field(default_factory=Counter)
    states: int = 0
    # canonical key -> Counter of fuel spent -> executions; fuel spent is the number of
    # rule applications unless some loop iteration succeeded without applying a rule
    spent: dict = field(default_factory=dict)

    @property
    def graphs(self):
        return [self.successes[k][0] for k in sorted(self.successes)]

    @property
    def classes(self):
        """Comparable summary: success keys plus the failure-like kinds present"""
        found = {("success", k) for k in self.successes}
        if self.fail:
            found.add(("fail",))
        if self.diverge:
            found.add(("diverge",))
        found |= {("crash", m) for m in self.crashes}
        return frozenset(found)

    def contains(self, outcome):
        if isinstance(outcome, Success):
            return canonical_key(outcome.graph) in self.successes
        if isinstance(outcome, Fail):
            return self.fail > 0
        if isinstance(outcome, Diverge):
            return self.diverge > 0
        return outcome.message in self.crashes

    def __len__(self):
        return len(self.classes)


class _Explorer:
    def __init__(self, branch_cap):
        self.branch_cap = branch_cap
        self.graphs = {}
        self.memo = {}
        self.states = 0

    def key(self, graph):
        key = canonical_key(graph)
        self.graphs.setdefault(key, graph)
        return key

    def visit(self):
        self.states += 1
        if self.states > self.branch_cap:
            raise StateSpaceLimit(f"explored more than {self.branch_cap} states")

    def explore(self, cmd, key, fuel):
        """Counter of result tuples for cmd on the graph with canonical key, with fuel left"""
        memo_key = (id(cmd), key, fuel)
        if memo_key in self.memo:
            return self.memo[memo_key]
        self.visit()
        result = self._explore(cmd, key, fuel)
        self.memo[memo_key] = result
        return result

    def _explore(self, cmd, key, fuel):
        if isinstance(cmd, CRuleSet):
            return self.call(cmd.rules, key, fuel)
        if isinstance(cmd, CSeq):
            states = Counter({("success", key, fuel): 1})
            for sub in cmd.commands:
                states = self.then(states, lambda k, f, sub=sub: self.explore(sub, k, f))
            return states
        if isinstance(cmd, CIf):
            cond = self.explore(cmd.condition, key, fuel)
            return self.branch(cond, cmd, key, keep_result=False)
        if isinstance(cmd, CTry):
            cond = self.explore(cmd.condition, key, fuel)
            return self.branch(cond, cmd, key, keep_result=True)
        if isinstance(cmd, CLoop):
            return self.loop(cmd, key, fuel)
        if isinstance(cmd, COr):
            return self.explore(cmd.left, key, fuel) + self.explore(cmd.right, key, fuel)
        if isinstance(cmd, CBreak):
            return Counter({("break", cmd.loop_id, key, fuel): 1})
        if isinstance(cmd, CSkip):
            return Counter({("success", key, fuel): 1})
        if isinstance(cmd, CFail):
            return Counter({("fail", fuel): 1})
        raise TypeError(f"not a core command: {cmd!r}")

    def call(self, rules, key, fuel):
        graph = self.graphs[key]
        try:
            candidates = applications(rules, graph)
            if not candidates:
                return Counter({("fail", fuel): 1})
            if fuel == 0:
                return Counter({("diverge",): 1})
        except EvaluationError as e:
            return Counter({("crash", str(e)): 1})
        found = Counter()
        for rule, match in candidates:
            try:
                found[("success", self.key(apply_match(rule, graph, match)), fuel - 1)] += 1
            except EvaluationError as e:
                found[("crash", str(e))] += 1
        return found

    @staticmethod
    def then(states, step):
        """Continue every success state with step; other results pass through"""
        out = Counter()
        for state, n in states.items():
            if state[0] != "success":
                out[state] += n
                continue
            for result, m in step(state[1], state[2]).items():
                out[result] += n * m
        return out

    def branch(self, cond, cmd, key, keep_result):
        out = Counter()
        for result, n in cond.items():
            if result[0] == "success":
                start = result[1] if keep_result else key
                follow = self.explore(cmd.then, start, result[2])
            elif result[0] == "fail":
                follow = self.explore(cmd.else_, key, result[1])
            else:
                out[result] += n
                continue
            for r, m in follow.items():
                out[r] += n * m
        return out

    def loop(self, cmd, key, fuel):
        """
        Iterate the body over (graph, fuel) states in decreasing-fuel order

        Every iteration lowers the fuel, so states form a DAG and each one is
        expanded once with the total number of paths reaching it.
        """
        out = Counter()
        paths = Counter({(key, fuel): 1})
        heap = [(-fuel, key)]
        while heap:
            neg_fuel, state_key = heapq.heappop(heap)
            state_fuel = -neg_fuel
            n = paths.pop((state_key, state_fuel), 0)
            if n == 0:
                continue
            self.visit()
            for result, m in self.explore(cmd.body, state_key, state_fuel).items():
                kind = result[0]
                if kind == "fail":
                    out[("success", state_key, result[1])] += n * m
                elif kind == "break" and result[1] == cmd.loop_id:
                    out[("success", result[2], result[3])] += n * m
                elif kind == "success":
                    next_key, next_fuel = result[1], result[2]
                    if next_fuel == state_fuel:
                        if next_fuel == 0:
                            out[("diverge",)] += n * m
                            continue
                        next_fuel -= 1
                    if (next_key, next_fuel) not in paths:
                        heapq.heappush(heap, (-next_fuel, next_key))
                    paths[(next_key, next_fuel)] += n * m
                else:
                    out[result] += n * m
        return out


def outcomes(program, graph, fuel=DEFAULT_FUEL, branch_cap=DEFAULT_BRANCH_CAP):
    """
    Every possible outcome of program on graph, success graphs up to isomorphism

    Explores rule and match choices, both sides of `or`, and each way a
    condition can end. Fail, Diverge and Crash are kept apart.

    Raises:
        StateSpaceLimit: more than branch_cap states explored
        ValueError: fuel or branch_cap not positive
    """
    if fuel <= 0:
        raise ValueError(f"fuel must be positive, got {fuel}")
    if branch_cap <= 0:
        raise ValueError(f"branch cap must be positive, got {branch_cap}")
    explorer = _Explorer(branch_cap)
    start = explorer.key(graph)
    found = OutcomeSet()
    for result, n in explorer.explore(program.body, start, fuel).items():
        kind = result[0]
        if kind == "success":
            graph_out, count = found.successes.get(result[1], (explorer.graphs[result[1]], 0))
            found.successes[result[1]] = (graph_out, count + n)
            found.spent.setdefault(result[1], Counter())[fuel - result[2]] += n
        elif kind == "fail":
            found.fail += n
        elif kind == "diverge":
            found.diverge += n
        elif kind == "crash":
            found.crashes[result[1]] += n
    found.states = explorer.states
    return found


def outcome_label(outcome):
    """FAIL / DIVERGE / CRASH / SUCCESS, as printed by the command line"""
    return outcome.kind.upper()
