#!/usr/bin/env python3
"""
Test suite for conditional rules
Validates evaluation, label matching, the dangling condition and rule application
"""

from itertools import permutations
from pathlib import Path

import pytest

from case_studies import all_digraphs, critical_pair_path, cycle_graph
from gp_syntax import load_program, parse_program
from host_graph import INT_MAX, Label, Mark, build_graph, isomorphic
from outcome import FAIL, Success
from rules import (
    EMPTY,
    Arith,
    ArithmeticOverflow,
    Concat,
    DivisionByZero,
    IllegalPattern,
    IntLit,
    MalformedRule,
    Rule,
    RuleGraph,
    RuleNode,
    StrLit,
    TypeMismatch,
    UndeclaredVariable,
    Var,
    VarType,
    apply_match,
    apply_rule_set,
    concat,
    eval_expr,
    find_matches,
    match_label,
)

CORPUS = Path(__file__).resolve().parent / "corpus"


def corpus_rules(case):
    return load_program(CORPUS / case / "program.gp").rules


def first(candidates):
    return candidates[0]


def path3():
    return build_graph(["a", "b", "c"], [("e1", "a", "b"), ("e2", "b", "c")])


class TestEvalExpr:
    """Test expression evaluation"""

    def test_square_of_negative(self):
        assert eval_expr({"n": (-3,)}, None, None, Arith("*", Var("n"), Var("n"))) == (9,)

    def test_concatenation(self):
        expr = concat(Var("x"), Var("y"))
        assert eval_expr({"x": (2, 3), "y": (4,)}, None, None, expr) == (2, 3, 4)

    def test_empty_is_concat_identity(self):
        assert concat(EMPTY, EMPTY) == EMPTY
        assert eval_expr({}, None, None, concat(EMPTY, EMPTY)) == ()

    def test_division_truncates_toward_zero(self):
        assert eval_expr({}, None, None, Arith("/", IntLit(-7), IntLit(2))) == (-3,)
        assert eval_expr({}, None, None, Arith("/", IntLit(7), IntLit(2))) == (3,)

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            eval_expr({}, None, None, Arith("/", IntLit(1), IntLit(0)))

    def test_overflow(self):
        with pytest.raises(ArithmeticOverflow):
            eval_expr({}, None, None, Arith("+", IntLit(INT_MAX), IntLit(1)))

    def test_arithmetic_on_strings(self):
        with pytest.raises(TypeMismatch):
            eval_expr({}, None, None, Arith("+", StrLit("a"), IntLit(1)))


class TestMatchLabel:
    """Test label pattern matching"""

    VARS = {"x": VarType.LIST, "y": VarType.LIST, "i": VarType.INT, "s": VarType.STRING}

    def test_list_then_int(self):
        pattern = Concat((Var("x"), Var("i")))
        assert match_label(pattern, (5, 3), self.VARS) == [{"x": (5,), "i": (3,)}]

    def test_literal(self):
        assert match_label(IntLit(0), (0,), self.VARS) == [{}]
        assert match_label(IntLit(0), (1,), self.VARS) == []

    def test_two_list_variables(self):
        with pytest.raises(IllegalPattern):
            match_label(Concat((Var("x"), Var("y"))), (1, 2), self.VARS)

    def test_arithmetic_on_the_left(self):
        with pytest.raises(IllegalPattern):
            match_label(Arith("+", Var("i"), IntLit(1)), (2,), self.VARS)

    def test_atom_types(self):
        assert match_label(Var("i"), ("a",), self.VARS) == []
        assert match_label(Var("s"), ("a",), self.VARS) == [{"s": ("a",)}]

    def test_list_variable_takes_the_rest(self):
        assert match_label(Var("x"), (), self.VARS) == [{"x": ()}]
        assert match_label(Concat((Var("s"), Var("x"))), ("a", 1, 2), self.VARS) == [{"s": ("a",), "x": (1, 2)}]

    def test_bound_variable_acts_as_literal(self):
        assert match_label(Var("i"), (3,), self.VARS, {"i": (3,)}) == [{"i": (3,)}]
        assert match_label(Var("i"), (4,), self.VARS, {"i": (3,)}) == []


class TestRuleChecks:
    """Test static rule well-formedness"""

    def test_undeclared_variable(self):
        with pytest.raises(UndeclaredVariable):
            Rule(
                "r",
                {"x": "list"},
                RuleGraph((RuleNode("1", Var("x")),)),
                RuleGraph((RuleNode("1", Var("y")),)),
                {"1"},
            )

    def test_interface_on_both_sides(self):
        with pytest.raises(MalformedRule):
            Rule("r", {}, RuleGraph((RuleNode("1"),)), RuleGraph(), {"1"})

    def test_right_only_variable(self):
        with pytest.raises(MalformedRule):
            Rule("r", {"x": "list"}, RuleGraph(), RuleGraph((RuleNode("1", Var("x")),)), set())


class TestFindMatches:
    """Test injective matching with conditions and the dangling condition"""

    def test_link_on_path(self):
        link = corpus_rules("transclosure")["link"]
        matches = find_matches(link, path3())
        assert len(matches) == 1
        assert matches[0].node_map == {"1": "a", "2": "b", "3": "c"}
        assert matches[0].edge_map == {"e1": "e1", "e2": "e2"}

    def test_link_on_two_cycle(self):
        """Two nodes leave no room for a 3-node injective match"""
        link = corpus_rules("transclosure")["link"]
        graph = build_graph(["a", "b"], [("e1", "a", "b"), ("e2", "b", "a")])
        assert find_matches(link, graph) == []

    def test_dangling_condition(self):
        """A deleted node with an unmatched incident edge blocks the match"""
        delete = corpus_rules("seriesparallel")["delete"]
        assert len(find_matches(delete, build_graph(["a", "b"], [("e", "a", "b")]))) == 1
        assert find_matches(delete, path3()) == []

    def test_loop_blocks_delete(self):
        """A loop at the source gives indegree 1, so the edge stays"""
        delete = corpus_rules("cyclecheck")["delete"]
        graph = build_graph(["a", "b"], [("l", "a", "a"), ("e", "a", "b")])
        assert find_matches(delete, graph) == []
        assert len(find_matches(delete, build_graph(["a", "b"], [("e", "a", "b")]))) == 1

    def test_marks_match_exactly(self):
        mark = corpus_rules("colouring")["mark"]
        assert find_matches(mark, build_graph([("a", Label((), Mark.GREY))])) == []
        assert len(find_matches(mark, build_graph(["a"]))) == 1

    def test_match_order(self):
        """Matches come sorted by host node ids"""
        edge = corpus_rules("cyclecheck")["edge"]
        graph = build_graph(["n10", "n2", "n1"], [("e1", "n10", "n2"), ("e2", "n1", "n10")])
        assert [m.node_map["1"] for m in find_matches(edge, graph)] == ["n1", "n10"]

    def test_link_agrees_with_brute_force(self):
        """Every injective node triple with a path and no shortcut, on all 3-node digraphs"""
        link = corpus_rules("transclosure")["link"]
        for graph in all_digraphs(3, loops=False):
            pairs = {(e.source, e.target) for e in graph.edges.values()}
            expected = sorted(
                (a, b, c)
                for a, b, c in permutations(graph.nodes, 3)
                if (a, b) in pairs and (b, c) in pairs and (a, c) not in pairs
            )
            found = sorted((m.node_map["1"], m.node_map["2"], m.node_map["3"]) for m in find_matches(link, graph))
            assert found == expected


class TestApplyMatch:
    """Test rule application"""

    def test_series_on_path(self):
        series = corpus_rules("seriesparallel")["series"]
        host = build_graph(["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3")])
        (match,) = find_matches(series, host)
        result = apply_match(series, host, match)
        assert set(result.nodes) == {"1", "3"}
        assert [(e.source, e.target) for e in result.edges.values()] == [("1", "3")]
        assert len(host.edges) == 2, "input graph must be unchanged"

    def test_inc_relabels_target(self):
        inc = corpus_rules("colouring")["inc"]
        host = build_graph([("a", ["p", 1]), ("b", ["q", 1])], [("e", "a", "b")])
        (match,) = find_matches(inc, host)
        result = apply_match(inc, host, match)
        assert result.nodes["a"] == Label(("p", 1))
        assert result.nodes["b"] == Label(("q", 2))
        assert result.edges["e"] == host.edges["e"]

    def test_identity_rule(self):
        edge = corpus_rules("cyclecheck")["edge"]
        host = cycle_graph(3)
        result = apply_match(edge, host, find_matches(edge, host)[0])
        assert isomorphic(result, host)

    def test_init_unmarks(self):
        init = corpus_rules("colouring")["init"]
        host = build_graph([("a", Label(("x",), Mark.GREY))])
        result = apply_match(init, host, find_matches(init, host)[0])
        assert result.nodes["a"] == Label(("x", 1))

    def test_conditional_contract(self):
        """Grey node and its edges become a dashed edge labelled 7"""
        contract = corpus_rules("condrule")["contract"]
        host = build_graph(
            [("1", "a"), ("2", -3), ("3", Label((), Mark.GREY))],
            [("e1", "1", "3", "b"), ("e2", "3", "2")],
        )
        (match,) = find_matches(contract, host)
        result = apply_match(contract, host, match)
        assert result.nodes == {"1": Label(("a", "b")), "2": Label((9,))}
        (edge,) = result.edges.values()
        assert (edge.source, edge.target, edge.label) == ("1", "2", Label((7,), Mark.DASHED))

    def test_degree_functions_see_the_matched_graph(self):
        program = parse_program(
            """
rule count(x: list)
  node 1 x
=>
  node 1 indegree(1):outdegree(1)
  node 2 empty
  edge e 1 2 empty
interface = {1}

Main = count
"""
        )
        rule = program.rules["count"]
        host = build_graph(["a", "b"], [("e1", "b", "a"), ("e2", "b", "a")])
        match = next(m for m in find_matches(rule, host) if m.node_map["1"] == "a")
        result = apply_match(rule, host, match)
        assert result.nodes["a"] == Label((2, 0))

    def test_critical_pair_overlap(self):
        series = corpus_rules("seriesparallel")["series"]
        assert len(find_matches(series, critical_pair_path())) == 2


class TestApplyRuleSet:
    """Test rule-set calls"""

    def test_edge_or_loop_on_edgeless_graph(self):
        rules = corpus_rules("cyclecheck")
        assert apply_rule_set([rules["edge"], rules["loop"]], build_graph(["a", "b"]), first) is FAIL

    def test_empty_set(self):
        assert apply_rule_set([], cycle_graph(3), first) is FAIL

    def test_link_on_cycle(self):
        link = corpus_rules("transclosure")["link"]
        result = apply_rule_set([link], cycle_graph(4), first)
        assert isinstance(result, Success)
        assert len(result.graph.edges) == 5
        rule, match = result.step
        assert rule is link and match in find_matches(link, cycle_graph(4))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
