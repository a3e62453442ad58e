#!/usr/bin/env python3
"""
Test suite for program elaboration
Validates procedure inlining, scoping, recursion and break placement
"""

from pathlib import Path

import pytest

from elaborate import (
    BreakOutsideLoop,
    CBreak,
    CIf,
    CLoop,
    CRuleSet,
    CSeq,
    CSkip,
    RecursiveProcedure,
    UnknownRule,
    elaborate,
)
from gp_syntax import load_program, parse_program
from host_graph import Mark

CORPUS = Path(__file__).resolve().parent / "corpus"

MARKER = """
rule {name}()
=>
  node 1 empty #{mark}
interface = {{}}
"""


def core(text):
    return elaborate(parse_program(text)).body


class TestInlining:
    """Test procedure expansion into core commands"""

    def test_cycle_check(self):
        """Cyclic is inlined as the condition of the if"""
        program = elaborate(load_program(CORPUS / "cyclecheck" / "program.gp"))
        body = program.body
        assert isinstance(body, CIf)
        assert isinstance(body.condition, CSeq)
        deletes, edge_or_loop = body.condition.commands
        assert isinstance(deletes, CLoop) and deletes.body.names == ("delete",)
        assert edge_or_loop.names == ("edge", "loop")
        assert body.then.names == ("P",) and body.else_.names == ("Q",)
        assert set(program.rules) == {"delete", "edge", "loop", "P", "Q"}

    def test_missing_branches_become_skip(self):
        body = core(MARKER.format(name="a", mark="red") + "\nMain = try a\n")
        assert isinstance(body.then, CSkip) and isinstance(body.else_, CSkip)

    def test_each_call_is_expanded(self):
        """Two calls give two separate loop nodes with their own ids"""
        text = MARKER.format(name="a", mark="red") + "\nA = a!\nMain = A; A\n"
        first, second = core(text).commands
        assert isinstance(first, CLoop) and isinstance(second, CLoop)
        assert first is not second
        assert first.loop_id != second.loop_id


class TestScoping:
    """Test local declarations"""

    def test_local_rule_shadows_outer(self):
        text = (
            MARKER.format(name="a", mark="red")
            + "\nP = ["
            + MARKER.format(name="a", mark="blue")
            + "] a\nMain = P; a\n"
        )
        inner, outer = core(text).commands
        assert isinstance(inner, CRuleSet) and isinstance(outer, CRuleSet)
        assert inner.rules[0].right.nodes[0].mark is Mark.BLUE
        assert outer.rules[0].right.nodes[0].mark is Mark.RED

    def test_local_rule_is_invisible_outside(self):
        text = "P = [" + MARKER.format(name="b", mark="red") + "] b\nMain = P; b\n"
        with pytest.raises(UnknownRule):
            core(text)

    def test_local_procedure_sees_outer_rules(self):
        text = MARKER.format(name="a", mark="red") + "\nP = [\nQ = a!\n] Q\nMain = P\n"
        body = core(text)
        assert isinstance(body, CLoop)
        assert body.body.names == ("a",)


class TestStaticErrors:
    """Test the errors raised before execution"""

    def test_recursive_procedure(self):
        with pytest.raises(RecursiveProcedure):
            core("P = P\nMain = P\n")

    def test_mutual_recursion(self):
        with pytest.raises(RecursiveProcedure) as info:
            core("A = B\nB = A\nMain = A\n")
        assert "A -> B -> A" in str(info.value)

    def test_unused_procedures_are_checked(self):
        with pytest.raises(UnknownRule):
            core("U = nothing\nMain = skip\n")

    @pytest.mark.parametrize("main", ["nothing", "{nothing}", "skip; nothing!"])
    def test_unknown_rule(self, main):
        with pytest.raises(UnknownRule):
            core(f"Main = {main}\n")

    def test_error_position(self):
        with pytest.raises(UnknownRule) as info:
            elaborate(parse_program("\n\nMain = nothing\n"), path="p.gp")
        assert str(info.value).startswith("p.gp:3:1:")

    def test_break_outside_loop(self):
        with pytest.raises(BreakOutsideLoop):
            core("Main = break\n")

    def test_break_cannot_leave_a_condition(self):
        with pytest.raises(BreakOutsideLoop):
            core("Main = (if break then skip)!\n")

    def test_break_in_procedure_outside_loop(self):
        with pytest.raises(BreakOutsideLoop):
            core("B = break\nMain = B\n")


class TestBreak:
    """Test break resolution to the innermost loop"""

    def test_break_targets_its_loop(self):
        body = core("Main = (skip; break)!\n")
        assert isinstance(body, CLoop)
        skip, brk = body.body.commands
        assert isinstance(skip, CSkip)
        assert isinstance(brk, CBreak) and brk.loop_id == body.loop_id

    def test_nested_loops(self):
        body = core("Main = ((break)!; break)!\n")
        inner, outer_break = body.body.commands
        assert inner.body.loop_id == inner.loop_id
        assert outer_break.loop_id == body.loop_id
        assert inner.loop_id != body.loop_id

    def test_break_in_procedure_called_in_loop(self):
        """A procedure body may break out of the loop around its call"""
        body = core("B = break\nMain = B!\n")
        assert isinstance(body, CLoop)
        assert isinstance(body.body, CBreak) and body.body.loop_id == body.loop_id


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
