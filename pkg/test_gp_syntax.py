#!/usr/bin/env python3
"""
Test suite for the program parser and pretty printer
Validates the command grammar, rule declarations, error reporting and round-trips
"""

from pathlib import Path

import pytest

from gp_syntax import (
    Break,
    Choice,
    DuplicateDeclaration,
    FailCmd,
    If,
    Loop,
    MissingMain,
    ParseError,
    ProcCall,
    ProcDecl,
    RuleSetCall,
    Seq,
    Skip,
    Try,
    format_command,
    format_expr,
    format_program,
    load_program,
    parse_command,
    parse_program,
    with_main,
)
from host_graph import Mark
from rules import And, Arith, Compare, Concat, EdgeTest, IntLit, Neg, Not, Var, VarType

CORPUS = Path(__file__).resolve().parent / "corpus"
CORPUS_PROGRAMS = sorted(CORPUS.glob("*/program.gp"))

LINK = """
rule link(x, y, z, a, b: list)
  node 1 x
  node 2 y
  node 3 z
  edge e1 1 2 a
  edge e2 2 3 b
=>
  node 1 x
  node 2 y
  node 3 z
  edge e1 1 2 a
  edge e2 2 3 b
  edge e3 1 3 empty
interface = {1, 2, 3}
where not edge(1, 3)
"""

MARKER = """
rule {name}()
=>
  node 1 empty
interface = {{}}
"""


class TestParseProgram:
    """Test program declarations"""

    def test_transitive_closure_shape(self):
        """`Main = link!` is one loop over a singleton rule-set call"""
        program = parse_program(LINK + "\nMain = link!\n")
        assert program.main.body == Loop(RuleSetCall(("link",)))
        rule = program.rules["link"]
        assert rule.variables == {n: VarType.LIST for n in "xyzab"}
        assert rule.interface == {"1", "2", "3"}
        assert rule.condition == Not(EdgeTest("1", "3"))
        assert len(rule.left.edges) == 2 and len(rule.right.edges) == 3

    def test_two_mains(self):
        with pytest.raises(DuplicateDeclaration):
            parse_program(LINK + "\nMain = link\nMain = link!\n")

    def test_missing_main(self):
        with pytest.raises(MissingMain):
            parse_program(LINK)

    def test_duplicate_rule(self):
        with pytest.raises(DuplicateDeclaration) as info:
            parse_program(LINK + LINK + "\nMain = skip\n")
        assert info.value.line == 18

    def test_cycle_check_main(self):
        """The condition is a procedure call, the branches are rule calls"""
        program = load_program(CORPUS / "cyclecheck" / "program.gp")
        assert program.main.body == If(ProcCall("Cyclic"), RuleSetCall(("P",)), RuleSetCall(("Q",)))
        cyclic = program.procedures["Cyclic"]
        assert cyclic.body == Seq((Loop(RuleSetCall(("delete",))), RuleSetCall(("edge", "loop"))))

    def test_keyword_named_rules(self):
        """`edge` and `loop` are rule names where only a name fits"""
        program = load_program(CORPUS / "cyclecheck" / "program.gp")
        assert set(program.rules) == {"delete", "edge", "loop", "P", "Q"}

    def test_local_declarations(self):
        text = MARKER.format(name="a") + "\nP = [" + MARKER.format(name="b") + "] a; b\nMain = P\n"
        program = parse_program(text)
        proc = program.procedures["P"]
        assert isinstance(proc, ProcDecl)
        assert [d.name for d in proc.locals] == ["b"]
        assert proc.body == Seq((RuleSetCall(("a",)), RuleSetCall(("b",))))

    def test_conditional_rule(self):
        program = load_program(CORPUS / "condrule" / "program.gp")
        contract = program.rules["contract"]
        assert contract.variables["n"] is VarType.INT
        assert contract.condition == And(Compare("<", Var("n"), IntLit(0)), Not(EdgeTest("1", "2")))
        (edge,) = contract.right.edges
        assert edge.label == IntLit(7) and edge.mark is Mark.DASHED
        assert contract.right.node("2").label == Arith("*", Var("n"), Var("n"))
        assert contract.right.node("1").label == Concat((Var("x"), Var("y")))


class TestParseCommand:
    """Test the command grammar"""

    def test_sequence_and_rule_set(self):
        assert parse_command("link!; {a, b}") == Seq((Loop(ProcCall("link")), RuleSetCall(("a", "b"))))

    def test_empty_rule_set(self):
        assert parse_command("{}") == RuleSetCall(())

    def test_dangling_else(self):
        """else belongs to the nearest if"""
        assert parse_command("if a then if b then c else d") == If(
            ProcCall("a"), If(ProcCall("b"), ProcCall("c"), ProcCall("d")), None
        )

    def test_bare_try(self):
        assert parse_command("try a") == Try(ProcCall("a"), None, None)

    def test_or_binds_looser_than_loop(self):
        assert parse_command("a or b!") == Choice(ProcCall("a"), Loop(ProcCall("b")))
        assert parse_command("(a or b)!") == Loop(Choice(ProcCall("a"), ProcCall("b")))

    def test_branch_is_not_a_sequence(self):
        """`;` ends the then-branch"""
        assert parse_command("if a then b; c") == Seq((If(ProcCall("a"), ProcCall("b"), None), ProcCall("c")))

    def test_simple_commands(self):
        assert parse_command("(break; skip; fail)!") == Loop(Seq((Break(), Skip(), FailCmd())))


class TestParseErrors:
    """Test error positions and expected tokens"""

    def test_unexpected_token(self):
        with pytest.raises(ParseError) as info:
            parse_program("Main = link;\n  ;\n")
        assert (info.value.line, info.value.column) == (2, 3)
        assert info.value.expected, "expected tokens must be reported"
        assert str(info.value).startswith("<program>:2:3: unexpected")

    def test_unexpected_character(self):
        with pytest.raises(ParseError) as info:
            parse_program("Main = link$\n")
        assert (info.value.line, info.value.column) == (1, 12)

    def test_unexpected_end(self):
        with pytest.raises(ParseError):
            parse_program("Main = (link\n")

    def test_malformed_rule_reports_its_line(self):
        """Interface nodes missing on the right are reported at the rule"""
        text = "\nrule bad(x: list)\n  node 1 x\n=>\ninterface = {1}\n\nMain = bad\n"
        with pytest.raises(ParseError) as info:
            parse_program(text)
        assert info.value.line == 2

    def test_two_list_variables_on_the_left(self):
        text = "rule bad(x, y: list)\n  node 1 x:y\n=>\n  node 1 x\ninterface = {1}\nMain = bad\n"
        with pytest.raises(ParseError):
            parse_program(text)


class TestPrettyPrinter:
    """Test format_program and friends"""

    @pytest.mark.parametrize("path", CORPUS_PROGRAMS, ids=lambda p: p.parent.name)
    def test_corpus_round_trip(self, path):
        program = load_program(path)
        text = format_program(program)
        assert parse_program(text) == program, f"{path} does not round-trip"
        assert format_program(parse_program(text)) == text, "printing must be a fixed point"

    @pytest.mark.parametrize(
        "text",
        [
            "if a then (if b then c else d)",
            "(if a then b) or c",
            "(a or b)!",
            "try a then b else c",
            "a; (b; c); d",
            "(try a)!",
            "{a, b} or {}",
            "if (a; b) then c",
        ],
    )
    def test_command_round_trip(self, text):
        command = parse_command(text)
        assert parse_command(format_command(command)) == command

    def test_expression_precedence(self):
        assert format_expr(Arith("-", IntLit(1), Arith("-", IntLit(2), IntLit(3)))) == "1 - (2 - 3)"
        assert format_expr(Arith("*", Arith("+", Var("a"), IntLit(1)), Var("b"))) == "(a + 1) * b"
        assert format_expr(Concat((Var("x"), Arith("+", Var("i"), IntLit(1))))) == "x:i + 1"
        assert format_expr(Arith("*", Var("x"), IntLit(-3))) == "x * (-3)"
        assert format_expr(Neg(Var("x"))) == "-x"

    def test_with_main(self):
        program = parse_program(LINK + "\nMain = link!\n")
        variant = with_main(program, "link or skip")
        assert variant.main.body == Choice(RuleSetCall(("link",)), Skip())
        assert variant.rules == program.rules


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
