"""
Program syntax
Grammar, abstract syntax tree, parser and pretty printer for graph programs
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from host_graph import GraphError, Mark, format_atom, id_sort_key
from rules import (
    EMPTY,
    TRUE,
    And,
    Arith,
    BoolLit,
    Compare,
    Concat,
    Degree,
    EdgeTest,
    EmptyList,
    IntLit,
    Neg,
    Not,
    Or,
    Rule,
    RuleEdge,
    RuleError,
    RuleGraph,
    RuleNode,
    StrLit,
    TypeTest,
    Var,
    concat,
)

GRAMMAR = r"""
start: decl+

?decl: rule_decl
     | proc_decl
     | main_decl

main_decl: "Main" "=" comseq
proc_decl: NAME "=" [locals] comseq
locals: "[" (rule_decl | proc_decl)+ "]"

comseq: command (";" command)*

?command: or_cmd
?or_cmd: loop_cmd
       | or_cmd "or" loop_cmd -> choice
?loop_cmd: simple
         | loop_cmd "!" -> loop
?simple: NAME -> call
       | "{" [name_list] "}" -> rule_set
       | "if" or_cmd "then" or_cmd ["else" or_cmd] -> if_cmd
       | "try" or_cmd ["then" or_cmd] ["else" or_cmd] -> try_cmd
       | "(" comseq ")"
       | "break" -> break_cmd
       | "skip" -> skip_cmd
       | "fail" -> fail_cmd
name_list: NAME ("," NAME)*

rule_decl: "rule" NAME "(" [var_groups] ")" rule_graph "=>" rule_graph "interface" "=" "{" [id_list] "}" ["where" condition]
var_groups: var_group (";" var_group)*
var_group: NAME ("," NAME)* ":" var_type
!var_type: "int" | "string" | "atom" | "list"
rule_graph: (node_item | edge_item)*
node_item: "node" item_id expr [MARK]
edge_item: "edge" item_id item_id item_id expr [MARK]
id_list: item_id ("," item_id)*
?item_id: NAME | INTEGER

?condition: cond_and
          | condition "or" cond_and -> cond_or
?cond_and: cond_not
         | cond_and "and" cond_not -> cond_and
?cond_not: "not" cond_not -> cond_not
         | cond_atom
?cond_atom: "true" -> cond_true
          | "false" -> cond_false
          | expr "=" expr -> cmp_eq
          | expr "!=" expr -> cmp_ne
          | expr "<" expr -> cmp_lt
          | expr "<=" expr -> cmp_le
          | expr ">" expr -> cmp_gt
          | expr ">=" expr -> cmp_ge
          | "edge" "(" item_id "," item_id ["," expr] ")" -> edge_test
          | type_name "(" NAME ")" -> type_test
          | "(" condition ")"
!type_name: "int" | "string" | "atom"

?expr: sum
     | expr ":" sum -> concat
?sum: product
    | sum "+" product -> add
    | sum "-" product -> sub
?product: unary
        | product "*" unary -> mul
        | product "/" unary -> div
?unary: primary
      | "-" unary -> neg
?primary: NAME -> var
        | INTEGER -> int_lit
        | STRLIT -> str_lit
        | "empty" -> empty
        | "indegree" "(" item_id ")" -> indegree
        | "outdegree" "(" item_id ")" -> outdegree
        | "(" expr ")"

MARK: /#(red|green|blue|grey|dashed)\b/
NAME: /[A-Za-z_][A-Za-z0-9_]*/
INTEGER: /\d+/
STRLIT: /"[^"\n]*"/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""


class ParseError(Exception):
    """Syntax or declaration error, rendered as file:line:col: message"""

    def __init__(self, message, line=None, column=None, expected=(), path=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        self.path = path

    def __str__(self):
        where = f"{self.path or '<program>'}:{self.line or 0}:{self.column or 0}"
        text = f"{where}: {self.message}"
        if self.expected:
            text += f" (expected one of: {', '.join(sorted(self.expected))})"
        return text


class DuplicateDeclaration(ParseError):
    pass


class MissingMain(ParseError):
    pass


# ---------- Commands ----------


@dataclass(frozen=True)
class RuleSetCall:
    names: tuple


@dataclass(frozen=True)
class ProcCall:
    name: str


@dataclass(frozen=True)
class If:
    condition: object
    then: Optional[object] = None
    else_: Optional[object] = None


@dataclass(frozen=True)
class Try:
    condition: object
    then: Optional[object] = None
    else_: Optional[object] = None


@dataclass(frozen=True)
class Loop:
    body: object


@dataclass(frozen=True)
class Choice:
    left: object
    right: object


@dataclass(frozen=True)
class Seq:
    commands: tuple


@dataclass(frozen=True)
class Break:
    pass


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class FailCmd:
    pass


# ---------- Declarations ----------


@dataclass(frozen=True)
class RuleDecl:
    rule: Rule
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def name(self):
        return self.rule.name


@dataclass(frozen=True)
class ProcDecl:
    name: str
    locals: tuple
    body: object
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MainDecl:
    body: object
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ProgramAST:
    declarations: tuple

    @property
    def main(self):
        return next(d for d in self.declarations if isinstance(d, MainDecl))

    @property
    def rules(self):
        return {d.name: d.rule for d in self.declarations if isinstance(d, RuleDecl)}

    @property
    def procedures(self):
        return {d.name: d for d in self.declarations if isinstance(d, ProcDecl)}


def _seq(commands):
    commands = tuple(commands)
    return commands[0] if len(commands) == 1 else Seq(commands)


def _comparison(op):
    def build(self, left, right):
        return Compare(op, left, right)

    return build


def _arith(op):
    def build(self, left, right):
        return Arith(op, left, right)

    return build


@v_args(inline=True)
class _ToAst(Transformer):
    """Turns the lark parse tree into ProgramAST values"""

    def __init__(self, path=None):
        super().__init__()
        self.path = path

    # tokens
    def NAME(self, token):
        return str(token)

    def INTEGER(self, token):
        return int(token)

    def STRLIT(self, token):
        return str(token)[1:-1]

    def MARK(self, token):
        return Mark(str(token)[1:])

    # declarations
    def start(self, *decls):
        return list(decls)

    @v_args(meta=True)
    def main_decl(self, meta, children):
        return MainDecl(children[0], meta.line, meta.column)

    @v_args(meta=True)
    def proc_decl(self, meta, children):
        name, local_decls, body = children
        return ProcDecl(name, tuple(local_decls or ()), body, meta.line, meta.column)

    def locals(self, *decls):
        return list(decls)

    @v_args(meta=True)
    def rule_decl(self, meta, children):
        name, variables, left, right, interface, condition = children
        try:
            rule = Rule(
                name=name,
                variables=variables or {},
                left=left,
                right=right,
                interface=frozenset(str(i) for i in (interface or ())),
                condition=condition if condition is not None else TRUE,
            )
        except (RuleError, GraphError) as e:
            raise ParseError(str(e), meta.line, meta.column, path=self.path) from e
        return RuleDecl(rule, meta.line, meta.column)

    def var_groups(self, *groups):
        variables = {}
        for group in groups:
            variables.update(group)
        return variables

    def var_group(self, *children):
        *names, var_type = children
        return {name: var_type for name in names}

    def var_type(self, token):
        return str(token)

    def type_name(self, token):
        return str(token)

    def rule_graph(self, *items):
        nodes = tuple(i for i in items if isinstance(i, RuleNode))
        edges = tuple(i for i in items if isinstance(i, RuleEdge))
        return RuleGraph(nodes, edges)

    def node_item(self, name, label, mark):
        return RuleNode(str(name), label, mark or Mark.NONE)

    def edge_item(self, name, source, target, label, mark):
        return RuleEdge(str(name), str(source), str(target), label, mark or Mark.NONE)

    def id_list(self, *ids):
        return [str(i) for i in ids]

    # commands
    def comseq(self, *commands):
        return _seq(commands)

    def choice(self, left, right):
        return Choice(left, right)

    def loop(self, body):
        return Loop(body)

    def call(self, name):
        return ProcCall(name)

    def rule_set(self, names):
        return RuleSetCall(tuple(names or ()))

    def name_list(self, *names):
        return list(names)

    def if_cmd(self, condition, then, else_):
        return If(condition, then, else_)

    def try_cmd(self, condition, then, else_):
        return Try(condition, then, else_)

    def break_cmd(self):
        return Break()

    def skip_cmd(self):
        return Skip()

    def fail_cmd(self):
        return FailCmd()

    # conditions
    def cond_or(self, left, right):
        return Or(left, right)

    def cond_and(self, left, right):
        return And(left, right)

    def cond_not(self, operand):
        return Not(operand)

    def cond_true(self):
        return BoolLit(True)

    def cond_false(self):
        return BoolLit(False)

    cmp_eq = _comparison("=")
    cmp_ne = _comparison("!=")
    cmp_lt = _comparison("<")
    cmp_le = _comparison("<=")
    cmp_gt = _comparison(">")
    cmp_ge = _comparison(">=")

    def edge_test(self, source, target, label):
        return EdgeTest(str(source), str(target), label)

    def type_test(self, kind, name):
        return TypeTest(kind, name)

    # expressions
    def concat(self, left, right):
        return concat(left, right)

    add = _arith("+")
    sub = _arith("-")
    mul = _arith("*")
    div = _arith("/")

    def neg(self, operand):
        if isinstance(operand, IntLit):
            return IntLit(-operand.value)
        return Neg(operand)

    def var(self, name):
        return Var(name)

    def int_lit(self, value):
        return IntLit(value)

    def str_lit(self, value):
        return StrLit(value)

    def empty(self):
        return EMPTY

    def indegree(self, node):
        return Degree("indegree", str(node))

    def outdegree(self, node):
        return Degree("outdegree", str(node))


_parser = Lark(GRAMMAR, parser="lalr", start=["start", "comseq"], propagate_positions=True, maybe_placeholders=True)


def _check_scope(decls, path):
    """Reject duplicate names within one declaration level"""
    seen = {}
    for decl in decls:
        name = "Main" if isinstance(decl, MainDecl) else decl.name
        if name in seen:
            raise DuplicateDeclaration(
                f"{name} is declared more than once (first on line {seen[name]})", decl.line, decl.column, path=path
            )
        seen[name] = decl.line


def _resolve(command, scopes):
    """Turn bare names that denote rules into singleton rule-set calls"""
    if isinstance(command, ProcCall):
        for scope in scopes:
            if command.name in scope:
                if scope[command.name] == "rule":
                    return RuleSetCall((command.name,))
                return command
        return command
    if isinstance(command, Seq):
        return Seq(tuple(_resolve(c, scopes) for c in command.commands))
    if isinstance(command, (If, Try)):
        parts = [None if c is None else _resolve(c, scopes) for c in (command.condition, command.then, command.else_)]
        return type(command)(*parts)
    if isinstance(command, Loop):
        return Loop(_resolve(command.body, scopes))
    if isinstance(command, Choice):
        return Choice(_resolve(command.left, scopes), _resolve(command.right, scopes))
    return command


def _scope_of(decls):
    return {d.name: ("rule" if isinstance(d, RuleDecl) else "proc") for d in decls if not isinstance(d, MainDecl)}


def _resolve_decls(decls, outer, path):
    _check_scope(decls, path)
    scopes = [_scope_of(decls), *outer]
    resolved = []
    for decl in decls:
        if isinstance(decl, ProcDecl):
            local_decls = tuple(_resolve_decls(decl.locals, scopes, path))
            inner = [_scope_of(local_decls), *scopes]
            resolved.append(ProcDecl(decl.name, local_decls, _resolve(decl.body, inner), decl.line, decl.column))
        elif isinstance(decl, MainDecl):
            resolved.append(MainDecl(_resolve(decl.body, scopes), decl.line, decl.column))
        else:
            resolved.append(decl)
    return resolved


def _parse_tree(text, start, path):
    try:
        tree = _parser.parse(text, start=start)
    except UnexpectedToken as e:
        found = "end of input" if e.token.type == "$END" else repr(str(e.token))
        raise ParseError(f"unexpected {found}", e.line, e.column, e.expected, path) from None
    except UnexpectedCharacters as e:
        raise ParseError(f"unexpected character {text[e.pos_in_stream]!r}", e.line, e.column, e.allowed or (), path) from None
    except UnexpectedEOF as e:
        raise ParseError("unexpected end of input", None, None, e.expected, path) from None
    except UnexpectedInput as e:
        raise ParseError(str(e), getattr(e, "line", None), getattr(e, "column", None), path=path) from None

    try:
        return _ToAst(path).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc from None
        raise


def parse_program(text, path=None):
    """
    Parse program text into a ProgramAST

    Raises:
        ParseError: syntax errors, with line, column and the expected tokens
        DuplicateDeclaration: a name (or Main) declared twice in one scope
        MissingMain: no Main declaration
    """
    decls = _parse_tree(text, "start", path)

    if not any(isinstance(d, MainDecl) for d in decls):
        raise MissingMain("program has no Main declaration", 1, 1, path=path)
    return ProgramAST(tuple(_resolve_decls(decls, [], path)))


def load_program(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_program(f.read(), path=str(path))


def parse_command(text):
    """Parse a bare command sequence such as `link!; {a, b}`"""
    return _parse_tree(text, "comseq", None)


def with_main(program, command):
    """
    Same declarations with a different Main

    Args:
        program: ProgramAST
        command: command text or an already parsed command
    """
    if isinstance(command, str):
        command = parse_command(command)
    decls = [d for d in program.declarations if not isinstance(d, MainDecl)]
    body = _resolve(command, [_scope_of(decls)])
    return ProgramAST((*decls, MainDecl(body)))


# ---------- Pretty printing ----------

_EXPR_PREC = {Concat: 1, Arith: 2, Neg: 4}


def _expr_prec(expr):
    if isinstance(expr, Arith):
        return 2 if expr.op in "+-" else 3
    return _EXPR_PREC.get(type(expr), 5)


def format_expr(expr, min_prec=0):
    prec = _expr_prec(expr)
    if isinstance(expr, Var):
        text = expr.name
    elif isinstance(expr, IntLit):
        text = str(expr.value)
    elif isinstance(expr, StrLit):
        text = format_atom(expr.value)
    elif isinstance(expr, EmptyList):
        text = "empty"
    elif isinstance(expr, Concat):
        text = ":".join(format_expr(p, 2) for p in expr.parts)
    elif isinstance(expr, Neg):
        text = "-" + format_expr(expr.operand, 4)
    elif isinstance(expr, Arith):
        text = f"{format_expr(expr.left, prec)} {expr.op} {format_expr(expr.right, prec + 1)}"
    elif isinstance(expr, Degree):
        text = f"{expr.kind}({expr.node})"
    else:
        raise TypeError(f"not an expression: {expr!r}")
    if prec < min_prec or (isinstance(expr, IntLit) and expr.value < 0 and min_prec >= 4):
        return f"({text})"
    return text


def _cond_prec(cond):
    if isinstance(cond, Or):
        return 1
    if isinstance(cond, And):
        return 2
    if isinstance(cond, Not):
        return 3
    return 4


def format_condition(cond, min_prec=0):
    prec = _cond_prec(cond)
    if isinstance(cond, Or):
        text = f"{format_condition(cond.left, 1)} or {format_condition(cond.right, 2)}"
    elif isinstance(cond, And):
        text = f"{format_condition(cond.left, 2)} and {format_condition(cond.right, 3)}"
    elif isinstance(cond, Not):
        text = f"not {format_condition(cond.operand, 3)}"
    elif isinstance(cond, BoolLit):
        text = "true" if cond.value else "false"
    elif isinstance(cond, Compare):
        text = f"{format_expr(cond.left)} {cond.op} {format_expr(cond.right)}"
    elif isinstance(cond, TypeTest):
        text = f"{cond.kind}({cond.var})"
    elif isinstance(cond, EdgeTest):
        extra = "" if cond.label is None else f", {format_expr(cond.label)}"
        text = f"edge({cond.source}, {cond.target}{extra})"
    else:
        raise TypeError(f"not a condition: {cond!r}")
    return f"({text})" if prec < min_prec else text


def _wrap(text):
    return f"({text})"


def format_command(command, context="top"):
    """
    Render a command; context is one of top, seq, branch, left, right, body

    `;` needs parentheses anywhere but the top, if/try anywhere but a
    sequence: an if/try would otherwise swallow a following `or`, `!` or `else`.
    """
    if isinstance(command, Seq):
        text = "; ".join(format_command(c, "seq") for c in command.commands)
        return text if context == "top" else _wrap(text)
    if isinstance(command, Choice):
        text = f"{format_command(command.left, 'left')} or {format_command(command.right, 'right')}"
        return _wrap(text) if context in ("left", "body", "right") else text
    if isinstance(command, Loop):
        return f"{format_command(command.body, 'body')}!"
    if isinstance(command, (If, Try)):
        keyword = "if" if isinstance(command, If) else "try"
        text = f"{keyword} {format_command(command.condition, 'branch')}"
        if command.then is not None:
            text += f" then {format_command(command.then, 'branch')}"
        if command.else_ is not None:
            text += f" else {format_command(command.else_, 'branch')}"
        return text if context in ("top", "seq") else _wrap(text)
    if isinstance(command, RuleSetCall):
        if len(command.names) == 1:
            return command.names[0]
        return "{" + ", ".join(command.names) + "}"
    if isinstance(command, ProcCall):
        return command.name
    if isinstance(command, Break):
        return "break"
    if isinstance(command, Skip):
        return "skip"
    if isinstance(command, FailCmd):
        return "fail"
    raise TypeError(f"not a command: {command!r}")


def _format_item(item):
    mark = "" if item.mark is Mark.NONE else f" #{item.mark.value}"
    if isinstance(item, RuleNode):
        return f"  node {item.name} {format_expr(item.label)}{mark}"
    return f"  edge {item.name} {item.source} {item.target} {format_expr(item.label)}{mark}"


def format_rule(rule):
    groups = []
    for name, var_type in rule.variables.items():
        if groups and groups[-1][1] == var_type:
            groups[-1][0].append(name)
        else:
            groups.append(([name], var_type))
    params = "; ".join(f"{', '.join(names)}: {t.value}" for names, t in groups)
    lines = [f"rule {rule.name}({params})"]
    lines += [_format_item(i) for i in (*rule.left.nodes, *rule.left.edges)]
    lines.append("=>")
    lines += [_format_item(i) for i in (*rule.right.nodes, *rule.right.edges)]
    lines.append("interface = {" + ", ".join(sorted(rule.interface, key=id_sort_key)) + "}")
    if rule.condition != TRUE:
        lines.append(f"where {format_condition(rule.condition)}")
    return "\n".join(lines)


def _format_decl(decl):
    if isinstance(decl, RuleDecl):
        return format_rule(decl.rule)
    if isinstance(decl, MainDecl):
        return f"Main = {format_command(decl.body)}"
    if decl.locals:
        inner = "\n\n".join(_format_decl(d) for d in decl.locals)
        return f"{decl.name} = [\n{inner}\n]\n{format_command(decl.body)}"
    return f"{decl.name} = {format_command(decl.body)}"


def format_program(program):
    """Normalised program text; parse_program(format_program(p)) == p"""
    return "\n\n".join(_format_decl(d) for d in program.declarations) + "\n"
