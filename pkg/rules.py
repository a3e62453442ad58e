"""
Conditional graph-transformation rules
Expressions, conditions, injective matching under the dangling condition, and rule application
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from host_graph import (
    EDGE_MARKS,
    INT_MAX,
    INT_MIN,
    NODE_MARKS,
    Edge,
    HostGraph,
    IllegalMark,
    Label,
    Mark,
    fresh_id,
    id_sort_key,
)
from outcome import FAIL, Success


class RuleError(Exception):
    """Base class for malformed rules"""


class IllegalPattern(RuleError):
    pass


class UndeclaredVariable(RuleError):
    pass


class MalformedRule(RuleError):
    pass


class EvaluationError(Exception):
    """Runtime error while evaluating a label or condition"""


class DivisionByZero(EvaluationError):
    pass


class ArithmeticOverflow(EvaluationError):
    pass


class TypeMismatch(EvaluationError):
    pass


class UnboundVariable(EvaluationError):
    pass


class VarType(str, Enum):
    INT = "int"
    STRING = "string"
    ATOM = "atom"
    LIST = "list"


# ---------- Expressions ----------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class EmptyList:
    pass


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Arith:
    op: str  # one of + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Degree:
    kind: str  # indegree | outdegree
    node: str


EMPTY = EmptyList()


def concat(*parts):
    """Build a flattened concatenation, dropping `empty` parts"""
    flat = []
    for part in parts:
        if isinstance(part, Concat):
            flat.extend(part.parts)
        elif not isinstance(part, EmptyList):
            flat.append(part)
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    return Concat(tuple(flat))


# ---------- Conditions ----------


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Compare:
    op: str  # = != < <= > >=
    left: object
    right: object


@dataclass(frozen=True)
class TypeTest:
    kind: str  # int | string | atom
    var: str


@dataclass(frozen=True)
class EdgeTest:
    source: str
    target: str
    label: Optional[object] = None


@dataclass(frozen=True)
class Not:
    operand: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


TRUE = BoolLit(True)


def expr_variables(expr):
    """Names of variables occurring in an expression or condition"""
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, TypeTest):
        return {expr.var}
    if isinstance(expr, Concat):
        return set().union(*(expr_variables(p) for p in expr.parts))
    if isinstance(expr, (Arith, Compare, And, Or)):
        return expr_variables(expr.left) | expr_variables(expr.right)
    if isinstance(expr, (Neg, Not)):
        return expr_variables(expr.operand)
    if isinstance(expr, EdgeTest) and expr.label is not None:
        return expr_variables(expr.label)
    return set()


def node_references(expr):
    """Left-graph node names referred to by degree functions and edge predicates"""
    if isinstance(expr, Degree):
        return {expr.node}
    if isinstance(expr, EdgeTest):
        refs = {expr.source, expr.target}
        if expr.label is not None:
            refs |= node_references(expr.label)
        return refs
    if isinstance(expr, Concat):
        return set().union(*(node_references(p) for p in expr.parts))
    if isinstance(expr, (Arith, Compare, And, Or)):
        return node_references(expr.left) | node_references(expr.right)
    if isinstance(expr, (Neg, Not)):
        return node_references(expr.operand)
    return set()


# ---------- Evaluation ----------


def _checked(value):
    if not INT_MIN <= value <= INT_MAX:
        raise ArithmeticOverflow(f"integer {value} outside the 64-bit signed range")
    return value


def _as_int(value):
    if len(value) == 1 and isinstance(value[0], int) and not isinstance(value[0], bool):
        return value[0]
    raise TypeMismatch(f"expected an integer, got list {list(value)}")


def _divide(a, b):
    if b == 0:
        raise DivisionByZero("division by zero")
    quotient = abs(a) // abs(b)
    return quotient if (a < 0) == (b < 0) else -quotient


def eval_expr(assignment, graph, node_map, expr):
    """
    Evaluate an expression to a list value (a tuple of atoms)

    Args:
        assignment: variable name -> list value
        graph: host graph, needed only by degree functions
        node_map: left node name -> host node id, needed only by degree functions
        expr: expression tree
    """
    if isinstance(expr, Var):
        if expr.name not in assignment:
            raise UnboundVariable(f"variable {expr.name} is not bound")
        return assignment[expr.name]
    if isinstance(expr, IntLit):
        return (_checked(expr.value),)
    if isinstance(expr, StrLit):
        return (expr.value,)
    if isinstance(expr, EmptyList):
        return ()
    if isinstance(expr, Concat):
        value = ()
        for part in expr.parts:
            value += eval_expr(assignment, graph, node_map, part)
        return value
    if isinstance(expr, Neg):
        return (_checked(-_as_int(eval_expr(assignment, graph, node_map, expr.operand))),)
    if isinstance(expr, Arith):
        a = _as_int(eval_expr(assignment, graph, node_map, expr.left))
        b = _as_int(eval_expr(assignment, graph, node_map, expr.right))
        if expr.op == "+":
            return (_checked(a + b),)
        if expr.op == "-":
            return (_checked(a - b),)
        if expr.op == "*":
            return (_checked(a * b),)
        if expr.op == "/":
            return (_checked(_divide(a, b)),)
        raise TypeMismatch(f"unknown operator {expr.op}")
    if isinstance(expr, Degree):
        if graph is None or node_map is None:
            raise TypeMismatch(f"{expr.kind}({expr.node}) needs a match")
        host_node = node_map[expr.node]
        edges = graph.in_edges(host_node) if expr.kind == "indegree" else graph.out_edges(host_node)
        return (len(edges),)
    raise TypeMismatch(f"not an expression: {expr!r}")


_COMPARISONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_condition(assignment, graph, node_map, cond):
    """Evaluate a where-clause against an assignment and the matched host graph"""
    if isinstance(cond, BoolLit):
        return cond.value
    if isinstance(cond, Not):
        return not eval_condition(assignment, graph, node_map, cond.operand)
    if isinstance(cond, And):
        return eval_condition(assignment, graph, node_map, cond.left) and eval_condition(
            assignment, graph, node_map, cond.right
        )
    if isinstance(cond, Or):
        return eval_condition(assignment, graph, node_map, cond.left) or eval_condition(
            assignment, graph, node_map, cond.right
        )
    if isinstance(cond, TypeTest):
        value = assignment.get(cond.var)
        if value is None:
            raise UnboundVariable(f"variable {cond.var} is not bound")
        if len(value) != 1:
            return False
        if cond.kind == "int":
            return isinstance(value[0], int)
        if cond.kind == "string":
            return isinstance(value[0], str)
        return True
    if isinstance(cond, EdgeTest):
        source, target = node_map[cond.source], node_map[cond.target]
        candidates = graph.edges_between(source, target)
        if cond.label is None:
            return bool(candidates)
        wanted = eval_expr(assignment, graph, node_map, cond.label)
        return any(graph.edges[e].label.values == wanted for e in candidates)
    if isinstance(cond, Compare):
        left = eval_expr(assignment, graph, node_map, cond.left)
        right = eval_expr(assignment, graph, node_map, cond.right)
        if cond.op == "=":
            return left == right
        if cond.op == "!=":
            return left != right
        return _COMPARISONS[cond.op](_as_int(left), _as_int(right))
    raise TypeMismatch(f"not a condition: {cond!r}")


# ---------- Label matching ----------


def _pattern_parts(pattern):
    if isinstance(pattern, Concat):
        return pattern.parts
    if isinstance(pattern, EmptyList):
        return ()
    return (pattern,)


def check_pattern(pattern, variables):
    """Left labels are concatenations of variables and literals with at most one list variable"""
    list_vars = 0
    for part in _pattern_parts(pattern):
        if isinstance(part, Neg) and isinstance(part.operand, IntLit):
            continue
        if isinstance(part, Var):
            if part.name not in variables:
                raise UndeclaredVariable(f"variable {part.name} is not declared")
            if variables[part.name] is VarType.LIST:
                list_vars += 1
            continue
        if not isinstance(part, (IntLit, StrLit, EmptyList)):
            raise IllegalPattern(f"left-hand labels may only contain variables and literals, got {part!r}")
    if list_vars > 1:
        raise IllegalPattern("a left-hand label may contain at most one list variable")


def _atom_fits(atom, var_type):
    if var_type is VarType.INT:
        return isinstance(atom, int)
    if var_type is VarType.STRING:
        return isinstance(atom, str)
    return True


def match_label(pattern, host, variables, bound=None):
    """
    All assignments making pattern evaluate to the host list

    Args:
        pattern: left-hand label expression
        host: tuple of atoms
        variables: declared variable types of the rule
        bound: assignment from previously matched items; bound variables act as literals

    Returns:
        list with at most one assignment (an extension of bound)
    """
    check_pattern(pattern, variables)
    bound = dict(bound or {})
    parts = []
    for part in _pattern_parts(pattern):
        if isinstance(part, Neg):
            parts.append(("lit", (-part.operand.value,)))
        elif isinstance(part, IntLit):
            parts.append(("lit", (part.value,)))
        elif isinstance(part, StrLit):
            parts.append(("lit", (part.value,)))
        elif isinstance(part, EmptyList):
            continue
        elif part.name in bound:
            parts.append(("lit", bound[part.name]))
        elif variables[part.name] is VarType.LIST:
            parts.append(("list", part.name))
        else:
            parts.append(("atom", part.name))

    fixed = sum(len(v) if kind == "lit" else 1 for kind, v in parts if kind != "list")
    has_list = any(kind == "list" for kind, _ in parts)
    list_len = len(host) - fixed
    if list_len < 0 or (not has_list and list_len != 0):
        return []

    pos = 0
    for kind, value in parts:
        if kind == "lit":
            if host[pos : pos + len(value)] != tuple(value):
                return []
            pos += len(value)
        elif kind == "list":
            bound[value] = host[pos : pos + list_len]
            pos += list_len
        else:
            atom = host[pos]
            if not _atom_fits(atom, variables[value]):
                return []
            if value in bound and bound[value] != (atom,):
                return []
            bound[value] = (atom,)
            pos += 1
    return [bound]


# ---------- Rules ----------


@dataclass(frozen=True)
class RuleNode:
    name: str
    label: object = EMPTY
    mark: Mark = Mark.NONE


@dataclass(frozen=True)
class RuleEdge:
    name: str
    source: str
    target: str
    label: object = EMPTY
    mark: Mark = Mark.NONE


@dataclass(frozen=True)
class RuleGraph:
    nodes: tuple = ()
    edges: tuple = ()

    def node(self, name):
        for n in self.nodes:
            if n.name == name:
                return n
        return None

    def edge(self, name):
        for e in self.edges:
            if e.name == name:
                return e
        return None

    @property
    def node_names(self):
        return [n.name for n in self.nodes]


@dataclass(frozen=True)
class Rule:
    """Conditional rule: left and right graphs over expressions, a node interface and a where-clause"""

    name: str
    variables: Mapping = field(default_factory=dict)
    left: RuleGraph = RuleGraph()
    right: RuleGraph = RuleGraph()
    interface: frozenset = frozenset()
    condition: object = TRUE

    def __post_init__(self):
        object.__setattr__(self, "variables", {k: VarType(v) for k, v in dict(self.variables).items()})
        object.__setattr__(self, "interface", frozenset(self.interface))
        check_rule(self)

    def __hash__(self):
        return hash(self.name)

    @property
    def preserved_edges(self):
        """Left edge names kept (and possibly relabelled) by the rule"""
        kept = set()
        for edge in self.left.edges:
            other = self.right.edge(edge.name)
            if (
                other is not None
                and (other.source, other.target) == (edge.source, edge.target)
                and edge.source in self.interface
                and edge.target in self.interface
            ):
                kept.add(edge.name)
        return kept

    @property
    def deleted_nodes(self):
        return [n.name for n in self.left.nodes if n.name not in self.interface]


def _check_graph(rule, side, graph):
    names = graph.node_names
    if len(set(names)) != len(names):
        raise MalformedRule(f"rule {rule.name}: duplicate node names on the {side}")
    edge_names = [e.name for e in graph.edges]
    if len(set(edge_names)) != len(edge_names):
        raise MalformedRule(f"rule {rule.name}: duplicate edge names on the {side}")
    for node in graph.nodes:
        if node.mark not in NODE_MARKS:
            raise IllegalMark(f"rule {rule.name}: node {node.name} cannot be {node.mark.value}")
    for edge in graph.edges:
        if edge.mark not in EDGE_MARKS:
            raise IllegalMark(f"rule {rule.name}: edge {edge.name} cannot be {edge.mark.value}")
        for end in (edge.source, edge.target):
            if end not in names:
                raise MalformedRule(f"rule {rule.name}: edge {edge.name} refers to unknown node {end}")


def check_rule(rule):
    """Static well-formedness checks; raises a RuleError subclass"""
    _check_graph(rule, "left", rule.left)
    _check_graph(rule, "right", rule.right)

    left_names = set(rule.left.node_names)
    right_names = set(rule.right.node_names)
    missing = rule.interface - (left_names & right_names)
    if missing:
        raise MalformedRule(f"rule {rule.name}: interface nodes {sorted(missing)} must occur on both sides")
    clash = (left_names & right_names) - rule.interface
    if clash:
        raise MalformedRule(f"rule {rule.name}: nodes {sorted(clash)} occur on both sides but not in the interface")

    left_vars = set()
    for item in (*rule.left.nodes, *rule.left.edges):
        check_pattern(item.label, rule.variables)
        left_vars |= expr_variables(item.label)

    used = set(left_vars)
    for item in (*rule.right.nodes, *rule.right.edges):
        used |= expr_variables(item.label)
        if node_references(item.label) - left_names:
            raise MalformedRule(f"rule {rule.name}: degree functions must refer to left nodes")
    used |= expr_variables(rule.condition)
    undeclared = used - set(rule.variables)
    if undeclared:
        raise UndeclaredVariable(f"rule {rule.name}: undeclared variables {sorted(undeclared)}")
    unbound = used - left_vars
    if unbound:
        raise MalformedRule(f"rule {rule.name}: variables {sorted(unbound)} do not occur in a left label")
    if node_references(rule.condition) - left_names:
        raise MalformedRule(f"rule {rule.name}: edge and degree predicates must refer to left nodes")


@dataclass(frozen=True)
class Match:
    """Injective node/edge map from a rule's left graph plus the variable assignment"""

    node_map: Mapping
    edge_map: Mapping
    assignment: Mapping

    def host_nodes(self):
        return list(self.node_map.values())

    def host_edges(self):
        return list(self.edge_map.values())


def _plan(rule):
    """Search order: each left node, followed by the left edges it completes"""
    steps = []
    placed = set()
    pending = list(rule.left.edges)
    for node in rule.left.nodes:
        anchor = None
        for edge in rule.left.edges:
            if edge.source in placed and edge.target == node.name:
                anchor = ("out", edge.source)
                break
            if edge.target in placed and edge.source == node.name:
                anchor = ("in", edge.target)
                break
        steps.append(("node", node, anchor))
        placed.add(node.name)
        ready = [e for e in pending if e.source in placed and e.target in placed]
        for edge in ready:
            steps.append(("edge", edge, None))
            pending.remove(edge)
    return steps


def _node_candidates(graph, ordered_nodes, anchor, node_map):
    if anchor is None:
        return ordered_nodes
    direction, other = anchor
    host = node_map[other]
    if direction == "out":
        found = {graph.edges[e].target for e in graph.out_edges(host)}
    else:
        found = {graph.edges[e].source for e in graph.in_edges(host)}
    return sorted(found, key=id_sort_key)


def find_matches(rule, graph):
    """
    All matches of rule in graph

    Injective, structure-, label- and mark-preserving maps whose assignment
    satisfies the where-clause and the dangling condition, ordered by host ids.
    """
    plan = _plan(rule)
    ordered_nodes = sorted(graph.nodes, key=id_sort_key)
    deleted = rule.deleted_nodes
    found = []

    def extend(i, node_map, edge_map, assignment):
        if i == len(plan):
            matched_edges = set(edge_map.values())
            for name in deleted:
                if any(e not in matched_edges for e in graph.incident_edges(node_map[name])):
                    return
            if eval_condition(assignment, graph, node_map, rule.condition):
                found.append(Match(dict(node_map), dict(edge_map), dict(assignment)))
            return

        kind, item, anchor = plan[i]
        if kind == "node":
            used = set(node_map.values())
            for host in _node_candidates(graph, ordered_nodes, anchor, node_map):
                if host in used:
                    continue
                label = graph.nodes[host]
                if label.mark is not item.mark:
                    continue
                for extended in match_label(item.label, label.values, rule.variables, assignment):
                    node_map[item.name] = host
                    extend(i + 1, node_map, edge_map, extended)
                    del node_map[item.name]
        else:
            used = set(edge_map.values())
            candidates = graph.edges_between(node_map[item.source], node_map[item.target])
            for host in sorted(candidates, key=id_sort_key):
                if host in used:
                    continue
                label = graph.edges[host].label
                if label.mark is not item.mark:
                    continue
                for extended in match_label(item.label, label.values, rule.variables, assignment):
                    edge_map[item.name] = host
                    extend(i + 1, node_map, edge_map, extended)
                    del edge_map[item.name]

    extend(0, {}, {}, {})
    found.sort(
        key=lambda m: (
            tuple(id_sort_key(v) for v in m.node_map.values()),
            tuple(id_sort_key(e) for e in m.edge_map.values()),
        )
    )
    return found


def apply_match(rule, graph, match):
    """
    Apply rule at match and return the new graph (graph itself is unchanged)

    Deletes images of non-interface left items, relabels interface items and
    adds fresh items for the right-only ones. Right labels are evaluated on the
    graph as matched, so degree functions see the pre-application degrees.
    """
    node_map, edge_map = match.node_map, match.edge_map
    assignment = match.assignment
    preserved = rule.preserved_edges

    def evaluate(item):
        return Label(eval_expr(assignment, graph, node_map, item.label), item.mark)

    right_nodes = {n.name: evaluate(n) for n in rule.right.nodes}
    right_edges = {e.name: evaluate(e) for e in rule.right.edges}

    nodes = dict(graph.nodes)
    edges = dict(graph.edges)
    for edge in rule.left.edges:
        if edge.name not in preserved:
            del edges[edge_map[edge.name]]
    for name in rule.deleted_nodes:
        del nodes[node_map[name]]

    image = {}
    for node in rule.right.nodes:
        if node.name in rule.interface:
            host = node_map[node.name]
        else:
            host = fresh_id("n", nodes.keys() | graph.nodes.keys())
        nodes[host] = right_nodes[node.name]
        image[node.name] = host

    for edge in rule.right.edges:
        if edge.name in preserved:
            host = edge_map[edge.name]
        else:
            host = fresh_id("e", edges.keys() | graph.edges.keys())
        edges[host] = Edge(image[edge.source], image[edge.target], right_edges[edge.name])

    return HostGraph(nodes, edges)


def applications(rules, graph):
    """Every (rule, match) pair in rule order, then match order"""
    return [(rule, match) for rule in rules for match in find_matches(rule, graph)]


def apply_rule_set(rules, graph, chooser):
    """
    Call a rule set: apply one applicable (rule, match) picked by chooser

    Returns:
        Success carrying the new graph and the chosen step, or FAIL when no
        rule is applicable (always for the empty set)
    """
    candidates = applications(rules, graph)
    if not candidates:
        return FAIL
    rule, match = chooser(candidates)
    return Success(apply_match(rule, graph, match), step=(rule, match))
