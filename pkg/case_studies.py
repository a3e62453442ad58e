"""
Case studies
Metrics, independent oracles, series-parallel terms and graph generators for the corpus programs
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from itertools import product

import networkx as nx

from host_graph import (
    EMPTY_LABEL,
    Edge,
    HostGraph,
    Label,
    build_graph,
    canonical_key,
    fresh_id,
    isomorphic,
    to_networkx,
)
from interpreter import DEFAULT_BRANCH_CAP, StateSpaceLimit
from rules import applications, apply_match, find_matches


class UncolouredNode(Exception):
    """A node label does not end in an integer colour"""


# ---------- Metrics ----------


def nonedge_count(graph):
    """Ordered node pairs (v, w), v = w included, with no edge from v to w"""
    linked = {(e.source, e.target) for e in graph.edges.values()}
    return len(graph.nodes) ** 2 - len(linked)


def colour(graph, node_id):
    """Trailing integer of the node label"""
    values = graph.nodes[node_id].values
    if not values or not isinstance(values[-1], int):
        raise UncolouredNode(f"node {node_id} has label {graph.nodes[node_id]} without an integer colour")
    return values[-1]


def colours(graph):
    return {v: colour(graph, v) for v in graph.nodes}


def colour_sum(graph):
    return sum(colours(graph).values())


def colours_set(graph):
    return set(colours(graph).values())


# ---------- Oracles ----------


def _plain_digraph(graph):
    return nx.DiGraph(to_networkx(graph))


def oracle_transitive_closure(graph):
    """Input plus an unlabelled edge v -> w for every v != w joined by a path but not by an edge"""
    digraph = _plain_digraph(graph)
    edges = dict(graph.edges)
    linked = {(e.source, e.target) for e in graph.edges.values()}
    for v in graph.nodes:
        for w in sorted(nx.descendants(digraph, v)):
            if w != v and (v, w) not in linked:
                edges[fresh_id("e", edges)] = Edge(v, w, EMPTY_LABEL)
                linked.add((v, w))
    return HostGraph(graph.nodes, edges)


def oracle_is_cyclic(graph):
    """True iff the graph has a directed cycle; a loop counts"""
    return not nx.is_directed_acyclic_graph(_plain_digraph(graph))


def check_colouring(original, result):
    """
    Result is original with every node label x turned into x:i and no edge joining equal colours

    Nodes, edges, marks and edge labels must be otherwise untouched. Loops make
    a graph uncolourable, so they always fail the check.
    """
    if set(original.nodes) != set(result.nodes) or set(original.edges) != set(result.edges):
        return False
    for v, label in original.nodes.items():
        got = result.nodes[v]
        if got.mark is not label.mark or got.values[:-1] != label.values:
            return False
        if len(got.values) != len(label.values) + 1 or not isinstance(got.values[-1], int):
            return False
        if got.values[-1] < 1:
            return False
    for edge_id, edge in original.edges.items():
        if result.edges[edge_id] != edge:
            return False
        if colour(result, edge.source) == colour(result, edge.target):
            return False
    return True


# ---------- Series-parallel terms ----------


@dataclass(frozen=True)
class SPEdge:
    pass


@dataclass(frozen=True)
class Series:
    first: object
    second: object


@dataclass(frozen=True)
class Parallel:
    first: object
    second: object


def edge_count(term):
    if isinstance(term, SPEdge):
        return 1
    return edge_count(term.first) + edge_count(term.second)


@dataclass(frozen=True)
class SPGraph:
    term: object
    graph: HostGraph
    source: str
    sink: str


def realize(term):
    """
    Host graph of a term with its source and sink

    An edge is two nodes and one edge; Series merges the first sink with the
    second source; Parallel merges sources with sources and sinks with sinks.
    """
    nodes = {"v1": EMPTY_LABEL, "v2": EMPTY_LABEL}
    edges = {}

    def place(t, source, sink):
        if isinstance(t, SPEdge):
            edges[f"e{len(edges) + 1}"] = Edge(source, sink, EMPTY_LABEL)
        elif isinstance(t, Series):
            middle = f"v{len(nodes) + 1}"
            nodes[middle] = EMPTY_LABEL
            place(t.first, source, middle)
            place(t.second, middle, sink)
        else:
            place(t.first, source, sink)
            place(t.second, source, sink)

    place(term, "v1", "v2")
    return SPGraph(term, HostGraph(nodes, edges), "v1", "v2")


def random_sp_term(rng, edges):
    """Random term with exactly `edges` edge leaves"""
    if edges == 1:
        return SPEdge()
    left = rng.randint(1, edges - 1)
    kind = Series if rng.randrange(2) == 0 else Parallel
    return kind(random_sp_term(rng, left), random_sp_term(rng, edges - left))


def gen_series_parallel(seed, max_edges):
    """
    Seeded random series-parallel graph

    Returns:
        (term, HostGraph) with between 1 and max_edges unlabelled edges
    """
    if max_edges < 1:
        raise ValueError(f"max_edges must be at least 1, got {max_edges}")
    rng = random.Random(seed)
    term = random_sp_term(rng, rng.randint(1, max_edges))
    return term, realize(term).graph


def bridge_graph():
    """s -> a, s -> b, a -> b, a -> t, b -> t: the smallest two-terminal graph that is not series-parallel"""
    return build_graph(
        ["s", "a", "b", "t"],
        [("e1", "s", "a"), ("e2", "s", "b"), ("e3", "a", "b"), ("e4", "a", "t"), ("e5", "b", "t")],
    )


def with_isolated_node(graph):
    nodes = dict(graph.nodes)
    nodes[fresh_id("v", nodes)] = EMPTY_LABEL
    return HostGraph(nodes, graph.edges)


def normal_forms(rules, graph, cap=DEFAULT_BRANCH_CAP):
    """
    Irreducible graphs reachable from graph by applying rules, one per isomorphism class

    Raises:
        StateSpaceLimit: more than cap distinct graphs reached
    """
    rules = list(rules)
    seen = {canonical_key(graph)}
    queue = deque([graph])
    found = {}
    while queue:
        current = queue.popleft()
        steps = applications(rules, current)
        if not steps:
            found.setdefault(canonical_key(current), current)
            continue
        for rule, match in steps:
            nxt = apply_match(rule, current, match)
            key = canonical_key(nxt)
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > cap:
                raise StateSpaceLimit(f"more than {cap} graphs reachable")
            queue.append(nxt)
    return [found[k] for k in sorted(found)]


def critical_pair_path():
    """Path 1 -> 2 -> 3 -> 4 with edges a, b, c: both `series` overlaps share edge b"""
    return build_graph(["1", "2", "3", "4"], [("a", "1", "2"), ("b", "2", "3"), ("c", "3", "4")])


@dataclass(frozen=True)
class JoinedPair:
    host: HostGraph
    first: HostGraph
    second: HostGraph
    joined_first: HostGraph
    joined_second: HostGraph

    @property
    def joinable(self):
        return isomorphic(self.joined_first, self.joined_second)


def join_series_overlap(series):
    """
    Apply `series` at both overlapping matches on the 3-edge path, then once more on each side

    Args:
        series: the series Rule from the seriesparallel program
    """
    host = critical_pair_path()
    matches = find_matches(series, host)
    middles = {m.node_map["2"]: m for m in matches}
    first = apply_match(series, host, middles["2"])
    second = apply_match(series, host, middles["3"])

    def finish(graph):
        (match,) = find_matches(series, graph)
        return apply_match(series, graph, match)

    return JoinedPair(host, first, second, finish(first), finish(second))


# ---------- Graph generators ----------


def all_digraphs(n, loops=True):
    """Every edge configuration on nodes 1..n with at most one edge per ordered pair"""
    ids = [str(i) for i in range(1, n + 1)]
    pairs = [(v, w) for v in ids for w in ids if loops or v != w]
    for present in product((False, True), repeat=len(pairs)):
        chosen = [p for p, keep in zip(pairs, present) if keep]
        yield build_graph(ids, [(f"e{i}", v, w) for i, (v, w) in enumerate(chosen, 1)])


def random_host_graph(rng, max_nodes, edge_probability=0.3, loops=False, labels=False):
    """
    Seeded random digraph on 1..max_nodes nodes

    Args:
        rng: random.Random instance
        max_nodes: upper bound on the node count (at least one node)
        edge_probability: chance of an edge for each ordered pair
        loops: allow v -> v edges
        labels: give each node a small integer label instead of the empty list
    """
    n = rng.randint(1, max_nodes)
    ids = [str(i) for i in range(1, n + 1)]
    nodes = [(v, Label((rng.randint(0, 9),)) if labels else EMPTY_LABEL) for v in ids]
    edges = []
    for v in ids:
        for w in ids:
            if v == w and not loops:
                continue
            if rng.random() < edge_probability:
                edges.append((f"e{len(edges) + 1}", v, w))
    return build_graph(nodes, edges)


def cycle_graph(n):
    """Unlabelled directed n-cycle"""
    ids = [str(i) for i in range(1, n + 1)]
    return build_graph(ids, [(f"e{i}", ids[i - 1], ids[i % n]) for i in range(1, n + 1)])


def complete_digraph(n):
    """Every v -> w, v != w"""
    ids = [str(i) for i in range(1, n + 1)]
    pairs = [(v, w) for v in ids for w in ids if v != w]
    return build_graph(ids, [(f"e{i}", v, w) for i, (v, w) in enumerate(pairs, 1)])
