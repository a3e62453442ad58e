"""
Host graph model
Directed labelled multigraphs with marks, degree queries, isomorphism and canonical keys
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Union

import networkx as nx

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

# canonical_key enumerates refinement trees; beyond this it is not attempted
MAX_CANONICAL_NODES = 16

Atom = Union[int, str]
ListValue = tuple  # tuple[Atom, ...]


class Mark(str, Enum):
    NONE = "none"
    RED = "red"
    GREEN = "green"
    BLUE = "blue"
    GREY = "grey"
    DASHED = "dashed"


NODE_MARKS = frozenset(m for m in Mark if m is not Mark.DASHED)
EDGE_MARKS = frozenset(m for m in Mark if m is not Mark.GREY)


class GraphError(Exception):
    """Base class for host graph errors"""


class DuplicateId(GraphError):
    pass


class UnknownEndpoint(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class IllegalMark(GraphError):
    pass


class IllegalAtom(GraphError):
    pass


class SizeLimitExceeded(GraphError):
    pass


def check_atom(atom):
    """Validate a single atom: 64-bit signed integer or quote-free string"""
    if isinstance(atom, bool):
        raise IllegalAtom(f"booleans are not atoms: {atom!r}")
    if isinstance(atom, int):
        if not INT_MIN <= atom <= INT_MAX:
            raise IllegalAtom(f"integer {atom} outside the 64-bit signed range")
        return atom
    if isinstance(atom, str):
        if '"' in atom or "\n" in atom or "\r" in atom:
            raise IllegalAtom(f"string atoms may not contain quotes or newlines: {atom!r}")
        return atom
    raise IllegalAtom(f"atoms are integers or strings, got {type(atom).__name__}")


def atom_sort_key(atom):
    if isinstance(atom, int):
        return (0, atom)
    return (1, atom)


def format_atom(atom):
    if isinstance(atom, int):
        return str(atom)
    return f'"{atom}"'


def format_list(values):
    """Render a list value as `empty` or `a:b:c`"""
    if not values:
        return "empty"
    return ":".join(format_atom(a) for a in values)


@dataclass(frozen=True)
class Label:
    """A list of atoms plus an optional mark"""

    values: ListValue = ()
    mark: Mark = Mark.NONE

    def __post_init__(self):
        values = tuple(check_atom(a) for a in self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mark", Mark(self.mark))

    def sort_key(self):
        return (self.mark.value, tuple(atom_sort_key(a) for a in self.values))

    def __str__(self):
        text = format_list(self.values)
        if self.mark is not Mark.NONE:
            text += f" #{self.mark.value}"
        return text


EMPTY_LABEL = Label()


def as_label(value):
    """Coerce None, a Label, an atom or a sequence of atoms to a Label"""
    if value is None:
        return EMPTY_LABEL
    if isinstance(value, Label):
        return value
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        return Label((value,))
    return Label(tuple(value))


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    label: Label = EMPTY_LABEL


@dataclass(frozen=True)
class HostGraph:
    """Immutable directed multigraph; ids are opaque strings unique per graph"""

    nodes: Mapping[str, Label]
    edges: Mapping[str, Edge]

    def __post_init__(self):
        nodes = dict(self.nodes)
        edges = dict(self.edges)
        for node_id, label in nodes.items():
            if label.mark not in NODE_MARKS:
                raise IllegalMark(f"node {node_id}: mark {label.mark.value} is reserved for edges")
        for edge_id, edge in edges.items():
            if edge.label.mark not in EDGE_MARKS:
                raise IllegalMark(f"edge {edge_id}: mark {edge.label.mark.value} is reserved for nodes")
            for end in (edge.source, edge.target):
                if end not in nodes:
                    raise UnknownEndpoint(f"edge {edge_id} refers to unknown node {end}")
        object.__setattr__(self, "nodes", MappingProxyType(nodes))
        object.__setattr__(self, "edges", MappingProxyType(edges))

    @cached_property
    def _incidence(self):
        incoming = {v: [] for v in self.nodes}
        outgoing = {v: [] for v in self.nodes}
        for edge_id, edge in self.edges.items():
            outgoing[edge.source].append(edge_id)
            incoming[edge.target].append(edge_id)
        return incoming, outgoing

    def _require(self, node_id):
        if node_id not in self.nodes:
            raise UnknownNode(f"no node {node_id} in graph")

    def in_edges(self, node_id):
        self._require(node_id)
        return self._incidence[0][node_id]

    def out_edges(self, node_id):
        self._require(node_id)
        return self._incidence[1][node_id]

    def incident_edges(self, node_id):
        """Ids of all edges touching node_id, each loop listed once"""
        return sorted(set(self.in_edges(node_id)) | set(self.out_edges(node_id)), key=id_sort_key)

    def edges_between(self, source, target):
        return [e for e in self.out_edges(source) if self.edges[e].target == target]

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"HostGraph(|V|={len(self.nodes)}, |E|={len(self.edges)})"


EMPTY_GRAPH = HostGraph({}, {})


def build_graph(node_specs=(), edge_specs=()):
    """
    Build a validated HostGraph

    Args:
        node_specs: iterable of node ids or (id, label) pairs
        edge_specs: iterable of (id, source, target) or (id, source, target, label)

    Returns:
        HostGraph: rejects duplicate ids, dangling endpoints and reserved marks
    """
    nodes = {}
    for spec in node_specs:
        if isinstance(spec, str):
            node_id, label = spec, None
        else:
            node_id, label = spec
        if node_id in nodes:
            raise DuplicateId(f"node id {node_id} declared twice")
        nodes[node_id] = as_label(label)

    edges = {}
    for spec in edge_specs:
        if len(spec) == 3:
            (edge_id, source, target), label = spec, None
        else:
            edge_id, source, target, label = spec
        if edge_id in edges:
            raise DuplicateId(f"edge id {edge_id} declared twice")
        edges[edge_id] = Edge(source, target, as_label(label))
    return HostGraph(nodes, edges)


def indegree(graph, node_id):
    """Number of edges with target node_id; a loop counts once"""
    return len(graph.in_edges(node_id))


def outdegree(graph, node_id):
    """Number of edges with source node_id; a loop counts once"""
    return len(graph.out_edges(node_id))


_ID_PARTS = re.compile(r"(\d+)")


def id_sort_key(ident):
    """Natural ordering for ids so that n2 sorts before n10"""
    return tuple((0, int(part)) if part.isdigit() else (1, part) for part in _ID_PARTS.split(ident))


def fresh_id(prefix, taken):
    """Smallest `<prefix><k>` not present in taken"""
    k = len(taken) + 1
    while f"{prefix}{k}" in taken:
        k += 1
    return f"{prefix}{k}"


def to_networkx(graph):
    """MultiDiGraph view with `label` attributes and edge ids as keys"""
    multi = nx.MultiDiGraph()
    for node_id, label in graph.nodes.items():
        multi.add_node(node_id, label=label)
    for edge_id, edge in graph.edges.items():
        multi.add_edge(edge.source, edge.target, key=edge_id, label=edge.label)
    return multi


def _same_label(a, b):
    return a["label"] == b["label"]


def _same_edge_bundle(a, b):
    # parallel edges: compare the label multisets, not sets
    return Counter(d["label"] for d in a.values()) == Counter(d["label"] for d in b.values())


def isomorphic(g, h):
    """True iff a label- and mark-preserving bijection exists between g and h"""
    if len(g.nodes) != len(h.nodes) or len(g.edges) != len(h.edges):
        return False
    if Counter(g.nodes.values()) != Counter(h.nodes.values()):
        return False
    if Counter(e.label for e in g.edges.values()) != Counter(e.label for e in h.edges.values()):
        return False
    return nx.is_isomorphic(
        to_networkx(g), to_networkx(h), node_match=_same_label, edge_match=_same_edge_bundle
    )


EMPTY_KEY = (0, (), ())


def _rank(signatures):
    order = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
    return [order[sig] for sig in signatures]


def _refine(colours, out_adj, in_adj):
    while True:
        signatures = [
            (
                colours[v],
                tuple(sorted((colours[w], lk) for w, lk in out_adj[v])),
                tuple(sorted((colours[w], lk) for w, lk in in_adj[v])),
            )
            for v in range(len(colours))
        ]
        refined = _rank(signatures)
        if len(set(refined)) == len(set(colours)):
            return refined
        colours = refined


def canonical_key(graph, max_nodes=MAX_CANONICAL_NODES):
    """
    Canonical form of a host graph: equal keys iff the graphs are isomorphic

    Colour refinement over labels and edge bundles, then individualisation of
    the first non-singleton cell; the key is the smallest encoding over all
    leaves of the search tree.
    """
    n = len(graph.nodes)
    if n > max_nodes:
        raise SizeLimitExceeded(f"canonical_key supports at most {max_nodes} nodes, got {n}")
    if n == 0:
        return EMPTY_KEY

    order = list(graph.nodes)
    index = {v: i for i, v in enumerate(order)}
    node_keys = [graph.nodes[v].sort_key() for v in order]
    out_adj = [[] for _ in order]
    in_adj = [[] for _ in order]
    edge_list = []
    for edge in graph.edges.values():
        s, t, lk = index[edge.source], index[edge.target], edge.label.sort_key()
        out_adj[s].append((t, lk))
        in_adj[t].append((s, lk))
        edge_list.append((s, t, lk))

    # equal-coloured nodes with the same neighbourhoods can be swapped; one of them is enough
    twins = [(tuple(sorted(out_adj[v])), tuple(sorted(in_adj[v]))) for v in range(n)]
    best = None

    def encode(colours):
        labels = [None] * n
        for v, pos in enumerate(colours):
            labels[pos] = node_keys[v]
        edges = tuple(sorted((colours[s], colours[t], lk) for s, t, lk in edge_list))
        return (n, tuple(labels), edges)

    def search(colours):
        nonlocal best
        counts = Counter(colours)
        split = [c for c, k in counts.items() if k > 1]
        if not split:
            code = encode(colours)
            if best is None or code < best:
                best = code
            return
        target = min(split)
        tried = set()
        for v in range(n):
            if colours[v] == target and twins[v] not in tried:
                tried.add(twins[v])
                individual = [2 * c + 1 for c in colours]
                individual[v] = 2 * target
                search(_refine(individual, out_adj, in_adj))

    search(_refine(_rank(node_keys), out_adj, in_adj))
    return best
