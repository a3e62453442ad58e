"""
Host graph text format
Line-based `node`/`edge` files with `#` comments; parse and print round-trip exactly
"""

from __future__ import annotations

import re

from host_graph import (
    Edge,
    GraphError,
    HostGraph,
    IllegalAtom,
    Label,
    Mark,
    UnknownEndpoint,
    check_atom,
)

ATOM_PATTERN = r'-?\d+|"[^"\n]*"'
LABEL_PATTERN = rf"empty|(?:{ATOM_PATTERN})(?::(?:{ATOM_PATTERN}))*"
MARK_PATTERN = r"#(?P<mark>red|green|blue|grey|dashed)\b"
ID_PATTERN = r'[^\s#":]+'
TAIL_PATTERN = rf"(?:\s+{MARK_PATTERN})?(?:\s+#.*)?\s*$"

NODE_LINE = re.compile(rf"^\s*node\s+(?P<id>{ID_PATTERN})\s+(?P<label>{LABEL_PATTERN}){TAIL_PATTERN}")
EDGE_LINE = re.compile(
    rf"^\s*edge\s+(?P<id>{ID_PATTERN})\s+(?P<src>{ID_PATTERN})\s+(?P<tgt>{ID_PATTERN})"
    rf"\s+(?P<label>{LABEL_PATTERN}){TAIL_PATTERN}"
)
ATOM_TOKEN = re.compile(ATOM_PATTERN)


class GraphFormatError(GraphError):
    """Malformed host graph text, reported as file:line:col: message"""

    def __init__(self, message, line=None, column=1, path=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.path = path

    def __str__(self):
        return f"{self.path or '<graph>'}:{self.line}:{self.column}: {self.message}"


class FormatUnknownEndpoint(GraphFormatError, UnknownEndpoint):
    pass


def parse_list(text):
    """Parse `empty` or `atom(:atom)*` into a tuple of atoms"""
    if text == "empty":
        return ()
    atoms = []
    for token in ATOM_TOKEN.findall(text):
        if token.startswith('"'):
            atoms.append(check_atom(token[1:-1]))
        else:
            atoms.append(check_atom(int(token)))
    return tuple(atoms)


def _label(match):
    mark = Mark(match.group("mark")) if match.group("mark") else Mark.NONE
    return Label(parse_list(match.group("label")), mark)


def parse_host_graph(text, path=None):
    """
    Parse host graph text

    Args:
        text: file contents
        path: file name used in error messages

    Returns:
        HostGraph with nodes and edges in file order
    """
    nodes = {}
    edges = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue

        match = NODE_LINE.match(raw) or EDGE_LINE.match(raw)
        if match is None:
            column = len(raw) - len(raw.lstrip()) + 1
            raise GraphFormatError(f"expected `node` or `edge` line, got {stripped!r}", line_no, column, path)

        try:
            label = _label(match)
        except (IllegalAtom, ValueError) as e:
            raise GraphFormatError(str(e), line_no, match.start("label") + 1, path) from e

        item_id = match.group("id")
        if raw.lstrip().startswith("node"):
            if item_id in nodes:
                raise GraphFormatError(f"duplicate node id {item_id}", line_no, match.start("id") + 1, path)
            if label.mark is Mark.DASHED:
                raise GraphFormatError("nodes cannot be dashed", line_no, match.start("mark"), path)
            nodes[item_id] = label
            continue

        if item_id in edges:
            raise GraphFormatError(f"duplicate edge id {item_id}", line_no, match.start("id") + 1, path)
        if label.mark is Mark.GREY:
            raise GraphFormatError("edges cannot be grey", line_no, match.start("mark"), path)
        for group in ("src", "tgt"):
            if match.group(group) not in nodes:
                raise FormatUnknownEndpoint(
                    f"edge {item_id} refers to unknown node {match.group(group)}",
                    line_no,
                    match.start(group) + 1,
                    path,
                )
        edges[item_id] = Edge(match.group("src"), match.group("tgt"), label)

    return HostGraph(nodes, edges)


def load_host_graph(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_host_graph(f.read(), path=str(path))


def format_host_graph(graph):
    """Print a graph in the canonical text form (nodes first, file order kept)"""
    lines = [f"node {node_id} {label}" for node_id, label in graph.nodes.items()]
    lines += [f"edge {edge_id} {e.source} {e.target} {e.label}" for edge_id, e in graph.edges.items()]
    return "".join(line + "\n" for line in lines)
