"""
DOT export
Graphviz rendering of host graphs: grey nodes filled, red/green/blue borders, dashed edges
"""

from __future__ import annotations

from host_graph import Mark, format_list, id_sort_key

NODE_STYLE = {
    Mark.NONE: "",
    Mark.GREY: ', style=filled, fillcolor="gray"',
    Mark.RED: ', color="red"',
    Mark.GREEN: ', color="green"',
    Mark.BLUE: ', color="blue"',
}

EDGE_STYLE = {
    Mark.NONE: "",
    Mark.DASHED: ", style=dashed",
    Mark.RED: ', color="red"',
    Mark.GREEN: ', color="green"',
    Mark.BLUE: ', color="blue"',
}


def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph, name="G"):
    """DOT text for graph, items in id order so the output is stable"""
    lines = [f"digraph {name} {{"]
    for node_id in sorted(graph.nodes, key=id_sort_key):
        label = graph.nodes[node_id]
        text = _quote(f"{node_id}: {format_list(label.values)}")
        lines.append(f"  {_quote(node_id)} [label={text}{NODE_STYLE[label.mark]}];")
    for edge_id in sorted(graph.edges, key=id_sort_key):
        edge = graph.edges[edge_id]
        text = "" if not edge.label.values else format_list(edge.label.values)
        lines.append(
            f"  {_quote(edge.source)} -> {_quote(edge.target)} [label={_quote(text)}{EDGE_STYLE[edge.label.mark]}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(graph, path, name="G"):
    with open(path, "w", encoding="utf-8") as f:
        f.write(to_dot(graph, name))
    return path
