"""DOT emission: nodes as circles, hyperedges as boxes, tentacles as arrows
labelled by position; interface nodes are double-circled with their
interface indices."""

from __future__ import annotations

from typing import Optional

from .hypergraph import GraphWithInterface, Homomorphism, Hypergraph


def graph_to_dot(
    g: Hypergraph, name: str = "G", interface: Optional[Homomorphism] = None
) -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    iface_of: dict[int, list[int]] = {}
    if interface is not None:
        for j in sorted(interface.source.nodes):
            iface_of.setdefault(interface.node_map[j], []).append(j)
    for n in g.sorted_nodes():
        if n in iface_of:
            tag = ",".join(str(j) for j in iface_of[n])
            lines.append(
                f'  n{n} [shape=circle, peripheries=2, label="{n}", xlabel="[{tag}]"];'
            )
        else:
            lines.append(f'  n{n} [shape=circle, label="{n}"];')
    for eid in g.sorted_edges():
        e = g.edges[eid]
        label = e.label.replace('"', "'")
        lines.append(f'  e{eid} [shape=box, label="{label}"];')
        for i, n in enumerate(e.sources):
            lines.append(f'  n{n} -> e{eid} [label="s{i}"];')
        for i, n in enumerate(e.targets):
            lines.append(f'  e{eid} -> n{n} [label="t{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def gwi_to_dot(g: GraphWithInterface, name: str = "G") -> str:
    return graph_to_dot(g.graph, name, g.interface)
