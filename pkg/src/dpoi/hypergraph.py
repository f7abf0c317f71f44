"""Finite labelled directed hypergraphs, homomorphisms and isomorphism search.

A hypergraph has a finite set of nodes and a finite set of hyperedges; each
hyperedge carries a generator label and ordered lists of source and target
node ids whose lengths must match the label's arity/coarity.

All values are treated as immutable after construction: operations return new
graphs and never mutate their arguments, so values are safe to share between
threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

# Labels reserved for the formal path generators used by the path-extension
# machinery.  They are only legal in signatures flagged path_extended.
PATH_JOIN = "@join"   # 2 -> 1
PATH_SPLIT = "@split"  # 1 -> 2
PATH_LINK = "@link"   # 1 -> 1

PATH_GENERATORS: dict[str, tuple[int, int]] = {
    PATH_JOIN: (2, 1),
    PATH_SPLIT: (1, 2),
    PATH_LINK: (1, 1),
}


def is_path_label(label: str) -> bool:
    return label in PATH_GENERATORS


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Maps generator names to (arity, coarity) pairs."""

    generators: Mapping[str, tuple[int, int]]
    path_extended: bool = False

    def __post_init__(self) -> None:
        for name, (ar, coar) in self.generators.items():
            if ar < 0 or coar < 0:
                raise SignatureError(f"generator {name!r} has negative (co)arity")
            if is_path_label(name) and not self.path_extended:
                raise SignatureError(f"label {name!r} is reserved for path extensions")

    def arity(self, label: str) -> tuple[int, int]:
        try:
            return self.generators[label]
        except KeyError:
            raise SignatureError(f"unknown generator {label!r}") from None

    def __contains__(self, label: str) -> bool:
        return label in self.generators

    def extend_with_path_generators(self) -> "Signature":
        gens = dict(self.generators)
        for name, ar in PATH_GENERATORS.items():
            if name in gens and gens[name] != ar:
                raise SignatureError(f"label {name!r} clashes with a user generator")
            gens[name] = ar
        return Signature(gens, path_extended=True)

    def compatible_with(self, other: "Signature") -> bool:
        """True if every generator of self is defined identically in other."""
        return all(other.generators.get(n) == a for n, a in self.generators.items())


@dataclass(frozen=True)
class Edge:
    label: str
    sources: tuple[int, ...]
    targets: tuple[int, ...]


@dataclass(frozen=True)
class Hypergraph:
    """A finite labelled directed hypergraph with ordered tentacles.

    Node and edge ids are small integers scoped to this graph value; maps
    between graphs are always by id.
    """

    signature: Signature
    nodes: frozenset[int]
    edges: Mapping[int, Edge]

    @staticmethod
    def build(
        signature: Signature,
        n_nodes: int,
        edges: Iterable[tuple[str, Sequence[int], Sequence[int]]] = (),
    ) -> "Hypergraph":
        """Construct a graph with nodes 0..n_nodes-1 and consecutively numbered edges."""
        edict = {
            i: Edge(label, tuple(srcs), tuple(tgts))
            for i, (label, srcs, tgts) in enumerate(edges)
        }
        g = Hypergraph(signature, frozenset(range(n_nodes)), edict)
        errs = g.validate()
        if errs:
            raise ValueError("; ".join(errs))
        return g

    def validate(self) -> list[str]:
        """Return a list of invariant violations (empty iff well-formed)."""
        problems = []
        for eid, e in self.edges.items():
            if e.label not in self.signature:
                problems.append(f"edge {eid}: unknown label {e.label!r}")
                continue
            if is_path_label(e.label) and not self.signature.path_extended:
                problems.append(f"edge {eid}: path label {e.label!r} in a plain graph")
            ar, coar = self.signature.arity(e.label)
            if len(e.sources) != ar:
                problems.append(f"edge {eid}: |sources|={len(e.sources)} != arity {ar}")
            if len(e.targets) != coar:
                problems.append(f"edge {eid}: |targets|={len(e.targets)} != coarity {coar}")
            for n in itertools.chain(e.sources, e.targets):
                if n not in self.nodes:
                    problems.append(f"edge {eid}: dangling node id {n}")
        return problems

    # -- basic queries ------------------------------------------------------

    def sorted_nodes(self) -> list[int]:
        return sorted(self.nodes)

    def sorted_edges(self) -> list[int]:
        return sorted(self.edges)

    def edge(self, eid: int) -> Edge:
        return self.edges[eid]

    def in_degree(self, node: int) -> int:
        return sum(e.targets.count(node) for e in self.edges.values())

    def out_degree(self, node: int) -> int:
        return sum(e.sources.count(node) for e in self.edges.values())

    def is_discrete(self) -> bool:
        return not self.edges

    def node_signature(self, node: int) -> tuple:
        """A cheap iso-invariant of a node's incident tentacles."""
        inc = []
        for eid, e in self.edges.items():
            for i, n in enumerate(e.sources):
                if n == node:
                    inc.append(("s", e.label, i))
            for i, n in enumerate(e.targets):
                if n == node:
                    inc.append(("t", e.label, i))
        return tuple(sorted(inc))

    def relabel(self, node_map: Mapping[int, int], edge_map: Mapping[int, int]) -> "Hypergraph":
        """Rename node/edge ids by injective maps; returns a new graph."""
        edges = {
            edge_map[eid]: Edge(
                e.label,
                tuple(node_map[n] for n in e.sources),
                tuple(node_map[n] for n in e.targets),
            )
            for eid, e in self.edges.items()
        }
        return Hypergraph(self.signature, frozenset(node_map[n] for n in self.nodes), edges)

    def with_signature(self, signature: Signature) -> "Hypergraph":
        if not self.signature.compatible_with(signature):
            raise SignatureError("target signature does not cover this graph's labels")
        return Hypergraph(signature, self.nodes, self.edges)


def discrete(n: int, signature: Signature) -> Hypergraph:
    """The discrete hypergraph on n nodes (no edges)."""
    if n < 0:
        raise ValueError("node count must be nonnegative")
    return Hypergraph(signature, frozenset(range(n)), {})


@dataclass(frozen=True)
class Homomorphism:
    """A structure- and label-preserving map between hypergraphs."""

    source: Hypergraph
    target: Hypergraph
    node_map: Mapping[int, int]
    edge_map: Mapping[int, int]

    def validate(self) -> list[str]:
        problems = []
        for n in self.source.nodes:
            if n not in self.node_map:
                problems.append(f"node {n} unmapped")
            elif self.node_map[n] not in self.target.nodes:
                problems.append(f"node {n} maps outside the target")
        for eid, e in self.source.edges.items():
            if eid not in self.edge_map:
                problems.append(f"edge {eid} unmapped")
                continue
            tid = self.edge_map[eid]
            if tid not in self.target.edges:
                problems.append(f"edge {eid} maps outside the target")
                continue
            te = self.target.edges[tid]
            if te.label != e.label:
                problems.append(f"edge {eid}: label not preserved")
                continue
            if tuple(self.node_map.get(n) for n in e.sources) != te.sources:
                problems.append(f"edge {eid}: sources not preserved")
            if tuple(self.node_map.get(n) for n in e.targets) != te.targets:
                problems.append(f"edge {eid}: targets not preserved")
        return problems

    def is_valid(self) -> bool:
        return not self.validate()

    def is_mono(self) -> bool:
        return len(set(self.node_map.values())) == len(self.source.nodes) and len(
            set(self.edge_map.values())
        ) == len(self.source.edges)

    def is_epi(self) -> bool:
        return set(self.node_map.values()) == self.target.nodes and set(
            self.edge_map.values()
        ) == set(self.target.edges)

    def is_iso(self) -> bool:
        return self.is_mono() and self.is_epi()

    def apply_node(self, n: int) -> int:
        return self.node_map[n]

    def apply_edge(self, e: int) -> int:
        return self.edge_map[e]

    def image_nodes(self) -> frozenset[int]:
        return frozenset(self.node_map.values())

    def image_edges(self) -> frozenset[int]:
        return frozenset(self.edge_map.values())

    def compose(self, other: "Homomorphism") -> "Homomorphism":
        """self ; other (apply self first)."""
        if self.target is not other.source and self.target != other.source:
            raise ValueError("composition mismatch")
        return Homomorphism(
            self.source,
            other.target,
            {n: other.node_map[v] for n, v in self.node_map.items()},
            {e: other.edge_map[v] for e, v in self.edge_map.items()},
        )

    def inverse(self) -> "Homomorphism":
        if not self.is_iso():
            raise ValueError("only isomorphisms can be inverted")
        return Homomorphism(
            self.target,
            self.source,
            {v: n for n, v in self.node_map.items()},
            {v: e for e, v in self.edge_map.items()},
        )

    @staticmethod
    def identity(g: Hypergraph) -> "Homomorphism":
        return Homomorphism(g, g, {n: n for n in g.nodes}, {e: e for e in g.edges})


@dataclass(frozen=True)
class GraphWithInterface:
    """A hypergraph together with a map from a discrete interface into it.

    The interface morphism is not required to be mono.
    """

    graph: Hypergraph
    interface: Homomorphism

    def __post_init__(self) -> None:
        if self.interface.target is not self.graph and self.interface.target != self.graph:
            raise ValueError("interface must map into the carried graph")
        if not self.interface.source.is_discrete():
            raise ValueError("interface object must be discrete")
        errs = self.interface.validate()
        if errs:
            raise ValueError("invalid interface: " + "; ".join(errs))

    @property
    def interface_object(self) -> Hypergraph:
        return self.interface.source

    @staticmethod
    def with_empty_interface(g: Hypergraph) -> "GraphWithInterface":
        j = discrete(0, g.signature)
        return GraphWithInterface(g, Homomorphism(j, g, {}, {}))

    @staticmethod
    def from_legs(g: Hypergraph, legs: Sequence[int]) -> "GraphWithInterface":
        """Interface discrete(len(legs)) sending node i to legs[i]."""
        j = discrete(len(legs), g.signature)
        return GraphWithInterface(g, Homomorphism(j, g, dict(enumerate(legs)), {}))


def coproduct(
    a: Hypergraph, b: Hypergraph
) -> tuple[Hypergraph, Homomorphism, Homomorphism]:
    """Disjoint union with its two injections (both mono)."""
    if a.signature != b.signature:
        raise SignatureError("coproduct requires a common signature")
    na = len(a.nodes)
    ea = len(a.edges)
    node_a = {n: i for i, n in enumerate(a.sorted_nodes())}
    edge_a = {e: i for i, e in enumerate(a.sorted_edges())}
    node_b = {n: na + i for i, n in enumerate(b.sorted_nodes())}
    edge_b = {e: ea + i for i, e in enumerate(b.sorted_edges())}
    edges = {}
    for eid, e in a.edges.items():
        edges[edge_a[eid]] = Edge(
            e.label,
            tuple(node_a[n] for n in e.sources),
            tuple(node_a[n] for n in e.targets),
        )
    for eid, e in b.edges.items():
        edges[edge_b[eid]] = Edge(
            e.label,
            tuple(node_b[n] for n in e.sources),
            tuple(node_b[n] for n in e.targets),
        )
    g = Hypergraph(a.signature, frozenset(range(na + len(b.nodes))), edges)
    return (
        g,
        Homomorphism(a, g, node_a, edge_a),
        Homomorphism(b, g, node_b, edge_b),
    )


# -- homomorphism and isomorphism search -----------------------------------


def homomorphisms(
    a: Hypergraph,
    b: Hypergraph,
    mono: bool = False,
    fixed_nodes: Optional[Mapping[int, int]] = None,
    fixed_edges: Optional[Mapping[int, int]] = None,
) -> Iterator[Homomorphism]:
    """Enumerate homomorphisms a -> b in a deterministic order.

    Edges are assigned first (sorted by id, candidates sorted by id), which
    pins their incident nodes; remaining nodes are assigned last.  `fixed_*`
    force parts of the assignment.
    """
    if not a.signature.compatible_with(b.signature):
        return
    node_map: dict[int, int] = dict(fixed_nodes or {})
    edge_map: dict[int, int] = dict(fixed_edges or {})
    for n, v in node_map.items():
        if v not in b.nodes:
            return
    used_nodes = set(node_map.values())
    used_edges = set(edge_map.values())
    if mono and (len(used_nodes) < len(node_map) or len(used_edges) < len(edge_map)):
        return

    edge_order = a.sorted_edges()
    by_label: dict[str, list[int]] = {}
    for eid in b.sorted_edges():
        by_label.setdefault(b.edges[eid].label, []).append(eid)

    def assign_edge_nodes(ea: Edge, eb: Edge) -> Optional[list[int]]:
        new = []
        for na_, nb_ in zip(ea.sources + ea.targets, eb.sources + eb.targets):
            if na_ in node_map:
                if node_map[na_] != nb_:
                    for k in reversed(new):
                        used_nodes.discard(node_map.pop(k))
                    return None
            else:
                if mono and nb_ in used_nodes:
                    for k in reversed(new):
                        used_nodes.discard(node_map.pop(k))
                    return None
                node_map[na_] = nb_
                used_nodes.add(nb_)
                new.append(na_)
        return new

    def undo(new_nodes: list[int]) -> None:
        for k in reversed(new_nodes):
            used_nodes.discard(node_map.pop(k))

    def backtrack_edges(i: int) -> Iterator[None]:
        if i == len(edge_order):
            yield None
            return
        eid = edge_order[i]
        ea = a.edges[eid]
        if eid in edge_map:
            cands = [edge_map[eid]]
        else:
            cands = by_label.get(ea.label, [])
        for tid in cands:
            if mono and eid not in edge_map and tid in used_edges:
                continue
            eb = b.edges[tid]
            if eb.label != ea.label:
                continue
            new_nodes = assign_edge_nodes(ea, eb)
            if new_nodes is None:
                continue
            pre = eid not in edge_map
            if pre:
                edge_map[eid] = tid
                used_edges.add(tid)
            yield from backtrack_edges(i + 1)
            if pre:
                used_edges.discard(edge_map.pop(eid))
            undo(new_nodes)

    b_nodes = b.sorted_nodes()

    def backtrack_nodes(remaining: list[int], j: int) -> Iterator[Homomorphism]:
        if j == len(remaining):
            yield Homomorphism(a, b, dict(node_map), dict(edge_map))
            return
        n = remaining[j]
        for v in b_nodes:
            if mono and v in used_nodes:
                continue
            node_map[n] = v
            used_nodes.add(v)
            yield from backtrack_nodes(remaining, j + 1)
            used_nodes.discard(v)
            del node_map[n]

    for _ in backtrack_edges(0):
        # nodes pinned by edges are in node_map now; the rest are free
        remaining = [n for n in a.sorted_nodes() if n not in node_map]
        yield from backtrack_nodes(remaining, 0)


def isomorphism(
    a: Hypergraph,
    b: Hypergraph,
    fixed_nodes: Optional[Mapping[int, int]] = None,
    fixed_edges: Optional[Mapping[int, int]] = None,
) -> Optional[Homomorphism]:
    """Find an isomorphism a -> b honoring the fixed partial assignment."""
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return None
    if sorted(e.label for e in a.edges.values()) != sorted(
        e.label for e in b.edges.values()
    ):
        return None
    if sorted(a.node_signature(n) for n in a.nodes) != sorted(
        b.node_signature(n) for n in b.nodes
    ):
        return None
    for h in homomorphisms(a, b, mono=True, fixed_nodes=fixed_nodes, fixed_edges=fixed_edges):
        if h.is_epi():
            return h
    return None


def are_isomorphic(
    a: GraphWithInterface, b: GraphWithInterface
) -> Optional[Homomorphism]:
    """An iso phi between the carried graphs with interface_a ; phi = interface_b.

    Both sides must carry the same interface object (same discrete node set).
    """
    ja, jb = a.interface.source, b.interface.source
    if ja.nodes != jb.nodes:
        return None
    fixed = {}
    for j in ja.nodes:
        want = b.interface.node_map[j]
        have = a.interface.node_map[j]
        if have in fixed and fixed[have] != want:
            return None
        fixed[have] = want
    return isomorphism(a.graph, b.graph, fixed_nodes=fixed)


def certificate(g: Hypergraph, interface: Optional[Homomorphism] = None) -> tuple:
    """An iso-invariant fingerprint used to bucket graphs before iso checks.

    Two rounds of colour refinement over nodes, folding edge labels and
    tentacle positions in; interface node colours are appended in interface
    order so that interface-compatible isomorphism is respected.
    """
    colors = {n: g.node_signature(n) for n in g.nodes}
    for _ in range(2):
        nxt = {}
        for n in g.nodes:
            inc = []
            for eid, e in g.edges.items():
                for i, v in enumerate(e.sources):
                    if v == n:
                        inc.append(("s", e.label, i, tuple(sorted(colors[w] for w in e.targets))))
                for i, v in enumerate(e.targets):
                    if v == n:
                        inc.append(("t", e.label, i, tuple(sorted(colors[w] for w in e.sources))))
            nxt[n] = (colors[n], tuple(sorted(inc)))
        colors = nxt
    node_part = tuple(sorted(colors.values()))
    edge_part = tuple(
        sorted(
            (e.label, tuple(colors[n] for n in e.sources), tuple(colors[n] for n in e.targets))
            for e in g.edges.values()
        )
    )
    iface_part = ()
    if interface is not None:
        iface_part = tuple(colors[interface.node_map[j]] for j in sorted(interface.source.nodes))
    return (len(g.nodes), len(g.edges), node_part, edge_part, iface_part)
