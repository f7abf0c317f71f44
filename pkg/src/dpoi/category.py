"""Pushouts, pullbacks, epi-mono factorisation and pushout complements.

The pushout is computed by a union-find congruence over the disjoint union of
the two legs' targets; edges merge only through shared preimages in the apex,
so incompatible edge merges cannot arise.  Pushout-complement enumeration
supports the two rule shapes the engine needs: a mono left leg (unique
complement, computed by deletion) and a discrete apex (exhaustive enumeration
of node splittings and tentacle attachments).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .hypergraph import (
    Edge,
    GraphWithInterface,
    Homomorphism,
    Hypergraph,
    discrete,
    isomorphism,
)


class UnsupportedRuleShape(ValueError):
    """Raised when a pushout complement is requested for a rule shape outside
    the supported classes (mono left leg, or discrete apex)."""


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != x:
            self.parent[x] = p = self.parent.setdefault(p, p)
            x = p
            p = self.parent.setdefault(x, x)
        return x

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def pushout(
    f: Homomorphism, g: Homomorphism
) -> tuple[Hypergraph, Homomorphism, Homomorphism]:
    """Pushout of L <-f- K -g-> C; returns (G, inL: L->G, inC: C->G)."""
    if f.source != g.source:
        raise ValueError("pushout legs must share their source")
    k, l, c = f.source, f.target, g.target
    if l.signature.compatible_with(c.signature):
        out_sig = c.signature
    elif c.signature.compatible_with(l.signature):
        out_sig = l.signature
    else:
        raise ValueError("pushout legs have incompatible signatures")
    uf = _UnionFind()
    for n in l.nodes:
        uf.find(("L", "n", n))
    for e in l.edges:
        uf.find(("L", "e", e))
    for n in c.nodes:
        uf.find(("C", "n", n))
    for e in c.edges:
        uf.find(("C", "e", e))
    for n in k.nodes:
        uf.union(("L", "n", f.node_map[n]), ("C", "n", g.node_map[n]))
    for e in k.edges:
        uf.union(("L", "e", f.edge_map[e]), ("C", "e", g.edge_map[e]))

    node_classes = sorted(
        {uf.find(("L", "n", n)) for n in l.nodes}
        | {uf.find(("C", "n", n)) for n in c.nodes}
    )
    edge_classes = sorted(
        {uf.find(("L", "e", e)) for e in l.edges}
        | {uf.find(("C", "e", e)) for e in c.edges}
    )
    node_id = {cls: i for i, cls in enumerate(node_classes)}
    edge_id = {cls: i for i, cls in enumerate(edge_classes)}

    def node_of(side: str, n: int) -> int:
        return node_id[uf.find((side, "n", n))]

    edges: dict[int, Edge] = {}
    for side, graph in (("L", l), ("C", c)):
        for eid, e in graph.edges.items():
            edges[edge_id[uf.find((side, "e", eid))]] = Edge(
                e.label,
                tuple(node_of(side, n) for n in e.sources),
                tuple(node_of(side, n) for n in e.targets),
            )
    out = Hypergraph(out_sig, frozenset(range(len(node_classes))), edges)
    in_l = Homomorphism(
        l,
        out,
        {n: node_of("L", n) for n in l.nodes},
        {e: edge_id[uf.find(("L", "e", e))] for e in l.edges},
    )
    in_c = Homomorphism(
        c,
        out,
        {n: node_of("C", n) for n in c.nodes},
        {e: edge_id[uf.find(("C", "e", e))] for e in c.edges},
    )
    return out, in_l, in_c


def pullback(
    f: Homomorphism, g: Homomorphism
) -> tuple[Hypergraph, Homomorphism, Homomorphism]:
    """Pullback of A -f-> C <-g- B; returns (P, p1: P->A, p2: P->B)."""
    if f.target != g.target:
        raise ValueError("pullback legs must share their target")
    a, b = f.source, g.source
    node_pairs = sorted(
        (na, nb)
        for na in a.nodes
        for nb in b.nodes
        if f.node_map[na] == g.node_map[nb]
    )
    edge_pairs = sorted(
        (ea, eb)
        for ea in a.edges
        for eb in b.edges
        if f.edge_map[ea] == g.edge_map[eb]
    )
    node_id = {p: i for i, p in enumerate(node_pairs)}
    edge_id = {p: i for i, p in enumerate(edge_pairs)}
    edges = {}
    for (ea, eb), i in edge_id.items():
        xa, xb = a.edges[ea], b.edges[eb]
        edges[i] = Edge(
            xa.label,
            tuple(node_id[(na, nb)] for na, nb in zip(xa.sources, xb.sources)),
            tuple(node_id[(na, nb)] for na, nb in zip(xa.targets, xb.targets)),
        )
    p = Hypergraph(a.signature, frozenset(range(len(node_pairs))), edges)
    p1 = Homomorphism(
        p,
        a,
        {i: na for (na, nb), i in node_id.items()},
        {i: ea for (ea, eb), i in edge_id.items()},
    )
    p2 = Homomorphism(
        p,
        b,
        {i: nb for (na, nb), i in node_id.items()},
        {i: eb for (ea, eb), i in edge_id.items()},
    )
    return p, p1, p2


def square_commutes(
    k_l: Homomorphism, k_c: Homomorphism, l_g: Homomorphism, c_g: Homomorphism
) -> bool:
    return k_l.compose(l_g) == k_c.compose(c_g)


def is_pushout(
    k_l: Homomorphism, k_c: Homomorphism, l_g: Homomorphism, c_g: Homomorphism
) -> bool:
    """True iff (G, l_g, c_g) is isomorphic as a cocone to pushout(k_l, k_c).

    Raises ValueError on a non-commuting square.  Because the canonical
    injections are jointly epi, the comparison iso is fully determined and the
    check is linear.
    """
    if not square_commutes(k_l, k_c, l_g, c_g):
        raise ValueError("square does not commute")
    g0, j_l, j_c = pushout(k_l, k_c)
    g = l_g.target
    if len(g0.nodes) != len(g.nodes) or len(g0.edges) != len(g.edges):
        return False
    # phi is forced: phi(j_l(x)) = l_g(x) and phi(j_c(y)) = c_g(y)
    node_map: dict[int, int] = {}
    edge_map: dict[int, int] = {}
    for leg, cand in ((j_l, l_g), (j_c, c_g)):
        for n, v in leg.node_map.items():
            w = cand.node_map[n]
            if node_map.setdefault(v, w) != w:
                return False
        for e, v in leg.edge_map.items():
            w = cand.edge_map[e]
            if edge_map.setdefault(v, w) != w:
                return False
    phi = Homomorphism(g0, g, node_map, edge_map)
    return phi.is_valid() and phi.is_iso()


def epi_mono_factorize(f: Homomorphism) -> tuple[Homomorphism, Homomorphism]:
    """Factor f as an epi onto its image followed by a mono inclusion.

    The image object reuses the target's ids, so the mono is an inclusion.
    """
    img_nodes = frozenset(f.node_map.values())
    img_edges = {e: f.target.edges[e] for e in set(f.edge_map.values())}
    img = Hypergraph(f.target.signature, img_nodes, img_edges)
    epi = Homomorphism(f.source, img, dict(f.node_map), dict(f.edge_map))
    mono = Homomorphism(
        img, f.target, {n: n for n in img_nodes}, {e: e for e in img_edges}
    )
    return epi, mono


def cocone_isomorphic(
    legs_a: tuple[Homomorphism, ...], legs_b: tuple[Homomorphism, ...]
) -> bool:
    """True if two cocones over the same diagram are isomorphic.

    Both tuples must list legs with pairwise equal sources; the comparison iso
    must commute with every leg.  When the legs are jointly epi the candidate
    iso is forced, otherwise an iso search with the forced partial assignment
    runs.
    """
    if len(legs_a) != len(legs_b):
        return False
    ga, gb = legs_a[0].target, legs_b[0].target
    fixed_nodes: dict[int, int] = {}
    fixed_edges: dict[int, int] = {}
    for la, lb in zip(legs_a, legs_b):
        if la.source != lb.source:
            return False
        for n, v in la.node_map.items():
            w = lb.node_map[n]
            if fixed_nodes.setdefault(v, w) != w:
                return False
        for e, v in la.edge_map.items():
            w = lb.edge_map[e]
            if fixed_edges.setdefault(v, w) != w:
                return False
    return isomorphism(ga, gb, fixed_nodes=fixed_nodes, fixed_edges=fixed_edges) is not None


@dataclass(frozen=True)
class ComplementDiagnostic:
    reason: str


def _mono_pushout_complement(
    l: Homomorphism, m: Homomorphism
) -> tuple[list[tuple[Homomorphism, Homomorphism]], Optional[ComplementDiagnostic]]:
    """Complement along a mono left leg, by deletion; at most one result."""
    k, lg, g = l.source, l.target, m.target
    k_nodes_img = {l.node_map[n] for n in k.nodes}
    k_edges_img = {l.edge_map[e] for e in k.edges}
    del_nodes_l = [n for n in lg.nodes if n not in k_nodes_img]
    del_edges_l = [e for e in lg.edges if e not in k_edges_img]

    # identification condition: items identified by the match must come from K
    inv_nodes: dict[int, list[int]] = {}
    for n in lg.nodes:
        inv_nodes.setdefault(m.node_map[n], []).append(n)
    for vs in inv_nodes.values():
        if len(vs) > 1 and any(v not in k_nodes_img for v in vs):
            return [], ComplementDiagnostic("identification condition fails on nodes")
    inv_edges: dict[int, list[int]] = {}
    for e in lg.edges:
        inv_edges.setdefault(m.edge_map[e], []).append(e)
    for vs in inv_edges.values():
        if len(vs) > 1 and any(v not in k_edges_img for v in vs):
            return [], ComplementDiagnostic("identification condition fails on edges")

    gone_nodes = {m.node_map[n] for n in del_nodes_l}
    gone_edges = {m.edge_map[e] for e in del_edges_l}
    # a node deleted via one L-item but kept via a K-item would be inconsistent
    kept_from_k = {m.node_map[n] for n in k_nodes_img}
    if gone_nodes & kept_from_k:
        return [], ComplementDiagnostic("identification condition fails on nodes")

    # dangling condition
    for eid, e in g.edges.items():
        if eid in gone_edges:
            continue
        if any(n in gone_nodes for n in itertools.chain(e.sources, e.targets)):
            return [], ComplementDiagnostic("dangling condition fails")

    c_nodes = frozenset(n for n in g.nodes if n not in gone_nodes)
    c_edges = {e: g.edges[e] for e in g.edges if e not in gone_edges}
    c = Hypergraph(g.signature, c_nodes, c_edges)
    c_to_g = Homomorphism(c, g, {n: n for n in c_nodes}, {e: e for e in c_edges})
    k_to_c = Homomorphism(
        k,
        c,
        {n: m.node_map[l.node_map[n]] for n in k.nodes},
        {e: m.edge_map[l.edge_map[e]] for e in k.edges},
    )
    if not is_pushout(l, k_to_c, m, c_to_g):
        return [], ComplementDiagnostic("candidate failed pushout validation")
    return [(k_to_c, c_to_g)], None


def _set_partitions(items: list) -> Iterator[list[list]]:
    """All set partitions, deterministically (restricted growth strings)."""
    if not items:
        yield []
        return

    def rec(i: int, blocks: list[list]) -> Iterator[list[list]]:
        if i == len(items):
            yield [list(b) for b in blocks]
            return
        x = items[i]
        for b in blocks:
            b.append(x)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([x])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


def _discrete_pushout_complements(
    l: Homomorphism, m: Homomorphism
) -> tuple[list[tuple[Homomorphism, Homomorphism]], Optional[ComplementDiagnostic]]:
    """All complements for a discrete apex, by enumerating node splittings.

    For each G-node the K-nodes above it may be grouped into any partition
    (each group becomes one C-node above it) and every remaining tentacle
    chooses an attachment; candidates are validated by is_pushout and
    de-duplicated up to cocone isomorphism.
    """
    k, lg, g = l.source, l.target, m.target

    # the match must be injective on edges: with a discrete apex no edge merge
    # can be produced by the pushout
    if len(set(m.edge_map.values())) != len(lg.edges):
        return [], ComplementDiagnostic("match identifies edges; no complement for discrete apex")
    image_edges = set(m.edge_map.values())
    c_edge_ids = sorted(e for e in g.edges if e not in image_edges)

    # per G-node bookkeeping
    l_above: dict[int, list[int]] = {n: [] for n in g.nodes}
    for n in lg.nodes:
        l_above[m.node_map[n]].append(n)
    k_above: dict[int, list[int]] = {n: [] for n in g.nodes}
    for kn in sorted(k.nodes):
        k_above[m.node_map[l.node_map[kn]]].append(kn)
    slots: dict[int, list[tuple[int, str, int]]] = {n: [] for n in g.nodes}
    for eid in c_edge_ids:
        e = g.edges[eid]
        for i, n in enumerate(e.sources):
            slots[n].append((eid, "s", i))
        for i, n in enumerate(e.targets):
            slots[n].append((eid, "t", i))

    # feasibility per node and enumeration of local choices
    per_node_choices: list[tuple[int, list[tuple[list[list[int]], list[int]]]]] = []
    for n in sorted(g.nodes):
        xs, ks, sl = l_above[n], k_above[n], slots[n]
        choices: list[tuple[list[list[int]], list[int]]] = []
        if not xs:
            # context-only node: exactly one C-node above it
            if ks:
                raise AssertionError("K-node above a node outside the match image")
            choices.append(([["*"]], [0] * len(sl)))  # a single anonymous C-node
        else:
            if not ks:
                # no gluing points: the class must be the single L-node alone
                if len(xs) > 1 or sl:
                    return [], ComplementDiagnostic(
                        f"gluing fails at node {n}: context touches a non-interface image node"
                    )
                choices.append(([], []))
            else:
                undecided = [x for x in xs if not any(l.node_map[kn] == x for kn in ks)]
                if undecided and (len(xs) > 1 or sl):
                    # an L-node with no K-preimage cannot share its class
                    return [], ComplementDiagnostic(
                        f"gluing fails at node {n}: merged or context-touched internal node"
                    )
                if undecided:
                    choices.append(([], []))
                else:
                    for part in _set_partitions(ks):
                        # connectivity: the bipartite graph (xs + groups, via l) must
                        # be connected so the pushout collapses it to one node
                        if not _connected(xs, part, l):
                            continue
                        if sl and not part:
                            continue
                        if not part:
                            choices.append(([], []))
                            continue
                        for attach in itertools.product(range(len(part)), repeat=len(sl)):
                            choices.append(([list(b) for b in part], list(attach)))
        if not choices:
            return [], ComplementDiagnostic(f"no consistent splitting at node {n}")
        per_node_choices.append((n, choices))

    results: list[tuple[Homomorphism, Homomorphism]] = []
    for combo in itertools.product(*(c for _, c in per_node_choices)):
        c_nodes: list[tuple[int, int]] = []  # (g_node, group_index)
        k_to_cnode: dict[int, tuple[int, int]] = {}
        slot_attach: dict[tuple[int, str, int], tuple[int, int]] = {}
        ok = True
        for (n, _), (part, attach) in zip(per_node_choices, combo):
            groups = part
            for gi in range(len(groups)):
                c_nodes.append((n, gi))
            for gi, group in enumerate(groups):
                for kn in group:
                    if kn != "*":
                        k_to_cnode[kn] = (n, gi)
            for slot, gi in zip(slots[n], attach):
                slot_attach[slot] = (n, gi)
        node_index = {p: i for i, p in enumerate(sorted(c_nodes))}
        edges = {}
        for new_id, eid in enumerate(c_edge_ids):
            e = g.edges[eid]
            try:
                srcs = tuple(node_index[slot_attach[(eid, "s", i)]] for i in range(len(e.sources)))
                tgts = tuple(node_index[slot_attach[(eid, "t", i)]] for i in range(len(e.targets)))
            except KeyError:
                ok = False
                break
            edges[new_id] = Edge(e.label, srcs, tgts)
        if not ok:
            continue
        c = Hypergraph(g.signature, frozenset(range(len(node_index))), edges)
        c_to_g = Homomorphism(
            c,
            g,
            {i: p[0] for p, i in node_index.items()},
            {new_id: eid for new_id, eid in enumerate(c_edge_ids)},
        )
        try:
            k_to_c = Homomorphism(
                k, c, {kn: node_index[k_to_cnode[kn]] for kn in k.nodes}, {}
            )
        except KeyError:
            continue
        if not square_commutes(l, k_to_c, m, c_to_g):
            continue
        if not is_pushout(l, k_to_c, m, c_to_g):
            continue
        duplicate = False
        for prev_k, prev_c in results:
            if _complement_isomorphic(prev_k, prev_c, k_to_c, c_to_g):
                duplicate = True
                break
        if not duplicate:
            results.append((k_to_c, c_to_g))
    if not results:
        return [], ComplementDiagnostic("no splitting satisfies the gluing condition")
    return results, None


def _connected(xs: list[int], groups: list[list[int]], l: Homomorphism) -> bool:
    """Connectivity of the bipartite graph on L-nodes xs and K-groups."""
    if not groups:
        return len(xs) <= 1
    adj: dict = {("x", x): set() for x in xs}
    for gi, group in enumerate(groups):
        adj[("g", gi)] = set()
        for kn in group:
            x = l.node_map[kn]
            adj[("g", gi)].add(("x", x))
            adj[("x", x)].add(("g", gi))
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def _complement_isomorphic(
    k1: Homomorphism, c1: Homomorphism, k2: Homomorphism, c2: Homomorphism
) -> bool:
    """Cocone iso between two complements: psi with k1;psi = k2 and psi;c2 = c1."""
    a, b = k1.target, k2.target
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False
    fixed = {}
    for kn, v in k1.node_map.items():
        w = k2.node_map[kn]
        if fixed.setdefault(v, w) != w:
            return False
    for phi in _iso_candidates(a, b, fixed):
        if all(c1.node_map[n] == c2.node_map[phi.node_map[n]] for n in a.nodes) and all(
            c1.edge_map[e] == c2.edge_map[phi.edge_map[e]] for e in a.edges
        ):
            return True
    return False


def _iso_candidates(a: Hypergraph, b: Hypergraph, fixed_nodes: dict) -> Iterator[Homomorphism]:
    from .hypergraph import homomorphisms

    for h in homomorphisms(a, b, mono=True, fixed_nodes=fixed_nodes):
        if h.is_epi():
            yield h


def pushout_complements(
    l: Homomorphism, m: Homomorphism
) -> tuple[list[tuple[Homomorphism, Homomorphism]], Optional[ComplementDiagnostic]]:
    """All pushout complements of K -l-> L -m-> G, up to cocone isomorphism.

    Returns (complements, diagnostic); the diagnostic explains an empty list.
    Raises UnsupportedRuleShape when l is neither mono nor has a discrete
    source.
    """
    if l.target != m.source:
        raise ValueError("l and m do not compose")
    if l.is_mono():
        return _mono_pushout_complement(l, m)
    if l.source.is_discrete():
        return _discrete_pushout_complements(l, m)
    raise UnsupportedRuleShape(
        "pushout complements are only supported for mono left legs or discrete apexes"
    )


def mixed_decomposition_check(
    k_cp: Homomorphism,
    k_l: Homomorphism,
    cp_gp: Homomorphism,
    l_gp: Homomorphism,
    cp_c: Homomorphism,
    c_g: Homomorphism,
    gp_g: Homomorphism,
) -> bool:
    """Check the two-square decomposition of a pushout over a pullback.

    Layout: K -> C' -> C on top of L -> G' -> G, with gp_g mono.  Preconditions
    (outer rectangle a pushout, right square a pullback, mono) are verified;
    the result is whether both inner squares validate as pushouts.
    """
    if not gp_g.is_mono():
        raise ValueError("the comparison morphism must be mono")
    outer_top = k_cp.compose(cp_c)
    if not is_pushout(k_l, outer_top, l_gp.compose(gp_g), c_g):
        raise ValueError("outer rectangle is not a pushout")
    p, p1, p2 = pullback(gp_g, c_g)
    if not cocone_spans_isomorphic(p1, p2, cp_gp, cp_c):
        raise ValueError("right square is not a pullback")
    try:
        left = is_pushout(k_cp, k_l, cp_gp, l_gp)
    except ValueError:
        return False
    # the right square, read as a pushout square over the span C' -> G', C' -> C
    try:
        right = is_pushout(cp_gp, cp_c, gp_g, c_g)
    except ValueError:
        return False
    return left and right


def cocone_spans_isomorphic(
    p1: Homomorphism, p2: Homomorphism, q1: Homomorphism, q2: Homomorphism
) -> bool:
    """Spans (P, p1, p2) and (Q, q1, q2) over the same cospan are isomorphic."""
    p, q = p1.source, q1.source
    if len(p.nodes) != len(q.nodes) or len(p.edges) != len(q.edges):
        return False
    for phi in _iso_candidates(p, q, {}):
        if all(p1.node_map[n] == q1.node_map[phi.node_map[n]] for n in p.nodes) and all(
            p2.node_map[n] == q2.node_map[phi.node_map[n]] for n in p.nodes
        ) and all(
            p1.edge_map[e] == q1.edge_map[phi.edge_map[e]] for e in p.edges
        ) and all(
            p2.edge_map[e] == q2.edge_map[phi.edge_map[e]] for e in p.edges
        ):
            return True
    return False
