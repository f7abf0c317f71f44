"""Shared builders for the test suite: the case-study systems, random
systems, and the brute-force pushout oracle."""

from __future__ import annotations

import itertools
import random

from dpoi import (
    Homomorphism,
    Hypergraph,
    RewriteRule,
    RewritingSystem,
    Signature,
    coproduct,
    discrete,
    parse_term,
    rewire,
)
from dpoi.category import cocone_isomorphic, square_commutes
from dpoi.hypergraph import Edge


def rule_from_terms(name: str, sig: Signature, lhs: str, rhs: str) -> RewriteRule:
    gl = rewire(parse_term(lhs), sig)
    gr = rewire(parse_term(rhs), sig)
    return RewriteRule(name, gl.interface, gr.interface)


def yang_baxter_system(mode: str = "convex") -> RewritingSystem:
    sig = Signature({"g": (2, 2)})
    rule = rule_from_terms(
        "yb",
        sig,
        "(g + id:1) ; (id:1 + g) ; (g + id:1)",
        "(id:1 + g) ; (g + id:1) ; (id:1 + g)",
    )
    return RewritingSystem(sig, (rule,), mode=mode)


def edge_swap_system() -> RewritingSystem:
    """Two rules consuming one directed a-edge: relabel forward / reversed."""
    sig = Signature({"a": (1, 1), "b": (1, 1)})
    L = Hypergraph.build(sig, 2, [("a", [0], [1])])
    K = discrete(2, sig)
    l = Homomorphism(K, L, {0: 0, 1: 1}, {})
    r1 = RewriteRule(
        "relabel",
        l,
        Homomorphism(K, Hypergraph.build(sig, 2, [("b", [0], [1])]), {0: 0, 1: 1}, {}),
    )
    r2 = RewriteRule(
        "relabel_rev",
        l,
        Homomorphism(K, Hypergraph.build(sig, 2, [("b", [1], [0])]), {0: 0, 1: 1}, {}),
    )
    return RewritingSystem(sig, (r1, r2), mode="plain-dpoi")


def fsa_system() -> RewritingSystem:
    sig = Signature({"m": (2, 1), "d": (1, 2)})
    rules = tuple(
        rule_from_terms(n, sig, l, r)
        for n, l, r in [
            ("FS1", "(m + id:1) ; m", "(id:1 + m) ; m"),
            ("FS2", "d ; (d + id:1)", "d ; (id:1 + d)"),
            ("FS3", "(d + id:1) ; (id:1 + m)", "m ; d"),
            ("FS4", "(id:1 + d) ; (m + id:1)", "m ; d"),
        ]
    )
    return RewritingSystem(sig, rules, mode="convex")


def bimonoid_system() -> RewritingSystem:
    sig = Signature({"m": (2, 1), "u": (0, 1), "d": (1, 2), "e": (1, 0)})
    rules = tuple(
        rule_from_terms(n, sig, l, r)
        for n, l, r in [
            ("assoc", "(m + id:1) ; m", "(id:1 + m) ; m"),
            ("coassoc", "d ; (d + id:1)", "d ; (id:1 + d)"),
            ("bi", "m ; d", "(d + d) ; (id:1 + sym:1,1 + id:1) ; (m + m)"),
            ("unit_d", "u ; d", "u + u"),
            ("mul_e", "m ; e", "e + e"),
            ("unit_e", "u ; e", "id:0"),
            ("unit_l", "(u + id:1) ; m", "id:1"),
            ("unit_r", "(id:1 + u) ; m", "id:1"),
            ("counit_l", "d ; (e + id:1)", "id:1"),
            ("counit_r", "d ; (id:1 + e)", "id:1"),
        ]
    )
    return RewritingSystem(sig, rules, mode="convex")


def parallel_wires_system() -> RewritingSystem:
    sig = Signature({"g": (1, 1), "h": (1, 1)})
    return RewritingSystem(
        sig, (rule_from_terms("absorb", sig, "g + h", "h + h"),), mode="convex"
    )


# -- random generators -------------------------------------------------------


def random_signature(rng: random.Random, max_gens: int = 3) -> Signature:
    names = ["f", "g", "h"][: rng.randint(1, max_gens)]
    gens = {}
    for n in names:
        gens[n] = (rng.randint(0, 2), rng.randint(0, 2))
        if gens[n] == (0, 0):
            gens[n] = (1, 1)
    return Signature(gens)


def random_graph(
    rng: random.Random, sig: Signature, max_nodes: int = 4, max_edges: int = 2
) -> Hypergraph:
    n = rng.randint(1, max_nodes)
    labels = sorted(sig.generators)
    edges = []
    for _ in range(rng.randint(0, max_edges)):
        lab = rng.choice(labels)
        ar, coar = sig.arity(lab)
        if ar > n or coar > n:
            continue
        edges.append(
            (
                lab,
                [rng.randrange(n) for _ in range(ar)],
                [rng.randrange(n) for _ in range(coar)],
            )
        )
    return Hypergraph.build(sig, n, edges)


def random_discrete_apex_rule(
    rng: random.Random, sig: Signature, name: str, shrinking: bool = False
) -> RewriteRule:
    """A rule with a discrete apex mapped anywhere into both sides; with
    shrinking=True the right side has strictly fewer edges (termination)."""
    while True:
        lhs = random_graph(rng, sig, max_nodes=3, max_edges=2)
        if len(lhs.edges) >= (1 if shrinking else 0):
            break
    max_r_edges = len(lhs.edges) - 1 if shrinking else 2
    rhs = random_graph(rng, sig, max_nodes=3, max_edges=max(max_r_edges, 0))
    while shrinking and len(rhs.edges) >= len(lhs.edges):
        rhs = random_graph(rng, sig, max_nodes=3, max_edges=len(lhs.edges) - 1)
    k = discrete(rng.randint(0, 3), sig)
    lnodes = lhs.sorted_nodes()
    rnodes = rhs.sorted_nodes()
    left = Homomorphism(k, lhs, {i: rng.choice(lnodes) for i in k.nodes}, {})
    right = Homomorphism(k, rhs, {i: rng.choice(rnodes) for i in k.nodes}, {})
    return RewriteRule(name, left, right)


def random_discrete_apex_system(
    rng: random.Random, shrinking: bool = False, mode: str = "plain-dpoi"
) -> RewritingSystem:
    sig = random_signature(rng)
    rules = tuple(
        random_discrete_apex_rule(rng, sig, f"r{i}", shrinking=shrinking)
        for i in range(rng.randint(1, 2))
    )
    return RewritingSystem(sig, rules, mode=mode)


def random_chain_term(rng: random.Random, sig: Signature, depth: int = 2) -> str:
    """A sequential chain of generators (strongly connected when typeable)."""
    labels = sorted(sig.generators)
    t = rng.choice(labels)
    cur = sig.arity(t)[1]
    src = t
    for _ in range(rng.randint(0, depth)):
        nxt = [l for l in labels if sig.arity(l)[0] == cur and sig.arity(l)[0] > 0]
        if not nxt:
            break
        l = rng.choice(nxt)
        src = f"({src}) ; {l}"
        cur = sig.arity(l)[1]
    return src


def random_ma_term(rng: random.Random, sig: Signature, dom: int, cod: int, depth: int = 2) -> str:
    """A random term of type dom -> cod, if one can be assembled."""
    labels = sorted(sig.generators)

    def go(d: int, c: int, fuel: int) -> str | None:
        if fuel == 0:
            return f"id:{d}" if d == c else None
        options = []
        if d == c:
            options.append(lambda: f"id:{d}")
        for l in labels:
            a, b = sig.arity(l)
            if (a, b) == (d, c):
                options.append(lambda l=l: l)
            # generator in parallel with wires
            if a <= d and c - (d - a) == b and d - a >= 0:
                rest = d - a
                if rest > 0:
                    options.append(lambda l=l, rest=rest: f"{l} + id:{rest}")
                    options.append(lambda l=l, rest=rest: f"id:{rest} + {l}")
        # sequential split through a middle boundary
        def seq() -> str | None:
            mid = rng.randint(max(0 if d == 0 and c == 0 else 1, min(d, c) - 1), max(d, c) + 1)
            first = go(d, mid, fuel - 1)
            second = go(mid, c, fuel - 1)
            if first and second:
                return f"({first}) ; ({second})"
            return None

        options.append(seq)
        rng.shuffle(options)
        for opt in options:
            out = opt()
            if out is not None:
                return out
        return None

    return go(dom, cod, depth + 1)


def random_left_connected_system(rng: random.Random) -> RewritingSystem | None:
    """A convex-mode system whose left sides are sequential generator chains
    (hence strongly connected); right sides are arbitrary ma terms of the
    same type."""
    from dpoi.ma import is_strongly_connected
    from dpoi.terms import term_type

    sig = random_signature(rng)
    labels = [l for l in sorted(sig.generators) if sig.arity(l)[0] > 0 and sig.arity(l)[1] > 0]
    if not labels:
        return None
    rules = []
    for i in range(rng.randint(1, 2)):
        lsrc = random_chain_term(rng, Signature({l: sig.arity(l) for l in labels}))
        t = term_type(parse_term(lsrc), sig)
        rsrc = random_ma_term(rng, sig, t[0], t[1])
        if rsrc is None:
            continue
        from dpoi.terms import TermTypeError

        try:
            if term_type(parse_term(rsrc), sig) != t:
                continue
        except TermTypeError:
            continue
        rule = rule_from_terms(f"r{i}", sig, lsrc, rsrc)
        if not is_strongly_connected(rule.lhs):
            continue
        rules.append(rule)
    if not rules:
        return None
    try:
        return RewritingSystem(sig, tuple(rules), mode="convex")
    except ValueError:
        return None


# -- brute-force pushout oracle ----------------------------------------------


def _set_partitions(items):
    if not items:
        yield []
        return

    def rec(i, blocks):
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


def quotient_cocones(f: Homomorphism, g: Homomorphism):
    """All jointly-epi cocones under the span (f, g), by brute-force
    enumeration of quotients of L+C that coequalise it; up to iso."""
    l, c = f.target, g.target
    sum_graph, i1, i2 = coproduct(l, c)
    items = sum_graph.sorted_nodes()
    edge_items = sum_graph.sorted_edges()
    for node_part in _set_partitions(items):
        cls_of = {}
        for bi, block in enumerate(node_part):
            for x in block:
                cls_of[x] = bi
        # does it coequalise on nodes?
        k = f.source
        if any(
            cls_of[i1.node_map[f.node_map[x]]] != cls_of[i2.node_map[g.node_map[x]]]
            for x in k.nodes
        ):
            continue
        # edge partitions: blocks must agree on label and endpoint classes
        def compatible(e1, e2):
            a, b = sum_graph.edges[e1], sum_graph.edges[e2]
            return (
                a.label == b.label
                and [cls_of[x] for x in a.sources] == [cls_of[x] for x in b.sources]
                and [cls_of[x] for x in a.targets] == [cls_of[x] for x in b.targets]
            )

        for edge_part in _set_partitions(edge_items):
            ok = all(
                compatible(block[0], e) for block in edge_part for e in block[1:]
            )
            if not ok:
                continue
            ecls_of = {}
            for bi, block in enumerate(edge_part):
                for x in block:
                    ecls_of[x] = bi
            if any(
                ecls_of[i1.edge_map[f.edge_map[x]]] != ecls_of[i2.edge_map[g.edge_map[x]]]
                for x in k.edges
            ):
                continue
            edges = {}
            for bi, block in enumerate(edge_part):
                e = sum_graph.edges[block[0]]
                edges[bi] = Edge(
                    e.label,
                    tuple(cls_of[x] for x in e.sources),
                    tuple(cls_of[x] for x in e.targets),
                )
            z = Hypergraph(l.signature, frozenset(range(len(node_part))), edges)
            z_l = Homomorphism(
                l,
                z,
                {n: cls_of[i1.node_map[n]] for n in l.nodes},
                {e: ecls_of[i1.edge_map[e]] for e in l.edges},
            )
            z_c = Homomorphism(
                c,
                z,
                {n: cls_of[i2.node_map[n]] for n in c.nodes},
                {e: ecls_of[i2.edge_map[e]] for e in c.edges},
            )
            yield z, z_l, z_c


def _mediates(z0, legs0, z, legs):
    """A (necessarily unique) mediating hom z0 -> z commuting with the legs;
    None if the assignments conflict or fail to be a homomorphism."""
    node_map, edge_map = {}, {}
    for leg0, leg in zip(legs0, legs):
        for n, v in leg0.node_map.items():
            w = leg.node_map[n]
            if node_map.setdefault(v, w) != w:
                return None
        for e, v in leg0.edge_map.items():
            w = leg.edge_map[e]
            if edge_map.setdefault(v, w) != w:
                return None
    h = Homomorphism(z0, z, node_map, edge_map)
    return h if h.is_valid() else None


def brute_force_is_pushout(
    k_l: Homomorphism, k_c: Homomorphism, l_g: Homomorphism, c_g: Homomorphism
) -> bool:
    """Universal-property check against every jointly-epi cocone: the square
    is a pushout iff its cocone mediates (uniquely) into all of them.

    Independent of the union-find pushout construction: cocones are found by
    brute-force partition enumeration.
    """
    if not square_commutes(k_l, k_c, l_g, c_g):
        raise ValueError("square does not commute")
    g = l_g.target
    # the cocone must be jointly epi, else two distinct mediating maps into
    # some cocone exist (or none lands on the extra material)
    covered_nodes = set(l_g.node_map.values()) | set(c_g.node_map.values())
    covered_edges = set(l_g.edge_map.values()) | set(c_g.edge_map.values())
    if covered_nodes != set(g.nodes) or covered_edges != set(g.edges):
        return False
    # initiality among jointly-epi coequalising cocones characterises the pushout
    for z, z_l, z_c in quotient_cocones(k_l, k_c):
        if _mediates(g, (l_g, c_g), z, (z_l, z_c)) is None:
            return False
    return True
