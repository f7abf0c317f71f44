"""Monogamous-acyclic structure, convex matching and boundary complements.

Inputs of a graph are its in-degree-0 nodes, outputs its out-degree-0 nodes,
where degrees count (edge, position) tentacles.  A graph is monogamous
acyclic when it has no directed cycle and every node has in- and out-degree
at most one; such graphs carry a canonical interface listing inputs then
outputs, each ordered by node id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .category import is_pushout, pushout, pushout_complements
from .engine import RewriteRule, RewriteStep, RewritingSystem
from .hypergraph import (
    GraphWithInterface,
    Homomorphism,
    Hypergraph,
    discrete,
    homomorphisms,
)
from .terms import Cospan


@dataclass(frozen=True)
class MaAnalysis:
    graph: Hypergraph
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    acyclic: bool
    monogamous: bool

    @property
    def is_ma(self) -> bool:
        return self.acyclic and self.monogamous


def _edge_adjacency(g: Hypergraph) -> dict[int, list[int]]:
    """e -> e' iff at least one target of e is a source of e'."""
    by_source: dict[int, list[int]] = {}
    for eid, e in g.edges.items():
        for n in e.sources:
            by_source.setdefault(n, []).append(eid)
    adj: dict[int, list[int]] = {}
    for eid, e in g.edges.items():
        succ: list[int] = []
        for n in e.targets:
            succ.extend(by_source.get(n, []))
        adj[eid] = sorted(set(succ))
    return adj


def _has_edge_cycle(g: Hypergraph) -> bool:
    adj = _edge_adjacency(g)
    color: dict[int, int] = {}

    def dfs(u: int) -> bool:
        color[u] = 1
        for v in adj[u]:
            c = color.get(v, 0)
            if c == 1:
                return True
            if c == 0 and dfs(v):
                return True
        color[u] = 2
        return False

    return any(color.get(e, 0) == 0 and dfs(e) for e in g.edges)


def analyze_ma(g: Hypergraph) -> MaAnalysis:
    inputs = tuple(n for n in g.sorted_nodes() if g.in_degree(n) == 0)
    outputs = tuple(n for n in g.sorted_nodes() if g.out_degree(n) == 0)
    monogamous = all(g.in_degree(n) <= 1 and g.out_degree(n) <= 1 for n in g.nodes)
    return MaAnalysis(g, inputs, outputs, not _has_edge_cycle(g), monogamous)


def reachable_nodes(g: Hypergraph, start: int) -> frozenset[int]:
    """Nodes reachable from start by a nonempty directed path."""
    adj = _edge_adjacency(g)
    start_edges = [eid for eid, e in g.edges.items() if start in e.sources]
    seen_edges: set[int] = set()
    stack = list(start_edges)
    while stack:
        e = stack.pop()
        if e in seen_edges:
            continue
        seen_edges.add(e)
        stack.extend(adj[e])
    out: set[int] = set()
    for e in seen_edges:
        out.update(g.edges[e].targets)
    return frozenset(out)


def path_exists(g: Hypergraph, src: int, dst: int) -> bool:
    return dst in reachable_nodes(g, src)


def is_strongly_connected(g: Hypergraph) -> bool:
    """Every input has a directed path to every output (trivial if equal)."""
    a = analyze_ma(g)
    for x in a.inputs:
        reach = reachable_nodes(g, x)
        for y in a.outputs:
            if y != x and y not in reach:
                return False
    return True


def is_ma_cospan(c: Cospan) -> bool:
    a = analyze_ma(c.apex)
    if not a.is_ma:
        return False
    if not (c.left.is_mono() and c.right.is_mono()):
        return False
    return set(c.left_legs()) == set(a.inputs) and set(c.right_legs()) == set(a.outputs)


def ma_interface(g: Hypergraph) -> GraphWithInterface:
    """The canonical interface of an ma graph: inputs then outputs by id."""
    a = analyze_ma(g)
    if not a.is_ma:
        raise ValueError("graph is not monogamous acyclic")
    return GraphWithInterface.from_legs(g, list(a.inputs) + list(a.outputs))


def ma_cospan_split(g: GraphWithInterface) -> Optional[tuple[list[int], list[int]]]:
    """Split the interface nodes into input legs and output legs so that both
    legs are mono with images exactly the inputs/outputs; None if impossible.

    Isolated nodes are both an input and an output and need one leg on each
    side.  Returns (input_leg_js, output_leg_js) as lists of interface node
    ids in id order.
    """
    a = analyze_ma(g.graph)
    if not a.is_ma:
        return None
    ins, outs = set(a.inputs), set(a.outputs)
    in_js: list[int] = []
    out_js: list[int] = []
    hit_in: set[int] = set()
    hit_out: set[int] = set()
    both = sorted(ins & outs)
    pending: dict[int, list[int]] = {n: [] for n in both}
    for j in sorted(g.interface.source.nodes):
        v = g.interface.node_map[j]
        if v in pending:
            pending[v].append(j)
            continue
        if v in ins:
            if v in hit_in:
                return None
            hit_in.add(v)
            in_js.append(j)
        elif v in outs:
            if v in hit_out:
                return None
            hit_out.add(v)
            out_js.append(j)
        else:
            return None
    for v, js in pending.items():
        if len(js) != 2:
            return None
        in_js.append(js[0])
        out_js.append(js[1])
        hit_in.add(v)
        hit_out.add(v)
    if hit_in != ins or hit_out != outs:
        return None
    return (sorted(in_js), sorted(out_js))


def is_ma_graph_with_interface(g: GraphWithInterface) -> bool:
    return ma_cospan_split(g) is not None


def rule_boundary_split(rule: RewriteRule) -> Optional[tuple[list[int], list[int]]]:
    """Split the rule apex into input and output legs so that both sides read
    as ma-cospans (each restricted leg mono, hitting exactly the side's
    inputs/outputs); None when the rule is not an ma-rule.

    The copairing of the legs need not be mono: a side may be a bare wire
    whose single node is both an input and an output.
    """
    if not rule.apex.is_discrete():
        return None
    al = analyze_ma(rule.lhs)
    ar = analyze_ma(rule.rhs)
    if not (al.is_ma and ar.is_ma):
        return None
    ks = sorted(rule.apex.nodes)
    allowed: list[tuple[int, set[str]]] = []
    for k in ks:
        vl, vr = rule.left.node_map[k], rule.right.node_map[k]
        sides = set()
        if vl in al.inputs and vr in ar.inputs:
            sides.add("i")
        if vl in al.outputs and vr in ar.outputs:
            sides.add("o")
        if not sides:
            return None
        allowed.append((k, sides))

    want = (set(al.inputs), set(al.outputs), set(ar.inputs), set(ar.outputs))

    def ok(assign: dict[int, str]) -> bool:
        li = [rule.left.node_map[k] for k in ks if assign[k] == "i"]
        lo = [rule.left.node_map[k] for k in ks if assign[k] == "o"]
        ri = [rule.right.node_map[k] for k in ks if assign[k] == "i"]
        ro = [rule.right.node_map[k] for k in ks if assign[k] == "o"]
        return (
            len(set(li)) == len(li)
            and len(set(lo)) == len(lo)
            and len(set(ri)) == len(ri)
            and len(set(ro)) == len(ro)
            and (set(li), set(lo), set(ri), set(ro)) == want
        )

    ambiguous = [k for k, sides in allowed if len(sides) == 2]
    assign = {k: next(iter(sides)) for k, sides in allowed if len(sides) == 1}
    import itertools as _it

    for combo in _it.product("io", repeat=len(ambiguous)):
        assign.update(dict(zip(ambiguous, combo)))
        if ok(assign):
            return (
                sorted(k for k in ks if assign[k] == "i"),
                sorted(k for k in ks if assign[k] == "o"),
            )
    return None


def is_ma_rule(rule: RewriteRule) -> bool:
    return rule_boundary_split(rule) is not None


def is_convex_match(m: Homomorphism) -> bool:
    """Mono, and every directed path between image nodes stays in the image."""
    if not m.is_mono():
        return False
    g = m.target
    image_nodes = m.image_nodes()
    image_edges = m.image_edges()
    adj = _edge_adjacency(g)
    # edges reachable from an image node
    from_img: set[int] = set()
    stack = [eid for eid, e in g.edges.items() if any(n in image_nodes for n in e.sources)]
    while stack:
        e = stack.pop()
        if e in from_img:
            continue
        from_img.add(e)
        stack.extend(adj[e])
    # edges from which an image node is reachable
    radj: dict[int, list[int]] = {e: [] for e in g.edges}
    for e, succ in adj.items():
        for s in succ:
            radj[s].append(e)
    to_img: set[int] = set()
    stack = [eid for eid, e in g.edges.items() if any(n in image_nodes for n in e.targets)]
    while stack:
        e = stack.pop()
        if e in to_img:
            continue
        to_img.add(e)
        stack.extend(radj[e])
    return not any(e not in image_edges for e in from_img & to_img)


def is_left_connected(system: RewritingSystem) -> bool:
    """Every rule left-linear, an ma-rule, with a strongly connected lhs."""
    for rule in system.rules:
        if not rule.is_left_linear():
            return False
        if not is_ma_rule(rule):
            return False
        if not is_strongly_connected(rule.lhs):
            return False
    return True


def boundary_complement(
    rule: RewriteRule, match: Homomorphism, g: GraphWithInterface
) -> Optional[tuple[Homomorphism, Homomorphism, Homomorphism]]:
    """The unique pushout complement whose induced cospan is again monogamous
    acyclic; returns (K -> C, C -> G, J -> C) or None.

    Requires an ma-rule, a mono match and an ma graph-with-interface.
    """
    rsplit = rule_boundary_split(rule)
    gsplit = ma_cospan_split(g)
    if rsplit is None or gsplit is None or not match.is_mono():
        return None
    rule_ins, rule_outs = rsplit
    g_in_js, g_out_js = gsplit
    complements, _ = pushout_complements(rule.left, match)
    found: list[tuple[Homomorphism, Homomorphism, Homomorphism]] = []
    for comp_k, comp_g in complements:
        if not comp_k.is_mono():
            continue
        for d in _factorings(g.interface, comp_g):
            c = comp_g.source
            a = analyze_ma(c)
            if not a.is_ma:
                continue
            # boundary cospan: rule outputs + graph inputs  ->  C  <- graph outputs + rule inputs
            left_leg = [comp_k.node_map[k] for k in rule_outs] + [d.node_map[j] for j in g_in_js]
            right_leg = [comp_k.node_map[k] for k in rule_ins] + [d.node_map[j] for j in g_out_js]
            if len(set(left_leg)) != len(left_leg) or set(left_leg) != set(a.inputs):
                continue
            if len(set(right_leg)) != len(right_leg) or set(right_leg) != set(a.outputs):
                continue
            found.append((comp_k, comp_g, d))
    if not found:
        return None
    if len(found) > 1:
        # uniqueness is a theorem; distinct factorings may still induce the
        # same complement, so tolerate duplicates that agree up to iso
        first = found[0]
        for other in found[1:]:
            if not _same_complement(first, other):
                raise AssertionError("boundary complement is not unique")
    return found[0]


def _same_complement(
    a: tuple[Homomorphism, Homomorphism, Homomorphism],
    b: tuple[Homomorphism, Homomorphism, Homomorphism],
) -> bool:
    from .category import cocone_spans_isomorphic

    return cocone_spans_isomorphic(a[0], a[1], b[0], b[1])


def _factorings(interface: Homomorphism, comp_g: Homomorphism) -> Iterator[Homomorphism]:
    from .engine import _interface_factorings

    yield from _interface_factorings(interface, comp_g)


def enumerate_ma_pre_critical_pairs(system: RewritingSystem, **kwargs):
    """Jointly-epi monogamous-acyclic overlaps with canonical interfaces and
    convex branch steps (see critical.iter_pre_critical_pairs)."""
    from .critical import enumerate_pre_critical_pairs

    if system.mode != "convex":
        raise ValueError("ma pre-critical pairs require a convex-mode system")
    return enumerate_pre_critical_pairs(system, **kwargs)


def decide_confluence_left_connected(system: RewritingSystem, caps=None, **kwargs):
    """Confluence of a terminating left-connected system by joinability of
    its ma pre-critical pairs under convex rewriting.

    Refuses non-left-connected systems: their convex matches are context
    sensitive and need the path-extension analysis instead.
    """
    import time as _time

    from .critical import PairResult, _report, check_joinable, iter_pre_critical_pairs, parallel_join

    if system.mode != "convex":
        raise ValueError("left-connected checking requires a convex-mode system")
    if not is_left_connected(system):
        raise ValueError(
            "system is not left-connected; use decide_local_confluence_convex "
            "(path-extension analysis) instead"
        )
    t0 = _time.perf_counter()
    max_pairs = kwargs.get("max_pairs")
    short_circuit = kwargs.get("short_circuit", True)
    parallel_fast_path = kwargs.get("parallel_fast_path", True)
    results: list[PairResult] = []
    truncated = False
    enumeration_truncated = False
    count = 0
    for pair in iter_pre_critical_pairs(system):
        count += 1
        if max_pairs is not None and count > max_pairs:
            enumeration_truncated = True
            break
        res = None
        if parallel_fast_path and pair.parallel:
            joined = parallel_join(system, pair)
            if joined is not None:
                res = PairResult(pair, "joinable", witness=joined[0], via="parallel")
        if res is None:
            res = check_joinable(system, pair, caps)
        results.append(res)
        if res.joinability == "truncated":
            truncated = True
        if res.joinability == "not-joinable" and short_circuit:
            break
    return _report(system.mode, results, caps, truncated, enumeration_truncated, t0)


def convex_step(
    system: RewritingSystem,
    rule: RewriteRule,
    match: Homomorphism,
    g: GraphWithInterface,
) -> Optional[RewriteStep]:
    """A convex rewriting step: convex match plus boundary complement; the
    result is again an ma graph with the same interface."""
    if not is_convex_match(match):
        return None
    bc = boundary_complement(rule, match, g)
    if bc is None:
        return None
    comp_k, comp_g, d = bc
    h, in_c, in_r = pushout(comp_k, rule.right)
    result = GraphWithInterface(h, d.compose(in_c))
    return RewriteStep(
        rule=rule,
        source=g,
        match=match,
        complement_k=comp_k,
        complement_g=comp_g,
        interface_factor=d,
        result_injection=in_c,
        co_match=in_r,
        result=result,
    )
