"""Pre-critical pairs, parallel pairs, joinability and confluence verdicts.

A pre-critical pair is a jointly-epi overlap S of two left-hand sides,
equipped with an interface and one rewriting step per side.  Overlaps are
enumerated as quotients of L1 + L2: a partial matching of equally-labelled
edges (which forces node merges through the tentacle equations), followed by
additional merges of gluing-boundary nodes.  Candidates whose steps do not
exist (no complement, or no interface factorisation) are skipped: they are
not pre-critical pairs.

The enumeration is lazy and ordered so that overlaps sharing edges come
first; confluence checking can therefore short-circuit on the first
definitively non-joinable pair without materialising the (possibly large)
family of parallel overlaps.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterator, Literal, Optional

from .category import (
    UnsupportedRuleShape,
    is_pushout,
    pullback,
    pushout,
    pushout_complements,
)
from .engine import (
    Caps,
    GraphWithInterface,
    JoinResult,
    RewriteRule,
    RewriteStep,
    RewritingSystem,
    apply_step,
    find_join,
)
from .hypergraph import (
    Edge,
    Homomorphism,
    Hypergraph,
    are_isomorphic,
    discrete,
)

PairKind = Literal["plain", "ma"]
Joinability = Literal["joinable", "not-joinable", "truncated"]


@dataclass(frozen=True)
class PreCriticalPair:
    """A joint overlap with interface and its two branch steps."""

    rule1: str
    rule2: str
    overlap: Hypergraph
    match1: Homomorphism
    match2: Homomorphism
    interface: Homomorphism
    context1: Homomorphism
    context2: Homomorphism
    step1: RewriteStep
    step2: RewriteStep
    kind: PairKind
    parallel: bool
    minimal: bool

    @property
    def source(self) -> GraphWithInterface:
        return self.step1.source

    @property
    def branch1(self) -> GraphWithInterface:
        return self.step1.result

    @property
    def branch2(self) -> GraphWithInterface:
        return self.step2.result

    def overlap_edge_count(self) -> int:
        return len(set(self.match1.edge_map.values()) & set(self.match2.edge_map.values()))


@dataclass
class PairResult:
    pair: PreCriticalPair
    joinability: Joinability
    witness: Optional[GraphWithInterface] = None
    via: Literal["search", "parallel"] = "search"


@dataclass
class ConfluenceReport:
    verdict: Literal["confluent", "not-confluent", "inconclusive"]
    mode: str
    pairs: list[PairResult]
    caps: Caps
    truncated: bool
    termination_assumed: bool = True
    enumeration_truncated: bool = False
    sigma_p_extension: bool = False
    stats: dict = field(default_factory=dict)


# -- overlap quotient enumeration -------------------------------------------


class _UF:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def _edge_matchings(
    l1: Hypergraph, l2: Hypergraph
) -> list[tuple[tuple[int, int], ...]]:
    """All partial injective label-preserving matchings between the edge sets;
    each matching is a sorted tuple of (edge1, edge2) pairs.

    Ordered smallest-nonempty first (single shared edges are the canonical
    critical overlaps), the empty matching last.
    """
    e1s = l1.sorted_edges()
    out: list[tuple[tuple[int, int], ...]] = []

    def rec(i: int, used2: set[int], acc: list[tuple[int, int]]) -> None:
        if i == len(e1s):
            out.append(tuple(acc))
            return
        e1 = e1s[i]
        for e2 in l2.sorted_edges():
            if e2 in used2 or l2.edges[e2].label != l1.edges[e1].label:
                continue
            used2.add(e2)
            acc.append((e1, e2))
            rec(i + 1, used2, acc)
            acc.pop()
            used2.discard(e2)
        rec(i + 1, used2, acc)

    rec(0, set(), [])
    out.sort(key=lambda m: (len(m) == 0, len(m), m))
    return out


@dataclass(frozen=True)
class OverlapCandidate:
    """A quotient of L1+L2: S together with the two induced matches.

    minimal means the node partition is exactly the one forced by the edge
    matching: the overlap is not a merged (contextualised) variant of a
    smaller one.
    """

    overlap: Hypergraph
    match1: Homomorphism
    match2: Homomorphism
    shared_edges: int
    partition_key: tuple
    minimal: bool


def _quotient(
    rule1: RewriteRule,
    rule2: RewriteRule,
    signature,
    matching: tuple[tuple[int, int], ...],
    node_classes: list[frozenset],
    minimal: bool,
) -> OverlapCandidate:
    """Build S and the two matches from an edge matching and node classes."""
    l1, l2 = rule1.lhs, rule2.lhs
    class_of: dict[tuple[int, int], frozenset] = {}
    for cls in node_classes:
        for item in cls:
            class_of[item] = cls
    ordered = sorted(node_classes, key=lambda c: min(c))
    node_id = {cls: i for i, cls in enumerate(ordered)}

    matched2 = {e2: e1 for e1, e2 in matching}
    edge_ids: dict[tuple[int, int], int] = {}
    edges: dict[int, Edge] = {}
    nxt = 0
    for e in l1.sorted_edges():
        edge_ids[(0, e)] = nxt
        nxt += 1
    for e in l2.sorted_edges():
        if e in matched2:
            edge_ids[(1, e)] = edge_ids[(0, matched2[e])]
        else:
            edge_ids[(1, e)] = nxt
            nxt += 1
    for copy, graph in ((0, l1), (1, l2)):
        for eid, e in graph.edges.items():
            edges[edge_ids[(copy, eid)]] = Edge(
                e.label,
                tuple(node_id[class_of[(copy, n)]] for n in e.sources),
                tuple(node_id[class_of[(copy, n)]] for n in e.targets),
            )
    s = Hypergraph(signature, frozenset(range(len(ordered))), edges)
    f1 = Homomorphism(
        l1,
        s,
        {n: node_id[class_of[(0, n)]] for n in l1.nodes},
        {e: edge_ids[(0, e)] for e in l1.edges},
    )
    f2 = Homomorphism(
        l2,
        s,
        {n: node_id[class_of[(1, n)]] for n in l2.nodes},
        {e: edge_ids[(1, e)] for e in l2.edges},
    )
    key = (
        tuple(sorted(tuple(sorted(cls)) for cls in node_classes)),
        tuple(sorted(matching)),
    )
    return OverlapCandidate(s, f1, f2, len(matching), key, minimal)


def _swap_key(key: tuple) -> tuple:
    node_part, matching = key
    swapped_nodes = tuple(
        sorted(
            tuple(sorted((1 - c, n) for c, n in cls))
            for cls in node_part
        )
    )
    swapped_matching = tuple(sorted((b, a) for a, b in matching))
    return (swapped_nodes, swapped_matching)


def _class_partitions_lazy(
    extendable: list[frozenset], block_ok
) -> Iterator[list[tuple[frozenset, ...]]]:
    """Set partitions of the extendable classes, fewest merges first; each
    block (a tuple of classes) must satisfy block_ok."""
    items = list(extendable)
    n = len(items)

    def rec(i: int, blocks: list[list[int]]) -> Iterator[list[tuple[frozenset, ...]]]:
        if i == n:
            yield [tuple(items[j] for j in b) for b in blocks]
            return
        # singleton continuation first: minimal-merge candidates come first
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()
        for b in blocks:
            if not block_ok(tuple(items[j] for j in b + [i])):
                continue
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()

    yield from rec(0, [])


def _overlap_candidates(
    rule1: RewriteRule,
    rule2: RewriteRule,
    signature,
    *,
    mono_matches: bool,
    ma_degrees: bool,
    include_parallel: bool,
    scope: str = "full",
) -> Iterator[OverlapCandidate]:
    """Lazily enumerate quotients of L1+L2; minimal overlaps come first.

    Node merges beyond those forced by shared edges are restricted to nodes
    in the gluing boundary (the image of the rule apex): a complement can
    only exist when merged or context-touched nodes are boundary nodes.
    scope="minimal" stops after the forced partitions.  With
    include_parallel=False, quotients with no shared edge are limited to
    those that can yield a non-parallel pair (merges touching an internal
    node, which requires an isolated lhs node -- only possible for
    non-left-linear rules).
    """
    l1, l2 = rule1.lhs, rule2.lhs
    boundary1 = {rule1.left.node_map[k] for k in rule1.apex.nodes}
    boundary2 = {rule2.left.node_map[k] for k in rule2.apex.nodes}

    def mergeable(item: tuple[int, int]) -> bool:
        copy, n = item
        return n in (boundary1 if copy == 0 else boundary2)

    def is_isolated(item: tuple[int, int]) -> bool:
        copy, n = item
        g = l1 if copy == 0 else l2
        return g.in_degree(n) == 0 and g.out_degree(n) == 0

    isolated = any(is_isolated((0, n)) for n in l1.nodes) or any(
        is_isolated((1, n)) for n in l2.nodes
    )

    seen: set[tuple] = set()
    same_rule = rule1.name == rule2.name

    def emit(cand: OverlapCandidate) -> Iterator[OverlapCandidate]:
        if cand.partition_key in seen:
            return
        seen.add(cand.partition_key)
        if same_rule:
            seen.add(_swap_key(cand.partition_key))
        yield cand

    def forced_setup(matching):
        """Base classes and their quotient degrees, or None if infeasible."""
        uf = _UF()
        for copy, g in ((0, l1), (1, l2)):
            for n in g.nodes:
                uf.find((copy, n))
        for e1, e2 in matching:
            x1, x2 = l1.edges[e1], l2.edges[e2]
            for a, b in zip(x1.sources + x1.targets, x2.sources + x2.targets):
                uf.union((0, a), (1, b))
        classes: dict = {}
        for copy, g in ((0, l1), (1, l2)):
            for n in g.nodes:
                classes.setdefault(uf.find((copy, n)), set()).add((copy, n))
        base = [frozenset(c) for c in classes.values()]
        matched2 = {e2 for _, e2 in matching}
        in_deg: dict[frozenset, int] = {c: 0 for c in base}
        out_deg: dict[frozenset, int] = {c: 0 for c in base}
        class_of = {}
        for c in base:
            for it in c:
                class_of[it] = c
        for copy, g in ((0, l1), (1, l2)):
            for eid, e in g.edges.items():
                if copy == 1 and eid in matched2:
                    continue
                for n in e.sources:
                    out_deg[class_of[(copy, n)]] += 1
                for n in e.targets:
                    in_deg[class_of[(copy, n)]] += 1
        if mono_matches:
            for cls in base:
                for copy in (0, 1):
                    if sum(1 for c, _ in cls if c == copy) > 1:
                        return None
        if ma_degrees and not all(in_deg[c] <= 1 and out_deg[c] <= 1 for c in base):
            return None
        return base, in_deg, out_deg

    matchings = [
        m
        for m in _edge_matchings(l1, l2)
        if m or include_parallel or isolated
    ]
    setups = {m: forced_setup(m) for m in matchings}

    # pass 1: the forced (minimal) partition of every matching
    for matching in matchings:
        setup = setups[matching]
        if setup is None:
            continue
        base, _, _ = setup
        if not matching and not include_parallel:
            continue  # the plain disjoint overlap is a parallel pair
        yield from emit(
            _quotient(rule1, rule2, signature, matching, base, minimal=True)
        )

    if scope == "minimal":
        return

    # pass 2: merged variants
    for matching in matchings:
        setup = setups[matching]
        if setup is None:
            continue
        base, in_deg, out_deg = setup
        extendable = [c for c in base if all(mergeable(it) for it in c)]
        frozen = [c for c in base if not all(mergeable(it) for it in c)]

        def block_ok(block: tuple[frozenset, ...]) -> bool:
            if mono_matches:
                for copy in (0, 1):
                    if sum(1 for cls in block for c, _ in cls if c == copy) > 1:
                        return False
            if ma_degrees:
                if sum(in_deg[cls] for cls in block) > 1:
                    return False
                if sum(out_deg[cls] for cls in block) > 1:
                    return False
            return True

        for merged in _class_partitions_lazy(extendable, block_ok):
            if all(len(blk) == 1 for blk in merged):
                continue  # the minimal partition was emitted in pass 1
            node_classes = frozen + [frozenset().union(*blk) for blk in merged]
            if not matching and not include_parallel:
                # keep only merges that can break parallelism: a class mixing
                # a node with an isolated node of the other side
                if not any(
                    len(c) >= 2 and any(is_isolated(it) for it in c)
                    for c in node_classes
                ):
                    continue
            yield from emit(
                _quotient(rule1, rule2, signature, matching, node_classes, minimal=False)
            )


# -- pair construction -------------------------------------------------------


def _build_step(
    rule: RewriteRule,
    source: GraphWithInterface,
    match: Homomorphism,
    comp_k: Homomorphism,
    comp_g: Homomorphism,
    j_to_c: Homomorphism,
) -> RewriteStep:
    h, in_c, in_r = pushout(comp_k, rule.right)
    return RewriteStep(
        rule=rule,
        source=source,
        match=match,
        complement_k=comp_k,
        complement_g=comp_g,
        interface_factor=j_to_c,
        result_injection=in_c,
        co_match=in_r,
        result=GraphWithInterface(h, j_to_c.compose(in_c)),
    )


def _plain_pairs_from_candidate(
    system: RewritingSystem,
    rule1: RewriteRule,
    rule2: RewriteRule,
    cand: OverlapCandidate,
    empty_interface: bool,
) -> Iterator[PreCriticalPair]:
    s, f1, f2 = cand.overlap, cand.match1, cand.match2
    if rule1.name == rule2.name and f1 == f2:
        return  # identical derivations; trivially joinable and uninformative
    comps1, _ = pushout_complements(rule1.left, f1)
    if not comps1:
        return
    comps2, _ = pushout_complements(rule2.left, f2)
    if not comps2:
        return
    for c1k, c1g in comps1:
        for c2k, c2g in comps2:
            if empty_interface:
                j = discrete(0, s.signature)
                iface = Homomorphism(j, s, {}, {})
                p1 = Homomorphism(j, c1g.source, {}, {})
                p2 = Homomorphism(j, c2g.source, {}, {})
            else:
                p, p1, p2 = pullback(c1g, c2g)
                if not p.is_discrete():
                    continue  # interface with edges: outside the engine's scope
                iface = p1.compose(c1g)
            source = GraphWithInterface(s, iface)
            step1 = _build_step(rule1, source, f1, c1k, c1g, p1)
            step2 = _build_step(rule2, source, f2, c2k, c2g, p2)
            pair = PreCriticalPair(
                rule1=rule1.name,
                rule2=rule2.name,
                overlap=s,
                match1=f1,
                match2=f2,
                interface=iface,
                context1=c1g,
                context2=c2g,
                step1=step1,
                step2=step2,
                kind="plain",
                parallel=False,
                minimal=cand.minimal,
            )
            yield _with_parallel_flag(pair)


def _ma_pairs_from_candidate(
    system: RewritingSystem,
    rule1: RewriteRule,
    rule2: RewriteRule,
    cand: OverlapCandidate,
) -> Iterator[PreCriticalPair]:
    from .ma import analyze_ma, convex_step, is_convex_match, ma_interface

    s, f1, f2 = cand.overlap, cand.match1, cand.match2
    if rule1.name == rule2.name and f1 == f2:
        return
    if not analyze_ma(s).is_ma:
        return
    if not (is_convex_match(f1) and is_convex_match(f2)):
        return
    source = ma_interface(s)
    step1 = convex_step(system, rule1, f1, source)
    if step1 is None:
        return
    step2 = convex_step(system, rule2, f2, source)
    if step2 is None:
        return
    pair = PreCriticalPair(
        rule1=rule1.name,
        rule2=rule2.name,
        overlap=s,
        match1=f1,
        match2=f2,
        interface=source.interface,
        context1=step1.complement_g,
        context2=step2.complement_g,
        step1=step1,
        step2=step2,
        kind="ma",
        parallel=False,
        minimal=cand.minimal,
    )
    yield _with_parallel_flag(pair)


def _with_parallel_flag(pair: PreCriticalPair) -> PreCriticalPair:
    from dataclasses import replace

    return replace(pair, parallel=_is_parallel(pair))


def _is_parallel(pair: PreCriticalPair) -> bool:
    if not (pair.context1.is_mono() and pair.context2.is_mono()):
        return False
    x, x_to_l1, _ = pullback(pair.match1, pair.context2)
    if not x_to_l1.is_iso():
        return False
    y, y_to_l2, _ = pullback(pair.match2, pair.context1)
    return y_to_l2.is_iso()


def is_parallel_pair(pair: PreCriticalPair) -> bool:
    """The four-pullback parallelism test: the two matches factor through
    each other's context, both contexts embedding into the overlap."""
    return _is_parallel(pair)


def iter_pre_critical_pairs(
    system: RewritingSystem,
    *,
    include_parallel: bool = True,
    empty_interface: bool = False,
    overlap_scope: str = "full",
) -> Iterator[PreCriticalPair]:
    """Lazily enumerate pre-critical pairs for all ordered rule pairs i <= j.

    Shared-edge overlaps come first for every rule pair.  With
    include_parallel=False only overlaps that can yield non-parallel pairs
    are produced (complete for that purpose; see _overlap_candidates).
    """
    kind: PairKind = "ma" if system.mode == "convex" else "plain"
    if kind == "ma" and empty_interface:
        raise ValueError("empty-interface enumeration applies to plain pairs only")
    rules = list(system.rules)
    for i, rule1 in enumerate(rules):
        for rule2 in rules[i:]:
            for cand in _overlap_candidates(
                rule1,
                rule2,
                system.signature,
                mono_matches=(kind == "ma"),
                ma_degrees=(kind == "ma"),
                include_parallel=include_parallel,
                scope=overlap_scope,
            ):
                if kind == "plain":
                    yield from _plain_pairs_from_candidate(
                        system, rule1, rule2, cand, empty_interface
                    )
                else:
                    yield from _ma_pairs_from_candidate(system, rule1, rule2, cand)


def enumerate_pre_critical_pairs(
    system: RewritingSystem,
    *,
    include_parallel: bool = True,
    empty_interface: bool = False,
    overlap_scope: str = "full",
    max_pairs: Optional[int] = None,
) -> list[PreCriticalPair]:
    """Materialised pair list; max_pairs truncates (see iter_pre_critical_pairs)."""
    out = []
    for pair in iter_pre_critical_pairs(
        system,
        include_parallel=include_parallel,
        empty_interface=empty_interface,
        overlap_scope=overlap_scope,
    ):
        out.append(pair)
        if max_pairs is not None and len(out) >= max_pairs:
            break
    return out


# -- joinability and verdicts ------------------------------------------------


def parallel_join(
    system: RewritingSystem, pair: PreCriticalPair
) -> Optional[tuple[GraphWithInterface, RewriteStep, RewriteStep]]:
    """The one-step-per-branch join of a parallel pair: apply the other rule
    at its residual match inside each branch."""
    if not pair.parallel:
        return None
    rule1 = system.rule(pair.rule1)
    rule2 = system.rule(pair.rule2)

    def residual(
        match_other: Homomorphism, context: Homomorphism, step: RewriteStep
    ) -> Optional[Homomorphism]:
        y, y_to_l, y_to_c = pullback(match_other, context)
        if not y_to_l.is_iso():
            return None
        return y_to_l.inverse().compose(y_to_c).compose(step.result_injection)

    m2 = residual(pair.match2, pair.context1, pair.step1)
    m1 = residual(pair.match1, pair.context2, pair.step2)
    if m2 is None or m1 is None:
        return None
    steps1 = apply_step(system, rule2, m2, pair.branch1)
    steps2 = apply_step(system, rule1, m1, pair.branch2)
    for s1 in steps1:
        for s2 in steps2:
            if are_isomorphic(s1.result, s2.result) is not None:
                return (s1.result, s1, s2)
    return None


def check_joinable(
    system: RewritingSystem, pair: PreCriticalPair, caps: Optional[Caps] = None
) -> PairResult:
    """Joinability of a pair by search from both branches; definitive
    not-joinable requires both searches to complete within caps."""
    caps = caps or default_caps(pair)
    join = find_join(system, pair.branch1, pair.branch2, caps)
    if join.status == "joinable":
        return PairResult(pair, "joinable", witness=join.witness)
    if join.status == "truncated":
        return PairResult(pair, "truncated")
    return PairResult(pair, "not-joinable")


def default_caps(pair: PreCriticalPair) -> Caps:
    n = len(pair.overlap.nodes) + len(pair.overlap.edges)
    return Caps(max_steps=10_000, max_graph_size=max(4 * n, 16))


def decide_confluence(
    system: RewritingSystem,
    caps: Optional[Caps] = None,
    *,
    max_pairs: Optional[int] = None,
    short_circuit: bool = True,
    include_parallel: bool = True,
    parallel_fast_path: bool = True,
) -> ConfluenceReport:
    """Check joinability of all pre-critical pairs of a plain-dpoi or
    frobenius system; the caller asserts termination.

    Parallel pairs are joined by their one-step construction when
    parallel_fast_path holds; on the first definitively non-joinable pair the
    scan stops (the verdict is already determined) unless short_circuit is
    disabled.
    """
    if system.mode == "convex":
        raise ValueError("use decide_confluence_left_connected or decide_local_confluence_convex")
    t0 = time.perf_counter()
    results: list[PairResult] = []
    truncated = False
    enumeration_truncated = False
    count = 0
    for pair in iter_pre_critical_pairs(system, include_parallel=include_parallel):
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
            res = check_joinable(system, pair, caps or default_caps(pair))
        results.append(res)
        if res.joinability == "truncated":
            truncated = True
        if res.joinability == "not-joinable" and short_circuit:
            break
    return _report(system.mode, results, caps, truncated, enumeration_truncated, t0)


def _report(
    mode: str,
    results: list[PairResult],
    caps: Optional[Caps],
    truncated: bool,
    enumeration_truncated: bool,
    t0: float,
    sigma_p: bool = False,
) -> ConfluenceReport:
    if any(r.joinability == "not-joinable" for r in results):
        verdict = "not-confluent"
    elif truncated or enumeration_truncated:
        verdict = "inconclusive"
    else:
        verdict = "confluent"
    return ConfluenceReport(
        verdict=verdict,
        mode=mode,
        pairs=results,
        caps=caps or Caps(),
        truncated=truncated,
        enumeration_truncated=enumeration_truncated,
        sigma_p_extension=sigma_p,
        stats={
            "pairs_examined": len(results),
            "parallel_pairs": sum(1 for r in results if r.pair.parallel),
            "elapsed_s": time.perf_counter() - t0,
        },
    )


# -- clipping, extraction, embedding ----------------------------------------


def clip_step(step: RewriteStep, factor: Homomorphism, mono: Homomorphism) -> RewriteStep:
    """Restrict a step to a subobject through which its match factors.

    `factor : L -> G'` and mono `G' -> G` with factor;mono = match.  The
    clipped interface is the restriction of the step's interface to the
    preimage of G'.
    """
    if not mono.is_mono():
        raise ValueError("clipping requires a mono")
    if factor.compose(mono) != step.match:
        raise ValueError("match does not factor as given")
    rule = step.rule
    gp = factor.target
    cp, cp_to_gp, cp_to_c = pullback(mono, step.complement_g)
    pair_index = {
        (cp_to_gp.node_map[n], cp_to_c.node_map[n]): n for n in cp.nodes
    }
    edge_index = {
        (cp_to_gp.edge_map[e], cp_to_c.edge_map[e]): e for e in cp.edges
    }
    k = rule.apex
    k_to_cp = Homomorphism(
        k,
        cp,
        {
            kn: pair_index[
                (factor.node_map[rule.left.node_map[kn]], step.complement_k.node_map[kn])
            ]
            for kn in k.nodes
        },
        {
            ke: edge_index[
                (factor.edge_map[rule.left.edge_map[ke]], step.complement_k.edge_map[ke])
            ]
            for ke in k.edges
        },
    )
    if not is_pushout(rule.left, k_to_cp, factor, cp_to_gp):
        raise ValueError("clipped left square failed pushout validation")
    hp, in_cp, in_r = pushout(k_to_cp, rule.right)

    # restrict the interface to the preimage of G'
    inv_gp_nodes = {v: n for n, v in mono.node_map.items()}
    j = step.source.interface.source
    kept = [jn for jn in sorted(j.nodes) if step.source.interface.node_map[jn] in inv_gp_nodes]
    jp = Hypergraph(j.signature, frozenset(kept), {})
    jp_to_cp = Homomorphism(
        jp,
        cp,
        {
            jn: pair_index[
                (
                    inv_gp_nodes[step.source.interface.node_map[jn]],
                    step.interface_factor.node_map[jn],
                )
            ]
            for jn in kept
        },
        {},
    )
    source = GraphWithInterface(gp, jp_to_cp.compose(cp_to_gp))
    return RewriteStep(
        rule=rule,
        source=source,
        match=factor,
        complement_k=k_to_cp,
        complement_g=cp_to_gp,
        interface_factor=jp_to_cp,
        result_injection=in_cp,
        co_match=in_r,
        result=GraphWithInterface(hp, jp_to_cp.compose(in_cp)),
    )


def copair(
    f: Homomorphism, g: Homomorphism, cop: tuple[Hypergraph, Homomorphism, Homomorphism]
) -> Homomorphism:
    """[f, g] : A+B -> T from the coproduct injections."""
    sum_graph, i1, i2 = cop
    node_map = {}
    edge_map = {}
    for n, v in i1.node_map.items():
        node_map[v] = f.node_map[n]
    for e, v in i1.edge_map.items():
        edge_map[v] = f.edge_map[e]
    for n, v in i2.node_map.items():
        node_map[v] = g.node_map[n]
    for e, v in i2.edge_map.items():
        edge_map[v] = g.edge_map[e]
    return Homomorphism(sum_graph, f.target, node_map, edge_map)


def extract_pre_critical_pair(step1: RewriteStep, step2: RewriteStep) -> PreCriticalPair:
    """From two steps with a common source, produce the pre-critical pair:
    epi-mono factorise the joint match, clip both steps, and pull the two
    clipped contexts back for the interface."""
    from .category import epi_mono_factorize
    from .hypergraph import coproduct

    if step1.source.graph != step2.source.graph:
        raise ValueError("steps must share their source graph")
    cop = coproduct(step1.rule.lhs, step2.rule.lhs)
    joint = copair(step1.match, step2.match, cop)
    epi, mono = epi_mono_factorize(joint)
    _, i1, i2 = cop
    f1 = i1.compose(epi)
    f2 = i2.compose(epi)
    clipped1 = clip_step(step1, f1, mono)
    clipped2 = clip_step(step2, f2, mono)
    p, p1, p2 = pullback(clipped1.complement_g, clipped2.complement_g)
    if not p.is_discrete():
        raise UnsupportedRuleShape("extracted interface has edges; apexes must be discrete")
    iface = p1.compose(clipped1.complement_g)
    source = GraphWithInterface(mono.source, iface)
    new1 = _build_step(step1.rule, source, f1, clipped1.complement_k, clipped1.complement_g, p1)
    new2 = _build_step(step2.rule, source, f2, clipped2.complement_k, clipped2.complement_g, p2)
    pair = PreCriticalPair(
        rule1=step1.rule.name,
        rule2=step2.rule.name,
        overlap=mono.source,
        match1=f1,
        match2=f2,
        interface=iface,
        context1=clipped1.complement_g,
        context2=clipped2.complement_g,
        step1=new1,
        step2=new2,
        kind="plain",
        parallel=False,
        minimal=True,
    )
    return _with_parallel_flag(pair)


def embed_derivation(
    steps: list[RewriteStep],
    xi: Homomorphism,
    zeta: Homomorphism,
    c0_to_g0: Homomorphism,
    mono: Homomorphism,
) -> list[RewriteStep]:
    """Extend a derivation from G0' <- J' to one from G0 <- J.

    `xi : J' -> C0`, `zeta : J -> C0`, `c0_to_g0 : C0 -> G0` and mono
    `G0' -> G0` must make the gluing square (J' -> G0', J' -> C0, G0' -> G0,
    C0 -> G0) a pushout; the embedded derivation is built step by step, each
    new square again a pushout.
    """
    if not steps:
        return []
    jp_to_g0p = steps[0].source.interface
    if not is_pushout(jp_to_g0p, xi, mono, c0_to_g0):
        raise ValueError("gluing square is not a pushout")

    out: list[RewriteStep] = []
    emb = mono  # G'_{i-1} -> G_{i-1}
    c0_into_prev = c0_to_g0  # C0 -> G_{i-1}
    prev_big: Optional[GraphWithInterface] = None
    for step in steps:
        ci, c0_to_ci, cip_to_ci = pushout(xi, step.interface_factor)
        gi, ci_to_gi, gip_to_gi = pushout(cip_to_ci, step.result_injection)
        # mediate C_i -> G_{i-1} from C0 -> G_{i-1} and C'_i -> G'_{i-1} -> G_{i-1}
        cip_into_prev = step.complement_g.compose(emb)
        gamma = _mediate_from_pushout(
            ci, c0_to_ci, cip_to_ci, c0_into_prev, cip_into_prev
        )
        big_interface = zeta.compose(c0_to_ci).compose(gamma)
        big_source = prev_big or GraphWithInterface(emb.target, big_interface)
        big_result = GraphWithInterface(gi, zeta.compose(c0_to_ci).compose(ci_to_gi))
        out.append(
            RewriteStep(
                rule=step.rule,
                source=big_source,
                match=step.match.compose(emb),
                complement_k=step.complement_k.compose(cip_to_ci),
                complement_g=gamma,
                interface_factor=zeta.compose(c0_to_ci),
                result_injection=ci_to_gi,
                co_match=step.co_match.compose(gip_to_gi),
                result=big_result,
            )
        )
        emb = gip_to_gi
        c0_into_prev = c0_to_ci.compose(ci_to_gi)
        prev_big = big_result
    return out


def _mediate_from_pushout(
    po: Hypergraph,
    in1: Homomorphism,
    in2: Homomorphism,
    to1: Homomorphism,
    to2: Homomorphism,
) -> Homomorphism:
    """The mediating morphism out of a pushout, from a commuting cocone."""
    node_map: dict[int, int] = {}
    edge_map: dict[int, int] = {}
    for n, v in in1.node_map.items():
        node_map[v] = to1.node_map[n]
    for e, v in in1.edge_map.items():
        edge_map[v] = to1.edge_map[e]
    for n, v in in2.node_map.items():
        w = to2.node_map[n]
        if node_map.setdefault(v, w) != w:
            raise ValueError("cocone does not commute; no mediating morphism")
    for e, v in in2.edge_map.items():
        w = to2.edge_map[e]
        if edge_map.setdefault(v, w) != w:
            raise ValueError("cocone does not commute; no mediating morphism")
    h = Homomorphism(po, to1.target, node_map, edge_map)
    errs = h.validate()
    if errs:
        raise ValueError("mediating morphism invalid: " + "; ".join(errs))
    return h
