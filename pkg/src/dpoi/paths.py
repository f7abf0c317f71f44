"""Formal path generators, path relations, extensions and path-joinability.

A mono m : G -> H (G monogamous acyclic) induces a path relation over
out(G) x inp(G): which outputs of the embedded copy reach which of its
inputs through the ambient graph.  Path extensions realise a prescribed
relation with three formal generators (join 2->1, split 1->2, link 1->1),
ensuring every realised output-to-input path crosses at least one of them.
Checking joinability of the finitely many maximal realisable relations of a
pre-critical pair decides local confluence of convex rewriting over the
extended signature.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .critical import (
    ConfluenceReport,
    PairResult,
    PreCriticalPair,
    _report,
    iter_pre_critical_pairs,
)
from .engine import Caps, GraphWithInterface, RewriteStep, RewritingSystem, find_join
from .hypergraph import (
    PATH_JOIN,
    PATH_LINK,
    PATH_SPLIT,
    Edge,
    Homomorphism,
    Hypergraph,
    is_path_label,
)
from .ma import analyze_ma, convex_step, ma_interface, path_exists, reachable_nodes


@dataclass(frozen=True)
class PathRelation:
    """Pairs (output-node, input-node) over a fixed monogamous acyclic graph."""

    pairs: frozenset[tuple[int, int]]

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self):
        return len(self.pairs)

    def issubset(self, other: "PathRelation") -> bool:
        return self.pairs <= other.pairs


@dataclass(frozen=True)
class PathExtension:
    base: Hypergraph
    extended: Hypergraph
    embedding: Homomorphism
    relation: PathRelation


def path_relation(m: Homomorphism) -> PathRelation:
    """The relation of a mono embedding of an ma graph: (y, x) iff the image
    of output y reaches the image of input x by a directed path."""
    if not m.is_mono():
        raise ValueError("path relations are defined for monos")
    a = analyze_ma(m.source)
    if not a.is_ma:
        raise ValueError("path relations are defined for monogamous acyclic sources")
    h = m.target
    pairs = set()
    for y in a.outputs:
        reach = reachable_nodes(h, m.node_map[y])
        for x in a.inputs:
            if m.node_map[x] in reach:
                pairs.add((y, x))
    return PathRelation(frozenset(pairs))


def path_covers(m: Homomorphism, m_prime: Homomorphism) -> bool:
    """m is path-covered by m_prime: same source, relation inclusion."""
    if m.source != m_prime.source:
        raise ValueError("path-covering compares embeddings of one graph")
    return path_relation(m).issubset(path_relation(m_prime))


def build_path_extension(g: Hypergraph, relation: PathRelation) -> PathExtension:
    """The canonical extension: a fan-out tree of splits per used output, a
    fan-in tree of joins per used input, and one link edge per pair.

    Raises ValueError when the relation is not realisable (it would force a
    directed cycle, or extra pairs through internal paths of g).
    """
    a = analyze_ma(g)
    if not a.is_ma:
        raise ValueError("path extensions are defined over monogamous acyclic graphs")
    for y, x in relation.pairs:
        if y not in a.outputs or x not in a.inputs:
            raise ValueError(f"pair ({y},{x}) is not an (output, input) pair")
    sig = g.signature if g.signature.path_extended else g.signature.extend_with_path_generators()
    nodes = set(g.nodes)
    edges = {e: Edge(x.label, x.sources, x.targets) for e, x in g.edges.items()}
    next_node = max(nodes, default=-1) + 1
    next_edge = max(edges, default=-1) + 1

    def new_node() -> int:
        nonlocal next_node
        nodes.add(next_node)
        next_node += 1
        return next_node - 1

    def add_edge(label: str, srcs: list[int], tgts: list[int]) -> None:
        nonlocal next_edge
        edges[next_edge] = Edge(label, tuple(srcs), tuple(tgts))
        next_edge += 1

    by_output: dict[int, list[int]] = {}
    by_input: dict[int, list[int]] = {}
    for y, x in sorted(relation.pairs):
        by_output.setdefault(y, []).append(x)
        by_input.setdefault(x, []).append(y)

    out_leaf: dict[tuple[int, int], int] = {}
    for y in sorted(by_output):
        xs = by_output[y]
        if len(xs) == 1:
            out_leaf[(y, xs[0])] = y
            continue
        cur = y
        for i, x in enumerate(xs[:-1]):
            leaf = new_node()
            rest = new_node()
            add_edge(PATH_SPLIT, [cur], [leaf, rest])
            out_leaf[(y, x)] = leaf
            cur = rest
        out_leaf[(y, xs[-1])] = cur

    in_leaf: dict[tuple[int, int], int] = {}
    for x in sorted(by_input):
        ys = by_input[x]
        if len(ys) == 1:
            in_leaf[(ys[0], x)] = x
            continue
        leaves = [new_node() for _ in ys]
        cur = leaves[0]
        for i in range(1, len(ys)):
            tgt = x if i == len(ys) - 1 else new_node()
            add_edge(PATH_JOIN, [cur, leaves[i]], [tgt])
            cur = tgt
        for y, leaf in zip(ys, leaves):
            in_leaf[(y, x)] = leaf

    for y, x in sorted(relation.pairs):
        add_edge(PATH_LINK, [out_leaf[(y, x)]], [in_leaf[(y, x)]])

    extended = Hypergraph(sig, frozenset(nodes), edges)
    embedding = Homomorphism(
        g, extended, {n: n for n in g.nodes}, {e: e for e in g.edges}
    )
    ea = analyze_ma(extended)
    if not ea.is_ma:
        raise ValueError("relation forces a directed cycle; no acyclic extension exists")
    got = path_relation(embedding)
    if got.pairs != relation.pairs:
        raise ValueError(
            "relation is not closed under composition with internal paths; not realisable"
        )
    return PathExtension(g, extended, embedding, relation)


# -- maximal relation enumeration -------------------------------------------


def maximal_path_relations(
    inputs: Iterable[int],
    outputs: Iterable[int],
    paths: Iterable[tuple[int, int]],
    forbidden_paths: Iterable[tuple[int, int]],
) -> list[frozenset[tuple[int, int]]]:
    """All maximal relations R over outputs x inputs such that the combined
    reachability (internal `paths` as input->output arcs plus R as
    output->input arcs) is acyclic and realises no forbidden pair.

    `paths` holds (input, output) arcs already present; `forbidden_paths`
    holds (output, input) pairs that must not become connected.
    """
    inputs = sorted(set(inputs))
    outputs = sorted(set(outputs))
    internal = sorted(set(paths))
    forbidden = frozenset(forbidden_paths)

    internal_adj: dict[int, list[int]] = {}
    for x, y in internal:
        internal_adj.setdefault(x, []).append(y)

    def closure(rel: frozenset) -> Optional[frozenset]:
        """Realised output->input pairs; None if the digraph has a cycle."""
        rel_adj: dict[int, list[int]] = {}
        for y, x in rel:
            rel_adj.setdefault(y, []).append(x)

        def succs(v: int) -> list[int]:
            return rel_adj.get(v, []) + internal_adj.get(v, [])

        verts = set(inputs) | set(outputs)
        color: dict[int, int] = {}
        order_ok = True

        def dfs(u: int) -> bool:
            color[u] = 1
            for v in succs(u):
                c = color.get(v, 0)
                if c == 1:
                    return False
                if c == 0 and not dfs(v):
                    return False
            color[u] = 2
            return True

        for v in sorted(verts):
            if color.get(v, 0) == 0 and not dfs(v):
                return None
        reach_cache: dict[int, set[int]] = {}

        def reach(v: int) -> set[int]:
            if v in reach_cache:
                return reach_cache[v]
            out: set[int] = set()
            for w in succs(v):
                out.add(w)
                out |= reach(w)
            reach_cache[v] = out
            return out

        realised = set()
        for y in outputs:
            for x in inputs:
                if x in reach(y):
                    realised.add((y, x))
        return frozenset(realised)

    def valid_closure(rel: frozenset) -> Optional[frozenset]:
        cl = closure(rel)
        if cl is None or cl & forbidden:
            return None
        return cl

    candidates = [
        (y, x) for y in outputs for x in inputs if (y, x) not in forbidden
    ]
    start = valid_closure(frozenset())
    if start is None:
        return []
    maximal: list[frozenset] = []
    seen: set[frozenset] = set()
    stack = [start]
    while stack:
        rel = stack.pop()
        if rel in seen:
            continue
        seen.add(rel)
        extended = False
        for p in candidates:
            if p in rel:
                continue
            cl = valid_closure(rel | {p})
            if cl is not None:
                extended = True
                if cl not in seen:
                    stack.append(cl)
        if not extended and rel not in maximal:
            maximal.append(rel)
    maximal.sort(key=lambda r: tuple(sorted(r)))
    return maximal


def _match_reach_sets(
    s: Hypergraph, match: Homomorphism, inputs: tuple[int, ...], outputs: tuple[int, ...]
) -> tuple[set[int], set[int]]:
    """Outputs reachable from the match image and inputs reaching it
    (both reflexively)."""
    img = match.image_nodes()
    reach_from = set()
    for y in outputs:
        if y in img or any(path_exists(s, v, y) for v in img):
            reach_from.add(y)
    reach_to = set()
    for x in inputs:
        if x in img or any(path_exists(s, x, v) for v in img):
            reach_to.add(x)
    return reach_from, reach_to


def enumerate_maximal_path_relations(pair: PreCriticalPair) -> list[PathRelation]:
    """The maximal relations of an ma pre-critical pair: realisable over an
    ambient ma graph and keeping both matches convex."""
    if pair.kind != "ma":
        raise ValueError("maximal path relations are defined for ma pairs")
    s = pair.overlap
    a = analyze_ma(s)
    internal = [
        (x, y)
        for x in a.inputs
        for y in a.outputs
        if x != y and path_exists(s, x, y)
    ]
    forbidden: set[tuple[int, int]] = set()
    for match in (pair.match1, pair.match2):
        reach_from, reach_to = _match_reach_sets(s, match, a.inputs, a.outputs)
        forbidden |= {(y, x) for y in reach_from for x in reach_to}
    rels = maximal_path_relations(a.inputs, a.outputs, internal, forbidden)
    return [PathRelation(r) for r in rels]


# -- lifting and path joinability --------------------------------------------


@dataclass
class LiftedBranching:
    extension: PathExtension
    source: GraphWithInterface
    step1: RewriteStep
    step2: RewriteStep


def lift_pair_along_extension(
    system: RewritingSystem, pair: PreCriticalPair, ext: PathExtension
) -> LiftedBranching:
    """Re-play both branch steps of an ma pair on a path extension of its
    overlap; the matches factor through the base since rules carry no formal
    path labels."""
    sig = ext.extended.signature
    sys_p = system.with_signature(sig)
    source = ma_interface(ext.extended)
    m1 = pair.match1.compose(ext.embedding)
    m2 = pair.match2.compose(ext.embedding)
    s1 = convex_step(sys_p, system.rule(pair.rule1), m1, source)
    s2 = convex_step(sys_p, system.rule(pair.rule2), m2, source)
    if s1 is None or s2 is None:
        raise AssertionError("lifting along a maximal relation lost a convex step")
    return LiftedBranching(ext, source, s1, s2)


@dataclass
class PathJoinability:
    status: str  # "path-joinable" | "not-path-joinable" | "truncated"
    relations: list[PathRelation]
    failing_relation: Optional[PathRelation] = None
    failing_branching: Optional[LiftedBranching] = None
    witnesses: Optional[list[GraphWithInterface]] = None


def is_path_joinable(
    system: RewritingSystem, pair: PreCriticalPair, caps: Optional[Caps] = None
) -> PathJoinability:
    """Path-joinability: for every maximal relation, one canonical extension
    is built and the lifted branching must join by convex rewriting over the
    extended signature."""
    rels = enumerate_maximal_path_relations(pair)
    caps = caps or Caps()
    sys_p = system.with_signature(
        system.signature if system.signature.path_extended
        else system.signature.extend_with_path_generators()
    )
    witnesses = []
    truncated = False
    for rel in rels:
        ext = build_path_extension(pair.overlap, rel)
        lifted = lift_pair_along_extension(system, pair, ext)
        join = find_join(sys_p, lifted.step1.result, lifted.step2.result, caps)
        if join.status == "joinable":
            witnesses.append(join.witness)
            continue
        if join.status == "truncated":
            truncated = True
            continue
        return PathJoinability(
            "not-path-joinable", rels, failing_relation=rel, failing_branching=lifted
        )
    if truncated:
        return PathJoinability("truncated", rels)
    return PathJoinability("path-joinable", rels, witnesses=witnesses)


def decide_local_confluence_convex(
    system: RewritingSystem,
    caps: Optional[Caps] = None,
    *,
    max_pairs: Optional[int] = None,
    short_circuit: bool = True,
) -> ConfluenceReport:
    """Local confluence of a convex system by path-joinability of all ma
    pre-critical pairs; non-confluence witnesses live over the extended
    signature (reported with sigma_p_extension=True)."""
    if system.mode != "convex":
        raise ValueError("convex-mode systems only")
    t0 = time.perf_counter()
    results: list[PairResult] = []
    truncated = False
    enumeration_truncated = False
    count = 0
    for pair in iter_pre_critical_pairs(system):
        count += 1
        if max_pairs is not None and count > max_pairs:
            enumeration_truncated = True
            break
        pj = is_path_joinable(system, pair, caps)
        if pj.status == "path-joinable":
            results.append(PairResult(pair, "joinable"))
        elif pj.status == "truncated":
            truncated = True
            results.append(PairResult(pair, "truncated"))
        else:
            results.append(PairResult(pair, "not-joinable"))
            if short_circuit:
                break
    return _report(
        system.mode, results, caps, truncated, enumeration_truncated, t0, sigma_p=True
    )
