"""DPO rewriting with interfaces: rules, systems, steps and normal-form search.

A rewriting step on G <- J keeps the interface object J fixed: the result is
H <- J where J factors through the pushout complement.  Search over graph
states is organised by iso-classes, bucketed by a cheap certificate with full
interface-compatible isomorphism checks inside buckets.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Literal, Optional

from .category import pushout, pushout_complements, is_pushout
from .hypergraph import (
    GraphWithInterface,
    Homomorphism,
    Hypergraph,
    Signature,
    are_isomorphic,
    certificate,
    homomorphisms,
)

Mode = Literal["plain-dpoi", "frobenius", "convex"]
MatchConstraint = Literal["any", "mono", "convex"]


@dataclass(frozen=True)
class RewriteRule:
    """A span L <- K -> R; the two legs must share their source K."""

    name: str
    left: Homomorphism
    right: Homomorphism

    def __post_init__(self) -> None:
        if self.left.source != self.right.source:
            raise ValueError(f"rule {self.name}: legs do not share an apex")

    @property
    def apex(self) -> Hypergraph:
        return self.left.source

    @property
    def lhs(self) -> Hypergraph:
        return self.left.target

    @property
    def rhs(self) -> Hypergraph:
        return self.right.target

    def is_left_linear(self) -> bool:
        return self.left.is_mono()

    def has_discrete_apex(self) -> bool:
        return self.apex.is_discrete()


@dataclass(frozen=True)
class RewritingSystem:
    signature: Signature
    rules: tuple[RewriteRule, ...]
    mode: Mode = "plain-dpoi"

    def __post_init__(self) -> None:
        if self.mode == "frobenius":
            for r in self.rules:
                if not r.has_discrete_apex():
                    raise ValueError(f"frobenius mode requires discrete apexes ({r.name})")
        if self.mode == "convex":
            from .ma import is_ma_rule

            for r in self.rules:
                if not r.is_left_linear():
                    raise ValueError(f"convex mode requires left-linear rules ({r.name})")
                if not is_ma_rule(r):
                    raise ValueError(f"convex mode requires ma-rules ({r.name})")

    def rule(self, name: str) -> RewriteRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def match_constraint(self) -> MatchConstraint:
        return "convex" if self.mode == "convex" else "any"

    def with_signature(self, signature: Signature) -> "RewritingSystem":
        if not self.signature.compatible_with(signature):
            raise ValueError("new signature must extend the old one")
        return replace(self, signature=signature)


@dataclass(frozen=True)
class RewriteStep:
    """One DPO step with interface; both squares validate as pushouts.

    All morphisms needed to re-glue the step are kept: the complement span
    (K -> C, C -> G), the right-square injections (C -> H, R -> H) and the
    interface factorisation J -> C.
    """

    rule: RewriteRule
    source: GraphWithInterface
    match: Homomorphism
    complement_k: Homomorphism
    complement_g: Homomorphism
    interface_factor: Homomorphism
    result_injection: Homomorphism
    co_match: Homomorphism
    result: GraphWithInterface

    def validate(self) -> list[str]:
        errs = []
        for name, h in (
            ("match", self.match),
            ("complement_k", self.complement_k),
            ("complement_g", self.complement_g),
            ("interface_factor", self.interface_factor),
            ("result_injection", self.result_injection),
            ("co_match", self.co_match),
        ):
            errs += [f"{name}: {e}" for e in h.validate()]
        if errs:
            return errs
        if not is_pushout(self.rule.left, self.complement_k, self.match, self.complement_g):
            errs.append("left square is not a pushout")
        if not is_pushout(self.rule.right, self.complement_k, self.co_match, self.result_injection):
            errs.append("right square is not a pushout")
        j_in = self.interface_factor.compose(self.complement_g)
        if j_in != self.source.interface:
            errs.append("interface does not factor through the complement")
        j_out = self.interface_factor.compose(self.result_injection)
        if j_out != self.result.interface:
            errs.append("result interface mismatch")
        return errs


def find_matches(
    rule: RewriteRule, g: GraphWithInterface, constraint: MatchConstraint = "any"
) -> list[Homomorphism]:
    """All homomorphisms L -> G satisfying the constraint, deterministically
    ordered by the underlying edge/node assignment."""
    if constraint == "any":
        return list(homomorphisms(rule.lhs, g.graph))
    if constraint == "mono":
        return list(homomorphisms(rule.lhs, g.graph, mono=True))
    if constraint == "convex":
        from .ma import is_convex_match

        return [m for m in homomorphisms(rule.lhs, g.graph, mono=True) if is_convex_match(m)]
    raise ValueError(f"unknown constraint {constraint!r}")


def _interface_factorings(
    interface: Homomorphism, complement_g: Homomorphism
) -> Iterator[Homomorphism]:
    """All maps J -> C whose composite with C -> G equals the interface."""
    j = interface.source
    c = complement_g.source
    preimage: dict[int, list[int]] = {}
    for n in sorted(c.nodes):
        preimage.setdefault(complement_g.node_map[n], []).append(n)
    choices = []
    for jn in sorted(j.nodes):
        cands = preimage.get(interface.node_map[jn], [])
        if not cands:
            return
        choices.append((jn, cands))

    def rec(i: int, acc: dict[int, int]) -> Iterator[Homomorphism]:
        if i == len(choices):
            yield Homomorphism(j, c, dict(acc), {})
            return
        jn, cands = choices[i]
        for cn in cands:
            acc[jn] = cn
            yield from rec(i + 1, acc)
            del acc[jn]

    yield from rec(0, {})


def apply_step(
    system: RewritingSystem,
    rule: RewriteRule,
    match: Homomorphism,
    g: GraphWithInterface,
) -> list[RewriteStep]:
    """All steps at the given match: one per complement and interface
    factorisation, de-duplicated up to isomorphism of the results."""
    if system.mode == "convex":
        from .ma import convex_step

        step = convex_step(system, rule, match, g)
        return [step] if step is not None else []
    complements, _diag = pushout_complements(rule.left, match)
    steps: list[RewriteStep] = []
    for comp_k, comp_g in complements:
        for j_to_c in _interface_factorings(g.interface, comp_g):
            h, in_c, in_r = pushout(comp_k, rule.right)
            result = GraphWithInterface(h, j_to_c.compose(in_c))
            step = RewriteStep(
                rule=rule,
                source=g,
                match=match,
                complement_k=comp_k,
                complement_g=comp_g,
                interface_factor=j_to_c,
                result_injection=in_c,
                co_match=in_r,
                result=result,
            )
            if not any(
                are_isomorphic(prev.result, result) is not None for prev in steps
            ):
                steps.append(step)
    return steps


def enumerate_steps(system: RewritingSystem, g: GraphWithInterface) -> list[RewriteStep]:
    """All steps over all rules and matches, de-duplicated up to isomorphism
    of the results."""
    steps: list[RewriteStep] = []
    seen: dict[tuple, list[GraphWithInterface]] = {}
    for rule in system.rules:
        for match in find_matches(rule, g, system.match_constraint()):
            for step in apply_step(system, rule, match, g):
                cert = certificate(step.result.graph, step.result.interface)
                bucket = seen.setdefault(cert, [])
                if any(are_isomorphic(prev, step.result) is not None for prev in bucket):
                    continue
                bucket.append(step.result)
                steps.append(step)
    return steps


@dataclass
class Caps:
    """Search caps; a hit cap makes downstream verdicts inconclusive."""

    max_steps: int = 10_000
    max_graph_size: Optional[int] = None

    def size_limit_for(self, start: GraphWithInterface) -> int:
        if self.max_graph_size is not None:
            return self.max_graph_size
        n = len(start.graph.nodes) + len(start.graph.edges)
        return max(4 * n, 16)


@dataclass
class StateNode:
    graph: GraphWithInterface
    parent: Optional[int]
    step: Optional[RewriteStep]
    is_normal_form: Optional[bool] = None


@dataclass
class ReachResult:
    states: list[StateNode]
    truncated: bool

    def derivation_to(self, index: int) -> list[RewriteStep]:
        steps: list[RewriteStep] = []
        while index is not None:
            node = self.states[index]
            if node.step is not None:
                steps.append(node.step)
            index = node.parent
        steps.reverse()
        return steps


def reachable(system: RewritingSystem, g: GraphWithInterface, caps: Caps) -> ReachResult:
    """BFS over iso-classes of graphs reachable from g."""
    states: list[StateNode] = [StateNode(g, None, None)]
    buckets: dict[tuple, list[int]] = {certificate(g.graph, g.interface): [0]}
    size_limit = caps.size_limit_for(g)
    truncated = False
    frontier = [0]
    while frontier:
        nxt: list[int] = []
        for idx in frontier:
            state = states[idx]
            if len(state.graph.graph.nodes) + len(state.graph.graph.edges) > size_limit:
                truncated = True
                state.is_normal_form = None
                continue
            steps = enumerate_steps(system, state.graph)
            state.is_normal_form = not steps
            for step in steps:
                if len(states) >= caps.max_steps:
                    truncated = True
                    break
                cert = certificate(step.result.graph, step.result.interface)
                bucket = buckets.setdefault(cert, [])
                if any(
                    are_isomorphic(states[i].graph, step.result) is not None
                    for i in bucket
                ):
                    continue
                states.append(StateNode(step.result, idx, step))
                bucket.append(len(states) - 1)
                nxt.append(len(states) - 1)
            if len(states) >= caps.max_steps:
                truncated = True
                break
        if truncated and len(states) >= caps.max_steps:
            break
        frontier = nxt
    return ReachResult(states, truncated)


@dataclass
class NormalFormResult:
    normal_forms: list[GraphWithInterface]
    truncated: bool


def search_normal_forms(
    system: RewritingSystem, g: GraphWithInterface, caps: Optional[Caps] = None
) -> NormalFormResult:
    """Normal forms reachable from g, up to iso; truncated=True iff a cap was
    hit, in which case the set may be incomplete."""
    caps = caps or Caps()
    reach = reachable(system, g, caps)
    nfs = [s.graph for s in reach.states if s.is_normal_form]
    return NormalFormResult(nfs, reach.truncated)


@dataclass
class JoinResult:
    status: Literal["joinable", "not-joinable", "truncated"]
    witness: Optional[GraphWithInterface] = None
    derivation1: Optional[list[RewriteStep]] = None
    derivation2: Optional[list[RewriteStep]] = None


class _Search:
    """Incremental BFS over iso-classes with parent pointers."""

    def __init__(self, system: RewritingSystem, g: GraphWithInterface, caps: Caps):
        self.system = system
        self.caps = caps
        self.size_limit = caps.size_limit_for(g)
        self.states: list[StateNode] = [StateNode(g, None, None)]
        self.buckets: dict[tuple, list[int]] = {
            certificate(g.graph, g.interface): [0]
        }
        self.frontier: list[int] = [0]
        self.truncated = False

    def done(self) -> bool:
        return not self.frontier or (self.truncated and len(self.states) >= self.caps.max_steps)

    def expand_one_level(self) -> list[int]:
        """Expand the current frontier; returns the indices of new states."""
        new: list[int] = []
        for idx in self.frontier:
            state = self.states[idx]
            if len(state.graph.graph.nodes) + len(state.graph.graph.edges) > self.size_limit:
                self.truncated = True
                continue
            steps = enumerate_steps(self.system, state.graph)
            state.is_normal_form = not steps
            for step in steps:
                if len(self.states) >= self.caps.max_steps:
                    self.truncated = True
                    break
                cert = certificate(step.result.graph, step.result.interface)
                bucket = self.buckets.setdefault(cert, [])
                if any(
                    are_isomorphic(self.states[i].graph, step.result) is not None
                    for i in bucket
                ):
                    continue
                self.states.append(StateNode(step.result, idx, step))
                bucket.append(len(self.states) - 1)
                new.append(len(self.states) - 1)
            if self.truncated and len(self.states) >= self.caps.max_steps:
                break
        self.frontier = new
        return new

    def find(self, g: GraphWithInterface, cert: tuple) -> Optional[int]:
        for i in self.buckets.get(cert, []):
            if are_isomorphic(self.states[i].graph, g) is not None:
                return i
        return None

    def derivation_to(self, index: int) -> list[RewriteStep]:
        return ReachResult(self.states, self.truncated).derivation_to(index)


def find_join(
    system: RewritingSystem,
    h1: GraphWithInterface,
    h2: GraphWithInterface,
    caps: Optional[Caps] = None,
) -> JoinResult:
    """Decide whether h1 and h2 rewrite to a common graph with the same
    interface.  Both searches are grown level by level and intersected
    incrementally, so a join is found without exhausting either side."""
    caps = caps or Caps()
    s1 = _Search(system, h1, caps)
    s2 = _Search(system, h2, caps)

    def check(new_side: _Search, new_indices: list[int], other: _Search, swap: bool):
        for i in new_indices:
            g = new_side.states[i].graph
            j = other.find(g, certificate(g.graph, g.interface))
            if j is not None:
                d_new = new_side.derivation_to(i)
                d_other = other.derivation_to(j)
                d1, d2 = (d_other, d_new) if swap else (d_new, d_other)
                return JoinResult("joinable", witness=g, derivation1=d1, derivation2=d2)
        return None

    res = check(s1, [0], s2, False)
    if res:
        return res
    while not (s1.done() and s2.done()):
        if not s1.done():
            res = check(s1, s1.expand_one_level(), s2, False)
            if res:
                return res
        if not s2.done():
            res = check(s2, s2.expand_one_level(), s1, True)
            if res:
                return res
    if s1.truncated or s2.truncated:
        return JoinResult("truncated")
    return JoinResult("not-joinable")
