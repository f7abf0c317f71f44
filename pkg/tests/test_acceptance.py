"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Randomised criteria are driven by DC_SEED (default fixed); all tolerances are
exact-combinatorial (zero violations).
"""

import itertools
from contextlib import contextmanager

import pytest

from dpoi import (
    Caps,
    GraphWithInterface,
    Homomorphism,
    Hypergraph,
    Signature,
    analyze_ma,
    are_isomorphic,
    check_joinable,
    decide_confluence,
    decide_confluence_left_connected,
    decide_local_confluence_convex,
    enumerate_maximal_path_relations,
    enumerate_pre_critical_pairs,
    enumerate_steps,
    find_join,
    find_matches,
    is_path_joinable,
    is_pushout,
    iter_pre_critical_pairs,
    maximal_path_relations,
    pullback,
    pushout,
)
from dpoi.critical import parallel_join
from dpoi.hypergraph import homomorphisms

from conftest import make_rng
from helpers import (
    brute_force_is_pushout,
    edge_swap_system,
    fsa_system,
    parallel_wires_system,
    random_discrete_apex_system,
    random_graph,
    random_left_connected_system,
    random_ma_term,
    random_signature,
    yang_baxter_system,
)


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number}: FAIL - {description}")
        raise
    print(f"ACCEPTANCE {number}: PASS - {description}")


def test_acceptance_01_interface_contrast():
    """Relabel/reverse contrast: ground pairs joinable yet the interfaced
    pair is not, flipping the verdict."""
    with criterion(1, "interface contrast (ground joinable, interfaced not)"):
        sys = edge_swap_system()
        ground = enumerate_pre_critical_pairs(sys, empty_interface=True)
        ground_nontrivial = [p for p in ground if not p.parallel]
        assert len(ground_nontrivial) == 2
        for p in ground_nontrivial:
            assert check_joinable(sys, p).joinability == "joinable"

        # interfaced: the shared-edge pair matches the expected branching
        rep = decide_confluence(sys)
        assert rep.verdict == "not-confluent"
        bad = [r for r in rep.pairs if r.joinability == "not-joinable"]
        assert len(bad) == 1
        pair = bad[0].pair
        sig = sys.signature
        s_expected = GraphWithInterface.from_legs(
            Hypergraph.build(sig, 2, [("a", [0], [1])]), [0, 1]
        )
        assert are_isomorphic(pair.source, s_expected) is not None
        h_fwd = GraphWithInterface.from_legs(
            Hypergraph.build(sig, 2, [("b", [0], [1])]), [0, 1]
        )
        h_rev = GraphWithInterface.from_legs(
            Hypergraph.build(sig, 2, [("b", [1], [0])]), [0, 1]
        )
        branches = (pair.branch1, pair.branch2)
        # exact match up to iso (and up to swapping the two branches)
        iso_fwd = [b for b in branches if are_isomorphic(b, h_fwd) is not None]
        iso_rev = [b for b in branches if are_isomorphic(b, h_rev) is not None]
        assert len(iso_fwd) == 1 and len(iso_rev) == 1 and iso_fwd[0] is not iso_rev[0]


def test_acceptance_02_yang_baxter():
    """Yang-Baxter: both mode checks surface exactly one overlapping pair,
    report it not-joinable, verdict not-confluent."""
    with criterion(2, "Yang-Baxter not confluent in both modes"):
        sysc = yang_baxter_system("convex")
        rep_c = decide_confluence_left_connected(sysc)
        assert rep_c.verdict == "not-confluent"
        nontrivial_c = [r for r in rep_c.pairs if not r.pair.parallel]
        assert len(nontrivial_c) == 1
        assert nontrivial_c[0].joinability == "not-joinable"
        # library-level minimal enumeration agrees: a single overlapping pair
        lib_pairs = [
            p
            for p in enumerate_pre_critical_pairs(sysc, overlap_scope="minimal")
            if not p.parallel
        ]
        assert len(lib_pairs) == 1
        assert lib_pairs[0].overlap_edge_count() == 1

        sysf = yang_baxter_system("frobenius")
        rep_f = decide_confluence(sysf)
        assert rep_f.verdict == "not-confluent"
        nontrivial_f = [r for r in rep_f.pairs if not r.pair.parallel]
        assert len(nontrivial_f) == 1
        assert nontrivial_f[0].joinability == "not-joinable"
        # the reported pair is the same overlap in both modes
        assert are_isomorphic(
            GraphWithInterface.with_empty_interface(nontrivial_f[0].pair.overlap),
            GraphWithInterface.with_empty_interface(nontrivial_c[0].pair.overlap),
        ) is not None


def test_acceptance_03_frobenius_semialgebra_path_joinability():
    """The disjoint relator pair joins plainly but not under its maximal
    path relations; the system is not locally confluent over the extended
    signature."""
    with criterion(3, "semialgebra stuck configuration via path extensions"):
        fsa = fsa_system()
        target = None
        for p in iter_pre_critical_pairs(fsa):
            if {p.rule1, p.rule2} == {"FS3", "FS4"} and p.overlap_edge_count() == 0 and p.minimal:
                target = p
                break
        assert target is not None
        assert check_joinable(fsa, target).joinability == "joinable"
        res = is_path_joinable(fsa, target)
        assert res.status == "not-path-joinable"
        assert res.failing_relation is not None and len(res.failing_relation.pairs) >= 1
        # the witness extension reproduces the stuck configuration: after the
        # first lifted step, the other rule has no convex step left
        lb = res.failing_branching
        sys_p = fsa.with_signature(lb.extension.extended.signature)
        from dpoi.ma import convex_step

        other = fsa.rule(lb.step2.rule.name)
        first = fsa.rule(lb.step1.rule.name)
        stuck_after_1 = all(
            convex_step(sys_p, other, m, lb.step1.result) is None
            for m in find_matches(other, lb.step1.result, "mono")
        )
        stuck_after_2 = all(
            convex_step(sys_p, first, m, lb.step2.result) is None
            for m in find_matches(first, lb.step2.result, "mono")
        )
        assert stuck_after_1 or stuck_after_2
        rep = decide_local_confluence_convex(fsa)
        assert rep.verdict == "not-confluent"
        assert rep.sigma_p_extension


def test_acceptance_04_discrete_interface_lemma():
    """Over randomized discrete-apex systems, every enumerated plain pair has
    an edge-free interface (recomputed as the pullback of its contexts)."""
    with criterion(4, "discrete interfaces over 200 randomized systems"):
        systems = 0
        violations = 0
        pairs_seen = 0
        salt = 0
        while systems < 200:
            salt += 1
            sys = random_discrete_apex_system(make_rng(40_000 + salt))
            systems += 1
            for pair in enumerate_pre_critical_pairs(sys, max_pairs=12):
                pairs_seen += 1
                p, _, _ = pullback(pair.context1, pair.context2)
                if not p.is_discrete():
                    violations += 1
                if not pair.interface.source.is_discrete():
                    violations += 1
        assert systems >= 200 and pairs_seen >= 400
        assert violations == 0


def test_acceptance_05_parallel_pairs_joinable():
    """Every pair flagged parallel joins by the one-step-per-branch
    construction."""
    with criterion(5, "parallel pairs join with one step per branch"):
        verified = 0
        violations = 0
        for salt in range(120):
            sys = random_discrete_apex_system(make_rng(50_000 + salt))
            for pair in enumerate_pre_critical_pairs(sys, max_pairs=12):
                if not pair.parallel:
                    continue
                joined = parallel_join(sys, pair)
                if joined is None:
                    violations += 1
                    continue
                w, s1, s2 = joined
                if s1.validate() or s2.validate():
                    violations += 1
                if are_isomorphic(s1.result, s2.result) is None:
                    violations += 1
                verified += 1
        assert verified >= 200
        assert violations == 0


def test_acceptance_06_local_confluence_sampling():
    """For randomized terminating systems whose pairs all join, sampled
    branchings always join within caps."""
    with criterion(6, "sampled branchings join for joinable-pair systems"):
        systems_ok = 0
        branchings = 0
        violations = 0
        salt = 0
        while systems_ok < 100 or branchings < 500:
            salt += 1
            assert salt < 3000, "generator failed to produce enough systems"
            rng = make_rng(60_000 + salt)
            sys = random_discrete_apex_system(rng, shrinking=True)
            rep = decide_confluence(sys, Caps(max_steps=2000))
            if rep.verdict != "confluent":
                continue
            systems_ok += 1
            for _ in range(4):
                g0 = random_graph(rng, sys.signature, max_nodes=6, max_edges=3)
                if len(g0.nodes) + len(g0.edges) > 12:
                    continue
                legs = [n for n in g0.sorted_nodes() if rng.random() < 0.5]
                host = GraphWithInterface.from_legs(g0, legs)
                steps = enumerate_steps(sys, host)
                for s1, s2 in itertools.combinations(steps, 2):
                    res = find_join(sys, s1.result, s2.result, Caps(max_steps=2000))
                    branchings += 1
                    if res.status != "joinable":
                        violations += 1
                    if branchings >= 900:
                        break
        assert systems_ok >= 100 and branchings >= 500
        assert violations == 0


def test_acceptance_07_pushout_oracle_parity():
    """is_pushout vs the brute-force universal-property check on generated
    squares: genuine pushouts, padded fakes and quotient variants."""
    with criterion(7, "pushout oracle parity on small squares"):
        compared = 0
        disagreements = 0
        for salt in range(150):
            rng = make_rng(70_000 + salt)
            sig = random_signature(rng)
            k = random_graph(rng, sig, max_nodes=2, max_edges=1)
            l = random_graph(rng, sig, max_nodes=3, max_edges=1)
            c = random_graph(rng, sig, max_nodes=3, max_edges=1)
            fs = list(homomorphisms(k, l))
            gs = list(homomorphisms(k, c))
            if not fs or not gs:
                continue
            f = fs[rng.randrange(len(fs))]
            g = gs[rng.randrange(len(gs))]
            po, inl, inc = pushout(f, g)
            if len(po.nodes) > 6:
                continue
            candidates = [(inl, inc)]
            padded = Hypergraph(
                po.signature, po.nodes | {max(po.nodes, default=-1) + 1}, dict(po.edges)
            )
            candidates.append(
                (
                    Homomorphism(l, padded, dict(inl.node_map), dict(inl.edge_map)),
                    Homomorphism(c, padded, dict(inc.node_map), dict(inc.edge_map)),
                )
            )
            if len(po.nodes) >= 2:
                ns = sorted(po.nodes)
                merge = {n: (ns[0] if n == ns[1] else n) for n in po.nodes}
                q = po.relabel(merge, {e: e for e in po.edges})
                ql = Homomorphism(
                    l, q, {n: merge[v] for n, v in inl.node_map.items()}, dict(inl.edge_map)
                )
                qc = Homomorphism(
                    c, q, {n: merge[v] for n, v in inc.node_map.items()}, dict(inc.edge_map)
                )
                if ql.is_valid() and qc.is_valid():
                    candidates.append((ql, qc))
            for cl, cc in candidates:
                compared += 1
                if is_pushout(f, g, cl, cc) != brute_force_is_pushout(f, g, cl, cc):
                    disagreements += 1
        assert compared >= 150
        assert disagreements == 0


def test_acceptance_08_connectedness_gives_convexity():
    """For randomized left-connected systems, mono-match and convex-match
    step sets coincide up to iso on monogamous acyclic hosts."""
    with criterion(8, "mono and convex step sets coincide when left-connected"):
        from dpoi import RewritingSystem, parse_term, rewire

        systems_checked = 0
        comparisons = 0
        violations = 0
        salt = 0
        while systems_checked < 100:
            salt += 1
            assert salt < 4000
            rng = make_rng(80_000 + salt)
            sys_convex = random_left_connected_system(rng)
            if sys_convex is None or not sys_convex.rules:
                continue
            sys_plain = RewritingSystem(
                sys_convex.signature, sys_convex.rules, mode="plain-dpoi"
            )
            host = None
            for d, c in [(2, 2), (1, 1), (2, 1)]:
                t = random_ma_term(rng, sys_convex.signature, d, c)
                if t is None:
                    continue
                cand = rewire(parse_term(t), sys_convex.signature)
                if analyze_ma(cand.graph).is_ma:
                    host = cand
                    break
            if host is None:
                continue
            systems_checked += 1
            for rule in sys_convex.rules:
                monos = find_matches(rule, host, "mono")
                convexes = find_matches(rule, host, "convex")
                if monos != convexes:
                    violations += 1
            plain_steps = enumerate_steps(sys_plain, host)
            convex_steps = enumerate_steps(sys_convex, host)
            comparisons += 1
            if len(plain_steps) != len(convex_steps):
                violations += 1
                continue
            for st in plain_steps:
                if not any(
                    are_isomorphic(st.result, other.result) is not None
                    for other in convex_steps
                ):
                    violations += 1
        assert systems_checked >= 100 and comparisons >= 100
        assert violations == 0


def test_acceptance_09_maximal_relation_parity():
    """Enumerating maximal path relations matches the powerset-filter oracle
    on all boundary sizes up to 3x3."""
    with criterion(9, "maximal relation enumeration matches powerset oracle"):
        from test_paths import _closure_oracle

        cases = 0
        for ni in range(4):
            for no in range(4):
                for salt in range(6):
                    rng = make_rng(90_000 + 100 * ni + 10 * no + salt)
                    inputs = list(range(ni))
                    outputs = list(range(10, 10 + no))
                    internal = [
                        (x, y) for x in inputs for y in outputs if rng.random() < 0.4
                    ]
                    forbidden = [
                        (y, x) for y in outputs for x in inputs if rng.random() < 0.35
                    ]
                    mine = maximal_path_relations(inputs, outputs, internal, forbidden)
                    universe = [(y, x) for y in outputs for x in inputs]
                    valids = []
                    for bits in itertools.product([0, 1], repeat=len(universe)):
                        rel = frozenset(p for p, b in zip(universe, bits) if b)
                        cl = _closure_oracle(inputs, outputs, internal, rel)
                        if cl is None or cl != rel or (cl & set(forbidden)):
                            continue
                        valids.append(rel)
                    expect = [r for r in valids if not any(r < o for o in valids)]
                    assert sorted(map(sorted, mine)) == sorted(map(sorted, expect))
                    cases += 1
        assert cases == 96


def test_acceptance_10_non_left_connected_case_study():
    """The committed non-left-connected system is locally confluent: every
    ma pre-critical pair is path-joinable."""
    with criterion(10, "non-left-connected system checks confluent"):
        sys = parallel_wires_system()
        from dpoi import is_left_connected

        assert not is_left_connected(sys)
        rep = decide_local_confluence_convex(sys)
        assert rep.verdict == "confluent"
        assert rep.pairs and all(r.joinability == "joinable" for r in rep.pairs)
        assert not rep.truncated and not rep.enumeration_truncated
