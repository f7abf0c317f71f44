"""Why convex rewriting needs path extensions: the disjoint relator pair of
a multiply/comultiply theory joins on its own, but a context path between
the two redexes can block one of them forever.

Run:  python demos/03_path_extensions.py
"""

from dpoi import (
    Signature,
    RewritingSystem,
    RewriteRule,
    check_joinable,
    decide_local_confluence_convex,
    enumerate_maximal_path_relations,
    find_matches,
    is_path_joinable,
    iter_pre_critical_pairs,
    parse_term,
    rewire,
)
from dpoi.ma import convex_step

sig = Signature({"m": (2, 1), "d": (1, 2)})
rules = tuple(
    RewriteRule(n, rewire(parse_term(l), sig).interface, rewire(parse_term(r), sig).interface)
    for n, l, r in [
        ("FS1", "(m + id:1) ; m", "(id:1 + m) ; m"),
        ("FS2", "d ; (d + id:1)", "d ; (id:1 + d)"),
        ("FS3", "(d + id:1) ; (id:1 + m)", "m ; d"),
        ("FS4", "(id:1 + d) ; (m + id:1)", "m ; d"),
    ]
)
system = RewritingSystem(sig, rules, mode="convex")

pair = next(
    p
    for p in iter_pre_critical_pairs(system)
    if {p.rule1, p.rule2} == {"FS3", "FS4"} and p.overlap_edge_count() == 0 and p.minimal
)
print("disjoint FS3/FS4 pair, joinable on its own:",
      check_joinable(system, pair).joinability)

rels = enumerate_maximal_path_relations(pair)
print(f"maximal context path relations: {len(rels)}")
for rel in rels:
    print("  ", sorted(rel.pairs))

res = is_path_joinable(system, pair)
print("path-joinable:", res.status)
if res.failing_branching is not None:
    lb = res.failing_branching
    print("witness relation:", sorted(res.failing_relation.pairs))
    sys_p = system.with_signature(lb.extension.extended.signature)
    other = system.rule(lb.step2.rule.name)
    usable = [
        m
        for m in find_matches(other, lb.step1.result, "mono")
        if convex_step(sys_p, other, m, lb.step1.result) is not None
    ]
    print(f"after applying {lb.step1.rule.name} in the extension, "
          f"{lb.step2.rule.name} has {len(usable)} usable convex matches: stuck")

report = decide_local_confluence_convex(system)
print("system verdict (over the extended signature):", report.verdict)
