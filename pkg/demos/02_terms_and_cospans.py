"""From the term language to graphs: interpretation, rewiring, and the
Yang-Baxter rule as a rewriting system.

Run:  python demos/02_terms_and_cospans.py
"""

from dpoi import (
    RewritingSystem,
    Signature,
    decide_confluence_left_connected,
    enumerate_pre_critical_pairs,
    interpret,
    parse_term,
    print_term,
    rewire,
    translate_system,
)

sig = Signature({"g": (2, 2)})

left = parse_term("(g + id:1) ; (id:1 + g) ; (g + id:1)")
right = parse_term("(id:1 + g) ; (g + id:1) ; (id:1 + g)")
print("lhs:", print_term(left))
print("rhs:", print_term(right))

c = interpret(left, sig)
print(f"lhs cospan: 3 -> G <- 3 with {len(c.apex.nodes)} nodes, {len(c.apex.edges)} crossings")

folded = rewire(left, sig)
print(f"rewired: one interface of {len(folded.interface.source.nodes)} boundary nodes")

# As a rewriting system: splitting/merging mode (discrete gluing boundary)
sys_f = translate_system(sig, [("yb", left, right)])
print("rule apex is discrete:", sys_f.rules[0].has_discrete_apex())

# As a convex system the same rule family is left-connected and its single
# overlapping pair is not joinable: the system is not confluent.
sys_c = RewritingSystem(sig, sys_f.rules, mode="convex")
pairs = [p for p in enumerate_pre_critical_pairs(sys_c, overlap_scope="minimal") if not p.parallel]
print(f"overlapping pairs (minimal enumeration): {len(pairs)}")
report = decide_confluence_left_connected(sys_c)
print("verdict:", report.verdict)
