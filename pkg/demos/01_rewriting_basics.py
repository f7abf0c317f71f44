"""A walk through the core objects: build a hypergraph, rewrite it, and
watch the interface pin down node identities.

Run:  python demos/01_rewriting_basics.py
"""

from dpoi import (
    GraphWithInterface,
    Homomorphism,
    Hypergraph,
    RewriteRule,
    RewritingSystem,
    Signature,
    discrete,
    enumerate_steps,
    find_matches,
    search_normal_forms,
)
from dpoi.dot import gwi_to_dot

# A signature with two wire-shaped generators.
sig = Signature({"a": (1, 1), "b": (1, 1)})

# Two rules that both consume an a-edge between two boundary nodes: one
# relabels it forward to b, the other reverses it.
L = Hypergraph.build(sig, 2, [("a", [0], [1])])
K = discrete(2, sig)
l = Homomorphism(K, L, {0: 0, 1: 1}, {})
fwd = RewriteRule("relabel", l, Homomorphism(K, Hypergraph.build(sig, 2, [("b", [0], [1])]), {0: 0, 1: 1}, {}))
rev = RewriteRule("relabel_rev", l, Homomorphism(K, Hypergraph.build(sig, 2, [("b", [1], [0])]), {0: 0, 1: 1}, {}))
system = RewritingSystem(sig, (fwd, rev), mode="plain-dpoi")

# The one-edge graph, with both endpoints exposed in the interface.
g = GraphWithInterface.from_legs(L, [0, 1])
print("start graph:")
print(gwi_to_dot(g))

steps = enumerate_steps(system, g)
print(f"one-step successors: {len(steps)}")
for st in steps:
    e = next(iter(st.result.graph.edges.values()))
    print(f"  {st.rule.name}: b-edge wired {e.sources} -> {e.targets}")

# With the interface pinning nodes 0 and 1 the two results are genuinely
# different; without it they would be isomorphic.
nf = search_normal_forms(system, g)
print(f"normal forms with interface: {len(nf.normal_forms)}")
nf0 = search_normal_forms(system, GraphWithInterface.with_empty_interface(L))
print(f"normal forms without interface: {len(nf0.normal_forms)}")
