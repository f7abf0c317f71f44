"""A positive case: the non-commutative bimonoid rules are left-connected
and all of their overlapping pairs join, so the system checks confluent.

Run:  python demos/04_bimonoid_confluence.py
"""

from dpoi import decide_confluence_left_connected, is_left_connected
from dpoi.rulefile import parse_rule_file

RULES = open(__file__.rsplit("/", 2)[0] + "/rules/bimonoid.rules").read()

system = parse_rule_file(RULES)
print("rules:", ", ".join(r.name for r in system.rules))
print("left-connected:", is_left_connected(system))

report = decide_confluence_left_connected(system)
print("verdict:", report.verdict)
print("pairs examined:", report.stats["pairs_examined"],
      "of which parallel:", report.stats["parallel_pairs"])
slowest = max(report.pairs, key=lambda r: len(r.pair.overlap.edges))
print("largest overlap:", len(slowest.pair.overlap.edges), "edges",
      f"({slowest.pair.rule1} with {slowest.pair.rule2})")
