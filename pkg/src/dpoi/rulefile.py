"""Rule-file parsing.

Format (UTF-8 text, '#' comments):

    signature {
      gen NAME : NAT -> NAT
      ...
    }
    frobenius            # optional: allow mul/unit/comul/counit in terms
    mode plain | frobenius | convex

    rule NAME : TERM => TERM
    rule NAME : graph { ... } => graph { ... }

Graph blocks describe a rule side explicitly (used for rules transcribed
from pictures):

    graph { nodes N; edge LABEL [s0 s1 ...] [t0 t1 ...]; inputs [n ...]; outputs [n ...] }

The rule apex is the discrete graph on inputs+outputs, its legs pointing at
the listed nodes; both sides of a rule must list boundaries of equal length.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .engine import RewriteRule, RewritingSystem
from .hypergraph import GraphWithInterface, Homomorphism, Hypergraph, Signature, discrete
from .terms import TermSyntaxError, parse_term, rewire, term_type


class RuleFileError(ValueError):
    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass
class _Line:
    no: int
    text: str


def _strip(lines: list[str]) -> list[_Line]:
    out = []
    for i, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].rstrip()
        if text.strip():
            out.append(_Line(i, text))
    return out


_GEN_RE = re.compile(r"^\s*gen\s+(\w+)\s*:\s*(\d+)\s*->\s*(\d+)\s*$")
_RULE_RE = re.compile(r"^\s*rule\s+(\w+)\s*:\s*(.*)$", re.DOTALL)
_GRAPH_RE = re.compile(r"^\s*graph\s*\{(.*)\}\s*$", re.DOTALL)


def _parse_graph_block(src: str, sig: Signature, line_no: int) -> GraphWithInterface:
    m = _GRAPH_RE.match(src.strip())
    if not m:
        raise RuleFileError("malformed graph block", line_no)
    body = m.group(1)
    n_nodes: Optional[int] = None
    edges = []
    inputs: Optional[list[int]] = None
    outputs: Optional[list[int]] = None
    for stmt in (s.strip() for s in body.split(";")):
        if not stmt:
            continue
        if stmt.startswith("nodes"):
            n_nodes = int(stmt.split()[1])
        elif stmt.startswith("edge"):
            em = re.match(r"edge\s+(\w+)\s*\[([\d\s]*)\]\s*\[([\d\s]*)\]$", stmt)
            if not em:
                raise RuleFileError(f"malformed edge statement {stmt!r}", line_no)
            label = em.group(1)
            srcs = [int(x) for x in em.group(2).split()]
            tgts = [int(x) for x in em.group(3).split()]
            edges.append((label, srcs, tgts))
        elif stmt.startswith("inputs"):
            inputs = [int(x) for x in re.findall(r"\d+", stmt)]
        elif stmt.startswith("outputs"):
            outputs = [int(x) for x in re.findall(r"\d+", stmt)]
        else:
            raise RuleFileError(f"unknown graph statement {stmt!r}", line_no)
    if n_nodes is None or inputs is None or outputs is None:
        raise RuleFileError("graph block needs nodes, inputs and outputs", line_no)
    try:
        g = Hypergraph.build(sig, n_nodes, edges)
    except ValueError as exc:
        raise RuleFileError(str(exc), line_no) from None
    legs = inputs + outputs
    if any(v >= n_nodes for v in legs):
        raise RuleFileError("interface mentions a missing node", line_no)
    return GraphWithInterface.from_legs(g, legs)


def _split_rule_sides(body: str, line_no: int) -> tuple[str, str]:
    depth = 0
    for i in range(len(body) - 1):
        ch = body[i]
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif depth == 0 and body[i : i + 2] == "=>":
            return body[:i].strip(), body[i + 2 :].strip()
    raise RuleFileError("rule needs '=>' between its sides", line_no)


def parse_rule_file(text: str) -> RewritingSystem:
    lines = _strip(text.splitlines())
    gens: dict[str, tuple[int, int]] = {}
    mode = "plain-dpoi"
    frobenius = False
    rule_specs: list[tuple[int, str, str, str]] = []

    i = 0
    # join physical lines of multi-line constructs (signature and graph blocks)
    logical: list[_Line] = []
    buf: Optional[_Line] = None
    depth = 0
    for ln in lines:
        if buf is None:
            buf = _Line(ln.no, ln.text)
        else:
            buf.text += "\n" + ln.text.strip()
        depth += ln.text.count("{") - ln.text.count("}")
        if depth == 0:
            logical.append(buf)
            buf = None
    if buf is not None:
        raise RuleFileError("unbalanced braces", buf.no)

    for ln in logical:
        text = ln.text.strip()
        if text.startswith("signature"):
            m = re.match(r"signature\s*\{(.*)\}$", text, re.DOTALL)
            if not m:
                raise RuleFileError("malformed signature block", ln.no)
            for stmt in re.split(r"[;\n]", m.group(1)):
                stmt = stmt.strip()
                if not stmt:
                    continue
                gm = _GEN_RE.match(stmt)
                if not gm:
                    raise RuleFileError(f"malformed generator {stmt!r}", ln.no)
                name = gm.group(1)
                if name in gens:
                    raise RuleFileError(f"duplicate generator {name!r}", ln.no)
                gens[name] = (int(gm.group(2)), int(gm.group(3)))
        elif text == "frobenius":
            frobenius = True
        elif text.startswith("mode"):
            value = text.split(None, 1)[1].strip() if len(text.split(None, 1)) > 1 else ""
            if value not in ("plain", "frobenius", "convex"):
                raise RuleFileError(f"unknown mode {value!r}", ln.no)
            mode = {"plain": "plain-dpoi"}.get(value, value)
        elif text.startswith("rule"):
            rm = _RULE_RE.match(text)
            if not rm:
                raise RuleFileError("malformed rule", ln.no)
            lhs, rhs = _split_rule_sides(rm.group(2), ln.no)
            rule_specs.append((ln.no, rm.group(1), lhs, rhs))
        else:
            raise RuleFileError(f"unknown directive {text.split()[0]!r}", ln.no)

    sig = Signature(gens)
    allow_frob = frobenius or mode == "frobenius"
    rules = []
    for line_no, name, lsrc, rsrc in rule_specs:
        sides = []
        types = []
        for side_src in (lsrc, rsrc):
            if side_src.lstrip().startswith("graph"):
                gwi = _parse_graph_block(side_src, sig, line_no)
                m = _GRAPH_RE.match(side_src.strip())
                n_in = len(re.findall(r"\d+", re.search(r"inputs[^;]*", m.group(1)).group(0)))
                n_out = len(re.findall(r"\d+", re.search(r"outputs[^;]*", m.group(1)).group(0)))
                sides.append(gwi)
                types.append((n_in, n_out))
            else:
                try:
                    term = parse_term(side_src)
                    types.append(term_type(term, sig, allow_frob))
                except TermSyntaxError as exc:
                    raise RuleFileError(f"rule {name}: {exc}", line_no) from None
                except ValueError as exc:
                    raise RuleFileError(f"rule {name}: {exc}", line_no) from None
                sides.append(rewire(term, sig, allow_frob))
        gl, gr = sides
        if types[0] != types[1]:
            raise RuleFileError(
                f"rule {name}: side types differ ({types[0]} vs {types[1]})", line_no
            )
        try:
            rules.append(RewriteRule(name, gl.interface, gr.interface))
        except ValueError as exc:
            raise RuleFileError(f"rule {name}: {exc}", line_no) from None
    try:
        return RewritingSystem(sig, tuple(rules), mode=mode)
    except ValueError as exc:
        raise RuleFileError(str(exc), 1) from None
