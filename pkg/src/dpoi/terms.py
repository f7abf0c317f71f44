"""Monoidal term language over a signature, interpreted into cospans.

Terms are built from named generators, identities, wire symmetries and the
four splitting/merging generators (mul, unit, comul, counit), composed in
sequence (`;`) and in parallel (`+`).  A term of type n -> m is interpreted
as a cospan n -> G <- m; sequencing is gluing by pushout, parallel
composition is disjoint union.  Rewiring folds the whole boundary into a
single interface, giving the graph-with-interface form the rewriting engine
works on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .category import pushout
from .engine import RewriteRule, RewritingSystem
from .hypergraph import (
    Edge,
    GraphWithInterface,
    Homomorphism,
    Hypergraph,
    Signature,
    coproduct,
    discrete,
)


class TermTypeError(ValueError):
    pass


class TermSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Gen:
    name: str


@dataclass(frozen=True)
class Id:
    n: int


@dataclass(frozen=True)
class Sym:
    a: int
    b: int


@dataclass(frozen=True)
class FrobMul:
    pass


@dataclass(frozen=True)
class FrobUnit:
    pass


@dataclass(frozen=True)
class FrobComul:
    pass


@dataclass(frozen=True)
class FrobCounit:
    pass


@dataclass(frozen=True)
class Seq:
    first: "Term"
    second: "Term"


@dataclass(frozen=True)
class Par:
    left: "Term"
    right: "Term"


Term = Union[Gen, Id, Sym, FrobMul, FrobUnit, FrobComul, FrobCounit, Seq, Par]

_FROB_TYPES = {FrobMul: (2, 1), FrobUnit: (0, 1), FrobComul: (1, 2), FrobCounit: (1, 0)}


def term_type(t: Term, signature: Signature, allow_frobenius: bool = True) -> tuple[int, int]:
    """Bottom-up type of a term; raises TermTypeError if ill-typed."""
    if isinstance(t, Gen):
        return signature.arity(t.name)
    if isinstance(t, Id):
        return (t.n, t.n)
    if isinstance(t, Sym):
        return (t.a + t.b, t.b + t.a)
    if type(t) in _FROB_TYPES:
        if not allow_frobenius:
            raise TermTypeError(f"{type(t).__name__} requires declared splitting/merging structure")
        return _FROB_TYPES[type(t)]
    if isinstance(t, Seq):
        d1, c1 = term_type(t.first, signature, allow_frobenius)
        d2, c2 = term_type(t.second, signature, allow_frobenius)
        if c1 != d2:
            raise TermTypeError(f"cannot compose {d1}->{c1} with {d2}->{c2}")
        return (d1, c2)
    if isinstance(t, Par):
        d1, c1 = term_type(t.left, signature, allow_frobenius)
        d2, c2 = term_type(t.right, signature, allow_frobenius)
        return (d1 + d2, c1 + c2)
    raise TypeError(f"not a term: {t!r}")


@dataclass(frozen=True)
class Cospan:
    """A cospan n -> G <- m with discrete feet."""

    left: Homomorphism
    right: Homomorphism

    def __post_init__(self) -> None:
        if self.left.target != self.right.target:
            raise ValueError("cospan legs must share an apex")
        if not (self.left.source.is_discrete() and self.right.source.is_discrete()):
            raise ValueError("cospan feet must be discrete")

    @property
    def apex(self) -> Hypergraph:
        return self.left.target

    @property
    def dom(self) -> int:
        return len(self.left.source.nodes)

    @property
    def cod(self) -> int:
        return len(self.right.source.nodes)

    def left_legs(self) -> list[int]:
        return [self.left.node_map[i] for i in sorted(self.left.source.nodes)]

    def right_legs(self) -> list[int]:
        return [self.right.node_map[i] for i in sorted(self.right.source.nodes)]


def _cospan(signature: Signature, apex: Hypergraph, left: list[int], right: list[int]) -> Cospan:
    ln = discrete(len(left), signature)
    rn = discrete(len(right), signature)
    return Cospan(
        Homomorphism(ln, apex, dict(enumerate(left)), {}),
        Homomorphism(rn, apex, dict(enumerate(right)), {}),
    )


def compose_cospans(c1: Cospan, c2: Cospan) -> Cospan:
    """Sequential composition by pushout over the shared middle boundary."""
    if c1.cod != c2.dom:
        raise TermTypeError("cospan composition boundary mismatch")
    mid = c1.right.source
    f = c1.right
    g = Homomorphism(mid, c2.apex, {i: c2.left.node_map[i] for i in mid.nodes}, {})
    glued, in1, in2 = pushout(f, g)
    return _cospan(
        c1.apex.signature,
        glued,
        [in1.node_map[v] for v in c1.left_legs()],
        [in2.node_map[v] for v in c2.right_legs()],
    )


def tensor_cospans(c1: Cospan, c2: Cospan) -> Cospan:
    g, i1, i2 = coproduct(c1.apex, c2.apex)
    return _cospan(
        g.signature,
        g,
        [i1.node_map[v] for v in c1.left_legs()] + [i2.node_map[v] for v in c2.left_legs()],
        [i1.node_map[v] for v in c1.right_legs()] + [i2.node_map[v] for v in c2.right_legs()],
    )


def interpret(t: Term, signature: Signature, allow_frobenius: bool = True) -> Cospan:
    """Interpret a typeable term as a cospan of hypergraphs."""
    term_type(t, signature, allow_frobenius)
    return _interpret(t, signature)


def _interpret(t: Term, signature: Signature) -> Cospan:
    if isinstance(t, Gen):
        n, m = signature.arity(t.name)
        apex = Hypergraph.build(
            signature,
            n + m,
            [(t.name, list(range(n)), list(range(n, n + m)))],
        )
        return _cospan(signature, apex, list(range(n)), list(range(n, n + m)))
    if isinstance(t, Id):
        apex = discrete(t.n, signature)
        return _cospan(signature, apex, list(range(t.n)), list(range(t.n)))
    if isinstance(t, Sym):
        apex = discrete(t.a + t.b, signature)
        return _cospan(
            signature,
            apex,
            list(range(t.a + t.b)),
            [t.a + i for i in range(t.b)] + list(range(t.a)),
        )
    if isinstance(t, FrobMul):
        apex = discrete(1, signature)
        return _cospan(signature, apex, [0, 0], [0])
    if isinstance(t, FrobUnit):
        apex = discrete(1, signature)
        return _cospan(signature, apex, [], [0])
    if isinstance(t, FrobComul):
        apex = discrete(1, signature)
        return _cospan(signature, apex, [0], [0, 0])
    if isinstance(t, FrobCounit):
        apex = discrete(1, signature)
        return _cospan(signature, apex, [0], [])
    if isinstance(t, Seq):
        return compose_cospans(_interpret(t.first, signature), _interpret(t.second, signature))
    if isinstance(t, Par):
        return tensor_cospans(_interpret(t.left, signature), _interpret(t.right, signature))
    raise TypeError(f"not a term: {t!r}")


def rewire(t: Term, signature: Signature, allow_frobenius: bool = True) -> GraphWithInterface:
    """Fold both boundaries of a term into a single interface: a term of type
    i -> j becomes its apex with interface i+j."""
    c = interpret(t, signature, allow_frobenius)
    return GraphWithInterface.from_legs(c.apex, c.left_legs() + c.right_legs())


def rewire_cospan(c: Cospan) -> GraphWithInterface:
    return GraphWithInterface.from_legs(c.apex, c.left_legs() + c.right_legs())


def translate_system(
    signature: Signature,
    rules: list[tuple[str, Term, Term]],
    allow_frobenius: bool = True,
) -> RewritingSystem:
    """Turn term rules into a rewriting system whose rule apexes are the
    discrete folded boundaries; the system is flagged frobenius."""
    out = []
    for name, lhs, rhs in rules:
        tl = term_type(lhs, signature, allow_frobenius)
        tr = term_type(rhs, signature, allow_frobenius)
        if tl != tr:
            raise TermTypeError(f"rule {name}: sides have types {tl} != {tr}")
        gl = rewire(lhs, signature, allow_frobenius)
        gr = rewire(rhs, signature, allow_frobenius)
        out.append(RewriteRule(name, gl.interface, gr.interface))
    return RewritingSystem(signature, tuple(out), mode="frobenius")


# -- concrete syntax --------------------------------------------------------
#
#   term := atom | term ";" term | term "+" term
#   atom := NAME | "id:" NAT | "sym:" NAT "," NAT
#         | "mul" | "unit" | "comul" | "counit" | "(" term ")"
#
# ";" binds looser than "+"; both associate to the left.

_KEYWORDS = {"mul": FrobMul, "unit": FrobUnit, "comul": FrobComul, "counit": FrobCounit}


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in ";+(),":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch == ":":
            tokens.append((":", ":", i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(src) and src[j].isdigit():
                j += 1
            tokens.append(("NAT", src[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(src) and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("NAME", src[i:j], i))
            i = j
            continue
        raise TermSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("EOF", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise TermSyntaxError(f"expected {kind}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Term:
        t = self.seq()
        tok = self.peek()
        if tok[0] != "EOF":
            raise TermSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return t

    def seq(self) -> Term:
        t = self.par()
        while self.peek()[0] == ";":
            self.next()
            t = Seq(t, self.par())
        return t

    def par(self) -> Term:
        t = self.atom()
        while self.peek()[0] == "+":
            self.next()
            t = Par(t, self.atom())
        return t

    def atom(self) -> Term:
        kind, value, pos = self.next()
        if kind == "(":
            t = self.seq()
            self.expect(")")
            return t
        if kind == "NAME":
            if value == "id":
                self.expect(":")
                return Id(int(self.expect("NAT")[1]))
            if value == "sym":
                self.expect(":")
                a = int(self.expect("NAT")[1])
                self.expect(",")
                b = int(self.expect("NAT")[1])
                return Sym(a, b)
            if value in _KEYWORDS:
                return _KEYWORDS[value]()
            return Gen(value)
        raise TermSyntaxError(f"unexpected {value!r}", pos)


def parse_term(src: str) -> Term:
    """Parse the term grammar; raises TermSyntaxError with a position."""
    return _Parser(src).parse()


def print_term(t: Term) -> str:
    """Inverse of parse_term up to whitespace; parse(print(t)) == t."""

    def go(t: Term, parent: str) -> str:
        if isinstance(t, Gen):
            return t.name
        if isinstance(t, Id):
            return f"id:{t.n}"
        if isinstance(t, Sym):
            return f"sym:{t.a},{t.b}"
        if isinstance(t, FrobMul):
            return "mul"
        if isinstance(t, FrobUnit):
            return "unit"
        if isinstance(t, FrobComul):
            return "comul"
        if isinstance(t, FrobCounit):
            return "counit"
        if isinstance(t, Seq):
            s = f"{go(t.first, 'seq-l')} ; {go(t.second, 'seq-r')}"
            return f"({s})" if parent in ("par-l", "par-r", "seq-r") else s
        if isinstance(t, Par):
            s = f"{go(t.left, 'par-l')} + {go(t.right, 'par-r')}"
            return f"({s})" if parent == "par-r" else s
        raise TypeError(f"not a term: {t!r}")

    return go(t, "top")
