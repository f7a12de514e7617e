"""Sparse multivariate polynomials over the rationals.

Monomials are exponent tuples, terms carry exact Fraction coefficients, and
every polynomial keeps its terms sorted descending in the ring's reference
order (degree-reverse-lexicographic over the declared variable sequence).
Weight vectors refine that global tie-break via :class:`WeightedOrder`.

The max convention is used throughout: ``initial_form(f, w)`` keeps the
terms of ``f`` whose exponent maximizes ``w . alpha``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from ._linalg import integerize

Monomial = tuple  # exponent tuple, length = ring.n


class Term(NamedTuple):
    coefficient: Fraction
    monomial: Monomial


@dataclass(frozen=True)
class Ring:
    """A polynomial ring over Q, identified by its variable names."""

    variable_names: tuple

    def __post_init__(self):
        names = tuple(self.variable_names)
        if len(set(names)) != len(names) or any(not s for s in names):
            raise ValueError("variable names must be distinct and nonempty")
        object.__setattr__(self, "variable_names", names)

    @property
    def n(self) -> int:
        return len(self.variable_names)

    def variable(self, i: int) -> "Polynomial":
        mono = tuple(1 if j == i else 0 for j in range(self.n))
        return Polynomial(self, [Term(Fraction(1), mono)])

    def constant(self, c) -> "Polynomial":
        c = Fraction(c)
        if c == 0:
            return Polynomial(self, [])
        return Polynomial(self, [Term(c, (0,) * self.n)])

    def index(self, name: str) -> int:
        try:
            return self.variable_names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def __repr__(self):
        return f"Ring({','.join(self.variable_names)})"


def monomial_degree(mono: Monomial) -> int:
    return sum(mono)


def degrevlex_key(mono: Monomial) -> tuple:
    """Sort key realizing degrevlex: higher key = larger monomial."""
    return (sum(mono),) + tuple(-e for e in reversed(mono))


class WeightedOrder:
    """A weight vector refined by the global degrevlex tie-break.

    ``weights`` may hold one or two rows: the second row implements the
    symbolic perturbation u + eps*v used when stepping across a facet (the
    cone of the perturbed order is computed with the two-tier comparison,
    never with a numeric eps).  ``var_sequence`` permutes the variables seen
    by the tie-break; the default is the declared order.

    Keys are additive: key(a*b) = key(a) + key(b), which the Groebner engine
    relies on.
    """

    __slots__ = ("weights", "var_sequence", "_revseq")

    def __init__(self, weight: Sequence, second: Sequence | None = None,
                 var_sequence: Sequence[int] | None = None):
        rows = [integerize(tuple(Fraction(x) for x in weight))]
        if second is not None:
            rows.append(integerize(tuple(Fraction(x) for x in second)))
        self.weights = tuple(rows)
        n = len(self.weights[0])
        if any(len(r) != n for r in self.weights):
            raise ValueError("weight rows must share a length")
        self.var_sequence = tuple(var_sequence) if var_sequence is not None else tuple(range(n))
        self._revseq = tuple(reversed(self.var_sequence))

    @property
    def weight(self):
        return self.weights[0]

    @property
    def n(self) -> int:
        return len(self.weights[0])

    def key(self, mono: Monomial) -> tuple:
        parts = [sum(w[i] * e for i, e in enumerate(mono) if e) for w in self.weights]
        parts.append(sum(mono))
        parts.extend(-mono[i] for i in self._revseq)
        return tuple(parts)

    def sort_terms(self, terms: Iterable[Term]) -> list:
        return sorted(terms, key=lambda t: self.key(t.monomial), reverse=True)

    def greater(self, a: Monomial, b: Monomial) -> bool:
        return self.key(a) > self.key(b)

    def __repr__(self):
        return f"WeightedOrder({list(self.weights)})"


class Polynomial:
    """Immutable sparse polynomial; zero is the empty term sequence."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Iterable[Term]):
        merged = {}
        for c, m in terms:
            if len(m) != ring.n:
                raise ValueError("monomial length does not match ring")
            if any(e < 0 for e in m):
                raise ValueError("negative exponent")
            c0 = merged.get(m)
            c = Fraction(c) if not isinstance(c, Fraction) else c
            merged[m] = c if c0 is None else c0 + c
        cleaned = [Term(c, m) for m, c in merged.items() if c != 0]
        cleaned.sort(key=lambda t: degrevlex_key(t.monomial), reverse=True)
        self.ring = ring
        self.terms = tuple(cleaned)

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_binomial(self) -> bool:
        return len(self.terms) == 2

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and sum(self.terms[0].monomial) == 0)

    def is_homogeneous(self) -> bool:
        if not self.terms:
            return True
        d = sum(self.terms[0].monomial)
        return all(sum(t.monomial) == d for t in self.terms)

    def total_degree(self) -> int:
        return max((sum(t.monomial) for t in self.terms), default=0)

    def leading_term(self, order: WeightedOrder) -> Term:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        return max(self.terms, key=lambda t: order.key(t.monomial))

    def coefficient(self, mono: Monomial) -> Fraction:
        for t in self.terms:
            if t.monomial == mono:
                return t.coefficient
        return Fraction(0)

    def monomials(self) -> list:
        return [t.monomial for t in self.terms]

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if self.ring.variable_names != other.ring.variable_names:
            raise ValueError("polynomials from different rings")

    def __add__(self, other):
        self._check(other)
        return Polynomial(self.ring, list(self.terms) + list(other.terms))

    def __sub__(self, other):
        self._check(other)
        return Polynomial(self.ring, list(self.terms)
                          + [Term(-c, m) for c, m in other.terms])

    def __neg__(self):
        return Polynomial(self.ring, [Term(-c, m) for c, m in self.terms])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        acc = {}
        for c1, m1 in self.terms:
            for c2, m2 in other.terms:
                m = tuple(a + b for a, b in zip(m1, m2))
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return Polynomial(self.ring, [Term(c, m) for m, c in acc.items()])

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        return Polynomial(self.ring, [Term(c * t.coefficient, t.monomial) for t in self.terms])

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        result = self.ring.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def monic(self, order: WeightedOrder) -> "Polynomial":
        lc = self.leading_term(order).coefficient
        return self.scale(Fraction(1) / lc)

    def __eq__(self, other):
        return (isinstance(other, Polynomial)
                and self.ring.variable_names == other.ring.variable_names
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.ring.variable_names, self.terms))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for c, m in self.terms:
            factors = []
            for i, e in enumerate(m):
                if e == 1:
                    factors.append(self.ring.variable_names[i])
                elif e > 1:
                    factors.append(f"{self.ring.variable_names[i]}^{e}")
            body = "*".join(factors)
            if not body:
                chunk = str(abs(c))
            elif abs(c) == 1:
                chunk = body
            else:
                chunk = f"{abs(c)}*{body}"
            parts.append(("- " if c < 0 else "+ ") + chunk)
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else ("-" + out[2:])

    __repr__ = __str__


@dataclass(frozen=True)
class Ideal:
    """An ideal given by generators over a shared ring."""

    generators: tuple
    homogeneous: bool = False

    def __init__(self, generators: Sequence[Polynomial]):
        gens = tuple(generators)
        if not gens:
            raise ValueError("empty generator list")
        ring = gens[0].ring
        for g in gens:
            if g.ring.variable_names != ring.variable_names:
                raise ValueError("generators from different rings")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "homogeneous", all(g.is_homogeneous() for g in gens))

    @property
    def ring(self) -> Ring:
        return self.generators[0].ring


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*^()/]))")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == m.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", int(num), m.start(1)))
        elif name is not None:
            tokens.append(("name", name, m.start(2)))
        else:
            tokens.append(("op", "^" if op == "**" else op, m.start(3)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def parse_polynomial(text: str, ring: Ring) -> Polynomial:
    """Parse +, -, *, ^ expressions with integer/rational literals.

    Division is only allowed between two integer literals (a rational
    constant), matching the input grammar of problem files.
    """
    tokens = _tokenize(text)
    idx = 0

    def peek():
        return tokens[idx]

    def advance():
        nonlocal idx
        tok = tokens[idx]
        idx += 1
        return tok

    def parse_expr() -> Polynomial:
        kind, val, pos = peek()
        negate = False
        if kind == "op" and val in "+-":
            advance()
            negate = val == "-"
        acc = parse_term()
        if negate:
            acc = -acc
        while True:
            kind, val, pos = peek()
            if kind == "op" and val in "+-":
                advance()
                rhs = parse_term()
                acc = acc - rhs if val == "-" else acc + rhs
            else:
                return acc

    def parse_term() -> Polynomial:
        acc = parse_factor()
        while True:
            kind, val, pos = peek()
            if kind == "op" and val == "*":
                advance()
                acc = acc * parse_factor()
            else:
                return acc

    def parse_factor() -> Polynomial:
        base = parse_base()
        kind, val, pos = peek()
        if kind == "op" and val == "^":
            advance()
            kind, val, pos = peek()
            if kind != "num":
                raise ParseError("exponent must be an integer literal", pos)
            advance()
            return base ** val
        return base

    def parse_base() -> Polynomial:
        kind, val, pos = advance()
        if kind == "num":
            k2, v2, _ = peek()
            if k2 == "op" and v2 == "/":
                advance()
                k3, v3, p3 = advance()
                if k3 != "num":
                    raise ParseError("expected integer after '/'", p3)
                if v3 == 0:
                    raise ParseError("zero denominator", p3)
                return ring.constant(Fraction(val, v3))
            return ring.constant(val)
        if kind == "name":
            try:
                return ring.variable(ring.index(val))
            except KeyError:
                raise ParseError(f"unknown variable {val!r}", pos) from None
        if kind == "op" and val == "(":
            inner = parse_expr()
            kind, val, pos = advance()
            if not (kind == "op" and val == ")"):
                raise ParseError("expected ')'", pos)
            return inner
        if kind == "op" and val == "-":
            return -parse_factor()
        raise ParseError("expected a number, variable or '('", pos)

    result = parse_expr()
    kind, val, pos = peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", pos)
    return result


# -- initial forms -----------------------------------------------------------

def _weight_rows(w) -> tuple:
    """Normalize a weight argument into one or more exact rational rows."""
    seq = list(w)
    if seq and isinstance(seq[0], (list, tuple)):
        return tuple(tuple(Fraction(x) for x in row) for row in seq)
    return (tuple(Fraction(x) for x in seq),)


def initial_form(f: Polynomial, w) -> Polynomial:
    """Terms of f maximizing w . alpha (max convention), coefficients kept.

    ``w`` may also be a pair of weight rows, compared lexicographically;
    the traversal uses that form for symbolic facet perturbations.
    """
    rows = _weight_rows(w)
    if any(len(r) != f.ring.n for r in rows):
        raise ValueError("weight length does not match ring")
    if not f.terms:
        return f
    best = None
    kept = []
    for t in f.terms:
        val = tuple(sum(wi * e for wi, e in zip(row, t.monomial)) for row in rows)
        if best is None or val > best:
            best = val
            kept = [t]
        elif val == best:
            kept.append(t)
    return Polynomial(f.ring, kept)


def act(sigma, f: Polynomial) -> Polynomial:
    """Apply a signed permutation: x_i -> signs[i] * x_{perm[i]}."""
    perm, signs = sigma.perm, sigma.signs
    if len(perm) != f.ring.n:
        raise ValueError("permutation length does not match ring")
    out = []
    for c, m in f.terms:
        sign = 1
        image = [0] * len(m)
        for i, e in enumerate(m):
            if e:
                image[perm[i]] = e
                if signs[i] < 0 and e % 2:
                    sign = -sign
        out.append(Term(sign * c, tuple(image)))
    return Polynomial(f.ring, out)


# -- Pluecker ideals ---------------------------------------------------------

def plucker_ring(k: int, n: int, base: int = 0) -> Ring:
    """Ring with one variable p_{i1...ik} per ascending k-subset of n indices."""
    names = ["p" + "".join(str(i + base) for i in combo)
             for combo in itertools.combinations(range(n), k)]
    return Ring(tuple(names))


def plucker_relations(k: int, n: int, three_term_only: bool = False,
                      ring: Ring | None = None) -> list:
    """Quadratic relations P_{I,J} among the k x k minors, deduplicated.

    With ``three_term_only`` keep just the trinomials (|I meet J| = k-2).
    Signs of an index set sorted by an odd permutation are folded into the
    coefficient; here indices are already generated ascending.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if ring is None:
        ring = plucker_ring(k, n)
    combos = list(itertools.combinations(range(n), k))
    var_of = {c: i for i, c in enumerate(combos)}
    nvars = len(combos)
    seen = set()
    out = []
    for I in itertools.combinations(range(n), k - 1):
        for J in itertools.combinations(range(n), k + 1):
            inter = len(set(I) & set(J))
            if three_term_only and inter != k - 2:
                continue
            acc = {}
            for j in J:
                if j in I:
                    continue
                sign = (-1) ** (sum(1 for i in I if i < j)
                                + sum(1 for jp in J if jp > j))
                a = var_of[tuple(sorted(I + (j,)))]
                b = var_of[tuple(sorted(x for x in J if x != j))]
                m = [0] * nvars
                m[a] += 1
                m[b] += 1
                m = tuple(m)
                acc[m] = acc.get(m, 0) + sign
            p = Polynomial(ring, [Term(Fraction(c), m) for m, c in acc.items()])
            if p.is_zero():
                continue
            if p.terms[0].coefficient < 0:
                p = -p
            if p.terms not in seen:
                seen.add(p.terms)
                out.append(p)
    return out
