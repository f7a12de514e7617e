"""Buchberger Groebner bases for weighted orders, saturation, initial ideals.

The engine works on an internal integer representation: a polynomial is a
list of (key, monomial, coefficient) triples sorted descending by key, where
key is the additive sort key of the ambient :class:`WeightedOrder`.  All
reductions are fraction free; reduced bases are converted back to monic
rational polynomials at the end (leading coefficient 1, as required for
canonical cone deduplication).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from heapq import heappush, heappop
from math import gcd
from typing import Sequence

from ._linalg import kernel_basis
from .polyring import (Ideal, Polynomial, Ring, Term, WeightedOrder,
                       initial_form)

_COEFF_BITS_LIMIT = 512  # strip content once coefficients pass this size


# -- internal integer polynomials -------------------------------------------

def _to_z(p: Polynomial, order: WeightedOrder):
    """Convert to a primitive integer triple list, sorted descending."""
    den = 1
    for c, _ in p.terms:
        den = den * c.denominator // gcd(den, c.denominator)
    triples = [(order.key(m), m, int(c * den)) for c, m in p.terms]
    triples.sort(reverse=True)
    return _strip(triples)


def _from_z(zp, ring: Ring) -> Polynomial:
    return Polynomial(ring, [Term(Fraction(c), m) for _, m, c in zp])


def _strip(zp):
    g = 0
    for _, _, c in zp:
        g = gcd(g, abs(c))
        if g == 1:
            return zp
    if g <= 1:
        return zp
    return [(k, m, c // g) for k, m, c in zp]


def _shift(zp, kdelta, mdelta, scale):
    return [(tuple(a + b for a, b in zip(k, kdelta)),
             tuple(a + b for a, b in zip(m, mdelta)),
             c * scale) for k, m, c in zp]


def _axpy(a, f, g):
    """a*f + g for sorted descending triple lists (g already scaled)."""
    out = []
    i = j = 0
    nf, ng = len(f), len(g)
    while i < nf and j < ng:
        kf, kg = f[i][0], g[j][0]
        if kf > kg:
            k, m, c = f[i]
            out.append((k, m, a * c))
            i += 1
        elif kf < kg:
            out.append(g[j])
            j += 1
        else:
            c = a * f[i][2] + g[j][2]
            if c:
                out.append((kf, f[i][1], c))
            i += 1
            j += 1
    if i < nf:
        out.extend((k, m, a * c) for k, m, c in f[i:])
    if j < ng:
        out.extend(g[j:])
    return out


def _divides(a, b) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _monomial_lcm(a, b):
    return tuple(x if x > y else y for x, y in zip(a, b))


class _Basis:
    """Working basis for reduction: leading data plus triple lists."""

    __slots__ = ("entries",)

    def __init__(self):
        self.entries = []  # (lm_mono, lm_key, lc, triples)

    def add(self, zp):
        k, m, c = zp[0]
        self.entries.append((m, k, c, zp))

    def find_reducer(self, mono):
        for entry in self.entries:
            if _divides(entry[0], mono):
                return entry
        return None


def _normal_form_z(f, basis: _Basis, tail: bool = True):
    """Fraction-free remainder of f modulo the basis.

    Returns (remainder, multiplier) with multiplier a positive Fraction such
    that remainder/multiplier differs from f by an element of the ideal.
    With tail=False only the leading term is reduced (head reduction).
    """
    rem = []
    work = list(f)
    mult = Fraction(1)
    while work:
        key, mono, coeff = work[0]
        entry = basis.find_reducer(mono)
        if entry is None:
            if not tail:
                rem.extend(work)
                break
            rem.append(work[0])
            work = work[1:]
            continue
        lm, lk, lc, g = entry
        gamma = gcd(abs(coeff), abs(lc))
        a = abs(lc) // gamma
        b = coeff // gamma if lc > 0 else -(coeff // gamma)
        kd = tuple(x - y for x, y in zip(key, lk))
        md = tuple(x - y for x, y in zip(mono, lm))
        shifted = _shift(g[1:], kd, md, -b)
        work = _axpy(a, work[1:], shifted)
        if a != 1:
            mult *= a
            if rem:
                rem = [(k, m, a * c) for k, m, c in rem]
        if work and abs(work[0][2]).bit_length() > _COEFF_BITS_LIMIT:
            g0 = 0
            for _, _, c in rem:
                g0 = gcd(g0, abs(c))
            for _, _, c in work:
                g0 = gcd(g0, abs(c))
            if g0 > 1:
                rem = [(k, m, c // g0) for k, m, c in rem]
                work = [(k, m, c // g0) for k, m, c in work]
                mult /= g0
    return rem, mult


def _spoly_z(e1, e2, order: WeightedOrder):
    m1, k1, c1, f = e1
    m2, k2, c2, g = e2
    lcm = _monomial_lcm(m1, m2)
    klcm = order.key(lcm)
    gamma = gcd(abs(c1), abs(c2))
    a = c2 // gamma
    b = c1 // gamma
    sf = _shift(f, tuple(x - y for x, y in zip(klcm, k1)),
                tuple(x - y for x, y in zip(lcm, m1)), a)
    sg = _shift(g, tuple(x - y for x, y in zip(klcm, k2)),
                tuple(x - y for x, y in zip(lcm, m2)), -b)
    return _strip(_axpy(1, sf, sg))


# -- public types ------------------------------------------------------------

@dataclass(frozen=True)
class GroebnerBasis:
    elements: tuple
    order: WeightedOrder
    reduced: bool = True

    @property
    def ring(self) -> Ring:
        return self.elements[0].ring

    def leading_monomials(self):
        return [g.leading_term(self.order).monomial for g in self.elements]

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class InitialIdeal:
    generators: tuple
    source_weight: tuple

    @property
    def ring(self) -> Ring:
        return self.generators[0].ring

    def as_ideal(self) -> Ideal:
        return Ideal(self.generators)

    def is_binomial(self) -> bool:
        return all(len(g.terms) <= 2 for g in self.generators)


def s_polynomial(f: Polynomial, g: Polynomial, order: WeightedOrder) -> Polynomial:
    """The classical S-polynomial, normalized to exact rationals."""
    tf, tg = f.leading_term(order), g.leading_term(order)
    lcm = _monomial_lcm(tf.monomial, tg.monomial)
    mf = tuple(a - b for a, b in zip(lcm, tf.monomial))
    mg = tuple(a - b for a, b in zip(lcm, tg.monomial))
    xf = Polynomial(f.ring, [Term(Fraction(1) / tf.coefficient, mf)])
    xg = Polynomial(g.ring, [Term(Fraction(1) / tg.coefficient, mg)])
    return xf * f - xg * g


def normal_form(f: Polynomial, G: GroebnerBasis) -> Polynomial:
    """Remainder of f after full division by G; f - r lies in <G>."""
    if f.ring.variable_names != G.ring.variable_names:
        raise ValueError("polynomial and basis from different rings")
    if f.is_zero():
        return f
    order = G.order
    basis = _Basis()
    for g in G.elements:
        basis.add(_to_z(g, order))
    den = 1
    for c, _ in f.terms:
        den = den * c.denominator // gcd(den, c.denominator)
    triples = sorted(((order.key(m), m, int(c * den)) for c, m in f.terms),
                     reverse=True)
    rem, mult = _normal_form_z(triples, basis)
    scale = Fraction(1, den) / mult
    return Polynomial(f.ring, [Term(scale * c, m) for _, m, c in rem])


# -- Buchberger ---------------------------------------------------------------

def _update_pairs(pairs, basis_entries, new_index, order):
    """Gebauer-Moeller pair update implementing product and chain criteria."""
    t = new_index
    lm_t = basis_entries[t][0]
    cand = []
    for i in range(t):
        if basis_entries[i] is None:
            continue
        cand.append((i, _monomial_lcm(basis_entries[i][0], lm_t)))
    # criterion M: drop (i,t) when lcm(j,t) properly divides lcm(i,t)
    keep = []
    for i, lcm_i in cand:
        dominated = False
        for j, lcm_j in cand:
            if lcm_j != lcm_i and _divides(lcm_j, lcm_i):
                dominated = True
                break
        if not dominated:
            keep.append((i, lcm_i))
    # criterion F: keep a single pair per lcm value
    by_lcm = {}
    for i, lcm_i in keep:
        by_lcm.setdefault(lcm_i, []).append(i)
    survivors = []
    for lcm_i, idxs in by_lcm.items():
        # product criterion: coprime leading monomials reduce to zero
        i = min(idxs)
        lm_i = basis_entries[i][0]
        if all(a == 0 or b == 0 for a, b in zip(lm_i, lm_t)):
            continue
        survivors.append((i, lcm_i))
    # chain criterion on old pairs
    filtered = []
    for entry in pairs:
        _, _, i, j, lcm_ij = entry
        if (_divides(lm_t, lcm_ij)
                and _monomial_lcm(basis_entries[i][0], lm_t) != lcm_ij
                and _monomial_lcm(basis_entries[j][0], lm_t) != lcm_ij):
            continue
        filtered.append(entry)
    pairs[:] = filtered
    for i, lcm_i in survivors:
        heappush(pairs, (sum(lcm_i), order.key(lcm_i), i, t, lcm_i))


def buchberger(gens: Sequence[Polynomial], order: WeightedOrder) -> GroebnerBasis:
    """Reduced Groebner basis of <gens>, deterministic for fixed input.

    Pair selection follows the normal strategy (minimal lcm degree first);
    the Gebauer-Moeller update applies the product and chain criteria.
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise ValueError("no nonzero generators")
    ring = gens[0].ring
    if order.n != ring.n:
        raise ValueError("order dimension does not match ring")
    zgens = sorted((_to_z(g, order) for g in gens),
                   key=lambda zp: (zp[0][0], [t[0] for t in zp]))
    basis = _Basis()
    entries = basis.entries
    pairs = []
    for zg in zgens:
        red, _ = _normal_form_z(zg, basis)
        if not red:
            continue
        red = _strip(red)
        if red[0][2] < 0:
            red = [(k, m, -c) for k, m, c in red]
        basis.add(red)
        _update_pairs(pairs, entries, len(entries) - 1, order)
    while pairs:
        _, _, i, j, _ = heappop(pairs)
        if entries[i] is None or entries[j] is None:
            continue
        s = _spoly_z(entries[i], entries[j], order)
        if not s:
            continue
        red, _ = _normal_form_z(s, basis)
        if not red:
            continue
        red = _strip(red)
        if red[0][2] < 0:
            red = [(k, m, -c) for k, m, c in red]
        basis.add(red)
        _update_pairs(pairs, entries, len(entries) - 1, order)
    return _reduce_basis(basis, ring, order)


def _reduce_basis(basis: _Basis, ring: Ring, order: WeightedOrder) -> GroebnerBasis:
    entries = [e for e in basis.entries if e is not None]
    entries.sort(key=lambda e: e[1])
    # minimalize: drop entries whose leading monomial another one divides
    # (divisibility need not follow the key order under negative weights)
    minimal = [e for e in entries
               if not any(f is not e and _divides(f[0], e[0]) for f in entries)]
    # interreduce tails against the minimal set
    reduced = []
    for idx, e in enumerate(minimal):
        others = _Basis()
        others.entries = [f for k, f in enumerate(minimal) if k != idx]
        red, _ = _normal_form_z(e[3], others)
        red = _strip(red)
        if red[0][2] < 0:
            red = [(k, m, -c) for k, m, c in red]
        reduced.append(red)
    polys = []
    for zp in sorted(reduced, key=lambda zp: zp[0][0]):
        lc = zp[0][2]
        polys.append(Polynomial(ring, [Term(Fraction(c, lc), m) for _, m, c in zp]))
    return GroebnerBasis(tuple(polys), order, reduced=True)


# -- initial ideals -----------------------------------------------------------

def initial_ideal(I: Ideal, w) -> InitialIdeal:
    """Initial forms of the reduced basis adapted to w; needs homogeneous I."""
    if not I.homogeneous:
        raise ValueError("initial ideals are only computed for homogeneous ideals")
    rows = w if w and isinstance(w[0], (list, tuple)) else [w]
    order = WeightedOrder(rows[0], rows[1] if len(rows) > 1 else None)
    gb = buchberger(I.generators, order)
    gens = tuple(initial_form(g, rows if len(rows) > 1 else rows[0]) for g in gb)
    return InitialIdeal(gens, tuple(Fraction(x) for x in rows[0]))


# -- saturation ---------------------------------------------------------------

def _strip_variable(p: Polynomial, i: int) -> Polynomial:
    """Divide by the largest power of x_i dividing every term."""
    e = min(t.monomial[i] for t in p.terms)
    if e == 0:
        return p
    return Polynomial(p.ring, [
        Term(c, m[:i] + (m[i] - e,) + m[i + 1:]) for c, m in p.terms])


def _saturate_variable_homogeneous(gens, i):
    """J : x_i^infty for homogeneous J via the reverse-lex trick."""
    ring = gens[0].ring
    seq = tuple(j for j in range(ring.n) if j != i) + (i,)
    order = WeightedOrder((0,) * ring.n, var_sequence=seq)
    gb = buchberger(gens, order)
    out = [_strip_variable(g, i) for g in gb.elements]
    changed = any(a is not b for a, b in zip(out, gb.elements))
    return out, changed


def _saturate_variable_affine(gens, i):
    """J : x_i^infty via elimination of t from J + <t*x_i - 1>."""
    ring = gens[0].ring
    ext = Ring(("t_sat",) + ring.variable_names)
    lift = [Polynomial(ext, [Term(c, (0,) + m) for c, m in g.terms]) for g in gens]
    relation = Polynomial(ext, [
        Term(Fraction(1), (1,) + tuple(1 if j == i else 0 for j in range(ring.n))),
        Term(Fraction(-1), (0,) * ext.n)])
    order = WeightedOrder((1,) + (0,) * ring.n)
    gb = buchberger(lift + [relation], order)
    out = []
    for g in gb.elements:
        if all(t.monomial[0] == 0 for t in g.terms):
            out.append(Polynomial(ring, [Term(c, m[1:]) for c, m in g.terms]))
    changed = True  # caller compares reduced bases for the fixpoint test
    return out, changed


def saturate_variables(J: Ideal) -> Ideal:
    """J : (x_1 ... x_n)^infty by iterated single-variable saturations."""
    gens = list(J.generators)
    ring = J.ring
    homogeneous = J.homogeneous
    reference = WeightedOrder((0,) * ring.n)
    previous = None
    while True:
        changed = False
        for i in range(ring.n):
            if not any(any(t.monomial[i] for t in g.terms) for g in gens):
                continue
            if homogeneous:
                gens, step_changed = _saturate_variable_homogeneous(gens, i)
                changed = changed or step_changed
            else:
                gens, _ = _saturate_variable_affine(gens, i)
            if any(g.is_constant() and not g.is_zero() for g in gens):
                return Ideal([ring.constant(1)])
        gb = buchberger(gens, reference)
        current = tuple(gb.elements)
        if current == previous or (homogeneous and not changed):
            return Ideal(list(current))
        previous = current
        gens = list(current)


def contains_monomial(J: Ideal) -> bool:
    """True iff the saturation by the product of variables is the unit ideal."""
    if any(g.is_monomial() for g in J.generators):
        return True
    gb = buchberger(J.generators, WeightedOrder((0,) * J.ring.n))
    if any(g.is_monomial() for g in gb.elements):
        return True
    if all(len(g.terms) <= 2 for g in gb.elements):
        # a reduced basis of a binomial ideal is binomial, and dividing a
        # monomial by binomials yields single terms only: no monomial member
        return False
    sat = saturate_variables(Ideal(list(gb.elements)))
    return len(sat.generators) == 1 and sat.generators[0].is_constant() \
        and not sat.generators[0].is_zero()


# -- homogeneity spaces and dimension -----------------------------------------

def homogeneity_space(G: Sequence[Polynomial]):
    """Echelon basis of {v : v.alpha constant on each g}, with pivot columns.

    Returns (rows, pivots); rows are Fraction tuples in reduced row echelon
    form (leftmost-pivot convention), pivots are 0-based column indices.
    """
    polys = [g for g in G if not g.is_zero()]
    if not polys:
        raise ValueError("empty polynomial list")
    n = polys[0].ring.n
    rows = []
    for g in polys:
        monos = g.monomials()
        first = monos[0]
        for m in monos[1:]:
            rows.append(tuple(a - b for a, b in zip(first, m)))
    return kernel_basis(rows, n)


def _monomial_ideal_dimension(lms, n) -> int:
    """Krull dimension of a monomial ideal as max independent variable set."""
    supports = sorted({frozenset(i for i, e in enumerate(m) if e) for m in lms},
                      key=len)
    if frozenset() in supports:
        return -1  # unit ideal

    @lru_cache(maxsize=None)
    def best(candidates: frozenset) -> int:
        for sup in supports:
            if sup <= candidates:
                return max(best(candidates - {x}) for x in sup)
        return len(candidates)

    return best(frozenset(range(n)))


def krull_dimension(I: Ideal) -> int:
    """Dimension of the quotient ring, via the staircase of any reduced basis."""
    order = WeightedOrder((0,) * I.ring.n)
    gb = buchberger(I.generators, order)
    return _monomial_ideal_dimension(gb.leading_monomials(), I.ring.n)
