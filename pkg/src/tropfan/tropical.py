"""Groebner cones, tropical links, hypersurfaces, prevarieties, refinements.

A Groebner cone is certified by the reduced basis computed at an interior
weight: equalities between the exponents of the head terms, inequalities
from head against tail.  Tropical links at a facet are found directly on
the initial ideal: candidate rays come from the cell structure of the
prevariety of its reduced basis, and cells that are too large are split by
monomial witnesses until only genuine ray directions survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from ._linalg import integerize, primitive, rank, rref_integer_rows
from .cones import Cone, Fan, build_fan, facets, intersect
from .groebner import (GroebnerBasis, InitialIdeal, buchberger,
                       contains_monomial, homogeneity_space, krull_dimension,
                       normal_form)
from .polyring import (Ideal, Polynomial, Ring, Term, WeightedOrder,
                       initial_form)

_WITNESS_POWER_CAP = 64


@dataclass(frozen=True)
class GroebnerCone:
    """A cone on Trop(I) bundled with the basis and initial ideal behind it."""

    cone: Cone
    witness_weight: tuple
    reduced_gb: GroebnerBasis
    initial_gens: InitialIdeal

    @property
    def dim(self) -> int:
        return self.cone.dim


class MonomialInitialIdeal(ValueError):
    """The requested weight is not on the tropical variety."""


def trop_dimension(I: Ideal) -> int:
    """dim Trop(I) = Krull dimension of the quotient, computed once per ideal."""
    return krull_dimension(I)


def groebner_cone(I: Ideal, w, second=None, seed: Sequence[Polynomial] | None = None
                  ) -> GroebnerCone:
    """Groebner cone of I at w (or at w + eps*second, handled symbolically)."""
    if not I.homogeneous:
        raise ValueError("Groebner cones are only computed for homogeneous ideals")
    n = I.ring.n
    order = WeightedOrder(w, second)
    gb = buchberger(list(seed) if seed is not None else I.generators, order)
    rows = [w, second] if second is not None else w
    heads = [initial_form(g, rows) for g in gb.elements]
    if any(h.is_monomial() for h in heads) or contains_monomial(Ideal(heads)):
        raise MonomialInitialIdeal(
            "initial ideal contains a monomial; weight is off the tropical variety")
    ineqs = []
    eqs = []
    for g, h in zip(gb.elements, heads):
        head_monos = h.monomials()
        first = head_monos[0]
        for m in head_monos[1:]:
            eqs.append(tuple(a - b for a, b in zip(first, m)))
        tail = [m for m in g.monomials() if m not in set(head_monos)]
        for m in tail:
            ineqs.append(tuple(a - b for a, b in zip(first, m)))
    cone = Cone(n, ineqs, eqs)
    witness = cone.relative_interior_point()
    initial = InitialIdeal(tuple(heads), tuple(witness))
    return GroebnerCone(cone, tuple(witness), gb, initial)


# -- cell structures for hypersurfaces and prevarieties -----------------------

_faces_cache: dict = {}


def _achievable_faces(p: Polynomial):
    """Term subsets (size >= 2) that are the max-set of some weight vector.

    Returns (mask, eqs, ineqs) triples; cached on the monomial support.
    """
    monos = tuple(p.monomials())
    cached = _faces_cache.get(monos)
    if cached is not None:
        return cached
    n = len(monos[0])
    k = len(monos)
    out = []
    for mask in range(1, 1 << k):
        idx = [i for i in range(k) if mask >> i & 1]
        if len(idx) < 2:
            continue
        first = monos[idx[0]]
        eqs = tuple(tuple(a - b for a, b in zip(first, monos[j])) for j in idx[1:])
        ineqs = tuple(tuple(a - b for a, b in zip(first, monos[j]))
                      for j in range(k) if not mask >> j & 1)
        cone = Cone(n, ineqs, eqs)
        v = cone.relative_interior_point()
        vals = [sum(a * b for a, b in zip(v, m)) for m in monos]
        top = max(vals)
        if [i for i, x in enumerate(vals) if x == top] == idx:
            out.append((mask, eqs, ineqs))
    _faces_cache[monos] = out
    return out


def _face_at(p_monos, v) -> int:
    vals = [sum(a * b for a, b in zip(v, m)) for m in p_monos]
    top = max(vals)
    return sum(1 << i for i, x in enumerate(vals) if x == top)


@dataclass
class _Cell:
    cone: Cone
    sig: tuple  # achieved face mask per processed polynomial


def _minimized(cone: Cone) -> Cone:
    """Re-derive a short H-representation from the V-representation."""
    small = Cone.from_rays(cone.rays, cone.lineality_rows, cone.n)
    small._with_vrep(cone.rays, cone.lineality_rows, cone.lineality_pivots)
    small._dim = cone._dim
    return small


def refine_cells(polys: Sequence[Polynomial]):
    """All cells of the common refinement of the tropical hypersurfaces.

    A cell is the closure of one locus of constant max-sets with every
    max-set of size >= 2; relative-interior validation keeps exactly the
    achieved signatures, each cell appearing once.
    """
    polys = list(polys)
    n = polys[0].ring.n
    mono_lists = [p.monomials() for p in polys]
    cells = {(): _Cell(Cone(n), ())}
    for pi, p in enumerate(polys):
        faces = _achievable_faces(p)
        nxt = {}
        for cell in cells.values():
            for mask, eqs, ineqs in faces:
                cand = Cone(n, cell.cone.ineqs + ineqs, cell.cone.eqs + eqs)
                key = cand.key_tuple()
                if key in nxt:
                    continue
                v = cand.relative_interior_point()
                if _face_at(mono_lists[pi], v) != mask:
                    continue
                ok = True
                for j in range(pi):
                    if _face_at(mono_lists[j], v) != cell.sig[j]:
                        ok = False
                        break
                if not ok:
                    continue
                nxt[key] = _Cell(_minimized(cand), cell.sig + (mask,))
        cells = nxt
        if not cells:
            break
    return list(cells.values())


def _maximal_cells(cells):
    """Keep cells not dominated through the face-signature order."""
    out = []
    for c in cells:
        dominated = False
        for d in cells:
            if d is c or d.cone.dim < c.cone.dim:
                continue
            if all(sc & sd == sd for sc, sd in zip(c.sig, d.sig)) and c.sig != d.sig:
                dominated = True
                break
        if not dominated:
            out.append(c)
    return out


def tropical_hypersurface(f: Polynomial) -> Fan:
    """Codimension-1 skeleton of the normal fan of Newton(f)."""
    if f.is_zero() or f.is_monomial():
        raise ValueError("tropical hypersurface needs at least two terms")
    cells = refine_cells([f])
    return build_fan([c.cone for c in _maximal_cells(cells)])


@dataclass(frozen=True)
class TropicalPrevariety:
    fan: Fan
    source_polynomials: tuple
    all_cells: tuple = field(repr=False, default=())

    @property
    def maximal_count(self) -> int:
        return len(self.fan.cones)


def prevariety(polys: Sequence[Polynomial]) -> TropicalPrevariety:
    """Common refinement of the hypersurfaces of the given polynomials."""
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise ValueError("no polynomials given")
    if any(p.is_monomial() for p in polys):
        raise ValueError("monomial input has an empty tropical hypersurface")
    canon = sorted({p.terms: p for p in polys}.items())
    ordered = [p for _, p in canon]
    cells = refine_cells(ordered)
    maximal = _maximal_cells(cells)
    fan = build_fan([c.cone for c in maximal])
    return TropicalPrevariety(fan, tuple(ordered), tuple(cells))


# -- membership and witnesses --------------------------------------------------

def initial_monomial_free(gens: Sequence[Polynomial], v) -> bool:
    """Whether in_v of the ideal generated by gens is monomial free."""
    order = WeightedOrder(v)
    gb = buchberger(gens, order)
    inits = [initial_form(g, v) for g in gb.elements]
    if any(h.is_monomial() for h in inits):
        return False
    return not contains_monomial(Ideal(inits))


def _monomial_witness(gens: Sequence[Polynomial], v) -> Polynomial:
    """Some f in the ideal with in_v(f) a monomial; v must be off Trop."""
    ring = gens[0].ring
    order = WeightedOrder(v)
    gb = buchberger(gens, order)
    inits = [initial_form(g, v) for g in gb.elements]
    for h in inits:
        if h.is_monomial():
            g = gb.elements[inits.index(h)]
            return g
    init_gb = GroebnerBasis(tuple(inits), WeightedOrder((0,) * ring.n))
    for power in range(1, _WITNESS_POWER_CAP + 1):
        m = Polynomial(ring, [Term(Fraction(1), (power,) * ring.n)])
        if not normal_form(m, init_gb).is_zero():
            continue
        r = normal_form(m, gb)
        f = m - r
        top = initial_form(f, v)
        if not top.is_monomial():
            raise AssertionError("witness lifting produced a non-monomial head")
        return f
    raise RuntimeError("no monomial witness found below the power cap")


# -- tropical links -------------------------------------------------------------

def _reduce_direction(v, lin_rows, pivots):
    red = Cone._reduce_ray(tuple(v), list(lin_rows), list(pivots))
    return red


def _link_rays(J_gens: Sequence[Polynomial], lin_rows, pivots,
               stop_at_first: bool = False):
    """Directions v (mod the homogeneity space) with in_v monomial free.

    Splits any cell wider than one ray by witness hyperplanes; each split
    excludes the relative interior of one Groebner cone of the initial
    ideal, so every branch terminates.
    """
    dim_l = len(lin_rows)
    found: dict = {}
    if stop_at_first:
        # cheap battery before any refinement: signed unit directions
        n = J_gens[0].ring.n
        for sign in (-1, 1):
            for i in range(n):
                v = tuple(sign if j == i else 0 for j in range(n))
                red = _reduce_direction(v, lin_rows, pivots)
                if not any(red):
                    continue
                if initial_monomial_free(J_gens, red):
                    return {red: red}
    stack = sorted((c.cone for c in refine_cells(J_gens)),
                   key=lambda c: c.key_tuple())
    seen = set()
    while stack:
        cone = stack.pop(0)
        key = cone.key_tuple()
        if key in seen:
            continue
        seen.add(key)
        if cone.dim <= dim_l:
            continue
        if cone.dim == dim_l + 1:
            v = cone.relative_interior_point()
            if initial_monomial_free(J_gens, v):
                d = _reduce_direction(v, lin_rows, pivots)
                found.setdefault(d, v)
                if stop_at_first:
                    return found
            continue
        # wider than a single ray: probe, record hits, split at a miss
        witness_point = None
        rays = cone.rays
        probes = [cone.relative_interior_point()]
        for r in rays:
            probes.append(tuple(a + b for a, b in zip(probes[0], r)))
        for scale in (2, 3, 5, 9, 17):
            for r in rays:
                probes.append(tuple(a + scale * b for a, b in zip(probes[0], r)))
        for v in probes:
            if initial_monomial_free(J_gens, v):
                d = _reduce_direction(v, lin_rows, pivots)
                found.setdefault(d, v)
                if stop_at_first:
                    return found
            else:
                witness_point = v
                break
        if witness_point is None:
            raise RuntimeError("all probes landed on the tropical variety")
        f = _monomial_witness(J_gens, witness_point)
        top = initial_form(f, witness_point).monomials()[0]
        for m in f.monomials():
            if m == top:
                continue
            row = tuple(a - b for a, b in zip(m, top))
            piece = Cone(cone.n, cone.ineqs + (row,), cone.eqs)
            if piece.dim > dim_l:
                stack.append(_minimized(piece))
        stack.sort(key=lambda c: c.key_tuple())
    return found


def tropical_link(I: Ideal, gc: GroebnerCone, facet: Cone,
                  seed: Sequence[Polynomial] | None = None) -> list:
    """Primitive directions (mod span(facet)) of maximal cones at the facet."""
    if facet.n != gc.cone.n or not gc.cone.contains_cone(facet) \
            or facet.dim != gc.cone.dim - 1:
        raise ValueError("facet is not a codimension-1 face of the cone")
    u = facet.relative_interior_point()
    base = list(seed) if seed is not None else list(gc.reduced_gb.elements)
    gb_u = buchberger(base, WeightedOrder(u))
    J = [initial_form(g, u) for g in gb_u.elements]
    rows, pivots = homogeneity_space(J)
    lin_rows, lin_piv = rref_integer_rows(rows, I.ring.n)
    if len(lin_rows) != facet.dim:
        raise AssertionError("homogeneity space does not match the facet span")
    dirs = _link_rays(J, lin_rows, lin_piv)
    return sorted(dirs.keys())


# -- starting cones --------------------------------------------------------------

def starting_cone(I: Ideal, hint=None, seed: Sequence[Polynomial] | None = None
                  ) -> GroebnerCone:
    """A maximal-dimensional Groebner cone on Trop(I).

    With a valid hint, ascend from its cone; otherwise scan the prevariety
    of the input generators for a monomial-free interior point first.
    """
    if not I.homogeneous:
        raise ValueError("the traversal needs a homogeneous ideal")
    if contains_monomial(Ideal(list(I.generators))):
        raise MonomialInitialIdeal("ideal contains a monomial; empty tropical variety")
    target = trop_dimension(I)
    gc = None
    if hint is not None:
        try:
            gc = groebner_cone(I, tuple(hint), seed=seed)
        except MonomialInitialIdeal:
            gc = None
    if gc is None:
        # the zero weight is always on Trop(I): ascend from the homogeneity
        # cone instead of scanning the full prevariety of the generators
        zero = (0,) * I.ring.n
        gc = groebner_cone(I, zero, seed=seed)
    while gc.cone.dim < target:
        u = gc.witness_weight
        J = list(gc.initial_gens.generators)
        rows, pivots = homogeneity_space(J)
        lin_rows, lin_piv = rref_integer_rows(rows, I.ring.n)
        hits = _link_rays(J, lin_rows, lin_piv, stop_at_first=True)
        if not hits:
            raise RuntimeError("no ascent direction found below a maximal cone")
        v = hits[sorted(hits)[0]]
        gc = groebner_cone(I, u, second=tuple(v), seed=gc.reduced_gb.elements)
    return gc


# -- saturation classes -----------------------------------------------------------

def saturated_initial_ideal(I: Ideal, w) -> GroebnerBasis:
    """Canonical reduced basis of in_w(I) : (x_1...x_n)^infty."""
    from .groebner import saturate_variables
    init = initial_ideal_for(I, w)
    sat = saturate_variables(Ideal(list(init)))
    return buchberger(sat.generators, WeightedOrder((0,) * I.ring.n))


def initial_ideal_for(I: Ideal, w) -> tuple:
    order = WeightedOrder(w)
    gb = buchberger(I.generators, order)
    return tuple(initial_form(g, w) for g in gb.elements)


def saturated_initial_equal(I: Ideal, w, v) -> bool:
    """Theorem-style test: equal saturated initial ideals at w and v."""
    a = saturated_initial_ideal(I, tuple(w))
    b = saturated_initial_ideal(I, tuple(v))
    return a.elements == b.elements


# -- refinement verification -------------------------------------------------------

@dataclass
class RefinementReport:
    passed: bool
    uncovered_cones: list            # maximal tropfan cones in no prevariety cone
    facet_violations: list           # (facet key, incident count) != 2
    merges: list                     # (prevariety index, contained tropfan count)
    coarse_cone_count: int

    def merge_counts(self) -> dict:
        out: dict = {}
        for _, count in self.merges:
            out[count] = out.get(count, 0) + 1
        return out


def check_refinement(tropfan: Fan, prev: Fan) -> RefinementReport:
    """Verify the prevariety structure coarsens the Groebner structure.

    (a) every maximal tropfan cone lies inside some maximal prevariety cone;
    (b) every codim-1 tropfan cone meeting a maximal prevariety cone's
    relative interior is in exactly 2 maximal tropfan cones.
    """
    if tropfan.n != prev.n:
        raise ValueError("fans live in different ambient spaces")
    trop_cones = [tropfan.cone_object(i) for i in range(len(tropfan.cones))]
    prev_cones = [prev.cone_object(i) for i in range(len(prev.cones))]
    uncovered = []
    container: dict = {}
    for i, c in enumerate(trop_cones):
        home = None
        for j, d in enumerate(prev_cones):
            if d.contains_cone(c):
                home = j
                break
        if home is None:
            uncovered.append(i)
        else:
            container[i] = home
    facet_violations = []
    seen_facets = set()
    for c in trop_cones:
        for f in facets(c):
            key = f.key_tuple()
            if key in seen_facets:
                continue
            seen_facets.add(key)
            u = f.relative_interior_point()
            in_relint = any(d.relint_contains(u) for d in prev_cones)
            if not in_relint:
                continue
            incident = sum(1 for c2 in trop_cones if c2.contains_point(u))
            if incident != 2:
                facet_violations.append((key, incident))
    merges = []
    for j in range(len(prev_cones)):
        inside = [i for i, home in container.items() if home == j]
        if inside:
            merges.append((j, len(inside)))
    covered = {j for _, j in container.items()}
    return RefinementReport(
        passed=not uncovered and not facet_violations,
        uncovered_cones=uncovered,
        facet_violations=facet_violations,
        merges=merges,
        coarse_cone_count=len(covered),
    )
