"""Exact rational polyhedral cone algebra.

Cones are given by integer inequality rows (a.x >= 0) and equality rows
(e.x = 0); the V-representation (extreme rays modulo lineality, lineality
basis) is computed by the double description method with combinatorial
adjacency, entirely over the integers.  Rays are stored primitive and
reduced to canonical coset representatives modulo the lineality space, so
equal cones serialize to equal keys regardless of how they were built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._linalg import dot, integerize, primitive, rank, rref_integer_rows


def _norm_rows(rows) -> tuple:
    out = []
    for r in rows or ():
        v = integerize(tuple(r))
        if any(v):
            out.append(v)
    return tuple(out)


def _dedupe_rows(rows) -> tuple:
    seen = set()
    out = []
    for r in rows:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return tuple(out)


def _double_description(n: int, eqs, ineqs):
    """Return (lineality basis, extreme rays, processed ineq rows).

    Rays are primitive; the combinatorial adjacency test keeps the ray set
    minimal at every step, starting from the full space.
    """
    lineality = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    rays: list = []
    masks: list = []  # tight-inequality bitmask per ray
    processed: list = []  # inequality rows that have shaped the skeleton

    def split_lineality(a, is_eq):
        nonlocal lineality, rays, masks
        vals = [dot(a, l) for l in lineality]
        idx = next((i for i, v in enumerate(vals) if v), None)
        if idx is None:
            return False
        l0 = lineality[idx]
        v0 = vals[idx]
        if v0 < 0:
            l0 = tuple(-x for x in l0)
            v0 = -v0
        new_lin = []
        for l, v in zip(lineality, vals):
            if l is lineality[idx]:
                continue
            new_lin.append(primitive(tuple(v0 * x - v * y for x, y in zip(l, l0)))
                           if v else l)
        new_rays = []
        for r in rays:
            v = dot(a, r)
            new_rays.append(primitive(tuple(v0 * x - v * y for x, y in zip(r, l0)))
                            if v else r)
        lineality = new_lin
        rays = new_rays
        if not is_eq:
            for i in range(len(masks)):
                masks[i] |= 1 << len(processed)
            rays.append(l0)
            masks.append((1 << len(processed)) - 1)
            processed.append(a)
        return True

    def insert_halfspace(a):
        nonlocal rays, masks
        vals = [dot(a, r) for r in rays]
        bit = 1 << len(processed)
        plus = [i for i, v in enumerate(vals) if v > 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        minus = [i for i, v in enumerate(vals) if v < 0]
        if not minus:
            for i in zero:
                masks[i] |= bit
            processed.append(a)
            return
        new_rays = [rays[i] for i in plus] + [rays[i] for i in zero]
        new_masks = [masks[i] for i in plus] + [masks[i] | bit for i in zero]
        for i in plus:
            for j in minus:
                common = masks[i] & masks[j]
                adjacent = True
                for k in range(len(rays)):
                    if k != i and k != j and common & ~masks[k] == 0:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                r = primitive(tuple(vals[i] * rays[j][t] - vals[j] * rays[i][t]
                                    for t in range(n)))
                new_rays.append(r)
                new_masks.append(common | bit)
        rays = new_rays
        masks = new_masks
        processed.append(a)

    for e in eqs:
        if not split_lineality(e, True):
            insert_halfspace(e)
            insert_halfspace(tuple(-x for x in e))
    for a in ineqs:
        if not split_lineality(a, False):
            insert_halfspace(a)
    return lineality, rays, processed


class Cone:
    """A closed rational polyhedral cone with cached dual representations."""

    __slots__ = ("n", "ineqs", "eqs", "_rays", "_lin_rows", "_lin_pivots", "_dim")

    def __init__(self, n: int, ineqs=(), eqs=()):
        self.n = n
        self.ineqs = _dedupe_rows(_norm_rows(ineqs))
        self.eqs = _dedupe_rows(_norm_rows(eqs))
        for r in self.ineqs + self.eqs:
            if len(r) != n:
                raise ValueError("constraint length does not match ambient dimension")
        self._rays = None
        self._lin_rows = None
        self._lin_pivots = None
        self._dim = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_inequalities(cls, ineqs, eqs=(), n=None) -> "Cone":
        rows = list(ineqs) + list(eqs)
        if n is None:
            if not rows:
                raise ValueError("ambient dimension required without constraints")
            n = len(rows[0])
        return cls(n, ineqs, eqs)

    @classmethod
    def from_rays(cls, rays, lineality=(), n=None) -> "Cone":
        """Cone generated by rays and a lineality space, via dual description."""
        rays = _norm_rows(rays)
        lineality = _norm_rows(lineality)
        if n is None:
            if not rays and not lineality:
                raise ValueError("ambient dimension required for the origin")
            n = len((rays + lineality)[0])
        # the polar of the generated cone has H-rep {a : a.r >= 0, a.l = 0}
        lin, polar_rays, _ = _double_description(n, lineality, rays)
        ineqs = tuple(polar_rays)
        eqs = tuple(lin)
        cone = cls(n, ineqs, eqs)
        return cone

    def _with_vrep(self, rays, lin_rows, lin_pivots):
        self._rays = tuple(rays)
        self._lin_rows = tuple(lin_rows)
        self._lin_pivots = tuple(lin_pivots)
        return self

    # -- V-representation ---------------------------------------------------

    def _compute(self):
        if self._rays is not None:
            return
        lin, rays, _ = _double_description(self.n, self.eqs, self.ineqs)
        lin_rows, pivots = rref_integer_rows(lin, self.n) if lin else ([], [])
        reduced = sorted({self._reduce_ray(r, lin_rows, pivots) for r in rays})
        self._rays = tuple(reduced)
        self._lin_rows = tuple(lin_rows)
        self._lin_pivots = tuple(pivots)

    @staticmethod
    def _reduce_ray(r, lin_rows, pivots):
        """Zero out the pivot coordinates of r against integer RREF rows."""
        if not lin_rows:
            return primitive(r)
        v = list(r)
        for row, p in zip(lin_rows, pivots):
            if v[p]:
                a, b = row[p], v[p]
                v = [a * x - b * y for x, y in zip(v, row)]
        return primitive(v)

    @property
    def rays(self) -> tuple:
        self._compute()
        return self._rays

    @property
    def lineality_rows(self) -> tuple:
        self._compute()
        return self._lin_rows

    @property
    def lineality_pivots(self) -> tuple:
        self._compute()
        return self._lin_pivots

    @property
    def dim(self) -> int:
        if self._dim is None:
            self._compute()
            ray_rank = rank(self._rays, self.n) if self._rays else 0
            self._dim = len(self._lin_rows) + ray_rank
        return self._dim

    @property
    def lineality_dim(self) -> int:
        return len(self.lineality_rows)

    def relative_interior_point(self) -> tuple:
        """Sum of the extreme rays; the origin for a pure linear space."""
        self._compute()
        if not self._rays:
            return (0,) * self.n
        return tuple(sum(col) for col in zip(*self._rays))

    # -- canonical form -------------------------------------------------------

    def key_tuple(self) -> tuple:
        self._compute()
        return (self.n, self._lin_rows, self._rays)

    def canonical_key(self) -> bytes:
        """Representation-independent serialization; equal cones, equal keys."""
        return repr(self.key_tuple()).encode("ascii")

    # -- membership -----------------------------------------------------------

    def contains_point(self, p) -> bool:
        return (all(dot(e, p) == 0 for e in self.eqs)
                and all(dot(a, p) >= 0 for a in self.ineqs))

    def relint_contains(self, p) -> bool:
        """Exact relative-interior membership test."""
        if not self.contains_point(p):
            return False
        tight = [a for a in self.ineqs if dot(a, p) == 0]
        return rank(list(self.eqs) + tight, self.n) == self.n - self.dim

    def contains_cone(self, other: "Cone") -> bool:
        gens = list(other.rays)
        for l in other.lineality_rows:
            gens.append(l)
            gens.append(tuple(-x for x in l))
        return all(self.contains_point(g) for g in gens)

    def __eq__(self, other):
        return isinstance(other, Cone) and self.key_tuple() == other.key_tuple()

    def __hash__(self):
        return hash(self.key_tuple())

    def __repr__(self):
        return (f"Cone(n={self.n}, dim={self.dim}, "
                f"rays={len(self.rays)}, lineality={self.lineality_dim})")


# -- derived operations ----------------------------------------------------

def intersect(a: Cone, b: Cone) -> Cone:
    if a.n != b.n:
        raise ValueError("ambient dimensions differ")
    return Cone(a.n, a.ineqs + b.ineqs, a.eqs + b.eqs)


def facets(c: Cone) -> list:
    """All codimension-1 faces, deterministically ordered by canonical key."""
    if c.dim <= c.lineality_dim:
        return []
    out = {}
    for a in c.ineqs:
        face = Cone(c.n, c.ineqs, c.eqs + (a,))
        if face.dim == c.dim - 1:
            out.setdefault(face.key_tuple(), face)
    return [out[k] for k in sorted(out)]


@dataclass(frozen=True)
class Fan:
    """A collection of cones sharing one lineality space and one ray set."""

    n: int
    lineality: tuple                  # canonical integer RREF rows
    rays: tuple                       # reduced primitive rays, sorted
    cones: tuple                      # (sorted ray-index tuple, dim) per cone
    maximal_cones: tuple = field(repr=False, default=())  # Cone objects

    @property
    def lineality_dim(self) -> int:
        return len(self.lineality)

    def f_vector(self) -> tuple:
        """Counts by dimension above lineality; index 0 counts the rays."""
        if not self.rays and not self.cones:
            return ()
        top = max((d for _, d in self.cones), default=self.lineality_dim + 1)
        counts = [0] * (top - self.lineality_dim)
        if counts:
            counts[0] = len(self.rays)
        for _, d in self.cones:
            rel = d - self.lineality_dim
            if rel >= 2:
                counts[rel - 1] += 1
        return tuple(counts)

    def cone_object(self, index: int) -> Cone:
        if self.maximal_cones:
            return self.maximal_cones[index]
        idxs, _ = self.cones[index]
        return Cone.from_rays([self.rays[i] for i in idxs], self.lineality, self.n)


def build_fan(cones: Sequence[Cone], n: int | None = None) -> Fan:
    """Assemble a fan out of cones sharing a common lineality space."""
    cones = list(cones)
    if not cones:
        if n is None:
            raise ValueError("ambient dimension required for an empty fan")
        return Fan(n, (), (), (), ())
    n = cones[0].n
    lin = cones[0].lineality_rows
    for c in cones:
        if c.lineality_rows != lin:
            raise ValueError("cones do not share a lineality space")
    ray_set = sorted({r for c in cones for r in c.rays})
    index = {r: i for i, r in enumerate(ray_set)}
    entries = []
    for c in cones:
        entries.append((tuple(sorted(index[r] for r in c.rays)), c.dim))
    order = sorted(range(len(cones)), key=lambda i: entries[i])
    return Fan(n, lin, tuple(ray_set),
               tuple(entries[i] for i in order),
               tuple(cones[i] for i in order))


def common_refinement(fans: Sequence[Fan]) -> Fan:
    """Intersect all tuples of maximal cones, dropping dominated pieces."""
    fans = list(fans)
    if not fans:
        raise ValueError("no fans given")
    current = [fans[0].cone_object(i) for i in range(len(fans[0].cones))]
    for f in fans[1:]:
        nxt = {}
        others = [f.cone_object(i) for i in range(len(f.cones))]
        for a in current:
            for b in others:
                c = intersect(a, b)
                nxt.setdefault(c.key_tuple(), c)
        current = list(nxt.values())
    # discard cones contained in another kept cone
    current.sort(key=lambda c: -c.dim)
    kept: list = []
    for c in current:
        if any(k.contains_cone(c) for k in kept):
            continue
        kept.append(c)
    return build_fan(kept)
