"""Finite signed-permutation groups and their actions.

A signed permutation sends x_i to signs[i] * x_{perm[i]}; it acts on weight
vectors by the unsigned permutation alone.  Groups are stored as full
element lists (desk scale keeps them below |S_8|), which makes canonical
orbit representatives a simple minimum over all images.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .cones import Cone
from ._linalg import rref_integer_rows

_GROUP_SIZE_LIMIT = 500_000


@dataclass(frozen=True)
class SignedPermutation:
    perm: tuple
    signs: tuple

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise ValueError("perm is not a bijection on 0..n-1")
        if len(self.signs) != n or any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be a vector over {+1,-1}")

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(tuple(range(n)), (1,) * n)

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]],
                    signs: Sequence[int] | None = None) -> "SignedPermutation":
        perm = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + type(cyc)([cyc[0]])):
                perm[a] = b
        return cls(tuple(perm), tuple(signs) if signs is not None else (1,) * n)

    def compose(self, other: "SignedPermutation") -> "SignedPermutation":
        """self after other: (self*other) . f = self . (other . f)."""
        perm = tuple(self.perm[other.perm[i]] for i in range(self.n))
        signs = tuple(other.signs[i] * self.signs[other.perm[i]] for i in range(self.n))
        return SignedPermutation(perm, signs)

    def inverse(self) -> "SignedPermutation":
        inv = [0] * self.n
        signs = [1] * self.n
        for i, p in enumerate(self.perm):
            inv[p] = i
            signs[p] = self.signs[i]
        return SignedPermutation(tuple(inv), tuple(signs))

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.n)) and all(s == 1 for s in self.signs)

    def sort_key(self):
        return (self.perm, self.signs)


def act_on_weight(sigma: SignedPermutation, w) -> tuple:
    """Unsigned permutation action on weight space: (sigma.w)_{perm[i]} = w_i."""
    if len(w) != sigma.n:
        raise ValueError("weight length does not match permutation")
    out = [0] * sigma.n
    for i, x in enumerate(w):
        out[sigma.perm[i]] = x
    return tuple(out)


def act_on_signs(sigma: SignedPermutation, r) -> tuple:
    """Action on sign vectors, matching the action on points of K^n."""
    out = [0] * sigma.n
    for i, x in enumerate(r):
        out[sigma.perm[i]] = sigma.signs[i] * x
    return tuple(out)


def induced_plucker_action(tau: Sequence[int], k: int) -> SignedPermutation:
    """Index permutation tau of [n] acting on C(n,k) coordinates with signs.

    p_L maps to sign(sort) * p_{tau(L)}, the sign being the parity of the
    permutation sorting tau(L) into ascending order.
    """
    n = len(tau)
    combos = list(itertools.combinations(range(n), k))
    index = {c: i for i, c in enumerate(combos)}
    perm = [0] * len(combos)
    signs = [1] * len(combos)
    for i, c in enumerate(combos):
        image = [tau[x] for x in c]
        swaps = 0
        arr = list(image)
        for a in range(len(arr)):
            for b in range(len(arr) - 1 - a):
                if arr[b] > arr[b + 1]:
                    arr[b], arr[b + 1] = arr[b + 1], arr[b]
                    swaps += 1
        perm[i] = index[tuple(arr)]
        signs[i] = -1 if swaps % 2 else 1
    return SignedPermutation(tuple(perm), tuple(signs))


class SignedPermutationGroup:
    """Closure of a generator list, cached as a sorted element list."""

    def __init__(self, generators: Iterable[SignedPermutation], n: int | None = None):
        gens = list(generators)
        if not gens:
            if n is None:
                raise ValueError("ambient size required for the trivial group")
            gens = [SignedPermutation.identity(n)]
        self.n = gens[0].n
        if any(g.n != self.n for g in gens):
            raise ValueError("generators act on different sizes")
        self.generators = tuple(g for g in gens if not g.is_identity()) or \
            (SignedPermutation.identity(self.n),)
        self.elements = self._enumerate(gens)

    @classmethod
    def trivial(cls, n: int) -> "SignedPermutationGroup":
        return cls([], n=n)

    @classmethod
    def symmetric_plucker(cls, n: int, k: int) -> "SignedPermutationGroup":
        """Full S_n acting on Pluecker coordinates of C(n,k)."""
        swap = list(range(n))
        swap[0], swap[1] = 1, 0
        cycle = [(i + 1) % n for i in range(n)]
        gens = [induced_plucker_action(tuple(swap), k)]
        if n > 2:
            gens.append(induced_plucker_action(tuple(cycle), k))
        return cls(gens)

    def _enumerate(self, gens):
        identity = SignedPermutation.identity(self.n)
        seen = {identity.sort_key(): identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for e in frontier:
                for g in gens:
                    h = g.compose(e)
                    k = h.sort_key()
                    if k not in seen:
                        seen[k] = h
                        nxt.append(h)
            if len(seen) > _GROUP_SIZE_LIMIT:
                raise ValueError("group too large for full enumeration")
            frontier = nxt
        return tuple(seen[k] for k in sorted(seen))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def is_trivial(self) -> bool:
        return len(self.elements) == 1


# -- orbit machinery ---------------------------------------------------------

def permute_vector(sigma: SignedPermutation, v) -> tuple:
    return act_on_weight(sigma, v)


def permute_cone(sigma: SignedPermutation, c: Cone) -> Cone:
    """Image of a cone under the unsigned coordinate permutation."""
    ineqs = [act_on_weight(sigma, a) for a in c.ineqs]
    eqs = [act_on_weight(sigma, e) for e in c.eqs]
    out = Cone(c.n, ineqs, eqs)
    if c._rays is not None:
        lin = [act_on_weight(sigma, l) for l in c._lin_rows]
        lin_rows, pivots = rref_integer_rows(lin, c.n) if lin else ([], [])
        rays = sorted({Cone._reduce_ray(act_on_weight(sigma, r), lin_rows, pivots)
                       for r in c._rays})
        out._with_vrep(rays, lin_rows, pivots)
        out._dim = c._dim
    return out


class OrbitRepresentative(NamedTuple):
    cone: Cone
    orbit_size: int
    stabilizer_size: int
    to_representative: SignedPermutation  # maps the input cone onto the rep


def _lineality_invariant(c: Cone, group: SignedPermutationGroup) -> bool:
    lin = list(c.lineality_rows)
    piv = list(c.lineality_pivots)
    for g in group.generators:
        for row in lin:
            if any(Cone._reduce_ray(act_on_weight(g, row), lin, piv)):
                return False
    return True


def canonical_orbit_representative(c: Cone, group: SignedPermutationGroup
                                   ) -> OrbitRepresentative:
    """Orbit element of lexicographically minimal canonical key.

    When the lineality space is group invariant (the usual case: it is the
    homogeneity space of an invariant ideal), images reduce against the one
    cached echelon basis, entirely over the integers.
    """
    if group.is_trivial():
        ident = group.elements[0]
        return OrbitRepresentative(c, 1, 1, ident)
    fast = _lineality_invariant(c, group)
    lin = list(c.lineality_rows)
    piv = list(c.lineality_pivots)
    best = None
    best_sigma = None
    keys = set()
    for sigma in group.elements:
        if fast:
            img_rays = tuple(sorted(
                Cone._reduce_ray(act_on_weight(sigma, r), lin, piv)
                for r in c.rays))
            k = (c.n, tuple(lin), img_rays)
        else:
            k = permute_cone(sigma, c).key_tuple()
        keys.add(k)
        if best is None or k < best:
            best = k
            best_sigma = sigma
    orbit = len(keys)
    rep = permute_cone(best_sigma, c)
    return OrbitRepresentative(rep, orbit, len(group) // orbit, best_sigma)


def expand_cone_orbit(c: Cone, group: SignedPermutationGroup) -> list:
    """All distinct images of a cone, dimension and V-rep carried over."""
    if group.is_trivial():
        return [c]
    fast = _lineality_invariant(c, group)
    out = {}
    for sigma in group.elements:
        if fast:
            lin = list(c.lineality_rows)
            piv = list(c.lineality_pivots)
            rays = sorted(Cone._reduce_ray(act_on_weight(sigma, r), lin, piv)
                          for r in c.rays)
            key = (c.n, tuple(lin), tuple(rays))
            if key in out:
                continue
            img = Cone(c.n, [act_on_weight(sigma, a) for a in c.ineqs],
                       [act_on_weight(sigma, e) for e in c.eqs])
            img._with_vrep(rays, lin, piv)
            img._dim = c._dim
            out[key] = img
        else:
            img = permute_cone(sigma, c)
            out.setdefault(img.key_tuple(), img)
    return list(out.values())


def vector_orbit_size(v, group: SignedPermutationGroup) -> int:
    return len({act_on_weight(s, tuple(v)) for s in group.elements})


def orbit_sum(representatives: Sequence) -> dict:
    """Aggregate (dim -> total count) from (dim, orbit_size) pairs."""
    totals: dict = {}
    for dim, size in representatives:
        totals[dim] = totals.get(dim, 0) + size
    return totals
