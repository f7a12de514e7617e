"""Colored Petri-net engine and the parallel tropical-variety traversal.

The net separates coordination from computation: the coordinator owns the
marking and the two deduplicating stores and fires the cheap store/get
transitions inline, while the expensive transitions (starting cone, facets,
neighbors) run as pure jobs, concurrently when a worker pool is attached.
Stores are keyed by symmetry-canonical cone keys, so the traversal explores
one representative per orbit.
"""

from __future__ import annotations

import os
import pickle
import sys
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .cones import Cone, Fan, build_fan, facets
from .groebner import buchberger, homogeneity_space
from .polyring import Ideal, Polynomial, WeightedOrder, act, initial_form
from ._linalg import rref_integer_rows
from .symmetry import (SignedPermutationGroup, act_on_weight,
                       canonical_orbit_representative, permute_cone)
from .tropical import (GroebnerCone, _link_rays, groebner_cone, starting_cone,
                       trop_dimension)


# -- generic Petri net -------------------------------------------------------

@dataclass(frozen=True)
class Place:
    name: str
    color: type | None = None
    capacity: int | None = None
    serialized: bool = False  # contention resolved by the coordinator


@dataclass(frozen=True)
class Transition:
    name: str
    inputs: tuple
    outputs: tuple
    guard: Callable | None = None      # tokens dict -> bool
    action: Callable | None = None     # tokens dict -> {place: [tokens]}
    reads: tuple = ()
    heavy: bool = False


class PetriNet:
    """Finite bipartite net: places, transitions, and their flow relation."""

    def __init__(self, places: Iterable[Place], transitions: Iterable[Transition]):
        self.places = {p.name: p for p in places}
        self.transitions = list(transitions)
        self.validate()

    def flow(self) -> set:
        edges = set()
        for t in self.transitions:
            for p in t.inputs:
                edges.add((p, t.name))
            for p in t.outputs:
                edges.add((t.name, p))
        return edges

    def validate(self):
        names = set(self.places)
        if names & {t.name for t in self.transitions}:
            raise ValueError("place and transition names must be disjoint")
        for t in self.transitions:
            for p in t.inputs + t.outputs + t.reads:
                if p not in names:
                    raise ValueError(f"unknown place {p!r} in transition {t.name!r}")
        # locality: a place consumed by several transitions needs guards that
        # a scheduler can resolve, unless it is coordinator-serialized
        consumers: dict = {}
        for t in self.transitions:
            for p in t.inputs:
                consumers.setdefault(p, []).append(t)
        for p, ts in consumers.items():
            if len(ts) < 2 or self.places[p].serialized:
                continue
            unguarded = [t for t in ts if t.guard is None]
            if len(unguarded) > 1:
                raise ValueError(
                    f"place {p!r} feeds {len(unguarded)} unguarded transitions")

    def transition(self, name: str) -> Transition:
        for t in self.transitions:
            if t.name == name:
                return t
        raise KeyError(name)


class Marking:
    """Token lists per place; counts satisfy M(p) >= 0."""

    def __init__(self, tokens: dict | None = None):
        self.tokens = {k: list(v) for k, v in (tokens or {}).items()}

    def counts(self) -> dict:
        return {k: len(v) for k, v in self.tokens.items() if v}

    def put(self, place: str, token):
        self.tokens.setdefault(place, []).append(token)

    def take(self, place: str, index: int = 0):
        return self.tokens[place].pop(index)

    def peek(self, place: str):
        lst = self.tokens.get(place, [])
        return lst[0] if lst else None

    def __getitem__(self, place: str):
        return list(self.tokens.get(place, []))

    def copy(self) -> "Marking":
        return Marking(self.tokens)


def enabled(net: PetriNet, marking: Marking) -> list:
    """All (transition, binding) pairs that may fire under the marking.

    A binding maps each input place to the index of the token consumed;
    guards see the bound tokens, read places only need to be nonempty.
    """
    out = []
    for t in net.transitions:
        if any(not marking[p] for p in t.reads):
            continue
        if any(not marking[p] for p in t.inputs):
            continue
        combos = [{}]
        for p in t.inputs:
            tokens = marking[p]
            combos = [dict(c, **{p: i}) for c in combos for i in range(len(tokens))]
        for binding in combos:
            bound = {p: marking[p][i] for p, i in binding.items()}
            for p in t.reads:
                bound[p] = marking.peek(p)
            if t.guard is None or t.guard(bound):
                out.append((t, binding))
    return out


def fire(net: PetriNet, marking: Marking, transition: Transition,
         binding: dict | None = None) -> Marking:
    """One firing step: consume one token per input arc, deposit outputs.

    Firing a transition that is not enabled under the binding is a contract
    violation and raises.
    """
    if binding is None:
        candidates = [b for t, b in enabled(net, marking) if t is transition
                      or t.name == transition.name]
        if not candidates:
            raise RuntimeError(f"transition {transition.name!r} is not enabled")
        binding = candidates[0]
    marking = marking.copy()
    bound = {}
    for p, i in binding.items():
        if i >= len(marking.tokens.get(p, [])):
            raise RuntimeError(f"transition {transition.name!r} is not enabled")
        bound[p] = marking.tokens[p][i]
    for p, i in sorted(binding.items(), key=lambda kv: -kv[1]):
        marking.take(p, i)
    for p in transition.reads:
        bound[p] = marking.peek(p)
    if transition.action is not None:
        produced = transition.action(bound)
        for p, tokens in produced.items():
            for tok in tokens:
                marking.put(p, tok)
    else:
        for p in transition.outputs:
            marking.put(p, bound[transition.inputs[0]] if len(transition.inputs) == 1
                        else tuple(bound[q] for q in transition.inputs))
    return marking


# -- stores -------------------------------------------------------------------

@dataclass
class StoreRecord:
    key: tuple
    cone: Cone
    payload: dict
    orbit_size: int
    status: str = "unprocessed"


class DedupStore:
    """Canonical-orbit-keyed store; status moves unprocessed -> processed."""

    def __init__(self, name: str):
        self.name = name
        self.records: dict = {}

    def insert(self, key, cone, payload, orbit_size) -> bool:
        if key in self.records:
            return False
        self.records[key] = StoreRecord(key, cone, payload, orbit_size)
        return True

    def has_unprocessed(self) -> bool:
        return any(r.status == "unprocessed" for r in self.records.values())

    def pop_unprocessed(self) -> StoreRecord:
        key = min(k for k, r in self.records.items() if r.status == "unprocessed")
        rec = self.records[key]
        rec.status = "processed"
        return rec

    def audit(self):
        bad = [k for k, r in self.records.items() if r.status != "processed"]
        if bad:
            raise RuntimeError(f"{self.name}: {len(bad)} records left unprocessed")

    def __len__(self):
        return len(self.records)


# -- traversal problem and jobs -------------------------------------------------

@dataclass
class TraversalProblem:
    ideal: Ideal
    hint: tuple | None = None
    target_dim: int | None = None
    assume_prime: bool = False


_WORKER_PROBLEM: TraversalProblem | None = None


def _init_worker(blob: bytes):
    global _WORKER_PROBLEM
    _WORKER_PROBLEM = pickle.loads(blob)


def _job_starting(payload):
    problem = _WORKER_PROBLEM if payload is None else payload
    t0 = time.perf_counter()
    gc = starting_cone(problem.ideal, hint=problem.hint)
    return gc, time.perf_counter() - t0


@dataclass(frozen=True)
class FacetToken:
    facet: Cone
    seed: tuple  # generating set carried to the link computation


def _job_facets(args):
    cone, seed = args
    t0 = time.perf_counter()
    out = [FacetToken(f, tuple(seed)) for f in facets(cone)]
    return out, time.perf_counter() - t0


def _job_neighbors(args):
    facet, seed, problem = args
    return _neighbors_impl(problem or _WORKER_PROBLEM, facet, seed)


def _neighbors_impl(problem: TraversalProblem, facet: Cone, seed):
    t0 = time.perf_counter()
    I = problem.ideal
    u = facet.relative_interior_point()
    gb_u = buchberger(list(seed), WeightedOrder(u))
    J = [initial_form(g, u) for g in gb_u.elements]
    rows, _ = homogeneity_space(J)
    lin_rows, lin_piv = rref_integer_rows(rows, I.ring.n)
    dirs = _link_rays(J, lin_rows, lin_piv)
    cones = []
    for d in sorted(dirs):
        gc = groebner_cone(I, u, second=d, seed=gb_u.elements)
        cones.append(gc)
    return cones, len(dirs), time.perf_counter() - t0


# -- the traversal net ------------------------------------------------------------

@dataclass
class TraversalNet:
    net: PetriNet
    marking: Marking
    cone_store: DedupStore
    facet_store: DedupStore
    problem: TraversalProblem
    group: SignedPermutationGroup


def build_traversal_net(I: Ideal, group: SignedPermutationGroup | None = None,
                        hint=None, assume_prime: bool = False) -> TraversalNet:
    """The traversal net: starting cone feeds m, cones flow through the two
    stores, facets feed the link computation, neighbors flow back into m.

    The boolean flag places e1/e2 start with a false token (no unprocessed
    work yet); the figure's read-only input place I holds the problem.
    """
    if not I.homogeneous:
        raise ValueError("the traversal needs a homogeneous ideal")
    group = group or SignedPermutationGroup.trivial(I.ring.n)
    if group.n != I.ring.n:
        raise ValueError("group does not act on the ring's weight space")
    problem = TraversalProblem(I, tuple(hint) if hint is not None else None,
                               None, assume_prime)
    cone_store = DedupStore("cones")
    facet_store = DedupStore("facets")
    places = [
        Place("I"), Place("ctrl"), Place("m"), Place("f"),
        Place("e1", color=bool, serialized=True),
        Place("e2", color=bool, serialized=True),
        Place("c2f"), Place("u2n"),
    ]
    transitions = [
        Transition("starting cone", inputs=("ctrl",), outputs=("m",),
                   reads=("I",), heavy=True),
        Transition("store cone", inputs=("m", "e1"), outputs=("e1",)),
        Transition("get cone", inputs=("e1",), outputs=("e1", "c2f"),
                   guard=lambda tok: tok["e1"] is True),
        Transition("facets", inputs=("c2f",), outputs=("f",),
                   reads=("I",), heavy=True),
        Transition("store facet", inputs=("f", "e2"), outputs=("e2",)),
        Transition("get facet", inputs=("e2",), outputs=("e2", "u2n"),
                   guard=lambda tok: tok["e2"] is True),
        Transition("neighbors", inputs=("u2n",), outputs=("m",),
                   reads=("I",), heavy=True),
    ]
    net = PetriNet(places, transitions)
    marking = Marking({"ctrl": [None], "I": [problem], "e1": [False], "e2": [False]})
    return TraversalNet(net, marking, cone_store, facet_store, problem, group)


@dataclass
class TraversalResult:
    fan: Fan
    cone_records: list
    group_order: int
    ray_orbit_count: int
    cone_orbit_count: int
    timings: dict
    warnings: list = field(default_factory=list)

    def orbit_report(self) -> str:
        return (f"rays: {len(self.fan.rays)} ({self.ray_orbit_count} orbit"
                f"{'s' if self.ray_orbit_count != 1 else ''}), maximal cones: "
                f"{len(self.fan.cones)} ({self.cone_orbit_count} orbit"
                f"{'s' if self.cone_orbit_count != 1 else ''})")


class BoundaryFacetError(RuntimeError):
    pass


def _expand_orbits(records, group):
    cones = {}
    for rec in records:
        for img in expand_cone_orbit(rec.cone, group):
            cones.setdefault(img.key_tuple(), img)
    return list(cones.values())


def _ray_orbit_count(fan: Fan, group: SignedPermutationGroup) -> int:
    rays = set(fan.rays)
    lin_rows = list(fan.lineality)
    pivots = rref_integer_rows(lin_rows, fan.n)[1] if lin_rows else []
    remaining = set(rays)
    orbits = 0
    while remaining:
        seed = remaining.pop()
        orbits += 1
        frontier = [seed]
        while frontier:
            r = frontier.pop()
            for g in group.generators:
                img = Cone._reduce_ray(act_on_weight(g, r), lin_rows, list(pivots))
                if img in remaining:
                    remaining.remove(img)
                    frontier.append(img)
    return orbits


def run(tnet: TraversalNet, workers: int = 1, log=None) -> TraversalResult:
    """Execute the net until no transition is enabled and nothing is in flight.

    Heavy transitions run in a process pool when workers > 1; store/get
    actions touch the stores inside the coordinator, which serializes the
    e1/e2 flag protocol.  The resulting fan does not depend on scheduling.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    net, marking = tnet.net, tnet.marking
    cone_store, facet_store = tnet.cone_store, tnet.facet_store
    problem, group = tnet.problem, tnet.group
    if problem.target_dim is None:
        problem.target_dim = trop_dimension(problem.ideal)
    timings: dict = {}
    warnings: list = []

    def note(cls, dt):
        count, total = timings.get(cls, (0, 0.0))
        timings[cls] = (count + 1, total + dt)

    def say(msg):
        if log:
            print(msg, file=log, flush=True)

    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                   initargs=(pickle.dumps(problem),))
    inflight = {}

    def submit(name, fn, args):
        if pool is None:
            _dispatch(name, fn(args))
        else:
            fut = pool.submit(fn, args)
            inflight[fut] = name

    def _dispatch(name, result):
        if name == "starting cone":
            gc, dt = result
            note(name, dt)
            marking.put("m", gc)
            say(f"starting cone: dim {gc.cone.dim}")
        elif name == "facets":
            fs, dt = result
            note(name, dt)
            for f in fs:
                marking.put("f", f)
        elif name == "neighbors":
            cones, n_links, dt = result
            note(name, dt)
            if n_links < 2:
                msg = "facet has fewer than 2 incident maximal cones (support boundary)"
                if problem.assume_prime:
                    raise BoundaryFacetError(msg)
                warnings.append(msg)
            for gc in cones:
                marking.put("m", gc)

    def fire_light(t):
        t0 = time.perf_counter()
        if t.name == "store cone":
            gc = marking.take("m")
            marking.take("e1")
            rep = canonical_orbit_representative(gc.cone, group)
            key = rep.cone.key_tuple()
            if key not in cone_store.records:
                sigma = rep.to_representative
                payload = {
                    "gb": tuple(act(sigma, g) for g in gc.reduced_gb.elements),
                    "initial": tuple(act(sigma, h) for h in gc.initial_gens.generators),
                    "witness": act_on_weight(sigma, gc.witness_weight),
                }
                cone_store.insert(key, rep.cone, payload, rep.orbit_size)
                say(f"store cone: {len(cone_store)} orbits "
                    f"(+{rep.orbit_size} cones)")
            marking.put("e1", cone_store.has_unprocessed())
        elif t.name == "get cone":
            marking.take("e1")
            rec = cone_store.pop_unprocessed()
            marking.put("e1", cone_store.has_unprocessed())
            marking.put("c2f", rec)
        elif t.name == "store facet":
            facet = marking.take("f")
            marking.take("e2")
            rep = canonical_orbit_representative(facet.facet, group)
            key = rep.cone.key_tuple()
            if key not in facet_store.records:
                sigma = rep.to_representative
                payload = {"seed": tuple(act(sigma, g) for g in facet.seed)}
                facet_store.insert(key, rep.cone, payload, rep.orbit_size)
            marking.put("e2", facet_store.has_unprocessed())
        elif t.name == "get facet":
            marking.take("e2")
            rec = facet_store.pop_unprocessed()
            marking.put("e2", facet_store.has_unprocessed())
            marking.put("u2n", rec)
        note(t.name, time.perf_counter() - t0)

    while True:
        progressed = True
        while progressed:
            progressed = False
            for t in net.transitions:
                pairs = [b for tt, b in enabled(net, marking) if tt.name == t.name]
                if not pairs:
                    continue
                if t.name == "starting cone":
                    marking.take("ctrl")
                    submit(t.name, _job_starting,
                           problem if pool is None else None)
                elif t.name == "facets":
                    rec = marking.take("c2f")
                    submit(t.name, _job_facets, (rec.cone, rec.payload["gb"]))
                elif t.name == "neighbors":
                    rec = marking.take("u2n")
                    submit(t.name, _job_neighbors,
                           (rec.cone, rec.payload["seed"],
                            problem if pool is None else None))
                else:
                    fire_light(t)
                progressed = True
                break
        if inflight:
            done, _ = wait(list(inflight), return_when=FIRST_COMPLETED)
            for fut in done:
                name = inflight.pop(fut)
                _dispatch(name, fut.result())
            continue
        break
    if pool is not None:
        pool.shutdown()
    if marking["m"] or marking["f"] or marking["c2f"] or marking["u2n"]:
        raise RuntimeError("terminated with tokens left on data places")
    if marking.peek("e1") is not False or marking.peek("e2") is not False:
        raise RuntimeError("terminated with a true flag token")
    cone_store.audit()
    facet_store.audit()
    records = [cone_store.records[k] for k in sorted(cone_store.records)]
    all_cones = _expand_orbits(records, group)
    fan = build_fan(all_cones)
    total = sum(r.orbit_size for r in records)
    if total != len(fan.cones):
        raise RuntimeError("orbit sizes do not add up to the expanded fan")
    return TraversalResult(
        fan=fan,
        cone_records=records,
        group_order=len(group),
        ray_orbit_count=_ray_orbit_count(fan, group),
        cone_orbit_count=len(records),
        timings=timings,
        warnings=warnings,
    )


