"""Galois couplings: construction, validation, cost, composition and pullback matchings."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import field as F
from .bottleneck import MatchingWitness, assignment_cost, transported_complex, verify_witness
from .module import (
    ModuleError,
    PModule,
    PMorphism,
    direct_sum,
    find_isomorphism,
    interval_module,
    left_kan,
    pullback,
)
from .poset import (
    INF,
    Distance,
    GaloisPair,
    GenInterval,
    MonotoneMap,
    Poset,
    PosetError,
    _closure,
    coordinates,
    fmt_distance,
    from_relation,
    gen_intervals,
    is_connected,
    is_convex,
    make_interval,
    pullback_poset,
    translation_quotient,
)
from .resolution import ProjComplex, minimal_resolution, realize

MODES = ("intervals", "kan", "pullN")


class CouplingError(ValueError):
    pass


@dataclass
class GaloisCoupling:
    apex: Poset
    left: GaloisPair  # f ⊣ g, f: apex -> P
    right: GaloisPair  # h ⊣ i
    gamma: PModule
    M: PModule
    N: PModule
    iso_M: PMorphism  # g*Γ -> M
    iso_N: PMorphism  # i*Γ -> N
    construction: str = "given"

    @property
    def base(self) -> Poset:
        return self.left.f.target

    @property
    def cost(self) -> Distance:
        return cost(self)

    def validate(self) -> None:
        for name, pair in (("left", self.left), ("right", self.right)):
            if not pair.insertion:
                raise CouplingError(f"{name} pair is not a Galois insertion")
        if self.gamma.poset != self.apex:
            raise CouplingError("apex module lives on a different poset")
        if not self.gamma.validate():
            raise CouplingError("apex module is not commutative")
        for name, iso, g, target in (
            ("M", self.iso_M, self.left.g, self.M),
            ("N", self.iso_N, self.right.g, self.N),
        ):
            src = pullback(g, self.gamma)
            if not (iso.source.equals(src) and iso.target.equals(target)):
                raise CouplingError(f"stored isomorphism for {name} has the wrong endpoints")
            if not (iso.is_natural() and iso.is_iso()):
                raise CouplingError(f"stored map for {name} is not a natural isomorphism")

    def swap(self) -> "GaloisCoupling":
        return GaloisCoupling(
            self.apex, self.right, self.left, self.gamma, self.N, self.M, self.iso_N, self.iso_M,
            f"swap({self.construction})",
        )

    def describe(self) -> str:
        Q = self.apex
        f, h = self.left.f, self.right.f
        lines = [f"coupling via {self.construction}", f"  apex: {len(Q)} elements"]
        for q in range(len(Q)):
            lines.append(
                f"  {Q.names[q]}: f={f.target.names[f.values[q]]} h={h.target.names[h.values[q]]}"
                f" dim={self.gamma.dims[q]}"
            )
        lines.append(f"  cost: {fmt_distance(self.cost)}")
        return "\n".join(lines)


def cost(c: GaloisCoupling) -> Distance:
    P = c.base
    f, h = c.left.f.values, c.right.f.values
    return max((P.dist[f[q]][h[q]] for q in range(len(c.apex))), default=Fraction(0))


def _make(Q, f, g, h, i, gamma, M, N, construction) -> GaloisCoupling:
    try:
        left, right = GaloisPair.of(f, g), GaloisPair.of(h, i)
    except PosetError as e:
        raise CouplingError(str(e)) from None
    gM, gN = pullback(g, gamma), pullback(i, gamma)
    iso_M = find_isomorphism(gM, M)
    if iso_M is None:
        raise CouplingError("pullback of the apex module along the left insertion is not isomorphic to M")
    iso_N = find_isomorphism(gN, N)
    if iso_N is None:
        raise CouplingError("pullback of the apex module along the right insertion is not isomorphic to N")
    c = GaloisCoupling(Q, left, right, gamma, M, N, iso_M, iso_N, construction)
    c.validate()
    return c


def identity_coupling(M: PModule, N: PModule | None = None) -> GaloisCoupling:
    N = M if N is None else N
    P = M.poset
    idm = MonotoneMap.identity(P)
    return _make(P, idm, idm, idm, idm, M, M, N, "identity")


# -- interval decompositions ----------------------------------------------------


def interval_summands(M: PModule, budget: int = 20000) -> list[GenInterval] | None:
    """A list of generalized intervals with ⊕ V_I ≅ M, or None if none is found."""
    P = M.poset
    if M.is_zero():
        return []
    cands = [I for I in gen_intervals(P)]
    rest = list(M.dims)
    chosen: list[GenInterval] = []
    counter = [budget]

    def go() -> list[GenInterval] | None:
        counter[0] -= 1
        if counter[0] < 0:
            return None
        x = next((z for z in P.linear_extension() if rest[z] > 0), None)
        if x is None:
            V = direct_sum(*(interval_module(P, I) for I in chosen))
            return list(chosen) if find_isomorphism(V, M) is not None else None
        for I in cands:
            if x not in I.members or any(rest[z] == 0 for z in I.members):
                continue
            if chosen and (x, I.members) < (x, chosen[-1].members) and x in chosen[-1].members:
                continue  # symmetric duplicates of the same starting element
            for z in I.members:
                rest[z] -= 1
            chosen.append(I)
            got = go()
            chosen.pop()
            for z in I.members:
                rest[z] += 1
            if got is not None:
                return got
        return None

    return go()


# -- couplings from translations ----------------------------------------------------


@dataclass
class Attempt:
    sigma: str
    mode: str
    coupling: GaloisCoupling | None
    reason: str = ""


def _sigma_label(sigma: MonotoneMap) -> str:
    P = sigma.source
    return ",".join(f"{P.names[x]}>{P.names[v]}" for x, v in enumerate(sigma.values))


def _side_poset(tq) -> Poset:
    """Apex elements with only same-side relations (two copies of P glued along fixed points)."""
    Q = tq.Q
    g, i = tq.g.values, tq.i.values
    P = tq.f.target
    pairs = set()
    for x in range(len(P)):
        for y in P.up(x):
            pairs.add((g[x], g[y]))
            pairs.add((i[x], i[y]))
    leq = _closure(len(Q), pairs)
    return from_relation(Q.names, leq, "hasse_path")


def _glued_module(tq, Qs: Poset, M: PModule, N: PModule) -> PModule:
    P = tq.f.target
    g, i = tq.g.values, tq.i.values
    sideL = {g[x]: x for x in range(len(P))}
    sideR = {i[x]: x for x in range(len(P))}
    dims = []
    for q in range(len(Qs)):
        if q in sideL:
            dims.append(M.dims[sideL[q]])
        else:
            dims.append(N.dims[sideR[q]])
    maps = {}
    for a, b in Qs.covers:
        if a in sideL and b in sideL and P.leq[sideL[a], sideL[b]]:
            maps[(a, b)] = M.structure_map(sideL[a], sideL[b])
        else:
            maps[(a, b)] = N.structure_map(sideR[a], sideR[b])
    return PModule(Qs, dims, maps)


def coupling_from_translation(
    P: Poset,
    sigma: MonotoneMap,
    M: PModule,
    N: PModule,
    mode: str,
    summands_M: Sequence[GenInterval] | None = None,
    summands_N: Sequence[GenInterval] | None = None,
) -> GaloisCoupling:
    """Coupling over the translation quotient of (P, sigma); raises CouplingError naming the failed hypothesis."""
    if mode not in MODES:
        raise CouplingError(f"unknown mode {mode!r}")
    try:
        tq = translation_quotient(P, sigma)
    except PosetError as e:
        raise CouplingError(str(e)) from None
    Q, f, g, h, i = tq.Q, tq.f, tq.g, tq.h, tq.i
    label = f"translation[{_sigma_label(sigma)}] mode {mode}"
    if mode == "intervals":
        sm = interval_summands(M) if summands_M is None else list(summands_M)
        sn = interval_summands(N) if summands_N is None else list(summands_N)
        if sm is None or sn is None:
            raise CouplingError("no interval decomposition found")
        parts = []
        for side, ins, ivs in (("L", g, sm), ("R", i, sn)):
            for I in ivs:
                members = {ins.values[x] for x in I.members}
                if not is_convex(Q, members) or not is_connected(Q, members):
                    names = ",".join(Q.names[q] for q in sorted(members))
                    raise CouplingError(f"image {{{names}}} of a {side} summand is not an interval of the apex")
                parts.append(interval_module(Q, make_interval(Q, members)))
        gamma = direct_sum(*parts) if parts else PModule(Q, [0] * len(Q))
    elif mode == "kan":
        fixed = [x for x in range(len(P)) if sigma.values[x] == x]
        for x in fixed:
            if M.dims[x] != N.dims[x]:
                raise CouplingError(f"M and N differ at fixed point {P.names[x]}")
            for y in fixed:
                if P.leq[x, y] and not np.array_equal(M.structure_map(x, y), N.structure_map(x, y)):
                    raise CouplingError(f"M and N differ on the fixed arrow {P.names[x]}->{P.names[y]}")
        Qs = _side_poset(tq)
        glued = _glued_module(tq, Qs, M, N)
        bad = glued.commutativity_violation()
        if bad is not None:
            raise CouplingError("glued module does not commute")
        q = MonotoneMap(Qs, Q, tuple(range(len(Q))))
        gamma = left_kan(q, glued)
    else:
        gamma = pullback(h, N)
    return _make(Q, f, g, h, i, gamma, M, N, label)


# -- composition ----------------------------------------------------------------


def compose(c1: GaloisCoupling, c2: GaloisCoupling) -> GaloisCoupling:
    """Coupling for (c1.M, c2.N) over the pullback of c1's right leg and c2's left leg."""
    if c1.base != c2.base:
        raise CouplingError("couplings live over different posets")
    if c1.N.dims != c2.M.dims:
        raise CouplingError("middle modules differ")
    # φ: i1*Γ1 -> g2*Γ2 through the stored middle isomorphisms
    phi = [F.mul(F.inverse(b), a) for a, b in zip(c1.iso_N.comps, c2.iso_M.comps)]
    if not PMorphism(pullback(c1.right.g, c1.gamma), pullback(c2.left.g, c2.gamma), phi).is_natural():
        raise CouplingError("middle witnesses are incompatible")
    h1, i1 = c1.right.f, c1.right.g
    f2, g2 = c2.left.f, c2.left.g
    pb = pullback_poset(h1, f2, i1, g2)
    R = pb.R
    G1, G2 = c1.gamma, c2.gamma
    kers, dims = [], []
    for r, (q1, q2) in enumerate(pb.pairs):
        d = h1.values[q1]
        a = F.mul(phi[d], G1.structure_map(q1, i1.values[d]))
        b = G2.structure_map(q2, g2.values[d])
        K = F.kernel(np.hstack([a, F.neg(b)]))
        kers.append(K)
        dims.append(K.shape[1])
    maps = {}
    for r, s in R.covers:
        (q1, q2), (p1, p2) = pb.pairs[r], pb.pairs[s]
        step = F.block_diag(G1.structure_map(q1, p1), G2.structure_map(q2, p2))
        left = F.left_inverse(kers[s]) if dims[s] else F.zeros(0, kers[s].shape[0])
        maps[(r, s)] = F.chain_mul(left, step, kers[r])
    psi = PModule(R, dims, maps)
    f = pb.pi1.then(c1.left.f)
    g = c1.left.g.then(pb.iota1)
    h = pb.pi2.then(c2.right.f)
    i = c2.right.g.then(pb.iota2)
    return _make(R, f, g, h, i, psi, c1.M, c2.N, f"compose({c1.construction}; {c2.construction})")


# -- distance bounds ---------------------------------------------------------------


@dataclass
class GTResult:
    bound: Distance
    best: GaloisCoupling | None
    attempts: list[Attempt] = field(default_factory=list)


def gt_upper(
    M: PModule, N: PModule, sigmas: Sequence[MonotoneMap], modes: Sequence[str] = MODES
) -> GTResult:
    attempts: list[Attempt] = []
    best: GaloisCoupling | None = None
    if find_isomorphism(M, N) is not None:
        best = identity_coupling(M, N)
        attempts.append(Attempt("id", "identity", best))
    for s in sigmas:
        for mode in modes:
            try:
                c = coupling_from_translation(M.poset, s, M, N, mode)
            except (CouplingError, ModuleError) as e:
                attempts.append(Attempt(_sigma_label(s), mode, None, str(e)))
                continue
            attempts.append(Attempt(_sigma_label(s), mode, c))
            if best is None or c.cost < best.cost:
                best = c
    return GTResult(best.cost if best is not None else INF, best, attempts)


def gt_zero(M: PModule, N: PModule) -> bool:
    return find_isomorphism(M, N) is not None


def pullback_matching(c: GaloisCoupling, R: ProjComplex | None = None) -> MatchingWitness:
    """Matching E = g*R -> F = i*R, sending the summand at f(q) to h(q)."""
    R = minimal_resolution(c.gamma) if R is None else R
    if R.poset != c.apex:
        raise CouplingError("resolution is not over the apex")
    f, h = c.left.f.values, c.right.f.values
    P = c.base
    E = ProjComplex(P, [[f[q] for q in d] for d in R.degrees], R.diffs)
    targets = [[h[q] for q in d] for d in R.degrees]
    H, exact = realize(E)
    if not exact or find_isomorphism(H, c.M) is None:
        raise CouplingError("pulled back complex does not resolve M")
    w = verify_witness(E, targets, c.N, origin=f"pullback of {c.construction}")
    if w is None:
        raise CouplingError("pulled back matching does not resolve N")
    assert w.cost <= cost(c)
    return w


# -- built-in translations ------------------------------------------------------------


def capped_shift(P: Poset, step: int = 1, axes: Sequence[int] | None = None) -> MonotoneMap:
    """Add `step` to the chosen coordinates of grid/chain names, capped at the maximum."""
    coords = [coordinates(n) for n in P.names]
    k = len(coords[0])
    axes = range(k) if axes is None else axes
    top = [max(c[a] for c in coords) for a in range(k)]
    lookup = {c: j for j, c in enumerate(coords)}
    vals = []
    for c in coords:
        nc = tuple(min(c[a] + step, top[a]) if a in axes else c[a] for a in range(k))
        vals.append(lookup[nc])
    return MonotoneMap(P, P, tuple(vals))


__all__ = [
    "MODES",
    "GaloisCoupling",
    "CouplingError",
    "cost",
    "identity_coupling",
    "coupling_from_translation",
    "compose",
    "gt_upper",
    "gt_zero",
    "pullback_matching",
    "capped_shift",
    "interval_summands",
    "transported_complex",
    "assignment_cost",
]
