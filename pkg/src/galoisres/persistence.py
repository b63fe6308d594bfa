"""Kernel functor over interval posets, signed diagrams, Ext dimensions and stability reports."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import field as F
from .bottleneck import DistBracket, dist_bottleneck
from .module import PModule, PMorphism, extend_top, pullback, simple
from .poset import (
    Distance,
    GaloisPair,
    MonotoneMap,
    Poset,
    augment,
    fmt_distance,
    int_map,
    interval_pairs,
    interval_poset,
)
from .resolution import ProjComplex, minimal_resolution
from .transport import CouplingError, GaloisCoupling, GTResult, gt_upper, pullback_matching


@dataclass
class KernelModule:
    module: PModule  # over interval_poset(augment(P))
    source: PModule
    bases: list[np.ndarray]  # kernel basis of M̄(x -> y), one per interval-poset element

    @property
    def poset(self) -> Poset:
        return self.module.poset

    def dim(self, x: str, y: str) -> int:
        return self.module.dims[self.poset.idx(f"({x},{y})")]


def _left(K: np.ndarray) -> np.ndarray:
    return F.left_inverse(K) if K.shape[1] else F.zeros(0, K.shape[0])


def kernel_module(M: PModule) -> KernelModule:
    Mb = extend_top(M)
    S = Mb.poset
    I = interval_poset(S)
    pairs = interval_pairs(S)
    bases = [F.kernel(Mb.structure_map(x, y)) for x, y in pairs]
    maps = {}
    for a, b in I.covers:
        (x1, _), (x2, _) = pairs[a], pairs[b]
        maps[(a, b)] = F.chain_mul(_left(bases[b]), Mb.structure_map(x1, x2), bases[a])
    return KernelModule(PModule(I, [K.shape[1] for K in bases], maps), M, bases)


def kernel_morphism(phi: PMorphism) -> PMorphism:
    KM, KN = kernel_module(phi.source), kernel_module(phi.target)
    pairs = interval_pairs(augment(phi.source.poset))
    comps_b = list(phi.comps) + [F.zeros(0, 0)]
    comps = [
        F.chain_mul(_left(KN.bases[r]), comps_b[x], KM.bases[r]) for r, (x, _) in enumerate(pairs)
    ]
    return PMorphism(KM.module, KN.module, comps)


@dataclass
class SignedDiagram:
    poset: Poset
    degrees: list[Counter]  # per homological degree: point index -> multiplicity

    def sign(self, d: int) -> int:
        return -1 if d % 2 else 1

    def points(self, d: int) -> list[str]:
        c = self.degrees[d] if d < len(self.degrees) else Counter()
        return sorted((self.poset.names[x] for x in c.elements()), key=self.poset.idx)

    def dump(self) -> str:
        lines = []
        for d, c in enumerate(self.degrees):
            sgn = "+" if self.sign(d) > 0 else "-"
            items = " ".join(f"{self.poset.names[x]}x{k}" for x, k in sorted(c.items()))
            lines.append(f"degree {d} ({sgn}): {items}")
        return "\n".join(lines) if lines else "empty"


def diagram_of(C: ProjComplex) -> SignedDiagram:
    return SignedDiagram(C.poset, [Counter(d) for d in C.degrees])


def persistence_diagram(M: PModule) -> tuple[ProjComplex, SignedDiagram]:
    res = minimal_resolution(kernel_module(M).module)
    return res, diagram_of(res)


# -- Ext ----------------------------------------------------------------------


def _allowed(Cs: ProjComplex, Cm: ProjComplex, a: int, b: int) -> list[tuple[int, int]]:
    """Entry positions (row in Cm_b, col in Cs_a) of Hom(Cs_a, Cm_b)."""
    P = Cs.poset
    return [(r, c) for c, x in enumerate(Cs.deg(a)) for r, y in enumerate(Cm.deg(b)) if P.leq[y, x]]


def hom_complex_cohomology(Cs: ProjComplex, Cm: ProjComplex) -> dict[int, int]:
    """dim H^n of the total complex Hom(Cs, Cm), n = a - b, for all n that occur."""
    lo, hi = -len(Cm), len(Cs)
    blocks = {}  # n -> list of (a, entries)
    for n in range(lo - 1, hi + 2):
        blocks[n] = [(a, _allowed(Cs, Cm, a, a - n)) for a in range(len(Cs)) if 0 <= a - n < len(Cm)]

    def size(n):
        return sum(len(e) for _, e in blocks.get(n, []))

    def delta(n) -> np.ndarray:
        src, dst = blocks.get(n, []), blocks.get(n + 1, [])
        out = F.zeros(size(n + 1), size(n))
        dst_off, off = {}, 0
        for a, e in dst:
            dst_off[a] = (off, {pos: k for k, pos in enumerate(e)})
            off += len(e)
        col = 0
        sign = (-1) ** n
        for a, e in src:
            b = a - n
            for r, c in e:
                phi = F.zeros(len(Cm.deg(b)), len(Cs.deg(a)))
                phi[r, c] = 1
                # d^Q ∘ φ lands in Hom(Cs_a, Cm_{b-1}) which is degree n+1 at index a
                if b - 1 >= 0 and a in dst_off:
                    img = F.mul(Cm.diff(b - 1), phi)
                    o, pos = dst_off[a]
                    for (rr, cc), k in pos.items():
                        out[o + k, col] = (out[o + k, col] + img[rr, cc]) % F.prime()
                # φ ∘ d^P lands in Hom(Cs_{a+1}, Cm_b), degree n+1 at index a+1
                if a + 1 < len(Cs) and (a + 1) in dst_off:
                    img = F.mul(phi, Cs.diff(a))
                    o, pos = dst_off[a + 1]
                    for (rr, cc), k in pos.items():
                        out[o + k, col] = (out[o + k, col] - sign * img[rr, cc]) % F.prime()
                col += 1
        return out

    ranks = {n: F.rank(delta(n)) if size(n) and size(n + 1) else 0 for n in range(lo - 1, hi + 1)}
    return {n: size(n) - ranks[n] - ranks.get(n - 1, 0) for n in range(lo, hi + 1)}


def ext_dims(b: str | int, M: PModule) -> list[int]:
    """dim Ext^d(1_b, M) for d = 0 .. length of the resolution of 1_b minus one."""
    P = M.poset
    S = simple(P, b)
    Cs, Cm = minimal_resolution(S), minimal_resolution(M)
    h = hom_complex_cohomology(Cs, Cm)
    return [h.get(d, 0) for d in range(max(len(Cs), 1))]


# -- stability ------------------------------------------------------------------


@dataclass
class LiftedCoupling:
    base: GaloisCoupling
    apex: Poset
    left: GaloisPair
    right: GaloisPair
    gamma: PModule
    iso_M: PMorphism
    iso_N: PMorphism
    commute_exact: bool

    @property
    def cost(self) -> Distance:
        T = self.left.f.target
        f, h = self.left.f.values, self.right.f.values
        return max(T.dist[f[q]][h[q]] for q in range(len(self.apex)))

    def as_coupling(self, KM: PModule, KN: PModule) -> GaloisCoupling:
        return GaloisCoupling(
            self.apex, self.left, self.right, self.gamma, KM, KN, self.iso_M, self.iso_N,
            f"kernel lift of {self.base.construction}",
        )


def lift_coupling(c: GaloisCoupling) -> LiftedCoupling:
    f, g, h, i = c.left.f, c.left.g, c.right.f, c.right.g
    If, Ig, Ih, Ii = int_map(f), int_map(g), int_map(h), int_map(i)
    left, right = GaloisPair.of(If, Ig), GaloisPair.of(Ih, Ii)
    KG = kernel_module(c.gamma).module
    exact = True
    isos = []
    for ins, iso in ((Ig, c.iso_M), (Ii, c.iso_N)):
        pulled = pullback(ins, KG)
        direct = kernel_module(iso.source).module
        exact &= pulled.equals(direct)
        isos.append(kernel_morphism(iso))
    return LiftedCoupling(c, KG.poset, left, right, KG, isos[0], isos[1], exact)


@dataclass
class StabilityReport:
    gt: GTResult
    lifted_costs: list[Distance]
    bracket: DistBracket
    KM: ProjComplex
    KN: ProjComplex
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def dump(self) -> str:
        lines = [f"gt upper: {fmt_distance(self.gt.bound)}"]
        if self.gt.best is not None:
            lines.append(f"  via {self.gt.best.construction}")
        lines.append("lifted coupling costs: " + (", ".join(fmt_distance(c) for c in self.lifted_costs) or "none"))
        lines.append(f"dist_B on kernel diagrams: {self.bracket}")
        for n in self.bracket.notes:
            lines.append(f"  {n}")
        if self.bracket.upper_witness is not None:
            lines.append(self.bracket.upper_witness.dump())
        for k, v in self.checks.items():
            lines.append(f"check {k}: {'ok' if v else 'FAILED'}")
        return "\n".join(lines)


def stability_report(
    M: PModule, N: PModule, sigmas: Sequence[MonotoneMap], slack: int = 3, use_hints: bool = True
) -> StabilityReport:
    gt = gt_upper(M, N, sigmas)
    u = gt.bound
    KMm, KNm = kernel_module(M).module, kernel_module(N).module
    Pm, Pn = minimal_resolution(KMm), minimal_resolution(KNm)
    lifted, hints = [], []
    checks: dict[str, bool] = {}
    for att in gt.attempts:
        if att.coupling is None:
            continue
        L = lift_coupling(att.coupling)
        lifted.append(L.cost)
        checks[f"kernel square commutes ({att.mode})"] = L.commute_exact
        checks[f"lifted cost <= base cost ({att.mode})"] = L.cost <= att.coupling.cost
        if use_hints and att.coupling is gt.best:
            try:
                hints.append(pullback_matching(L.as_coupling(KMm, KNm)))
            except CouplingError:
                checks["lifted pullback matching"] = False
    bracket = dist_bottleneck(Pm, Pn, KNm, slack=slack, M=KMm, hints=hints)
    checks["bracket upper <= gt upper"] = bracket.upper <= u
    checks["bracket lower <= gt upper"] = bracket.lower <= u
    return StabilityReport(gt, lifted, bracket, Pm, Pn, checks)
