"""Bounded complexes of projectives in summand-point form, and minimal resolutions.

A complex C has, per degree i, a list of poset points (one per summand k[P]_x)
and scalar matrices D_i of shape (|C_i|, |C_{i+1}|) describing C_{i+1} -> C_i.
Entry (y, x) may be nonzero only when point(x) >= point(y).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import field as F
from .module import PModule, ProjectiveSum, projective_cover
from .poset import Poset


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class ConeSpec:
    point: int
    shift: int

    def __post_init__(self):
        if self.shift < 0:
            raise ComplexError("cone shift must be nonnegative")


class ProjComplex:
    def __init__(self, poset: Poset, degrees: Sequence[Sequence[int]], diffs: Sequence[np.ndarray], check: bool = True):
        self.poset = poset
        degs = [tuple(int(x) for x in d) for d in degrees]
        ds = [F.mat(m, len(degs[i]), len(degs[i + 1])) for i, m in enumerate(diffs)]
        if len(ds) != max(len(degs) - 1, 0):
            raise ComplexError("need one differential between each pair of consecutive degrees")
        # trim trailing empty degrees
        while degs and not degs[-1]:
            degs.pop()
            if ds:
                ds.pop()
        self.degrees = degs
        self.diffs = ds
        for i, m in enumerate(ds):
            if m.shape != (len(degs[i]), len(degs[i + 1])):
                raise ComplexError(f"differential {i} has shape {m.shape}")
        if check:
            self.check()

    # -- structure ----------------------------------------------------
    def check(self) -> None:
        P = self.poset
        for i, m in enumerate(self.diffs):
            rows, cols = np.nonzero(m)
            for r, c in zip(rows, cols):
                y, x = self.degrees[i][r], self.degrees[i + 1][c]
                if not P.leq[y, x]:
                    raise ComplexError(
                        f"degree {i}: nonzero entry from {P.names[x]} to {P.names[y]} violates the order"
                    )
        for i in range(len(self.diffs) - 1):
            if np.any(F.mul(self.diffs[i], self.diffs[i + 1])):
                raise ComplexError(f"differentials {i} and {i + 1} do not compose to zero")

    def __len__(self) -> int:
        return len(self.degrees)

    def diff(self, i: int) -> np.ndarray:
        """D_i : C_{i+1} -> C_i, with zero-size padding outside the range."""
        if 0 <= i < len(self.diffs):
            return self.diffs[i]
        return F.zeros(len(self.deg(i)), len(self.deg(i + 1)))

    def deg(self, i: int) -> tuple[int, ...]:
        return self.degrees[i] if 0 <= i < len(self.degrees) else ()

    def size_vector(self) -> tuple[int, ...]:
        return tuple(len(d) for d in self.degrees)

    def alternating_sum(self) -> int:
        return sum((-1) ** i * n for i, n in enumerate(self.size_vector()))

    def alpha_hat(self) -> Counter:
        c = Counter()
        for i, d in enumerate(self.degrees):
            for x in d:
                c[x] += (-1) ** i
        return Counter({k: v for k, v in c.items() if v})

    def equals(self, other: "ProjComplex") -> bool:
        return (
            self.poset == other.poset
            and self.degrees == other.degrees
            and all(np.array_equal(a, b) for a, b in zip(self.diffs, other.diffs))
        )

    def point_names(self) -> list[list[str]]:
        return [[self.poset.names[x] for x in d] for d in self.degrees]

    def is_minimal(self) -> bool:
        for i, m in enumerate(self.diffs):
            rows, cols = np.nonzero(m)
            if any(self.degrees[i][r] == self.degrees[i + 1][c] for r, c in zip(rows, cols)):
                return False
        return True

    def dump(self) -> str:
        lines = []
        for i, d in enumerate(self.degrees):
            lines.append(f"degree {i}: " + " ".join(self.poset.names[x] for x in d))
        for i, m in enumerate(self.diffs):
            lines.append(f"d{i}:")
            for row in F.centered(m):
                lines.append("  " + " ".join(str(int(v)) for v in row))
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"ProjComplex({self.point_names()})"


def canonical_order(points: Sequence[int]) -> list[int]:
    """Permutation sorting summands by element index, stable in insertion order."""
    return sorted(range(len(points)), key=lambda j: (points[j], j))


def reorder(C: ProjComplex, perms: Sequence[Sequence[int]]) -> ProjComplex:
    """Apply per-degree permutations (new position -> old position)."""
    degs = [[d[j] for j in perms[i]] for i, d in enumerate(C.degrees)]
    diffs = [m[np.ix_(list(perms[i]), list(perms[i + 1]))] for i, m in enumerate(C.diffs)]
    return ProjComplex(C.poset, degs, diffs, check=False)


def canonicalize(C: ProjComplex) -> tuple[ProjComplex, list[list[int]]]:
    perms = [canonical_order(d) for d in C.degrees]
    return reorder(C, perms), perms


def empty_complex(P: Poset) -> ProjComplex:
    return ProjComplex(P, [], [])


# -- resolutions ----------------------------------------------------------


def minimal_resolution(M: PModule, max_length: int | None = None) -> ProjComplex:
    P = M.poset
    limit = max_length if max_length is not None else len(P) + 1
    degrees: list[tuple[int, ...]] = []
    diffs: list[np.ndarray] = []
    cur = M
    prev_sum: ProjectiveSum | None = None
    prev_incl = None  # inclusion of cur into the previous projective term
    for _ in range(limit + 1):
        if cur.is_zero():
            break
        cov = projective_cover(cur)
        S = ProjectiveSum(P, cov.points)
        degrees.append(cov.points)
        if prev_sum is not None:
            # column j: image of generator j (at point x) in prev term coordinates at x
            m = F.zeros(len(prev_sum.points), len(S.points))
            for j, x in enumerate(S.points):
                v = F.mul(prev_incl.comps[x], cov.generators[j])
                for r, jj in enumerate(prev_sum.at[x]):
                    m[jj, j] = v[r, 0]
            diffs.append(m)
        prev_sum, prev_incl, cur = S, cov.incl, cov.kernel
    else:
        raise ComplexError("resolution did not terminate")
    return ProjComplex(P, degrees, diffs)


def _restrict(C: ProjComplex, i: int, z: int) -> np.ndarray:
    P = C.poset
    rows = [r for r, y in enumerate(C.deg(i)) if P.leq[y, z]]
    cols = [c for c, x in enumerate(C.deg(i + 1)) if P.leq[x, z]]
    return C.diff(i)[np.ix_(rows, cols)]


def _count_at(C: ProjComplex, i: int, z: int) -> int:
    return sum(1 for y in C.deg(i) if C.poset.leq[y, z])


def is_exact_positive(C: ProjComplex) -> bool:
    for z in range(len(C.poset)):
        for i in range(1, len(C)):
            n = _count_at(C, i, z)
            if F.rank(_restrict(C, i - 1, z)) + F.rank(_restrict(C, i, z)) != n:
                return False
    return True


def homology_dims(C: ProjComplex, i: int) -> list[int]:
    out = []
    for z in range(len(C.poset)):
        n = _count_at(C, i, z)
        r_out = F.rank(_restrict(C, i - 1, z)) if i >= 1 else 0
        out.append(n - r_out - F.rank(_restrict(C, i, z)))
    return out


def realize(C: ProjComplex) -> tuple[PModule, bool]:
    """(H_0 as a module, whether homology vanishes in positive degrees)."""
    P = C.poset
    proj, sect, rows_at = [], [], []
    for z in range(len(P)):
        rows = [r for r, y in enumerate(C.deg(0)) if P.leq[y, z]]
        red = F.reduce(_restrict(C, 0, z))
        proj.append(red.coker_projection)
        s = F.zeros(len(rows), len(red.complement))
        for j, c in enumerate(red.complement):
            s[c, j] = 1
        sect.append(s)
        rows_at.append(rows)
    maps = {}
    for a, b in P.covers:
        pos_b = {r: k for k, r in enumerate(rows_at[b])}
        sel = F.zeros(len(rows_at[b]), len(rows_at[a]))
        for k, r in enumerate(rows_at[a]):
            sel[pos_b[r], k] = 1
        maps[(a, b)] = F.chain_mul(proj[b], sel, sect[a])
    M = PModule(P, [q.shape[0] for q in proj], maps)
    return M, is_exact_positive(C)


# -- padding and stripping ---------------------------------------------------


@dataclass
class Padded:
    complex: ProjComplex
    origin: list[list[tuple[str, int]]]  # per degree, per summand: ("base", j) or ("cone", k)


def pad_tracked(C: ProjComplex, cones: Iterable[ConeSpec]) -> Padded:
    cones = list(cones)
    top = max([len(C)] + [c.shift + 2 for c in cones])
    degs = [list(C.deg(i)) for i in range(top)]
    origin = [[("base", j) for j in range(len(C.deg(i)))] for i in range(top)]
    diffs = [C.diff(i).copy() for i in range(top - 1)]
    for k, c in enumerate(cones):
        a = c.shift
        degs[a].append(c.point)
        origin[a].append(("cone", k))
        degs[a + 1].append(c.point)
        origin[a + 1].append(("cone", k))
    new_diffs = []
    for i in range(top - 1):
        m = F.zeros(len(degs[i]), len(degs[i + 1]))
        old = diffs[i]
        m[: old.shape[0], : old.shape[1]] = old
        for r, o in enumerate(origin[i]):
            if o[0] == "cone" and cones[o[1]].shift == i:
                c = next(cc for cc, oo in enumerate(origin[i + 1]) if oo == o)
                m[r, c] = 1
        new_diffs.append(m)
    raw = ProjComplex(C.poset, degs, new_diffs, check=False)
    perms = [canonical_order(d) for d in raw.degrees]
    out = reorder(raw, perms)
    origin = [[origin[i][j] for j in perms[i]] for i in range(len(perms))]
    return Padded(out, origin)


def pad(C: ProjComplex, cones: Iterable[ConeSpec]) -> ProjComplex:
    return pad_tracked(C, cones).complex


def cone(P: Poset, x: int, shift: int = 0) -> ProjComplex:
    return pad(empty_complex(P), [ConeSpec(x, shift)])


def cancel(C: ProjComplex, i: int, r: int, c: int) -> ProjComplex:
    """Gaussian elimination of the unit entry D_i[r, c] (equal points)."""
    D = C.diffs[i]
    u = int(D[r, c])
    if u == 0 or C.degrees[i][r] != C.degrees[i + 1][c]:
        raise ComplexError("can only cancel a nonzero entry between equal points")
    keep_r = [k for k in range(D.shape[0]) if k != r]
    keep_c = [k for k in range(D.shape[1]) if k != c]
    a = D[np.ix_(keep_r, [c])]
    b = D[np.ix_([r], keep_c)]
    newD = F.sub(D[np.ix_(keep_r, keep_c)], F.mul(a, b) * F.inv_scalar(u) % F.prime())
    degs = [list(d) for d in C.degrees]
    diffs = [m.copy() for m in C.diffs]
    diffs[i] = newD
    if i + 1 < len(diffs):
        diffs[i + 1] = diffs[i + 1][keep_c, :]
    if i - 1 >= 0:
        diffs[i - 1] = diffs[i - 1][:, keep_r]
    del degs[i][r]
    del degs[i + 1][c]
    return ProjComplex(C.poset, degs, diffs, check=False)


def strip(C: ProjComplex) -> ProjComplex:
    while True:
        hit = None
        for i, m in enumerate(C.diffs):
            rows, cols = np.nonzero(m)
            for r, c in zip(rows, cols):
                if C.degrees[i][r] == C.degrees[i + 1][c]:
                    hit = (i, int(r), int(c))
                    break
            if hit:
                break
        if hit is None:
            return ProjComplex(C.poset, C.degrees, C.diffs)
        C = cancel(C, *hit)


# -- Grothendieck-class bookkeeping ---------------------------------------


def alpha_hat(C: ProjComplex) -> Counter:
    return C.alpha_hat()


def size_vector(C: ProjComplex) -> tuple[int, ...]:
    return C.size_vector()


def alternating_sum(C: ProjComplex) -> int:
    return C.alternating_sum()


def common_padding(A: ProjComplex, B: ProjComplex, point: int = 0) -> tuple[list[ConeSpec], list[ConeSpec]] | None:
    """Cone lists equalizing size vectors (all at one point), or None if alternating sums differ."""
    if A.alternating_sum() != B.alternating_sum():
        return None
    n = max(len(A), len(B))
    diff = [len(A.deg(i)) - len(B.deg(i)) for i in range(n)]
    # write diff = sum_i k_i (e_i + e_{i+1}) by peeling the lowest degree
    ks = []
    carry = 0
    for i in range(n):
        k = diff[i] - carry
        ks.append(k)
        carry = k
    if carry != 0:
        raise AssertionError("alternating sums agree but peeling left a remainder")
    if ks:
        ks.pop()  # last entry is zero when sums agree
    cones_A, cones_B = [], []
    for i, k in enumerate(ks):
        target = cones_B if k > 0 else cones_A
        target.extend(ConeSpec(point, i) for _ in range(abs(k)))
    return cones_A, cones_B
