"""Poset modules: functors from a finite poset to finite-dimensional F_p spaces."""

from __future__ import annotations

import random
from itertools import product
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import field as F
from .poset import GenInterval, MonotoneMap, Poset, augment, make_interval

# exhaustive iso search is used when (deg + 1) ** hom_dim stays below this
ISO_GRID_BUDGET = 4096
ISO_RANDOM_TRIALS = 64


class ModuleError(ValueError):
    pass


class PModule:
    """dims per element plus one matrix per Hasse arrow (codomain x domain)."""

    def __init__(self, poset: Poset, dims: Sequence[int], maps: Mapping[tuple[int, int], np.ndarray] | None = None):
        self.poset = poset
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != len(poset):
            raise ModuleError("dimension vector does not match the poset")
        maps = dict(maps or {})
        self.maps: dict[tuple[int, int], np.ndarray] = {}
        for a, b in poset.covers:
            m = maps.pop((a, b), None)
            shape = (self.dims[b], self.dims[a])
            if m is None:
                m = F.zeros(*shape)
            m = F.mat(m, *shape)
            if m.shape != shape:
                raise ModuleError(
                    f"arrow {poset.names[a]}->{poset.names[b]}: expected {shape}, got {m.shape}"
                )
            m.flags.writeable = False
            self.maps[(a, b)] = m
        if maps:
            (a, b), _ = next(iter(maps.items()))
            raise ModuleError(f"{poset.names[a]}->{poset.names[b]} is not a Hasse arrow")
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def __repr__(self) -> str:
        return f"PModule(dims={self.dims})"

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def is_zero(self) -> bool:
        return self.total_dim == 0

    def structure_map(self, a: int, b: int) -> np.ndarray:
        """M(a -> b) for a <= b, composed along a chain of covers."""
        key = (a, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        P = self.poset
        if a == b:
            out = F.eye(self.dims[a])
        elif not P.leq[a, b]:
            raise ModuleError(f"{P.names[a]} is not below {P.names[b]}")
        elif (a, b) in self.maps:
            out = self.maps[(a, b)]
        else:
            c = next(c for c in P.lower_covers(b) if P.leq[a, c])
            out = F.mul(self.maps[(c, b)], self.structure_map(a, c))
        self._cache[key] = out
        return out

    def commutativity_violation(self) -> tuple[int, int, int, int] | None:
        """(a, b, c1, c2): two cover chains a -> c1 -> b and a -> c2 -> b disagree."""
        P = self.poset
        order = P.linear_extension()
        for a in range(len(P)):
            ups = [b for b in order if P.leq[a, b] and b != a]
            for b in ups:
                lows = [c for c in P.lower_covers(b) if P.leq[a, c]]
                ref = None
                for c in lows:
                    comp = F.mul(self.maps[(c, b)], self.structure_map(a, c))
                    if ref is None:
                        ref = (c, comp)
                    elif not np.array_equal(ref[1], comp):
                        return (a, b, ref[0], c)
        return None

    def validate(self) -> bool:
        return self.commutativity_violation() is None

    def equals(self, other: "PModule") -> bool:
        return (
            self.poset == other.poset
            and self.dims == other.dims
            and all(np.array_equal(self.maps[k], other.maps[k]) for k in self.maps)
        )

    def support(self) -> list[int]:
        return [i for i, d in enumerate(self.dims) if d]


@dataclass
class PMorphism:
    source: PModule
    target: PModule
    comps: list[np.ndarray]

    def is_natural(self) -> bool:
        for (a, b), m in self.source.maps.items():
            lhs = F.mul(self.target.maps[(a, b)], self.comps[a])
            rhs = F.mul(self.comps[b], m)
            if not np.array_equal(lhs, rhs):
                return False
        return True

    def is_iso(self) -> bool:
        return all(F.is_invertible(c) for c in self.comps)

    def inverse(self) -> "PMorphism":
        return PMorphism(self.target, self.source, [F.inverse(c) for c in self.comps])

    def then(self, other: "PMorphism") -> "PMorphism":
        """other ∘ self."""
        return PMorphism(self.source, other.target, [F.mul(b, a) for a, b in zip(self.comps, other.comps)])


def identity_morphism(M: PModule) -> PMorphism:
    return PMorphism(M, M, [F.eye(d) for d in M.dims])


# -- constructors -------------------------------------------------------


def zero_module(P: Poset) -> PModule:
    return PModule(P, [0] * len(P))


def indicator_module(P: Poset, members: Iterable[int]) -> PModule:
    s = set(members)
    dims = [1 if i in s else 0 for i in range(len(P))]
    maps = {(a, b): F.eye(1) for a, b in P.covers if a in s and b in s}
    return PModule(P, dims, maps)


def interval_module(P: Poset, I: GenInterval | Iterable[int]) -> PModule:
    if not isinstance(I, GenInterval):
        I = make_interval(P, I)
    return indicator_module(P, I.members)


def projective(P: Poset, x) -> PModule:
    return indicator_module(P, P.up(P.idx(x)))


def simple(P: Poset, x) -> PModule:
    return indicator_module(P, [P.idx(x)])


def direct_sum(*mods: PModule) -> PModule:
    if not mods:
        raise ModuleError("direct_sum needs at least one module")
    P = mods[0].poset
    if any(m.poset != P for m in mods):
        raise ModuleError("summands live on different posets")
    dims = [sum(m.dims[i] for m in mods) for i in range(len(P))]
    maps = {k: F.block_diag(*(m.maps[k] for m in mods)) for k in P.covers}
    return PModule(P, dims, maps)


def from_arrows(P: Poset, dims: Mapping[str, int], arrows: Mapping[tuple[str, str], Sequence]) -> PModule:
    d = [int(dims.get(n, 0)) for n in P.names]
    maps = {}
    for (a, b), m in arrows.items():
        ia, ib = P.idx(a), P.idx(b)
        maps[(ia, ib)] = F.mat(m, d[ib], d[ia])
    return PModule(P, d, maps)


def extend_top(M: PModule) -> PModule:
    Pb = augment(M.poset)
    maps = {k: m for k, m in M.maps.items()}
    return PModule(Pb, list(M.dims) + [0], maps)


def conjugate(M: PModule, bases: Sequence[np.ndarray]) -> PModule:
    """Change of basis x -> bases[x]; returns B_b M(a->b) B_a^-1."""
    maps = {(a, b): F.chain_mul(bases[b], m, F.inverse(bases[a])) for (a, b), m in M.maps.items()}
    return PModule(M.poset, M.dims, maps)


# -- functors between posets ----------------------------------------------


def pullback(f: MonotoneMap, M: PModule) -> PModule:
    if f.target != M.poset:
        raise ModuleError("pullback map does not land on the module's poset")
    Q = f.source
    dims = [M.dims[v] for v in f.values]
    maps = {(a, b): M.structure_map(f.values[a], f.values[b]) for a, b in Q.covers}
    return PModule(Q, dims, maps)


def pullback_morphism(f: MonotoneMap, phi: PMorphism) -> PMorphism:
    return PMorphism(pullback(f, phi.source), pullback(f, phi.target), [phi.comps[v] for v in f.values])


def left_kan(f: MonotoneMap, M: PModule) -> PModule:
    """Colimit of M over each comma fiber {a | f(a) <= b}."""
    A, B = f.source, f.target
    if M.poset != A:
        raise ModuleError("module is not over the source of f")
    offs = np.concatenate([[0], np.cumsum(M.dims)]).astype(int)
    total = int(offs[-1])
    proj, sect, fibers = [], [], []
    for b in range(len(B)):
        fib = [a for a in range(len(A)) if B.leq[f.values[a], b]]
        fibers.append(fib)
        cols = []
        for a, a2 in A.covers:
            if a in fib and a2 in fib and M.dims[a]:
                block = F.zeros(total, M.dims[a])
                block[offs[a2] : offs[a2 + 1], :] = M.maps[(a, a2)]
                block[offs[a] : offs[a + 1], :] = F.neg(F.eye(M.dims[a]))
                cols.append(block)
        rows_idx = [r for a in fib for r in range(offs[a], offs[a + 1])]
        D = np.hstack(cols)[rows_idx, :] if cols else F.zeros(len(rows_idx), 0)
        red = F.reduce(D)
        # express projection/section in global coordinates
        q = F.zeros(red.coker_projection.shape[0], total)
        q[:, rows_idx] = red.coker_projection
        s = F.zeros(total, len(red.complement))
        for j, c in enumerate(red.complement):
            s[rows_idx[c], j] = 1
        proj.append(q)
        sect.append(s)
    dims = [p.shape[0] for p in proj]
    maps = {(b, b2): F.mul(proj[b2], sect[b]) for b, b2 in B.covers}
    return PModule(B, dims, maps)


# -- Hom spaces and isomorphism -------------------------------------------


def hom_basis(M: PModule, N: PModule) -> list[PMorphism]:
    if M.poset != N.poset:
        raise ModuleError("modules live on different posets")
    P = M.poset
    sizes = [N.dims[x] * M.dims[x] for x in range(len(P))]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    nvar = int(offs[-1])
    if nvar == 0:
        return []
    blocks = []
    for a, b in P.covers:
        rows = N.dims[b] * M.dims[a]
        if rows == 0:
            continue
        blk = F.zeros(rows, nvar)
        # N(a->b) phi_a - phi_b M(a->b), row-major vectorization
        if sizes[a]:
            blk[:, offs[a] : offs[a + 1]] = np.kron(N.maps[(a, b)], F.eye(M.dims[a])) % F.prime()
        if sizes[b]:
            blk[:, offs[b] : offs[b + 1]] = F.sub(
                blk[:, offs[b] : offs[b + 1]], np.kron(F.eye(N.dims[b]), M.maps[(a, b)].T) % F.prime()
            )
        blocks.append(blk)
    system = np.vstack(blocks) if blocks else F.zeros(0, nvar)
    K = F.kernel(system)
    out = []
    for j in range(K.shape[1]):
        v = K[:, j]
        comps = [v[offs[x] : offs[x + 1]].reshape(N.dims[x], M.dims[x]) for x in range(len(P))]
        out.append(PMorphism(M, N, comps))
    return out


def combine(basis: Sequence[PMorphism], coeffs: Sequence[int]) -> PMorphism:
    M, N = basis[0].source, basis[0].target
    comps = []
    for x in range(len(M.poset)):
        acc = F.zeros(N.dims[x], M.dims[x])
        for c, phi in zip(coeffs, basis):
            if c:
                acc = (acc + c * phi.comps[x]) % F.prime()
        comps.append(acc)
    return PMorphism(M, N, comps)


def _rank_profile(M: PModule) -> list[int]:
    P = M.poset
    return [F.rank(M.structure_map(a, b)) for a in range(len(P)) for b in P.up(a)]


def find_isomorphism(M: PModule, N: PModule, seed: int = 0) -> PMorphism | None:
    """An invertible morphism M -> N, or None when none exists.

    A generic element of Hom(M, N) is invertible iff some element is; the
    product of determinants is a polynomial of degree D = total dimension.
    Random trials are tried first; when (D + 1) ** dim Hom fits the budget
    the whole grid {0..D}^k is scanned, which is conclusive.
    """
    if M.poset != N.poset:
        raise ModuleError("modules live on different posets")
    if M.dims != N.dims:
        return None
    if M.is_zero():
        return PMorphism(M, N, [F.zeros(0, 0) for _ in M.dims])
    if _rank_profile(M) != _rank_profile(N):
        return None
    basis = hom_basis(M, N)
    if not basis:
        return None
    k = len(basis)
    rng = random.Random(seed)
    p = F.prime()
    for _ in range(ISO_RANDOM_TRIALS):
        phi = combine(basis, [rng.randrange(p) for _ in range(k)])
        if phi.is_iso():
            return phi
    D = M.total_dim
    if (D + 1) ** k <= ISO_GRID_BUDGET:
        for coeffs in product(range(D + 1), repeat=k):
            phi = combine(basis, coeffs)
            if phi.is_iso():
                return phi
        return None
    # grid too large: fall back to further random trials
    for _ in range(4 * ISO_RANDOM_TRIALS):
        phi = combine(basis, [rng.randrange(p) for _ in range(k)])
        if phi.is_iso():
            return phi
    return None


def is_isomorphic(M: PModule, N: PModule) -> bool:
    return find_isomorphism(M, N) is not None


# -- projective covers ------------------------------------------------------


class ProjectiveSum:
    """⊕_j k[P]_{points[j]}; basis at z = generators j with points[j] <= z, in order."""

    def __init__(self, poset: Poset, points: Sequence[int]):
        self.poset = poset
        self.points = tuple(points)
        self.at = [
            [j for j, x in enumerate(self.points) if poset.leq[x, z]] for z in range(len(poset))
        ]
        self.pos = [{j: r for r, j in enumerate(js)} for js in self.at]

    def module(self) -> PModule:
        P = self.poset
        maps = {}
        for a, b in P.covers:
            m = F.zeros(len(self.at[b]), len(self.at[a]))
            for c, j in enumerate(self.at[a]):
                m[self.pos[b][j], c] = 1
            maps[(a, b)] = m
        return PModule(P, [len(js) for js in self.at], maps)


@dataclass
class Cover:
    points: tuple[int, ...]  # generator positions, sorted by element index
    cover: PModule
    epi: PMorphism
    kernel: PModule
    incl: PMorphism
    generators: list[np.ndarray] = dc_field(default_factory=list)  # generator vectors in M(x)


def top_basis(M: PModule, x: int) -> tuple[int, ...]:
    """Standard basis indices of M(x) completing the radical image."""
    P = M.poset
    blocks = [M.structure_map(c, x) for c in P.lower_covers(x) if M.dims[c]]
    rad = np.hstack(blocks) if blocks else F.zeros(M.dims[x], 0)
    return F.reduce(rad).complement


def projective_cover(M: PModule) -> Cover:
    P = M.poset
    points, gens = [], []
    for x in range(len(P)):
        for c in top_basis(M, x):
            v = F.zeros(M.dims[x], 1)
            v[c, 0] = 1
            points.append(x)
            gens.append(v)
    S = ProjectiveSum(P, points)
    cover = S.module()
    epi_comps = []
    for z in range(len(P)):
        cols = [F.mul(M.structure_map(points[j], z), gens[j]) for j in S.at[z]]
        epi_comps.append(np.hstack(cols) if cols else F.zeros(M.dims[z], 0))
    epi = PMorphism(cover, M, epi_comps)
    kers = [F.kernel(e) for e in epi_comps]
    lefts = [F.left_inverse(k) if k.shape[1] else F.zeros(0, k.shape[0]) for k in kers]
    kmaps = {(a, b): F.chain_mul(lefts[b], cover.maps[(a, b)], kers[a]) for a, b in P.covers}
    kernel = PModule(P, [k.shape[1] for k in kers], kmaps)
    incl = PMorphism(kernel, cover, kers)
    return Cover(tuple(points), cover, epi, kernel, incl, gens)
