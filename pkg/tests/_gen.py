"""Hypothesis strategies for small posets, translations and modules."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from galoisres import field as F
from galoisres.module import PModule, conjugate, direct_sum, interval_module
from galoisres.poset import MonotoneMap, Poset, chain, from_covers, gen_intervals
from galoisres.resolution import ProjComplex, realize


@st.composite
def posets(draw, min_size: int = 1, max_size: int = 4) -> Poset:
    n = draw(st.integers(min_size, max_size))
    names = [chr(ord("a") + k) for k in range(n)]
    pairs = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n) if draw(st.booleans())]
    return from_covers(names, pairs, "hasse_path")


@st.composite
def chains(draw, max_len: int = 6) -> Poset:
    return chain(draw(st.integers(1, max_len)))


@st.composite
def translations(draw, P: Poset) -> MonotoneMap:
    """x <= sigma(x), monotone; built from the top down so every choice stays monotone."""
    order = P.linear_extension()
    vals = [0] * len(P)
    for x in reversed(order):
        cands = [z for z in P.up(x) if all(P.leq[z, vals[y]] for y in P.upper_covers(x))]
        vals[x] = draw(st.sampled_from(sorted(cands)))
    return MonotoneMap(P, P, tuple(vals))


@st.composite
def presented(draw, P: Poset, max_gens: int = 2, max_rels: int = 2) -> PModule:
    """Cokernel of a random map between sums of representables (so dims stay <= max_gens)."""
    k = draw(st.integers(0, max_gens))
    gens = sorted(draw(st.lists(st.integers(0, len(P) - 1), min_size=k, max_size=k)))
    m = draw(st.integers(0, max_rels))
    rels = sorted(draw(st.lists(st.integers(0, len(P) - 1), min_size=m, max_size=m)))
    D = F.zeros(len(gens), len(rels))
    for r, y in enumerate(gens):
        for c, x in enumerate(rels):
            if P.leq[y, x]:
                D[r, c] = draw(st.sampled_from([0, 1, 2, F.prime() - 1]))
    if not rels:
        C = ProjComplex(P, [gens], [])
    else:
        C = ProjComplex(P, [gens, rels], [D], check=False)
    return realize(C)[0]


@st.composite
def interval_sums(draw, P: Poset, max_parts: int = 2, scramble: bool = True) -> PModule:
    ivs = gen_intervals(P)
    parts = draw(st.lists(st.sampled_from(ivs), min_size=0, max_size=max_parts))
    M = direct_sum(*(interval_module(P, I) for I in parts)) if parts else PModule(P, [0] * len(P))
    if scramble and M.total_dim:
        bases = []
        for d in M.dims:
            while True:
                B = F.mat(np.array(draw(st.lists(st.integers(0, 6), min_size=d * d, max_size=d * d))).reshape(d, d))
                if d == 0 or F.is_invertible(B):
                    break
            bases.append(B)
        M = conjugate(M, bases)
    return M


@st.composite
def modules(draw, P: Poset) -> PModule:
    if draw(st.booleans()):
        return draw(presented(P))
    return draw(interval_sums(P))
