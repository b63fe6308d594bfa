from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import chains, modules, posets, translations
from galoisres import field as F
from galoisres.corpus import load_corpus
from galoisres.module import hom_basis, interval_module, pullback, simple
from galoisres.persistence import (
    ext_dims,
    hom_complex_cohomology,
    kernel_module,
    kernel_morphism,
    lift_coupling,
    persistence_diagram,
    stability_report,
)
from galoisres.poset import TOP, augment, chain, interval_pairs, pair_name
from galoisres.resolution import minimal_resolution
from galoisres.transport import capped_shift, coupling_from_translation

WS = load_corpus()


def ext_oracle(b: int, M) -> list[int]:
    """Cohomology of Hom(P_n(S_b), M) = ⊕ M(x_j); the coboundary is precomposition with d."""
    C = minimal_resolution(simple(M.poset, b))
    out = []
    L = len(C)
    mats = []
    for n in range(L - 1):
        src, dst, D = C.deg(n), C.deg(n + 1), C.diff(n)
        rows = []
        for k, xk in enumerate(dst):
            blocks = [
                (int(D[j, k]) * M.structure_map(xj, xk)) % F.prime() if D[j, k] else F.zeros(M.dims[xk], M.dims[xj])
                for j, xj in enumerate(src)
            ]
            rows.append(np.hstack(blocks) if blocks else F.zeros(M.dims[xk], 0))
        mats.append(np.vstack(rows) if rows else F.zeros(0, sum(M.dims[x] for x in src)))
    for n in range(max(L, 1)):
        size = sum(M.dims[x] for x in C.deg(n)) if n < L else 0
        r_out = F.rank(mats[n]) if n < len(mats) and mats[n].size else 0
        r_in = F.rank(mats[n - 1]) if 0 < n <= len(mats) and mats[n - 1].size else 0
        out.append(size - r_out - r_in)
    return out


@settings(max_examples=80)
@given(st.data())
def test_ext_matches_cochain_oracle(data):
    P = data.draw(posets(max_size=5))
    M = data.draw(modules(P))
    b = data.draw(st.integers(0, len(P) - 1))
    assert ext_dims(b, M) == ext_oracle(b, M)


def test_ext_examples():
    C3 = chain(3)
    assert ext_dims("1", interval_module(C3, [0, 1])) == [0, 0]
    assert ext_dims("1", simple(C3, "1")) == [1, 0]
    assert ext_dims("1", simple(C3, "2")) == [0, 1]
    assert ext_dims("2", simple(C3, "1")) == [0, 0]


@settings(max_examples=40)
@given(st.data())
def test_hom_complex_degree_zero_counts_chain_maps_up_to_homotopy(data):
    # H^0 of Hom(P^A, P^B) is Hom(A, B) when both are resolutions
    P = data.draw(posets(max_size=4))
    A, B = data.draw(modules(P)), data.draw(modules(P))
    h = hom_complex_cohomology(minimal_resolution(A), minimal_resolution(B))
    assert h.get(0, 0) == len(hom_basis(A, B))


@settings(max_examples=80)
@given(st.data())
def test_kernel_dims(data):
    P = data.draw(posets(max_size=5))
    M = data.draw(modules(P))
    K = kernel_module(M)
    A = augment(P)
    for x, y in interval_pairs(A):
        if x == len(P):
            continue
        d = M.dims[x] if y == len(P) else M.dims[x] - F.rank(M.structure_map(x, y))
        assert K.module.dims[K.module.poset.idx(pair_name(A.names[x], A.names[y]))] == d
    assert K.module.validate()


def test_kernel_dims_api():
    K = kernel_module(WS.module("chainM"))
    assert K.dim("1", "2") == 1 and K.dim("1", TOP) == 1 and K.dim("4", TOP) == 0


@settings(max_examples=40)
@given(st.data())
def test_kernel_morphism_is_natural(data):
    P = data.draw(posets(max_size=4))
    A, B = data.draw(modules(P)), data.draw(modules(P))
    for phi in hom_basis(A, B)[:3]:
        assert kernel_morphism(phi).is_natural()


def test_chain_diagrams():
    _, dg = persistence_diagram(WS.module("chainM"))
    assert dg.points(0) == ["(1,2)", "(2,4)"]
    assert dg.sign(1) == -1
    assert dg.dump().splitlines()[0].startswith("degree 0 (+):")


@settings(max_examples=40)
@given(st.data())
def test_lifted_coupling_commutes_and_is_no_costlier(data):
    P = data.draw(posets(max_size=4))
    s = data.draw(translations(P))
    N = data.draw(modules(P))
    c = coupling_from_translation(P, s, pullback(s, N), N, "pullN")
    L = lift_coupling(c)
    assert L.commute_exact
    assert L.cost <= c.cost
    L.as_coupling(kernel_module(c.M).module, kernel_module(c.N).module).validate()


def test_stability_reports():
    rep = stability_report(WS.module("chainM"), WS.module("chainN"), [WS.map("shift4")])
    assert rep.ok and rep.bracket.as_tuple() == (1, 1) and rep.gt.bound == 1
    assert "check" in rep.dump()
    rep = stability_report(WS.module("stabM"), WS.module("stabN"), [WS.map("const2")])
    assert rep.ok and rep.bracket.upper <= rep.gt.bound == Fraction(1)


@settings(max_examples=30)
@given(st.data())
def test_stability_inequality_on_chains(data):
    P = data.draw(chains(4))
    M, N = data.draw(modules(P)), data.draw(modules(P))
    rep = stability_report(M, N, [capped_shift(P, k) for k in range(1, len(P))], slack=1)
    assert rep.ok
    assert rep.bracket.lower <= rep.gt.bound
