import pytest
from hypothesis import given
from hypothesis import strategies as st

from _gen import interval_sums, modules, posets
from test_field import oracle_rref
from galoisres import field as F
from galoisres.module import (
    conjugate,
    ModuleError,
    PModule,
    direct_sum,
    find_isomorphism,
    from_arrows,
    hom_basis,
    interval_module,
    left_kan,
    projective,
    projective_cover,
    pullback,
    simple,
)
from galoisres.poset import MonotoneMap, chain, from_covers, interval


def hom_dim_oracle(M: PModule, N: PModule) -> int:
    """Nullity of the naturality equations N(a->b) X_a = X_b M(a->b), built entry by entry."""
    P = M.poset
    offs, n = [], 0
    for x in range(len(P)):
        offs.append(n)
        n += N.dims[x] * M.dims[x]
    if n == 0:
        return 0

    def var(x, i, j):  # X_x[i, j]
        return offs[x] + i * M.dims[x] + j

    rows = []
    for (a, b), m in M.maps.items():
        nm = N.maps[(a, b)]
        for i in range(N.dims[b]):
            for j in range(M.dims[a]):
                r = [0] * n
                for k in range(N.dims[a]):
                    r[var(a, k, j)] += int(nm[i, k])
                for k in range(M.dims[b]):
                    r[var(b, i, k)] -= int(m[k, j])
                rows.append(r)
    if not rows:
        return n
    _, piv = oracle_rref(rows, F.prime())
    return n - len(piv)


@given(st.data())
def test_hom_dimension_matches_oracle(data):
    P = data.draw(posets(max_size=5))
    M, N = data.draw(modules(P)), data.draw(modules(P))
    basis = hom_basis(M, N)
    assert len(basis) == hom_dim_oracle(M, N)
    assert all(phi.is_natural() for phi in basis)


def test_hom_between_chain_intervals():
    C = chain(5)
    ivs = [(a, b) for a in range(1, 6) for b in range(a, 6)]
    for a, b in ivs:
        for c, d in ivs:
            M = interval_module(C, interval(C, [str(a)], [str(b)]))
            N = interval_module(C, interval(C, [str(c)], [str(d)]))
            want = 1 if c <= a <= d <= b else 0
            assert len(hom_basis(M, N)) == want, (a, b, c, d)


def test_projective_and_simple():
    C = chain(3)
    assert projective(C, "2").dims == (0, 1, 1)
    assert simple(C, "2").dims == (0, 1, 0)


def test_noncommuting_square_detected():
    P = from_covers(["a", "b", "c", "d"], [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])
    M = from_arrows(
        P,
        {"a": 1, "b": 1, "c": 1, "d": 1},
        {("a", "b"): [[1]], ("a", "c"): [[1]], ("b", "d"): [[1]], ("c", "d"): [[2]]},
    )
    assert M.commutativity_violation() is not None
    assert not M.validate()


def test_arrow_shape_checked():
    C = chain(2)
    with pytest.raises(ModuleError):
        PModule(C, [1, 2], {(0, 1): F.mat([[1, 0]])})


@given(st.data())
def test_conjugated_module_is_isomorphic(data):
    P = data.draw(posets(max_size=5))
    M = data.draw(interval_sums(P, scramble=False))
    bases = []
    for d in M.dims:
        B = F.eye(d)
        if d >= 2:
            B[0, 1] = data.draw(st.integers(0, 5))
            B[1, 0] = data.draw(st.integers(0, 5))
            if not F.is_invertible(B):
                B = F.eye(d)
        bases.append(B)
    N = conjugate(M, bases)
    psi = find_isomorphism(M, N)
    assert psi is not None and psi.is_natural() and psi.is_iso()


def test_same_dims_not_isomorphic():
    C = chain(2)
    M = direct_sum(interval_module(C, [0]), interval_module(C, [1]))
    N = interval_module(C, [0, 1])
    assert M.dims == (1, 1) and N.dims == (1, 1)
    assert find_isomorphism(M, N) is None


@given(st.data())
def test_left_kan_along_identity(data):
    P = data.draw(posets(max_size=5))
    M = data.draw(modules(P))
    assert find_isomorphism(left_kan(MonotoneMap.identity(P), M), M) is not None


def test_left_kan_onto_chain():
    # collapse a 2-chain onto a point: colimit = value at the top
    C = chain(2)
    pt = chain(1)
    f = MonotoneMap(C, pt, (0, 0))
    M = interval_module(C, [0])
    assert left_kan(f, M).dims == (0,)
    assert left_kan(f, interval_module(C, [0, 1])).dims == (1,)


def test_pullback_along_shift():
    C = chain(3)
    s = MonotoneMap(C, C, (1, 2, 2))
    assert pullback(s, interval_module(C, [1])).dims == (1, 0, 0)


@given(st.data())
def test_projective_cover_is_exact(data):
    P = data.draw(posets(max_size=5))
    M = data.draw(modules(P))
    cv = projective_cover(M)
    assert cv.epi.is_natural() and cv.incl.is_natural()
    for z in range(len(P)):
        assert F.rank(cv.epi.comps[z]) == M.dims[z]
        assert not F.mul(cv.epi.comps[z], cv.incl.comps[z]).any()
        assert cv.kernel.dims[z] == cv.cover.dims[z] - M.dims[z]
