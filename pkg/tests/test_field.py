import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from galoisres import _fallback
from galoisres import field as F

P = F.prime()


def oracle_rref(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Textbook Gauss-Jordan on python ints."""
    a = [[x % p for x in r] for r in rows]
    m = len(a)
    n = len(a[0]) if a else 0
    pivots, r = [], 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], p - 2, p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(m):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


matrices = hnp.arrays(
    np.int64,
    st.tuples(st.integers(1, 7), st.integers(1, 7)),
    elements=st.sampled_from([0, 0, 1, 2, 3, P - 1, P - 2, 12345]),
)


@given(matrices)
def test_rref_matches_oracle(m):
    got, piv = F.rref(m)
    want, wpiv = oracle_rref(m.tolist(), P)
    assert piv == wpiv
    assert got.tolist() == want


@given(matrices)
def test_backends_agree(m):
    a = np.ascontiguousarray(m % P)
    b = a.copy()
    pa = list(_fallback.rref_inplace(a, P))
    try:
        from galoisres import _kernels
    except ImportError:
        pytest.skip("compiled kernel not built")
    pb = list(_kernels.rref_inplace(b, P))
    assert pa == pb and np.array_equal(a, b)


@given(matrices)
def test_kernel_is_annihilated(m):
    k = F.kernel(m)
    assert k.shape == (m.shape[1], m.shape[1] - F.rank(m))
    assert not F.mul(m, k).any()


@given(matrices)
def test_reduction_cokernel(m):
    red = F.reduce(m)
    assert red.coker_projection.shape == (m.shape[0] - red.rank, m.shape[0])
    assert not F.mul(red.coker_projection, m).any()
    assert F.rank(red.coker_projection) == m.shape[0] - red.rank


@given(matrices, st.data())
def test_solve(m, data):
    x = data.draw(hnp.arrays(np.int64, (m.shape[1], 2), elements=st.integers(0, 9)))
    b = F.mul(m, x)
    y = F.solve(m, b)
    assert y is not None and np.array_equal(F.mul(m, y), b)


def test_solve_inconsistent():
    assert F.solve(F.mat([[1, 0], [0, 0]]), F.mat([[0], [1]])) is None


def test_inverse_and_left_inverse():
    a = F.mat([[2, 1], [1, 1]])
    assert np.array_equal(F.mul(F.inverse(a), a), F.eye(2))
    tall = F.mat([[1, 0], [2, 1], [0, 3]])
    assert np.array_equal(F.mul(F.left_inverse(tall), tall), F.eye(2))
    with pytest.raises(ValueError):
        F.inverse(F.mat([[1, 2], [2, 4]]))


def test_prime_switch():
    old = F.prime()
    try:
        F.set_prime(5)
        assert F.rank(F.mat([[1, 2], [2, 4]])) == 1
        assert F.rank(F.mat([[1, 0], [0, 5]])) == 1
        with pytest.raises(ValueError):
            F.set_prime(6)
        with pytest.raises(ValueError):
            F.set_prime(F.MAX_PRIME * 2 + 1)
    finally:
        F.set_prime(old)


def test_empty_shapes():
    assert F.rank(F.zeros(0, 3)) == 0
    assert F.kernel(F.zeros(0, 3)).shape == (3, 3)
