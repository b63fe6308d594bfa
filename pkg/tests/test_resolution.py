from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _gen import modules, posets
from galoisres import field as F
from galoisres.corpus import load_corpus
from galoisres.module import interval_module
from galoisres.poset import chain
from galoisres.resolution import (
    ComplexError,
    ConeSpec,
    ProjComplex,
    cancel,
    common_padding,
    cone,
    empty_complex,
    is_exact_positive,
    minimal_resolution,
    pad,
    pad_tracked,
    realize,
    strip,
)

WS = load_corpus()


def euler_dims(C: ProjComplex) -> list[int]:
    P = C.poset
    return [
        sum((-1) ** i * sum(1 for x in d if P.leq[x, z]) for i, d in enumerate(C.degrees)) for z in range(len(P))
    ]


@given(st.data())
def test_resolution_is_minimal_exact_and_has_right_euler_char(data):
    P = data.draw(posets(max_size=6))
    M = data.draw(modules(P))
    C = minimal_resolution(M)
    assert C.is_minimal()
    assert is_exact_positive(C)
    assert euler_dims(C) == list(M.dims)
    for i in range(len(C.diffs) - 1):
        assert not F.mul(C.diffs[i], C.diffs[i + 1]).any()


def test_interval_on_chain():
    C3 = chain(3)
    C = minimal_resolution(interval_module(C3, [0, 1]))
    assert C.point_names() == [["1"], ["3"]]
    assert minimal_resolution(interval_module(C3, [0, 1, 2])).point_names() == [["1"]]


@pytest.mark.parametrize(
    "name,sizes", [("chainM", (2, 2)), ("chainN", (1, 1)), ("gridM", (2, 3, 1)), ("gridN", (1, 1)), ("zero", ())]
)
def test_corpus_size_vectors(name, sizes):
    assert minimal_resolution(WS.module(name)).size_vector() == sizes


def test_order_rule_enforced():
    C3 = chain(3)
    with pytest.raises(ComplexError):
        ProjComplex(C3, [[2], [0]], [F.mat([[1]])])


def test_cone_and_cancel():
    C3 = chain(3)
    c = cone(C3, 1, 2)
    assert c.point_names() == [[], [], ["2"], ["2"]]
    assert realize(c)[0].is_zero()
    e = cancel(cone(C3, 1, 0), 0, 0, 0)
    assert e.size_vector() == ()


@given(st.data())
def test_padding_preserves_module_and_strip_undoes_it(data):
    P = data.draw(posets(max_size=5))
    C = minimal_resolution(data.draw(modules(P)))
    cones = data.draw(
        st.lists(st.builds(ConeSpec, st.integers(0, len(P) - 1), st.integers(0, len(C) + 1)), max_size=3)
    )
    tr = pad_tracked(C, cones)
    E = tr.complex
    assert sum(1 for d in tr.origin for o in d if o[0] == "cone") == 2 * len(cones)
    H, exact = realize(E)
    assert exact and H.dims == realize(C)[0].dims
    assert strip(E).size_vector() == C.size_vector()
    assert Counter(strip(E).alpha_hat()) == Counter(C.alpha_hat())


def test_cone_shift_must_be_nonnegative():
    with pytest.raises(ComplexError):
        ConeSpec(0, -1)


def test_common_padding_examples():
    A = minimal_resolution(WS.module("chainM"))
    B = minimal_resolution(WS.module("chainN"))
    ca, cb = common_padding(A, B)
    assert pad(A, ca).size_vector() == pad(B, cb).size_vector()
    Z = minimal_resolution(WS.module("zero"))
    assert common_padding(A, Z) is not None
    assert common_padding(minimal_resolution(WS.module("luisM")), Z) is not None
    one = minimal_resolution(interval_module(chain(2), [0, 1]))
    assert common_padding(one, empty_complex(chain(2))) is None
