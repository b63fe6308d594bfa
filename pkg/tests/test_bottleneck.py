import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import chains, interval_sums, modules, posets
from galoisres.bottleneck import (
    INF,
    OrderViolation,
    SearchConfig,
    compose_witnesses,
    dist_bottleneck,
    dist_prematch,
    identity_witness,
    transported_complex,
    verify_witness,
)
from galoisres.corpus import CHAIN_TABLE, LUIS_B, LUIS_B_PRIME, load_corpus, luis_padded, named_targets
from galoisres.module import interval_module
from galoisres.poset import chain
from galoisres.resolution import ConeSpec, minimal_resolution, pad

WS = load_corpus()
ONE = Fraction(1)


def prematch_oracle(A, B, slack: int = 1):
    return min(one_sided_oracle(A, B, slack), one_sided_oracle(B, A, slack))


def one_sided_oracle(A, B, slack):
    """Brute force: at most `slack` cones on A, the cone counts on B forced by sizes,
    every choice of cone points and every per-degree bijection."""
    P = A.poset
    shifts = max(len(A), len(B)) + 1
    opts = [ConeSpec(x, s) for s in range(shifts) for x in range(len(P))]
    best = INF
    for k in range(slack + 1):
        for ca in itertools.combinations_with_replacement(opts, k):
            EA = pad(A, ca)
            ea, nb = EA.size_vector(), B.size_vector()
            n = max(len(ea), len(nb))
            f, prev = [], 0
            for i in range(n):
                c = (ea[i] if i < len(ea) else 0) - (nb[i] if i < len(nb) else 0) - prev
                f.append(c)
                prev = c
            if prev != 0 or any(c < 0 for c in f):
                continue
            choices = [itertools.combinations_with_replacement(range(len(P)), c) for c in f]
            for pts in itertools.product(*map(list, choices)):
                EB = pad(B, [ConeSpec(x, s) for s, xs in enumerate(pts) for x in xs])
                worst = Fraction(0)
                for i in range(len(EA)):
                    xs, ys = EA.deg(i), EB.deg(i)
                    worst = max(
                        worst,
                        min(max((P.dist[x][y] for x, y in zip(xs, perm)), default=Fraction(0))
                            for perm in itertools.permutations(ys)),
                    )
                best = min(best, worst)
    return best


@settings(max_examples=40)
@given(st.data())
def test_prematch_matches_brute_force(data):
    P = data.draw(chains(4))
    A = minimal_resolution(data.draw(interval_sums(P, scramble=False)))
    B = minimal_resolution(data.draw(interval_sums(P, scramble=False)))
    got = dist_prematch(A, B, slack=1)
    assert got.upper == prematch_oracle(A, B, 1)


@settings(max_examples=40)
@given(st.data())
def test_prematch_symmetric_and_below_bottleneck(data):
    P = data.draw(chains(4))
    M, N = data.draw(interval_sums(P)), data.draw(interval_sums(P))
    Pm, Pn = minimal_resolution(M), minimal_resolution(N)
    pre = dist_prematch(Pm, Pn, slack=1)
    assert pre.as_tuple() == dist_prematch(Pn, Pm, slack=1).as_tuple()
    b = dist_bottleneck(Pm, Pn, N, slack=1, M=M)
    assert pre.lower <= b.upper
    if b.exact:
        assert pre.upper <= b.upper
    if b.upper_witness is not None:
        w = b.upper_witness
        assert verify_witness(w.source, w.targets, N) is not None


@settings(max_examples=30)
@given(st.data())
def test_self_distance_is_zero(data):
    P = data.draw(posets(max_size=5))
    M = data.draw(modules(P))
    C = minimal_resolution(M)
    b = dist_bottleneck(C, C, M)
    assert b.as_tuple() == (0, 0)
    assert b.lower_reason == "iso-test"


@pytest.mark.parametrize("a,b", [("chainM", "chainN"), ("gridM", "gridN"), ("stabM", "stabN"), ("nonisoM", "nonisoN")])
def test_corpus_symmetry(a, b):
    Pa, Pb = minimal_resolution(WS.module(a)), minimal_resolution(WS.module(b))
    assert dist_prematch(Pa, Pb).as_tuple() == dist_prematch(Pb, Pa).as_tuple()
    ab = dist_bottleneck(Pa, Pb, WS.module(b), M=WS.module(a))
    ba = dist_bottleneck(Pb, Pa, WS.module(a), M=WS.module(b))
    assert ab.as_tuple() == ba.as_tuple()


def test_different_alternating_sums():
    C2 = chain(2)
    A = minimal_resolution(interval_module(C2, [0, 1]))
    Z = minimal_resolution(interval_module(C2, [0, 1]).__class__(C2, [0, 0]))
    assert dist_prematch(A, Z).as_tuple() == (INF, INF)
    assert dist_bottleneck(A, Z, interval_module(C2, [0, 1]).__class__(C2, [0, 0])).as_tuple() == (INF, INF)


def test_chain_table_witness():
    Pm = minimal_resolution(WS.module("chainM"))
    w = verify_witness(Pm, named_targets(Pm, CHAIN_TABLE), WS.module("chainN"))
    assert w is not None and w.cost == ONE
    assert w.table() == [[("1", "1"), ("2", "2")], [("2", "1"), ("4", "4")]]


def test_luis_tables():
    E = luis_padded(WS)
    Z = WS.module("zero")
    assert E.point_names() == [["2", "3", "4"], ["3", "4", "5"]]
    with pytest.raises(OrderViolation) as err:
        transported_complex(E, named_targets(E, LUIS_B))
    assert err.value.degree == 0
    assert verify_witness(E, named_targets(E, LUIS_B), Z) is None
    assert verify_witness(E, named_targets(E, LUIS_B_PRIME), Z).cost == 3


def test_luis_search_finds_cost_two():
    M, Z = WS.module("luisM"), WS.module("zero")
    b = dist_bottleneck(minimal_resolution(M), minimal_resolution(Z), Z)
    assert b.as_tuple() == (ONE, Fraction(2))
    w = b.upper_witness
    assert w.source.point_names() == [["2"], ["5"]]
    assert w.table() == [[("2", "3")], [("5", "3")]]


def test_budget_exhaustion_leaves_bracket_open():
    M, Z = WS.module("luisM"), WS.module("zero")
    b = dist_bottleneck(minimal_resolution(M), minimal_resolution(Z), Z, config=SearchConfig(node_budget=5))
    assert b.lower == ONE and not b.exact


def test_identity_and_composition():
    Pm = minimal_resolution(WS.module("chainM"))
    w = verify_witness(Pm, named_targets(Pm, CHAIN_TABLE), WS.module("chainN"))
    idw = identity_witness(w.transported)
    comp = compose_witnesses(w, idw)
    assert comp.targets == w.targets and comp.cost == w.cost
    comp2 = compose_witnesses(identity_witness(Pm), w)
    assert comp2.targets == w.targets


def test_witness_dump_mentions_padding():
    M, N = WS.module("chainM"), WS.module("chainN")
    b = dist_bottleneck(minimal_resolution(M), minimal_resolution(N), N)
    text = b.upper_witness.dump()
    assert "padding: none" in text and "cost: 1" in text
    assert str(b) == "[1, 1]"
