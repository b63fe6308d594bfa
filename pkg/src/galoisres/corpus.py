"""Bundled worked examples and the golden checks run by ``galoisres verify-examples``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Callable

from .bottleneck import dist_bottleneck, dist_prematch, verify_witness
from .io import Workspace, loads
from .module import PModule, find_isomorphism
from .persistence import kernel_module, persistence_diagram, stability_report
from .resolution import ConeSpec, minimal_resolution, pad, realize, strip
from .transport import coupling_from_translation, gt_upper, gt_zero, pullback_matching

CORPUS_FILES = ("chain.gpm", "grid.gpm", "stability.gpm", "luis.gpm", "noniso.gpm")


def load_corpus() -> Workspace:
    ws = Workspace()
    for name in CORPUS_FILES:
        text = resources.files("galoisres").joinpath("data", name).read_text(encoding="utf-8")
        ws.merge(loads(text, name, ws))
    return ws


def corpus_text(name: str) -> str:
    return resources.files("galoisres").joinpath("data", name).read_text(encoding="utf-8")


# -- worked-example tables ---------------------------------------------------


def named_targets(E, table: list[dict[str, list[str]] | list[str]]) -> list[list[int]]:
    """Per degree, the target names listed in E's summand order."""
    P = E.poset
    return [[P.idx(t) for t in row] for row in table]


def luis_padded(ws: Workspace):
    M = ws.module("luisM")
    P = M.poset
    Pm = minimal_resolution(M)
    return pad(Pm, [ConeSpec(P.idx("3"), 0), ConeSpec(P.idx("4"), 0)])


# E summand order after padding: degree 0 = [2, 3, 4], degree 1 = [3, 4, 5]
LUIS_B_PRIME = [["2", "3", "4"], ["3", "4", "2"]]
LUIS_B = [["2", "3", "4"], ["2", "3", "4"]]
# minimal resolution of chainM: degree 0 = [1, 2], degree 1 = [2, 4]
CHAIN_TABLE = [["1", "2"], ["1", "4"]]
# 2D example: the transported complex, degree by degree
GRID_F_PRIME = [["12", "22"], ["12", "22", "33"], ["22"]]


# -- golden checks --------------------------------------------------------------


@dataclass
class Golden:
    name: str
    ok: bool
    detail: str
    known_discrepancy: bool = False


def _dims_on(K: PModule, names: dict[str, int]) -> bool:
    P = K.poset
    want = [0] * len(P)
    for n, d in names.items():
        want[P.idx(n)] = d
    return list(K.dims) == want


CHAIN_KM = {"(1,2)": 1, "(1,3)": 1, "(1,4)": 1, "(1,⊤)": 1, "(2,4)": 1, "(2,⊤)": 1, "(3,4)": 1, "(3,⊤)": 1}
CHAIN_KN = {"(2,4)": 1, "(2,⊤)": 1, "(3,4)": 1, "(3,⊤)": 1}
GRID_KM1 = {f"(12,{y})": 1 for y in ("13", "23", "33", "22", "32", "⊤")}
GRID_KM2 = {p: 1 for p in ("(21,⊤)", "(31,⊤)", "(21,23)", "(21,33)", "(31,33)", "(21,22)", "(21,32)", "(31,32)")}
GRID_KN = {p: 1 for p in ("(23,⊤)", "(23,33)", "(22,⊤)", "(32,⊤)", "(22,33)", "(32,33)")}


def golden_checks(ws: Workspace | None = None) -> list[Golden]:
    ws = ws or load_corpus()
    out: list[Golden] = []

    def add(name: str, fn: Callable[[], tuple[bool, str]], known: bool = False):
        try:
            ok, detail = fn()
        except Exception as e:  # a crash is a mismatch, reported with its message
            ok, detail = False, f"error: {e}"
        out.append(Golden(name, ok, detail, known))

    one = Fraction(1)

    def gtd_chain():
        M, N = ws.module("chainM"), ws.module("chainN")
        r = gt_upper(M, N, [ws.map("shift4")])
        z = gt_zero(M, N)
        return r.bound == one and not z, f"gt upper {r.bound}, iso {z}"

    def gtd_grid():
        r = gt_upper(ws.module("gridM"), ws.module("gridN"), [ws.map("diag33")])
        return r.bound == one, f"gt upper {r.bound}"

    def bneck_chain():
        M, N = ws.module("chainM"), ws.module("chainN")
        Pm, Pn = minimal_resolution(M), minimal_resolution(N)
        b = dist_bottleneck(Pm, Pn, N)
        w = verify_witness(Pm, named_targets(Pm, CHAIN_TABLE), N)
        return b.as_tuple() == (one, one) and w is not None and w.cost == one, f"bracket {b}"

    def bneck_grid():
        M, N = ws.module("gridM"), ws.module("gridN")
        b = dist_bottleneck(minimal_resolution(M), minimal_resolution(N), N)
        G = b.upper_witness.transported.point_names() if b.upper_witness else None
        return b.as_tuple() == (one, one) and G == GRID_F_PRIME, f"bracket {b}, G {G}"

    def stab_thm():
        M, N = ws.module("stabM"), ws.module("stabN")
        b = dist_bottleneck(minimal_resolution(M), minimal_resolution(N), N)
        c = coupling_from_translation(M.poset, ws.map("const2"), M, N, "kan")
        w = pullback_matching(c)
        return b.as_tuple() == (one, one) and w.cost == one, f"bracket {b}, pullback matching cost {w.cost}"

    def luis():
        M, Z = ws.module("luisM"), ws.module("zero")
        pre = dist_prematch(minimal_resolution(M), minimal_resolution(Z))
        E = luis_padded(ws)
        good = verify_witness(E, named_targets(E, LUIS_B_PRIME), Z)
        bad = verify_witness(E, named_targets(E, LUIS_B), Z)
        ok = pre.upper == one and pre.lower == one and good is not None and good.cost == 3 and bad is None
        return ok, f"prematch {pre}, B' cost {good.cost if good else None}, B valid {bad is not None}"

    def persistence_chain():
        M, N = ws.module("chainM"), ws.module("chainN")
        KM, KN = kernel_module(M).module, kernel_module(N).module
        rM, _ = persistence_diagram(M)
        rN, _ = persistence_diagram(N)
        rep = stability_report(M, N, [ws.map("shift4")])
        ok = (
            _dims_on(KM, CHAIN_KM)
            and _dims_on(KN, CHAIN_KN)
            and rM.point_names() == [["(1,2)", "(2,4)"], ["(2,2)", "(4,4)"]]
            and rN.point_names() == [["(2,4)"], ["(4,4)"]]
            and rep.bracket.as_tuple() == (one, one)
            and rep.gt.bound == one
            and rep.ok
        )
        return ok, f"bracket {rep.bracket}, gt {rep.gt.bound}"

    def kernel_grid():
        M1, M2, N = ws.module("gridM1"), ws.module("gridM2"), ws.module("gridN")
        ok = all(_dims_on(kernel_module(X).module, d) for X, d in ((M1, GRID_KM1), (M2, GRID_KM2), (N, GRID_KN)))
        rep = stability_report(ws.module("gridM"), N, [ws.map("diag33")])
        ok = ok and rep.bracket.as_tuple() == (one, one) and rep.gt.bound == one and rep.ok
        return ok, f"bracket {rep.bracket}, gt {rep.gt.bound}"

    def kernel_grid_summands():
        r, _ = persistence_diagram(ws.module("gridM1"))
        want = [["(12,13)", "(12,22)"], ["(12,23)", "(13,13)", "(32,32)"], ["(33,33)"]]
        got = [sorted(d) for d in r.point_names()]
        return got == [sorted(d) for d in want], f"computed {got}"

    def noniso():
        M, N = ws.module("nonisoM"), ws.module("nonisoN")
        Pm, Pn = minimal_resolution(M), minimal_resolution(N)
        pre = dist_prematch(Pm, Pn)
        iso = find_isomorphism(realize(Pm)[0], realize(Pn)[0]) is not None
        distinct = not strip(Pm).equals(strip(Pn))
        return pre.upper == 0 and pre.lower == 0 and not iso and distinct, f"prematch {pre}, iso {iso}"

    add("gtd-chain: dGT = 1", gtd_chain)
    add("gtd-2d: dGT = 1", gtd_grid)
    add("bneck-chain: dist_B = 1 with the reference table", bneck_chain)
    add("bneck-2d: dist_B = 1, transported complex F'", bneck_grid)
    add("stability-thm: dist_B = 1, pullback matching cost 1", stab_thm)
    add("Luis: dist'_B = 1, B' cost 3, B incompatible", luis)
    add("persistence-chain: K dims, diagrams, 1 <= 1 <= 1", persistence_chain)
    add("K(M)-2D: kernel dims, bracket, stability equality", kernel_grid)
    add("K(M)-2D: expected summands of K^{M1}", kernel_grid_summands, known=True)
    add("noniso: dist'_B = 0 with non-isomorphic modules", noniso)
    return out
