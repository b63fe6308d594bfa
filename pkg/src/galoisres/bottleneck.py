"""Matchings between padded resolutions and bracketing of the bottleneck distance."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .module import PModule, find_isomorphism
from .poset import INF, Distance, Poset, fmt_distance
from .resolution import ConeSpec, ProjComplex, is_exact_positive, pad_tracked, realize


class OrderViolation(ValueError):
    def __init__(self, degree: int, row: int, col: int, msg: str):
        super().__init__(msg)
        self.degree, self.row, self.col = degree, row, col


@dataclass
class MatchingWitness:
    source: ProjComplex  # E, a resolution of M
    padding: list[ConeSpec]  # cones added to the minimal resolution of M (empty for external E)
    targets: list[list[int]]  # per degree, target point of each E summand
    cost: Distance
    transported: ProjComplex  # G: E's matrices placed at the target points
    origin: str = "search"

    def table(self) -> list[list[tuple[str, str]]]:
        P = self.source.poset
        return [
            [(P.names[x], P.names[y]) for x, y in zip(self.source.deg(i), self.targets[i])]
            for i in range(len(self.targets))
        ]

    def dump(self) -> str:
        P = self.source.poset
        lines = [f"witness ({self.origin})"]
        if self.origin == "search" or self.padding:
            pads = ", ".join(f"Cone({P.names[c.point]})[{c.shift}]" for c in self.padding) or "none"
            lines.append(f"  padding: {pads}")
        else:
            lines.append("  source complex supplied with the witness")
        for i in reversed(range(len(self.targets))):
            pairs = "  ".join(f"{a}->{b}" for a, b in self.table()[i])
            lines.append(f"  degree {i}: {pairs}")
        lines.append(f"  cost: {fmt_distance(self.cost)}")
        return "\n".join(lines)


@dataclass
class DistBracket:
    lower: Distance
    upper: Distance
    lower_reason: str
    upper_witness: MatchingWitness | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError(f"bracket lower {self.lower} exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def as_tuple(self) -> tuple[Distance, Distance]:
        return (self.lower, self.upper)

    def __str__(self) -> str:
        return f"[{fmt_distance(self.lower)}, {fmt_distance(self.upper)}]"


@dataclass
class SearchConfig:
    slack: int = 3
    node_budget: int = 3_000_000
    max_shift_extra: int = 1


# -- matchings ---------------------------------------------------------------


def assignment_cost(E: ProjComplex, targets: Sequence[Sequence[int]]) -> Distance:
    P = E.poset
    vals = [P.dist[x][y] for i, d in enumerate(E.degrees) for x, y in zip(d, targets[i])]
    return max(vals, default=Fraction(0))


def transported_complex(E: ProjComplex, targets: Sequence[Sequence[int]]) -> ProjComplex:
    P = E.poset
    if len(targets) < len(E) or any(len(targets[i]) != len(E.deg(i)) for i in range(len(E))):
        raise ValueError("assignment does not cover every summand")
    for i, m in enumerate(E.diffs):
        rows, cols = np.nonzero(m)
        for r, c in zip(rows, cols):
            y, x = targets[i][r], targets[i + 1][c]
            if not P.leq[y, x]:
                raise OrderViolation(
                    i, int(r), int(c),
                    f"degree {i} entry ({r},{c}): target {P.names[x]} is not above {P.names[y]}",
                )
    return ProjComplex(P, [list(targets[i]) for i in range(len(E))], E.diffs, check=False)


def resolves(G: ProjComplex, N: PModule) -> bool:
    if not is_exact_positive(G):
        return False
    H, _ = realize(G)
    if H.dims != N.dims:
        return False
    return find_isomorphism(H, N) is not None


def verify_witness(
    E: ProjComplex,
    targets: Sequence[Sequence[int]],
    N: PModule,
    padding: Sequence[ConeSpec] = (),
    origin: str = "given",
) -> MatchingWitness | None:
    try:
        G = transported_complex(E, targets)
    except OrderViolation:
        return None
    if not resolves(G, N):
        return None
    return MatchingWitness(E, list(padding), [list(t) for t in targets], assignment_cost(E, targets), G, origin)


def identity_witness(E: ProjComplex) -> MatchingWitness:
    return MatchingWitness(E, [], [list(d) for d in E.degrees], Fraction(0), E, "identity")


def reverse_witness(w: MatchingWitness) -> MatchingWitness:
    """G -> E at the same cost; E resolves the source module, so it is a valid target complex."""
    return MatchingWitness(w.transported, [], [list(d) for d in w.source.degrees], w.cost, w.source, "reversed")


def compose_witnesses(first: MatchingWitness, second: MatchingWitness) -> MatchingWitness:
    """Chain E -> G1 with a witness whose source is G1 (summand positions must agree)."""
    if [list(d) for d in second.source.degrees] != [list(d) for d in first.transported.degrees]:
        raise ValueError("second witness does not start at the first one's target complex")
    targets = [[second.targets[i][j] for j in range(len(t))] for i, t in enumerate(first.targets)]
    E = first.source
    return MatchingWitness(
        E, first.padding, targets, assignment_cost(E, targets), transported_complex(E, targets), "composed"
    )


# -- helpers -------------------------------------------------------------------


def positive_distances(P: Poset) -> list[Distance]:
    return [d for d in P.distances() if d > 0 and d != INF]


def smallest_positive(P: Poset) -> Distance:
    ds = positive_distances(P)
    return ds[0] if ds else INF


def _cone_counts(sizes_e: Sequence[int], sizes_n: Sequence[int]) -> list[int] | None:
    """Per-shift cone counts f with |E_i| = |N_i| + f_i + f_{i-1}, or None."""
    n = max(len(sizes_e), len(sizes_n))
    f, prev = [], 0
    for i in range(n):
        k = (sizes_e[i] if i < len(sizes_e) else 0) - (sizes_n[i] if i < len(sizes_n) else 0) - prev
        if k < 0:
            return None
        f.append(k)
        prev = k
    if prev != 0:
        return None
    return f[:-1] if f else f


def _balls(P: Poset, t: Distance) -> list[list[int]]:
    return [[y for y in range(len(P)) if P.dist[x][y] <= t] for x in range(len(P))]


def _paddings(P: Poset, pts: Sequence[int], shifts: int, slack: int) -> Iterable[list[ConeSpec]]:
    opts = [ConeSpec(x, s) for s in range(shifts) for x in pts]
    for k in range(slack + 1):
        for combo in itertools.combinations_with_replacement(range(len(opts)), k):
            yield [opts[j] for j in combo]


def _bipartite_perfect(left: Sequence[int], right: Sequence[int], P: Poset, t: Distance) -> bool:
    if len(left) != len(right):
        return False
    if not left:
        return True
    adj = np.array([[P.dist[x][y] <= t for y in right] for x in left], dtype=np.int8)
    m = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool(np.all(m >= 0))


# -- pre-matchings ---------------------------------------------------------------


def _prematch_feasible(
    E_degs: Sequence[Sequence[int]], Pn: ProjComplex, t: Distance, balls, slack: int, budget: list[int]
) -> list[ConeSpec] | None:
    sizes_e = [len(d) for d in E_degs]
    f = _cone_counts(sizes_e, Pn.size_vector())
    if f is None:
        return None
    near = sorted({y for d in E_degs for x in d for y in balls[x]})
    # choose cone points shift by shift
    per_shift = [list(itertools.combinations_with_replacement(near, k)) for k in f]
    for choice in itertools.product(*per_shift):
        budget[0] -= 1
        if budget[0] < 0:
            return None
        ok = True
        n = max(len(E_degs), len(Pn))
        for i in range(n):
            right = list(Pn.deg(i))
            if i < len(choice):
                right += list(choice[i])
            if i - 1 >= 0 and i - 1 < len(choice):
                right += list(choice[i - 1])
            left = list(E_degs[i]) if i < len(E_degs) else []
            if not _bipartite_perfect(left, right, Pn.poset, t):
                ok = False
                break
        if ok:
            return [ConeSpec(y, s) for s, pts in enumerate(choice) for y in pts]
    return None


def dist_prematch(Pm: ProjComplex, Pn: ProjComplex, slack: int = 3, config: SearchConfig | None = None) -> DistBracket:
    config = config or SearchConfig(slack=slack)
    P = Pm.poset
    same_alpha = Pm.alpha_hat() == Pn.alpha_hat()
    if Pm.alternating_sum() != Pn.alternating_sum():
        return DistBracket(INF, INF, "alpha-hat", notes=["alternating sums differ: no common padding"])
    lower = Fraction(0) if same_alpha else smallest_positive(P)
    reason = "alpha-hat"
    budget = [config.node_budget]
    shifts = max(len(Pm), len(Pn)) + config.max_shift_extra
    # a pre-matching reversed is a pre-matching, so both sides may take the capped cones
    for t in [Fraction(0)] + positive_distances(P):
        if t < lower:
            continue
        balls = _balls(P, t)
        near = sorted({y for d in Pm.degrees + Pn.degrees for x in d for y in balls[x]})
        for A, B, labels in ((Pm, Pn, "MN"), (Pn, Pm, "NM")):
            for cones in _paddings(P, near, shifts, config.slack):
                padded = pad_tracked(A, cones).complex
                got = _prematch_feasible(padded.degrees, B, t, balls, config.slack, budget)
                if budget[0] < 0:
                    return DistBracket(lower, INF, reason, notes=["node budget exhausted"])
                if got is not None:
                    notes = [
                        f"padding {side}: " + (", ".join(f"Cone({P.names[c.point]})[{c.shift}]" for c in cs) or "none")
                        for side, cs in sorted(zip(labels, (cones, got)))
                    ]
                    return DistBracket(lower, t, reason, notes=notes)
    return DistBracket(lower, INF, reason, notes=[f"no pre-matching within slack {config.slack}"])


# -- differential-compatible matchings ---------------------------------------------


class _Search:
    def __init__(self, E: ProjComplex, Pn: ProjComplex, N: PModule, t: Distance, balls, budget: list[int]):
        self.E, self.Pn, self.N, self.t = E, Pn, N, t
        self.P = E.poset
        self.balls = balls
        self.budget = budget
        self.n = max(len(E), len(Pn))
        self.targets = [[-1] * len(E.deg(i)) for i in range(self.n)]
        # nonzero entries: for degree i summand r, the columns c in degree i+1 with D_i[r,c] != 0
        self.up_nz = [[np.flatnonzero(E.diff(i)[r]).tolist() for r in range(len(E.deg(i)))] for i in range(self.n)]
        self.found: list[list[int]] | None = None
        self.best_key: tuple | None = None
        self.spent = 0

    def run(self) -> list[list[int]] | None:
        """Least (total displacement, targets read from degree 0 up) valid assignment."""
        self._degree(self.n - 1, Counter())
        return self.found

    def _degree(self, i: int, carry: Counter) -> bool:
        """carry = points of cones with shift i (occupying degrees i and i+1)."""
        if i < 0:
            if sum(carry.values()) == 0:
                return self._verify()
            return False
        need = Counter(self.Pn.deg(i)) + carry
        return self._summand(i, 0, Counter(), need)

    def _summand(self, i: int, r: int, got: Counter, need: Counter) -> bool:
        self.budget[0] -= 1
        if self.budget[0] < 0:
            return False
        deg = self.E.deg(i)
        if r == len(deg):
            if any(got[y] < k for y, k in need.items()):
                return False
            rest = got - need
            return self._degree(i - 1, rest)
        missing = sum(max(k - got[y], 0) for y, k in need.items())
        if missing > len(deg) - r:
            return False
        x = deg[r]
        for y in self.balls[x]:
            if self.best_key is not None and self.spent + self.P.dist[x][y] > self.best_key[0]:
                continue
            if any(not self.P.leq[y, self.targets[i + 1][c]] for c in self.up_nz[i][r]):
                continue
            self.targets[i][r] = y
            self.spent += self.P.dist[x][y]
            got[y] += 1
            self._summand(i, r + 1, got, need)
            self.spent -= self.P.dist[x][y]
            got[y] -= 1
            if got[y] == 0:
                del got[y]
        self.targets[i][r] = -1
        return False

    def _verify(self) -> bool:
        tg = [list(self.targets[i]) for i in range(len(self.E))]
        key = (self.spent, tuple(tuple(t) for t in tg))
        if self.best_key is not None and key >= self.best_key:
            return False
        G = ProjComplex(self.P, tg, self.E.diffs, check=False)
        if resolves(G, self.N):
            self.found, self.best_key = tg, key
            return True
        return False


def search_matching(
    E: ProjComplex, Pn: ProjComplex, N: PModule, t: Distance, budget: list[int]
) -> list[list[int]] | None:
    sizes_e = E.size_vector()
    if _cone_counts(sizes_e, Pn.size_vector()) is None:
        return None
    balls = _balls(E.poset, t)
    return _Search(E, Pn, N, t, balls, budget).run()


def dist_bottleneck(
    Pm: ProjComplex,
    Pn: ProjComplex,
    N: PModule,
    slack: int = 3,
    M: PModule | None = None,
    hints: Sequence[MatchingWitness] = (),
    config: SearchConfig | None = None,
) -> DistBracket:
    config = config or SearchConfig(slack=slack)
    P = Pm.poset
    if M is None:
        M, _ = realize(Pm)
    notes = [f"slack {config.slack}"]
    if Pm.alternating_sum() != Pn.alternating_sum():
        return DistBracket(INF, INF, "alpha-hat", notes=notes + ["alternating sums differ: no common padding"])
    iso = find_isomorphism(M, N) is not None
    if iso:
        lower, reason = Fraction(0), "iso-test"
    else:
        lower = smallest_positive(P)
        reason = "alpha-hat" if Pm.alpha_hat() != Pn.alpha_hat() else "iso-test"

    best: MatchingWitness | None = None
    for h in hints:
        if best is None or h.cost < best.cost:
            best = h
    if best is not None:
        notes.append(f"hint witness ({best.origin}) of cost {fmt_distance(best.cost)}")

    budget = [config.node_budget]
    # searching from the larger complex needs fewer cones; a witness found the
    # other way round is reversed so it always runs from M's side to N's
    directions = [(Pm, Pn, N, False), (Pn, Pm, M, True)]
    if sum(Pn.size_vector()) > sum(Pm.size_vector()):
        directions.reverse()
    for src, dst, target, backwards in directions:
        if best is not None and best.cost <= lower:
            break
        hit, exhausted = _scan(src, dst, target, lower, best, config, budget)
        if hit is not None:
            if backwards:
                pads = ", ".join(f"Cone({P.names[c.point]})[{c.shift}]" for c in hit.padding) or "none"
                notes.append(f"witness found from N's side (padding of N: {pads}) and reversed")
                hit = reverse_witness(hit)
            if best is None or hit.cost < best.cost:
                best = hit
        if exhausted:
            notes.append("node budget exhausted" + (" (search from N's side)" if backwards else ""))
            budget = [config.node_budget]
    upper = best.cost if best is not None else INF
    return DistBracket(lower, upper, reason, best, notes)


def _scan(
    Pm: ProjComplex,
    Pn: ProjComplex,
    N: PModule,
    lower: Distance,
    best: MatchingWitness | None,
    config: SearchConfig,
    budget: list[int],
) -> tuple[MatchingWitness | None, bool]:
    """Smallest threshold (below the current best) with a witness from padded Pm to N."""
    P = Pm.poset
    shifts = max(len(Pm), len(Pn)) + config.max_shift_extra
    for t in [Fraction(0)] + positive_distances(P):
        if t < lower:
            continue
        if best is not None and best.cost <= t:
            break
        balls = _balls(P, t)
        near = sorted({y for d in Pm.degrees + Pn.degrees for x in d for y in balls[x]})
        for cones in _paddings(P, near, shifts, config.slack):
            padded = pad_tracked(Pm, cones).complex
            tg = search_matching(padded, Pn, N, t, budget)
            if budget[0] < 0:
                return None, True
            if tg is not None:
                G = transported_complex(padded, tg)
                return MatchingWitness(padded, cones, tg, assignment_cost(padded, tg), G, "search"), False
    return None, False
