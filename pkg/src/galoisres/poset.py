"""Finite posets with extended metrics, monotone maps and Galois pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

INF = math.inf
TOP = "⊤"

Distance = Fraction | float


class PosetError(ValueError):
    pass


def as_distance(v) -> Distance:
    if isinstance(v, float) and math.isinf(v):
        return INF
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "∞", "+∞"):
        return INF
    return Fraction(v)


def fmt_distance(v: Distance) -> str:
    return "inf" if v == INF else str(v)


class Poset:
    """Immutable finite poset. Elements are addressed by name or by index."""

    __slots__ = ("names", "index", "leq", "covers", "dist", "_hash", "_up", "_down")

    def __init__(self, names: Sequence[str], leq: np.ndarray, dist: Sequence[Sequence[Distance]]):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise PosetError("duplicate element names")
        self.index = {n: i for i, n in enumerate(self.names)}
        n = len(self.names)
        leq = np.array(leq, dtype=bool).reshape(n, n)
        leq.flags.writeable = False
        self.leq = leq
        self.dist = tuple(tuple(as_distance(v) for v in row) for row in dist)
        self.covers = _hasse(leq)
        self._up = tuple(tuple(int(j) for j in np.flatnonzero(leq[i])) for i in range(n))
        self._down = tuple(tuple(int(j) for j in np.flatnonzero(leq[:, i])) for i in range(n))
        self._hash = hash((self.names, leq.tobytes(), self.dist))

    # -- basic access -------------------------------------------------
    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poset)
            and self._hash == other._hash
            and self.names == other.names
            and np.array_equal(self.leq, other.leq)
            and self.dist == other.dist
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Poset({len(self)} elements)"

    def idx(self, x: str | int) -> int:
        if isinstance(x, (int, np.integer)):
            return int(x)
        try:
            return self.index[x]
        except KeyError:
            raise PosetError(f"unknown element {x!r}") from None

    def le(self, a, b) -> bool:
        return bool(self.leq[self.idx(a), self.idx(b)])

    def d(self, a, b) -> Distance:
        return self.dist[self.idx(a)][self.idx(b)]

    def up(self, i: int) -> tuple[int, ...]:
        return self._up[i]

    def down(self, i: int) -> tuple[int, ...]:
        return self._down[i]

    def lower_covers(self, i: int) -> list[int]:
        return [a for a, b in self.covers if b == i]

    def upper_covers(self, i: int) -> list[int]:
        return [b for a, b in self.covers if a == i]

    def distances(self) -> list[Distance]:
        return sorted({v for row in self.dist for v in row})

    def hasse_path(self, a: int, b: int) -> list[int]:
        """A chain of covers a = c0 < c1 < ... < ck = b (requires a <= b)."""
        if not self.leq[a, b]:
            raise PosetError(f"{self.names[a]} is not below {self.names[b]}")
        path = [a]
        while path[-1] != b:
            cur = path[-1]
            nxt = next(c for c in self.upper_covers(cur) if self.leq[c, b])
            path.append(nxt)
        return path

    def minimal(self, members: Iterable[int]) -> list[int]:
        s = sorted(set(members))
        return [x for x in s if not any(y != x and self.leq[y, x] for y in s)]

    def maximal(self, members: Iterable[int]) -> list[int]:
        s = sorted(set(members))
        return [x for x in s if not any(y != x and self.leq[x, y] for y in s)]

    def linear_extension(self) -> list[int]:
        return sorted(range(len(self)), key=lambda i: (len(self._down[i]), i))


def _hasse(leq: np.ndarray) -> tuple[tuple[int, int], ...]:
    n = leq.shape[0]
    out = []
    for a in range(n):
        for b in range(n):
            if a == b or not leq[a, b]:
                continue
            if not any(c not in (a, b) and leq[a, c] and leq[c, b] for c in range(n)):
                out.append((a, b))
    return tuple(out)


def _closure(n: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    leq = np.eye(n, dtype=bool)
    for a, b in pairs:
        leq[a, b] = True
    for k in range(n):
        leq |= leq[:, [k]] & leq[[k], :]
    return leq


def _check_order(leq: np.ndarray, names: Sequence[str]) -> None:
    n = leq.shape[0]
    for a in range(n):
        for b in range(a + 1, n):
            if leq[a, b] and leq[b, a]:
                raise PosetError(f"cycle detected through {names[a]} and {names[b]}")


def check_metric(names: Sequence[str], dist: Sequence[Sequence[Distance]]) -> None:
    n = len(names)
    for a in range(n):
        if dist[a][a] != 0:
            raise PosetError(f"metric: d({names[a]},{names[a]}) != 0")
        for b in range(n):
            if dist[a][b] != dist[b][a]:
                raise PosetError(f"metric: not symmetric at ({names[a]},{names[b]})")
            if a != b and not dist[a][b] > 0:
                raise PosetError(f"metric: d({names[a]},{names[b]}) must be positive")
            if dist[a][b] < 0:
                raise PosetError(f"metric: negative at ({names[a]},{names[b]})")
    for a, b, c in product(range(n), repeat=3):
        if dist[a][c] > dist[a][b] + dist[b][c]:
            raise PosetError(
                f"metric: triangle inequality fails for {names[a]},{names[b]},{names[c]}"
            )


def coordinates(name: str) -> tuple[int, ...]:
    """Grid coordinates from names like '12' or '(1,2)' or '1,2'."""
    s = name.strip("()")
    if "," in s:
        return tuple(int(t) for t in s.split(","))
    return tuple(int(ch) for ch in s)


def _hasse_path_metric(n: int, covers) -> list[list[Distance]]:
    adj = [[] for _ in range(n)]
    for a, b in covers:
        adj[a].append(b)
        adj[b].append(a)
    out = []
    for s in range(n):
        seen = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in seen:
                        seen[v] = seen[u] + 1
                        nxt.append(v)
            frontier = nxt
        out.append([Fraction(seen[t]) if t in seen else INF for t in range(n)])
    return out


MetricSpec = str | Mapping | Callable | Sequence


def from_covers(
    names: Sequence[str],
    cover_pairs: Iterable[tuple[str, str]],
    metric: MetricSpec = "hasse_path",
    top_extended: bool = False,
) -> Poset:
    """Build a poset from generating relations a < b and a metric recipe.

    metric is "hasse_path", "linf_product" (names parsed as grid coordinates),
    a full table (list of rows), a dict {(a, b): d}, or a callable d(a, b).
    top_extended appends a top element at infinite distance.
    """
    names = list(names)
    idx = {n: i for i, n in enumerate(names)}
    if len(idx) != len(names):
        raise PosetError("duplicate element names")
    try:
        pairs = [(idx[a], idx[b]) for a, b in cover_pairs]
    except KeyError as e:
        raise PosetError(f"unknown element {e.args[0]!r} in cover list") from None
    n = len(names)
    leq = _closure(n, pairs)
    _check_order(leq, names)
    if metric == "hasse_path":
        dist = _hasse_path_metric(n, _hasse(leq))
    elif metric == "linf_product":
        co = [coordinates(x) for x in names]
        dist = [[Fraction(max((abs(p - q) for p, q in zip(a, b)), default=0)) for b in co] for a in co]
    elif callable(metric):
        dist = [[as_distance(metric(a, b)) for b in names] for a in names]
    elif isinstance(metric, Mapping):
        dist = [[Fraction(0) if a == b else None for b in names] for a in names]
        for (a, b), v in metric.items():
            dist[idx[a]][idx[b]] = as_distance(v)
            dist[idx[b]][idx[a]] = as_distance(v)
        for a in range(n):
            for b in range(n):
                if dist[a][b] is None:
                    raise PosetError(f"metric table misses ({names[a]},{names[b]})")
    else:
        dist = [[as_distance(v) for v in row] for row in metric]
        if len(dist) != n or any(len(r) != n for r in dist):
            raise PosetError("metric table has the wrong shape")
    check_metric(names, dist)
    P = Poset(names, leq, dist)
    return augment(P) if top_extended else P


def from_relation(names: Sequence[str], leq: np.ndarray, dist) -> Poset:
    leq = np.asarray(leq, dtype=bool)
    _check_order(leq, names)
    closed = _closure(len(names), zip(*np.nonzero(leq)))
    if not np.array_equal(closed, leq | np.eye(len(names), dtype=bool)):
        raise PosetError("relation is not transitive")
    if dist == "hasse_path":
        dist = _hasse_path_metric(len(names), _hasse(closed))
    return Poset(names, closed, dist)


def chain(n: int, start: int = 1) -> Poset:
    names = [str(start + k) for k in range(n)]
    return from_covers(names, zip(names, names[1:]), "hasse_path")


def grid(rows: int, cols: int) -> Poset:
    """rows x cols grid named 'ij' (1-based) with the L-infinity metric."""
    if rows > 9 or cols > 9:
        raise PosetError("grid names use one digit per coordinate")
    names = [f"{i}{j}" for i in range(1, rows + 1) for j in range(1, cols + 1)]
    covers = []
    for i in range(1, rows + 1):
        for j in range(1, cols + 1):
            if i < rows:
                covers.append((f"{i}{j}", f"{i + 1}{j}"))
            if j < cols:
                covers.append((f"{i}{j}", f"{i}{j + 1}"))
    return from_covers(names, covers, "linf_product")


# -- maps ---------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneMap:
    source: Poset
    target: Poset
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.source):
            raise PosetError("map table does not cover the source")
        S, T, v = self.source, self.target, self.values
        for a, b in S.covers:
            if not T.leq[v[a], v[b]]:
                raise PosetError(
                    f"map is not monotone: {S.names[a]} <= {S.names[b]} but "
                    f"{T.names[v[a]]} !<= {T.names[v[b]]}"
                )

    @classmethod
    def from_table(cls, source: Poset, target: Poset, table: Mapping[str, str] | Callable) -> "MonotoneMap":
        if callable(table):
            vals = tuple(target.idx(table(x)) for x in source.names)
        else:
            missing = [x for x in source.names if x not in table]
            if missing:
                raise PosetError(f"map table misses {missing[0]!r}")
            vals = tuple(target.idx(table[x]) for x in source.names)
        return cls(source, target, vals)

    @classmethod
    def identity(cls, P: Poset) -> "MonotoneMap":
        return cls(P, P, tuple(range(len(P))))

    def __call__(self, x: str) -> str:
        return self.target.names[self.values[self.source.idx(x)]]

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def then(self, other: "MonotoneMap") -> "MonotoneMap":
        """other ∘ self."""
        if other.source != self.target:
            raise PosetError("maps are not composable")
        return MonotoneMap(self.source, other.target, tuple(other.values[v] for v in self.values))

    def is_identity(self) -> bool:
        return self.source == self.target and self.values == tuple(range(len(self.source)))

    def table(self) -> dict[str, str]:
        return {self.source.names[i]: self.target.names[v] for i, v in enumerate(self.values)}

    def displacement(self) -> Distance:
        """max_x d(x, map(x)) for an endomap."""
        if self.source != self.target:
            raise PosetError("displacement needs an endomap")
        return max((self.source.dist[i][v] for i, v in enumerate(self.values)), default=Fraction(0))


def compose(*maps: MonotoneMap) -> MonotoneMap:
    """compose(f, g, h) = f ∘ g ∘ h."""
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = out.then(m)
    return out


def is_galois_pair(f: MonotoneMap, g: MonotoneMap) -> tuple[bool, bool]:
    """(f ⊣ g is a Galois connection, and additionally f∘g = id)."""
    if f.source != g.target or f.target != g.source:
        raise PosetError("source/target mismatch for a Galois pair")
    Q, P = f.source, f.target
    fv = np.array(f.values, dtype=np.intp)
    gv = np.array(g.values, dtype=np.intp)
    lhs = P.leq[fv, :]  # [u, x]: f(u) <= x
    rhs = Q.leq[:, gv]  # [u, x]: u <= g(x)
    conn = bool(np.array_equal(lhs, rhs))
    ins = conn and all(fv[gv[x]] == x for x in range(len(P)))
    return conn, ins


@dataclass(frozen=True)
class GaloisPair:
    f: MonotoneMap
    g: MonotoneMap
    insertion: bool

    @classmethod
    def of(cls, f: MonotoneMap, g: MonotoneMap) -> "GaloisPair":
        conn, ins = is_galois_pair(f, g)
        if not conn:
            raise PosetError("maps do not form a Galois connection")
        return cls(f, g, ins)


def right_adjoint(f: MonotoneMap) -> MonotoneMap | None:
    Q, P = f.source, f.target
    vals = []
    for x in range(len(P)):
        s = [u for u in range(len(Q)) if P.leq[f.values[u], x]]
        tops = [u for u in s if all(Q.leq[w, u] for w in s)]
        if not tops:
            return None
        vals.append(tops[0])
    try:
        g = MonotoneMap(P, Q, tuple(vals))
    except PosetError:
        return None
    return g if is_galois_pair(f, g)[0] else None


# -- augmentation and interval posets -----------------------------------


@lru_cache(maxsize=256)
def augment(P: Poset) -> Poset:
    if TOP in P.index:
        raise PosetError("poset already has an element named ⊤")
    n = len(P)
    names = list(P.names) + [TOP]
    leq = np.zeros((n + 1, n + 1), dtype=bool)
    leq[:n, :n] = P.leq
    leq[:, n] = True
    dist = [list(row) + [INF] for row in P.dist] + [[INF] * n + [Fraction(0)]]
    return Poset(names, leq, dist)


def augment_map(f: MonotoneMap) -> MonotoneMap:
    S, T = augment(f.source), augment(f.target)
    return MonotoneMap(S, T, tuple(f.values) + (len(f.target),))


def pair_name(x: str, y: str) -> str:
    return f"({x},{y})"


@lru_cache(maxsize=256)
def interval_poset(S: Poset) -> Poset:
    pairs = [(x, y) for x in range(len(S)) for y in range(len(S)) if S.leq[x, y]]
    names = [pair_name(S.names[x], S.names[y]) for x, y in pairs]
    a = np.array([p[0] for p in pairs], dtype=np.intp)
    b = np.array([p[1] for p in pairs], dtype=np.intp)
    leq = S.leq[a][:, a] & S.leq[b][:, b]
    dist = [[max(S.dist[x1][x2], S.dist[y1][y2]) for (x2, y2) in pairs] for (x1, y1) in pairs]
    return Poset(names, leq, dist)


def interval_pairs(S: Poset) -> list[tuple[int, int]]:
    return [(x, y) for x in range(len(S)) for y in range(len(S)) if S.leq[x, y]]


def int_map(f: MonotoneMap) -> MonotoneMap:
    """Int(f̄): Int(augment(source)) -> Int(augment(target))."""
    fb = augment_map(f)
    S, T = fb.source, fb.target
    IS, IT = interval_poset(S), interval_poset(T)
    vals = tuple(
        IT.index[pair_name(T.names[fb.values[x]], T.names[fb.values[y]])] for x, y in interval_pairs(S)
    )
    return MonotoneMap(IS, IT, vals)


# -- translations and couplings ------------------------------------------


@dataclass(frozen=True)
class TranslationQuotient:
    Q: Poset
    f: MonotoneMap
    g: MonotoneMap
    h: MonotoneMap
    i: MonotoneMap


def is_translation(sigma: MonotoneMap) -> bool:
    P = sigma.source
    return sigma.target == P and all(P.leq[x, sigma.values[x]] for x in range(len(P)))


def translation_quotient(P: Poset, sigma: MonotoneMap) -> TranslationQuotient:
    if sigma.source != P or not is_translation(sigma):
        raise PosetError("sigma is not a translation of P (x <= sigma(x) must hold)")
    n = len(P)
    s = sigma.values
    fixed = [s[x] == x for x in range(n)]
    # elements: all L copies in P order, then the unidentified R copies
    reps: list[list[tuple[int, int]]] = []
    names, left, right = [], [0] * n, [0] * n
    for x in range(n):
        left[x] = len(reps)
        if fixed[x]:
            reps.append([(x, 0), (x, 1)])
            names.append(P.names[x])
            right[x] = left[x]
        else:
            reps.append([(x, 0)])
            names.append(f"{P.names[x]}_L")
    for x in range(n):
        if not fixed[x]:
            right[x] = len(reps)
            reps.append([(x, 1)])
            names.append(f"{P.names[x]}_R")

    def rel(a, b):
        (x, i), (y, j) = a, b
        return bool(P.leq[x, y]) if i == j else bool(P.leq[s[x], y])

    m = len(reps)
    leq = np.array([[any(rel(a, b) for a in reps[u] for b in reps[v]) for v in range(m)] for u in range(m)])
    Q = from_relation(names, leq, "hasse_path")
    fv, hv = [0] * m, [0] * m
    for u in range(m):
        x, side = reps[u][0]
        if side == 0:
            fv[u], hv[u] = x, s[x]
        else:
            fv[u], hv[u] = s[x], x
    f = MonotoneMap(Q, P, tuple(fv))
    h = MonotoneMap(Q, P, tuple(hv))
    g = MonotoneMap(P, Q, tuple(left))
    i = MonotoneMap(P, Q, tuple(right))
    return TranslationQuotient(Q, f, g, h, i)


@dataclass(frozen=True)
class PullbackPoset:
    R: Poset
    pi1: MonotoneMap
    pi2: MonotoneMap
    iota1: MonotoneMap
    iota2: MonotoneMap
    pairs: tuple[tuple[int, int], ...]


def pullback_poset(
    h1: MonotoneMap, f2: MonotoneMap, i1: MonotoneMap | None = None, g2: MonotoneMap | None = None
) -> PullbackPoset:
    Q1, Q2 = h1.source, f2.source
    if h1.target != f2.target:
        raise PosetError("pullback legs have different targets")
    i1 = i1 or right_adjoint(h1)
    g2 = g2 or right_adjoint(f2)
    if i1 is None or g2 is None:
        raise PosetError("adjoints unavailable for the pullback embeddings")
    pairs = [(a, b) for a in range(len(Q1)) for b in range(len(Q2)) if h1.values[a] == f2.values[b]]
    pos = {p: k for k, p in enumerate(pairs)}
    names = [f"{Q1.names[a]}|{Q2.names[b]}" for a, b in pairs]
    a = np.array([p[0] for p in pairs], dtype=np.intp)
    b = np.array([p[1] for p in pairs], dtype=np.intp)
    leq = Q1.leq[a][:, a] & Q2.leq[b][:, b]
    R = from_relation(names, leq, "hasse_path")
    pi1 = MonotoneMap(R, Q1, tuple(int(v) for v in a))
    pi2 = MonotoneMap(R, Q2, tuple(int(v) for v in b))
    iota1 = MonotoneMap(Q1, R, tuple(pos[(q, g2.values[h1.values[q]])] for q in range(len(Q1))))
    iota2 = MonotoneMap(Q2, R, tuple(pos[(i1.values[f2.values[q]], q)] for q in range(len(Q2))))
    return PullbackPoset(R, pi1, pi2, iota1, iota2, tuple(pairs))


# -- generalized intervals ------------------------------------------------


@dataclass(frozen=True)
class GenInterval:
    members: frozenset[int]
    mins: tuple[int, ...]
    maxs: tuple[int, ...]

    def names(self, P: Poset) -> tuple[list[str], list[str], list[str]]:
        return (
            [P.names[i] for i in sorted(self.members)],
            [P.names[i] for i in self.mins],
            [P.names[i] for i in self.maxs],
        )


def is_convex(P: Poset, members: Iterable[int]) -> bool:
    s = set(members)
    for a in s:
        for b in s:
            if P.leq[a, b]:
                for c in range(len(P)):
                    if c not in s and P.leq[a, c] and P.leq[c, b]:
                        return False
    return True


def is_connected(P: Poset, members: Iterable[int]) -> bool:
    s = set(members)
    if not s:
        return False
    start = next(iter(s))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for a, b in P.covers:
            for v, w in ((a, b), (b, a)):
                if v == u and w in s and w not in seen:
                    seen.add(w)
                    stack.append(w)
    return seen == s


def interval(P: Poset, mins: Iterable[str], maxs: Iterable[str]) -> GenInterval:
    """[A, B] = elements above some of A and below some of B."""
    A = [P.idx(a) for a in mins]
    B = [P.idx(b) for b in maxs]
    members = frozenset(
        x for x in range(len(P)) if any(P.leq[a, x] for a in A) and any(P.leq[x, b] for b in B)
    )
    return make_interval(P, members)


def make_interval(P: Poset, members: Iterable[int]) -> GenInterval:
    members = frozenset(members)
    if not is_connected(P, members) or not is_convex(P, members):
        raise PosetError("set is not a connected convex subset")
    return GenInterval(members, tuple(P.minimal(members)), tuple(P.maximal(members)))


def gen_intervals(P: Poset) -> list[GenInterval]:
    n = len(P)
    nbrs = [set() for _ in range(n)]
    for a, b in P.covers:
        nbrs[a].add(b)
        nbrs[b].add(a)
    found: list[frozenset[int]] = []

    # enumerate connected sets whose least index is v (ESU-style extension)
    def grow(sub: frozenset[int], ext: set[int], v: int):
        found.append(sub)
        ext = set(ext)
        while ext:
            w = ext.pop()
            new_ext = ext | {u for u in nbrs[w] if u > v and u not in sub and not any(u in nbrs[s] for s in sub)}
            grow(sub | {w}, new_ext, v)

    for v in range(n):
        grow(frozenset([v]), {u for u in nbrs[v] if u > v}, v)
    out = [
        GenInterval(s, tuple(P.minimal(s)), tuple(P.maximal(s))) for s in found if is_convex(P, s)
    ]
    out.sort(key=lambda I: (len(I.members), sorted(I.members)))
    return out
