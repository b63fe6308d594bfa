"""Line-oriented workspace files.

A file is a sequence of sections::

    [settings]
    prime = 32003
    slack = 3

    [poset P]
    elements = 1 2 3 4
    covers = 1<2 2<3 3<4

    [metric P]
    kind = hasse_path          # or linf_product, or one "row x = ..." line per element

    [map sigma: P -> P]
    1 = 2

    [module M: P]
    dim 1 = 1
    arrow 1 2 = 1 0 / 0 1      # rows separated by '/'
    interval = 2 3             # adds the interval module on these members

    [coupling C]
    apex = Q
    f = ...  g = ...  h = ...  i = ...   (one per line, naming maps)
    gamma = G
    M = A
    N = B

Matrix entries are integers reduced mod p. ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import field as F
from .module import ModuleError, PModule, direct_sum, interval_module
from .poset import INF, MonotoneMap, Poset, PosetError, fmt_distance, from_covers, make_interval
from .transport import CouplingError, _make


class LoadError(ValueError):
    def __init__(self, source: str, line: int, message: str):
        super().__init__(f"{source}:{line}: {message}")
        self.source, self.line, self.message = source, line, message


@dataclass
class Workspace:
    prime: int = F.DEFAULT_PRIME
    slack: int = 3
    posets: dict[str, Poset] = field(default_factory=dict)
    metric_kinds: dict[str, str] = field(default_factory=dict)
    covers: dict[str, list[tuple[str, str]]] = field(default_factory=dict)
    maps: dict[str, MonotoneMap] = field(default_factory=dict)
    modules: dict[str, PModule] = field(default_factory=dict)
    couplings: dict = field(default_factory=dict)
    coupling_refs: dict[str, dict[str, str]] = field(default_factory=dict)
    explicit_settings: bool = False

    def poset_name(self, P: Poset) -> str:
        for k, v in self.posets.items():
            if v is P or v == P:
                return k
        raise KeyError("poset not registered")

    def module(self, name: str) -> PModule:
        if name not in self.modules:
            raise KeyError(f"unknown module {name!r}")
        return self.modules[name]

    def map(self, name: str) -> MonotoneMap:
        if name not in self.maps:
            raise KeyError(f"unknown map {name!r}")
        return self.maps[name]

    def merge(self, other: "Workspace") -> None:
        for attr in ("posets", "metric_kinds", "covers", "maps", "modules", "couplings", "coupling_refs"):
            mine, theirs = getattr(self, attr), getattr(other, attr)
            for k, v in theirs.items():
                if k in mine and attr in ("posets", "maps", "modules") and not _same(mine[k], v):
                    raise ValueError(f"name {k!r} defined twice with different content")
                mine[k] = v
        if other.explicit_settings:
            self.prime, self.slack, self.explicit_settings = other.prime, other.slack, True


def _same(a, b) -> bool:
    if isinstance(a, PModule):
        return a.equals(b)
    return a == b


_HEADER = re.compile(r"^\[(\w+)(?:\s+(.*))?\]$")


@dataclass
class _Section:
    kind: str
    arg: str
    line: int
    body: list[tuple[int, str]]


def _sections(text: str, source: str) -> list[_Section]:
    out: list[_Section] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            out.append(_Section(m.group(1), (m.group(2) or "").strip(), no, []))
        elif line.startswith("["):
            raise LoadError(source, no, f"malformed section header {line!r}")
        elif not out:
            raise LoadError(source, no, "content before the first section")
        else:
            out[-1].body.append((no, line))
    return out


def _kv(source: str, no: int, line: str) -> tuple[str, str]:
    if "=" not in line:
        raise LoadError(source, no, f"expected 'key = value', got {line!r}")
    k, v = line.split("=", 1)
    return k.strip(), v.strip()


def _matrix(source: str, no: int, text: str, rows: int, cols: int) -> np.ndarray:
    try:
        data = [[int(t) for t in r.split()] for r in text.split("/")] if text.strip() else []
    except ValueError:
        raise LoadError(source, no, f"matrix entries must be integers: {text!r}") from None
    if rows == 0 or cols == 0:
        if any(data_row for data_row in data):
            raise LoadError(source, no, f"matrix should be {rows}x{cols}")
        return F.zeros(rows, cols)
    if len(data) != rows or any(len(r) != cols for r in data):
        raise LoadError(source, no, f"matrix should be {rows}x{cols}")
    return F.mat(data)


def _distance(source: str, no: int, t: str):
    if t in ("inf", "∞"):
        return INF
    try:
        return Fraction(t)
    except ValueError:
        raise LoadError(source, no, f"bad distance {t!r}") from None


def loads(text: str, source: str = "<string>", base: Workspace | None = None) -> Workspace:
    ws = Workspace()
    known = base or Workspace()
    secs = _sections(text, source)

    def lookup_poset(name: str, no: int) -> Poset:
        for w in (ws, known):
            if name in w.posets:
                return w.posets[name]
        raise LoadError(source, no, f"unknown poset {name!r}")

    def lookup(kind: str, name: str, no: int):
        for w in (ws, known):
            d = getattr(w, kind)
            if name in d:
                return d[name]
        raise LoadError(source, no, f"unknown {kind[:-1]} {name!r}")

    metrics = {s.arg: s for s in secs if s.kind == "metric"}
    for s in secs:
        if s.kind == "settings":
            ws.explicit_settings = True
            for no, line in s.body:
                k, v = _kv(source, no, line)
                try:
                    val = int(v)
                except ValueError:
                    raise LoadError(source, no, f"{k} must be an integer") from None
                if k == "prime":
                    try:
                        F.set_prime(val)
                    except ValueError as e:
                        raise LoadError(source, no, str(e)) from None
                    ws.prime = val
                elif k == "slack":
                    ws.slack = val
                else:
                    raise LoadError(source, no, f"unknown setting {k!r}")
        elif s.kind == "poset":
            name = s.arg
            if not name:
                raise LoadError(source, s.line, "poset needs a name")
            elems, covers = None, []
            for no, line in s.body:
                k, v = _kv(source, no, line)
                if k == "elements":
                    elems = v.split()
                elif k == "covers":
                    for tok in v.split():
                        if tok.count("<") != 1:
                            raise LoadError(source, no, f"cover {tok!r} should look like a<b")
                        covers.append(tuple(tok.split("<")))
                else:
                    raise LoadError(source, no, f"unknown poset key {k!r}")
            if elems is None:
                raise LoadError(source, s.line, f"poset {name} lists no elements")
            metric, kind = "hasse_path", "hasse_path"
            if name in metrics:
                msec = metrics[name]
                rows = {}
                for no, line in msec.body:
                    k, v = _kv(source, no, line)
                    if k == "kind":
                        metric = kind = v
                        if v not in ("hasse_path", "linf_product"):
                            raise LoadError(source, no, f"unknown metric kind {v!r}")
                    elif k.startswith("row "):
                        x = k[4:].strip()
                        rows[x] = (no, [_distance(source, no, t) for t in v.split()])
                    else:
                        raise LoadError(source, no, f"unknown metric key {k!r}")
                if rows:
                    missing = [x for x in elems if x not in rows]
                    if missing:
                        raise LoadError(source, msec.line, f"metric misses row {missing[0]!r}")
                    metric, kind = [rows[x][1] for x in elems], "table"
            try:
                P = from_covers(elems, covers, metric)
            except (PosetError, ValueError) as e:
                line_no = metrics[name].line if name in metrics and "metric" in str(e) else s.line
                raise LoadError(source, line_no, f"poset {name}: {e}") from None
            ws.posets[name] = P
            ws.metric_kinds[name] = kind
            ws.covers[name] = covers
        elif s.kind == "metric":
            if not any(t.kind == "poset" and t.arg == s.arg for t in secs):
                raise LoadError(source, s.line, f"metric for unknown poset {s.arg!r}")
        elif s.kind == "map":
            m = re.match(r"^(\w+)\s*:\s*(\w+)\s*->\s*(\w+)$", s.arg)
            if not m:
                raise LoadError(source, s.line, "map header should be [map name: P -> Q]")
            name, a, b = m.groups()
            S, T = lookup_poset(a, s.line), lookup_poset(b, s.line)
            table = {}
            for no, line in s.body:
                k, v = _kv(source, no, line)
                if k not in S.index:
                    raise LoadError(source, no, f"{k!r} is not an element of {a}")
                if v not in T.index:
                    raise LoadError(source, no, f"{v!r} is not an element of {b}")
                table[k] = v
            try:
                ws.maps[name] = MonotoneMap.from_table(S, T, table)
            except PosetError as e:
                raise LoadError(source, s.line, f"map {name}: {e}") from None
        elif s.kind == "module":
            m = re.match(r"^(\w+)\s*:\s*(\w+)$", s.arg)
            if not m:
                raise LoadError(source, s.line, "module header should be [module name: P]")
            name, pname = m.groups()
            P = lookup_poset(pname, s.line)
            dims = [0] * len(P)
            arrows, intervals = [], []
            for no, line in s.body:
                k, v = _kv(source, no, line)
                parts = k.split()
                if parts[0] == "dim" and len(parts) == 2:
                    if parts[1] not in P.index:
                        raise LoadError(source, no, f"{parts[1]!r} is not an element of {pname}")
                    try:
                        dims[P.index[parts[1]]] = int(v)
                    except ValueError:
                        raise LoadError(source, no, "dimension must be an integer") from None
                elif parts[0] == "arrow" and len(parts) == 3:
                    arrows.append((no, parts[1], parts[2], v))
                elif parts[0] == "interval" and len(parts) == 1:
                    intervals.append((no, v.split()))
                else:
                    raise LoadError(source, no, f"unknown module key {k!r}")
            if intervals and (arrows or any(dims)):
                raise LoadError(source, s.line, f"module {name}: mix of interval and explicit entries")
            if intervals:
                parts = []
                for no, members in intervals:
                    try:
                        ids = [P.idx(x) for x in members]
                        parts.append(interval_module(P, make_interval(P, ids)))
                    except (PosetError, KeyError) as e:
                        raise LoadError(source, no, f"module {name}: {e}") from None
                M = direct_sum(*parts)
            else:
                maps = {}
                for no, a, b, v in arrows:
                    if a not in P.index or b not in P.index:
                        raise LoadError(source, no, f"arrow {a}->{b} uses an unknown element")
                    ia, ib = P.index[a], P.index[b]
                    if (ia, ib) not in P.covers:
                        raise LoadError(source, no, f"{a}->{b} is not a cover relation of {pname}")
                    maps[(ia, ib)] = _matrix(source, no, v, dims[ib], dims[ia])
                try:
                    M = PModule(P, dims, maps)
                except ModuleError as e:
                    raise LoadError(source, s.line, f"module {name}: {e}") from None
                bad = M.commutativity_violation()
                if bad is not None:
                    a, b, c1, c2 = (P.names[t] for t in bad)
                    raise LoadError(
                        source, s.line,
                        f"module {name} does not commute: square {a}->{c1}->{b} vs {a}->{c2}->{b}",
                    )
            ws.modules[name] = M
        elif s.kind == "coupling":
            name = s.arg
            refs = {}
            for no, line in s.body:
                k, v = _kv(source, no, line)
                refs[k] = (no, v)
            need = ("apex", "f", "g", "h", "i", "gamma", "M", "N")
            missing = [k for k in need if k not in refs]
            if missing:
                raise LoadError(source, s.line, f"coupling {name} misses {missing[0]!r}")
            try:
                Q = lookup_poset(refs["apex"][1], refs["apex"][0])
                f, g, h, i = (lookup("maps", refs[k][1], refs[k][0]) for k in "fghi")
                gamma = lookup("modules", refs["gamma"][1], refs["gamma"][0])
                M = lookup("modules", refs["M"][1], refs["M"][0])
                N = lookup("modules", refs["N"][1], refs["N"][0])
                ws.couplings[name] = _make(Q, f, g, h, i, gamma, M, N, f"file coupling {name}")
            except CouplingError as e:
                raise LoadError(source, s.line, f"coupling {name}: {e}") from None
            ws.coupling_refs[name] = {k: refs[k][1] for k in need}
        else:
            raise LoadError(source, s.line, f"unknown section kind {s.kind!r}")
    return ws


def load(path: str | Path, base: Workspace | None = None) -> Workspace:
    p = Path(path)
    return loads(p.read_text(encoding="utf-8"), str(p), base)


def _fmt_matrix(m: np.ndarray) -> str:
    return " / ".join(" ".join(str(int(v)) for v in row) for row in F.centered(m))


def dumps(ws: Workspace) -> str:
    out: list[str] = []
    if ws.explicit_settings:
        out += ["[settings]", f"prime = {ws.prime}", f"slack = {ws.slack}", ""]
    for name, P in ws.posets.items():
        covers = ws.covers.get(name) or [(P.names[a], P.names[b]) for a, b in P.covers]
        out += [f"[poset {name}]", "elements = " + " ".join(P.names)]
        if covers:
            out.append("covers = " + " ".join(f"{a}<{b}" for a, b in covers))
        kind = ws.metric_kinds.get(name, "hasse_path")
        if kind == "table":
            out += ["", f"[metric {name}]"]
            for x, row in zip(P.names, P.dist):
                out.append(f"row {x} = " + " ".join(fmt_distance(d) for d in row))
        elif kind != "hasse_path":
            out += ["", f"[metric {name}]", f"kind = {kind}"]
        out.append("")
    for name, m in ws.maps.items():
        out.append(f"[map {name}: {ws.poset_name(m.source)} -> {ws.poset_name(m.target)}]")
        out += [f"{a} = {b}" for a, b in m.table().items()]
        out.append("")
    for name, M in ws.modules.items():
        P = M.poset
        out.append(f"[module {name}: {ws.poset_name(P)}]")
        for x in range(len(P)):
            if M.dims[x]:
                out.append(f"dim {P.names[x]} = {M.dims[x]}")
        for a, b in P.covers:
            m = M.maps[(a, b)]
            if m.size:
                out.append(f"arrow {P.names[a]} {P.names[b]} = {_fmt_matrix(m)}")
        out.append("")
    for name, refs in ws.coupling_refs.items():
        out.append(f"[coupling {name}]")
        out += [f"{k} = {v}" for k, v in refs.items()]
        out.append("")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n" if out else ""


def save(ws: Workspace, path: str | Path) -> None:
    Path(path).write_text(dumps(ws), encoding="utf-8")
