"""Command-line interface: ``galoisres <command> ...``."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import field as F
from .bottleneck import SearchConfig, dist_bottleneck, dist_prematch
from .corpus import CORPUS_FILES, golden_checks, load_corpus
from .io import LoadError, Workspace, load
from .module import ModuleError
from .persistence import ext_dims, kernel_module, persistence_diagram, stability_report
from .poset import MonotoneMap, PosetError, fmt_distance
from .resolution import minimal_resolution
from .transport import MODES, capped_shift, gt_upper, gt_zero

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_OPEN = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="galoisres", description="Resolutions, matchings and Galois couplings of poset modules.")
    p.add_argument("-f", "--file", action="append", default=[], help="workspace file (repeatable; default: bundled examples)")
    p.add_argument("--prime", type=int, help="field characteristic (overrides P_FIELD_PRIME)")
    sub = p.add_subparsers(dest="command", required=True)

    def pair(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("a")
        s.add_argument("b")
        return s

    sub.add_parser("resolve", help="minimal projective resolution").add_argument("module")
    for name, help_ in (("distb", "bracket the bottleneck distance"), ("distb-pre", "pre-matching distance")):
        s = pair(name, help_)
        s.add_argument("--slack", type=int, help="extra cones per side (default: workspace setting)")
        s.add_argument("--budget", type=int, default=SearchConfig.node_budget, help="search node budget")
    for name, help_ in (("gt-upper", "upper bound on the Galois transport distance"), ("stability", "stability report")):
        s = pair(name, help_)
        s.add_argument("--sigma", action="append", default=[], help="map name, 'shift' or 'shift:K'")
        if name == "gt-upper":
            s.add_argument("--mode", action="append", choices=MODES, help="construction(s) to try")
        else:
            s.add_argument("--slack", type=int)
    pair("gt-zero", "zero test for the Galois transport distance")
    sub.add_parser("kernel", help="kernel module over the interval poset").add_argument("module")
    sub.add_parser("diagram", help="signed persistence diagram").add_argument("module")
    s = sub.add_parser("ext", help="dimensions of Ext^d(1_b, M)")
    s.add_argument("module")
    s.add_argument("element")
    sub.add_parser("verify-examples", help="run the golden corpus")
    return p


def _workspace(files: Sequence[str]) -> tuple[Workspace, list[str]]:
    if not files:
        return load_corpus(), [f"bundled:{n}" for n in CORPUS_FILES]
    ws = Workspace()
    for path in files:
        ws.merge(load(path, ws))
    return ws, list(files)


def _sigma(ws: Workspace, spec: str, M) -> MonotoneMap:
    if spec == "id":
        return MonotoneMap.identity(M.poset)
    if spec == "shift" or spec.startswith("shift:"):
        step = int(spec.split(":", 1)[1]) if ":" in spec else 1
        return capped_shift(M.poset, step)
    return ws.map(spec)


def _module(ws: Workspace, name: str):
    try:
        return ws.module(name)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from None


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    def say(*lines: str):
        for line in lines:
            print(line, file=out)

    try:
        if args.prime is not None:
            F.set_prime(args.prime)
        ws, sources = _workspace(args.file)
    except (LoadError, KeyError, ValueError, OSError) as e:
        say(f"error: {e}")
        return EXIT_USAGE
    say(f"# prime {F.prime()}", f"# sources {' '.join(sources)}")

    try:
        return _dispatch(args, ws, say)
    except UsageError as e:
        say(f"error: {e}")
        return EXIT_USAGE
    except (KeyError, PosetError, ModuleError) as e:
        say(f"error: {e.args[0] if e.args else e}")
        return EXIT_USAGE


def _dispatch(args, ws: Workspace, say) -> int:
    cmd = args.command
    if cmd == "resolve":
        M = _module(ws, args.module)
        say(minimal_resolution(M).dump())
        return EXIT_OK
    if cmd in ("distb", "distb-pre"):
        A, B = _module(ws, args.a), _module(ws, args.b)
        if A.poset != B.poset:
            raise UsageError("modules live on different posets")
        slack = ws.slack if args.slack is None else args.slack
        cfg = SearchConfig(slack=slack, node_budget=args.budget)
        Pa, Pb = minimal_resolution(A), minimal_resolution(B)
        if cmd == "distb-pre":
            br = dist_prematch(Pa, Pb, config=cfg)
        else:
            br = dist_bottleneck(Pa, Pb, B, M=A, config=cfg)
        say(f"bracket {br}", f"lower reason: {br.lower_reason}")
        for n in br.notes:
            say(f"# {n}")
        if getattr(br, "upper_witness", None) is not None:
            say(br.upper_witness.dump())
        return EXIT_OK if br.exact else EXIT_OPEN
    if cmd == "gt-upper":
        A, B = _module(ws, args.a), _module(ws, args.b)
        sigmas = [_sigma(ws, s, A) for s in args.sigma]
        r = gt_upper(A, B, sigmas, tuple(args.mode) if args.mode else MODES)
        for att in r.attempts:
            status = f"cost {fmt_distance(att.coupling.cost)}" if att.coupling else f"rejected: {att.reason}"
            say(f"# sigma {att.sigma} mode {att.mode}: {status}")
        say(f"gt upper {fmt_distance(r.bound)}")
        if r.best is not None:
            say(r.best.describe())
        return EXIT_OK
    if cmd == "gt-zero":
        A, B = _module(ws, args.a), _module(ws, args.b)
        z = gt_zero(A, B)
        say(f"isomorphic: {'yes' if z else 'no'}")
        say("dGT = 0" if z else "dGT > 0 (at least the smallest positive distance)")
        return EXIT_OK
    if cmd == "kernel":
        K = kernel_module(_module(ws, args.module)).module
        for name, d in zip(K.poset.names, K.dims):
            if d:
                say(f"{name}: {d}")
        return EXIT_OK
    if cmd == "diagram":
        res, dg = persistence_diagram(_module(ws, args.module))
        say(dg.dump())
        return EXIT_OK
    if cmd == "ext":
        M = _module(ws, args.module)
        if args.element not in M.poset.index:
            raise UsageError(f"unknown element {args.element!r}")
        dims = ext_dims(args.element, M)
        say("ext dims: " + " ".join(str(d) for d in dims))
        return EXIT_OK
    if cmd == "stability":
        A, B = _module(ws, args.a), _module(ws, args.b)
        sigmas = [_sigma(ws, s, A) for s in args.sigma]
        slack = ws.slack if args.slack is None else args.slack
        rep = stability_report(A, B, sigmas, slack=slack)
        say(rep.dump())
        if not rep.ok:
            return EXIT_MISMATCH
        return EXIT_OK if rep.bracket.exact else EXIT_OPEN
    if cmd == "verify-examples":
        results = golden_checks(ws if args.file else None)
        bad = 0
        for g in results:
            if g.known_discrepancy:
                tag = "NOTE" if not g.ok else "PASS"
            else:
                tag = "PASS" if g.ok else "FAIL"
                bad += not g.ok
            say(f"{tag} {g.name}: {g.detail}")
        return EXIT_MISMATCH if bad else EXIT_OK
    raise UsageError(f"unknown command {cmd}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
