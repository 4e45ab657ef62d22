"""Command line interface: ``sgt <command> ...``.

Exit codes: 0 success / Equal, 1 hypothesis failure, 2 input error,
3 Disjoint (or failed reconstruction), 4 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .boundary import pullback_measure, reconstruct_ball
from .compare import compare, enumerate_choices
from .covering import critical_exponent, ps_measure_tree, sphere_sizes
from .errors import ConvergenceError, GraphFormatError, HypothesisError, ReconstructionError
from .graph import parse_graph, require_valid, spanning_presentation, validate
from .spectral import (CONVERGENCE_ABSCISSA, Symbol, dirac_eigenvalue, filtration_dims,
                       zeta_eval, zeta_one_closed)

FORMAT_VERSION = "sgt-output/1"
TREE_METHODS = ("poincare", "perron")
WORD_METHODS = ("restricted-poincare", "geodesic-classify")

EXIT_OK, EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_DISJOINT, EXIT_NUMERIC = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    depth: int | None = None
    s_grid: list[float] | None = None
    method: str | None = None
    origin: str | None = None
    choice: int | None = None
    symbol: str | None = None
    tol: float | None = None
    budget: int | None = None
    radius: int | None = None
    format: str = "json"
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and v != {}}


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def _presentation(G, origin: str | None, choice: int | None):
    if choice is not None:
        choices, _ = enumerate_choices(G)
        if not 0 <= choice < len(choices):
            raise ValueError(f"choice id {choice} out of range (0..{len(choices) - 1})")
        c = choices[choice]
        if origin is not None and G.index(origin) != c.origin:
            raise ValueError(f"choice {choice} uses origin {G.vertices[c.origin]}, not {origin}")
        return c.presentation(G)
    return spanning_presentation(G, G.index(origin) if origin is not None else 0)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, cfg: RunConfig):
    payload = {"format_version": FORMAT_VERSION, "config": cfg.as_dict(), **payload}
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", cfg.out)


# --- commands --------------------------------------------------------------

def cmd_validate(args, cfg: RunConfig) -> int:
    G = _load(args.graph)
    report = validate(G)
    _emit_json({"ok": report.ok, "genus": report.genus,
                "failures": [{"hypothesis": h, "witness": w, "message": m}
                             for h, w, m in report.failures]}, cfg)
    return EXIT_OK if report.ok else EXIT_HYPOTHESIS


def cmd_invariants(args, cfg: RunConfig) -> int:
    G = _load(args.graph)
    g = require_valid(G)
    n = cfg.depth
    origin = G.index(args.origin) if args.origin else 0
    _emit_json({"g": g, "delta": critical_exponent(G), "L": G.length,
                "sphere_sizes": sphere_sizes(G, origin, n),
                "dims": [filtration_dims(g, k) for k in range(n + 1)],
                "lambdas": [dirac_eigenvalue(g, k) for k in range(n + 1)]}, cfg)
    return EXIT_OK


def cmd_measure(args, cfg: RunConfig) -> int:
    G = _load(args.graph)
    require_valid(G)
    P = _presentation(G, args.origin, args.choice)
    tree_method = args.method if args.method in TREE_METHODS else "perron"
    word_method = args.method if args.method in WORD_METHODS else "geodesic-classify"
    mu = ps_measure_tree(G, P.origin, cfg.depth, tree_method)
    nu = pullback_measure(P, cfg.depth, word_method)
    _emit_json({"tree": mu.to_dict(), "freegroup": nu.to_dict(),
                "origin": G.vertices[P.origin], "generators": list(P.generators),
                "methods": {"tree": tree_method, "freegroup": word_method}}, cfg)
    return EXIT_OK


def _s_grid(start: float, stop: float, step: float) -> list[float]:
    if step == 0 or (stop - start) / step < 0:
        raise ValueError("s-grid step must move from --s-start towards --s-stop")
    count = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def cmd_zeta(args, cfg: RunConfig) -> int:
    G = _load(args.graph)
    g = require_valid(G)
    a = Symbol.parse(cfg.symbol)
    nu = None
    if a.depth:
        nu = pullback_measure(_presentation(G, args.origin, args.choice), a.depth)
    unit = a.terms == {(): 1}
    buf = io.StringIO()
    buf.write(f"# format_version: {FORMAT_VERSION}\n")
    buf.write("# config: " + json.dumps(cfg.as_dict(), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["g", "symbol", "s", "value", "tail_bound", "N", "closed_form", "status"])
    for s in cfg.s_grid:
        closed = repr(float(zeta_one_closed(g, s))) if unit and s != CONVERGENCE_ABSCISSA else ""
        if s < CONVERGENCE_ABSCISSA:
            value, bound = zeta_eval(a, nu, s, cfg.depth, g=g)
            writer.writerow([g, a.ident(), repr(s), repr(value), repr(bound), cfg.depth, closed, "ok"])
        else:
            writer.writerow([g, a.ident(), repr(s), "", "", cfg.depth, closed, "rejected: s >= -1/3"])
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    G1, G2 = _load(args.graph1), _load(args.graph2)
    verdict = compare(G1, G2, cfg.depth, cfg.tol, cfg.budget)
    _emit_json(verdict.to_dict(), cfg)
    return EXIT_OK if verdict.equal else EXIT_DISJOINT


def cmd_reconstruct(args, cfg: RunConfig) -> int:
    G1, G2 = _load(args.graph1), _load(args.graph2)
    require_valid(G1)
    require_valid(G2)
    P1 = _presentation(G1, args.origin, None)
    P2 = _presentation(G2, None, args.choice)
    try:
        F = reconstruct_ball(P1, P2, cfg.radius)
    except ReconstructionError as exc:
        _emit_json({"success": False, "message": str(exc), "witnesses": exc.witnesses}, cfg)
        return EXIT_DISJOINT
    mapping = [{"source": list(x), "target": list(F[x])} for x in sorted(F, key=lambda p: (len(p), p))]
    _emit_json({"success": True, "radius": cfg.radius, "mapping": mapping}, cfg)
    return EXIT_OK


# --- wiring ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgt", description="Graph boundary measures, zeta functions "
                                "and the zeta-row isomorphism test.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, depth=None):
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"))
        if depth is not None:
            sp.add_argument("--depth", type=int, default=depth)

    sp = sub.add_parser("validate", help="check connectedness, valency >= 3 and genus >= 2")
    sp.add_argument("graph")
    common(sp)

    sp = sub.add_parser("invariants", help="genus, critical exponent, growth and Dirac spectrum")
    sp.add_argument("graph")
    sp.add_argument("--origin")
    common(sp, depth=5)

    sp = sub.add_parser("measure", help="Patterson-Sullivan masses on tree and free-group cylinders")
    sp.add_argument("graph")
    sp.add_argument("--method", choices=TREE_METHODS + WORD_METHODS)
    sp.add_argument("--origin")
    sp.add_argument("--choice", type=int)
    common(sp, depth=2)

    sp = sub.add_parser("zeta", help="zeta function of a symbol on an s-grid (CSV)")
    sp.add_argument("graph")
    sp.add_argument("--symbol", default="1")
    sp.add_argument("--s-start", type=float, default=-3.0)
    sp.add_argument("--s-stop", type=float, default=-0.5)
    sp.add_argument("--s-step", type=float, default=0.1)
    sp.add_argument("--origin")
    sp.add_argument("--choice", type=int)
    common(sp, depth=25)

    sp = sub.add_parser("compare", help="decide whether two graphs share a zeta row")
    sp.add_argument("graph1")
    sp.add_argument("graph2")
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--budget", type=int)
    common(sp, depth=3)

    sp = sub.add_parser("reconstruct", help="rebuild a ball isometry from the boundary map")
    sp.add_argument("graph1")
    sp.add_argument("graph2")
    sp.add_argument("--radius", type=int, default=3)
    sp.add_argument("--origin", help="origin in the first graph")
    sp.add_argument("--choice", type=int, help="choice id for the second graph")
    common(sp)
    return p


COMMANDS = {"validate": cmd_validate, "invariants": cmd_invariants, "measure": cmd_measure,
            "zeta": cmd_zeta, "compare": cmd_compare, "reconstruct": cmd_reconstruct}


def _config(args) -> RunConfig:
    inputs = [getattr(args, k) for k in ("graph", "graph1", "graph2") if getattr(args, k, None)]
    cfg = RunConfig(args.command, inputs, depth=getattr(args, "depth", None),
                    format=args.format or ("csv" if args.command == "zeta" else "json"), out=args.out)
    if args.command == "zeta":
        if cfg.format != "csv":
            raise ValueError("zeta output is CSV only")
        cfg.s_grid = _s_grid(args.s_start, args.s_stop, args.s_step)
        cfg.symbol = args.symbol
    elif cfg.format != "json":
        raise ValueError(f"{args.command} output is JSON only")
    for name in ("method", "origin", "choice", "tol", "budget", "radius"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if cfg.depth is not None and cfg.depth < 1:
        raise ValueError("--depth must be >= 1")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except HypothesisError as exc:
        print(f"sgt: hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ConvergenceError as exc:
        print(f"sgt: numeric non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraphFormatError, OSError, ValueError, KeyError) as exc:
        print(f"sgt: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
