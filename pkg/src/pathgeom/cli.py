"""Command-line interface; every subcommand writes JSON to stdout.

Exit codes: 0 success, 2 unreadable input (parse or file format), 3 the
computation itself failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .connection import NotQuadratic, curvature, extract_christoffel
from .liegroup import STRUCTURE_SIX, FractalLinearMap, jacobi_check, pushforward_trivial, random_map
from .ode_model import load_system_file
from .oracle import integrate, straightness_residual
from .reduction import StageError, check
from .symexpr import ExprError, ParseError

EXIT_OK, EXIT_PARSE, EXIT_PIPELINE = 0, 2, 3

DEFAULT_INITS = (
    (0, 0, 1, Fraction(1, 2), 0),
    (Fraction(1, 3), Fraction(-1, 4), Fraction(1, 2), Fraction(1, 3), 0),
    (Fraction(-1, 2), Fraction(1, 5), Fraction(-1, 3), Fraction(1, 2), 0),
    (Fraction(1, 7), Fraction(2, 3), Fraction(1, 4), Fraction(-1, 2), 0),
)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path):
    try:
        return load_system_file(path)
    except (ParseError, UnicodeDecodeError) as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc.strerror or exc}") from None


def _structure_dump(C: dict, labels) -> dict:
    out = {}
    for (i, j, k), v in sorted(C.items()):
        out[f"d{labels[i]}:{labels[j]}^{labels[k]}"] = str(v)
    return out


def _verdict_json(path, full: bool) -> dict:
    system = _load(path)
    try:
        verdict = check(system)
    except (StageError, ExprError) as exc:
        raise CliError(EXIT_PIPELINE, f"{path}: {exc}") from None
    out = verdict.to_json()
    out["working_set"] = "p != 0 and q != 0 with p = -v1/v2, q = -v2"
    if full:
        d = verdict.details
        out["stage1"] = {k: str(v) for k, v in d.get("stage1", {}).items()}
        out["stage2"] = {k: str(v) for k, v in d.get("stage2", {}).items()}
        out["branch"] = d.get("branch")
        if "generic_torsion" in d:
            out["generic_torsion"] = {k: str(v) for k, v in d["generic_torsion"].items()}
        if verdict.invariants is not None:
            out["B4=D3"] = d["B4=D3"].is_zero()
            out["structure"] = _structure_dump(verdict.invariants.structure, [f"eta{i}" for i in range(1, 6)])
            out["d_squared_zero"] = d["d_squared_zero"]
            out["independent_invariants"] = list(verdict.invariants.independent_names())
        if "final" in d:
            out["structure"] = _structure_dump(d["final"].structure, d["final"].coframe.labels)
    return out


def _job(args):
    path, full = args
    try:
        return EXIT_OK, _verdict_json(path, full)
    except CliError as exc:
        return exc.code, {"file": str(path), "error": str(exc)}


def cmd_check(args, full: bool = False):
    paths = args.input
    if len(paths) == 1:
        return EXIT_OK, _verdict_json(paths[0], full)
    jobs = [(p, full) for p in paths]
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    code = max(c for c, _ in results)
    report = []
    for (c, body), p in zip(results, paths):
        if c != EXIT_OK:
            print(body["error"], file=sys.stderr)
        report.append(dict(body, file=str(p)))
    return code, report


def cmd_curvature(args):
    system = _load(args.input)
    try:
        R = curvature(extract_christoffel(system))
    except NotQuadratic as exc:
        raise CliError(EXIT_PIPELINE, f"not in geodesic form: {exc}") from None
    comps = R.nonzero_components()
    return EXIT_OK, {"flat": not comps, "R_nonzero_components": [
        {"index": list(c), "value": str(R.R[c[0] - 1][c[1] - 1][c[2] - 1][c[3] - 1])} for c in comps]}


def system_text(system, seed=None) -> str:
    head = f"# trivial system pushed forward by the fractal-linear map of seed {seed}\n" if seed is not None else ""
    return f"{head}f = {system.f}\ng = {system.g}\n"


def cmd_generate(args):
    m = random_map(args.seed)
    system = pushforward_trivial(m)
    text = system_text(system, args.seed)
    out = {"seed": args.seed, "f": str(system.f), "g": str(system.g), "map": m.to_json()}
    if args.out:
        prefix = Path(args.out)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        ode_path = prefix.with_name(prefix.name + ".ode")
        map_path = prefix.with_name(prefix.name + ".map.json")
        ode_path.write_text(text, encoding="utf-8")
        map_path.write_text(m.dumps() + "\n", encoding="utf-8")
        out["system_file"], out["map_file"] = str(ode_path), str(map_path)
    return EXIT_OK, out


def cmd_mc_check(args):
    return EXIT_OK, {"jacobi": jacobi_check(STRUCTURE_SIX)}


def _parse_init(text):
    try:
        vals = [Fraction(x) for x in text.split(",")]
    except ValueError:
        raise CliError(EXIT_PARSE, f"bad --init {text!r}") from None
    if len(vals) != 5:
        raise CliError(EXIT_PARSE, "--init takes y1,y2,v1,v2,t")
    return tuple(vals)


def cmd_straightness(args):
    system = _load(args.input)
    try:
        m = FractalLinearMap.from_json(Path(args.map).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_PARSE, f"{args.map}: {exc}") from None
    except ExprError as exc:
        raise CliError(EXIT_PIPELINE, f"{args.map}: {exc}") from None
    inits = [_parse_init(args.init)] if args.init else list(DEFAULT_INITS)
    last = None
    for init in inits:
        try:
            traj = integrate(system, [float(x) for x in init], args.steps, args.h)
            return EXIT_OK, {"residual": straightness_residual(traj, m),
                             "init": [str(x) for x in init], "steps": args.steps, "h": args.h}
        except (ExprError, ZeroDivisionError, ValueError) as exc:
            last = exc
    raise CliError(EXIT_PIPELINE, f"no pole-free trajectory: {last}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pathgeom", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--format", choices=("json", "text"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, helptext in (("check", "decide flat / generic / undetermined"),
                           ("invariants", "check plus every intermediate coefficient")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", nargs="+", help="system file(s) with 'f = ...' and 'g = ...' lines")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for several files")

    p = sub.add_parser("curvature", help="curvature of a geodesic-form system")
    p.add_argument("input")

    p = sub.add_parser("generate", help="pushforward of the trivial system by a seeded fractal-linear map")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write <OUT>.ode and <OUT>.map.json")

    sub.add_parser("mc-check", help="Jacobi identity of the fractal-linear structure constants")

    p = sub.add_parser("straightness", help="RK4 trajectory mapped through a fractal-linear map")
    p.add_argument("input")
    p.add_argument("--map", required=True, help="map JSON file")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--init", help="y1,y2,v1,v2,t (rationals); default tries a fixed list")
    return ap


def _text(body) -> str:
    if isinstance(body, list):
        return "\n\n".join(_text(b) for b in body)
    lines = []
    for k, v in body.items():
        if isinstance(v, dict):
            lines.append(f"{k}:")
            lines += [f"  {kk} = {vv}" for kk, vv in v.items()]
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines)


COMMANDS = {
    "check": lambda a: cmd_check(a, full=False),
    "invariants": lambda a: cmd_check(a, full=True),
    "curvature": cmd_curvature,
    "generate": cmd_generate,
    "mc-check": cmd_mc_check,
    "straightness": cmd_straightness,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, body = COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    if args.format == "json":
        print(json.dumps(body, indent=2, sort_keys=False))
    else:
        print(_text(body))
    return code


if __name__ == "__main__":
    sys.exit(main())
