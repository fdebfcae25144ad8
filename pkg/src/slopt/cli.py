"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 solver non-convergence,
4 inadmissible solution (or failed verification).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError, SloptError

log = logging.getLogger("slopt")


# output ------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _encode(obj) -> str:
    """JSON with every float written to 17 significant digits (non-finite as null)."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt(obj) if math.isfinite(obj) else "null"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(_plain(obj))


def _emit_json(obj, path):
    text = dumps(obj) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_csv(header, columns, path):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# input ---------------------------------------------------------------------------

def _number(text: str) -> float:
    """Float or fraction such as 15/14."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc


def _potential_arg(text: str):
    from .function_space import PiecewisePotential, potential_from_json
    if text == "zero":
        return PiecewisePotential.zero()
    if text.startswith("const:"):
        try:
            return PiecewisePotential.constant(float(text[6:]))
        except ValueError:
            raise InvalidInputError(f"bad constant in {text!r}") from None
    return potential_from_json(_load_json(text))


def _grid(args):
    from .function_space import UnitGrid, default_grid_n
    n = args.grid_n if args.grid_n is not None else default_grid_n()
    if n < 256 or n & (n - 1):
        raise InvalidInputError(f"grid size must be a power of two >= 256, got {n}")
    return UnitGrid(n)


# commands ------------------------------------------------------------------------

def cmd_eig(args) -> int:
    from .sturm_liouville import dirichlet_eigen
    q = _potential_arg(args.potential)
    grid = _grid(args)
    _emit_json([dirichlet_eigen(q, m, grid).to_json() for m in range(1, args.count + 1)],
               args.json)
    return 0


def cmd_mde_eig(args) -> int:
    from .function_space import measure_from_json
    from .mde import mde_dirichlet_eigen
    mu = measure_from_json(_load_json(args.measure))
    grid = _grid(args)
    _emit_json([mde_dirichlet_eigen(mu, m, grid).to_json() for m in range(1, args.count + 1)],
               args.json)
    return 0


def _critical_csv(sol, path):
    _emit_csv(["t", "y", "z", "q"],
              [sol.grid.nodes, sol.y.values, sol.z.values, sol.q.values], path)


def cmd_critical(args) -> int:
    from .critical_system import solve_critical
    guess = None
    if args.guess:
        data = _load_json(args.guess)
        guess = [data[k] for k in ("a", "b", "xi", "eta")] if isinstance(data, dict) else data
    sol = solve_critical(args.p, args.r, guess, _grid(args), args.tol)
    _emit_json(sol.to_json(), args.json)
    if args.csv:
        _critical_csv(sol, args.csv)
    return 0


def cmd_continue(args) -> int:
    from .critical_system import continuation_to_one
    if args.steps < 2:
        raise InvalidInputError("--steps must be at least 2")
    if not args.p_from > args.p_to:
        raise InvalidInputError("--p-from must exceed --p-to")
    ps = np.linspace(args.p_from, args.p_to, args.steps)
    run = continuation_to_one(args.r, ps, _grid(args), tol=args.tol)
    keys = ["p", "M", "a", "b", "xi", "eta", "u_max", "q_l1", "pairing"]
    _emit_csv(keys, [[d[k] for d in run.diagnostics] for k in keys], args.csv)
    if run.error is not None:
        raise run.error
    return 0


def cmd_maximize(args) -> int:
    from .maximizer import assemble_maximizer
    prof = assemble_maximizer(args.r, args.structure, grid=_grid(args), tol=args.tol)
    _emit_json(prof.to_json(), args.json)
    if args.csv:
        _emit_csv(["t", "y", "z", "q", "theta"],
                  [prof.grid.nodes, prof.y.values, prof.z.values, prof.qcheck.values,
                   prof.theta.values], args.csv)
    return 0


def cmd_verify(args) -> int:
    from .maximizer import profile_from_json, random_perturbation_probe, verify_profile
    prof = profile_from_json(_load_json(args.profile))
    report = verify_profile(prof, eig_rtol=args.eig_rtol)
    out = report.to_json()
    if args.probes:
        base, deltas = random_perturbation_probe(prof, seed=args.seed)
        out["perturbation"] = {"eigen_sum": base, "max_increase": max(deltas)}
    _emit_json(out, args.json)
    return 0 if report.passed else 4


def cmd_rstar(args) -> int:
    from .maximizer import locate_r_star
    r_star = locate_r_star(args.rmin, args.rmax, args.tol, _grid(args))
    sys.stdout.write(_fmt(r_star) + "\n")
    return 0


# parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slopt", description=__doc__.splitlines()[0])
    parser.add_argument("--grid-n", type=int, default=None,
                        help="grid intervals (default $SLOPT_GRID_N or 4096)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eig", help="Dirichlet eigenvalues of a potential")
    p.add_argument("--potential", required=True, help="zero, const:c or a JSON file")
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--json")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("mde-eig", help="Dirichlet eigenvalues of a measure")
    p.add_argument("--measure", required=True, help="measure JSON file")
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--json")
    p.set_defaults(func=cmd_mde_eig)

    p = sub.add_parser("critical", help="solve the critical system at (p, r)")
    p.add_argument("--p", type=_number, required=True)
    p.add_argument("--r", type=_number, required=True)
    p.add_argument("--guess", help="JSON file with a, b, xi, eta")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("continue", help="continuation in p at fixed r")
    p.add_argument("--r", type=_number, required=True)
    p.add_argument("--p-from", type=_number, required=True)
    p.add_argument("--p-to", type=_number, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("maximize", help="assemble the L1 maximiser")
    p.add_argument("--r", type=_number, required=True)
    p.add_argument("--structure", choices=["one", "two", "auto"], default="auto")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("verify", help="check a maximiser profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--eig-rtol", type=float, default=1e-4)
    p.add_argument("--probes", action="store_true", help="add random perturbation probes")
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rstar", help="locate the one/two bump transition")
    p.add_argument("--rmin", type=_number, required=True)
    p.add_argument("--rmax", type=_number, required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_rstar)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SloptError as exc:
        print(f"slopt: {type(exc).__name__}: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(dumps(diag), file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"slopt: invalid input: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
