"""Command line interface: ``finsler compute|verify|compare``.

Exit codes: 0 success, 1 an identity check failed, 2 usage or parse error,
3 numerical error (singular metric, point outside the domain).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import connections, geometry, report
from .connections import KINDS, ConnectionKind
from .errors import (BadParams, DomainError, FinslerError, OrderTooHigh, ParseError,
                     SingularMetric, UnknownMetric)
from .metrics import parse_point, resolve, sample_points
from .verify import TOLERANCES, compare_connections, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="finsler", description="Numerical Finsler geometry: spray, Barthel "
                "connection, the four fundamental connections and their identities.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--metric", required=True,
                        help='built-in name with optional ":key=v1,v2" params, or "expr:<energy>"')
        sp.add_argument("--dim", type=int, default=None,
                        help="dimension n (default: 2 for built-ins, inferred for expressions)")
        sp.add_argument("--format", choices=["table", "json"], default="table")

    c = sub.add_parser("compute", help="print connection coefficients, torsion, curvature")
    common(c)
    c.add_argument("--point", required=True, help='"x1,...,xn;y1,...,yn"')
    c.add_argument("--connection", default="all", choices=[k.value for k in KINDS] + ["all"])
    c.add_argument("--what", default="all", choices=["coeffs", "torsion", "curvature", "all"])

    v = sub.add_parser("verify", help="run the identity suite at seeded sample points")
    common(v)
    v.add_argument("--points", type=int, default=20)
    v.add_argument("--seed", type=int, default=0, help="overridden by FINSLER_SEED")
    v.add_argument("--tol-exact", type=float, default=TOLERANCES["exact"])
    v.add_argument("--tol-oracle", type=float, default=TOLERANCES["oracle"])

    d = sub.add_parser("compare", help="differences along the process diagram")
    common(d)
    d.add_argument("--point", required=True, help='"x1,...,xn;y1,...,yn"')
    return p


# ----------------------------------------------------------------------------
# formatting helpers
# ----------------------------------------------------------------------------

def _num(x: float) -> str:
    x = float(x)
    return "%.12g" % (0.0 if x == 0 else x)


def _components(name: str, arr: np.ndarray, n_upper: int = 1) -> list[str]:
    """Lines ``name^i_jk = value`` with 1-based indices."""
    arr = np.asarray(arr)
    lines = []
    for idx in np.ndindex(arr.shape):
        up = "".join(str(i + 1) for i in idx[:n_upper])
        low = "".join(str(i + 1) for i in idx[n_upper:])
        label = f"{name}^{up}" + (f"_{low}" if low else "")
        lines.append(f"{label} = {_num(arr[idx])}")
    return lines


def _tolist(x):
    return np.asarray(x, dtype=float).tolist()


def _kinds(arg: str) -> list[ConnectionKind]:
    return list(KINDS) if arg == "all" else [ConnectionKind.parse(arg)]


def _point(info, text: str):
    p = parse_point(text)
    if p.n != info.field.n:
        raise BadParams(f"point has dimension {p.n} but the metric has dimension {info.field.n}")
    return p


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def cmd_compute(args, out) -> int:
    info = resolve(args.metric, args.dim)
    p = _point(info, args.point)
    E = info.field
    doc: dict = {"metric": info.name, "point": {"x": list(p.x), "y": list(p.y)}}
    text: list[str] = []
    if args.what in ("coeffs", "all"):
        nl = geometry.nonlinear_connection(E, p)
        doc["spray"] = {"G": _tolist(nl.G), "N": _tolist(nl.N)}
        text += ["# spray and Barthel connection"] + _components("G", nl.G) + _components("N", nl.N)
    for kind in _kinds(args.connection):
        entry: dict = {}
        if args.what in ("coeffs", "all"):
            cc = connections.coefficients(kind, E, p)
            entry["coefficients"] = {"V": _tolist(cc.V), "H": _tolist(cc.H)}
            text += [f"# {kind.value} coefficients (V vertical, H horizontal)"]
            text += _components("V", cc.V) + _components("H", cc.H)
        if args.what in ("torsion", "all"):
            tc = connections.torsion(kind, E, p)
            entry["torsion"] = {"hh": _tolist(tc.hh), "hv": _tolist(tc.hv), "vv": _tolist(tc.vv)}
            text += [f"# {kind.value} torsion (hv, vv in adapted components)"]
            text += _components("T_hh", tc.hh) + _components("T_hv", tc.hv)
            text += _components("T_vv", tc.vv)
        if args.what in ("curvature", "all"):
            kc = connections.curvature(kind, E, p)
            entry["curvature"] = {"Rh": _tolist(kc.Rh), "Phv": _tolist(kc.Phv), "Qv": _tolist(kc.Qv)}
            text += [f"# {kind.value} curvature"]
            text += _components("R", kc.Rh) + _components("P", kc.Phv) + _components("Q", kc.Qv)
        doc[kind.value] = entry
    if args.format == "json":
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        out.write("\n".join(text) + "\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    seed = args.seed
    env = os.environ.get("FINSLER_SEED")
    if env is not None and env.strip():
        try:
            seed = int(env)
        except ValueError:
            raise UsageError(f"FINSLER_SEED must be an integer, got {env!r}") from None
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    for name in ("tol_exact", "tol_oracle"):
        if not getattr(args, name) > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    info = resolve(args.metric, args.dim)
    pts = sample_points(info.field.n, args.points, seed, info)
    rep = run_suite(info, pts, {"exact": args.tol_exact, "oracle": args.tol_oracle}, seed=seed)
    out.write(report.to_json(rep) if args.format == "json" else report.to_table(rep))
    s = rep.summary
    if s["fail"]:
        return EXIT_FAIL
    if s["error"] and not s["pass"]:
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_compare(args, out) -> int:
    info = resolve(args.metric, args.dim)
    p = _point(info, args.point)
    diffs = compare_connections(info.field, p)
    tol = TOLERANCES["exact"]
    if args.format == "json":
        doc = {"metric": info.name, "point": {"x": list(p.x), "y": list(p.y)},
               "tolerance": tol,
               "arrows": [{**d, "dV": _tolist(d["dV"]), "dH": _tolist(d["dH"]),
                           "pass": d["residual"] <= tol} for d in diffs]}
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        rows = [[f"{d['from']} -> {d['to']}", d["process"],
                 f"({d['expected_V']}, {d['expected_H']})", f"{d['residual']:.3e}",
                 "PASS" if d["residual"] <= tol else "FAIL"] for d in diffs]
        out.write(report.table(rows, ["arrow", "process", "difference", "residual", "status"]))
    return EXIT_OK if all(d["residual"] <= tol for d in diffs) else EXIT_FAIL


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "compare": cmd_compare}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"finsler: usage error: {exc}\n")
        return EXIT_USAGE
    except (ParseError, UnknownMetric, BadParams, OrderTooHigh) as exc:
        err.write(f"finsler: {exc}\n")
        return EXIT_USAGE
    except (SingularMetric, DomainError, FinslerError, ArithmeticError) as exc:
        err.write(f"finsler: numerical error: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:  # malformed point strings
        err.write(f"finsler: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
