"""Command-line interface.

Exit codes: 0 success or relation holds, 1 relation violated, 2 input error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from dataclasses import fields

import numpy as np

from . import io
from .devices import FAMILIES, family_apparatus
from .sdp import SolverError, SolverOptions, diamond_distance, sampled_lower_bound
from .uncertainty import (
    GRACE,
    complementarity,
    verify_ed,
    verify_jm,
    verify_leakage,
    verify_measprep,
)

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
SWEEP_COLUMNS = ("param", "eps_x", "eps_z", "eta_z", "c1", "c2", "lhs_jm", "lhs_ed", "slack_jm", "slack_ed")
SAMPLES_WITH_SEED = 1000


class InputError(ValueError):
    pass


# -- argument handling -------------------------------------------------------


def _tol_overrides(items) -> dict:
    allowed = {f.name: f.type for f in fields(SolverOptions)}
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--tol {item!r}: expected KEY=VALUE")
        if key not in allowed:
            raise InputError(f"--tol {key}: unknown key; choose from {sorted(allowed)}")
        try:
            out[key] = int(value) if key == "max_iter" else float(value)
        except ValueError:
            raise InputError(f"--tol {key}: cannot parse {value!r}") from None
        if out[key] <= 0:
            raise InputError(f"--tol {key}: must be positive")
    return out


def _grid(text: str) -> list[float]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise InputError("--grid: parameter grid is empty")
    try:
        grid = [float(p) for p in parts]
    except ValueError:
        raise InputError(f"--grid: cannot parse {text!r} as comma-separated numbers") from None
    bad = [g for g in grid if not 0 <= g <= 1]
    if bad:
        raise InputError(f"--grid: values must lie in [0, 1], got {bad}")
    return grid


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="solver option override (gap_tol, feas_tol, max_iter, step_fraction)")
    common.add_argument("--seed", type=int, default=None)

    p = argparse.ArgumentParser(prog="qdistinguish", description="Channel distances and measurement uncertainty checks.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distance", parents=[common], help="diamond-norm distance of two channels")
    d.add_argument("channel1")
    d.add_argument("channel2")

    c = sub.add_parser("complementarity", parents=[common], help="complementarity constants of two observables")
    c.add_argument("x")
    c.add_argument("z")

    v = sub.add_parser("verify", help="check an uncertainty relation on a device")
    vs = v.add_subparsers(dest="relation", required=True)
    for name, helptext in (
        ("jm", "joint measurement relation"),
        ("ed", "error-disturbance relation"),
        ("measprep", "measure-prepare approximation"),
    ):
        r = vs.add_parser(name, parents=[common], help=helptext)
        r.add_argument("--apparatus", required=True)
        r.add_argument("--x", required=True)
        if name != "measprep":
            r.add_argument("--z", required=True)
        if name != "jm":
            r.add_argument("--register", default=None, help="classical output factor holding X")
    r = vs.add_parser("leakage", parents=[common], help="information leakage to the environment")
    r.add_argument("--channel", required=True)
    r.add_argument("--x", required=True)
    r.add_argument("--z", required=True)

    s = sub.add_parser("sweep", parents=[common], help="tabulate relations over a device family")
    s.add_argument("--family", required=True, choices=FAMILIES)
    s.add_argument("--grid", required=True, help="comma-separated parameters in [0, 1]")
    s.add_argument("--x", required=True)
    s.add_argument("--z", required=True)
    return p


# -- output ------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{v:.6f}"
    return str(v)


def _text(result: dict) -> str:
    lines = []
    for k, v in result.items():
        if isinstance(v, dict):
            lines.append(f"{k}:")
            lines += [f"  {kk}: {_fmt(vv)}" for kk, vv in v.items()]
        elif isinstance(v, list) and v and isinstance(v[0], list):
            lines.append(f"{k}:")
            lines += ["  " + " ".join(_fmt(float(e)) for e in row) for row in v]
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{k}:")
            lines += ["  " + ", ".join(f"{kk}={_fmt(vv)}" for kk, vv in item.items()) for item in v]
        else:
            lines.append(f"{k}: {_fmt(v)}")
    return "\n".join(lines) + "\n"


def _csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rows[0].keys())
    for row in rows:
        w.writerow(repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row.values())
    return buf.getvalue()


def _flat(result: dict) -> dict:
    return {k: v for k, v in result.items() if not isinstance(v, (dict, list))} | {
        f"{k}.{kk}": vv for k, v in result.items() if isinstance(v, dict) for kk, vv in v.items()
    }


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, indent=2) + "\n"
    rows = result if isinstance(result, list) else None
    if fmt == "csv":
        return _csv(rows if rows is not None else [_flat(result)])
    if rows is not None:
        header = " ".join(f"{c:>10}" for c in rows[0])
        return header + "\n" + "".join(" ".join(f"{_fmt(v):>10}" for v in r.values()) + "\n" for r in rows)
    return _text(result)


# -- commands ----------------------------------------------------------------


def _prepare(args):
    """Load and cross-check every input; returns a thunk that runs the computation."""
    opts = SolverOptions().updated(**_tol_overrides(args.tol))
    cmd = args.command

    if cmd == "distance":
        e1, e2 = io.load_channel(args.channel1), io.load_channel(args.channel2)
        if (e1.dim_in, e1.dim_out) != (e2.dim_in, e2.dim_out):
            field = "dim_in" if e1.dim_in != e2.dim_in else "dim_out"
            raise InputError(
                f"{args.channel2}: {field} = {getattr(e2, field)} does not match "
                f"{args.channel1} ({field} = {getattr(e1, field)})"
            )

        def run():
            res = diamond_distance(e1, e2, opts)
            out = res.summary()
            if args.seed is not None:
                out["sampled_lower"] = sampled_lower_bound(e1, e2, SAMPLES_WITH_SEED, np.random.default_rng(args.seed))
                out["seed"] = args.seed
            return out, None

        return run

    if cmd == "complementarity":
        x, z = io.load_observable(args.x), io.load_observable(args.z)
        _same_dim(args.z, x.dim, z.dim)
        return lambda: (complementarity(x, z).to_dict(), None)

    if cmd == "verify":
        x, z = io.load_observable(args.x), (io.load_observable(args.z) if hasattr(args, "z") else None)
        if z is not None:
            _same_dim(args.z, x.dim, z.dim)
        if args.relation == "leakage":
            n = io.load_channel(args.channel)
            _same_dim(args.channel, x.dim, n.dim_in, "dim_in")
            return _verdict(lambda: verify_leakage(n, x, z, opts))
        a = io.load_apparatus(args.apparatus)
        _same_dim(args.apparatus, x.dim, a.dim_in, "channel.dim_in")
        regs = ["X", "Z"] if args.relation == "jm" else [args.register]
        for reg in regs:
            _check_register(args.apparatus, a, reg, x.dim)
        if args.relation == "jm":
            return _verdict(lambda: verify_jm(a, x, z, opts))
        if args.relation == "ed":
            if not any(f.kind == "quantum" for f in a.output_factors):
                raise InputError(f"{args.apparatus}: output_factors has no quantum factor")
            return _verdict(lambda: verify_ed(a, x, z, args.register, opts))
        return _verdict(lambda: verify_measprep(a, x, args.register, opts))

    if cmd == "sweep":
        grid = _grid(args.grid)
        x, z = io.load_observable(args.x), io.load_observable(args.z)
        _same_dim(args.z, x.dim, z.dim)
        return lambda: _sweep(args.family, grid, x, z, opts)

    raise InputError(f"unknown command {cmd!r}")


def _same_dim(path, expected: int, got: int, field: str = "dim") -> None:
    if expected != got:
        raise InputError(f"{path}: {field} = {got} does not match observable dimension {expected}")


def _check_register(path, a, reg, d) -> None:
    classical = a.classical_factors
    if reg is None:
        if len(classical) != 1:
            raise InputError(f"{path}: output_factors has {len(classical)} classical factors; pass --register")
        f = classical[0]
    else:
        names = [f.name for f in a.output_factors]
        if reg not in names:
            raise InputError(f"{path}: output_factors has no factor named {reg!r}")
        f = a.factor(reg)
        if f.kind != "classical":
            raise InputError(f"{path}: output factor {reg!r} is not classical")
    if f.dim != d:
        raise InputError(f"{path}: output factor {f.name!r} has dim {f.dim}, observable has {d}")


def _verdict(make):
    def run():
        rep = make()
        return rep.to_dict(), (EXIT_OK if rep.passed else EXIT_VIOLATED)

    return run


def _sweep(family, grid, x, z, opts):
    rows, ok = [], True
    for p in grid:
        a = family_apparatus(family, x, z, p)
        jm = verify_jm(a, x, z, opts)
        ed = verify_ed(a, x, z, "X", opts)
        ok = ok and jm.passed and ed.passed
        rows.append({
            "param": p,
            "eps_x": jm.components["eps_x"],
            "eps_z": jm.components["eps_z"],
            "eta_z": ed.components["eta_z"],
            "c1": jm.rhs,
            "c2": ed.rhs,
            "lhs_jm": jm.lhs,
            "lhs_ed": ed.lhs,
            "slack_jm": jm.slack,
            "slack_ed": ed.slack,
        })
    return rows, (EXIT_OK if ok else EXIT_VIOLATED)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or ("csv" if args.command == "sweep" else "text")
    try:
        run = _prepare(args)
    except (ValueError, KeyError) as exc:  # SchemaError, DimensionError, InputError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        result, code = run()
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _emit(_render(result, fmt), args.out)
    if code == EXIT_VIOLATED:
        print(f"relation violated beyond grace {GRACE:g}", file=sys.stderr)
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
