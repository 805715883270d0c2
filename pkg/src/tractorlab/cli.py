"""Command line front end.

``tractorlab verify`` runs the proposition-level check suite against a
geometry (builtin name or JSON document) and writes a machine-readable
report; the exit code is 0 only when no check failed (skips do not fail),
1 when any check failed or errored, 2 on configuration problems.

``tractorlab eval`` evaluates a single named quantity at a point, either
directly (interior) or by boundary extrapolation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import boundary as bdy
from .affine import geometry_curvature
from .extrapolate import boundary_limit
from .fields import BUILTIN_NAMES, Geometry, GeometryError, builtin_geometry, load_geometry
from .jets import JetError, PoleError
from .tractor import TractorCalculus, l_tau
from .verify import SamplingPlan, run_suite

EVAL_QUANTITIES = (
    "scalar_curvature",
    "schouten",
    "weyl",
    "cotton",
    "h_asymptotic",
    "l_tau",
    "gamma",
    "phi",
    "t_vector",
)


class ConfigError(Exception):
    """User-facing configuration problem; maps to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tractorlab",
        description="numerical projective tractor calculus with boundary "
        "asymptotics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--geometry", required=True,
                       help="builtin geometry name or path to a JSON document")
        p.add_argument("--dim", type=int, default=4,
                       help="chart dimension for builtin geometries")
        p.add_argument("--param", action="append", default=[],
                       metavar="K=V", help="geometry parameter (repeatable)")
        p.add_argument("--eps0", type=float, default=0.05)
        p.add_argument("--levels", type=int, default=6)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--points", type=int, default=20,
                       help="interior sample point count")
        p.add_argument("--boundary-points", type=int, default=5)
        p.add_argument("--ode-step", type=float, default=1e-3)
        p.add_argument("--ode-horizon", type=float, default=0.2)
        p.add_argument("--jet-order", type=int, default=6)

    pv = sub.add_parser("verify", help="run proposition-level checks")
    common(pv)
    pv.add_argument("--checks", default="all",
                    help='comma-separated check ids or "all"')
    pv.add_argument("--out", default=None, help="report path (default stdout)")
    pv.add_argument("--format", choices=("json", "csv"), default="json")

    pe = sub.add_parser("eval", help="evaluate one quantity at a point")
    common(pe)
    pe.add_argument("--quantity", required=True, choices=EVAL_QUANTITIES)
    pe.add_argument("--point", default=None, help="comma-separated coordinates")
    pe.add_argument("--boundary-point", default=None,
                    help="comma-separated boundary coordinates")
    pe.add_argument("--extrapolate", action="store_true",
                    help="extrapolate along the inward ray")
    pe.add_argument("--out", default=None)
    return parser


def _parse_params(items) -> dict:
    params = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--param needs K=V, got {item!r}")
        key, value = item.split("=", 1)
        try:
            params[key] = float(value)
        except ValueError:
            params[key] = value
    return params


def _make_geometry(args) -> Geometry:
    source = args.geometry
    if source in BUILTIN_NAMES:
        try:
            return builtin_geometry(source, args.dim, **_parse_params(args.param))
        except GeometryError as err:
            raise ConfigError(str(err)) from err
    path = Path(source)
    if path.exists():
        try:
            doc = json.loads(path.read_text())
            return load_geometry(doc)
        except (GeometryError, json.JSONDecodeError) as err:
            raise ConfigError(f"could not load geometry {source!r}: {err}") from err
    raise ConfigError(
        f"unknown geometry {source!r}: not a builtin ({', '.join(BUILTIN_NAMES)}) "
        "and not an existing file"
    )


def _make_plan(args) -> SamplingPlan:
    seed = args.seed
    env_seed = os.environ.get("TRACTORLAB_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigError(
                f"TRACTORLAB_SEED must be an integer, got {env_seed!r}"
            ) from None
    return SamplingPlan(
        seed=seed,
        interior_points=args.points,
        boundary_points=args.boundary_points,
        eps0=args.eps0,
        levels=args.levels,
        ode_step=args.ode_step,
        ode_horizon=args.ode_horizon,
        jet_order=args.jet_order,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_verify(args) -> int:
    geom = _make_geometry(args)
    plan = _make_plan(args)
    ids = "all" if args.checks == "all" else [
        c.strip() for c in args.checks.split(",") if c.strip()
    ]
    try:
        reports = run_suite(geom, ids, plan)
    except KeyError as err:
        raise ConfigError(str(err)) from err
    docs = [r.to_doc() for r in reports]
    if args.format == "json":
        _emit(json.dumps(docs, indent=2, default=_json_default), args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["id", "status", "max_residual", "tolerance", "n_points", "reason"]
        )
        for r in reports:
            writer.writerow(
                [r.check_id, r.status, r.max_residual, r.tolerance,
                 r.n_points, r.reason]
            )
        _emit(buf.getvalue(), args.out)
    failed = [r for r in reports if r.status in ("fail", "error")]
    for r in reports:
        line = f"{r.check_id:26s} {r.status}"
        if r.status in ("fail", "error") and r.reason:
            line += f"  ({r.reason})"
        print(line, file=sys.stderr)
    return 1 if failed else 0


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return repr(value)
    raise TypeError(f"not serializable: {type(value)}")


def _parse_point(text: str, dim: int) -> tuple:
    try:
        coords = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad point {text!r}") from None
    if len(coords) != dim:
        raise ConfigError(
            f"point {text!r} has {len(coords)} coordinates, geometry needs {dim}"
        )
    return coords


def _eval_quantity(geom, args, plan):
    """Return (value, extrapolation_error | None) for the named quantity."""
    d = geom.dim
    n = d - 1
    quantity = args.quantity
    pack = geometry_curvature(geom)
    gfield = geom.metric_field()

    def constructor_c():
        c = bdy._constructor_c(geom)
        if c is None:
            raise ConfigError(
                "this geometry has no known asymptotic constant; evaluate "
                "h_asymptotic at a boundary point with --extrapolate instead"
            )
        return c

    def gamma_at(p):
        P = pack.schouten(p, 0)
        Pv = np.array([[P[a, b].value for b in range(d)] for a in range(d)])
        rho = geom.rho_jet(p, 1)
        grad = np.array([rho.partial(i).value for i in range(d)])
        return rho.value * Pv + np.outer(grad, grad) / (4.0 * rho.value)

    def t_at(p):
        P = pack.schouten(p, 0)
        Pv = np.array([[P[a, b].value for b in range(d)] for a in range(d)])
        rho = geom.rho_jet(p, 1)
        grad = np.array([rho.partial(i).value for i in range(d)])
        return -np.linalg.inv(Pv) @ grad / (4.0 * rho.value**2)

    def h_at(p):
        C = constructor_c()
        g = gfield.components(p, 0)
        gv = np.array([[g[i, j].value for j in range(d)] for i in range(d)])
        rho = geom.rho_jet(p, 1)
        grad = np.array([rho.partial(i).value for i in range(d)])
        return rho.value * gv - (C / rho.value) * np.outer(grad, grad)

    def pointwise(p):
        if quantity == "scalar_curvature":
            return pack.scalar(p, 0).value
        if quantity == "schouten":
            P = pack.schouten(p, 0)
            return np.array([[P[a, b].value for b in range(d)] for a in range(d)])
        if quantity == "weyl":
            C = pack.weyl(p, 0)
            return np.array(
                [[[[C[a, b, c, e].value for e in range(d)] for c in range(d)]
                  for b in range(d)] for a in range(d)]
            )
        if quantity == "cotton":
            Y = pack.cotton(p, 0)
            return np.array(
                [[[Y[a, b, c].value for c in range(d)] for b in range(d)]
                 for a in range(d)]
            )
        if quantity == "h_asymptotic":
            return h_at(p)
        if quantity == "l_tau":
            calc = TractorCalculus(geom)
            G = l_tau(calc, p, 0, calc.reference).components
            return np.array(
                [[G[i, j].value for j in range(d + 1)] for i in range(d + 1)]
            )
        if quantity == "gamma":
            return gamma_at(p)
        if quantity == "t_vector":
            return t_at(p)
        raise ConfigError(f"quantity {quantity!r} needs a boundary point")

    if args.point is not None:
        p = _parse_point(args.point, d)
        if quantity == "phi":
            raise ConfigError("phi lives on the boundary; use --boundary-point")
        try:
            return pointwise(p), None
        except (PoleError, JetError) as err:
            raise ConfigError(
                f"pole at {p}; evaluate at a boundary point with --extrapolate "
                f"({err})"
            ) from err

    if args.boundary_point is None:
        raise ConfigError("need --point or --boundary-point")
    y = _parse_point(args.boundary_point, d)
    if not geom.is_boundary_point(y, tol=1e-8):
        raise ConfigError(f"{y} is not on the boundary (rho = {geom.rho_value(y):g})")
    if not args.extrapolate:
        raise ConfigError(
            "boundary evaluation needs --extrapolate (direct evaluation hits "
            "the 1/rho pole)"
        )
    if quantity == "phi":
        calc = TractorCalculus(geom)
        frame = bdy.boundary_frame(calc, y, eps0=plan.eps0, levels=plan.levels)
        blocks = bdy.curvature_blocks(
            calc, frame, eps0=plan.eps0, levels=plan.levels
        )
        rep = bdy.normalize_boundary_connection(blocks)
        return rep.phi, blocks.extrapolation_error
    if quantity == "gamma":
        est = boundary_limit(gamma_at, geom, y, eps0=plan.eps0, levels=plan.levels)
        E = bdy.tangential_basis(geom, y)
        tangential = E.T @ np.asarray(est.value) @ E
        return {"full": np.asarray(est.value), "tangential": tangential}, est.error
    est = boundary_limit(pointwise, geom, y, eps0=plan.eps0, levels=plan.levels)
    if est.diverged:
        raise ConfigError(
            f"{quantity} diverges along the ray into {y}; no boundary value"
        )
    return est.value, est.error


def cmd_eval(args) -> int:
    geom = _make_geometry(args)
    plan = _make_plan(args)
    value, err = _eval_quantity(geom, args, plan)
    doc = {
        "geometry": geom.name,
        "dim": geom.dim,
        "quantity": args.quantity,
        "point": args.point or args.boundary_point,
        "extrapolated": args.boundary_point is not None,
    }
    if isinstance(value, dict):
        doc.update({k: _listify(v) for k, v in value.items()})
    else:
        doc["value"] = _listify(value)
    if err is not None:
        doc["extrapolation_error"] = float(err)
    _emit(json.dumps(doc, indent=2, default=_json_default), args.out)
    return 0


def _listify(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return float(value)
    return value


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_eval(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
