"""Coordinate charts with boundary, tensor-field evaluators and the catalog
of model geometries.

A :class:`Geometry` is one coordinate chart carrying a metric (or an explicit
connection), a boundary defining function ``rho`` (interior where
``rho > 0``, boundary at ``rho = 0``) and the compactness order ``alpha``.
Fields evaluate to jets, so every derivative needed downstream comes out of
one evaluation.

Boundary points are represented in-chart with ``rho`` numerically zero.
Fields with ``1/rho`` factors are never evaluated there -- jets raise
``PoleError`` instead -- and boundary values always come from extrapolation
(module ``boundary``) or from closed forms that are manifestly smooth up to
the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import expr as ex
from .jets import DEFAULT_ORDER, Jet, jet_space

__all__ = [
    "Chart",
    "TensorField",
    "Geometry",
    "GeometryError",
    "eval_field",
    "builtin_geometry",
    "load_geometry",
    "BUILTIN_NAMES",
    "GEOMETRY_DOC_SCHEMA",
]

Point = Sequence[float]

#: |rho| below this counts as "on the boundary" for in-chart points.
BOUNDARY_TOL = 1e-10


class GeometryError(ValueError):
    """Schema violations, parse errors and geometry validation failures."""


@dataclass(frozen=True)
class Chart:
    """A single coordinate chart; ``dim`` is the manifold dimension n+1."""

    coord_names: tuple[str, ...]

    def __post_init__(self):
        if len(self.coord_names) < 2:
            raise GeometryError("charts need dimension >= 2")
        if len(set(self.coord_names)) != len(self.coord_names):
            raise GeometryError("duplicate coordinate names")

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    def env(self, point: Point, order: int) -> dict[str, Jet]:
        """Coordinate jets at a point, keyed by coordinate name."""
        space = jet_space(self.dim, order)
        if len(point) != self.dim:
            raise GeometryError(
                f"point has {len(point)} coordinates, chart has {self.dim}"
            )
        return {
            name: space.variable(i, float(point[i]))
            for i, name in enumerate(self.coord_names)
        }


def _canonical_index(idx: tuple[int, ...], sym: tuple[tuple[int, int], ...]):
    """Sort index positions inside symmetric orbits (fixpoint iteration)."""
    idx = list(idx)
    changed = True
    while changed:
        changed = False
        for a, b in sym:
            if idx[a] > idx[b]:
                idx[a], idx[b] = idx[b], idx[a]
                changed = True
    return tuple(idx)


class TensorField:
    """A tensor field given by per-component evaluators producing jets.

    ``variance`` is one letter per index: ``"u"`` upper, ``"d"`` lower; the
    component array axes follow the same order.  ``weight`` is the projective
    density weight.  ``sym`` lists axis pairs in which the field is declared
    symmetric; evaluation only touches a canonical representative per orbit,
    so declared symmetries hold exactly.
    """

    def __init__(
        self,
        chart: Chart,
        variance: str,
        evaluator: Callable[[Point, int], np.ndarray],
        weight: float = 0.0,
        name: str = "",
        sym: tuple[tuple[int, int], ...] = (),
    ):
        self.chart = chart
        self.variance = variance
        self.weight = float(weight)
        self.name = name
        self.sym = tuple(tuple(p) for p in sym)
        self._evaluator = evaluator

    @property
    def n_upper(self) -> int:
        return self.variance.count("u")

    @property
    def n_lower(self) -> int:
        return self.variance.count("d")

    @property
    def rank(self) -> int:
        return len(self.variance)

    def components(self, point: Point, order: int | None = None) -> np.ndarray:
        """Evaluate every component as a jet; shape is (dim,) * rank.

        ``order`` defaults to the package-wide truncation degree.
        """
        if order is None:
            order = DEFAULT_ORDER
        out = self._evaluator(point, order)
        expected = (self.chart.dim,) * self.rank
        if np.shape(out) != expected:
            raise GeometryError(
                f"field {self.name!r} produced shape {np.shape(out)}, "
                f"expected {expected}"
            )
        return out

    @classmethod
    def from_exprs(
        cls,
        chart: Chart,
        exprs,
        variance: str,
        weight: float = 0.0,
        name: str = "",
        sym: tuple[tuple[int, int], ...] = (),
    ) -> "TensorField":
        """Field whose components are expressions in the chart coordinates."""
        arr = np.empty((chart.dim,) * len(variance), dtype=object)
        it = np.nditer(np.zeros(arr.shape), flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            node = exprs[idx] if arr.ndim else exprs
            if isinstance(node, str):
                node = ex.parse_expr(node, variables=chart.coord_names)
            unknown = ex.expr_variables(node) - set(chart.coord_names)
            if unknown:
                raise GeometryError(
                    f"component {idx} of {name!r} uses unknown names {sorted(unknown)}"
                )
            arr[idx] = node
        symt = tuple(tuple(p) for p in sym)

        def evaluator(point: Point, order: int) -> np.ndarray:
            env = chart.env(point, order)
            space = jet_space(chart.dim, order)
            out = np.empty(arr.shape, dtype=object)
            it = np.nditer(np.zeros(arr.shape), flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                canon = _canonical_index(idx, symt)
                if out[canon] is None:
                    val = ex.evaluate(arr[canon], env)
                    if not isinstance(val, Jet):
                        val = space.constant(float(val))
                    out[canon] = val
                out[idx] = out[canon]
            return out

        f = cls(chart, variance, evaluator, weight=weight, name=name, sym=sym)
        f.exprs = arr
        return f

    def symmetry_defect(self, point: Point, order: int = 1) -> float:
        """Max deviation from the declared symmetries at one point."""
        comps = self.components(point, order)
        worst = 0.0
        it = np.nditer(np.zeros(comps.shape), flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            canon = _canonical_index(idx, self.sym)
            if canon != idx:
                worst = max(
                    worst,
                    float(np.max(np.abs(comps[idx].coeffs - comps[canon].coeffs))),
                )
        return worst


def eval_field(f: TensorField, point: Point, order: int | None = None) -> np.ndarray:
    """Evaluate a tensor field at a point; each component is a jet."""
    return f.components(point, order)


# -- geometries ----------------------------------------------------------


@dataclass
class Geometry:
    """A chart-with-boundary plus metric (or connection) data.

    ``alpha`` is the projective compactness order the geometry is meant to
    have; the verification suite treats it as a claim to test, not a fact.
    """

    name: str
    chart: Chart
    rho: ex.Expr
    alpha: float
    metric: np.ndarray | None = None  # (dim, dim) object array of Expr
    christoffels: Callable | None = None  # explicit-connection alternative
    params: dict = field(default_factory=dict)
    interior_box: tuple[np.ndarray, np.ndarray] | None = None
    boundary_sampler: Callable | None = None
    exact_hat_christoffels: Callable | None = None
    signature: tuple[int, int] | None = None

    def __post_init__(self):
        if self.metric is None and self.christoffels is None:
            raise GeometryError("geometry needs a metric or explicit christoffels")
        if not 0 < self.alpha <= 2:
            raise GeometryError(f"alpha must lie in (0, 2], got {self.alpha}")

    @property
    def dim(self) -> int:
        return self.chart.dim

    # -- scalar rho ----------------------------------------------------

    def rho_jet(self, point: Point, order: int) -> Jet:
        val = ex.evaluate(self.rho, self.chart.env(point, order))
        if not isinstance(val, Jet):
            val = jet_space(self.dim, order).constant(float(val))
        return val

    def rho_value(self, point: Point) -> float:
        j = self.rho_jet(point, 0)
        return j.value if isinstance(j, Jet) else float(j)

    def drho(self, point: Point) -> np.ndarray:
        """Components of d(rho) at a point, as floats."""
        j = self.rho_jet(point, 1)
        return np.array([j.partial(i).value for i in range(self.dim)])

    def is_boundary_point(self, point: Point, tol: float = BOUNDARY_TOL) -> bool:
        return abs(self.rho_value(point)) <= tol

    def inward_direction(self, point: Point) -> np.ndarray:
        """Chart vector v with d(rho)(v) = 1, along the Euclidean gradient."""
        grad = self.drho(point)
        norm2 = float(grad @ grad)
        if norm2 <= 1e-16:
            raise GeometryError(f"d(rho) vanishes at {tuple(point)}")
        return grad / norm2

    # -- metric --------------------------------------------------------

    def metric_field(self) -> TensorField:
        if self.metric is None:
            raise GeometryError(f"geometry {self.name!r} has no metric")
        if not hasattr(self, "_metric_field"):
            self._metric_field = TensorField.from_exprs(
                self.chart, self.metric, "dd", name="g", sym=((0, 1),)
            )
        return self._metric_field

    def metric_jets(self, point: Point, order: int) -> np.ndarray:
        return self.metric_field().components(point, order)

    # -- sampling -------------------------------------------------------

    def interior_points(self, count: int, rng: np.random.Generator) -> list[tuple]:
        if self.interior_box is None:
            raise GeometryError(f"geometry {self.name!r} has no interior box")
        lo, hi = self.interior_box
        pts: list[tuple] = []
        attempts = 0
        while len(pts) < count:
            attempts += 1
            if attempts > 200 * max(count, 1):
                raise GeometryError(
                    f"could not sample {count} interior points of {self.name!r}"
                )
            x = rng.uniform(lo, hi)
            if self.rho_value(x) > 0.05:
                pts.append(tuple(float(v) for v in x))
        return pts

    def boundary_points(self, count: int, rng: np.random.Generator) -> list[tuple]:
        if self.boundary_sampler is None:
            raise GeometryError(
                f"geometry {self.name!r} has no boundary sampler"
            )
        return [tuple(float(v) for v in self.boundary_sampler(rng))
                for _ in range(count)]


# -- built-in catalog ------------------------------------------------------

BUILTIN_NAMES = ("flat", "klein", "af2_generic", "af1_generic", "poincare_control")


def _coords(dim: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(dim))


def _ball_sampler(dim: int):
    def sample(rng: np.random.Generator) -> np.ndarray:
        v = rng.normal(size=dim)
        return v / math.sqrt(float(v @ v))

    return sample


def _half_space_sampler(dim: int, first_value: float, spread: float = 0.6):
    def sample(rng: np.random.Generator) -> np.ndarray:
        y = rng.uniform(-spread, spread, size=dim)
        y[0] = first_value
        return y

    return sample


def _delta_src(i: int, j: int) -> str:
    return "1" if i == j else "0"


def _validate_metric_geometry(geom: Geometry, rng: np.random.Generator) -> None:
    """Shared construction checks: symmetry, invertibility, d(rho) != 0.

    Symmetry is checked on the raw declared components (the working metric
    field evaluates a canonical representative per symmetric orbit, which
    would mask an asymmetric document).
    """
    raw = TensorField.from_exprs(geom.chart, geom.metric, "dd", name="g-raw")
    gfield = geom.metric_field()
    pts = geom.interior_points(3, rng)
    for p in pts:
        g = raw.components(p, 0)
        gval = np.array([[g[i, j].value for j in range(geom.dim)]
                         for i in range(geom.dim)])
        if np.max(np.abs(gval - gval.T)) > 1e-12 * (1 + np.max(np.abs(gval))):
            raise GeometryError(f"metric of {geom.name!r} is asymmetric at {p}")
        if abs(np.linalg.det(gval)) < 1e-12:
            raise GeometryError(f"metric of {geom.name!r} is singular at {p}")
    evals = np.linalg.eigvalsh(
        np.array([[gfield.components(pts[0], 0)[i, j].value
                   for j in range(geom.dim)] for i in range(geom.dim)])
    )
    geom.signature = (int(np.sum(evals > 0)), int(np.sum(evals < 0)))
    if geom.boundary_sampler is not None:
        for y in geom.boundary_points(3, rng):
            grad = geom.drho(y)
            if math.sqrt(float(grad @ grad)) < 1e-8:
                raise GeometryError(
                    f"d(rho) of {geom.name!r} degenerate at boundary point {y}"
                )


def _tangential_h_check(geom: Geometry, h_exprs: np.ndarray,
                        rng: np.random.Generator) -> None:
    """The asymptotic-form data h must be nondegenerate tangentially at rho=0."""
    chart = geom.chart
    hfield = TensorField.from_exprs(chart, h_exprs, "dd", name="h", sym=((0, 1),))
    for y in geom.boundary_points(3, rng):
        h = hfield.components(y, 0)
        tang = np.array(
            [[h[i, j].value for j in range(1, geom.dim)]
             for i in range(1, geom.dim)]
        )
        if np.min(np.abs(np.linalg.eigvalsh(tang))) < 1e-8:
            raise GeometryError(
                f"boundary data h of {geom.name!r} degenerate tangentially at {y}"
            )


def _make_klein(dim: int) -> Geometry:
    coords = _coords(dim)
    r2 = " + ".join(f"{c}^2" for c in coords)
    rho = f"1 - ({r2})"
    g = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(dim):
            cross = f"{coords[i]}*{coords[j]}/({rho})^2"
            g[i, j] = f"1/({rho}) + {cross}" if i == j else cross
    chart = Chart(coords)

    def flat_hats(point, order):
        # The rho-modified connection of the Klein metric is the flat one.
        space = jet_space(dim, order)
        zero = space.constant(0.0)
        out = np.empty((dim, dim, dim), dtype=object)
        out[...] = zero
        return out

    return Geometry(
        name="klein",
        chart=chart,
        rho=ex.parse_expr(rho, coords),
        alpha=2.0,
        metric=g,
        interior_box=(np.full(dim, -0.55), np.full(dim, 0.55)),
        boundary_sampler=_ball_sampler(dim),
        exact_hat_christoffels=flat_hats,
    )


def _make_flat(dim: int) -> Geometry:
    coords = _coords(dim)
    g = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(dim):
            g[i, j] = _delta_src(i, j)
    lo = np.full(dim, -0.6)
    hi = np.full(dim, 0.6)
    hi[0] = 0.85
    return Geometry(
        name="flat",
        chart=Chart(coords),
        rho=ex.parse_expr(f"1 - {coords[0]}", coords),
        alpha=2.0,
        metric=g,
        interior_box=(lo, hi),
        boundary_sampler=_half_space_sampler(dim, 1.0),
    )


def _make_poincare(dim: int) -> Geometry:
    coords = _coords(dim)
    r2 = " + ".join(f"{c}^2" for c in coords)
    rho = f"1 - ({r2})"
    g = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(dim):
            g[i, j] = f"4/({rho})^2" if i == j else "0"
    return Geometry(
        name="poincare_control",
        chart=Chart(coords),
        rho=ex.parse_expr(rho, coords),
        alpha=2.0,
        metric=g,
        interior_box=(np.full(dim, -0.55), np.full(dim, 0.55)),
        boundary_sampler=_ball_sampler(dim),
    )


def _af_coords(dim: int) -> tuple[str, ...]:
    return ("rho",) + tuple(f"y{i}" for i in range(1, dim))


def _default_h_exprs(dim: int, coords: tuple[str, ...]) -> np.ndarray:
    h = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(dim):
            if i != j:
                h[i, j] = "0"
            elif i == 0:
                h[i, j] = "1"
            else:
                h[i, j] = f"1 + rho*{coords[i]}^2"
    return h


def _make_asymptotic_form(
    dim: int,
    alpha: float,
    C,
    h_exprs: np.ndarray | None,
    name: str,
    coords: tuple[str, ...] | None = None,
) -> Geometry:
    if coords is None:
        coords = _af_coords(dim)
    if abs(round(2.0 / alpha) - 2.0 / alpha) > 1e-12:
        raise GeometryError(
            f"asymptotic form needs 2/alpha integral, got alpha={alpha}"
        )
    if h_exprs is None:
        h_exprs = _default_h_exprs(dim, coords)
    if isinstance(C, str):
        c_src = C
    elif isinstance(C, (int, float)):
        c_src = repr(float(C))
    else:
        c_src = ex.expr_to_source(C)
    c_val = ex.evaluate(ex.parse_expr(c_src, coords),
                        {c: 0.0 for c in coords}, call=_float_call)
    if abs(float(c_val)) < 1e-12:
        raise GeometryError("asymptotic-form constant C must be nonzero")
    p = 2.0 / alpha  # rho power of the tangential part; transversal uses 2p
    pow1 = f"rho^{int(p)}" if p.is_integer() else f"rho^{p}"
    pow2 = f"rho^{int(2 * p)}" if p.is_integer() else f"rho^{2 * p}"
    g = np.empty((dim, dim), dtype=object)
    for i in range(dim):
        for j in range(dim):
            base = f"({_expr_src(h_exprs[i, j])})/{pow1}"
            if i == 0 and j == 0:
                base += f" + ({c_src})/{pow2}"
            g[i, j] = base
    lo = np.full(dim, -0.6)
    hi = np.full(dim, 0.6)
    lo[0], hi[0] = 0.15, 0.85
    geom = Geometry(
        name=name,
        chart=Chart(coords),
        rho=ex.parse_expr("rho", coords),
        alpha=alpha,
        metric=g,
        params={"C": c_src, "h": h_exprs},
        interior_box=(lo, hi),
        boundary_sampler=_half_space_sampler(dim, 0.0),
    )
    return geom


def _expr_src(node) -> str:
    return node if isinstance(node, str) else ex.expr_to_source(node)


def _float_call(func: str, value):
    return getattr(math, func)(value)


def builtin_geometry(name: str, dim: int, **params) -> Geometry:
    """Construct one of the model geometries.

    flat
        Euclidean metric with a hyperplane boundary; degenerate control.
    klein
        The Beltrami-Klein ball model of hyperbolic space; geodesics are
        straight lines, so the projective structure extends to the closed
        ball.
    af2_generic / af1_generic
        Order-2 / order-1 asymptotic-form families ``g = h/rho^(2/alpha) +
        C d(rho)^2 / rho^(4/alpha)`` with configurable smooth boundary data
        ``h`` (exprs) and constant ``C``.
    poincare_control
        Conformally compact ball model; *not* projectively compact, used as
        the negative control.
    """
    if dim < 3:
        raise GeometryError(f"builtin geometries need dim >= 3, got {dim}")
    rng = np.random.default_rng(20260809)
    if name == "klein":
        geom = _make_klein(dim)
    elif name == "flat":
        geom = _make_flat(dim)
    elif name == "poincare_control":
        geom = _make_poincare(dim)
    elif name == "af2_generic":
        geom = _make_asymptotic_form(
            dim, 2.0, params.get("C", 0.25), params.get("h"), "af2_generic"
        )
        _tangential_h_check(geom, geom.params["h"], rng)
    elif name == "af1_generic":
        geom = _make_asymptotic_form(
            dim, 1.0, params.get("C", 0.25), params.get("h"), "af1_generic"
        )
        _tangential_h_check(geom, geom.params["h"], rng)
    else:
        raise GeometryError(
            f"unknown geometry {name!r}; builtins are {BUILTIN_NAMES}"
        )
    _validate_metric_geometry(geom, rng)
    return geom


# -- document loading ------------------------------------------------------

_EXPR_SCHEMA = {"type": "string"}
_EXPR_MATRIX_SCHEMA = {
    "type": "array",
    "items": {"type": "array", "items": _EXPR_SCHEMA},
}

GEOMETRY_DOC_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "name": {"type": "string"},
                "dim": {"type": "integer", "minimum": 2},
                "coords": {"type": "array", "items": {"type": "string"}},
                "rho": _EXPR_SCHEMA,
                "alpha": {"type": "number"},
                "metric": _EXPR_MATRIX_SCHEMA,
                "interior_box": {"type": "array"},
            },
            "required": ["dim", "coords", "rho", "alpha", "metric"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "asymptotic_form"},
                "name": {"type": "string"},
                "dim": {"type": "integer", "minimum": 3},
                "coords": {"type": "array", "items": {"type": "string"}},
                "alpha": {"type": "number"},
                "C": {"oneOf": [{"type": "number"}, _EXPR_SCHEMA]},
                "h": _EXPR_MATRIX_SCHEMA,
                "interior_box": {"type": "array"},
            },
            "required": ["kind", "dim", "alpha", "C", "h"],
            "additionalProperties": False,
        },
    ]
}


def load_geometry(doc: Mapping) -> Geometry:
    """Build a validated geometry from a configuration document (JSON shape).

    Runs the same validation as :func:`builtin_geometry`: schema first, then
    expression parsing (errors carry source offsets), then numeric checks at
    sampled points.
    """
    import jsonschema

    try:
        jsonschema.validate(doc, GEOMETRY_DOC_SCHEMA)
    except jsonschema.ValidationError as err:
        raise GeometryError(f"geometry document rejected: {err.message}") from err

    dim = int(doc["dim"])
    rng = np.random.default_rng(20260809)
    if doc.get("kind") == "asymptotic_form":
        coords = tuple(doc.get("coords", _af_coords(dim)))
        h = np.array(doc["h"], dtype=object)
        if h.shape != (dim, dim):
            raise GeometryError(f"h must be {dim}x{dim}, got {h.shape}")
        c_doc = doc["C"]
        c_src = c_doc if isinstance(c_doc, str) else repr(float(c_doc))
        geom = _make_asymptotic_form(
            dim, float(doc["alpha"]), c_src, h,
            doc.get("name", "asymptotic_form"), coords,
        )
        _tangential_h_check(geom, h, rng)
    else:
        coords = tuple(doc["coords"])
        if len(coords) != dim:
            raise GeometryError(
                f"got {len(coords)} coordinate names for dim {dim}"
            )
        metric_doc = np.array(doc["metric"], dtype=object)
        if metric_doc.shape != (dim, dim):
            raise GeometryError(
                f"metric must be {dim}x{dim}, got {metric_doc.shape}"
            )
        chart = Chart(coords)
        metric = np.empty((dim, dim), dtype=object)
        for i in range(dim):
            for j in range(dim):
                metric[i, j] = ex.parse_expr(str(metric_doc[i, j]), coords)
        if "interior_box" in doc:
            box = np.array(doc["interior_box"], dtype=float)
            interior_box = (box[0], box[1])
        else:
            interior_box = (np.full(dim, -0.55), np.full(dim, 0.55))
        geom = Geometry(
            name=doc.get("name", "custom"),
            chart=chart,
            rho=ex.parse_expr(str(doc["rho"]), coords),
            alpha=float(doc["alpha"]),
            metric=metric,
            interior_box=interior_box,
        )
        geom.boundary_sampler = _make_ray_boundary_sampler(geom)
    _validate_metric_geometry(geom, rng)
    return geom


def _make_ray_boundary_sampler(geom: Geometry):
    """Boundary points by marching rays from the interior-box center."""
    lo, hi = geom.interior_box
    center = (np.asarray(lo) + np.asarray(hi)) / 2.0

    def sample(rng: np.random.Generator) -> np.ndarray:
        for _ in range(64):
            v = rng.normal(size=geom.dim)
            v /= math.sqrt(float(v @ v))
            s_in, s_out = 0.0, None
            s = 0.05
            for _ in range(400):
                val = geom.rho_value(center + s * v)
                if val <= 0:
                    s_out = s
                    break
                s_in = s
                s += 0.05
            if s_out is None:
                continue
            for _ in range(80):
                mid = 0.5 * (s_in + s_out)
                if geom.rho_value(center + mid * v) > 0:
                    s_in = mid
                else:
                    s_out = mid
            return center + 0.5 * (s_in + s_out) * v
        raise GeometryError(
            f"could not find boundary points for {geom.name!r} by ray search"
        )

    return sample
