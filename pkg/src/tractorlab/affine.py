"""Affine-connection calculus: Levi-Civita construction, projective
modifications, curvature and its projective decomposition, covariant
derivatives of weighted tensors, and projective density bundles.

Conventions (fixed here and used everywhere downstream):

* Christoffel arrays are indexed ``G[c, a, b] = Gamma^c_ab``.
* Curvature is ``[nabla_a, nabla_b] xi^c = R_ab^c_d xi^d``, i.e.
  ``R[a,b,c,d] = d_a G[c,b,d] - d_b G[c,a,d] + G[c,a,e] G[e,b,d]
  - G[c,b,e] G[e,a,d]``; with this sign the Klein model gets scalar
  curvature ``-n(n+1)``.
* Ricci contracts the first form index: ``Ric[a,b] = R[d,a,d,b]``.
* The Schouten tensor is ``P = Ric_sym/n + Ric_skew/(n+2)`` in dimension
  n+1, which makes the decomposition
  ``R_ab^c_d = C_ab^c_d + delta^c_a P_bd - delta^c_b P_ad + beta_ab delta^c_d``
  trace-consistent (``Ric = n P + beta^T``), with ``beta_ab = P_ba - P_ab``.
* The Cotton tensor is ``Y[a,b,c] = nabla_b P_ac - nabla_a P_bc``: exactly
  the bottom-left slot of the standard tractor curvature in a splitting,
  which is the consistency test that pins its sign.
* A density of weight w is transported by
  ``nabla_a s = d_a s + (w/(n+2)) Gamma^e_ea s`` (sign switchable through
  ``density_sign`` and pinned by the requirement that the canonical tau of
  a metric is parallel for its Levi-Civita connection).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fields import Chart, Geometry, GeometryError, TensorField
from .jets import Jet, PoleError, jet_apply, jet_det, jet_matrix_inverse, jet_space

__all__ = [
    "Connection",
    "CurvaturePack",
    "Density",
    "levi_civita",
    "projective_modify",
    "rho_connection",
    "curvature",
    "schouten_decompose",
    "covariant_derivative",
    "canonical_tau",
    "defining_density_check",
    "DENSITY_SIGN",
]

Point = Sequence[float]

#: Pinned sign of the density transport term (see module docstring).
DENSITY_SIGN = +1.0


class Connection:
    """An affine connection given by a Christoffel-symbol evaluator.

    ``evaluator(point, order)`` returns an object array ``G`` of jets with
    ``G[c, a, b] = Gamma^c_ab`` at the requested jet order.
    """

    def __init__(
        self,
        chart: Chart,
        evaluator: Callable[[Point, int], np.ndarray],
        torsion_free: bool = True,
        special: bool = False,
        provenance: str = "custom",
        base: "Connection | None" = None,
        upsilon: Callable[[Point, int], np.ndarray] | None = None,
        exact_boundary: Callable[[Point, int], np.ndarray] | None = None,
    ):
        self.chart = chart
        self._evaluator = evaluator
        self.torsion_free = torsion_free
        self.special = special
        self.provenance = provenance
        self.base = base
        self.upsilon = upsilon
        self.exact_boundary = exact_boundary
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return self.chart.dim

    def christoffels(self, point: Point, order: int) -> np.ndarray:
        key = (tuple(point), order)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = self._evaluator(point, order)
        return hit

    #: optional float-only evaluator (point -> (d,d,d) array); the ODE
    #: integrator goes through this when available.
    fast_values: Callable[[Point], np.ndarray] | None = None

    def christoffel_values(self, point: Point, order: int = 0) -> np.ndarray:
        if self.fast_values is not None and order == 0:
            return self.fast_values(point)
        g = self.christoffels(point, order)
        d = self.dim
        return np.array(
            [[[g[c, a, b].value for b in range(d)] for a in range(d)]
             for c in range(d)]
        )

    def trace_gamma(self, point: Point, order: int) -> np.ndarray:
        """The one-form ``Gamma^e_ea`` entering density transport."""
        g = self.christoffels(point, order)
        d = self.dim
        out = np.empty(d, dtype=object)
        for a in range(d):
            acc = g[0, 0, a]
            for e in range(1, d):
                acc = acc + g[e, e, a]
            out[a] = acc
        return out


def levi_civita(geom_or_field) -> Connection:
    """Levi-Civita connection of a metric geometry (or bare metric field).

    ``Gamma^c_ab = (1/2) g^cd (d_a g_db + d_b g_da - d_d g_ab)``; the result
    is torsion free and preserves the metric volume density.
    """
    if isinstance(geom_or_field, Geometry):
        gfield = geom_or_field.metric_field()
    else:
        gfield = geom_or_field
    chart = gfield.chart
    d = chart.dim

    def evaluator(point: Point, order: int) -> np.ndarray:
        g = gfield.components(point, order + 1)
        ginv = jet_matrix_inverse(g)
        dg = np.empty((d, d, d), dtype=object)
        for a in range(d):
            for i in range(d):
                for j in range(i, d):
                    dg[a, i, j] = dg[a, j, i] = g[i, j].partial(a)
        out = np.empty((d, d, d), dtype=object)
        for a in range(d):
            for b in range(a, d):
                for c in range(d):
                    acc = None
                    for e in range(d):
                        term = ginv[c, e] * (dg[a, e, b] + dg[b, e, a] - dg[e, a, b])
                        acc = term if acc is None else acc + term
                    out[c, a, b] = acc * 0.5
                    out[c, b, a] = out[c, a, b]
        return out

    def fast_values(point: Point) -> np.ndarray:
        g = gfield.components(point, 1)
        gv = np.empty((d, d))
        dg = np.empty((d, d, d))
        for i in range(d):
            for j in range(i, d):
                jet = g[i, j]
                gv[i, j] = gv[j, i] = jet.value
                for a in range(d):
                    dg[a, i, j] = dg[a, j, i] = jet.partial(a).value
        ginv = np.linalg.inv(gv)
        core = (
            np.einsum("aeb->eab", dg) + np.einsum("bea->eab", dg) - dg
        )
        return 0.5 * np.einsum("ce,eab->cab", ginv, core)

    conn = Connection(
        chart, evaluator, torsion_free=True, special=True, provenance="levi_civita"
    )
    conn.fast_values = fast_values
    return conn


def projective_modify(
    conn: Connection,
    upsilon: Callable[[Point, int], np.ndarray] | TensorField,
    provenance: str = "custom",
    special: bool | None = None,
) -> Connection:
    """Projective change ``Gamma^c_ab + delta^c_a Y_b + delta^c_b Y_a``.

    Torsion-freeness is preserved.  The modified connection preserves a
    volume density exactly when the base does and the one-form is closed;
    pass ``special`` to assert that (``rho_connection`` does), otherwise the
    flag is dropped.
    """
    if not conn.torsion_free:
        raise ValueError("projective modification requires a torsion-free base")
    if isinstance(upsilon, TensorField):
        ups_field = upsilon
        ups = lambda point, order: ups_field.components(point, order)  # noqa: E731
    else:
        ups = upsilon
    d = conn.dim

    def evaluator(point: Point, order: int) -> np.ndarray:
        g = conn.christoffels(point, order)
        u = ups(point, order)
        out = np.empty((d, d, d), dtype=object)
        for c in range(d):
            for a in range(d):
                for b in range(a, d):
                    val = g[c, a, b]
                    if c == a:
                        val = val + u[b]
                    if c == b:
                        val = val + u[a]
                    out[c, a, b] = val
                    out[c, b, a] = val
        return out

    out = Connection(
        conn.chart,
        evaluator,
        torsion_free=True,
        special=bool(special) if special is not None else False,
        provenance=provenance,
        base=conn,
        upsilon=ups,
    )
    if conn.fast_values is not None:
        def fast_values(point: Point) -> np.ndarray:
            gamma = conn.fast_values(point).copy()
            u = ups(point, 0)
            uv = np.array([j.value if isinstance(j, Jet) else float(j) for j in u])
            eye = np.eye(d)
            gamma += np.einsum("ca,b->cab", eye, uv)
            gamma += np.einsum("cb,a->cab", eye, uv)
            return gamma

        out.fast_values = fast_values
    return out


def rho_upsilon(geom: Geometry) -> Callable[[Point, int], np.ndarray]:
    """The one-form d(rho)/(alpha rho) as an evaluator."""

    def ups(point: Point, order: int) -> np.ndarray:
        rho = geom.rho_jet(point, order + 1)
        denom = rho.truncate(order) * geom.alpha
        return np.array(
            [rho.partial(a) / denom for a in range(geom.dim)], dtype=object
        )

    return ups


def rho_connection(geom: Geometry, base: Connection | None = None) -> Connection:
    """The distinguished modification ``nabla + d(rho)/(alpha rho)``.

    For a projectively compact geometry of order alpha this connection is
    smooth up to the boundary; its Christoffel evaluator raises a pole error
    at ``rho = 0``, where boundary values must come from the extension
    machinery in module ``boundary`` (or from an exact closed form attached
    to the geometry, as for the Klein model).
    """
    if base is None:
        base = levi_civita(geom)
    conn = projective_modify(
        base, rho_upsilon(geom), provenance="rho_modified", special=base.special
    )
    conn.exact_boundary = geom.exact_hat_christoffels
    conn.geometry = geom
    return conn


# -- curvature -------------------------------------------------------------


class CurvaturePack:
    """Curvature tensors of one connection, evaluated and memoized per point.

    ``riemann`` is always available; the Schouten-family accessors are
    enabled by :func:`schouten_decompose` (they need dim >= 3).  When the
    pack knows a metric it also provides the scalar curvature.
    """

    def __init__(self, conn: Connection, metric_field: TensorField | None = None):
        self.conn = conn
        self.metric_field = metric_field
        self.has_schouten = False
        self._memo: dict = {}

    @property
    def dim(self) -> int:
        return self.conn.dim

    def _cached(self, name: str, point: Point, order: int, build):
        key = (name, tuple(point), order)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = build()
        return hit

    def riemann(self, point: Point, order: int) -> np.ndarray:
        def build():
            d = self.dim
            G = self.conn.christoffels(point, order + 1)
            dG = np.empty((d, d, d, d), dtype=object)
            for e in range(d):
                for c in range(d):
                    for a in range(d):
                        for b in range(a, d):
                            dG[e, c, a, b] = dG[e, c, b, a] = G[c, a, b].partial(e)
            R = np.empty((d, d, d, d), dtype=object)
            zero = jet_space(d, order).constant(0.0)
            for a in range(d):
                R[a, a, :, :] = zero
                for b in range(a + 1, d):
                    for c in range(d):
                        for e in range(d):
                            acc = dG[a, c, b, e] - dG[b, c, a, e]
                            for f in range(d):
                                acc = acc + G[c, a, f] * G[f, b, e]
                                acc = acc - G[c, b, f] * G[f, a, e]
                            R[a, b, c, e] = acc
                            R[b, a, c, e] = -acc
            return R

        return self._cached("riemann", point, order, build)

    def ricci(self, point: Point, order: int) -> np.ndarray:
        def build():
            d = self.dim
            R = self.riemann(point, order)
            ric = np.empty((d, d), dtype=object)
            for a in range(d):
                for b in range(d):
                    acc = R[0, a, 0, b]
                    for e in range(1, d):
                        acc = acc + R[e, a, e, b]
                    ric[a, b] = acc
            return ric

        return self._cached("ricci", point, order, build)

    def scalar(self, point: Point, order: int) -> Jet:
        if self.metric_field is None:
            raise ValueError("scalar curvature needs a metric")

        def build():
            d = self.dim
            ric = self.ricci(point, order)
            g = self.metric_field.components(point, order)
            ginv = jet_matrix_inverse(g)
            acc = None
            for a in range(d):
                for b in range(d):
                    term = ginv[a, b] * ric[a, b]
                    acc = term if acc is None else acc + term
            return acc

        return self._cached("scalar", point, order, build)

    def schouten(self, point: Point, order: int) -> np.ndarray:
        def build():
            d = self.dim
            n = d - 1
            ric = self.ricci(point, order)
            P = np.empty((d, d), dtype=object)
            for a in range(d):
                for b in range(a, d):
                    sym = (ric[a, b] + ric[b, a]) * (0.5 / n)
                    if a == b:
                        P[a, a] = sym
                    else:
                        skew = (ric[a, b] - ric[b, a]) * (0.5 / (n + 2))
                        P[a, b] = sym + skew
                        P[b, a] = sym - skew
            return P

        return self._cached("schouten", point, order, build)

    def beta(self, point: Point, order: int) -> np.ndarray:
        def build():
            d = self.dim
            P = self.schouten(point, order)
            out = np.empty((d, d), dtype=object)
            for a in range(d):
                for b in range(d):
                    out[a, b] = P[b, a] - P[a, b]
            return out

        return self._cached("beta", point, order, build)

    def weyl(self, point: Point, order: int) -> np.ndarray:
        def build():
            d = self.dim
            R = self.riemann(point, order)
            P = self.schouten(point, order)
            beta = self.beta(point, order)
            C = np.empty((d, d, d, d), dtype=object)
            for a in range(d):
                for b in range(d):
                    for c in range(d):
                        for e in range(d):
                            val = R[a, b, c, e]
                            if c == a:
                                val = val - P[b, e]
                            if c == b:
                                val = val + P[a, e]
                            if c == e:
                                val = val - beta[a, b]
                            C[a, b, c, e] = val
            return C

        return self._cached("weyl", point, order, build)

    def schouten_derivative(self, point: Point, order: int) -> np.ndarray:
        """``nabla_a P_bc`` of this connection (array indexed [a, b, c])."""

        def build():
            d = self.dim
            P = self.schouten(point, order + 1)
            G = self.conn.christoffels(point, order)
            out = np.empty((d, d, d), dtype=object)
            for a in range(d):
                for b in range(d):
                    for c in range(d):
                        acc = P[b, c].partial(a)
                        for e in range(d):
                            acc = acc - G[e, a, b] * P[e, c]
                            acc = acc - G[e, a, c] * P[b, e]
                        out[a, b, c] = acc
            return out

        return self._cached("dP", point, order, build)

    def cotton(self, point: Point, order: int) -> np.ndarray:
        """``Y[a,b,c] = nabla_b P_ac - nabla_a P_bc`` (see module docstring)."""

        def build():
            d = self.dim
            dP = self.schouten_derivative(point, order)
            out = np.empty((d, d, d), dtype=object)
            for a in range(d):
                for b in range(d):
                    for c in range(d):
                        out[a, b, c] = dP[b, a, c] - dP[a, b, c]
            return out

        return self._cached("cotton", point, order, build)


def curvature(conn: Connection, metric_field: TensorField | None = None) -> CurvaturePack:
    """Curvature evaluator pack for a connection (Riemann/Ricci, plus the
    scalar curvature when a metric is supplied)."""
    return CurvaturePack(conn, metric_field)


def schouten_decompose(conn: Connection, pack: CurvaturePack) -> CurvaturePack:
    """Enable the projective decomposition accessors (P, beta, Weyl, Cotton)."""
    if pack.conn is not conn:
        raise ValueError("pack does not belong to this connection")
    if conn.dim < 3:
        raise ValueError("the projective decomposition needs dimension >= 3")
    pack.has_schouten = True
    return pack


def geometry_curvature(geom: Geometry, conn: Connection | None = None) -> CurvaturePack:
    """Convenience: curvature pack of a metric geometry with scalar enabled."""
    if conn is None:
        conn = levi_civita(geom)
    pack = CurvaturePack(conn, geom.metric_field())
    pack.has_schouten = True
    return pack


# -- weighted covariant derivative ------------------------------------------


def covariant_derivative(
    field: TensorField,
    conn: Connection,
    density_sign: float | None = None,
) -> TensorField:
    """Covariant derivative of a weighted tensor field.

    The result has one extra lower index in axis 0 (``out[a, ...] =
    nabla_a T[...]``).  Upper and lower indices get the usual Christoffel
    corrections; the projective weight w adds
    ``density_sign * (w/(n+2)) * Gamma^e_ea * T``.
    """
    sign = DENSITY_SIGN if density_sign is None else float(density_sign)
    chart = field.chart
    d = chart.dim
    variance = field.variance
    w = field.weight

    def evaluator(point: Point, order: int) -> np.ndarray:
        comps = field.components(point, order + 1)
        G = conn.christoffels(point, order)
        out = np.empty((d,) + comps.shape, dtype=object)
        weight_term = None
        if w != 0.0:
            tg = conn.trace_gamma(point, order)
            weight_term = [tg[a] * (sign * w / (d + 1)) for a in range(d)]
        it = np.nditer(np.zeros(comps.shape), flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            base = comps[idx]
            for a in range(d):
                acc = base.partial(a)
                for slot, var in enumerate(variance):
                    i_s = idx[slot]
                    for e in range(d):
                        other = comps[idx[:slot] + (e,) + idx[slot + 1:]]
                        if var == "u":
                            acc = acc + G[i_s, a, e] * other
                        else:
                            acc = acc - G[e, a, i_s] * other
                if weight_term is not None:
                    acc = acc + weight_term[a] * base
                out[(a,) + idx] = acc
        return out

    return TensorField(
        chart,
        "d" + variance,
        evaluator,
        weight=w,
        name=f"D({field.name})" if field.name else "D(.)",
        sym=tuple((a + 1, b + 1) for a, b in field.sym),
    )


# -- densities ---------------------------------------------------------------


@dataclass
class Density:
    """A projective density: weight w section in a chart trivialization."""

    chart: Chart
    weight: float
    component: Callable[[Point, int], Jet]
    name: str = ""

    def jet(self, point: Point, order: int) -> Jet:
        return self.component(point, order)

    def value(self, point: Point) -> float:
        return self.jet(point, 0).value

    def as_field(self) -> TensorField:
        return TensorField(
            self.chart,
            "",
            lambda point, order: _scalar_array(self.component(point, order)),
            weight=self.weight,
            name=self.name,
        )


def _scalar_array(j: Jet) -> np.ndarray:
    arr = np.empty((), dtype=object)
    arr[()] = j
    return arr


def canonical_tau(geom: Geometry) -> Density:
    """The canonical weight-2 density of a metric: ``|det g|^(-1/(n+2))``.

    It is parallel for the Levi-Civita connection and satisfies
    ``|tau^(-n-2) det(g^ab)| = 1`` identically.  For a geometry that really
    is projectively compact of order 2 it extends by zero to a defining
    density, i.e. ``tau/rho`` has a finite nonzero boundary limit.
    """
    if geom.metric is None:
        raise GeometryError("canonical tau needs a metric")
    gfield = geom.metric_field()
    power = -1.0 / (geom.dim + 1)

    def component(point: Point, order: int) -> Jet:
        g = gfield.components(point, order)
        det = jet_det(g)
        return jet_apply("pow", jet_apply("abs_smooth", det), param=power)

    return Density(geom.chart, 2.0, component, name="tau")


@dataclass
class DefiningDensityReport:
    """Outcome of the order-2 defining-density (volume growth) criterion."""

    points: list
    limits: list[float]
    errors: list[float]
    diverged: list[bool]
    passed: bool
    reason: str = ""


def defining_density_check(
    tau: Density,
    geom: Geometry,
    boundary_points: Sequence[Point] | None = None,
    eps0: float = 0.05,
    levels: int = 6,
    rng: np.random.Generator | None = None,
) -> DefiningDensityReport:
    """Verify that tau/rho^(2/alpha) extends to the boundary, nonzero.

    This is the numerical form of the statement that the parallel weight-2
    density extends by zero to a defining density precisely when the volume
    growth matches the compactness order (for order 2 the quotient is
    literally tau/rho).  Divergence (flat control) and a zero limit
    (conformally compact control) both fail.
    """
    from .extrapolate import boundary_ladder, richardson_limit

    power = 2.0 / geom.alpha
    if boundary_points is None:
        rng = rng or np.random.default_rng(0)
        boundary_points = geom.boundary_points(3, rng)
    limits: list[float] = []
    errors: list[float] = []
    diverged: list[bool] = []
    ok = True
    reason = ""
    for y in boundary_points:
        try:
            ladder = boundary_ladder(geom, y, eps0=eps0, levels=levels)
            values = [tau.value(p) / eps**power for eps, p in ladder]
        except PoleError:
            ok, reason = False, "pole while approaching the boundary"
            limits.append(float("nan"))
            errors.append(float("nan"))
            diverged.append(True)
            continue
        est = richardson_limit(values)
        limits.append(float(est.value))
        errors.append(est.error)
        diverged.append(est.diverged)
        if est.diverged:
            ok, reason = False, "tau/rho diverges at the boundary"
        elif est.error > 1e-5 * (1.0 + abs(est.value)):
            ok, reason = False, "tau/rho does not extrapolate smoothly"
        elif abs(est.value) < 1e-3:
            ok, reason = False, "tau/rho has zero boundary limit"
    return DefiningDensityReport(
        list(boundary_points), limits, errors, diverged, ok, reason
    )
