"""Truncated multivariate Taylor arithmetic ("jets").

A :class:`Jet` holds the Taylor coefficients of a smooth real function at a
point, one coefficient per multi-index ``m`` with total degree ``|m| <= K``.
The coefficient stored for ``m`` is the Taylor coefficient
``(1/m!) * d^m f``, so ``value`` (the coefficient of the zero multi-index)
is the function value and first-order coefficients are first partials.

Coefficients are laid out in graded lexicographic order: multi-indices are
sorted by total degree first, and within a degree the variable ``x0`` is
senior to ``x1`` and so on (``(2,0) before (1,1) before (0,2)``).  The order
does not depend on the truncation degree, so a jet of order ``K`` truncates
to order ``K' < K`` by keeping its leading coefficients.  Serialized
coefficient vectors are therefore comparable across runs and orders.

Arithmetic is exact through the truncation degree: ``mul`` is the graded
convolution, ``div`` goes through the Taylor reciprocal, and elementary
functions are applied by univariate composition.  Division by a jet whose
value is (numerically) zero raises :class:`PoleError`; the boundary checks
in the rest of the package rely on that signal to detect genuine ``1/rho``
singularities, so the error is first class and never replaced by ``inf`` or
``nan``.

All jets are immutable values and all operations are pure, so evaluation at
distinct points may proceed concurrently without shared state.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_ORDER",
    "Jet",
    "JetError",
    "PoleError",
    "DomainError",
    "JetSpace",
    "jet_space",
    "jet_constant",
    "jet_variable",
    "jet_arith",
    "jet_apply",
    "jet_partial",
    "APPLY_FUNCTIONS",
    "jet_matrix_inverse",
    "jet_det",
]

#: Magnitudes below this count as an exact zero for pole/domain detection.
#: Boundary defining functions evaluate to ~1e-16 at floating-point boundary
#: points; legitimate interior divisors in this package stay above ~1e-3.
POLE_TOL = 1e-13

#: Default truncation degree for user-facing field evaluation.  The deepest
#: derivative chain in the calculus consumes four orders of the metric
#: (connection, its curvature trace, that trace's derivative, and one more
#: for the contorsion's derivative); two spare orders guard extrapolation.
DEFAULT_ORDER = 6


class JetError(ArithmeticError):
    """Base class for jet arithmetic failures."""


class PoleError(JetError):
    """Division (or negative power) by a jet with vanishing value."""


class DomainError(JetError):
    """Elementary function applied outside its domain (e.g. log of <= 0)."""


def _multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices with |m| <= order, in graded lexicographic order."""
    out: list[tuple[int, ...]] = []
    for deg in range(order + 1):
        batch = []
        for combo in combinations_with_replacement(range(dim), deg):
            m = [0] * dim
            for i in combo:
                m[i] += 1
            batch.append(tuple(m))
        batch.sort(key=lambda m: tuple(-c for c in m))
        out.extend(batch)
    return out


class JetSpace:
    """Index tables for jets of a fixed dimension and truncation order.

    Instances are cached by :func:`jet_space`; building the multiplication
    table is the only non-trivial cost and happens once per ``(dim, order)``.
    """

    def __init__(self, dim: int, order: int):
        if dim < 1:
            raise ValueError(f"jet dimension must be >= 1, got {dim}")
        if order < 0:
            raise ValueError(f"jet order must be >= 0, got {order}")
        self.dim = dim
        self.order = order
        self.multis = _multi_indices(dim, order)
        self.ncoeff = len(self.multis)
        self.index: dict[tuple[int, ...], int] = {
            m: k for k, m in enumerate(self.multis)
        }
        self.degrees = np.array([sum(m) for m in self.multis], dtype=np.int64)
        self._mul_table: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._partial_tables: list[tuple[np.ndarray, np.ndarray]] | None = None

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"JetSpace(dim={self.dim}, order={self.order})"

    @property
    def mul_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Index triples (i, j, k) with multis[i] + multis[j] = multis[k]."""
        if self._mul_table is None:
            ii: list[int] = []
            jj: list[int] = []
            kk: list[int] = []
            for i, mi in enumerate(self.multis):
                di = self.degrees[i]
                for j, mj in enumerate(self.multis):
                    if di + self.degrees[j] > self.order:
                        continue
                    k = self.index[tuple(a + b for a, b in zip(mi, mj))]
                    ii.append(i)
                    jj.append(j)
                    kk.append(k)
            self._mul_table = (
                np.array(ii, dtype=np.intp),
                np.array(jj, dtype=np.intp),
                np.array(kk, dtype=np.intp),
            )
        return self._mul_table

    @property
    def partial_tables(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per-variable (source index, factor) tables for differentiation.

        Entry ``i`` maps this space onto the order ``K-1`` space:
        ``out[m] = (m_i + 1) * in[m + e_i]``.
        """
        if self._partial_tables is None:
            lower = jet_space(self.dim, self.order - 1) if self.order > 0 else None
            tables = []
            for i in range(self.dim):
                src: list[int] = []
                fac: list[float] = []
                if lower is not None:
                    for m in lower.multis:
                        shifted = list(m)
                        shifted[i] += 1
                        src.append(self.index[tuple(shifted)])
                        fac.append(float(m[i] + 1))
                tables.append(
                    (np.array(src, dtype=np.intp), np.array(fac, dtype=np.float64))
                )
            self._partial_tables = tables
        return self._partial_tables

    def constant(self, value: float) -> "Jet":
        coeffs = np.zeros(self.ncoeff)
        coeffs[0] = float(value)
        return Jet(self, coeffs)

    def variable(self, i: int, base_value: float) -> "Jet":
        if not 0 <= i < self.dim:
            raise IndexError(
                f"variable index {i} out of range for dimension {self.dim}"
            )
        coeffs = np.zeros(self.ncoeff)
        coeffs[0] = float(base_value)
        if self.order >= 1:
            unit = tuple(1 if j == i else 0 for j in range(self.dim))
            coeffs[self.index[unit]] = 1.0
        return Jet(self, coeffs)

    def point(self, coords: Sequence[float]) -> list["Jet"]:
        """Coordinate jets of a point, one variable jet per coordinate."""
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(coords)}")
        return [self.variable(i, x) for i, x in enumerate(coords)]


_SPACES: dict[tuple[int, int], JetSpace] = {}


def jet_space(dim: int, order: int) -> JetSpace:
    """Cached :class:`JetSpace` for the given dimension and order."""
    key = (dim, order)
    space = _SPACES.get(key)
    if space is None:
        space = _SPACES[key] = JetSpace(dim, order)
    return space


class Jet:
    """One truncated Taylor expansion; see the module docstring."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=np.float64)
        if self.coeffs.shape != (space.ncoeff,):
            raise ValueError(
                f"expected {space.ncoeff} coefficients, got {self.coeffs.shape}"
            )

    # -- basic access -------------------------------------------------

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> float:
        """Constant term (the function value at the base point)."""
        return float(self.coeffs[0])

    def coefficient(self, multi: Sequence[int]) -> float:
        """Taylor coefficient of the given multi-index."""
        return float(self.coeffs[self.space.index[tuple(multi)]])

    def derivative(self, multi: Sequence[int]) -> float:
        """Partial derivative d^m f at the base point (coefficient times m!)."""
        m = tuple(multi)
        fac = 1.0
        for c in m:
            fac *= math.factorial(c)
        return self.coefficient(m) * fac

    def truncate(self, order: int) -> "Jet":
        """Copy of this jet truncated to a lower order."""
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} jet to {order}")
        if order == self.order:
            return self
        target = jet_space(self.dim, order)
        return Jet(target, self.coeffs[: target.ncoeff].copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def __repr__(self) -> str:
        return f"Jet(dim={self.dim}, order={self.order}, value={self.value:.6g})"

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ValueError(
                    f"jet dimension mismatch: {self.dim} vs {other.dim}"
                )
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return self.space.constant(float(other))
        return None

    @staticmethod
    def _align(a: "Jet", b: "Jet") -> tuple["Jet", "Jet"]:
        if a.order == b.order:
            return a, b
        k = min(a.order, b.order)
        return a.truncate(k), b.truncate(k)

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._align(self, other)
        return Jet(a.space, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._align(self, other)
        return Jet(a.space, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._align(other, self)
        return Jet(a.space, a.coeffs - b.coeffs)

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Jet(self.space, self.coeffs * float(other))
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._align(self, other)
        ii, jj, kk = a.space.mul_table
        prod = a.coeffs[ii] * b.coeffs[jj]
        return Jet(a.space, np.bincount(kk, weights=prod, minlength=a.space.ncoeff))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            if abs(float(other)) < 1e-290:
                raise PoleError("division by (numerically) zero scalar")
            return Jet(self.space, self.coeffs / float(other))
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self._reciprocal()

    def _reciprocal(self) -> "Jet":
        a0 = self.value
        # A pole means the value vanishes relative to the jet's *gradient*
        # (rho at a boundary point: value ~ 1e-16, gradient ~ 1).  Comparing
        # against the full coefficient vector would misfire on legitimately
        # invertible jets whose Taylor radius is small (1/rho^2 deep in a
        # ladder has top coefficients ~ rho^-(2+K)); comparing against
        # nothing would misfire on uniformly tiny jets like rho^4 near the
        # boundary.  Jets with a vanishing gradient fall back to the full
        # coefficient scale (catching the jet of x^2 at x = 0).
        grad_scale = float(np.max(np.abs(self.coeffs[1 : 1 + self.dim]))) \
            if self.order >= 1 else 0.0
        scale = grad_scale if grad_scale > 0.0 else float(np.max(np.abs(self.coeffs)))
        if abs(a0) <= POLE_TOL * scale or scale == 0.0:
            raise PoleError(
                f"reciprocal of a jet with vanishing value ({a0:.3e}); "
                "this usually means evaluation at a boundary pole"
            )
        k = self.order
        coeffs = np.array([(-1.0) ** m / a0 ** (m + 1) for m in range(k + 1)])
        return _compose(self, coeffs)

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) or (
            isinstance(p, float) and p.is_integer()
        ):
            p = int(p)
            if p >= 0:
                result = self.space.constant(1.0)
                base = self
                e = p
                while e:
                    if e & 1:
                        result = result * base
                    base = base * base
                    e >>= 1
                return result
            return self.space.constant(1.0) / self.__pow__(-p)
        return jet_apply("pow", self, param=float(p))

    def partial(self, i: int) -> "Jet":
        """Jet of the i-th partial derivative, one order lower."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        if not 0 <= i < self.dim:
            raise IndexError(f"variable index {i} out of range")
        src, fac = self.space.partial_tables[i]
        lower = jet_space(self.dim, self.order - 1)
        return Jet(lower, self.coeffs[src] * fac)


# -- elementary functions ---------------------------------------------


def _compose(a: Jet, series: np.ndarray) -> Jet:
    """Horner evaluation of sum_m series[m] * (a - a.value)^m."""
    da_coeffs = a.coeffs.copy()
    da_coeffs[0] = 0.0
    da = Jet(a.space, da_coeffs)
    result = a.space.constant(float(series[-1]))
    for m in range(len(series) - 2, -1, -1):
        result = result * da + float(series[m])
    return result


def _series_exp(a0: float, k: int, _p) -> np.ndarray:
    e = math.exp(a0)
    return np.array([e / math.factorial(m) for m in range(k + 1)])


def _series_log(a0: float, k: int, _p) -> np.ndarray:
    if a0 <= POLE_TOL:
        raise DomainError(f"log of non-positive value {a0:.3e}")
    out = [math.log(a0)]
    out += [(-1.0) ** (m + 1) / (m * a0**m) for m in range(1, k + 1)]
    return np.array(out)


def _series_sqrt(a0: float, k: int, _p) -> np.ndarray:
    if a0 <= POLE_TOL:
        raise DomainError(f"sqrt of non-positive value {a0:.3e}")
    return _series_pow(a0, k, 0.5)


def _series_pow(a0: float, k: int, p: float) -> np.ndarray:
    if a0 <= POLE_TOL:
        # Integer exponents never reach this path (handled in __pow__).
        raise DomainError(f"non-integer power of non-positive value {a0:.3e}")
    out = []
    coeff = 1.0
    for m in range(k + 1):
        out.append(coeff * a0 ** (p - m))
        coeff *= (p - m) / (m + 1)
    return np.array(out)


def _series_sin(a0: float, k: int, _p) -> np.ndarray:
    cycle = [math.sin(a0), math.cos(a0), -math.sin(a0), -math.cos(a0)]
    return np.array([cycle[m % 4] / math.factorial(m) for m in range(k + 1)])


def _series_cos(a0: float, k: int, _p) -> np.ndarray:
    cycle = [math.cos(a0), -math.sin(a0), -math.cos(a0), math.sin(a0)]
    return np.array([cycle[m % 4] / math.factorial(m) for m in range(k + 1)])


def _series_tan(a0: float, k: int, _p) -> np.ndarray:
    if abs(math.cos(a0)) <= POLE_TOL:
        raise DomainError(f"tan at a pole of cosine, argument {a0:.6g}")
    # Univariate jet division sin(t)/cos(t) around a0 yields the series.
    t = jet_space(1, k).variable(0, a0)
    return (jet_apply("sin", t) / jet_apply("cos", t)).coeffs.copy()


def _series_atan(a0: float, k: int, _p) -> np.ndarray:
    # atan' = 1/(1+t^2): integrate the univariate jet of the derivative.
    out = np.empty(k + 1)
    out[0] = math.atan(a0)
    if k >= 1:
        t = jet_space(1, k - 1).variable(0, a0)
        g = 1.0 / (1.0 + t * t)
        for m in range(1, k + 1):
            out[m] = g.coeffs[m - 1] / m
    return out


_SERIES: dict[str, Callable[[float, int, float | None], np.ndarray]] = {
    "exp": _series_exp,
    "log": _series_log,
    "sqrt": _series_sqrt,
    "pow": _series_pow,
    "sin": _series_sin,
    "cos": _series_cos,
    "tan": _series_tan,
    "atan": _series_atan,
}

#: Names accepted by :func:`jet_apply`.
APPLY_FUNCTIONS = tuple(_SERIES) + ("abs_smooth",)


# -- module-level operations -------------------------------------------


def jet_constant(value: float, dim: int, order: int) -> Jet:
    return jet_space(dim, order).constant(value)


def jet_variable(i: int, base_value: float, dim: int, order: int) -> Jet:
    """Jet of the coordinate function x^i at the base point."""
    return jet_space(dim, order).variable(i, base_value)


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    """Binary arithmetic by name; ``op`` in {add, sub, mul, div}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_apply(f: str, a: Jet, param: float | None = None) -> Jet:
    """Compose an elementary function with a jet, exact through the order.

    ``f`` is one of ``exp, log, sqrt, pow, sin, cos, tan, atan, abs_smooth``;
    ``pow`` takes the exponent through ``param``.  ``abs_smooth`` is the
    absolute value away from zero (``sign(a) * a``), which is smooth there.
    """
    if f == "abs_smooth":
        if abs(a.value) <= POLE_TOL:
            raise DomainError("abs_smooth at a (numerical) zero crossing")
        return a if a.value > 0 else -a
    if f == "pow_const":
        f = "pow"
    try:
        builder = _SERIES[f]
    except KeyError:
        raise ValueError(f"unknown function {f!r} for jet_apply") from None
    series = builder(a.value, a.order, param)
    return _compose(a, series)


def jet_partial(a: Jet, i: int) -> Jet:
    """Jet of df/dx^i; the result has order one lower."""
    return a.partial(i)


# -- linear algebra over jets ------------------------------------------


def _as_jet_array(values) -> np.ndarray:
    arr = np.empty(np.shape(values), dtype=object)
    arr[...] = values
    return arr


def jet_det(mat: np.ndarray) -> Jet:
    """Determinant of a square object array of jets (LU, partial pivoting)."""
    a = np.array(mat, dtype=object, copy=True)
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError("jet_det expects a square matrix")
    sign = 1.0
    vscale = max(abs(a[r, c].value) for r in range(m) for c in range(m))
    pivots: list[Jet] = []
    for col in range(m):
        piv = max(range(col, m), key=lambda r: abs(a[r, col].value))
        if abs(a[piv, col].value) <= POLE_TOL * vscale:
            zero = a[0, 0].space.constant(0.0)
            return zero
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            sign = -sign
        pivots.append(a[col, col])
        for r in range(col + 1, m):
            factor = a[r, col] / a[col, col]
            for c in range(col + 1, m):
                a[r, c] = a[r, c] - factor * a[col, c]
    det = pivots[0]
    for p in pivots[1:]:
        det = det * p
    return det * sign if sign < 0 else det


def jet_matrix_inverse(mat: np.ndarray) -> np.ndarray:
    """Inverse of a square object array of jets via Gauss-Jordan.

    Raises :class:`PoleError` when the value part of the matrix is singular
    (all candidate pivots below the pole tolerance).
    """
    a = np.array(mat, dtype=object, copy=True)
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError("jet_matrix_inverse expects a square matrix")
    space = a[0, 0].space
    vscale = max(abs(a[r, c].value) for r in range(m) for c in range(m))
    inv = np.empty((m, m), dtype=object)
    for r in range(m):
        for c in range(m):
            inv[r, c] = space.constant(1.0 if r == c else 0.0)
    for col in range(m):
        piv = max(range(col, m), key=lambda r: abs(a[r, col].value))
        if abs(a[piv, col].value) <= POLE_TOL * vscale:
            raise PoleError("singular jet matrix (no usable pivot)")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            inv[[col, piv]] = inv[[piv, col]]
        pivot = a[col, col]
        for c in range(m):
            a[col, c] = a[col, c] / pivot
            inv[col, c] = inv[col, c] / pivot
        for r in range(m):
            if r == col:
                continue
            factor = a[r, col]
            if abs(factor.value) == 0.0 and not np.any(factor.coeffs):
                continue
            for c in range(m):
                a[r, c] = a[r, c] - factor * a[col, c]
                inv[r, c] = inv[r, c] - factor * inv[col, c]
    return inv
