"""
Grids, quadrature rules, and finite-difference operators.

Everything downstream works with functions sampled on uniform grids.  A
GridField couples the samples with an optional analytic closure so that
kernel integrals (Ornstein-Uhlenbeck, Fokker-Planck, Hopf-Lax) can be
evaluated exactly where a closed form is known and by interpolation
otherwise.

Conventions:

    gamma_b(x) = (2 pi b)^(-n/2) exp(-|x|^2 / (2 b)),   gamma := gamma_1.

Gauss-Hermite rules are normalized against the standard Gaussian: weights
sum to 1 and ``sum(w * f(z))`` approximates ``int f dgamma``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""


class EvaluationError(ValueError):
    """An integrand produced a non-finite value."""


class PositivityError(ValueError):
    """An operation requiring strict positivity received a non-positive value."""


class TruncationError(ValueError):
    """Estimated tail mass outside the grid exceeds tolerance."""


class TruncationWarning(UserWarning):
    """Endpoint values are not negligible; tail truncation may matter."""


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid1D:
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.n < 9:
            raise ParameterError(f"need n >= 9, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class Grid2D:
    gx: Grid1D
    gy: Grid1D

    @property
    def shape(self):
        return (self.gx.n, self.gy.n)


GridLike = Union[Grid1D, Grid2D]


def default_grid() -> Grid1D:
    """Desk-scale 1-D grid: 12 standard deviations, ~0.006 spacing."""
    return Grid1D(-12.0, 12.0, 4097)


def default_grid_2d() -> Grid2D:
    g = Grid1D(-8.0, 8.0, 257)
    return Grid2D(g, g)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class GridField:
    """Function samples on a grid, with optional exact evaluators.

    analytic      -- vectorized evaluator f(x) (1-D) or f(x1, x2) (2-D)
    analytic_log  -- evaluator of log f, preferred wherever powers/ratios
                     of densities are formed (overflow-safe)
    analytic_dlog -- evaluator of (log f)' (1-D only; used for Fisher
                     information and certificates)
    tag           -- closed-form family (LogQuad / Mixture from families.py)
                     enabling exact semigroup/flow fast paths
    """

    grid: GridLike
    values: np.ndarray
    analytic: Optional[Callable] = None
    analytic_log: Optional[Callable] = None
    analytic_dlog: Optional[Callable] = None
    tag: object = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.ndim == 1 and v.shape != (self.grid.n,):
            raise ParameterError("values shape does not match grid")
        if self.ndim == 2 and v.shape != self.grid.shape:
            raise ParameterError("values shape does not match grid")
        if not np.all(np.isfinite(v)):
            raise EvaluationError("field values must be finite")
        if self.analytic is not None:
            self._check_agreement()

    def _check_agreement(self):
        if self.ndim == 1:
            sampled = np.asarray(self.analytic(self.grid.points), float)
        else:
            X, Y = np.meshgrid(self.grid.gx.points, self.grid.gy.points,
                               indexing="ij")
            sampled = np.asarray(self.analytic(X, Y), float)
        scale = np.max(np.abs(self.values)) + 1e-300
        if np.max(np.abs(sampled - self.values)) > 1e-12 * max(scale, 1.0):
            raise EvaluationError("analytic closure disagrees with samples")

    @property
    def ndim(self) -> int:
        return 1 if isinstance(self.grid, Grid1D) else 2

    # -- evaluation -------------------------------------------------------

    def __call__(self, *xs):
        if self.analytic is not None:
            return np.asarray(self.analytic(*xs), float)
        if self.ndim == 1:
            (x,) = xs
            return np.interp(np.asarray(x, float), self.grid.points,
                             self.values, left=0.0, right=0.0)
        x1, x2 = (np.asarray(a, float) for a in xs)
        return _bilinear(self.grid, self.values, x1, x2)

    def log(self, *xs):
        """Evaluate log f, using the exact log closure when available."""
        if self.analytic_log is not None:
            return np.asarray(self.analytic_log(*xs), float)
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(self(*xs), 1e-300))

    def dlog(self, x, h: float = 1e-5):
        if self.analytic_dlog is not None:
            return np.asarray(self.analytic_dlog(x), float)
        return (self.log(np.asarray(x, float) + h)
                - self.log(np.asarray(x, float) - h)) / (2.0 * h)

    @classmethod
    def from_callable(cls, grid: GridLike, fn: Callable, *, log_fn=None,
                      dlog_fn=None, tag=None) -> "GridField":
        if isinstance(grid, Grid1D):
            vals = np.asarray(fn(grid.points), float)
        else:
            X, Y = np.meshgrid(grid.gx.points, grid.gy.points, indexing="ij")
            vals = np.asarray(fn(X, Y), float)
        return cls(grid, vals, analytic=fn, analytic_log=log_fn,
                   analytic_dlog=dlog_fn, tag=tag)


def _bilinear(grid: Grid2D, values: np.ndarray, x1, x2):
    """Bilinear interpolation with zero extension outside the grid."""
    gx, gy = grid.gx, grid.gy
    fx = (x1 - gx.lo) / gx.spacing
    fy = (x2 - gy.lo) / gy.spacing
    inside = (fx >= 0) & (fx <= gx.n - 1) & (fy >= 0) & (fy <= gy.n - 1)
    fx = np.clip(fx, 0, gx.n - 1 - 1e-12)
    fy = np.clip(fy, 0, gy.n - 1 - 1e-12)
    i = fx.astype(int)
    j = fy.astype(int)
    tx = fx - i
    ty = fy - j
    out = (values[i, j] * (1 - tx) * (1 - ty)
           + values[i + 1, j] * tx * (1 - ty)
           + values[i, j + 1] * (1 - tx) * ty
           + values[i + 1, j + 1] * tx * ty)
    return np.where(inside, out, 0.0)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    kind: str  # "gauss-hermite" | "trapezoid"
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.weights) <= 0):
            raise ParameterError("quadrature weights must be positive")


def gauss_hermite_rule(m: int) -> QuadratureRule:
    """Gauss-Hermite rule normalized for the standard Gaussian measure.

    ``int f dgamma ~= sum(w * f(z))``; exact for polynomials of degree
    <= 2m - 1.
    """
    if not (2 <= m <= 512):
        raise ParameterError(f"node count must be in [2, 512], got {m}")
    z, w = hermegauss(m)  # probabilists' weight exp(-x^2/2)
    w = w / np.sqrt(2.0 * np.pi)
    return QuadratureRule("gauss-hermite", z, w / w.sum() * 1.0)


DEFAULT_GH_NODES = 96


def integrate_gaussian(f, beta: float = 1.0,
                       rule: Optional[QuadratureRule] = None) -> float:
    """int f dgamma_beta via Gauss-Hermite with nodes rescaled by sqrt(beta)."""
    if beta <= 0:
        raise ParameterError("beta must be positive")
    if rule is None:
        rule = gauss_hermite_rule(DEFAULT_GH_NODES)
    fe = f if callable(f) else f.__call__
    x = np.sqrt(beta) * rule.nodes
    vals = np.asarray(fe(x), float)
    if not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(vals)][0]
        raise EvaluationError(f"integrand non-finite at node x={bad}")
    return float(vals @ rule.weights)


def tail_estimate(values: np.ndarray, spacing: float) -> float:
    """Crude one-sided tail-mass bound assuming exponential decay."""
    est = 0.0
    for end, prev in ((values[-1], values[-2]), (values[0], values[1])):
        a, b = abs(end), abs(prev)
        if a < 1e-300:
            continue
        if b > a > 0:
            lam = np.log(b / a) / spacing  # decay rate per unit length
            est += a / max(lam, 1e-2)
        else:
            est += a  # not decaying; report the raw endpoint value
    return est


def integrate_lebesgue(f: GridField, *, tail_tol: float = 1e-8) -> float:
    """Composite trapezoid over the grid, with an endpoint-decay check."""
    v = f.values
    if f.ndim == 1:
        h = f.grid.spacing
        scale = np.max(np.abs(v)) + 1e-300
        if max(abs(v[0]), abs(v[-1])) > 1e-14 * scale:
            if tail_estimate(v, h) > tail_tol:
                raise TruncationError("estimated tail mass exceeds tolerance")
            warnings.warn("integrand not negligible at grid endpoints",
                          TruncationWarning, stacklevel=2)
        return float(np.trapezoid(v, dx=h))
    hx, hy = f.grid.gx.spacing, f.grid.gy.spacing
    scale = np.max(np.abs(v)) + 1e-300
    edge = max(np.max(np.abs(v[0])), np.max(np.abs(v[-1])),
               np.max(np.abs(v[:, 0])), np.max(np.abs(v[:, -1])))
    if edge > 1e-14 * scale:
        if edge * (f.grid.gx.hi - f.grid.gx.lo) > tail_tol:
            raise TruncationError("estimated tail mass exceeds tolerance")
        warnings.warn("integrand not negligible at grid boundary",
                      TruncationWarning, stacklevel=2)
    return float(np.trapezoid(np.trapezoid(v, dx=hy, axis=1), dx=hx))


# ---------------------------------------------------------------------------
# finite differences of log f


class LogDerivatives2D(NamedTuple):
    gx: np.ndarray
    gy: np.ndarray
    hxx: np.ndarray
    hxy: np.ndarray
    hyy: np.ndarray
    lap: np.ndarray


def _second_difference(L: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    L = np.moveaxis(L, axis, 0)
    out = np.empty_like(L)
    out[1:-1] = (L[2:] - 2.0 * L[1:-1] + L[:-2]) / h**2
    # second-order one-sided stencils at the boundary
    out[0] = (2 * L[0] - 5 * L[1] + 4 * L[2] - L[3]) / h**2
    out[-1] = (2 * L[-1] - 5 * L[-2] + 4 * L[-3] - L[-4]) / h**2
    return np.moveaxis(out, 0, axis)


def log_derivatives(f: GridField):
    """Central finite differences of log f (one-sided at the boundary).

    1-D: returns ``(grad, hess)`` as GridFields.
    2-D: returns a LogDerivatives2D with both gradients, the full Hessian
    entries and the Laplacian of log f.
    """
    if np.any(f.values <= 0):
        raise PositivityError("log_derivatives requires strictly positive f")
    if f.ndim == 1:
        h = f.grid.spacing
        L = np.log(f.values)
        grad = np.gradient(L, h, edge_order=2)
        hess = _second_difference(L, h)
        return (GridField(f.grid, grad), GridField(f.grid, hess))
    hx, hy = f.grid.gx.spacing, f.grid.gy.spacing
    L = np.log(f.values)
    gx = np.gradient(L, hx, axis=0, edge_order=2)
    gy = np.gradient(L, hy, axis=1, edge_order=2)
    hxx = _second_difference(L, hx, axis=0)
    hyy = _second_difference(L, hy, axis=1)
    hxy = np.gradient(gx, hy, axis=1, edge_order=2)
    return LogDerivatives2D(gx, gy, hxx, hxy, hyy, hxx + hyy)
