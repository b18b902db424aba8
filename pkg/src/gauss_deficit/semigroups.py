"""
Ornstein-Uhlenbeck semigroup, dilation semigroup, and exponent bookkeeping.

P_s f(x) = int f(e^{-s} x + sqrt(1 - e^{-2s}) y) dgamma(y)

evaluated per output point by Gauss-Hermite quadrature, with a closed-form
fast path for log-quadratic / mixture tagged fields.  Exponent triples
(p, q, s) carry the relation (q - 1)/(p - 1) = e^{2s}.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .families import Family, field_from_family
from .numerics import (DEFAULT_GH_NODES, EvaluationError, Grid1D, Grid2D,
                       GridField, ParameterError, QuadratureRule,
                       gauss_hermite_rule)


class IntegrabilityError(EvaluationError):
    """The OU integrand grows faster than the kernel decays.

    The admissible inputs are those in L^2(gamma_beta^{-1}); on the grid we
    can only detect the failure as overflow/non-finiteness.
    """


class InadmissibleExponentError(ParameterError):
    """(p, q) outside the admissible hypercontractivity regimes."""


def nelson_time(p: float, q: float) -> float:
    """s = (1/2) log((q-1)/(p-1)); requires the ratio to exceed 1."""
    if p == 1 or q == 1:
        raise InadmissibleExponentError("p and q must differ from 1")
    ratio = (q - 1.0) / (p - 1.0)
    if ratio <= 1.0:
        raise InadmissibleExponentError(
            f"(q-1)/(p-1) = {ratio} must exceed 1")
    return 0.5 * float(np.log(ratio))


@dataclass(frozen=True)
class ExponentTriple:
    p: float
    q: float
    s: float

    def __post_init__(self):
        if self.p == 1 or self.q == 1:
            raise InadmissibleExponentError("p and q must differ from 1")
        if self.s <= 0:
            raise InadmissibleExponentError("s must be positive")
        ratio = (self.q - 1.0) / (self.p - 1.0)
        if ratio <= 0 or abs(ratio - np.exp(2 * self.s)) > 1e-12 * abs(ratio):
            raise InadmissibleExponentError(
                "(q-1)/(p-1) = e^{2s} violated")

    @staticmethod
    def from_pq(p: float, q: float) -> "ExponentTriple":
        return ExponentTriple(p, q, nelson_time(p, q))

    @staticmethod
    def from_ps(p: float, s: float) -> "ExponentTriple":
        return ExponentTriple(p, 1.0 + (p - 1.0) * np.exp(2.0 * s), s)

    @property
    def regime(self) -> str:
        if 1 < self.p < self.q:
            return "forward"
        if self.q < self.p < 1:
            return ("reverse-same-sign" if self.p * self.q > 0
                    else "reverse-opposite-sign")
        raise InadmissibleExponentError(
            f"(p, q) = ({self.p}, {self.q}) not in an admissible regime")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def q_conj(self) -> float:
        return self.q / (self.q - 1.0)


@dataclass(frozen=True)
class BetaS:
    beta: float
    triple: ExponentTriple
    value: float

    @property
    def positive(self) -> bool:
        return self.value > 0


def beta_s(beta: float, triple: ExponentTriple) -> BetaS:
    """beta_s = 1 + (beta - 1) (q/p) e^{-2s}; flagged when non-positive."""
    if beta <= 0:
        raise ParameterError("beta must be positive")
    value = 1.0 + (beta - 1.0) * (triple.q / triple.p) * np.exp(-2 * triple.s)
    return BetaS(beta, triple, float(value))


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck semigroup


def _ou_closures_1d(f: GridField, s: float, rule: QuadratureRule):
    e = float(np.exp(-s))
    sig = float(np.sqrt(1.0 - e * e))
    z, w = rule.nodes, rule.weights
    logw = np.log(w)

    def value(x):
        x = np.asarray(x, float)
        samples = e * x[..., None] + sig * z
        vals = np.asarray(f(samples), float)
        if not np.all(np.isfinite(vals)):
            raise IntegrabilityError("OU integrand overflowed; input not in "
                                     "L^2(gamma_beta^{-1}) range")
        return vals @ w

    def logvalue(x):
        x = np.asarray(x, float)
        samples = e * x[..., None] + sig * z
        lv = np.asarray(f.log(samples), float)
        if np.any(np.isnan(lv)) or np.any(lv == np.inf):
            raise IntegrabilityError("OU integrand overflowed in log space")
        return logsumexp(lv + logw, axis=-1)

    return value, logvalue


def _ou_values_2d(f: GridField, s: float, rule: QuadratureRule,
                  x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    e = float(np.exp(-s))
    sig = float(np.sqrt(1.0 - e * e))
    z, w = rule.nodes, rule.weights
    m = len(z)
    flat1 = np.ravel(np.asarray(x1, float))
    flat2 = np.ravel(np.asarray(x2, float))
    out = np.empty(flat1.size)
    chunk = max(1, 8_000_000 // (m * m))
    for i in range(0, flat1.size, chunk):
        a = e * flat1[i:i + chunk, None, None] + sig * z[None, :, None]
        b = e * flat2[i:i + chunk, None, None] + sig * z[None, None, :]
        vals = np.asarray(f(np.broadcast_arrays(a, b)[0],
                            np.broadcast_arrays(a, b)[1]), float)
        if not np.all(np.isfinite(vals)):
            raise IntegrabilityError("OU integrand overflowed (2-D)")
        out[i:i + chunk] = (vals @ w) @ w
    return out.reshape(np.shape(x1))


def ou_apply(f: GridField, s: float,
             rule: Optional[QuadratureRule] = None) -> GridField:
    """P_s f as a GridField on the same grid.

    Tagged log-quadratic/mixture inputs take the complete-the-square closed
    form; everything else is quadrature per output point.
    """
    if s <= 0:
        raise ParameterError("s must be positive")
    if isinstance(f.tag, Family):
        return field_from_family(f.grid, f.tag.ou(s))
    if f.ndim == 1:
        if rule is None:
            rule = gauss_hermite_rule(DEFAULT_GH_NODES)
        value, logvalue = _ou_closures_1d(f, s, rule)
        return GridField(f.grid, value(f.grid.points), analytic=value,
                         analytic_log=logvalue)
    if rule is None:
        rule = gauss_hermite_rule(48)

    def value2(x1, x2):
        return _ou_values_2d(f, s, rule, x1, x2)

    X, Y = np.meshgrid(f.grid.gx.points, f.grid.gy.points, indexing="ij")
    return GridField(f.grid, value2(X, Y), analytic=value2)


def dilation_apply(f: GridField, s: float) -> GridField:
    """T_s f(x) = f(e^{-s} x); exact for analytic fields, resampled on grids."""
    if s < 0:
        raise ParameterError("s must be nonnegative")
    lam = float(np.exp(-s))
    if isinstance(f.tag, Family):
        return field_from_family(f.grid, f.tag.dilate(lam))
    if f.ndim == 1:
        fn = (lambda x: f(lam * np.asarray(x, float)))
        return GridField(f.grid, fn(f.grid.points),
                         analytic=fn if f.analytic is not None else None)
    fn2 = (lambda x1, x2: f(lam * np.asarray(x1, float),
                            lam * np.asarray(x2, float)))
    X, Y = np.meshgrid(f.grid.gx.points, f.grid.gy.points, indexing="ij")
    return GridField(f.grid, fn2(X, Y),
                     analytic=fn2 if f.analytic is not None else None)


def check_commutation(f: GridField, s: float,
                      rule: Optional[QuadratureRule] = None) -> float:
    """max interior |grad(P_s f) - e^{-s} P_s[grad f]| / scale(P_s f).

    The commutation identity grad(P_s f) = e^{-s} P_s[grad f] holds exactly;
    the residual measures discretization error only.
    """
    if f.ndim != 1:
        raise ParameterError("commutation check is 1-D only")
    if rule is None:
        rule = gauss_hermite_rule(DEFAULT_GH_NODES)
    psf = ou_apply(f, s, rule)
    h = f.grid.spacing
    lhs = np.gradient(psf.values, h, edge_order=2)

    if f.analytic is not None:
        fd = 1e-5
        df = (lambda x: (f(np.asarray(x, float) + fd)
                         - f(np.asarray(x, float) - fd)) / (2 * fd))
    else:
        dvals = np.gradient(f.values, h, edge_order=2)
        dfield = GridField(f.grid, dvals)
        df = dfield.__call__
    dfield = GridField(f.grid, np.asarray(df(f.grid.points), float),
                       analytic=df)
    rhs = np.exp(-s) * ou_apply(dfield, s, rule).values
    scale = np.max(np.abs(psf.values)) + 1e-300
    return float(np.max(np.abs(lhs - rhs)[2:-2]) / scale)
