"""
Entropy, Fisher information, Gaussian L^p norms, the flow functional Q(t),
and every explicit sharp constant.

All integrals against gamma are Gauss-Hermite; fields carrying analytic
closures are evaluated exactly at the nodes, grid-only fields by
interpolation.  Norms are assembled in log space (log-sum-exp) so that
negative and large exponents are handled uniformly.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .families import LogQuad
from .flows import FPParams, fp_evolve
from .numerics import (DEFAULT_GH_NODES, EvaluationError, GridField,
                       ParameterError, PositivityError, QuadratureRule,
                       gauss_hermite_rule)
from .semigroups import ExponentTriple, IntegrabilityError, beta_s


@dataclass(frozen=True)
class EntFisher:
    entropy: float
    fisher: float


@dataclass(frozen=True)
class SharpConstant:
    name: str
    value: float
    params: dict = dc_field(default_factory=dict)


def _rule_or_default(rule: Optional[QuadratureRule]) -> QuadratureRule:
    return rule if rule is not None else gauss_hermite_rule(DEFAULT_GH_NODES)


# ---------------------------------------------------------------------------
# entropy and Fisher information


def _xlogx(x):
    out = np.zeros_like(x)
    big = x > 1e-300
    out[big] = x[big] * np.log(x[big])
    return out


def entropy_fisher(f: GridField,
                   rule: Optional[QuadratureRule] = None) -> EntFisher:
    """Ent_gamma(f) and I_gamma(f) for a relative density f (w.r.t. gamma).

    Ent = int f log f dgamma - F log F with F = int f dgamma;
    I   = int f |grad log f|^2 dgamma  (the stable form of int |grad f|^2/f).
    """
    rule = _rule_or_default(rule)
    z, w = rule.nodes, rule.weights
    if f.ndim == 1:
        fv = np.asarray(f(z), float)
        if np.any(fv < 0):
            raise PositivityError("entropy requires f >= 0")
        mass = float(fv @ w)
        ent = float(_xlogx(fv) @ w) - _xlogx(np.array([mass]))[0]
        dl = np.asarray(f.dlog(z), float)
        fisher = float((fv * dl * dl) @ w)
        return EntFisher(ent, fisher)
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    W = np.outer(w, w)
    fv = np.asarray(f(Z1, Z2), float)
    if np.any(fv < 0):
        raise PositivityError("entropy requires f >= 0")
    mass = float(np.sum(fv * W))
    ent = float(np.sum(_xlogx(fv) * W)) - _xlogx(np.array([mass]))[0]
    h = 1e-5
    gx = (f.log(Z1 + h, Z2) - f.log(Z1 - h, Z2)) / (2 * h)
    gy = (f.log(Z1, Z2 + h) - f.log(Z1, Z2 - h)) / (2 * h)
    fisher = float(np.sum(fv * (gx * gx + gy * gy) * W))
    return EntFisher(ent, fisher)


# ---------------------------------------------------------------------------
# Gaussian L^p norms


def _log_lp_1d(logf, r: float, rule: QuadratureRule) -> float:
    """log ||f||_{L^r(gamma)} from a log-evaluator."""
    lv = np.asarray(logf(rule.nodes), float)
    if np.any(np.isnan(lv)):
        raise EvaluationError("log integrand is NaN at a quadrature node")
    total = logsumexp(r * lv + np.log(rule.weights))
    if not np.isfinite(total):
        raise IntegrabilityError("|f|^r not integrable against gamma")
    return float(total / r)


def _log_lp_2d(logf, r: float, rule: QuadratureRule) -> float:
    z, w = rule.nodes, rule.weights
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    lv = np.asarray(logf(Z1, Z2), float)
    total = logsumexp(r * lv + np.log(np.outer(w, w)))
    if not np.isfinite(total):
        raise IntegrabilityError("|f|^r not integrable against gamma (2-D)")
    return float(total / r)


def lp_norm_gaussian(f: GridField, r: float,
                     rule: Optional[QuadratureRule] = None) -> float:
    """(int |f|^r dgamma)^{1/r}; r < 0 requires strictly positive f."""
    if r == 0:
        raise ParameterError("r must be nonzero")
    rule = _rule_or_default(rule)
    if f.ndim == 1:
        if r < 0 and np.any(np.asarray(f(rule.nodes)) <= 0):
            raise PositivityError("negative exponent requires f > 0")

        def logf(x):
            return np.log(np.abs(f(x)) + 1e-300) if f.analytic_log is None \
                else f.log(x)

        return float(np.exp(_log_lp_1d(logf, r, rule)))
    return float(np.exp(_log_lp_2d(lambda a, b: f.log(a, b), r, rule)))


# ---------------------------------------------------------------------------
# sharp constants


def _hc_ratio(beta: float, triple: ExponentTriple, n: int) -> float:
    bs = beta_s(beta, triple)
    if bs.value <= 0:
        raise ParameterError("beta_s <= 0: deficit constant undefined")
    return float(beta ** (n / (2 * triple.p_conj))
                 * bs.value ** (-n / (2 * triple.q_conj)))


def _dn(beta: float, n: int) -> float:
    return 0.5 * n * (np.log(beta) - 1.0 + 1.0 / beta)


def _mikulincer(beta: float, n: int) -> float:
    if beta == 1.0:
        return 0.0  # analytic limit of the ratio
    return float(-n * (2 * (1 - beta) + (beta + 1) * np.log(beta))
                 / (2 * (beta - 1)))


def _hj_t(tau: float, beta: float, n: int) -> float:
    if tau <= 0 or beta <= 0:
        raise ParameterError("tau and beta must be positive")
    if beta == 1.0:
        return 1.0  # analytic limit
    d = tau * (1.0 - 1.0 / beta)
    if 1.0 + d <= 0:
        raise ParameterError("T(tau, beta) undefined: 1 + tau(1-1/beta) <= 0")
    return float((np.exp(-1.0) * (1.0 + d) ** (1.0 / d))
                 ** (0.5 * n * (1.0 - 1.0 / beta)))


def _beckner_b(p: float, beta: float, n: int) -> float:
    pc = p / (p - 1.0)
    return float(beta ** (n / pc) * (1.0 + (beta - 1.0) * 2.0 / pc)
                 ** (-0.5 * n))


def sharp_constant(name: str, *, beta: float = None, p: float = None,
                   q: float = None, s: float = None, tau: float = None,
                   c1: float = None, c2: float = None,
                   triple: ExponentTriple = None, n: int = 1) -> SharpConstant:
    """Evaluate a named sharp constant.

    hc_ratio        beta^{n/2p'} beta_s^{-n/2q'}         (needs beta, triple)
    lsi_gauss       -(n/2)(log beta - 1 + 1/beta)
    dn              +(n/2)(log beta - 1 + 1/beta)
    talagrand_gauss n (1 + log(beta)/2 - sqrt(beta))
    mikulincer      -n (2(1-beta) + (beta+1) log beta) / (2(beta-1))
    beckner_b       beta^{n/p'} (1 + (beta-1) 2/p')^{-n/2}   (needs p, beta)
    hj_t            (e^{-1}(1+tau(1-1/beta))^{1/(tau(1-1/beta))})^{(n/2)(1-1/beta)}
    bl_h            (2 pi)^{1-(c1+c2)/2} sqrt(1-e^{-2s})
    """
    if triple is None and p is not None and q is not None:
        triple = ExponentTriple.from_pq(p, q)
    if name == "hc_ratio":
        value = _hc_ratio(beta, triple, n)
        params = dict(beta=beta, p=triple.p, q=triple.q, s=triple.s, n=n)
    elif name == "lsi_gauss":
        value = -_dn(beta, n)
        params = dict(beta=beta, n=n)
    elif name == "dn":
        value = _dn(beta, n)
        params = dict(beta=beta, n=n)
    elif name == "talagrand_gauss":
        value = float(n * (1.0 + 0.5 * np.log(beta) - np.sqrt(beta)))
        params = dict(beta=beta, n=n)
    elif name == "mikulincer":
        value = _mikulincer(beta, n)
        params = dict(beta=beta, n=n)
    elif name == "beckner_b":
        value = _beckner_b(p, beta, n)
        params = dict(beta=beta, p=p, n=n)
    elif name == "hj_t":
        value = _hj_t(tau, beta, n)
        params = dict(tau=tau, beta=beta, n=n)
    elif name == "bl_h":
        if s is None and triple is not None:
            s = triple.s
        value = float((2 * np.pi) ** (1.0 - 0.5 * (c1 + c2))
                      * np.sqrt(1.0 - np.exp(-2.0 * s)))
        params = dict(c1=c1, c2=c2, s=s)
    else:
        raise ParameterError(f"unknown sharp constant {name!r}")
    if not np.isfinite(value):
        raise EvaluationError(f"sharp constant {name} is not finite")
    return SharpConstant(name, float(value), params)


# ---------------------------------------------------------------------------
# the flow functional Q(t) and the Gross differentiation slope


def relative_log_closure(v: GridField):
    """log(v/gamma) as a plain closure."""

    def rel_log(x):
        x = np.asarray(x, float)
        return v.log(x) + 0.5 * x * x + 0.5 * np.log(2 * np.pi)

    return rel_log


def _check_ratio_bounded(v: GridField, beta: float):
    """Checkable proxy for the L^2(gamma_beta^{-1}) hypothesis.

    We require log(v^2/gamma_beta) to peak in the grid interior: if it is
    still climbing at the boundary the defining integral int v^2/gamma_beta
    has no reason to converge.
    """
    x = v.grid.points
    ratio = 2.0 * v.log(x) - LogQuad.gaussian(beta).log_at(x)
    k = int(np.argmax(ratio))
    if k < 2 or k > x.size - 3:
        raise IntegrabilityError(
            "v^2/gamma_beta peaks at the grid boundary; "
            "L^2(gamma_beta^{-1}) proxy check failed")


def ou_log_closure(logf, s: float, rule: QuadratureRule):
    """P_s in log space for a plain log-evaluator."""
    e = float(np.exp(-s))
    sig = float(np.sqrt(1.0 - e * e))
    logw = np.log(rule.weights)
    z = rule.nodes

    def out(x):
        x = np.asarray(x, float)
        lv = np.asarray(logf(e * x[..., None] + sig * z), float)
        return logsumexp(lv + logw, axis=-1)

    return out


def q_functional(v0: GridField, beta: float, triple: ExponentTriple,
                 t: float, rule: Optional[QuadratureRule] = None) -> float:
    """Q(t) = int gamma P_s[(v_t/gamma)^{1/p}]^q dx along the beta-flow."""
    rule = _rule_or_default(rule)
    _check_ratio_bounded(v0, beta)
    vt = v0 if t == 0 else fp_evolve(v0, FPParams(beta, t))
    rel_log = relative_log_closure(vt)
    p, q, s = triple.p, triple.q, triple.s

    def g_log(x):
        return rel_log(x) / p

    psg_log = ou_log_closure(g_log, s, rule)
    return float(np.exp(q * _log_lp_1d(psg_log, q, rule)))


def gross_psi(beta: float, s: float,
              rule: Optional[QuadratureRule] = None) -> float:
    """psi(s) = ||P_s[(gamma_beta/gamma)^{1/2}]||_{q(s)}, q(s) = 1 + e^{2s}."""
    rule = _rule_or_default(rule)
    if s == 0:
        return 1.0
    fstar_log = LogQuad.gaussian_ratio(beta, 0.5).log_at
    qs = 1.0 + np.exp(2.0 * s)
    return float(np.exp(_log_lp_1d(ou_log_closure(fstar_log, s, rule),
                                   qs, rule)))


def gross_psi_prime0(beta: float, n: int = 1) -> float:
    """Closed-form psi'(0) = -(n/4)(log beta - 1 + 1/beta)."""
    return -0.5 * _dn(beta, n)


def gross_slope(v: GridField, beta: float, h: float,
                rule: Optional[QuadratureRule] = None) -> float:
    """Forward-difference slope at s = 0 of

        Lambda(s) = ||P_s[f^{1/2}]||_{q(s)} / psi(s),   f = v/gamma,

    with q(s) = 1 + e^{2s}.  For admissible v this is <= 0 up to O(h).
    """
    if not (1e-4 < h < 1e-1):
        raise ParameterError("h must lie in (1e-4, 1e-1)")
    rule = _rule_or_default(rule)
    _check_ratio_bounded(v, beta)
    rel_log = relative_log_closure(v)

    def half_log(x):
        return 0.5 * rel_log(x)

    lam0 = float(np.exp(_log_lp_1d(half_log, 2.0, rule)))  # psi(0) = 1
    qh = 1.0 + np.exp(2.0 * h)
    lam_h = float(np.exp(_log_lp_1d(ou_log_closure(half_log, h, rule),
                                    qh, rule))) / gross_psi(beta, h, rule)
    return (lam_h - lam0) / h
