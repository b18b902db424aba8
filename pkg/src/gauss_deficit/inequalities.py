"""
Deficit checkers: regularised hypercontractivity (forward and reverse), LSI,
eigenvalue-restricted entropy bounds, matrix (tensorised) variants, Poincare,
Beckner, Brascamp-Lieb in dual form, and the counterexample constructions.

Every checker returns a DeficitReport with the measured left/right sides, the
sharp constant, signed slack, and the certified hypotheses.  Reports never
assert an inequality whose hypotheses failed; they still carry the numbers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .families import LogQuad, Mixture, field_from_family, symmetric_mixture
from .flows import MeasureSpec, _trapz, certify, certify_matrix, covariance, \
    fp_class_member
from .functionals import _check_ratio_bounded, _log_lp_1d, _log_lp_2d, \
    _rule_or_default, entropy_fisher, lp_norm_gaussian, ou_log_closure, \
    relative_log_closure, sharp_constant
from .numerics import Grid1D, Grid2D, GridField, ParameterError, \
    default_grid, default_grid_2d, gauss_hermite_rule
from .reports import DeficitReport, HypothesisCheck
from .semigroups import ExponentTriple, InadmissibleExponentError, beta_s, \
    ou_apply
from .transport import relative_entropy_gauss, w2_sq_coupling_2d

LOG_2PI = float(np.log(2.0 * np.pi))


# ---------------------------------------------------------------------------
# shared plumbing


def _relative_field(v: GridField) -> GridField:
    """v/gamma as a field with exact-as-possible closures."""
    if v.ndim == 1:
        rel_log = relative_log_closure(v)

        def fn(x):
            return np.exp(rel_log(x))

        def dlog(x):
            return v.dlog(x) + np.asarray(x, float)

        return GridField.from_callable(v.grid, fn, log_fn=rel_log,
                                       dlog_fn=dlog)

    def rel_log2(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        return v.log(x1, x2) + 0.5 * (x1 * x1 + x2 * x2) + LOG_2PI

    return GridField.from_callable(
        v.grid, lambda a, b: np.exp(rel_log2(a, b)), log_fn=rel_log2)


def _certificate_hypotheses(v: GridField, beta: float) -> list:
    """The regime-dependent curvature hypothesis (none at beta = 1)."""
    if beta > 1:
        cert = certify(v, "subharmonic", beta)
        return [HypothesisCheck("beta-semi-log-subharmonic", cert.passed,
                                cert.margin)]
    if beta < 1:
        cert = certify(v, "concave", beta)
        return [HypothesisCheck("beta-semi-log-concave", cert.passed,
                                cert.margin)]
    return []


def _lhs_hc(v: GridField, triple: ExponentTriple, rule) -> float:
    """|| P_s[(v/gamma)^{1/p}] ||_{L^q(gamma)} by nested quadrature."""
    rel_log = relative_log_closure(v)

    def g_log(x):
        return rel_log(x) / triple.p

    ps_log = ou_log_closure(g_log, triple.s, rule)
    return float(np.exp(_log_lp_1d(ps_log, triple.q, rule)))


def _mass_vdx(v: GridField, rule) -> float:
    """int v dx = int (v/gamma) dgamma at the quadrature nodes."""
    rel_log = relative_log_closure(v)
    lv = rel_log(rule.nodes)
    return float(np.exp(logsumexp(lv + np.log(rule.weights))))


def _mass_vdx_2d(rel: GridField, rule) -> float:
    """int v dx on R^2 as int (v/gamma) dgamma (tail-truncation free)."""
    z, w = rule.nodes, rule.weights
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    lv = np.asarray(rel.log(Z1, Z2), float)
    return float(np.exp(logsumexp(lv + np.log(np.outer(w, w)))))


# ---------------------------------------------------------------------------
# hypercontractivity


def hc_check(v: GridField, beta: float, triple: ExponentTriple,
             rule=None) -> DeficitReport:
    """Forward regularised hypercontractivity deficit.

    lhs = ||P_s[(v/gamma)^{1/p}]||_q,
    rhs = beta^{n/2p'} beta_s^{-n/2q'} (int v dx)^{1/p}.
    """
    if triple.regime != "forward":
        raise InadmissibleExponentError("hc_check needs 1 < p < q")
    rule = _rule_or_default(rule)
    _check_ratio_bounded(v, beta)
    hyps = _certificate_hypotheses(v, beta)
    lhs = _lhs_hc(v, triple, rule)
    mass = _mass_vdx(v, rule)
    const = sharp_constant("hc_ratio", beta=beta, triple=triple).value
    rhs = const * mass ** (1.0 / triple.p)
    return DeficitReport.build(
        "hypercontractivity", lhs, rhs, const, hypotheses=hyps,
        params={"beta": beta, "p": triple.p, "q": triple.q, "s": triple.s,
                "mass": mass})


def reverse_hc_check(v: GridField, beta: float, triple: ExponentTriple,
                     rule=None) -> DeficitReport:
    """Reverse regularised hypercontractivity: lhs >= rhs, slack = lhs - rhs.

    Admissible exponents have q < p < 1 with p excluded from {0, 1-e^{-2s}};
    pq > 0 pairs with beta > 1 (subharmonic), pq < 0 with beta < 1 (concave).
    """
    if triple.regime not in ("reverse-same-sign", "reverse-opposite-sign"):
        raise InadmissibleExponentError("reverse_hc_check needs q < p < 1")
    p, s = triple.p, triple.s
    if abs(p) < 1e-9 or abs(p - (1.0 - np.exp(-2.0 * s))) < 1e-9:
        raise InadmissibleExponentError(
            "p must avoid the excluded values 0 and 1 - e^{-2s}")
    rule = _rule_or_default(rule)
    _check_ratio_bounded(v, beta)
    hyps = []
    if triple.p * triple.q > 0:
        hyps.append(HypothesisCheck("beta>1-for-pq>0", beta >= 1.0,
                                    beta - 1.0))
        cert = certify(v, "subharmonic", max(beta, 1.0))
        hyps.append(HypothesisCheck("beta-semi-log-subharmonic", cert.passed,
                                    cert.margin))
    else:
        hyps.append(HypothesisCheck("beta<1-for-pq<0", beta <= 1.0,
                                    1.0 - beta))
        cert = certify(v, "concave", min(beta, 1.0))
        hyps.append(HypothesisCheck("beta-semi-log-concave", cert.passed,
                                    cert.margin))
    lhs = _lhs_hc(v, triple, rule)
    mass = _mass_vdx(v, rule)
    const = sharp_constant("hc_ratio", beta=beta, triple=triple).value
    rhs = const * float(np.exp(np.log(mass) / p))
    return DeficitReport.build(
        "reverse-hypercontractivity", lhs, rhs, const, direction="ge",
        hypotheses=hyps,
        params={"beta": beta, "p": p, "q": triple.q, "s": s, "mass": mass})


# ---------------------------------------------------------------------------
# logarithmic Sobolev


def lsi_check(v: GridField, beta: float, rule=None) -> DeficitReport:
    """Regularised LSI: Ent - I/2 <= -(n/2)(log beta - 1 + 1/beta)."""
    rule = _rule_or_default(rule)
    mass = _trapz(v)
    if abs(mass - 1.0) > 1e-6:
        raise ParameterError(f"density not normalized: mass = {mass:.8f}")
    hyps = _certificate_hypotheses(v, beta)
    ef = entropy_fisher(_relative_field(v), rule)
    n = v.ndim
    const = sharp_constant("lsi_gauss", beta=beta, n=n).value
    return DeficitReport.build(
        "log-sobolev", ef.entropy - 0.5 * ef.fisher, const, const,
        hypotheses=hyps,
        params={"beta": beta, "n": n, "entropy": ef.entropy,
                "fisher": ef.fisher})


def els_eigen_check(v: GridField, rule=None) -> DeficitReport:
    """Covariance-eigenvalue entropy bound (no convexity hypothesis):

    Ent <= I/2 - (1/2) sum_{beta_i <= 1} (log beta_i - 1 + 1/beta_i).
    """
    rule = _rule_or_default(rule)
    eigs = np.linalg.eigvalsh(covariance(v))
    ef = entropy_fisher(_relative_field(v), rule)
    correction = -0.5 * float(sum(np.log(b) - 1.0 + 1.0 / b
                                  for b in eigs if b <= 1.0))
    rhs = 0.5 * ef.fisher + correction
    return DeficitReport.build(
        "els-eigenvalue", ef.entropy, rhs, correction,
        params={"cov_eigenvalues": eigs, "entropy": ef.entropy,
                "fisher": ef.fisher, "correction": correction})


# ---------------------------------------------------------------------------
# matrix (tensorised) variants


def _matrix_side(v: GridField, B: np.ndarray, eigs, which: str,
                 side: str = None):
    """Pick the certified side, preferring the stronger passing statement.

    Statement strength is measured by the restricted correction sum
    -(1/2) sum (log b - 1 + 1/b): more negative means a tighter bound.  When
    neither side certifies, the one with the better margin is reported.
    """
    conv = certify_matrix(v, B, "convex")
    conc = certify_matrix(v, B, "concave")
    certs = {"convex": conv, "concave": conc}
    if side is not None:
        if side not in certs:
            raise ParameterError("side must be 'convex' or 'concave'")
        return side, certs[side]

    def strength(s):
        rel = [b for b in eigs if (b >= 1.0 if s == "convex" else b <= 1.0)]
        return -0.5 * sum(np.log(b) - 1.0 + 1.0 / b for b in rel)

    passing = [s for s in certs if certs[s].passed]
    if which == "talagrand" and "convex" in passing:
        if not certify(v, "concave", 1e18, tol=1e-6).passed:
            passing.remove("convex")
    if passing:
        best = min(passing, key=strength)
        return best, certs[best]
    best = max(certs, key=lambda s: certs[s].margin)
    return best, certs[best]


def matrix_check(v: GridField, B: np.ndarray, triple=None,
                 which: str = "lsi", rule=None, side: str = None
                 ) -> DeficitReport:
    """n = 2 variants with matrix curvature bound grad^2 log v vs -B^{-1}.

    Convex side (>= -B^{-1}) restricts corrections to eigenvalues >= 1;
    concave side (<= -B^{-1}) to eigenvalues <= 1.  The Talagrand variant on
    the convex side additionally needs grad^2 log v <= 0.  ``side`` forces a
    particular statement; by default the stronger certified one is used.
    """
    if v.ndim != 2:
        raise ParameterError("matrix_check needs a 2-D field")
    if which not in ("hc", "lsi", "talagrand"):
        raise ParameterError(f"unknown variant {which!r}")
    B = np.asarray(B, float)
    eigs = np.linalg.eigvalsh(B)
    if np.any(eigs <= 0):
        raise ParameterError("B must be positive definite")
    rule = _rule_or_default(rule)

    side, cert = _matrix_side(v, B, eigs, which, side)
    hyps = [HypothesisCheck(f"hessian-{side}-vs-B", cert.passed, cert.margin)]
    relevant = [b for b in eigs if (b >= 1.0 if side == "convex" else b <= 1.0)]

    if which == "talagrand" and side == "convex":
        logc = certify(v, "concave", 1e18, tol=1e-6)
        hyps.append(HypothesisCheck("log-concave", logc.passed, logc.margin))

    if which == "hc":
        if triple is None or triple.regime != "forward":
            raise InadmissibleExponentError("matrix hc needs a forward triple")
        rel = _relative_field(v)

        def g_log(x1, x2):
            return rel.log(x1, x2) / triple.p

        g = GridField.from_callable(v.grid,
                                    lambda a, b: np.exp(g_log(a, b)),
                                    log_fn=g_log)
        rule48 = gauss_hermite_rule(48)
        psg = ou_apply(g, triple.s, rule48)
        lhs = lp_norm_gaussian(psg, triple.q, rule48)
        const = float(np.prod([
            sharp_constant("hc_ratio", beta=b, triple=triple).value
            for b in relevant])) if relevant else 1.0
        mass = _mass_vdx_2d(rel, rule)
        rhs = const * mass ** (1.0 / triple.p)
        params = {"which": which, "side": side, "eigenvalues": eigs,
                  "p": triple.p, "q": triple.q, "mass": mass}
        return DeficitReport.build("matrix-hypercontractivity", lhs, rhs,
                                   const, hypotheses=hyps, params=params)

    if which == "lsi":
        ef = entropy_fisher(_relative_field(v), rule)
        correction = -0.5 * float(sum(np.log(b) - 1.0 + 1.0 / b
                                      for b in relevant))
        rhs = 0.5 * ef.fisher + correction
        return DeficitReport.build(
            "matrix-log-sobolev", ef.entropy, rhs, correction,
            hypotheses=hyps,
            params={"which": which, "side": side, "eigenvalues": eigs,
                    "entropy": ef.entropy, "fisher": ef.fisher})

    cost = w2_sq_coupling_2d(v)
    ent = relative_entropy_gauss(v, rule)
    const = float(sum(1.0 + 0.5 * np.log(b) - np.sqrt(b) for b in relevant))
    return DeficitReport.build(
        "matrix-talagrand", 0.5 * cost - ent, const, const, hypotheses=hyps,
        params={"which": which, "side": side, "eigenvalues": eigs,
                "w2_sq": cost, "entropy": ent})


# ---------------------------------------------------------------------------
# Poincare and Beckner


def _grad_sq_gauss(f: GridField, rule) -> float:
    """int |f'|^2 dgamma."""
    z, w = rule.nodes, rule.weights
    if f.analytic is not None:
        h = 1e-5
        df = (np.asarray(f(z + h), float)
              - np.asarray(f(z - h), float)) / (2 * h)
    else:
        g = np.gradient(f.values, f.grid.spacing, edge_order=2)
        df = np.interp(z, f.grid.points, g)
    return float((df * df) @ w)


def _weighted_field(f: GridField, power: float) -> GridField:
    """gamma |f|^power as a field (for curvature certification)."""

    def log_fn(x):
        x = np.asarray(x, float)
        vals = np.abs(np.asarray(f(x), float))
        with np.errstate(divide="ignore"):
            lf = np.where(vals > 1e-300, np.log(np.maximum(vals, 1e-300)),
                          -690.0)
        return power * lf - 0.5 * x * x - 0.5 * LOG_2PI

    return GridField.from_callable(f.grid, lambda x: np.exp(log_fn(x)),
                                   log_fn=log_fn)


def poincare_check(f: GridField, beta: float, rule=None) -> DeficitReport:
    """Sharpened Poincare inequality

        (1/2)(1 + D_n(beta)) int f^2 dgamma - (1/2)(int |f| dgamma)^2
            <= int |f'|^2 dgamma

    with the curvature hypothesis placed on gamma f^2.  The intermediate
    L^2-vs-L^1 entropy inequality (its p = 1 form) is recorded in params.
    """
    rule = _rule_or_default(rule)
    w = _weighted_field(f, 2.0)
    hyps = _certificate_hypotheses(w, beta)
    z, wts = rule.nodes, rule.weights
    fv = np.asarray(f(z), float)
    int_f2 = float((fv * fv) @ wts)
    int_absf = float(np.abs(fv) @ wts)
    grad = _grad_sq_gauss(f, rule)
    dn = sharp_constant("dn", beta=beta).value
    lhs = 0.5 * (1.0 + dn) * int_f2 - 0.5 * int_absf**2
    params = {"beta": beta, "dn": dn, "int_f2": int_f2, "int_absf": int_absf,
              "improves_classical": bool(dn > 1.0)}
    if int_f2 > 0 and int_absf > 0:
        goal_lhs = int_f2 * np.log(int_f2 / int_absf**2)
        goal_rhs = 2.0 * grad - dn * int_f2
        params["entropy_goal_lhs"] = float(goal_lhs)
        params["entropy_goal_rhs"] = float(goal_rhs)
        params["entropy_goal_slack"] = float(goal_rhs - goal_lhs)
    return DeficitReport.build("poincare", lhs, grad, dn, hypotheses=hyps,
                               params=params)


def beckner_check(f: GridField, p: float, beta: float,
                  rule=None) -> DeficitReport:
    """Sharpened Beckner inequality for p in (1, 2):

        (1/(2-p)) [ int f^2 dgamma - B(p,beta) (int f^p dgamma)^{2/p} ]
            <= int |f'|^2 dgamma

    with the curvature hypothesis on gamma f^p.  The classical variance
    smoothing bound int f^2 - int |P_s f|^2 <= (1-e^{-2s}) int |f'|^2 at
    s = -(1/2) log(p-1) is recorded in params.
    """
    if not 1.0 < p < 2.0:
        raise ParameterError("p must lie in (1, 2)")
    rule = _rule_or_default(rule)
    z, wts = rule.nodes, rule.weights
    fv = np.asarray(f(z), float)
    if np.any(fv < 0):
        raise ParameterError("beckner_check needs nonnegative f")
    w = _weighted_field(f, p)
    hyps = _certificate_hypotheses(w, beta)
    int_f2 = float((fv * fv) @ wts)
    int_fp = float((fv ** p) @ wts)
    grad = _grad_sq_gauss(f, rule)
    bconst = sharp_constant("beckner_b", p=p, beta=beta).value
    lhs = (int_f2 - bconst * int_fp ** (2.0 / p)) / (2.0 - p)
    s = -0.5 * float(np.log(p - 1.0))
    psf = ou_apply(f, s, rule) if f.analytic is not None else \
        ou_apply(GridField(f.grid, f.values), s, rule)
    int_psf2 = float((np.asarray(psf(z), float) ** 2) @ wts)
    smooth_rhs = (1.0 - np.exp(-2.0 * s)) * grad
    return DeficitReport.build(
        "beckner", lhs, grad, bconst, hypotheses=hyps,
        params={"beta": beta, "p": p, "s": s, "b_const": bconst,
                "smoothing_lhs": int_f2 - int_psf2,
                "smoothing_rhs": smooth_rhs,
                "smoothing_slack": smooth_rhs - (int_f2 - int_psf2)})


# ---------------------------------------------------------------------------
# Brascamp-Lieb dual form


def _bl_case(c1: float, c2: float) -> str:
    if 0 < c1 < 1 and 0 < c2 < 1:
        return "forward"
    if c1 * c2 < 0:
        return "reverse-mixed"
    if c1 > 1 and c2 > 1:
        return "reverse-concave"
    raise ParameterError(f"(c1, c2) = ({c1}, {c2}) not in a covered case")


def brascamp_lieb_check(f1: GridField, f2: GridField,
                        triple: ExponentTriple, beta: float,
                        direction: str = None) -> DeficitReport:
    """Dual-form sharpened Brascamp-Lieb inequality on R^2.

    With c1 = 1/p, c2 = 1/q' and the Gaussian kernel matrix Q built from s,
    compares the double integral of e^{-pi x.Qx} f1(x1)^{c1} f2(x2)^{c2}
    against H(c1,c2) ||P_s[(gamma_beta/gamma)^{c1}]||_{(1/c2)'} (int f1)^{c1}
    (int f2)^{c2}.  Case (c1,c2 in (0,1), beta>1): <=; case (c1c2<0, beta>1)
    and case (c1,c2>1, beta<1): >=.
    """
    c1 = 1.0 / triple.p
    c2 = 1.0 - 1.0 / triple.q  # 1/q'
    s = triple.s
    e2s = float(np.exp(-2.0 * s))
    scaling = c1 + c2 - 1.0 - (1.0 - e2s) * c1 * c2
    if abs(scaling) > 1e-10:
        raise InadmissibleExponentError(
            f"scaling condition violated by {scaling:.2e}")
    case = _bl_case(c1, c2)
    expected_dir = "le" if case == "forward" else "ge"
    if direction is not None:
        want = "le" if direction == "forward" else "ge"
        if want != expected_dir:
            raise ParameterError(
                f"direction {direction!r} inconsistent with (c1, c2) case")

    hyps = []
    if case in ("forward", "reverse-mixed"):
        hyps.append(HypothesisCheck("beta>1", beta >= 1.0, beta - 1.0))
        cert = certify(f1, "convex", max(beta, 1.0))
        hyps.append(HypothesisCheck("log f1'' >= -1/beta", cert.passed,
                                    cert.margin))
    else:
        hyps.append(HypothesisCheck("beta<1", beta <= 1.0, 1.0 - beta))
        cert = certify(f1, "concave", min(beta, 1.0))
        hyps.append(HypothesisCheck("log f1'' <= -1/beta", cert.passed,
                                    cert.margin))

    # 2-D trapezoid of the Gaussian-kernel double integral
    q11 = (1.0 - (1.0 - e2s) * c1) / (2.0 * (1.0 - e2s))
    q22 = (1.0 - (1.0 - e2s) * c2) / (2.0 * (1.0 - e2s))
    q12 = -float(np.exp(-s)) / (2.0 * (1.0 - e2s))
    x1 = f1.grid.points
    x2 = f2.grid.points
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    log_int = (-(q11 * X1 * X1 + 2.0 * q12 * X1 * X2 + q22 * X2 * X2)
               + c1 * np.asarray(f1.log(x1), float)[:, None]
               + c2 * np.asarray(f2.log(x2), float)[None, :])
    lhs = float(np.trapezoid(np.trapezoid(np.exp(log_int),
                                          dx=f2.grid.spacing, axis=1),
                             dx=f1.grid.spacing))

    h_const = sharp_constant("bl_h", c1=c1, c2=c2, s=s).value
    u = LogQuad.gaussian_ratio(beta, c1).ou(s)
    r = 1.0 / (1.0 - c2)  # (1/c2)'
    script_h = h_const * float(np.exp(u.log_lp_norm_gauss(r)))
    m1 = (f1.tag.integral_lebesgue() if isinstance(f1.tag, LogQuad)
          else _trapz(f1))
    m2 = (f2.tag.integral_lebesgue() if isinstance(f2.tag, LogQuad)
          else _trapz(f2))
    rhs = script_h * m1 ** c1 * m2 ** c2
    return DeficitReport.build(
        "brascamp-lieb", lhs, rhs, script_h, direction=expected_dir,
        hypotheses=hyps,
        params={"beta": beta, "c1": c1, "c2": c2, "s": s, "case": case,
                "classical_const": h_const, "mass_f1": m1, "mass_f2": m2})


# ---------------------------------------------------------------------------
# counterexamples


def counterexample_mixture(a: float, grid: Grid1D = None) -> DeficitReport:
    """Two-bump Gaussian mixture (1/2) gamma(.+a) + (1/2) gamma(.-a).

    Its covariance 1 + a^2 blows up while the LSI deficit Ent - I/2 stays
    bounded, so the regularised LSI at beta = cov fails for large a: the
    report shows negative slack together with the failed subharmonicity
    certificate.
    """
    if a < 0:
        raise ParameterError("a must be nonnegative")
    grid = grid or default_grid()
    if a == 0:
        v = field_from_family(grid, LogQuad.gaussian(1.0))
        cov = 1.0
    else:
        v = field_from_family(grid, symmetric_mixture(a, 1.0))
        cov = 1.0 + a * a
    report = lsi_check(v, cov)
    params = dict(report.params)
    params.update({"a": a, "covariance": cov})
    return DeficitReport(report.inequality, report.lhs, report.rhs,
                         report.sharp_constant, report.slack,
                         report.direction, report.hypotheses, params)


@dataclass(frozen=True)
class SuperharmonicTrace:
    """Laplacian of log P_t f for f = e^{x1 x2} (closed form and on-grid)."""

    t: float
    delta_log_f: float
    delta_log_ptf: float       # exact: constant in x
    grid_min: float            # min of the FD Laplacian over interior points
    grid_max: float


def log_ptf_bilinear(t: float):
    """Exact log P_t[e^{x1 x2}]: complete-the-square in both kernel variables.

    With e = e^{-t}, sig^2 = 1 - e^{-2t}, c = sig^2:
    log P_t f = e^2 x1 x2 + [a^2 (1-c^2) + (b + a c)^2] / (2 (1-c^2))
                - (1/2) log(1-c^2),   a = sig e x2, b = sig e x1.
    """
    e = float(np.exp(-t))
    sig = float(np.sqrt(1.0 - e * e))
    c = sig * sig

    def log_fn(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        a = sig * e * x2
        b = sig * e * x1
        return (e * e * x1 * x2 + 0.5 * a * a
                + (b + a * c) ** 2 / (2.0 * (1.0 - c * c))
                - 0.5 * np.log(1.0 - c * c))

    return log_fn


def counterexample_superharmonic(t: float,
                                 grid: Grid2D = None) -> SuperharmonicTrace:
    """f = e^{x1 x2} has Delta log f = 0, yet Delta log P_t f > 0 for t > 0."""
    if t <= 0:
        raise ParameterError("t must be positive")
    grid = grid or default_grid_2d()
    e2 = float(np.exp(-2.0 * t))
    sig2 = 1.0 - e2
    exact = 2.0 * sig2 * e2 / (1.0 - sig2 * sig2)
    log_fn = log_ptf_bilinear(t)
    h = 1e-4
    X, Y = np.meshgrid(grid.gx.points, grid.gy.points, indexing="ij")
    lap = ((log_fn(X + h, Y) + log_fn(X - h, Y) + log_fn(X, Y + h)
            + log_fn(X, Y - h) - 4.0 * log_fn(X, Y)) / h**2)
    inner = lap[2:-2, 2:-2]
    return SuperharmonicTrace(t, 0.0, float(exact),
                              float(np.min(inner)), float(np.max(inner)))


# ---------------------------------------------------------------------------
# seeded input generators for the property suites


def make_fp_input(rng: np.random.Generator, beta: float,
                  grid: Grid1D = None) -> GridField:
    """A random member of FP(beta): automatically beta-semi-log-convex."""
    k = int(rng.integers(1, 9))
    points = rng.uniform(-3.0, 3.0, size=k)
    weights = rng.dirichlet(np.ones(k))
    return fp_class_member(MeasureSpec.discrete(points, weights), beta,
                           grid=grid or default_grid())


def make_logconcave_input(rng: np.random.Generator, beta: float,
                          grid: Grid1D = None) -> GridField:
    """A random beta-semi-log-concave density: a narrower Gaussian times
    e^{-(smooth convex bump)}, renormalized on the grid."""
    if beta >= 1:
        raise ParameterError("generator intended for beta < 1")
    grid = grid or default_grid()
    base = beta * float(rng.uniform(0.55, 0.95))
    eps = float(rng.uniform(0.0, 0.3))
    m = float(rng.uniform(-1.0, 1.0))
    core = LogQuad.gaussian(base)

    def raw_log(x):
        x = np.asarray(x, float)
        return core.log_at(x) - eps * np.sqrt(1.0 + (x - m) ** 2)

    raw = GridField.from_callable(grid, lambda x: np.exp(raw_log(x)),
                                  log_fn=raw_log)
    mass = _trapz(raw)
    logz = float(np.log(mass))

    def log_fn(x):
        return raw_log(x) - logz

    return GridField.from_callable(grid, lambda x: np.exp(log_fn(x)),
                                   log_fn=log_fn)


def make_talagrand_input(rng: np.random.Generator, beta: float,
                         grid: Grid1D = None) -> GridField:
    """A random density satisfying the transport-inequality hypotheses.

    For beta >= 1 that is 0 >= (log v)'' >= -1/beta: a shifted Gaussian of
    variance b >= beta times a convex-bump factor small enough to keep the
    curvature above -1/beta.  For beta < 1 the beta-semi-log-concave
    generator already qualifies.
    """
    grid = grid or default_grid()
    if beta < 1:
        return make_logconcave_input(rng, beta, grid)
    b = beta * float(rng.uniform(1.1, 3.0))
    eps = float(rng.uniform(0.0, 0.9)) * (1.0 / beta - 1.0 / b)
    m = float(rng.uniform(-1.0, 1.0))
    core = LogQuad.gaussian(b, m)

    def raw_log(x):
        x = np.asarray(x, float)
        return core.log_at(x) - eps * np.sqrt(1.0 + (x - m) ** 2)

    raw = GridField.from_callable(grid, lambda x: np.exp(raw_log(x)),
                                  log_fn=raw_log)
    logz = float(np.log(_trapz(raw)))

    def log_fn(x):
        return raw_log(x) - logz

    return GridField.from_callable(grid, lambda x: np.exp(log_fn(x)),
                                   log_fn=log_fn)


def sample_reverse_triple(rng: np.random.Generator,
                          same_sign: bool) -> ExponentTriple:
    """Random reverse-regime (p, q, s) avoiding p in {0, 1-e^{-2s}} by 0.05."""
    for _ in range(200):
        if same_sign:
            p = float(rng.uniform(0.15, 0.9))
            q = float(rng.uniform(0.02, p - 0.05))
        else:
            p = float(rng.uniform(0.2, 0.8))
            q = float(rng.uniform(-2.0, -0.1))
        try:
            triple = ExponentTriple.from_pq(p, q)
        except InadmissibleExponentError:
            continue
        band = 1.0 - np.exp(-2.0 * triple.s)
        if abs(p) >= 0.05 and abs(p - band) >= 0.05:
            return triple
    raise ParameterError("failed to sample an admissible reverse triple")
