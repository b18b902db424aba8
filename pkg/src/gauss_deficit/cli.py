"""
Command-line front end: named verification suites, parameter sweeps and
machine-readable reports.

Every subcommand builds a deterministic list of check items from the seed,
executes them on a bounded worker pool (``GAUSS_DEFICIT_THREADS`` caps the
pool size) and assembles a :class:`ReportBundle`.  Output is JSON (the full
bundle) or CSV (flat per-check rows), chosen by ``--format`` or the output
file extension.  Exit status: 0 when every asserted check passes, 1 when a
check fails (the report is still written), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import List, Optional

import numpy as np

from .numerics import (Grid1D, Grid2D, GridField, ParameterError,
                       gauss_hermite_rule)
from .families import (LogQuad, field_from_family, gaussian_field,
                       symmetric_mixture)
from .semigroups import ExponentTriple
from .flows import FPParams, certify, fp_evolve, _trapz
from .functionals import q_functional, sharp_constant
from .reports import DeficitReport, HypothesisCheck
from .inequalities import (beckner_check, brascamp_lieb_check,
                           counterexample_mixture,
                           counterexample_superharmonic, els_eigen_check,
                           hc_check, lsi_check, make_fp_input,
                           make_logconcave_input, make_talagrand_input,
                           matrix_check,
                           poincare_check, reverse_hc_check,
                           sample_reverse_triple)
from .transport import (DensitySpec, PotentialSpec, general_lsi_deficit,
                        talagrand_deficit)
from .hamilton_jacobi import (HJField, beta_of_a, dual_talagrand_check,
                              hj_hc_check, quadratic_datum)

COMMANDS = (
    "verify-hc", "verify-reverse-hc", "verify-lsi", "verify-els",
    "verify-talagrand", "verify-matrix", "verify-poincare", "verify-beckner",
    "verify-bl", "verify-hj", "verify-dual-talagrand", "verify-general-lsi",
    "flow-trace", "sharp-constants", "counterexample-mixture",
    "counterexample-superharmonic",
)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run: subcommand, parameters and output routing."""

    command: str
    beta: float = 2.0
    p: float = 2.0
    q: float = 4.0
    tau: float = 1.0
    a: float = 1.0
    count: int = 10
    seed: int = 0
    grid_lo: float = -12.0
    grid_hi: float = 12.0
    grid_n: int = 4097
    gh_nodes: int = 96
    tol: float = 1e-5
    out: Optional[str] = None
    format: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterError(f"unknown command {self.command!r}")
        if self.count < 1:
            raise ParameterError("count must be >= 1")
        if self.format not in (None, "json", "csv"):
            raise ParameterError(f"unknown format {self.format!r}")

    def grid(self) -> Grid1D:
        return Grid1D(self.grid_lo, self.grid_hi, self.grid_n)

    def rule(self):
        return gauss_hermite_rule(self.gh_nodes)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @staticmethod
    def from_sources(command: str, config_path: Optional[str],
                     overrides: dict) -> "RunConfig":
        """Config-file values first, command-line flags win."""
        values = {}
        if config_path:
            values.update(_read_config_file(config_path))
        values.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in fields(RunConfig)}
        unknown = set(values) - (known - {"command"})
        if unknown:
            raise ParameterError(
                f"unknown config keys: {', '.join(sorted(unknown))}")
        return RunConfig(command=command, **values)


_CONFIG_TYPES = None


def _read_config_file(path: str) -> dict:
    """Flat ``key=value`` lines; '#' comments and blank lines ignored."""
    global _CONFIG_TYPES
    if _CONFIG_TYPES is None:
        _CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}
    casts = {"count": int, "seed": int, "grid_n": int, "gh_nodes": int,
             "out": str, "format": str}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(
                    f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key == "command":
                raise ParameterError("command is not a config-file key")
            if key not in _CONFIG_TYPES:
                raise ParameterError(f"unknown config keys: {key}")
            values[key] = casts.get(key, float)(val)
    return values


# ---------------------------------------------------------------------------
# report bundles


@dataclass(frozen=True)
class ReportBundle:
    """Config echo + per-check reports + summary + wall-clock timing."""

    config: dict
    reports: List[DeficitReport]
    summary: dict
    timing_ms: float

    def to_dict(self):
        return {"config": dict(self.config),
                "reports": [r.to_dict() for r in self.reports],
                "summary": dict(self.summary),
                "timing_ms": self.timing_ms}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @staticmethod
    def from_json(text: str) -> "ReportBundle":
        d = json.loads(text)
        reports = []
        for r in d["reports"]:
            hyps = [HypothesisCheck(h["name"], h["pass"], h["margin"])
                    for h in r["hypotheses"]]
            reports.append(DeficitReport(
                r["inequality"], r["lhs"], r["rhs"], r["sharp_constant"],
                r["slack"], r["direction"], hyps, r["params"]))
        return ReportBundle(d["config"], reports, d["summary"],
                            d["timing_ms"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["index", "inequality", "lhs", "rhs", "sharp_constant",
                    "slack", "direction", "hypotheses_pass", "holds"])
        for i, r in enumerate(self.reports):
            w.writerow([i, r.inequality, repr(r.lhs), repr(r.rhs),
                        repr(r.sharp_constant), repr(r.slack), r.direction,
                        r.hypotheses_pass, r.holds])
        return buf.getvalue()

    @property
    def all_pass(self) -> bool:
        return self.summary["failed"] == 0


def _report_passes(report: DeficitReport, tol: float) -> bool:
    """A check passes when it is not asserted (hypotheses failed, so the
    inequality is not claimed) or its slack clears the tolerance."""
    return (not report.asserted) or report.slack >= -tol


def _summarize(reports, extremiser_indices, tol):
    passed = sum(_report_passes(r, tol) for r in reports)
    summary = {
        "count": len(reports),
        "passed": passed,
        "failed": len(reports) - passed,
        "asserted": sum(r.asserted for r in reports),
    }
    if extremiser_indices:
        summary["max_abs_extremiser_slack"] = max(
            abs(reports[i].slack) for i in extremiser_indices)
    return summary


# ---------------------------------------------------------------------------
# suite builders: each returns (tasks, extremiser_indices); a task is a
# zero-argument callable producing a DeficitReport.  Randomness is drawn
# from a per-item generator seeded by (seed, index) so the bundle is
# deterministic regardless of worker scheduling.


def _item_rng(config: RunConfig, index: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, index])


def _random_density(config: RunConfig, index: int) -> GridField:
    rng = _item_rng(config, index)
    if config.beta >= 1:
        return make_fp_input(rng, config.beta, config.grid())
    return make_logconcave_input(rng, config.beta, config.grid())


def _forward_triple(config: RunConfig) -> ExponentTriple:
    if not (1 < config.p < config.q):
        raise ParameterError("forward regime needs 1 < p < q")
    return ExponentTriple.from_pq(config.p, config.q)


def _suite_hc(config: RunConfig):
    triple = _forward_triple(config)
    rule = config.rule()
    grid = config.grid()

    def item(i):
        v = (gaussian_field(grid, config.beta) if i == 0
             else _random_density(config, i))
        return hc_check(v, config.beta, triple, rule)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_reverse_hc(config: RunConfig):
    rule = config.rule()
    grid = config.grid()

    def item(i):
        rng = _item_rng(config, i)
        same_sign = (i % 2 == 0)
        triple = sample_reverse_triple(rng, same_sign)
        if same_sign:
            beta = config.beta if config.beta > 1 else 2.0
            v = (gaussian_field(grid, beta) if i == 0
                 else make_fp_input(rng, beta, grid))
        else:
            beta = config.beta if config.beta < 1 else 0.5
            v = make_logconcave_input(rng, beta, grid)
        return reverse_hc_check(v, beta, triple, rule)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_lsi(config: RunConfig):
    rule = config.rule()
    grid = config.grid()

    def item(i):
        v = (gaussian_field(grid, config.beta) if i == 0
             else _random_density(config, i))
        return lsi_check(v, config.beta, rule)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_els(config: RunConfig):
    rule = config.rule()
    grid = config.grid()

    def item(i):
        v = (gaussian_field(grid, config.beta) if i == 0
             else _random_density(config, i))
        return els_eigen_check(v, rule)

    # gamma_beta attains equality only when the correction term is active
    extremisers = [0] if config.beta <= 1 else []
    return [lambda i=i: item(i) for i in range(config.count)], extremisers


def _suite_talagrand(config: RunConfig):
    grid = config.grid()

    def item(i):
        if i == 0:
            v = DensitySpec.gaussian(config.beta, grid)
        else:
            v = DensitySpec.from_field(make_talagrand_input(
                _item_rng(config, i), config.beta, grid))
        return talagrand_deficit(v, config.beta)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _product_field_2d(v1: GridField, v2: GridField, grid2: Grid2D) -> GridField:
    def log_fn(x1, x2):
        return v1.log(x1) + v2.log(x2)

    return GridField.from_callable(
        grid2, lambda a, b: np.exp(log_fn(a, b)), log_fn=log_fn)


def _suite_matrix(config: RunConfig):
    rule = gauss_hermite_rule(min(config.gh_nodes, 48))
    grid = config.grid()
    grid2 = Grid2D(Grid1D(-8.0, 8.0, 257), Grid1D(-8.0, 8.0, 257))
    triple = _forward_triple(config)
    variants = ("hc", "lsi", "talagrand")

    def item(i):
        rng = _item_rng(config, i)
        b1 = config.beta
        b2 = config.beta if i == 0 else float(
            rng.uniform(1.2, 4.0) if config.beta >= 1
            else rng.uniform(0.2, 0.9))
        B = np.diag([b1, b2])
        if i == 0:
            v1 = gaussian_field(grid, b1)
            v2 = gaussian_field(grid, b2)
        elif config.beta >= 1:
            v1 = make_fp_input(rng, b1, grid)
            v2 = make_fp_input(rng, b2, grid)
        else:
            v1 = make_logconcave_input(rng, b1, grid)
            v2 = make_logconcave_input(rng, b2, grid)
        v = _product_field_2d(v1, v2, grid2)
        which = variants[i % 3]
        return matrix_check(v, B, triple=triple, which=which, rule=rule)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _test_function(config: RunConfig, index: int, power: float) -> GridField:
    """f = (v/gamma)^{1/power} so that gamma f^power = v inherits the
    curvature certificate of the generated density v."""
    grid = config.grid()
    if index == 0:
        v_log = LogQuad.gaussian(config.beta).log_at
    else:
        v_log = _random_density(config, index).log

    def log_fn(x):
        x = np.asarray(x, float)
        gauss_log = -0.5 * x * x - 0.5 * np.log(2.0 * np.pi)
        return (v_log(x) - gauss_log) / power

    return GridField.from_callable(grid, lambda x: np.exp(log_fn(x)),
                                   log_fn=log_fn)


def _suite_poincare(config: RunConfig):
    rule = config.rule()

    def item(i):
        return poincare_check(_test_function(config, i, 2.0),
                              config.beta, rule)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_beckner(config: RunConfig):
    rule = config.rule()
    p = config.p if 1.0 < config.p < 2.0 else 1.5

    def item(i):
        return beckner_check(_test_function(config, i, p), p,
                             config.beta, rule)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_bl(config: RunConfig):
    triple = _forward_triple(config)
    grid = config.grid()

    def item(i):
        f1 = gaussian_field(grid, config.beta)
        if i == 0:
            f2 = field_from_family(grid, symmetric_mixture(0.8, 1.0))
        else:
            rng = _item_rng(config, i)
            f2 = field_from_family(
                grid, symmetric_mixture(float(rng.uniform(0.2, 2.0)),
                                        float(rng.uniform(0.6, 1.6))))
        return brascamp_lieb_check(f1, f2, triple, config.beta)

    return [lambda i=i: item(i) for i in range(config.count)], []


def _perturbed_quadratic(config: RunConfig, index: int,
                         a: float) -> HJField:
    """The quadratic extremiser datum plus a small smooth convex bump."""
    base = quadratic_datum(a, beta_of_a(a, config.beta), config.grid())
    if index == 0:
        return base
    rng = _item_rng(config, index)
    c = float(rng.uniform(0.0, 0.05))
    m = float(rng.uniform(-1.0, 1.0))
    x = config.grid().points
    return HJField.from_field(GridField(
        config.grid(), base.f.values + c * np.log(np.cosh(x - m))))


def _suite_hj(config: RunConfig):
    def item(i):
        f = _perturbed_quadratic(config, i, config.a)
        return hj_hc_check(f, config.a, config.tau, config.beta)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_dual_talagrand(config: RunConfig):
    def item(i):
        f = _perturbed_quadratic(config, i, 0.02)
        return dual_talagrand_check(f, config.tau, config.beta)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_general_lsi(config: RunConfig):
    beta = config.beta if config.beta > 1 else 2.0
    grid = config.grid()

    def item(i):
        rng = _item_rng(config, i)
        omega = 1.0 if i == 0 else float(rng.uniform(0.8, 1.5))
        eps = 0.0 if i == 0 else float(rng.uniform(0.0, 0.05)) * omega
        x = grid.points
        V = GridField(grid, 0.5 * omega * x * x + eps * np.log(np.cosh(x)))
        pot = PotentialSpec(V, K=omega, L=omega + eps, symmetric=True)
        # v must be K/beta-semi-log-convex: take the e^{-V/beta_v} member
        # with beta_v >= beta L / K
        beta_v = beta * (pot.L / pot.K) * (1.0 if i == 0 else
                                           float(rng.uniform(1.0, 1.3)))
        vals, logv = pot.density(beta_v)
        vf = GridField(grid, vals)
        return general_lsi_deficit(DensitySpec(vf), pot, beta)

    return [lambda i=i: item(i) for i in range(config.count)], [0]


def _suite_sharp_constants(config: RunConfig):
    betas = [0.25, 0.5, 2.0, 4.0] if config.beta == 2.0 else [config.beta]
    triple = _forward_triple(config)
    p_beck = config.p if 1.0 < config.p < 2.0 else 1.5
    c1 = 1.0 / triple.p
    c2 = 1.0 - 1.0 / triple.q

    def const_report(i, name, **kw):
        sc = sharp_constant(name, **kw)
        return DeficitReport.build(name, sc.value, sc.value, sc.value,
                                   params=sc.params)

    tasks = []
    i = 0
    for beta in betas:
        rows = [
            ("hc_ratio", dict(beta=beta, triple=triple)),
            ("lsi_gauss", dict(beta=beta)),
            ("dn", dict(beta=beta)),
            ("talagrand_gauss", dict(beta=beta)),
            ("mikulincer", dict(beta=beta)),
            ("beckner_b", dict(p=p_beck, beta=beta)),
        ]
        if 1.0 + config.tau * (1.0 - 1.0 / beta) > 0:
            rows.append(("hj_t", dict(tau=config.tau, beta=beta)))
        for name, kw in rows:
            tasks.append(lambda i=i, name=name, kw=kw: const_report(i, name, **kw))
            i += 1
    tasks.append(lambda i=i: const_report(i, "bl_h", c1=c1, c2=c2,
                                          s=triple.s))
    return tasks, []


def _suite_counterexample_mixture(config: RunConfig):
    a_values = ([config.a] if config.a != 1.0 else [0.0, 1.0, 2.0, 4.0])
    grid = config.grid()
    tasks = [lambda a=a: counterexample_mixture(a, grid) for a in a_values]
    return tasks, []


def _suite_counterexample_superharmonic(config: RunConfig):
    def item(t):
        tr = counterexample_superharmonic(t)
        return DeficitReport.build(
            "superharmonic-not-preserved", lhs=tr.grid_min, rhs=0.0,
            sharp_constant=0.0, direction="ge",
            params={"t": tr.t, "delta_log_f": tr.delta_log_f,
                    "delta_log_ptf_exact": tr.delta_log_ptf,
                    "grid_min": tr.grid_min, "grid_max": tr.grid_max})

    return [lambda t=t: item(t) for t in (0.1, 0.5)], []


_SUITES = {
    "verify-hc": _suite_hc,
    "verify-reverse-hc": _suite_reverse_hc,
    "verify-lsi": _suite_lsi,
    "verify-els": _suite_els,
    "verify-talagrand": _suite_talagrand,
    "verify-matrix": _suite_matrix,
    "verify-poincare": _suite_poincare,
    "verify-beckner": _suite_beckner,
    "verify-bl": _suite_bl,
    "verify-hj": _suite_hj,
    "verify-dual-talagrand": _suite_dual_talagrand,
    "verify-general-lsi": _suite_general_lsi,
    "sharp-constants": _suite_sharp_constants,
    "counterexample-mixture": _suite_counterexample_mixture,
    "counterexample-superharmonic": _suite_counterexample_superharmonic,
}


# ---------------------------------------------------------------------------
# execution


def _worker_count() -> int:
    cap = os.environ.get("GAUSS_DEFICIT_THREADS")
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError:
            raise ParameterError(
                f"GAUSS_DEFICIT_THREADS must be an integer, got {cap!r}")
        if cap < 1:
            raise ParameterError("GAUSS_DEFICIT_THREADS must be >= 1")
        return cap
    return min(4, os.cpu_count() or 1)


def run(config: RunConfig) -> ReportBundle:
    """Execute the configured suite and assemble the report bundle."""
    if config.command == "flow-trace":
        raise ParameterError("flow-trace emits a CSV series; use flow_trace()")
    start = time.perf_counter()
    tasks, extremisers = _SUITES[config.command](config)
    results = [None] * len(tasks)
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        futures = {pool.submit(t): i for i, t in enumerate(tasks)}
        for fut, i in futures.items():
            results[i] = fut.result()
    timing_ms = 1000.0 * (time.perf_counter() - start)
    summary = _summarize(results, extremisers, config.tol)
    return ReportBundle(config.to_dict(), results, summary, timing_ms)


def flow_trace(config: RunConfig, n_times: int = 8):
    """Q(t) along the flow: rows (t, Q, certificate margin, mass) plus a
    monotonicity verdict.  Forward regime when beta >= 1 (Q non-decreasing),
    reverse-concave regime when beta < 1 (certificate kind flips)."""
    grid = config.grid()
    rule = config.rule()
    rng = _item_rng(config, 0)
    if config.beta < 1:
        raise ParameterError("flow-trace needs beta >= 1 (FP-class input)")
    v0 = make_fp_input(rng, config.beta, grid)
    if 1.0 < config.p < config.q:
        triple = ExponentTriple.from_pq(config.p, config.q)
    elif config.q < config.p < 0.0:
        triple = ExponentTriple.from_pq(config.p, config.q)
    else:
        raise ParameterError("flow-trace needs 1 < p < q or q < p < 0")
    kind = "convex"
    expect = "non-decreasing"
    times = np.geomspace(1e-3, 1.0, n_times)
    rows = []
    for t in times:
        qt = q_functional(v0, config.beta, triple, float(t), rule)
        vt = fp_evolve(v0, FPParams(config.beta, float(t)))
        cert = certify(vt, kind, config.beta)
        rows.append((float(t), qt, cert.margin, _trapz(vt)))
    qs = np.array([r[1] for r in rows])
    scale = max(1.0, float(np.max(np.abs(qs))))
    monotone = bool(np.all(np.diff(qs) >= -1e-5 * scale))
    verdict = expect if monotone else f"violates {expect}"
    return rows, verdict


def _flow_trace_csv(rows, verdict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["t", "Q", "certificate_margin", "mass"])
    for r in rows:
        w.writerow([repr(v) for v in r])
    w.writerow(["verdict", verdict, "", ""])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing and entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gauss-deficit",
        description="Verify sharp Gaussian functional inequalities and "
                    "their deficit bounds numerically.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--a", type=float, default=None)
        p.add_argument("--count", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid-lo", type=float, default=None, dest="grid_lo")
        p.add_argument("--grid-hi", type=float, default=None, dest="grid_hi")
        p.add_argument("--grid-n", type=int, default=None, dest="grid_n")
        p.add_argument("--gh-nodes", type=int, default=None, dest="gh_nodes")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, default=None,
                       choices=("json", "csv"))
        p.add_argument("--config", type=str, default=None)
    return parser


def _resolve_format(config: RunConfig) -> str:
    if config.format:
        return config.format
    if config.out and config.out.lower().endswith(".csv"):
        return "csv"
    return "json"


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config")}
    try:
        config = RunConfig.from_sources(args.command, args.config, overrides)
    except (ParameterError, OSError, ValueError) as exc:
        print(f"gauss-deficit: {exc}", file=sys.stderr)
        return 2

    try:
        if config.command == "flow-trace":
            rows, verdict = flow_trace(config)
            _emit(_flow_trace_csv(rows, verdict), config.out)
            return 0 if "violates" not in verdict else 1
        bundle = run(config)
    except ParameterError as exc:
        print(f"gauss-deficit: {exc}", file=sys.stderr)
        return 2

    fmt = _resolve_format(config)
    text = bundle.to_json() if fmt == "json" else bundle.to_csv()
    _emit(text, config.out)
    return 0 if bundle.all_pass else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
