"""Monte Carlo harness: replicate draws, estimator comparison, summary stats.

run() repeats the whole pipeline (draw, observe, resample, estimate) n_reps
times against a fixed population, then reduces the replicate estimates to
bias / variance / MSE decompositions, relative efficiencies against the
resampled-weight estimator, CI coverage, and the parabola coefficient for
binary variables. Replicate r always uses a generator seeded by
(master_seed, r), so results are identical for any worker count.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .design import DesignConfig, draw_sample, observe
from .estimators import (EstimateResult, EstimatorTag, VariableSpec,
                         evaluate, extract_variable)
from .graph import AttributeTable, MissingPolicy, Network, load_attributes, load_edge_list
from .resampler import ResampleConfig, ResampleMode, default_inner_design, estimate_frequencies


class HarnessError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# synthetic populations


@dataclass(frozen=True)
class GeneratorSpec:
    """Synthetic population recipe.

    model "config" pairs stubs from a bounded power-law degree sequence
    (heavy tail controlled by power_exponent, scaled to hit mean_degree);
    model "uniform" throws mean_degree*n/2 links uniformly at random.
    bernoulli maps column name -> P(value 1) independently of structure;
    degree_column names a binary column whose hit probability increases
    with the node's realized degree.
    """

    n_nodes: int
    model: str = "config"
    mean_degree: float = 8.0
    power_exponent: float = 2.5
    max_degree: int | None = None
    bernoulli: tuple = ()              # ((name, p), ...)
    degree_column: str | None = None

    def validate(self):
        if self.n_nodes < 2:
            raise HarnessError("need at least 2 nodes")
        if self.model not in ("config", "uniform"):
            raise HarnessError(f"unknown model {self.model!r}")
        if not 1.0 <= self.mean_degree <= self.n_nodes - 1:
            raise HarnessError(
                f"mean_degree {self.mean_degree} infeasible for {self.n_nodes} nodes")
        if self.power_exponent <= 1.0:
            raise HarnessError("power_exponent must exceed 1")
        for name, p in self.bernoulli:
            if not 0.0 <= p <= 1.0:
                raise HarnessError(f"bernoulli p for {name!r} out of [0, 1]")


def generate_synthetic_population(spec: GeneratorSpec, rng: np.random.Generator):
    """Build (Network, AttributeTable) from a GeneratorSpec."""
    spec.validate()
    n = spec.n_nodes
    if spec.model == "uniform":
        edges = _uniform_edges(n, spec.mean_degree, rng)
    else:
        edges = _config_model_edges(spec, rng)
    net = Network.from_undirected([f"n{i}" for i in range(n)], edges)

    attrs = AttributeTable.empty(n)
    for name, p in spec.bernoulli:
        attrs.add(name, (rng.random(n) < p).astype(np.float64))
    if spec.degree_column:
        d = net.degrees().astype(np.float64)
        med = max(float(np.median(d)), 1.0)
        prob = d / (d + med)  # monotone increasing in degree
        attrs.add(spec.degree_column, (rng.random(n) < prob).astype(np.float64))
    return net, attrs


def _uniform_edges(n: int, mean_degree: float, rng) -> np.ndarray:
    target = int(round(mean_degree * n / 2.0))
    seen = set()
    edges = []
    while len(edges) < target:
        k = max(64, 2 * (target - len(edges)))
        a = rng.integers(0, n, size=k)
        b = rng.integers(0, n, size=k)
        for i, j in zip(a, b):
            if i == j:
                continue
            key = (int(i), int(j)) if i < j else (int(j), int(i))
            if key in seen:
                continue
            seen.add(key)
            edges.append(key)
            if len(edges) == target:
                break
    return _fix_isolated(n, edges, rng)


def _config_model_edges(spec: GeneratorSpec, rng) -> np.ndarray:
    n = spec.n_nodes
    g = spec.power_exponent
    d_min = 1.0
    d_max = float(spec.max_degree if spec.max_degree
                  else min(n - 1, int(3.0 * math.sqrt(spec.mean_degree * n))))
    # Bounded Pareto draw, then rescale so the rounded sequence hits the
    # requested mean despite rounding and the d >= 1 clamp.
    u = rng.random(n)
    t = 1.0 - (d_min / d_max) ** (g - 1.0)
    x = d_min * (1.0 - u * t) ** (-1.0 / (g - 1.0))
    scale = spec.mean_degree / x.mean()
    for _ in range(4):
        d = np.clip(np.rint(x * scale), 1, d_max).astype(np.int64)
        realized = d.mean()
        if abs(realized - spec.mean_degree) / spec.mean_degree < 0.01:
            break
        scale *= spec.mean_degree / realized
    d = np.clip(np.rint(x * scale), 1, d_max).astype(np.int64)

    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    rng.shuffle(stubs)
    if stubs.size % 2:
        stubs = stubs[:-1]
    a, b = stubs[0::2], stubs[1::2]
    keep = a != b
    lo = np.minimum(a[keep], b[keep])
    hi = np.maximum(a[keep], b[keep])
    edges = np.unique(np.column_stack([lo, hi]), axis=0)
    return _fix_isolated(n, [tuple(e) for e in edges], rng)


def _fix_isolated(n: int, edges: list, rng) -> np.ndarray:
    # Leaving degree-0 nodes in would make degree-weighted estimation
    # undefined on samples that reseed onto them.
    deg = np.zeros(n, dtype=np.int64)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    for i in np.flatnonzero(deg == 0):
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        edges.append((int(i), j))
    return np.asarray(edges, dtype=np.int64)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class PopulationPaths:
    edges: str
    attrs: str | None = None
    directed: bool = False
    missing: MissingPolicy = MissingPolicy.ZERO


@dataclass(frozen=True)
class SimConfig:
    """One full study: population source, field design, resampler, and the
    variable/estimator grid, replicated n_reps times."""

    population: object            # PopulationPaths | GeneratorSpec | (Network, AttributeTable)
    design: DesignConfig
    resample: ResampleConfig
    variables: tuple
    estimators: tuple = (EstimatorTag.NEW, EstimatorTag.YBAR, EstimatorTag.VH)
    n_reps: int = 200
    alpha: float = 0.05
    master_seed: int = 0
    workers: int = 1

    def validate(self):
        if self.n_reps < 2:
            raise HarnessError("n_reps must be >= 2")
        if not self.variables:
            raise HarnessError("no variables configured")
        if not self.estimators:
            raise HarnessError("no estimators configured")
        if not 0.0 < self.alpha < 1.0:
            raise HarnessError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.workers < 1:
            raise HarnessError("workers must be >= 1")


# ---------------------------------------------------------------------------
# reductions


@dataclass
class MseParts:
    mean: float
    bias: float
    variance: float
    mse: float
    bias_sq_share: float


def mse_decomposition(estimates, truth: float) -> MseParts:
    """Bias / variance / MSE with population-style (1/n) divisors, so
    mse = variance + bias^2 holds as an identity."""
    e = np.asarray(estimates, dtype=np.float64)
    if e.size < 2:
        raise HarnessError("need at least 2 estimates")
    m = float(np.mean(e))
    bias = m - truth
    variance = float(np.mean((e - m) ** 2))
    mse = float(np.mean((e - truth) ** 2))
    share = (bias * bias) / mse if mse > 0.0 else 0.0
    return MseParts(mean=m, bias=bias, variance=variance, mse=mse,
                    bias_sq_share=min(share, 1.0))


def relative_efficiency(mse_base: float, mse_new: float) -> float:
    if mse_new <= 0.0:
        raise HarnessError("relative efficiency needs a positive denominator MSE")
    return mse_base / mse_new


@dataclass
class ParabolaFit:
    a: float
    points: tuple  # ((p, mse), ...) as used in the fit


def fit_parabola(points, include_complements: bool = False) -> ParabolaFit:
    """Least-squares-through-origin fit of mse = a * p(1-p).

    a = sum(mse) / sum(p(1-p)) over the point set. A complement point
    (1-p, mse) has the same design value p(1-p) and the same mse, so
    including complements doubles both sums and leaves a bit-identical.
    """
    pts = [(float(p), float(y)) for p, y in points]
    if not pts or all(p in (0.0, 1.0) for p, _ in pts):
        raise HarnessError("parabola fit needs a point with p not in {0, 1}")
    num = math.fsum(y for _, y in pts)
    den = math.fsum(p * (1.0 - p) for p, _ in pts)
    if include_complements:
        pts = pts + [(1.0 - p, y) for p, y in pts]
        num, den = 2.0 * num, 2.0 * den
    return ParabolaFit(a=num / den, points=tuple(pts))


def coverage(cis, truth: float) -> float:
    """Fraction of (low, high) intervals containing truth."""
    cis = list(cis)
    if not cis:
        raise HarnessError("no intervals")
    hit = sum(1 for lo, hi in cis if lo <= truth <= hi)
    return hit / len(cis)


# ---------------------------------------------------------------------------
# the run itself


_FREQ_BIN_EDGES = np.linspace(0.0, 1.0, 21)


@dataclass
class ReportRow:
    variable: str
    estimator: str
    truth: float
    mean_estimate: float
    bias: float
    variance: float
    mse: float
    bias_sq_share: float
    expected_se: float
    mean_ci_width: float
    coverage: float
    re_vs_new: float | None


@dataclass
class ParabolaRow:
    estimator: str
    variable: str
    p: float
    mse: float
    a: float


@dataclass
class SimulationReport:
    rows: list
    parabola_rows: list
    parabola_a: dict
    freq_bin_edges: np.ndarray
    freq_counts: np.ndarray
    truths: dict
    n_reps: int
    master_seed: int
    alpha: float
    estimators: tuple = field(default_factory=tuple)


def _resolve_population(source, master_seed: int):
    if isinstance(source, GeneratorSpec):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=master_seed, spawn_key=(0,)))
        return generate_synthetic_population(source, rng)
    if isinstance(source, PopulationPaths):
        net = load_edge_list(source.edges, directed=source.directed)
        attrs = (load_attributes(source.attrs, net, source.missing)
                 if source.attrs else AttributeTable.empty(net.node_count))
        return net, attrs
    net, attrs = source
    if not isinstance(net, Network):
        raise HarnessError("population must be paths, a GeneratorSpec, or "
                           "(Network, AttributeTable)")
    return net, attrs


def _replicate(payload, r: int):
    net, attrs, design, resample, variables, estimators, alpha, master_seed = payload
    try:
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=master_seed, spawn_key=(r + 1,)))
        rec = draw_sample(net, design, rng)
        obs = observe(net, attrs, rec)
        freqs = estimate_frequencies(obs, resample, rng)
        out = {}
        for var in variables:
            y = extract_variable(obs, var)
            for est in estimators:
                out[(var.key, est.value)] = evaluate(est, y, obs, freqs, alpha,
                                                     variable=var.key)
        hist, _ = np.histogram(freqs.f, bins=_FREQ_BIN_EDGES)
        return out, hist
    except Exception as exc:
        raise HarnessError(f"replicate {r} failed: {exc}") from exc


_POOL_PAYLOAD = None


def _pool_init(payload):
    global _POOL_PAYLOAD
    _POOL_PAYLOAD = payload


def _pool_task(r: int):
    return _replicate(_POOL_PAYLOAD, r)


def run(cfg: SimConfig) -> SimulationReport:
    """Execute the study and reduce it to a SimulationReport."""
    cfg.validate()
    net, attrs = _resolve_population(cfg.population, cfg.master_seed)
    cfg.design.validate(net.node_count)

    resample = cfg.resample
    if resample.mode is ResampleMode.REPEATED and resample.inner_design is None:
        resample = ResampleConfig(
            mode=resample.mode, T=resample.T,
            resample_size=resample.resample_size, burn_in=resample.burn_in,
            step_trace_count=resample.step_trace_count,
            step_remove_count=resample.step_remove_count,
            reseed_rate=resample.reseed_rate,
            frequency_floor=resample.frequency_floor,
            inner_design=default_inner_design(cfg.design, resample.resample_size))
    resample.validate(cfg.design.target_size)

    truths = {var.key: float(np.mean(extract_variable((net, attrs), var)))
              for var in cfg.variables}

    payload = (net, attrs, cfg.design, resample, tuple(cfg.variables),
               tuple(cfg.estimators), cfg.alpha, cfg.master_seed)

    results = [None] * cfg.n_reps
    workers = min(cfg.workers, cfg.n_reps)
    if workers == 1:
        for r in range(cfg.n_reps):
            results[r] = _replicate(payload, r)
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_pool_init,
                                 initargs=(payload,)) as pool:
            for r, res in enumerate(pool.map(_pool_task, range(cfg.n_reps),
                                             chunksize=max(1, cfg.n_reps // (4 * workers)))):
                results[r] = res

    # Merge strictly in replicate order.
    freq_counts = np.zeros(_FREQ_BIN_EDGES.size - 1, dtype=np.int64)
    series: dict = {(var.key, est.value): [] for var in cfg.variables
                    for est in cfg.estimators}
    for r in range(cfg.n_reps):
        out, hist = results[r]
        freq_counts += hist
        for key, res in out.items():
            series[key].append(res)

    est_tags = [e.value for e in cfg.estimators]
    mse_by: dict = {}
    parts_by: dict = {}
    for (vkey, ekey), res_list in series.items():
        estimates = np.asarray([x.estimate for x in res_list])
        parts = mse_decomposition(estimates, truths[vkey])
        parts_by[(vkey, ekey)] = parts
        mse_by[(vkey, ekey)] = parts.mse

    rows = []
    for var in cfg.variables:
        for est in cfg.estimators:
            key = (var.key, est.value)
            res_list = series[key]
            parts = parts_by[key]
            cis = [(x.ci_low, x.ci_high) for x in res_list]
            re = None
            if EstimatorTag.NEW in cfg.estimators:
                mse_new = mse_by[(var.key, "new")]
                if mse_new > 0.0:
                    re = relative_efficiency(parts.mse, mse_new)
                elif parts.mse == 0.0:
                    re = 1.0  # census-style degenerate runs: equal MSEs
            rows.append(ReportRow(
                variable=var.key, estimator=est.value, truth=truths[var.key],
                mean_estimate=parts.mean, bias=parts.bias,
                variance=parts.variance, mse=parts.mse,
                bias_sq_share=parts.bias_sq_share,
                expected_se=float(np.mean([x.se for x in res_list])),
                mean_ci_width=float(np.mean([hi - lo for lo, hi in cis])),
                coverage=coverage(cis, truths[var.key]),
                re_vs_new=re))

    # Parabola over binary variables (complements included in the fit).
    pop_binary = {}
    for var in cfg.variables:
        vals = extract_variable((net, attrs), var)
        if np.all(np.isin(vals, (0.0, 1.0))):
            pop_binary[var.key] = truths[var.key]
    parabola_rows: list = []
    parabola_a: dict = {}
    fittable = [k for k, p in pop_binary.items() if 0.0 < p < 1.0]
    if fittable:
        for ekey in est_tags:
            pts = [(pop_binary[vkey], mse_by[(vkey, ekey)]) for vkey in pop_binary]
            fit = fit_parabola(pts, include_complements=True)
            parabola_a[ekey] = fit.a
            for vkey in pop_binary:
                p, mse = pop_binary[vkey], mse_by[(vkey, ekey)]
                parabola_rows.append(ParabolaRow(ekey, vkey, p, mse, fit.a))
                parabola_rows.append(ParabolaRow(
                    ekey, "not_" + vkey, 1.0 - p, mse, fit.a))

    return SimulationReport(
        rows=rows, parabola_rows=parabola_rows, parabola_a=parabola_a,
        freq_bin_edges=_FREQ_BIN_EDGES.copy(), freq_counts=freq_counts,
        truths=truths, n_reps=cfg.n_reps, master_seed=cfg.master_seed,
        alpha=cfg.alpha, estimators=tuple(est_tags))


# ---------------------------------------------------------------------------
# report files


def write_report_csv(report: SimulationReport, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variable", "estimator", "truth", "mean_estimate",
                         "bias", "variance", "mse", "bias_sq_share",
                         "expected_se", "mean_ci_width", "coverage",
                         "re_vs_new"])
        for row in report.rows:
            writer.writerow([
                row.variable, row.estimator, repr(row.truth),
                repr(row.mean_estimate), repr(row.bias), repr(row.variance),
                repr(row.mse), repr(row.bias_sq_share), repr(row.expected_se),
                repr(row.mean_ci_width), repr(row.coverage),
                "" if row.re_vs_new is None else repr(row.re_vs_new)])


def write_coverage_csv(report: SimulationReport, path):
    """Coverage table (name, actual, E.se, width, coverage) for the
    resampled-weight estimator, or the first configured one if it is absent."""
    ekey = "new" if "new" in report.estimators else report.estimators[0]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "actual", "E.se", "width", "coverage"])
        for row in report.rows:
            if row.estimator != ekey:
                continue
            writer.writerow([row.variable, repr(row.truth),
                             repr(row.expected_se), repr(row.mean_ci_width),
                             repr(row.coverage)])


def write_parabola_csv(report: SimulationReport, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["estimator", "variable", "p", "mse", "a"])
        for row in report.parabola_rows:
            writer.writerow([row.estimator, row.variable, repr(row.p),
                             repr(row.mse), repr(row.a)])


def write_freq_hist_csv(report: SimulationReport, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low", "bin_high", "count"])
        edges = report.freq_bin_edges
        for i, count in enumerate(report.freq_counts):
            writer.writerow([repr(float(edges[i])), repr(float(edges[i + 1])),
                             int(count)])


def write_all(report: SimulationReport, out_dir) -> dict:
    paths = {
        "report": os.path.join(out_dir, "report.csv"),
        "coverage": os.path.join(out_dir, "coverage.csv"),
        "parabola": os.path.join(out_dir, "parabola.csv"),
        "freq_hist": os.path.join(out_dir, "freq_hist.csv"),
    }
    write_report_csv(report, paths["report"])
    write_coverage_csv(report, paths["coverage"])
    write_parabola_csv(report, paths["parabola"])
    write_freq_hist_csv(report, paths["freq_hist"])
    return paths
