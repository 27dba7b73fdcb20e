"""Unequal-probability estimators for network samples.

The generalized (Hajek style) estimator divides weighted totals,

    mu_hat = sum_i (y_i / w_i) / sum_i (1 / w_i),

where w_i is anything proportional to unit i's chance of inclusion, for
instance the resampled inclusion frequencies f_i. Two baselines share the
same machinery: the plain sample mean is the equal-weight case, and the
classical degree-weighted estimator uses reported degrees as weights.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .design import ObservedData
from .graph import AttributeTable, Network


class EstimatorError(ValueError):
    pass


class WeightSource(enum.Enum):
    F_RESAMPLED = "f_resampled"
    DEGREE = "degree"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class WeightVector:
    """Positive, finite weights aligned to the sample's units."""

    w: np.ndarray
    source: WeightSource

    def __post_init__(self):
        object.__setattr__(self, "w", _check_weights(self.w))


def _check_weights(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise EstimatorError("weights must be a nonempty 1-d array")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise EstimatorError("weights must be positive and finite")
    return w


def _check_pair(y, w):
    w = w.w if isinstance(w, WeightVector) else _check_weights(w)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != w.shape:
        raise EstimatorError(
            f"y and weights are misaligned ({y.shape} vs {w.shape})")
    if not np.all(np.isfinite(y)):
        raise EstimatorError("y must be finite")
    return y, w


def hajek(y, w) -> float:
    """Weighted-ratio mean estimate sum(y/w) / sum(1/w).

    Parameters
    ----------
    y : array-like
        Observed values, one per sampled unit.
    w : array-like or WeightVector
        Relative inclusion weights; only their ratios matter, so scaling
        every weight by a constant leaves the estimate unchanged.
    """
    y, w = _check_pair(y, w)
    return float(np.sum(y / w) / np.sum(1.0 / w))


def sample_mean(y) -> float:
    """Unweighted mean, the equal-weight special case of hajek."""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise EstimatorError("empty sample")
    return float(np.mean(y))


def vh(y, reported_degree) -> float:
    """Degree-weighted baseline sum(y/d) / sum(1/d).

    Reported degrees must be at least 1; a sampled unit that reports no
    ties cannot be weighted this way.
    """
    d = np.asarray(reported_degree, dtype=np.float64)
    if np.any(d < 1.0):
        raise EstimatorError("vh needs reported degrees >= 1")
    return hajek(y, d)


def variance_hajek(y, w, mu: float) -> float:
    """Design variance estimate for hajek around the point estimate mu.

    With n units and W = sum(1/w), averages the squared deviations of the
    n scaled contributions n*(y_i/w_i)/W about mu, divided by n - 1:

        var_hat = 1/(n(n-1)) * sum_i (n*(y_i/w_i)/W - mu)^2
    """
    y, w = _check_pair(y, w)
    n = y.size
    if n < 2:
        raise EstimatorError("variance needs at least 2 units")
    total = np.sum(1.0 / w)
    dev = n * (y / w) / total - mu
    return float(np.sum(dev * dev) / (n * (n - 1)))


def confidence_interval(mu: float, variance: float, alpha: float):
    """Normal-theory interval mu +/- z * sqrt(variance).

    z is the (1 - alpha/2) standard-normal quantile, evaluated by a
    rational approximation good to well under 1e-8 absolute.
    """
    if not 0.0 < alpha < 1.0:
        raise EstimatorError(f"alpha must be in (0, 1), got {alpha}")
    if variance < 0.0 or not math.isfinite(variance):
        raise EstimatorError(f"bad variance {variance}")
    z = float(ndtri(1.0 - alpha / 2.0))
    half = z * math.sqrt(variance)
    return mu - half, mu + half


# ---------------------------------------------------------------------------
# study variables


class VariableKind(enum.Enum):
    ATTRIBUTE = "attribute"
    DEGREE = "degree"
    K_CONCURRENCY = "k_concurrency"


@dataclass(frozen=True)
class VariableSpec:
    """A study variable: a named attribute, degree itself, or the
    indicator of degree exceeding k (strictly)."""

    kind: VariableKind
    name: str | None = None
    k: int = 10

    @property
    def key(self) -> str:
        if self.kind is VariableKind.ATTRIBUTE:
            return f"attr:{self.name}"
        if self.kind is VariableKind.DEGREE:
            return "degree"
        return f"concurrency:{self.k}"


def parse_variable(text: str) -> VariableSpec:
    """Parse "attr:NAME", "degree", or "concurrency[:K]" (K defaults to 10)."""
    text = text.strip()
    if text == "degree":
        return VariableSpec(VariableKind.DEGREE)
    if text.startswith("attr:"):
        name = text[5:]
        if not name:
            raise EstimatorError("attr: needs a column name")
        return VariableSpec(VariableKind.ATTRIBUTE, name=name)
    if text == "concurrency" or text.startswith("concurrency:"):
        k = 10
        if ":" in text:
            try:
                k = int(text.split(":", 1)[1])
            except ValueError:
                raise EstimatorError(f"bad concurrency threshold in {text!r}") from None
        return VariableSpec(VariableKind.K_CONCURRENCY, k=k)
    raise EstimatorError(f"cannot parse variable {text!r}")


def extract_variable(data, spec: VariableSpec) -> np.ndarray:
    """Evaluate a variable on a sample or on a whole population.

    `data` is either an ObservedData (degrees are the reported ones) or a
    (Network, AttributeTable) pair (degrees are true network degrees).
    """
    if isinstance(data, ObservedData):
        degrees = data.reported_degree
        table = data.values
    else:
        net, table = data
        if not isinstance(net, Network):
            raise EstimatorError("expected ObservedData or (Network, AttributeTable)")
        degrees = net.degrees().astype(np.float64)
    if spec.kind is VariableKind.DEGREE:
        return degrees.copy()
    if spec.kind is VariableKind.K_CONCURRENCY:
        return (degrees > spec.k).astype(np.float64)
    return table.column(spec.name).copy()


# ---------------------------------------------------------------------------
# pipeline assembly


class EstimatorTag(enum.Enum):
    NEW = "new"
    YBAR = "ybar"
    VH = "vh"


@dataclass
class EstimateResult:
    estimator: str
    variable: str
    estimate: float
    variance: float
    se: float
    ci_low: float
    ci_high: float
    alpha: float
    n: int


def evaluate(tag: EstimatorTag, y, obs: ObservedData, freqs, alpha: float,
             variable: str = "") -> EstimateResult:
    """Point estimate, variance, and CI for one estimator on one variable.

    freqs is a FrequencyTable (used only by NEW and allowed to be None
    otherwise).
    """
    if tag is EstimatorTag.NEW:
        if freqs is None:
            raise EstimatorError("NEW estimator needs resampled frequencies")
        w = freqs.f
    elif tag is EstimatorTag.VH:
        d = obs.reported_degree
        if np.any(d < 1.0):
            raise EstimatorError("vh needs reported degrees >= 1")
        w = d
    else:
        w = np.ones(obs.unit_count)
    y = np.asarray(y, dtype=np.float64)
    mu = hajek(y, w)
    var = variance_hajek(y, w, mu)
    lo, hi = confidence_interval(mu, var, alpha)
    return EstimateResult(
        estimator=tag.value, variable=variable, estimate=mu, variance=var,
        se=math.sqrt(var), ci_low=lo, ci_high=hi, alpha=alpha, n=int(y.size))


def write_estimates_csv(results, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["estimator", "variable", "estimate", "se",
                         "ci_low", "ci_high", "n", "alpha"])
        for r in results:
            writer.writerow([r.estimator, r.variable, repr(r.estimate),
                             repr(r.se), repr(r.ci_low), repr(r.ci_high),
                             r.n, repr(r.alpha)])
