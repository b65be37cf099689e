"""Fit reports, bootstrap intervals and regression helpers."""

import csv
import io
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import DegenerateAbscissaError, InsufficientSamplesError

N_BOOTSTRAP = 200
MIN_EXCEEDANCES = 20
CSV_COLUMNS = ("series", "abscissa", "statistic", "ci_lo", "ci_hi", "n_samples", "seed", "config_hash", "version")
SCALING_MODELS = ("sqrt-log", "power-law", "sqrt-r")


@dataclass
class FitReport:
    """Outcome of one experiment.

    ``rows`` hold the raw statistics (one dict per CSV row), ``constants``
    the fitted quantities, ``checks`` named boolean verdicts and ``extra``
    any further diagnostics.  ``runtime`` is the only field allowed to
    differ between reruns.
    """

    experiment: str
    model: str = ""
    rows: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    r_squared: float = float("nan")
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    seed: int = 0
    config_hash: str = ""
    version: str = ""
    runtime: float = 0.0

    def add_row(self, series, abscissa, statistic, ci_lo, ci_hi, n_samples):
        self.rows.append({
            "series": series,
            "abscissa": float(abscissa),
            "statistic": float(statistic),
            "ci_lo": float(ci_lo),
            "ci_hi": float(ci_hi),
            "n_samples": int(n_samples),
        })

    def series(self, name):
        return [r for r in self.rows if r["series"] == name]

    def to_dict(self):
        return _jsonable(asdict(self))

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True, allow_nan=True)

    def numeric_fingerprint(self):
        """Everything except the wall-clock runtime, as canonical JSON."""
        data = self.to_dict()
        data.pop("runtime", None)
        return json.dumps(data, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([
                row["series"],
                repr(row["abscissa"]),
                repr(row["statistic"]),
                repr(row["ci_lo"]),
                repr(row["ci_hi"]),
                row["n_samples"],
                self.seed,
                self.config_hash,
                self.version,
            ])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def bootstrap_ci(values, statistic=np.median, rng=None, n_resamples=N_BOOTSTRAP, level=0.95):
    """Percentile bootstrap interval ``(lo, hi)`` of ``statistic``.

    Resampling indices are drawn in chunks so memory stays bounded for
    large samples.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return float("nan"), float("nan")
    if rng is None:
        rng = np.random.default_rng(0)
    chunk = max(1, int(2e7 // max(x.size, 1)))
    stats = []
    for start in range(0, n_resamples, chunk):
        m = min(chunk, n_resamples - start)
        idx = rng.integers(0, x.size, size=(m, x.size))
        stats.append(statistic(x[idx], axis=1))
    stats = np.concatenate(stats)
    alpha = 0.5 * (1.0 - level)
    lo, hi = np.quantile(stats, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def proportion_bootstrap_ci(count, n, rng, n_resamples=N_BOOTSTRAP, level=0.95):
    """Bootstrap interval of a proportion.

    Resampling n indicators with replacement gives a Binomial(n, count/n)
    count, so the bootstrap distribution is drawn directly.
    """
    p = count / n
    draws = rng.binomial(n, p, size=n_resamples) / n
    alpha = 0.5 * (1.0 - level)
    lo, hi = np.quantile(draws, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def binomial_se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def r_squared(y, yhat, weights=None):
    """Coefficient of determination, clipped to [0, 1]."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = np.sum(w * (y - ybar) ** 2)
    ss_res = np.sum(w * (y - yhat) ** 2)
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return float(min(1.0, max(0.0, 1.0 - ss_res / ss_tot)))


@dataclass(frozen=True)
class LinearFit:
    intercept: float
    slope: float
    r_squared: float
    n_points: int

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


def linear_fit(x, y, weights=None, through_origin=False):
    """(Weighted) least squares fit of y = a + b x, or y = b x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateAbscissaError("need at least two distinct abscissae")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    sw = np.sqrt(w)
    if through_origin:
        design = x[:, None]
    else:
        design = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    a, b = (0.0, coef[0]) if through_origin else (coef[0], coef[1])
    yhat = a + b * x
    return LinearFit(float(a), float(b), r_squared(y, yhat, w), int(x.size))


def tail_fit(x, exceed, n, min_exceed=MIN_EXCEEDANCES, through_origin=False):
    """WLS fit of -log P_hat against ``x`` with binomial variance weights.

    Bins with fewer than ``min_exceed`` exceedances are discarded.  The
    delta method gives Var(-log P_hat) = (1 - p)/(n p).
    """
    x = np.asarray(x, dtype=float)
    exceed = np.asarray(exceed)
    keep = exceed >= min_exceed
    # bins with p_hat = 1 carry no information on the exponential rate
    keep &= exceed < n
    if keep.sum() < 2:
        raise InsufficientSamplesError(
            f"only {int(keep.sum())} bins with >= {min_exceed} exceedances", report=None
        )
    p = exceed[keep] / n
    y = -np.log(p)
    w = n * p / (1.0 - p)
    fit = linear_fit(x[keep], y, w, through_origin=through_origin)
    return fit, keep


def scaling_fit(points, model):
    """Fit a scaling law to ``points = [(abscissa, statistic, ci), ...]``.

    Models
    ------
    sqrt-log
        y = C sqrt(log x) with x = 1/h (least squares through the origin).
    power-law
        log y = a + b log x.
    sqrt-r
        log y = a + b log r; the expected slope is 1/2.
    """
    if model not in SCALING_MODELS:
        raise ValueError(f"unknown model {model!r}")
    if len(points) < 4:
        raise DegenerateAbscissaError("scaling fits need at least 4 points")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.unique(x).size < 2:
        raise DegenerateAbscissaError("abscissae are all equal")
    report = FitReport("scaling_fit", model=model)
    for p in points:
        ci = p[2] if len(p) > 2 and p[2] is not None else (float("nan"), float("nan"))
        report.add_row("statistic", p[0], p[1], ci[0], ci[1], p[3] if len(p) > 3 else 0)
    if model == "sqrt-log":
        if np.any(x <= 1):
            raise DegenerateAbscissaError("sqrt-log needs abscissae 1/h > 1")
        g = np.sqrt(np.log(x))
        fit = linear_fit(g, y, through_origin=True)
        report.constants = {"C": fit.slope}
    else:
        if np.any(x <= 0) or np.any(y <= 0):
            raise DegenerateAbscissaError("log-log fits need positive data")
        fit = linear_fit(np.log(x), np.log(y))
        report.constants = {"slope": fit.slope, "intercept": fit.intercept, "prefactor": math.exp(fit.intercept)}
    report.r_squared = fit.r_squared
    return report
