"""Normalized Hermite functions and Gauss-Hermite quadrature.

The Hermite functions are evaluated through the Gaussian-weighted three-term
recurrence

    h_0(x) = pi^{-1/4} exp(-x^2/2)
    h_{n+1}(x) = sqrt(2/(n+1)) x h_n(x) - sqrt(n/(n+1)) h_{n-1}(x)

so no polynomial is ever formed and nothing overflows for large degrees.
Beyond |x| ~ 37 the seed value exp(-x^2/2) is below the smallest normal
double; there the recurrence is run on rescaled mantissas with a separate
log-scale so that h_n(x) is still accurate deep inside the oscillatory
region of high degrees.  Values far outside the turning point sqrt(2n+1)
underflow harmlessly to 0.
"""

from dataclasses import dataclass
import functools
import math
import os

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DegreeOverflowError, NonFiniteInputError, OrderOverflowError

N_MAX_DEFAULT = 4096
CACHE_ENV = "HERMRAND_CACHE"
ORDER_MAX = 2048

_LOG_PI_QUARTER = -0.25 * math.log(math.pi)
# Below this |x| the unscaled recurrence never leaves the normal range.
_PLAIN_RANGE = 35.0
_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)


def _check(n_max, x, limit):
    if n_max < 0 or int(n_max) != n_max:
        raise DegreeOverflowError(f"degree must be a nonnegative integer, got {n_max}")
    if n_max > limit:
        raise DegreeOverflowError(f"degree {n_max} exceeds n_max={limit}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("Hermite evaluation needs finite points")
    return int(n_max), x


def _table_plain(n, x):
    out = np.empty((n + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for m in range(1, n):
        out[m + 1] = math.sqrt(2.0 / (m + 1)) * x * out[m] - math.sqrt(m / (m + 1)) * out[m - 1]
    return out


def _table_scaled(n, x):
    out = np.empty((n + 1,) + x.shape)
    log_scale = _LOG_PI_QUARTER - 0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[0] = np.exp(log_scale)
    for m in range(n):
        nxt = math.sqrt(2.0 / (m + 1)) * x * cur - math.sqrt(m / (m + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev = np.where(big, prev / _RESCALE, prev)
            cur = np.where(big, cur / _RESCALE, cur)
            log_scale = np.where(big, log_scale + _LOG_RESCALE, log_scale)
        with np.errstate(under="ignore"):
            out[m + 1] = cur * np.exp(log_scale)
    return out


def hermite_eval_all(n_max, x, limit=N_MAX_DEFAULT):
    """Evaluate h_0, ..., h_{n_max} at ``x`` in a single upward pass.

    Parameters
    ----------
    n_max : int
        Highest degree.
    x : float or ndarray
        Evaluation point(s).
    limit : int, optional
        Degree envelope; larger ``n_max`` raises DegreeOverflowError.

    Returns
    -------
    ndarray
        Shape ``(n_max + 1,) + x.shape``; entry ``k`` is h_k(x).
    """
    n, x = _check(n_max, x, limit)
    if x.size == 0 or np.max(np.abs(x)) < _PLAIN_RANGE:
        return _table_plain(n, x)
    return _table_scaled(n, x)


def hermite_eval(n, x, limit=N_MAX_DEFAULT):
    """L^2-normalized Hermite function h_n at ``x``.

    Same recurrence as :func:`hermite_eval_all`, so the two agree bit for bit.
    """
    table = hermite_eval_all(n, x, limit)
    out = table[-1]
    return float(out) if out.ndim == 0 else out


def hermite_sum_squares(n_terms, x):
    """Return sum_{m < n_terms} h_m(x)^2 without storing the table.

    Used for Christoffel weights, where the table would be order^2 in size.
    """
    x = np.asarray(x, dtype=float)
    log_scale = _LOG_PI_QUARTER - 0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    acc = np.ones_like(x)
    for m in range(n_terms - 1):
        nxt = math.sqrt(2.0 / (m + 1)) * x * cur - math.sqrt(m / (m + 1)) * prev
        prev, cur = cur, nxt
        acc = acc + cur * cur
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev = np.where(big, prev / _RESCALE, prev)
            cur = np.where(big, cur / _RESCALE, cur)
            acc = np.where(big, acc / _RESCALE**2, acc)
            log_scale = np.where(big, log_scale + _LOG_RESCALE, log_scale)
    # returns (acc, log_scale) so that the sum is acc * exp(2 log_scale)
    return acc, log_scale


@dataclass(frozen=True)
class QuadratureRule1D:
    """One-dimensional quadrature rule.

    ``mode`` is ``"gauss-hermite"`` (``weights`` integrate against exp(-x^2))
    or ``"uniform"`` (unit weight on a truncated uniform grid).  In both modes
    ``unit_weights`` integrate a plain function f(x) dx; for Gauss-Hermite
    they equal weights * exp(x^2) and are computed without overflow.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    unit_weights: np.ndarray
    mode: str = "gauss-hermite"

    def integrate(self, values):
        """Integrate sampled values of f (not f * exp(x^2)) along axis 0."""
        return np.tensordot(self.unit_weights, values, axes=(0, 0))


def _newton_polish(order, nodes, steps=2):
    # h_n'(x) = sqrt(2n) h_{n-1}(x) - x h_n(x); only the ratio matters, so the
    # underflow-safe table is fine even where the values are tiny.
    for _ in range(steps):
        tab = hermite_eval_all(order, nodes, limit=max(order, N_MAX_DEFAULT))
        hn, hm = tab[order], tab[order - 1]
        deriv = math.sqrt(2.0 * order) * hm - nodes * hn
        ok = deriv != 0
        step = np.zeros_like(nodes)
        step[ok] = hn[ok] / deriv[ok]
        nodes = nodes - step
    return nodes


def gauss_hermite_rule(order):
    """Gauss-Hermite nodes and weights for the weight exp(-x^2).

    Rules are memoized in memory and, when the ``HERMRAND_CACHE`` environment
    variable names a directory, on disk as ``gh_<order>.npz``.  The returned
    arrays are read-only.
    """
    if order < 1 or int(order) != order:
        raise OrderOverflowError(f"order must be a positive integer, got {order}")
    if order > ORDER_MAX:
        raise OrderOverflowError(f"order {order} exceeds {ORDER_MAX}")
    return _cached_rule(int(order), os.environ.get(CACHE_ENV, ""))


@functools.lru_cache(maxsize=64)
def _cached_rule(order, cache_dir):
    path = os.path.join(cache_dir, f"gh_{order}.npz") if cache_dir else None
    if path and os.path.exists(path):
        with np.load(path) as data:
            nodes, weights, unit = data["nodes"], data["weights"], data["unit_weights"]
    else:
        rule = _compute_gauss_hermite(order)
        nodes, weights, unit = rule.nodes, rule.weights, rule.unit_weights
        if path:
            os.makedirs(cache_dir, exist_ok=True)
            tmp = f"{path}.{os.getpid()}.tmp.npz"
            np.savez(tmp, nodes=nodes, weights=weights, unit_weights=unit)
            os.replace(tmp, path)
    for arr in (nodes, weights, unit):
        arr.flags.writeable = False
    return QuadratureRule1D(order, nodes, weights, unit, "gauss-hermite")


def _compute_gauss_hermite(order):
    """Golub-Welsch construction of the order-``order`` rule.

    Nodes are eigenvalues of the symmetric Jacobi matrix (Golub-Welsch),
    polished by Newton steps on h_order.  Weights come from the Christoffel
    function, w_i exp(x_i^2) = 1 / sum_{m<order} h_m(x_i)^2, which stays
    finite for every order up to 2048 even where w_i itself underflows.
    """
    if order == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, order) / 2.0)
        nodes = eigvalsh_tridiagonal(np.zeros(order), off)
        nodes = _newton_polish(order, nodes)
        # exact symmetry of the rule
        nodes = 0.5 * (nodes - nodes[::-1])
    acc, log_scale = hermite_sum_squares(order, nodes)
    log_unit = -np.log(acc) - 2.0 * log_scale
    unit = np.exp(log_unit)
    with np.errstate(under="ignore"):
        weights = np.exp(log_unit - nodes * nodes)
    return QuadratureRule1D(order, nodes, weights, unit, "gauss-hermite")


def scaled_gauss_hermite_rule(order, scale):
    """Gauss-Hermite rule for integrals of f(x) dx whose decay is exp(-scale x^2).

    Substituting x = y / sqrt(scale) makes |P(x)|^r exp(-p x^2) integrands
    polynomial-times-exp(-y^2) again, so even powers of Hermite expansions are
    integrated exactly.
    """
    base = gauss_hermite_rule(order)
    root = math.sqrt(scale)
    return QuadratureRule1D(
        order,
        base.nodes / root,
        base.weights / root,
        base.unit_weights / root,
        "gauss-hermite",
    )


def uniform_rule(radius, spacing):
    """Uniform grid on [-radius, radius] with trapezoid (unit) weights.

    Endpoint corrections are omitted: the integrands are negligible at the
    cutoff by construction, which makes the rule spectrally accurate.
    """
    if spacing <= 0 or radius <= 0:
        raise OrderOverflowError("uniform rule needs positive radius and spacing")
    half = int(math.ceil(radius / spacing))
    nodes = spacing * np.arange(-half, half + 1, dtype=float)
    weights = np.full(nodes.shape, float(spacing))
    return QuadratureRule1D(nodes.size, nodes, weights, weights, "uniform")
