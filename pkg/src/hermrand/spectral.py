"""Eigenstructure of the isotropic harmonic oscillator -Delta + |x|^2 on R^d.

Eigenvalues are 2|j| + d for multi-indices j in N^d, with eigenfunctions the
tensor products of 1-D Hermite functions.  Windows are stored by level
(k, 2k + d, multiplicity) and multi-indices are expanded lazily.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import EmptyWindowError, InvalidWindowError, NonPositiveTimeError
from .hermite import N_MAX_DEFAULT, hermite_eval_all

# Window edges a_h/h, b_h/h are snapped by this relative amount so that
# floating-point roundoff in a_h/h never drops an eigenvalue sitting exactly
# on the closed left edge.
_EDGE_RTOL = 1e-9


def multiplicity(d, k):
    """Number of multi-indices j in N^d with |j| = k."""
    return math.comb(k + d - 1, d - 1)


@dataclass(frozen=True)
class Level:
    k: int
    eigenvalue: int
    multiplicity: int


@dataclass(frozen=True)
class MultiIndex:
    components: tuple

    @property
    def level(self):
        return sum(self.components)

    @property
    def eigenvalue(self):
        return 2 * self.level + len(self.components)


@lru_cache(maxsize=256)
def level_indices(d, k):
    """All j with |j| = k, lexicographically ascending, as an (m_k, d) int array."""
    if d == 1:
        return np.array([[k]], dtype=int)
    rows = []
    for head in range(k + 1):
        for tail in level_indices(d - 1, k - head):
            rows.append((head,) + tuple(int(t) for t in tail))
    out = np.array(rows, dtype=int)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpectralWindow:
    """Eigenvalues of H in I_h = [a_h/h, b_h/h), grouped by level."""

    d: int
    h: float
    a_h: float
    b_h: float
    delta: float = 1.0
    levels: tuple = field(default=())

    @property
    def N(self):
        return sum(level.multiplicity for level in self.levels)

    @property
    def is_empty(self):
        return not self.levels

    @property
    def lambda_max(self):
        return max(level.eigenvalue for level in self.levels)

    @property
    def lambda_min(self):
        return min(level.eigenvalue for level in self.levels)

    @property
    def max_degree(self):
        return max(level.k for level in self.levels)

    def multi_indices(self):
        """(N, d) array of multi-indices, ordered by level then lexicographically."""
        if self.is_empty:
            return np.zeros((0, self.d), dtype=int)
        return np.concatenate([level_indices(self.d, lv.k) for lv in self.levels])

    def eigenvalues(self):
        return np.concatenate(
            [np.full(lv.multiplicity, lv.eigenvalue, dtype=float) for lv in self.levels]
        ) if self.levels else np.zeros(0)

    def to_dict(self):
        return {
            "d": self.d,
            "h": self.h,
            "a_h": self.a_h,
            "b_h": self.b_h,
            "delta": self.delta,
            "levels": [[lv.k, lv.eigenvalue, lv.multiplicity] for lv in self.levels],
            "N": self.N,
        }


def enumerate_window(d, h, a_h, b_h, delta=1.0):
    """Collect the levels of H whose eigenvalue lies in [a_h/h, b_h/h).

    An empty window is a valid result.  Raises InvalidWindowError when
    ``a_h > b_h``, ``h <= 0`` or ``d < 1``.
    """
    if d < 1 or int(d) != d:
        raise InvalidWindowError(f"dimension must be a positive integer, got {d}")
    if not h > 0:
        raise InvalidWindowError(f"h must be positive, got {h}")
    if not (a_h > 0 and b_h > 0) or a_h > b_h:
        raise InvalidWindowError(f"need 0 < a_h <= b_h, got a_h={a_h}, b_h={b_h}")
    d = int(d)
    lo = a_h / h
    hi = b_h / h
    lo -= _EDGE_RTOL * max(1.0, abs(lo))
    hi -= _EDGE_RTOL * max(1.0, abs(hi))
    k_min = max(0, math.ceil((lo - d) / 2.0))
    levels = []
    k = k_min
    while 2 * k + d < hi:
        if 2 * k + d >= lo:
            levels.append(Level(k, 2 * k + d, multiplicity(d, k)))
        k += 1
    return SpectralWindow(d, float(h), float(a_h), float(b_h), float(delta), tuple(levels))


def level_window(d, k):
    """Single-eigenvalue window for level k.

    Uses h = 1/k, a_h = 2 + d h, b_h = 2 + (2 + d) h, so that
    I_h = [2k + d, 2k + d + 2).  Level 0 uses h = 1 with I_h = [d, d + 2).
    """
    if k < 0:
        raise InvalidWindowError("level must be nonnegative")
    if k == 0:
        return enumerate_window(d, 1.0, float(d), float(d + 2), delta=1.0)
    h = 1.0 / k
    return enumerate_window(d, h, 2.0 + d * h, 2.0 + (2.0 + d) * h, delta=1.0)


def window_h(window):
    """Semiclassical parameter attached to a window."""
    return window.h


def eigenfunction_eval(j, x, limit=N_MAX_DEFAULT):
    """Tensor Hermite function phi_j(x) = prod_i h_{j_i}(x_i)."""
    comps = j.components if isinstance(j, MultiIndex) else tuple(j)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(comps):
        raise ValueError("point dimension does not match multi-index")
    out = 1.0
    for i, n in enumerate(comps):
        out = out * hermite_eval_all(n, x[..., i], limit)[-1]
    return out


def eigenfunction_table(window, points):
    """Values of all window eigenfunctions at points (P, d) as an (N, P) array."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    idx = window.multi_indices()
    deg = window.max_degree
    tables = [hermite_eval_all(deg, points[:, i]) for i in range(window.d)]
    out = np.ones((idx.shape[0], points.shape[0]))
    for i in range(window.d):
        out *= tables[i][idx[:, i]]
    return out


def spectral_function(window, x, s=0.0):
    """e_x = sum_{j in Lambda_h} |phi_j(x)|^2 at one point or an (P, d) array.

    With ``s != 0`` the terms are weighted by lambda_j^s, which is the
    spectral function of the linear form u -> (H^{s/2} u)(x).
    """
    if window.is_empty:
        raise EmptyWindowError("spectral function of an empty window")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    table = eigenfunction_table(window, x.reshape(-1, window.d))
    weights = window.eigenvalues() ** s if s else 1.0
    if s:
        vals = (weights[:, None] * table**2).sum(axis=0)
    else:
        vals = (table**2).sum(axis=0)
    return float(vals[0]) if single else vals


class GridEvaluator:
    """Synthesize window expansions on a tensor grid.

    Per-axis Hermite tables are computed once; a coefficient vector is then
    mapped to grid values by d successive contractions, which for d = 2 is
    two matrix products.
    """

    def __init__(self, window, grid):
        if window.is_empty:
            raise EmptyWindowError("cannot evaluate on an empty window")
        if grid.d != window.d:
            raise ValueError("grid and window dimensions differ")
        self.window = window
        self.grid = grid
        self.degree = window.max_degree
        self.indices = window.multi_indices()
        self.tables = [hermite_eval_all(self.degree, axis) for axis in grid.axes]
        self._flat = np.ravel_multi_index(self.indices.T, (self.degree + 1,) * window.d)

    def coefficient_tensor(self, coeffs):
        tensor = np.zeros((self.degree + 1) ** self.window.d, dtype=np.asarray(coeffs).dtype)
        tensor[self._flat] = coeffs
        return tensor.reshape((self.degree + 1,) * self.window.d)

    def _contract(self, tensor, tables):
        out = tensor
        for table in tables:
            # contract the leading coefficient axis; grid axes accumulate at the end
            out = np.tensordot(out, table, axes=([0], [0]))
        return out

    def __call__(self, coeffs):
        coeffs = np.asarray(coeffs)
        if np.iscomplexobj(coeffs):
            re = self._contract(self.coefficient_tensor(coeffs.real), self.tables)
            im = self._contract(self.coefficient_tensor(coeffs.imag), self.tables)
            return re + 1j * im
        return self._contract(self.coefficient_tensor(coeffs), self.tables)

    def spectral_function(self, s=0.0):
        weights = self.window.eigenvalues() ** s if s else np.ones(self.window.N)
        squared = [t * t for t in self.tables]
        return self._contract(self.coefficient_tensor(weights), squared)


def heat_kernel_diag_closed(d, t, x):
    """Mehler diagonal (2 pi sinh 2t)^{-d/2} exp(-|x|^2 tanh t)."""
    if not t > 0:
        raise NonPositiveTimeError(f"time must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    out = (2.0 * math.pi * math.sinh(2.0 * t)) ** (-d / 2.0) * np.exp(-r2 * math.tanh(t))
    return float(out) if np.ndim(out) == 0 else out


def level_sums(d, x, k_max):
    """S_k(x) = sum_{|j| = k} phi_j(x)^2 for k = 0..k_max at a single point."""
    x = np.asarray(x, dtype=float).reshape(d)
    seqs = [hermite_eval_all(k_max, x[i]) ** 2 for i in range(d)]
    out = seqs[0]
    for seq in seqs[1:]:
        out = np.convolve(out, seq)[: k_max + 1]
    return out


def heat_kernel_diag_series(d, t, x, lambda_max):
    """Truncated spectral sum sum_{lambda_j <= lambda_max} e^{-t lambda_j} |phi_j(x)|^2."""
    if not t > 0:
        raise NonPositiveTimeError(f"time must be positive, got {t}")
    if lambda_max < d:
        return 0.0
    k_max = int((lambda_max - d) // 2)
    sums = level_sums(d, x, k_max)
    lam = 2.0 * np.arange(k_max + 1) + d
    terms = np.exp(-t * lam) * sums
    # add smallest terms first
    return math.fsum(terms[::-1])


def weyl_count(d, lam):
    """Exact number of eigenvalues <= lam, counted with multiplicity."""
    if lam < d:
        return 0
    k_max = int((lam - d) // 2)
    # sum_{k<=K} C(k+d-1, d-1) = C(K+d, d)
    return math.comb(k_max + d, d)


def beta_exponent(r, theta, d):
    """beta_{r,theta} = (d - theta)/2 * (1 - 2/r)."""
    if math.isinf(r):
        return (d - theta) / 2.0
    return (d - theta) / 2.0 * (1.0 - 2.0 / r)


def spectral_increment_norm(window, p, theta, grid, warn=True):
    """(int <x>^{theta (p-1)} e_x^p dx)^{1/p} by quadrature on ``grid``."""
    import warnings

    if window.is_empty:
        raise EmptyWindowError("spectral increment of an empty window")
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > 1 and not theta > -window.d / (p - 1):
        raise ValueError("need theta > -d/(p-1)")
    evaluator = GridEvaluator(window, grid)
    ex = evaluator.spectral_function()
    integrand = grid.japanese(theta * (p - 1)) * ex**p
    value = float(grid.integrate(integrand))
    if warn and grid.mode == "uniform-truncated":
        shell = _boundary_mass(integrand, grid)
        if shell > 1e-6 * value:
            warnings.warn(
                f"grid cutoff {grid.r_cut:.3g} truncates about {shell / value:.2e} of the integral",
                RuntimeWarning,
                stacklevel=2,
            )
    return value ** (1.0 / p)


def _boundary_mass(values, grid):
    # mass carried by the outermost layer of the grid
    mask = np.zeros(grid.shape, dtype=bool)
    for i in range(grid.d):
        sl = [slice(None)] * grid.d
        sl[i] = [0, grid.shape[i] - 1]
        mask[tuple(sl)] = True
    cell = np.prod([rule.unit_weights[0] for rule in grid.rules])
    return float(np.abs(values[mask]).sum() * cell)


def multi_index_iter(d, k_max):
    """Multi-indices with |j| <= k_max in level order."""
    for k in range(k_max + 1):
        for row in level_indices(d, k):
            yield MultiIndex(tuple(int(v) for v in row))


__all__ = [
    "Level",
    "MultiIndex",
    "SpectralWindow",
    "GridEvaluator",
    "beta_exponent",
    "eigenfunction_eval",
    "eigenfunction_table",
    "enumerate_window",
    "heat_kernel_diag_closed",
    "heat_kernel_diag_series",
    "level_indices",
    "level_sums",
    "level_window",
    "multi_index_iter",
    "multiplicity",
    "spectral_function",
    "spectral_increment_norm",
    "weyl_count",
]
