"""Haar-random unitaries, random eigenbases and sup-norm profiles of bases.

QR of a complex Gaussian matrix is Haar distributed only after the phases
of R's diagonal are moved into Q; :func:`haar_unitary` applies that
correction so that R has a positive real diagonal.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import json
import math
import multiprocessing
import time

import numpy as np

from . import __version__
from .errors import SizeOverflowError
from .hermite import hermite_eval_all
from .lab.config import config_hash
from .lab.report import FitReport
from .norms import NormEvaluator, NormSpec
from .spectral import level_window, multiplicity

N_MAX_UNITARY = 2048


@dataclass(frozen=True)
class UnitaryMatrix:
    N: int
    matrix: np.ndarray

    def unitarity_error(self):
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(self.N))))

    def det_modulus(self):
        sign, logdet = np.linalg.slogdet(self.matrix)
        return float(np.exp(logdet))


def _rng(seed, key=()):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def haar_unitary(N, seed, key=()):
    """Haar-distributed element of U(N), deterministic in (seed, key)."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be positive")
    if N > N_MAX_UNITARY:
        raise SizeOverflowError(f"N={N} exceeds {N_MAX_UNITARY}")
    rng = _rng(seed, key)
    z = rng.standard_normal((N, N, 2))
    z = (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))[None, :]
    return UnitaryMatrix(N, q)


@dataclass(frozen=True)
class EigenBasis:
    """Orthonormal basis of one eigenspace.

    Column l of ``coefficients`` expresses psi_l over the level's multi-index
    eigenfunctions, in the order of ``indices``.
    """

    d: int
    k: int
    coefficients: np.ndarray
    indices: np.ndarray

    @property
    def eigenvalue(self):
        return 2 * self.k + self.d

    @property
    def window(self):
        return level_window(self.d, self.k)

    def to_dict(self):
        c = self.coefficients
        return {
            "d": self.d,
            "k": self.k,
            "eigenvalue": self.eigenvalue,
            "indices": self.indices.tolist(),
            "real": c.real.tolist(),
            "imag": c.imag.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        coeffs = np.asarray(data["real"]) + 1j * np.asarray(data["imag"])
        return cls(int(data["d"]), int(data["k"]), coeffs, np.asarray(data["indices"], dtype=int))


def random_eigenbasis(d, k, seed):
    """Haar-random orthonormal basis of the level-k eigenspace in dimension d."""
    m = multiplicity(d, k)
    if m > N_MAX_UNITARY:
        raise SizeOverflowError(f"multiplicity {m} exceeds {N_MAX_UNITARY}")
    u = haar_unitary(m, seed, key=(d, k))
    window = level_window(d, k)
    return EigenBasis(d, k, u.matrix, window.multi_indices())


def tensor_basis(d, k):
    """The multi-index eigenfunctions themselves as an EigenBasis."""
    window = level_window(d, k)
    m = window.N
    return EigenBasis(d, k, np.eye(m, dtype=complex), window.multi_indices())


def hermite_sup_norms(n_max, points_per_unit=400):
    """||h_n||_inf for n = 0..n_max on a fine grid, polished by parabolic steps."""
    radius = math.sqrt(2 * n_max + 1) + 4.0
    x = np.linspace(0.0, radius, int(radius * points_per_unit * math.sqrt(2 * n_max + 1) / 4) + 2)
    table = np.abs(hermite_eval_all(n_max, x))
    i = np.argmax(table, axis=1)
    best = table[np.arange(n_max + 1), i]
    dx = x[1] - x[0]
    for n in range(n_max + 1):
        j = i[n]
        if 0 < j < x.size - 1:
            # vertex of the parabola through three samples
            a, b, c = table[n, j - 1], table[n, j], table[n, j + 1]
            den = a - 2 * b + c
            if den < 0:
                off = 0.5 * (a - c) / den * dx
                val = abs(hermite_eval_all(n, np.array([x[j] + off]))[-1, 0])
                best[n] = max(best[n], val)
    return best


def basis_sup_norms(basis, grid=None):
    """Sup-norm of every basis function (refined sup on the default grid)."""
    ev = NormEvaluator(basis.window, NormSpec(math.inf), grid)
    return np.array([ev(basis.coefficients[:, l]) for l in range(basis.coefficients.shape[1])])


def _cell(d, k, seed, mode, base_seed):
    if mode == "tensor":
        sups = hermite_sup_norms(k)
        idx = level_window(d, k).multi_indices()
        return float(np.max(np.prod(sups[idx], axis=1)))
    basis = random_eigenbasis(d, k, seed + base_seed)
    return float(basis_sup_norms(basis).max())


def normalized_ratio(max_sup, d, k):
    lam = 2 * k + d
    return max_sup * lam ** (d / 4.0) / math.sqrt(1.0 + math.log(lam))


def supnorm_profile(d, k_range, seeds, grid=None, mode="haar", base_seed=0, jobs=1):
    """Max sup-norm over a basis of each level and its normalized ratio.

    haar mode draws one random eigenbasis per (k, seed); tensor mode uses the
    multi-index basis (seeds are irrelevant there).  The ratio is
    max_l ||psi_l||_inf lambda_k^{d/4} / (1 + log lambda_k)^{1/2}.
    """
    t0 = time.perf_counter()
    if mode not in ("haar", "tensor"):
        raise ValueError("mode must be 'haar' or 'tensor'")
    seeds = list(seeds) if mode == "haar" else [0]
    cells = [(d, int(k), int(s), mode, int(base_seed)) for k in k_range for s in seeds]
    if jobs and jobs > 1 and len(cells) > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=int(jobs), mp_context=ctx) as pool:
            values = list(pool.map(_cell, *zip(*cells)))
    else:
        values = [_cell(*c) for c in cells]
    report = FitReport(f"basis-{mode}", model="bounded lambda^{d/4} sup / sqrt(1 + log lambda)")
    per_k = {}
    for (dd, k, s, _, _), v in zip(cells, values):
        ratio = normalized_ratio(v, d, k)
        per_k.setdefault(k, []).append(ratio)
        report.add_row(f"max_sup_seed{s}", k, v, v, v, 1)
    summary = []
    for k in k_range:
        r = np.asarray(per_k[int(k)])
        summary.append(r.max())
        report.add_row("ratio_max", k, r.max(), r.min(), r.max(), len(r))
    all_ratios = np.concatenate([np.asarray(v) for v in per_k.values()])
    report.constants = {
        "M_fitted": float(all_ratios.max()),
        "ratio_spread": float(all_ratios.max() / all_ratios.min()),
    }
    if mode == "haar":
        report.checks["bounded_spread_below_4"] = bool(all_ratios.max() / all_ratios.min() < 4.0)
    else:
        report.checks["strictly_increasing"] = bool(np.all(np.diff(summary) > 0))
    report.seed = int(base_seed)
    report.config_hash = config_hash({"experiment": "basis", "d": d, "levels": list(k_range),
                                      "seeds": seeds, "mode": mode})
    report.version = __version__
    report.runtime = time.perf_counter() - t0
    return report
