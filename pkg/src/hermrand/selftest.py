"""Fast invariant suite behind ``hermrand selftest``.

Each check returns ``(name, passed, detail)``.  Seeds are fixed, so repeated
runs print the same log.  ``fault="quadrature"`` perturbs one quadrature
weight before the Gram check, which must then fail.
"""

import math

import numpy as np
from scipy import stats

from .basis import haar_unitary
from .grids import gauss_hermite_grid
from .hermite import QuadratureRule1D, gauss_hermite_rule, hermite_eval_all
from .lab.runner import make_task, run_task
from .measures import CoefficientProfile, RandomLaw, normalize_rows, sample_coefficient_block
from .rng import block_rng
from .spectral import (
    GridEvaluator,
    heat_kernel_diag_closed,
    heat_kernel_diag_series,
    level_window,
    weyl_count,
)

FAULTS = ("quadrature",)


def check_gram(fault=None, n_max=100):
    rule = gauss_hermite_rule(n_max + 2)
    unit = np.array(rule.unit_weights)
    if fault == "quadrature":
        unit[unit.size // 2] *= 1.0 + 1e-6
    rule = QuadratureRule1D(rule.order, rule.nodes, rule.weights, unit, rule.mode)
    table = hermite_eval_all(n_max, rule.nodes)
    gram = (table * rule.unit_weights) @ table.T
    err = float(np.max(np.abs(gram - np.eye(n_max + 1))))
    return "gram", err < 1e-10, f"max |G - I| = {err:.2e} (n <= {n_max})"


def check_mehler():
    worst = 0.0
    for d in (1, 2):
        for t in (0.1, 0.5, 1.0, 2.0):
            lam_max = 14 * math.log(10) / t + d + 2
            for r in np.linspace(0.0, 4.0, 5):
                x = np.zeros(d)
                x[0] = r
                closed = heat_kernel_diag_closed(d, t, x)
                series = heat_kernel_diag_series(d, t, x, lam_max)
                worst = max(worst, abs(series - closed) / closed)
    return "mehler", worst < 1e-8, f"max relative residual {worst:.2e}"


def check_trace():
    worst = 0.0
    for k in (0, 5, 20, 64):
        window = level_window(2, k)
        grid = gauss_hermite_grid(2, k + 2)
        total = float(grid.integrate(GridEvaluator(window, grid).spectral_function()))
        worst = max(worst, abs(total - window.N) / window.N)
    return "trace", worst < 1e-8, f"max relative error {worst:.2e}"


def check_sphere_cdf(N=10, M=20000, seed=7):
    profile = CoefficientProfile(None, np.full(N, 1.0 / math.sqrt(N)))
    law = RandomLaw("complex-gaussian")
    block = normalize_rows(sample_coefficient_block(profile, law, block_rng(seed), M))
    ks = stats.kstest(np.abs(block[:, 0]), lambda t: 1.0 - (1.0 - np.asarray(t) ** 2) ** (N - 1)).statistic
    band = 1.36 / math.sqrt(M) * 1.2
    return "sphere_cdf", bool(ks < band), f"KS {ks:.4f} < band {band:.4f}"


def check_unitarity(N=64, seed=3):
    u = haar_unitary(N, seed)
    err = u.unitarity_error()
    det = abs(u.det_modulus() - 1.0)
    return "unitarity", err < 1e-12 and det < 1e-10, f"max |U*U - I| = {err:.2e}, ||det| - 1| = {det:.2e}"


def check_weyl():
    ok = weyl_count(2, 10) == 15 and 0.95 <= weyl_count(2, 200) / (200**2 / 8) <= 1.05
    return "weyl", ok, f"N(10) = {weyl_count(2, 10)}, N(200)/(200^2/8) = {weyl_count(2, 200) / 5000:.4f}"


def check_determinism(seed=11):
    """Block results must not depend on the number of workers."""
    task = make_task("point", d=2, window={"level": 6}, profile={"kind": "isotropic"},
                     law={"kind": "rademacher"}, x0=[0.5, 0.25])
    serial = run_task(task, 1500, seed, jobs=1, block_size=256)
    pooled = run_task(task, 1500, seed, jobs=3, block_size=256)
    same = serial.tobytes() == pooled.tobytes()
    return "determinism", same, f"jobs=1 vs jobs=3 over {serial.size} samples: {'identical' if same else 'different'}"


def run_selftest(fault=None):
    """Run every check; returns the list of results."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    return [
        check_gram(fault),
        check_mehler(),
        check_trace(),
        check_sphere_cdf(),
        check_unitarity(),
        check_weyl(),
        check_determinism(),
    ]
