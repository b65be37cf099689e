"""Acceptance criteria 1-11 at their stated scales and tolerances.

Each criterion is a function returning ``(passed, detail)``; the pytest
wrappers time it, record one PASS/FAIL line (printed in the terminal
summary) and assert both the criterion and its runtime budget.  Running
this file as a script prints the same lines without pytest.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from hermrand.basis import supnorm_profile
from hermrand.grids import gauss_hermite_grid
from hermrand.hermite import gauss_hermite_rule, hermite_eval_all
from hermrand.lab import (
    ExperimentConfig,
    linfty_scaling_experiment,
    lr_median_scaling_experiment,
    mean_median_gap_experiment,
    norm_concentration_experiment,
    norm_statistics_experiment,
    tail_experiment,
)
from hermrand.measures import CoefficientProfile, RandomLaw, normalize_rows, sample_coefficient_block
from hermrand.rng import block_rng
from hermrand.spectral import (
    GridEvaluator,
    heat_kernel_diag_closed,
    heat_kernel_diag_series,
    level_window,
    weyl_count,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

SEED = 20240601
GAUSS = {"kind": "complex-gaussian"}


def criterion_1():
    worst = 0.0
    for d in (1, 2):
        for t in (0.1, 0.5, 1.0, 2.0):
            # e^{-t lambda_max} < 1e-14
            lam_max = 14 * math.log(10) / t + d + 2
            for r in np.linspace(0.0, 4.0, 5):
                x = np.zeros(d)
                x[-1] = r
                closed = heat_kernel_diag_closed(d, t, x)
                worst = max(worst, abs(heat_kernel_diag_series(d, t, x, lam_max) - closed) / closed)
    return worst < 1e-8, f"max |series - closed|/closed = {worst:.2e}"


def criterion_2():
    n_max = 100
    rule = gauss_hermite_rule(n_max + 1)
    table = hermite_eval_all(n_max, rule.nodes)
    err1 = float(np.max(np.abs((table * rule.unit_weights) @ table.T - np.eye(n_max + 1))))
    # d = 2 tensor functions on 200 sampled indices with degrees <= 30 per axis
    rng = np.random.default_rng(SEED)
    idx = {tuple(v) for v in rng.integers(0, 31, size=(400, 2))}
    idx = sorted(idx)[:200]
    rule2 = gauss_hermite_rule(32)
    t1 = hermite_eval_all(30, rule2.nodes)
    w = rule2.unit_weights
    tensor = np.stack([np.outer(t1[i], t1[j]).ravel() for i, j in idx])
    weights = np.outer(w, w).ravel()
    err2 = float(np.max(np.abs((tensor * weights) @ tensor.T - np.eye(len(idx)))))
    return max(err1, err2) < 1e-10, f"d=1 n<=100: {err1:.2e}; d=2 {len(idx)} indices: {err2:.2e}"


def criterion_3():
    M = 10**5
    band = 1.36 / math.sqrt(M) * 1.2
    parts = []
    ok = True
    for i, N in enumerate((2, 10, 33)):
        prof = CoefficientProfile(None, np.full(N, 1 / math.sqrt(N)))
        block = normalize_rows(sample_coefficient_block(prof, RandomLaw("complex-gaussian"), block_rng(SEED, 3, i), M))
        ks = stats.kstest(np.abs(block[:, 0]), lambda t: 1 - np.clip(1 - np.asarray(t) ** 2, 0, None) ** (N - 1)).statistic
        ok &= ks < band
        parts.append(f"N={N} KS={ks:.4f}")
    return bool(ok), ", ".join(parts) + f" (band {band:.4f})"


def criterion_4():
    a, b = weyl_count(2, 10), weyl_count(2, 200) / (200**2 / 8)
    return a == 15 and 0.95 <= b <= 1.05, f"N(10)={a}, N(200)/(200^2/8)={b:.4f}"


def criterion_5():
    worst = 0.0
    for k in (0, 5, 20, 64):
        w = level_window(2, k)
        grid = gauss_hermite_grid(2, k + 2)
        total = float(grid.integrate(GridEvaluator(w, grid).spectral_function()))
        worst = max(worst, abs(total - w.N) / w.N)
    return worst < 1e-8, f"max relative error {worst:.2e}"


def criterion_6():
    base = dict(experiment="tail", d=2, levels=[10], M=10**5, seed=SEED)
    gauss = tail_experiment(ExperimentConfig(**base))
    z = np.abs(gauss.extra["z_scores"]).max()
    rad = tail_experiment(ExperimentConfig(**base, law={"kind": "rademacher"}, fit_range="full"))
    ok = gauss.checks["oracle_within_3se"] and rad.checks["upper_bound_0.8"] and rad.r_squared > 0.9
    return ok, (f"gaussian max|z|={z:.2f} over {len(gauss.extra['z_scores'])} t; "
                f"rademacher R2={rad.r_squared:.4f}, -log P >= 0.8 fit: {rad.checks['upper_bound_0.8']}")


def criterion_7():
    rep = lr_median_scaling_experiment(2, 64, [2, 4, 8, 16], 0.0, GAUSS, 4000, SEED)
    slope = rep.constants["slope"]
    meds = ", ".join(f"{row['statistic']:.3f}" for row in rep.series("median"))
    ok = abs(slope - 0.5) <= 0.1 and rep.r_squared > 0.9
    return ok, f"slope={slope:.3f}, R2={rep.r_squared:.3f}, scaled medians [{meds}]"


def criterion_8():
    rep = linfty_scaling_experiment(2, [16, 32, 64, 128, 256], 2.0, GAUSS, 2000, SEED)
    c = rep.constants
    frac = min(row["statistic"] for row in rep.series("band_fraction"))
    ok = rep.r_squared > 0.95 and rep.checks["band_99"] and c["C1_over_C0"] < 3
    return ok, (f"C={c['C']:.3f}, R2={rep.r_squared:.4f}, band [{c['C0']:.3f}, {c['C1']:.3f}] "
                f"C1/C0={c['C1_over_C0']:.2f}, min in-band fraction {frac:.4f}, cap ok {rep.checks['deterministic_cap']}")


def criterion_9():
    ks = [8, 16, 32, 64, 128]
    haar = supnorm_profile(2, ks, range(5), mode="haar", base_seed=SEED)
    tensor = supnorm_profile(2, ks, [0], mode="tensor")
    tr = ", ".join(f"{row['statistic']:.3f}" for row in tensor.series("ratio_max"))
    ok = haar.checks["bounded_spread_below_4"] and tensor.checks["strictly_increasing"]
    return ok, f"haar spread {haar.constants['ratio_spread']:.2f}; tensor ratios [{tr}]"


def criterion_10():
    conc = norm_concentration_experiment(ExperimentConfig(experiment="concentration", M=20000, seed=SEED,
                                                          N_grid=[8, 16, 32, 64, 128]))
    gap = mean_median_gap_experiment(RandomLaw("real-gaussian"), "ones", [1, 4, 16, 64, 256], 20000, SEED)
    probs = ", ".join(f"{row['statistic']:.4f}" for row in conc.series("tail"))
    ok = conc.checks["monotone_decreasing"] and conc.checks["above_half_linear_fit"] and gap.checks["gap_below_1_for_N_ge_16"]
    return ok, f"P=[{probs}], gap max {gap.constants['max_gap']:.3f}"


def criterion_11():
    cfgs = [
        ExperimentConfig(experiment="tail", d=2, levels=[6], M=3000, seed=SEED, law={"kind": "rademacher"},
                         fit_range="full"),
        ExperimentConfig(experiment="median", d=2, levels=[6, 8], M=1200, seed=SEED,
                         functional={"kind": "norm", "r": 4}),
    ]
    runners = [tail_experiment, norm_statistics_experiment]
    ok = True
    for cfg, run in zip(cfgs, runners):
        prints = {run(cfg, jobs=j).numeric_fingerprint() for j in (1, 2, 3)}
        ok &= len(prints) == 1
    return bool(ok), "tail and median FitReports identical for jobs in {1, 2, 3}"


BUDGETS = {1: 10, 2: 30, 3: 60, 4: 1, 5: 60, 6: 300, 7: 600, 8: 1800, 9: 1200, 10: 300, 11: 120}
CRITERIA = {i: globals()[f"criterion_{i}"] for i in BUDGETS}


def evaluate(i):
    t0 = time.perf_counter()
    ok, detail = CRITERIA[i]()
    elapsed = time.perf_counter() - t0
    in_time = elapsed < BUDGETS[i]
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {i}: {status} [{elapsed:.1f}s / {BUDGETS[i]}s] {detail}"
    return bool(ok), in_time, line


@pytest.mark.parametrize(
    "i", [pytest.param(i, marks=pytest.mark.slow) if i in (7, 8, 9) else i for i in BUDGETS]
)
def test_criterion(i):
    ok, in_time, line = evaluate(i)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


if __name__ == "__main__":
    for i in BUDGETS:
        print(evaluate(i)[2], flush=True)
