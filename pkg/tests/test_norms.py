import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermrand.errors import ExponentError, GridEnvelopeError
from hermrand.grids import gauss_hermite_grid, sup_grid, uniform_grid
from hermrand.measures import RandomLaw, isotropic_profile, normalize_rows, sample_coefficient_block
from hermrand.norms import (
    NormEvaluator,
    NormSpec,
    besov_norm,
    default_grid,
    detsob_cap,
    dyadic_blocks,
    full_window,
    interpolation_check,
    pointwise_cap,
    sobolev_norm,
    weighted_norm,
    weighted_spec,
)
from hermrand.rng import block_rng
from hermrand.spectral import GridEvaluator, level_window, spectral_increment_norm

GROUND = level_window(2, 0)


def random_sphere(window, n, seed):
    law = RandomLaw("complex-gaussian")
    return normalize_rows(sample_coefficient_block(isotropic_profile(window), law, block_rng(seed), n))


# --- ground-state values ----------------------------------------------------------

def test_ground_state_l2():
    assert weighted_norm([1.0], NormSpec(2), window=GROUND) == pytest.approx(1.0, rel=1e-10)


def test_ground_state_sup():
    assert weighted_norm([1.0], NormSpec(math.inf), window=GROUND) == pytest.approx(math.pi**-0.5, rel=1e-10)
    assert weighted_norm([1.0], NormSpec(math.inf), window=GROUND) == pytest.approx(0.564190, abs=1e-6)


def test_ground_state_l4():
    val = weighted_norm([1.0], NormSpec(4), window=GROUND)
    assert val == pytest.approx((2 * math.pi) ** -0.25, rel=1e-10)
    assert val == pytest.approx(0.631619, abs=1e-6)


def test_ground_state_weighted_l2():
    # int <x>^2 pi^{-1} e^{-|x|^2} dx = 2
    assert weighted_norm([1.0], NormSpec(2, 2.0), window=GROUND) == pytest.approx(math.sqrt(2), rel=1e-10)


def test_ground_state_non_even_r():
    # int pi^{-3/2} e^{-3|x|^2/2} dx = (2/3) pi^{-1/2}
    exact = (2 / 3 / math.sqrt(math.pi)) ** (1 / 3)
    assert weighted_norm([1.0], NormSpec(3), window=GROUND) == pytest.approx(exact, rel=1e-6)


def test_exponent_below_one():
    with pytest.raises(ExponentError):
        NormSpec(0.5)


def test_weighted_spec_convention():
    assert weighted_spec(4, 2.0) == NormSpec(4.0, 2.0, 2.0)
    assert weighted_spec(math.inf, 2.0) == NormSpec(math.inf, 1.0, 2.0)


def test_grid_envelope_error():
    w = level_window(2, 10)
    with pytest.raises(GridEnvelopeError):
        NormEvaluator(w, NormSpec(2), gauss_hermite_grid(2, 30, design_degree=5))


def test_truncation_warning():
    w = level_window(2, 10)
    grid = uniform_grid(2, 3.0, 0.1, w.max_degree)
    c = np.zeros(w.N)
    c[0] = 1.0
    with pytest.warns(RuntimeWarning):
        weighted_norm(c, NormSpec(math.inf), grid, w)


# --- Sobolev ------------------------------------------------------------------------

def test_sobolev_single_eigenfunction():
    w = level_window(2, 3)
    c = np.zeros(w.N)
    c[1] = 1.0
    assert sobolev_norm(c, NormSpec(2, 1.0), window=w) == pytest.approx(math.sqrt(8), rel=1e-10)
    assert sobolev_norm(c, NormSpec(2, 1.0), window=w) == pytest.approx(2.828427, abs=1e-6)


def test_sobolev_order_zero_is_lebesgue():
    w = level_window(2, 5)
    u = random_sphere(w, 1, 3)[0]
    assert sobolev_norm(u, NormSpec(4, 0.0), window=w) == weighted_norm(u, NormSpec(4), window=w)


@pytest.mark.parametrize("s", [0.5, 1.0, 3.0])
def test_sobolev_single_level_exact(s):
    w = level_window(2, 7)
    u = random_sphere(w, 1, 4)[0]
    assert sobolev_norm(u, NormSpec(2, s), window=w) == pytest.approx(w.lambda_max ** (s / 2), rel=1e-10)


def test_negative_sobolev_order():
    with pytest.raises(ExponentError):
        sobolev_norm([1.0], NormSpec(2, -1.0), window=GROUND)


# --- invariants -----------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(k=st.integers(0, 30), seed=st.integers(0, 2**32))
def test_parseval(k, seed):
    w = level_window(2, k)
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(w.N) + 1j * rng.standard_normal(w.N)
    assert weighted_norm(c, NormSpec(2), window=w) == pytest.approx(np.linalg.norm(c), rel=1e-8)


def test_parseval_multi_level():
    w = full_window(2, 12)
    c = np.random.default_rng(0).standard_normal(w.N)
    assert weighted_norm(c, NormSpec(2), window=w) == pytest.approx(np.linalg.norm(c), rel=1e-8)


@pytest.mark.parametrize("spec", [NormSpec(2), NormSpec(4, 1.0), NormSpec(3), NormSpec(math.inf, 0.5)], ids=str)
@pytest.mark.parametrize("scale", [0.001, 2.5, -7.0, 3j])
def test_homogeneity(spec, scale):
    w = level_window(2, 6)
    u = random_sphere(w, 1, 5)[0]
    ev = NormEvaluator(w, spec)
    assert ev(scale * u) == pytest.approx(abs(scale) * ev(u), rel=1e-9)


@pytest.mark.parametrize("r", [2, 4, 3, math.inf])
def test_monotone_in_weight(r):
    w = level_window(2, 6)
    u = random_sphere(w, 1, 6)[0]
    grid = default_grid(w, NormSpec(r, 3.0))
    vals = [NormEvaluator(w, NormSpec(r, s), grid)(u) for s in (0.0, 0.5, 1.0, 2.0, 3.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_sup_refinement_improves_and_stays_below_cap():
    w = level_window(2, 20)
    us = random_sphere(w, 20, 7)
    coarse = NormEvaluator(w, NormSpec(math.inf), refine=False)
    fine = NormEvaluator(w, NormSpec(math.inf), coarse.grid, refine=True)
    cap = math.sqrt(max(GridEvaluator(w, coarse.grid).spectral_function().max(), 0.0))
    for u in us:
        a, b = coarse(u), fine(u)
        assert a <= b <= 1.02 * cap
    # a 4x finer grid never beats the refined value by more than 1%
    dense = uniform_grid(2, coarse.grid.r_cut, 0.25 / math.sqrt(w.lambda_max), w.max_degree)
    dense_val = NormEvaluator(w, NormSpec(math.inf), dense, refine=False)(us[0])
    assert fine(us[0]) >= dense_val * (1 - 1e-2)


@pytest.mark.parametrize("theta", [0.0, 1.0, 2.0])
def test_deterministic_sup_bound_over_k_sweep(theta):
    ratios, caps = [], []
    spec = weighted_spec(math.inf, theta)
    for k in (8, 16, 32):
        w = level_window(2, k)
        grid = sup_grid(2, w.lambda_max)
        ev = NormEvaluator(w, spec, grid, refine=False)
        base = detsob_cap(w, theta)
        cap = pointwise_cap(w, grid, theta / 2) / base
        us = random_sphere(w, 1000, 100 + k)
        vals = np.array([ev(u) for u in us]) / base
        assert vals.max() <= cap * (1 + 1e-10)
        ratios.append(vals.max())
        caps.append(cap)
    # the fitted constant is uniform in k
    assert max(caps) / min(caps) < 2.0
    assert max(ratios) <= max(caps)


@pytest.mark.parametrize("p", [4, 8])
def test_deterministic_lp_bound(p):
    theta = 1.0
    spec = weighted_spec(p, theta)
    caps = []
    for k in (8, 16, 32):
        w = level_window(2, k)
        ev = NormEvaluator(w, spec)
        # |u|^p <= e_x^{p/2} pointwise gives the exact cap
        cap = spectral_increment_norm(w, p / 2, theta, ev.grid) ** 0.5
        base = detsob_cap(w, theta, p)
        vals = np.array([ev(u) for u in random_sphere(w, 300, 200 + k)])
        assert vals.max() <= cap * (1 + 1e-10)
        caps.append(cap / base)
    assert max(caps) / min(caps) < 2.0


# --- dyadic blocks and Besov ---------------------------------------------------------------

def test_dyadic_examples():
    blocks = dyadic_blocks([1.0], [8.0])
    assert [b.n for b in blocks] == [3]
    assert dyadic_blocks([], []) == []
    blocks = dyadic_blocks([1.0, 2.0, 3.0], [3.0, 4.0, 8.0])
    assert [(b.n, list(b.coeffs)) for b in blocks] == [(1, [1.0]), (2, [2.0]), (3, [3.0])]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=1, max_size=40))
def test_dyadic_partition_roundtrip(levels):
    lam = np.sort(2.0 * np.array(levels) + 2.0)
    c = np.arange(lam.size, dtype=float)
    blocks = dyadic_blocks(c, lam)
    np.testing.assert_array_equal(np.concatenate([b.coeffs for b in blocks]), c)
    for b in blocks:
        assert np.all((2.0**b.n <= lam[b.positions]) & (lam[b.positions] < 2.0 ** (b.n + 1)))


def test_besov_examples():
    assert besov_norm(dyadic_blocks([1.0], [1.0]), 0.0, 2, 1) == 1.0
    blocks = dyadic_blocks([1.0, 1.0], [2.0, 4.0])
    assert besov_norm(blocks, 1.0, 2, 1) == pytest.approx(2**0.5 + 2.0)
    assert besov_norm(blocks, 1.0, 2, 1) == pytest.approx(3.414214, abs=1e-6)
    assert besov_norm(blocks, 1.0, 2, math.inf) == pytest.approx(2.0)


def test_besov_parseval():
    w = full_window(2, 20)
    c = np.random.default_rng(3).standard_normal(w.N)
    blocks = dyadic_blocks(c, w.eigenvalues())
    assert besov_norm(blocks, 0.0, 2, 2) == pytest.approx(weighted_norm(c, NormSpec(2), window=w), rel=1e-8)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_besov_sobolev_single_block(s):
    w = full_window(2, 20)
    lam = w.eigenvalues()
    c = np.where((lam >= 16) & (lam < 32), 1.0, 0.0) * np.random.default_rng(4).standard_normal(w.N)
    blocks = [b for b in dyadic_blocks(c, lam) if np.any(b.coeffs)]
    assert len(blocks) == 1
    ratio = besov_norm(blocks, s, 2, 2) / sobolev_norm(c, NormSpec(2, s), window=w)
    assert 2 ** (-s / 2) <= ratio <= 1.0


def test_besov_non_l2_blocks():
    w = full_window(2, 6)
    c = np.zeros(w.N)
    c[0] = 1.0
    blocks = dyadic_blocks(c, w.eigenvalues())
    assert besov_norm(blocks, 0.0, 4, 1, window=w) == pytest.approx((2 * math.pi) ** -0.25, rel=1e-10)


# --- interpolation ------------------------------------------------------------------------

def test_interpolation_endpoint_equality():
    w = level_window(2, 4)
    u = random_sphere(w, 1, 8)[0]
    rep = interpolation_check(u, 6, 2, 2, 1.0, 0.5, gauss_hermite_grid(2, 20), w)
    assert rep.kappa == 1.0 and rep.satisfied
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-12)


def test_interpolation_sup_endpoint_random_samples():
    w = level_window(2, 10)
    grid = sup_grid(2, w.lambda_max)
    for u in random_sphere(w, 100, 9):
        rep = interpolation_check(u, math.inf, 2, 4, 1.0, 0.0, grid, w)
        assert rep.satisfied
        assert rep.s == 2.0 and rep.kappa == 0.5


def test_interpolation_ground_state_finite():
    grid = gauss_hermite_grid(2, 40, scale=3.0, design_degree=0)
    rep = interpolation_check([1.0], 6, 2, 3, 1.0, 0.0, grid, GROUND)
    assert rep.satisfied and rep.slack >= 1.0
    assert rep.kappa == pytest.approx(0.5)


def test_interpolation_bad_exponents():
    with pytest.raises(ExponentError):
        interpolation_check([1.0], 2, 4, 3, 0.0, 0.0, gauss_hermite_grid(2, 10), GROUND)
    with pytest.raises(ExponentError):
        interpolation_check([1.0], 4, 4, 5, 0.0, 0.0, gauss_hermite_grid(2, 10), GROUND)
