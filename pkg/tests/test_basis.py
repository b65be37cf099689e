import math

import numpy as np
import pytest
from scipy import stats
from hypothesis import given, settings, strategies as st

from hermrand.basis import (
    EigenBasis,
    basis_sup_norms,
    haar_unitary,
    hermite_sup_norms,
    normalized_ratio,
    random_eigenbasis,
    supnorm_profile,
    tensor_basis,
)
from hermrand.errors import SizeOverflowError
from hermrand.grids import gauss_hermite_grid
from hermrand.hermite import hermite_eval_all
from hermrand.spectral import eigenfunction_table, spectral_function


def test_one_by_one_is_a_phase():
    u = haar_unitary(1, 3).matrix
    assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-15


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 80), seed=st.integers(0, 2**64 - 1))
def test_unitarity(n, seed):
    u = haar_unitary(n, seed)
    assert u.unitarity_error() < 1e-12
    assert abs(u.det_modulus() - 1) < 1e-10


def test_size_overflow():
    with pytest.raises(SizeOverflowError):
        haar_unitary(2049, 0)
    with pytest.raises(SizeOverflowError):
        random_eigenbasis(2, 2048, 0)


def test_haar_column_is_uniform_on_sphere():
    N = 8
    t = np.array([abs(haar_unitary(N, 0, key=(i,)).matrix[0, 0]) for i in range(10**4)])
    ks = stats.kstest(t, lambda x: 1 - (1 - np.minimum(np.asarray(x), 1) ** 2) ** (N - 1)).statistic
    assert ks < 1.36 / math.sqrt(10**4) * 1.2


def test_haar_invariance_smoke():
    # left multiplication by a fixed unitary V preserves the law of U e_1
    N = 6
    v = np.linalg.qr(np.arange(1, N * N + 1).reshape(N, N) + 1j * np.eye(N))[0]
    a, b = [], []
    for i in range(4000):
        col = haar_unitary(N, 1, key=(i,)).matrix[:, 0]
        a.append(abs(col[0]))
        b.append(abs((v @ col)[0]))
    assert stats.ks_2samp(a, b).pvalue > 0.001


def test_ground_level_basis_is_ground_state():
    b = random_eigenbasis(2, 0, 5)
    assert b.coefficients.shape == (1, 1) and abs(abs(b.coefficients[0, 0]) - 1) < 1e-14
    assert b.eigenvalue == 2


def quadrature_gram(basis):
    grid = gauss_hermite_grid(2, basis.k + 2)
    tab = eigenfunction_table(basis.window, grid.points())
    psi = basis.coefficients.T @ tab
    w = np.outer(*[r.unit_weights for r in grid.rules]).ravel()
    return (psi.conj() * w) @ psi.T


@pytest.mark.parametrize("k", [3, 12])
def test_basis_gram_identity(k):
    b = random_eigenbasis(2, k, 6)
    assert b.coefficients.shape == (k + 1, k + 1)
    gram = quadrature_gram(b)
    assert np.max(np.abs(gram - np.eye(k + 1))) < 1e-10


def test_basis_reproducible_and_json_roundtrip():
    a, b = random_eigenbasis(2, 7, 11), random_eigenbasis(2, 7, 11)
    assert a.coefficients.tobytes() == b.coefficients.tobytes()
    back = EigenBasis.from_dict(a.to_dict())
    np.testing.assert_array_equal(back.coefficients, a.coefficients)
    np.testing.assert_array_equal(back.indices, a.indices)
    assert random_eigenbasis(2, 7, 12).coefficients.tobytes() != a.coefficients.tobytes()


@pytest.mark.parametrize("k", [1, 5, 20])
def test_spectral_function_is_basis_independent(k):
    b = random_eigenbasis(2, k, 13)
    x = np.random.default_rng(k).uniform(-3, 3, size=(25, 2))
    psi = b.coefficients.T @ eigenfunction_table(b.window, x)
    np.testing.assert_allclose(np.sum(np.abs(psi) ** 2, axis=0), spectral_function(b.window, x), rtol=1e-10)


def test_hermite_sup_norms_match_fine_grid():
    sups = hermite_sup_norms(40)
    x = np.linspace(0, 12, 200001)
    brute = np.abs(hermite_eval_all(40, x)).max(axis=1)
    np.testing.assert_allclose(sups, brute, rtol=1e-8)
    assert sups[0] == pytest.approx(math.pi**-0.25)


def test_ground_state_sup_both_modes():
    for basis in (tensor_basis(2, 0), random_eigenbasis(2, 0, 1)):
        assert basis_sup_norms(basis)[0] == pytest.approx(math.pi**-0.5, rel=1e-10)
    rep = supnorm_profile(2, [0, 1, 2, 3], [0], mode="tensor")
    assert rep.series("ratio_max")[0]["statistic"] == pytest.approx(normalized_ratio(math.pi**-0.5, 2, 0))


def test_tensor_extreme_column():
    # (k, 0) column: ||h_k||_inf pi^{-1/4}, decaying slower than k^{-1/2}
    ks = [8, 16, 32, 64, 128]
    sups = hermite_sup_norms(128)
    vals = [sups[k] * math.pi**-0.25 for k in ks]
    for k in (8, 16):
        assert basis_sup_norms(tensor_basis(2, k)).max() == pytest.approx(vals[ks.index(k)], rel=2e-2)
    slope = np.polyfit(np.log(ks), np.log(vals), 1)[0]
    assert -0.5 < slope < 0


def test_profiles_small_sweep():
    ks = [4, 8, 16]
    haar = supnorm_profile(2, ks, range(3), mode="haar", base_seed=1)
    tensor = supnorm_profile(2, ks, [0], mode="tensor")
    assert haar.checks["bounded_spread_below_4"]
    assert tensor.checks["strictly_increasing"]
    assert haar.config_hash and tensor.version


def test_profile_independent_of_jobs():
    a = supnorm_profile(2, [4, 6], range(2), mode="haar", jobs=1)
    b = supnorm_profile(2, [4, 6], range(2), mode="haar", jobs=2)
    assert a.numeric_fingerprint() == b.numeric_fingerprint()
