"""Tests for the path simulation engine."""

import json
import math

import numpy as np
import pytest

from roughvol.gaussfunc import BoundedSigmoid
from roughvol.kernel import CovarianceEval, KernelEval, cov_RL
from roughvol.simulate import (
    ModelParams,
    PathBundle,
    SimGrid,
    concat_bundles,
    dump_paths,
    exact_gaussian_check,
    simulate_paths,
    simulate_paths_RL,
    _exact_joint_cov,
    _scheme_joint_cov,
    _scheme_weights,
)

EPS = 0.05
HURST = 0.3
VF = BoundedSigmoid(0.05, 0.45, 2.5)
KE = KernelEval(HURST)
CE = CovarianceEval(HURST)
SO2 = KE.sigma_ou**2


def make_model(**kw):
    base = dict(hurst=HURST, eps=EPS, rho=-0.5, vol_fn=VF, x0=1.0,
                maturity_T=0.3)
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture(scope="module")
def main_run():
    mp = make_model()
    grid = SimGrid.for_model(mp, points_per_eps=8, warmup_mult=30.0)
    bundle = concat_bundles(simulate_paths(mp, grid, 6000, seed=2024))
    return mp, grid, bundle


def se_mean(x):
    return x.std(ddof=1) / math.sqrt(len(x))


# -- parameter validation -----------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [
        dict(eps=0.0),
        dict(eps=-1.0),
        dict(rho=1.5),
        dict(rho=-1.0001),
        dict(x0=0.0),
        dict(maturity_T=0.0),
        dict(hurst=0.5),
        dict(hurst=0.0),
    ],
)
def test_model_params_validation(kw):
    with pytest.raises(ValueError):
        make_model(**kw)


def test_model_params_vol_fn_type():
    with pytest.raises(ValueError, match="vol_fn"):
        make_model(vol_fn=lambda z: z)


@pytest.mark.parametrize(
    "args",
    [
        (0, 0.01, 1.0, "TruncatedMovingAverage"),
        (10, 0.0, 1.0, "TruncatedMovingAverage"),
        (10, 0.01, -1.0, "TruncatedMovingAverage"),
        (10, 0.01, 1.0, "Euler"),
    ],
)
def test_sim_grid_validation(args):
    with pytest.raises(ValueError):
        SimGrid(*args)


def test_for_model_satisfies_invariants():
    mp = make_model()
    grid = SimGrid.for_model(mp)
    assert grid.dt <= mp.eps / 4.0
    assert grid.warmup_horizon >= 20.0 * mp.eps
    assert abs(grid.n_steps * grid.dt - mp.maturity_T) < 1e-12
    with pytest.raises(ValueError):
        SimGrid.for_model(mp, points_per_eps=2)
    with pytest.raises(ValueError):
        SimGrid.for_model(mp, warmup_mult=10.0)


def test_coarse_dt_is_an_error_not_a_warning():
    mp = make_model()
    grid = SimGrid(10, mp.maturity_T / 10, 30 * EPS)  # dt = 0.03 > eps/4
    with pytest.raises(ValueError, match="eps/4"):
        next(simulate_paths(mp, grid, 4, seed=0))


def test_short_warmup_is_an_error():
    mp = make_model()
    grid = SimGrid(48, mp.maturity_T / 48, 10 * EPS)
    with pytest.raises(ValueError, match="warmup"):
        next(simulate_paths(mp, grid, 4, seed=0))


def test_grid_maturity_mismatch_is_an_error():
    mp = make_model()
    grid = SimGrid(48, 0.9 * mp.maturity_T / 48, 30 * EPS)
    with pytest.raises(ValueError, match="maturity"):
        next(simulate_paths(mp, grid, 4, seed=0))


def test_bad_n_paths():
    mp = make_model()
    grid = SimGrid.for_model(mp)
    with pytest.raises(ValueError, match="n_paths"):
        next(simulate_paths(mp, grid, 0, seed=0))
    with pytest.raises(ValueError, match="even"):
        next(simulate_paths(mp, grid, 5, seed=0, antithetic=True))


def test_dt_at_boundary_is_accepted():
    mp = make_model(maturity_T=EPS / 4.0 * 8)
    grid = SimGrid(8, EPS / 4.0, 30 * EPS)
    bundle = next(simulate_paths(mp, grid, 2, seed=1))
    assert bundle.X.shape == (2, 9)


# -- structural path properties ----------------------------------------------


def test_bundle_shapes_and_times(main_run):
    mp, grid, b = main_run
    n = grid.n_steps
    assert b.times.shape == (n + 1,)
    np.testing.assert_allclose(b.times, np.arange(n + 1) * grid.dt, rtol=0, atol=0)
    assert b.dW.shape == b.dB.shape == (6000, n)
    assert b.Z.shape == b.sigma.shape == b.X.shape == (6000, n + 1)
    assert b.seed == 2024


def test_sigma_is_vol_fn_of_Z_exactly(main_run):
    _, _, b = main_run
    assert np.array_equal(b.sigma, VF(b.Z))


def test_price_positive_and_started_at_x0(main_run):
    mp, _, b = main_run
    assert np.all(b.X > 0.0)
    assert np.all(b.X[:, 0] == mp.x0)


def test_same_seed_bit_identical(main_run):
    mp, grid, b = main_run
    again = concat_bundles(simulate_paths(mp, grid, 6000, seed=2024))
    for name in ("dW", "dB", "Z", "sigma", "X"):
        assert np.array_equal(getattr(b, name), getattr(again, name))


def test_path_prefix_independent_of_n_paths(main_run):
    mp, grid, b = main_run
    head = concat_bundles(simulate_paths(mp, grid, 1500, seed=2024))
    assert np.array_equal(head.X, b.X[:1500])
    assert np.array_equal(head.Z, b.Z[:1500])


def test_different_seeds_differ(main_run):
    mp, grid, b = main_run
    other = next(simulate_paths(mp, grid, 8, seed=2025))
    assert not np.array_equal(other.Z, b.Z[:8])


def test_antithetic_rows_are_negated_draws():
    mp = make_model()
    grid = SimGrid.for_model(mp)
    b = concat_bundles(simulate_paths(mp, grid, 600, seed=5, antithetic=True))
    assert np.array_equal(b.Z[0::2], -b.Z[1::2])
    assert np.array_equal(b.dW[0::2], -b.dW[1::2])
    assert np.array_equal(b.dB[0::2], -b.dB[1::2])


def test_stream_batches_cover_request():
    mp = make_model(maturity_T=0.1)
    grid = SimGrid.for_model(mp)
    sizes = [bd.X.shape[0] for bd in simulate_paths(mp, grid, 5000, seed=3)]
    assert sum(sizes) == 5000
    assert all(s <= 4096 for s in sizes)


def test_concat_bundles_empty():
    with pytest.raises(ValueError, match="empty"):
        concat_bundles(iter(()))


# -- law checks (fixed seeds; 3-SE statistical tolerances) ---------------------


def test_increment_scale_and_leverage_correlation(main_run):
    mp, grid, b = main_run
    vw = b.dW.var(ddof=1, axis=0)
    vb = b.dB.var(ddof=1, axis=0)
    se_v = grid.dt * math.sqrt(2.0 / (b.dW.shape[0] - 1))
    assert np.max(np.abs(vw - grid.dt)) < 4 * se_v
    assert np.max(np.abs(vb - grid.dt)) < 4 * se_v
    dwstar = mp.rho * b.dW + math.sqrt(1 - mp.rho**2) * b.dB
    c = np.corrcoef(b.dW[:, 10], dwstar[:, 10])[0, 1]
    assert abs(c - mp.rho) < 3.0 / math.sqrt(b.dW.shape[0])


def test_factor_variance_matches_stationary_value(main_run):
    _, grid, b = main_run
    n_paths = b.Z.shape[0]
    se_var = SO2 * math.sqrt(2.0 / (n_paths - 1))
    for i in (0, grid.n_steps // 2, grid.n_steps):
        v = b.Z[:, i].var(ddof=1)
        assert abs(v - SO2) < 3 * se_var


def test_factor_autocovariance_matches_cz(main_run):
    mp, grid, b = main_run
    steps_per_eps = round(mp.eps / grid.dt)
    i0 = steps_per_eps
    for lag_eps in (1.0, 5.0):
        lag = round(lag_eps * steps_per_eps)
        prod = b.Z[:, i0] * b.Z[:, i0 + lag]
        target = SO2 * float(CE.cov_CZ(lag_eps))
        assert abs(prod.mean() - target) < 3 * se_mean(prod)


def test_price_is_a_martingale(main_run):
    mp, _, b = main_run
    xt = b.X[:, -1]
    assert abs(xt.mean() - mp.x0) < 3 * se_mean(xt)


def test_observed_leverage_sign(main_run):
    _, _, b = main_run
    c = np.corrcoef(b.dW[:, 20], b.Z[:, 21])[0, 1]
    assert c > 0.5  # nearest-cell kernel mass dominates and is positive


def test_warmup_doubling_variance_shift_below_one_se():
    # the scheme's Var(Z_0) is available in closed form; doubling the warmup
    # must move it by less than one standard error of a 5e4-path estimate
    mp = make_model()
    g1 = SimGrid.for_model(mp, warmup_mult=30.0)
    g2 = SimGrid.for_model(mp, warmup_mult=60.0)

    def var0(grid):
        sw = _scheme_weights(mp, grid)
        m = sw.kappa * sw.n_w
        return sw.sig_ou**2 * (
            float(np.dot(sw.w_conv[:m], sw.w_conv[:m]))
            + sw.r_std**2 + sw.eta_std[0] ** 2
        )

    one_se = SO2 * math.sqrt(2.0 / 5e4)
    assert abs(var0(g1) - var0(g2)) < one_se


def test_variance_stationary_across_grid(main_run):
    # drift of the sampled variance along the grid stays within noise
    _, grid, b = main_run
    v = b.Z.var(ddof=1, axis=0)
    se_var = SO2 * math.sqrt(2.0 / (b.Z.shape[0] - 1))
    assert np.max(np.abs(v - SO2)) < 4 * se_var


# -- scheme-vs-exact covariance -----------------------------------------------


@pytest.mark.parametrize("hurst", [0.3, 0.1])
def test_exact_gaussian_check_discrepancy(hurst):
    mp = make_model(hurst=hurst, maturity_T=0.25)
    grid = SimGrid.for_model(mp, points_per_eps=8, warmup_mult=30.0)
    rep = exact_gaussian_check(mp, grid)
    assert rep.max_abs_corr_diff < 5e-3
    assert abs(rep.zero_offset_value - KernelEval(hurst).sigma_ou**2) < 1e-6
    assert rep.jitter <= 1e-10


def test_exact_gaussian_check_size_limit():
    mp = make_model(eps=0.5, maturity_T=600 * 0.1)
    grid = SimGrid(600, 0.1, 30 * 0.5)
    with pytest.raises(ValueError, match="512"):
        exact_gaussian_check(mp, grid)


def test_cross_covariance_sign_follows_cell_mass():
    # with enough lags the kernel cell integrals change sign; the scheme's
    # Cov(Z_i, dW_j) must flip sign with them
    mp = make_model(maturity_T=24 * EPS / 8.0)
    grid = SimGrid(24, EPS / 8.0, 30 * EPS)
    cov = _scheme_joint_cov(mp, grid)
    n = grid.n_steps
    masses = KE.cell_masses(grid.dt / mp.eps, n)
    assert masses[0] > 0.0 and masses[-1] < 0.0
    for j in range(n):
        entry = cov[n, n + 1 + j]  # Cov(Z_n, dW_j), cell index n-1-j
        assert np.sign(entry) == np.sign(masses[n - 1 - j])


def test_exact_joint_cov_zero_lag_and_symmetry():
    mp = make_model(maturity_T=0.1)
    grid = SimGrid.for_model(mp)
    cov = _exact_joint_cov(mp, grid)
    assert np.allclose(cov, cov.T, rtol=0, atol=0)
    assert abs(cov[0, 0] - SO2) < 1e-9


# -- exact joint sampler -------------------------------------------------------


def test_cholesky_exact_scheme_law():
    mp = make_model(maturity_T=0.25)
    grid = SimGrid(40, 0.25 / 40, 0.0, scheme="CholeskyExact")
    b = concat_bundles(simulate_paths(mp, grid, 8000, seed=17))
    se_var = SO2 * math.sqrt(2.0 / (8000 - 1))
    v = b.Z.var(ddof=1, axis=0)
    assert np.max(np.abs(v - SO2)) < 4 * se_var
    assert np.all(b.X > 0) and np.all(b.X[:, 0] == mp.x0)
    assert np.array_equal(b.sigma, VF(b.Z))
    # cross-correlation of the factor with the previous increment is exact
    delta = grid.dt / mp.eps
    m0 = KE.integrated_K(delta)
    target = (math.sqrt(mp.eps) * m0 * KE.sigma_ou
              / (math.sqrt(grid.dt) * math.sqrt(SO2)))
    c = np.corrcoef(b.dW[:, 5], b.Z[:, 6])[0, 1]
    assert abs(c - target) < 3.0 / math.sqrt(8000)


def test_cholesky_exact_size_limit():
    mp = make_model(maturity_T=600 * EPS / 8)
    grid = SimGrid(600, EPS / 8, 0.0, scheme="CholeskyExact")
    with pytest.raises(ValueError, match="512"):
        next(simulate_paths(mp, grid, 2, seed=0))


# -- zero-started (Riemann--Liouville) variant ---------------------------------


def test_rl_starts_exactly_at_z0():
    mp = make_model(maturity_T=0.2)
    grid = SimGrid.for_model(mp)
    b = next(simulate_paths_RL(mp, grid, z0=0.7, n_paths=16, seed=9))
    assert np.all(b.Z[:, 0] == 0.7)


def test_rl_variance_matches_quadrature_oracle():
    mp = make_model(maturity_T=0.3)
    grid = SimGrid.for_model(mp)
    b = concat_bundles(simulate_paths_RL(mp, grid, 0.0, 8000, seed=31))
    for t_over_eps in (2.0, 6.0):
        i = round(t_over_eps * mp.eps / grid.dt)
        target = SO2 * cov_RL(t_over_eps, 0.0, KE)
        v = b.Z[:, i].var(ddof=1)
        se_var = target * math.sqrt(2.0 / (8000 - 1))
        assert abs(v - target) < 3 * se_var


def test_rl_relaxes_to_stationary_autocovariance():
    mp = make_model(maturity_T=0.3)
    grid = SimGrid.for_model(mp)
    b = concat_bundles(simulate_paths_RL(mp, grid, 0.0, 8000, seed=32))
    steps_per_eps = round(mp.eps / grid.dt)
    i0 = 4 * steps_per_eps  # t = 4 eps >> eps
    prod = b.Z[:, i0] * b.Z[:, i0 + steps_per_eps]
    target = SO2 * float(CE.cov_CZ(1.0))
    assert abs(prod.mean() - target) < 3 * se_mean(prod)


def test_rl_validation():
    mp = make_model()
    grid = SimGrid.for_model(mp)
    with pytest.raises(ValueError, match="finite"):
        next(simulate_paths_RL(mp, grid, math.nan, 4, seed=0))
    with pytest.raises(ValueError, match="n_paths"):
        next(simulate_paths_RL(mp, grid, 0.0, -1, seed=0))
    ce_grid = SimGrid(40, 0.25 / 40, 0.0, scheme="CholeskyExact")
    with pytest.raises(ValueError, match="TruncatedMovingAverage"):
        next(simulate_paths_RL(make_model(maturity_T=0.25), ce_grid, 0.0, 4, seed=0))


def test_rl_reproducible():
    mp = make_model(maturity_T=0.2)
    grid = SimGrid.for_model(mp)
    a = next(simulate_paths_RL(mp, grid, 0.3, 64, seed=4))
    b = next(simulate_paths_RL(mp, grid, 0.3, 64, seed=4))
    assert np.array_equal(a.Z, b.Z) and np.array_equal(a.X, b.X)


# -- path dumps ----------------------------------------------------------------


def test_dump_paths_roundtrip(tmp_path):
    mp = make_model(maturity_T=0.1)
    grid = SimGrid.for_model(mp)
    bundle = next(simulate_paths(mp, grid, 3, seed=12))
    files = dump_paths(mp, grid, bundle, str(tmp_path), header_lines=["config_hash = abc123"])
    csvs = [f for f in files if f.endswith(".csv")]
    assert len(csvs) == 3
    data = np.genfromtxt(csvs[1], delimiter=",", names=True, skip_header=2)
    np.testing.assert_array_equal(data["time"], bundle.times)
    np.testing.assert_array_equal(data["Z"], bundle.Z[1])
    np.testing.assert_array_equal(data["X"], bundle.X[1])
    with open(csvs[0]) as fh:
        head = fh.readline()
    assert head.startswith("# config_hash = abc123")
    with open(files[-1]) as fh:
        meta = json.load(fh)
    assert meta["seed"] == 12
    assert meta["model"]["eps"] == mp.eps
    assert meta["grid"]["n_steps"] == grid.n_steps
