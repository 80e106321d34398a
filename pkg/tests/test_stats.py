import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weekahead.exceptions import DataError
from weekahead.stats import (
    PriorStatistics,
    WeeklyEnsemble,
    effective_rank,
    eigenspectrum,
    ensemble_covariance,
    ensemble_mean,
    export_covariance,
    read_matrix,
    sample_covariance,
    spectral_energy,
)
from weekahead.timeseries import MONDAY_LAYOUT, TUESDAY_LAYOUT, WindowLayout


def two_pass_mean(X):
    total = np.zeros(X.shape[1])
    for row in X:
        total += row
    return total / X.shape[0]


def loop_covariance(X):
    n, w = X.shape
    m = two_pass_mean(X)
    C = np.zeros((w, w))
    for k in range(w):
        for l in range(w):
            acc = 0.0
            for i in range(n):
                acc += (X[i, k] - m[k]) * (X[i, l] - m[l])
            C[k, l] = acc / (n - 1)
    return C


def rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


class TestWeeklyEnsemble:
    def test_needs_two_members(self):
        with pytest.raises(DataError):
            WeeklyEnsemble(np.ones((1, 168)), MONDAY_LAYOUT)

    def test_width_must_match_layout(self):
        with pytest.raises(DataError):
            WeeklyEnsemble(np.ones((3, 168)), TUESDAY_LAYOUT)

    def test_rejects_non_finite(self):
        X = np.ones((3, 144))
        X[1, 5] = np.inf
        with pytest.raises(DataError):
            WeeklyEnsemble(X, TUESDAY_LAYOUT)

    def test_blocks(self):
        X = np.arange(3 * 144.0).reshape(3, 144)
        ens = WeeklyEnsemble(X, TUESDAY_LAYOUT)
        assert ens.obs.shape == (3, 24) and ens.fcst.shape == (3, 120)
        assert ens.n_members == 3


class TestEnsembleMean:
    def test_identical_rows(self, rng):
        r = rng.standard_normal(168)
        mo, mf = ensemble_mean(WeeklyEnsemble(np.tile(r, (3, 1)), MONDAY_LAYOUT))
        np.testing.assert_allclose(np.concatenate([mo, mf]), r, rtol=1e-15)

    def test_midpoint(self):
        X = np.vstack([np.zeros(168), 2 * np.ones(168)])
        mo, mf = ensemble_mean(WeeklyEnsemble(X, MONDAY_LAYOUT))
        assert np.all(mo == 1.0) and np.all(mf == 1.0)

    def test_matches_two_pass_oracle(self, rng):
        X = rng.standard_normal((10, 168)) * 1000 + 5000
        mo, mf = ensemble_mean(WeeklyEnsemble(X, MONDAY_LAYOUT))
        assert rel_err(np.concatenate([mo, mf]), two_pass_mean(X)) < 1e-12


class TestEnsembleCovariance:
    def test_constant_ensemble_is_zero(self):
        prior = ensemble_covariance(WeeklyEnsemble(np.full((4, 144), 7.0), TUESDAY_LAYOUT))
        for block in (prior.K_oo, prior.K_of, prior.K_ff):
            assert np.all(block == 0.0)

    def test_two_point_variance(self):
        lay = WindowLayout(1, 1, 2, 2)
        prior = ensemble_covariance(WeeklyEnsemble([[1.0, 0.0], [3.0, 0.0]], lay))
        assert prior.K_oo.tolist() == [[2.0]]

    def test_matches_double_loop(self, rng):
        lay = WindowLayout(1, 20, 21, 60)
        X = rng.standard_normal((10, 60))
        prior = ensemble_covariance(WeeklyEnsemble(X, lay))
        assert rel_err(prior.joint_covariance(), loop_covariance(X)) < 1e-10

    def test_block_orientation(self, rng):
        X = rng.standard_normal((5, 168))
        prior = ensemble_covariance(WeeklyEnsemble(X, MONDAY_LAYOUT))
        assert prior.K_of.shape == (24, 144)
        C = loop_covariance(X[:, [0, 30]])
        assert prior.K_of[0, 30 - 24] == pytest.approx(C[0, 1], rel=1e-12)

    def test_symmetric_psd_and_rank(self, rng):
        X = rng.standard_normal((8, 144))
        prior = ensemble_covariance(WeeklyEnsemble(X, TUESDAY_LAYOUT))
        for block in (prior.K_oo, prior.K_ff):
            np.testing.assert_array_equal(block, block.T)
            eigs = eigenspectrum(block)
            assert eigs.min() >= -1e-9 * np.trace(block)
            assert effective_rank(eigs) <= 7

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 12), st.floats(-1e4, 1e4), st.floats(0.01, 100), st.integers(0, 2**31))
    def test_shift_and_scale(self, n, c, s, seed):
        X = np.random.default_rng(seed).standard_normal((n, 144))
        base = ensemble_covariance(WeeklyEnsemble(X, TUESDAY_LAYOUT))
        shifted = ensemble_covariance(WeeklyEnsemble(X + c, TUESDAY_LAYOUT))
        scaled = ensemble_covariance(WeeklyEnsemble(s * X, TUESDAY_LAYOUT))
        np.testing.assert_allclose(shifted.joint_covariance(), base.joint_covariance(), atol=1e-10 * max(abs(c), 1))
        np.testing.assert_allclose(shifted.joint_mean(), base.joint_mean() + c, atol=1e-10 * max(abs(c), 1))
        np.testing.assert_allclose(scaled.joint_covariance(), s**2 * base.joint_covariance(), rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(scaled.joint_mean(), s * base.joint_mean(), rtol=1e-12, atol=1e-14)

    def test_sample_covariance_agrees_with_numpy(self, rng):
        X = rng.standard_normal((12, 30))
        np.testing.assert_allclose(sample_covariance(X), np.cov(X, rowvar=False), rtol=1e-12)


class TestPriorStatistics:
    def test_shape_checks(self):
        with pytest.raises(DataError):
            PriorStatistics(np.zeros(2), np.zeros(3), np.eye(2), np.zeros((3, 2)), np.eye(3))

    def test_from_joint_round_trip(self, rng):
        A = rng.standard_normal((6, 6))
        C = A @ A.T
        m = rng.standard_normal(6)
        p = PriorStatistics.from_joint(m, C, 2)
        np.testing.assert_array_equal(p.joint_covariance(), C)
        np.testing.assert_array_equal(p.joint_mean(), m)


class TestEigenspectrum:
    def test_identity(self):
        np.testing.assert_allclose(eigenspectrum(np.eye(5)), np.ones(5))

    def test_rank_one(self):
        v = np.array([1.0, 2.0])
        np.testing.assert_allclose(eigenspectrum(np.outer(v, v)), [5.0, 0.0], atol=1e-14)

    def test_descending(self, rng):
        A = rng.standard_normal((10, 10))
        eigs = eigenspectrum(A + A.T)
        assert np.all(np.diff(eigs) <= 0)
        np.testing.assert_allclose(np.sort(eigs), np.linalg.eigvalsh(A + A.T), atol=1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(DataError):
            eigenspectrum(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_genuinely_negative_kept(self):
        eigs = eigenspectrum(np.diag([3.0, -1.0]))
        assert eigs[-1] == -1.0

    def test_rank_bound_144_hour_windows(self, rng):
        X = rng.standard_normal((20, 144)) @ rng.standard_normal((144, 144))
        eigs = eigenspectrum(sample_covariance(X))
        count = int(np.sum(eigs > 1e-9 * eigs.sum()))
        assert count <= 19


class TestSpectralEnergy:
    def test_arithmetic(self):
        assert spectral_energy([4, 3, 2, 1], 2) == pytest.approx(0.7)

    @given(st.lists(st.floats(0, 1e6), min_size=1, max_size=40))
    def test_full_sum_is_one(self, eigs):
        eigs = sorted(eigs, reverse=True)
        assert spectral_energy(eigs, len(eigs)) == pytest.approx(1.0)

    def test_zero_total(self):
        assert spectral_energy([0.0, 0.0], 1) == 1.0

    def test_bad_k(self):
        with pytest.raises(DataError):
            spectral_energy([1.0], 0)


class TestExportCovariance:
    def test_identity_text(self, tmp_path):
        export_covariance(np.eye(2), tmp_path / "c.csv")
        assert (tmp_path / "c.csv").read_text().splitlines() == ["1,0", "0,1"]

    def test_round_trip_bitwise(self, tmp_path, rng):
        A = rng.standard_normal((10, 10))
        C = A + A.T
        export_covariance(C, tmp_path / "c.csv")
        assert read_matrix(tmp_path / "c.csv").tobytes() == C.tobytes()

    def test_empty_path(self):
        with pytest.raises(DataError):
            export_covariance(np.eye(2), "")

    def test_unwritable(self, tmp_path):
        with pytest.raises(DataError):
            export_covariance(np.eye(2), tmp_path / "no" / "c.csv")
