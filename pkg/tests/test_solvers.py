import math

import numpy as np
import pytest

from fpclab import solvers
from fpclab.errors import (
    OutputDimensionMismatch,
    PreconditionUnmet,
    SampleExceedsPopulation,
)
from fpclab.oracle import ROOracle, SSOracle
from fpclab.problems import (
    BinaryDatabase,
    RandomOracle,
    encode_ro,
    encode_ss,
    exact_marginals,
)
from fpclab.solvers import SolverConfig


def make_ss_oracle(rng, ctx, n=30, d=8):
    db = BinaryDatabase.random(n, d, rng)
    return db, SSOracle(encode_ss(db, ctx, rng))


class TestFormulas:
    def test_hoeffding_sample_rows(self):
        # independent recomputation: ceil(ln(2d/p) / (2 alpha^2))
        assert solvers.hoeffding_sample_rows(64, 1 / 3, 1 / 3) == \
            math.ceil(math.log(2 * 64 * 3) / (2 / 9))
        assert solvers.hoeffding_sample_rows(64, 1 / 3, 1 / 3) == 27

    def test_threshold_and_sigma(self):
        d, eps, delta = 32, 1.0, 1e-3
        thr = solvers.gaussian_threshold_n(d, eps, delta)
        assert thr == pytest.approx(
            math.sqrt(200 * 32 * math.log(640) * math.log(1250)), rel=1e-12)
        n = 500
        assert solvers.gaussian_sigma(d, n, eps, delta) == pytest.approx(
            math.sqrt(2 * math.log(1250)) * math.sqrt(32) / 500, rel=1e-12)

    def test_config_validation(self):
        with pytest.raises(PreconditionUnmet):
            SolverConfig(epsilon=0)
        with pytest.raises(PreconditionUnmet):
            SolverConfig(alpha=1.5)


class TestBoxMuller:
    def test_moments(self):
        z = solvers.box_muller(np.random.default_rng(1), 100_000)
        assert abs(float(z.mean())) < 0.02
        assert abs(float(z.std()) - 1.0) < 0.01

    def test_deterministic(self):
        a = solvers.box_muller(np.random.default_rng(7), 11)
        b = solvers.box_muller(np.random.default_rng(7), 11)
        assert np.array_equal(a, b)
        assert a.shape == (11,)


class TestSampler:
    def test_ledger_exact(self, f_fast, rng):
        db, oracle = make_ss_oracle(rng, f_fast, n=30, d=8)
        rep = solvers.subsample_solver(oracle, SolverConfig(sample_rows=5), rng)
        assert rep.queries_used.total == 2 * 8 * 5
        assert len(rep.sampled_rows) == 5

    def test_full_census_is_exact(self, f_fast, rng):
        db, oracle = make_ss_oracle(rng, f_fast, n=12, d=6)
        rep = solvers.subsample_solver(oracle, SolverConfig(sample_rows=12), rng)
        assert np.allclose(rep.output, exact_marginals(db))

    def test_sample_exceeds_population(self, f_fast, rng):
        _, oracle = make_ss_oracle(rng, f_fast, n=4, d=6)
        with pytest.raises(SampleExceedsPopulation):
            solvers.subsample_solver(oracle, SolverConfig(sample_rows=5), rng)

    def test_default_uses_hoeffding_size(self, f_fast, rng):
        db, oracle = make_ss_oracle(rng, f_fast, n=40, d=4)
        cfg = SolverConfig(alpha=1 / 3, p_fail=1 / 3)
        rep = solvers.subsample_solver(oracle, cfg, rng)
        k = solvers.hoeffding_sample_rows(4, 1 / 3, 1 / 3)
        assert len(rep.sampled_rows) == k
        assert rep.queries_used.total == 2 * 4 * k

    def test_unbiasedness(self, f_fast):
        rng = np.random.default_rng(17)
        db = BinaryDatabase.random(25, 6, rng)
        exact = exact_marginals(db)
        acc = np.zeros(6)
        trials = 300
        for _ in range(trials):
            oracle = SSOracle(encode_ss(db, f_fast, rng))
            rep = solvers.subsample_solver(oracle, SolverConfig(sample_rows=5), rng)
            acc += rep.output
        mean = acc / trials
        tol = 3 * np.sqrt(0.25 / (5 * trials)) + 0.02
        assert np.all(np.abs(mean - exact) <= tol)


class TestGaussianSolver:
    def test_precondition(self, f_fast, rng):
        _, oracle = make_ss_oracle(rng, f_fast, n=10, d=8)
        with pytest.raises(PreconditionUnmet):
            solvers.gaussian_dp_solver(oracle, SolverConfig(), rng)
        rep = solvers.gaussian_dp_solver(
            oracle, SolverConfig(allow_below_threshold=True), rng)
        assert rep.noise_sigma is not None

    def test_ledger_and_decode_exact(self, f_fast, rng):
        db, oracle = make_ss_oracle(rng, f_fast, n=10, d=4)
        rep = solvers.gaussian_dp_solver(
            oracle, SolverConfig(allow_below_threshold=True), rng)
        assert rep.queries_used.total == 2 * 10 * 4
        assert np.array_equal(rep.decoded, db.rows)

    def test_vanishing_noise_limit(self, f_fast, rng):
        db, oracle = make_ss_oracle(rng, f_fast, n=20, d=4)
        cfg = SolverConfig(epsilon=1e9, allow_below_threshold=True)
        rep = solvers.gaussian_dp_solver(oracle, cfg, rng)
        assert np.max(np.abs(rep.output - exact_marginals(db))) < 1e-6

    def test_pre_noise_equals_exact_marginals(self, f_fast, rng):
        db, oracle = make_ss_oracle(rng, f_fast, n=15, d=4)
        cfg = SolverConfig(allow_below_threshold=True)
        rep = solvers.gaussian_dp_solver(oracle, cfg, rng)
        noise = rep.pre_clamp - exact_marginals(db)
        # pre-clamp output minus the exact marginals is pure noise, so it
        # must match the decoded-table marginals difference exactly
        assert np.allclose(rep.pre_clamp - noise,
                           exact_marginals(BinaryDatabase(rep.decoded)),
                           atol=1e-15)

    def test_noise_calibration(self, f_fast):
        # empirical sd of (output - exact) against the configured sigma
        rng = np.random.default_rng(3)
        db = BinaryDatabase.random(40, 4, rng)
        exact = exact_marginals(db)
        cfg = SolverConfig(allow_below_threshold=True)
        sq = 0.0
        count = 0
        trials = 500
        sigma = None
        for _ in range(trials):
            oracle = SSOracle(encode_ss(db, f_fast, rng))
            rep = solvers.gaussian_dp_solver(oracle, cfg, rng)
            sq += float(np.sum((rep.pre_clamp - exact) ** 2))
            count += 4
            sigma = rep.noise_sigma
        sd = math.sqrt(sq / count)
        assert abs(sd - sigma) / sigma <= 0.05


class TestROSolvers:
    def test_sampler_ro(self, rng):
        db = BinaryDatabase.random(30, 8, rng)
        oracle = ROOracle(encode_ro(db, RandomOracle(8, rng)))
        rep = solvers.subsample_solver_ro(oracle, SolverConfig(sample_rows=30), rng)
        assert np.allclose(rep.output, exact_marginals(db))
        assert rep.queries_used.total == 30 * 8

    def test_gaussian_ro(self, rng):
        db = BinaryDatabase.random(25, 4, rng)
        oracle = ROOracle(encode_ro(db, RandomOracle(4, rng)))
        cfg = SolverConfig(epsilon=1e9, allow_below_threshold=True)
        rep = solvers.gaussian_dp_solver_ro(oracle, cfg, rng)
        assert np.max(np.abs(rep.output - exact_marginals(db))) < 1e-6


class TestCandidateInterface:
    def test_wrapper_transparency(self, f_fast, rng):
        _, oracle = make_ss_oracle(rng, f_fast, n=10, d=6)
        cfg = SolverConfig(sample_rows=4)

        def algo(orc):
            return solvers.subsample_solver(orc, cfg, rng)

        rep = solvers.candidate_interface(algo, oracle)
        assert rep.queries_used.total == 2 * 6 * 4

    def test_do_nothing_algorithm(self, f_fast, rng):
        _, oracle = make_ss_oracle(rng, f_fast, n=5, d=6)
        rep = solvers.candidate_interface(lambda orc: np.full(6, 0.5), oracle)
        assert rep.queries_used.total == 0
        assert np.all(rep.output == 0.5)

    def test_dimension_mismatch(self, f_fast, rng):
        _, oracle = make_ss_oracle(rng, f_fast, n=5, d=6)
        with pytest.raises(OutputDimensionMismatch):
            solvers.candidate_interface(lambda orc: np.zeros(5), oracle)
