import numpy as np
import pytest
from scipy import stats

from txdiff.model import (
    DeadAliveSets,
    InvalidStateError,
    PriorConfig,
    dead_alive_sets,
    enumerate_states,
    extract_free_params,
    forward_prior_p_ee,
    map_free_to_expression,
    pi_posterior_params,
    sample_prior,
    sample_state,
    state_prior_logprob,
    stationary_prior_p_de,
    validate_state,
)


class TestDeadAliveSets:
    def test_worked_example(self):
        # indices are 0-based; this is the six-transcript pattern (1,0,0,1,0,1)
        sets = dead_alive_sets([1, 0, 0, 1, 0, 1])
        assert sets.dead.tolist() == [1, 2, 4]
        assert sets.alive.tolist() == [0, 3, 5]
        assert sets.tau.tolist() == [1, 2, 4, 0, 3, 5]
        assert sets.tau_inv.tolist() == [3, 0, 1, 4, 2, 5]

    def test_all_dead(self):
        sets = dead_alive_sets([0, 0, 0])
        assert sets.tau.tolist() == [0, 1, 2]
        assert sets.alive.size == 0

    def test_all_alive(self):
        sets = dead_alive_sets([1, 1])
        assert sets.tau.tolist() == [0, 1]
        assert sets.dead.size == 0

    def test_rejects_single_flag(self):
        with pytest.raises(InvalidStateError):
            dead_alive_sets([0, 1, 0])

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            validate_state([0, 2, 0])

    def test_tau_inverse_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            k = rng.integers(2, 12)
            c = sample_state(k, 0.4, rng)
            sets = dead_alive_sets(c)
            assert (sets.tau[sets.tau_inv] == np.arange(k)).all()
            assert (sets.tau_inv[sets.tau] == np.arange(k)).all()


class TestExpressionMap:
    def test_worked_example(self):
        u = np.array([0.05, 0.10, 0.15, 0.20, 0.23, 0.27])
        v = np.array([0.5, 0.3, 0.2])
        sets = dead_alive_sets([1, 0, 0, 1, 0, 1])
        theta, w = map_free_to_expression(sets, u, v)
        s = u[3] + u[4] + u[5]
        assert theta.tolist() == [u[3], u[0], u[1], u[4], u[2], u[5]]
        np.testing.assert_allclose(
            w, [v[0] * s, u[0], u[1], v[1] * s, u[2], v[2] * s], rtol=0, atol=0
        )
        # shared transcripts agree bitwise
        assert all(theta[i] == w[i] for i in (1, 2, 4))

    def test_all_dead_identity(self):
        u = np.array([0.4, 0.35, 0.25])
        sets = dead_alive_sets([0, 0, 0])
        theta, w = map_free_to_expression(sets, u, np.empty(0))
        assert (theta == u).all() and (w == u).all()

    def test_all_alive(self):
        sets = dead_alive_sets([1, 1])
        theta, w = map_free_to_expression(sets, [0.3, 0.7], [0.6, 0.4])
        np.testing.assert_allclose(theta, [0.3, 0.7])
        np.testing.assert_allclose(w, [0.6, 0.4])

    def test_dimension_mismatch(self):
        sets = dead_alive_sets([1, 1, 0])
        with pytest.raises(ValueError):
            map_free_to_expression(sets, [0.5, 0.3, 0.2], [1.0])

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            k = rng.integers(2, 10)
            c = sample_state(k, 0.5, rng)
            sets = dead_alive_sets(c)
            u = rng.dirichlet(np.ones(k))
            v = rng.dirichlet(np.ones(sets.n_alive)) if sets.n_alive else np.empty(0)
            theta, w = map_free_to_expression(sets, u, v)
            u2, v2 = extract_free_params(sets, theta, w)
            assert (u2 == u).all()
            np.testing.assert_allclose(v2, v, rtol=1e-15, atol=0)


class TestStatePrior:
    def test_k3_uniform_over_valid_states(self):
        probs = [np.exp(state_prior_logprob(c, 0.5)) for c in enumerate_states(3)]
        assert len(probs) == 5
        np.testing.assert_allclose(probs, 0.2, rtol=1e-12)
        np.testing.assert_allclose(sum(probs), 1.0, atol=1e-12)

    def test_k2_symmetric(self):
        np.testing.assert_allclose(np.exp(state_prior_logprob([0, 0], 0.5)), 0.5)
        np.testing.assert_allclose(np.exp(state_prior_logprob([1, 1], 0.5)), 0.5)

    def test_small_pi_limit(self):
        assert np.exp(state_prior_logprob(np.zeros(8, dtype=int), 1e-9)) > 1 - 1e-6

    def test_normalizes_exhaustively(self):
        rng = np.random.default_rng(5)
        for k in range(2, 13):
            pi = rng.uniform(0.05, 0.95)
            tot = sum(np.exp(state_prior_logprob(c, pi)) for c in enumerate_states(k))
            np.testing.assert_allclose(tot, 1.0, atol=1e-12)

    def test_rejects_single_flag(self):
        with pytest.raises(InvalidStateError):
            state_prior_logprob([0, 1, 0], 0.5)


class TestPiPosterior:
    def test_values(self):
        assert pi_posterior_params(3, 6) == (3.5, 3.5)
        assert pi_posterior_params(0, 10) == (0.5, 10.5)
        assert pi_posterior_params(4, 4) == (4.5, 0.5)

    def test_rejects_one(self):
        with pytest.raises(InvalidStateError):
            pi_posterior_params(1, 5)


class TestPriorDraws:
    def test_marginal_abundance_is_flat(self):
        # symmetric hyperparameters make each component Beta(1, K-1) marginally
        rng = np.random.default_rng(11)
        prior = PriorConfig()
        draws = np.array([sample_prior(3, prior, rng)[1] for _ in range(4000)])
        for comp in range(3):
            d = stats.kstest(draws[:, comp], stats.beta(1, 2).cdf).statistic
            assert d < 0.035

    def test_atom_frequency_matches_quadrature(self):
        rng = np.random.default_rng(12)
        prior = PriorConfig()
        hits = 0
        n = 4000
        for _ in range(n):
            _, theta, w = sample_prior(3, prior, rng)
            hits += int(theta[0] == w[0])
        expected = forward_prior_p_ee(3, prior)
        assert abs(hits / n - expected) < 0.03

    def test_forward_p_ee_fixed_pi(self):
        # K=2, fixed pi: valid states are 00 and 11, so
        # P(c_0 = 0) = (1-pi)^2 / ((1-pi)^2 + pi^2)
        for pi in (0.2, 0.5, 0.8):
            expected = (1 - pi) ** 2 / ((1 - pi) ** 2 + pi**2)
            np.testing.assert_allclose(
                forward_prior_p_ee(2, PriorConfig(pi=pi)), expected, atol=1e-12
            )

    def test_stationary_p_de_k2(self):
        # by symmetry of the two valid states the flag marginal is 1/2
        np.testing.assert_allclose(stationary_prior_p_de(2, PriorConfig()), 0.5, atol=1e-12)
        np.testing.assert_allclose(
            stationary_prior_p_de(2, PriorConfig(pi=0.5)), 0.5, atol=1e-12
        )

    def test_prior_config_validation(self):
        with pytest.raises(ValueError):
            PriorConfig(alpha=0.0)
        with pytest.raises(ValueError):
            PriorConfig(pi=1.0)
