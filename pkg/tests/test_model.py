import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifpkit import (
    ExogenousProcess,
    FiniteChain,
    ModelSpec,
    UtilitySpec,
    gauss_hermite_normal,
    stationary_mean_return,
)


class TestUtility:
    def test_u_prime_examples(self):
        assert UtilitySpec.crra(2.0).u_prime(2.0) == pytest.approx(0.25)
        assert UtilitySpec.log().u_prime(1.0) == pytest.approx(1.0)
        # 4^(-1.5) by independent arithmetic: 1 / (4 * sqrt(4)) = 1/8
        assert UtilitySpec.crra(1.5).u_prime(4.0) == pytest.approx(1.0 / 8.0, rel=1e-14)

    def test_u_prime_inv_examples(self):
        assert UtilitySpec.crra(2.0).u_prime_inv(0.25) == pytest.approx(2.0)
        assert UtilitySpec.log().u_prime_inv(1.0) == pytest.approx(1.0)
        # solve c^(-0.5) = 0.1  =>  c = 100
        assert UtilitySpec.crra(0.5).u_prime_inv(0.1) == pytest.approx(100.0, rel=1e-12)

    def test_domain_errors(self):
        u = UtilitySpec.crra(2.0)
        with pytest.raises(ValueError):
            u.u_prime(0.0)
        with pytest.raises(ValueError):
            u.u_prime(-1.0)
        with pytest.raises(ValueError):
            u.u_prime_inv(0.0)
        with pytest.raises(ValueError):
            UtilitySpec.crra(-1.0)
        with pytest.raises(ValueError):
            UtilitySpec("quadratic", 2.0)

    @given(
        gamma=st.floats(0.25, 8.0),
        c=st.floats(1e-8, 1e8),
    )
    @settings(max_examples=200, deadline=None)
    def test_inverse_round_trip(self, gamma, c):
        u = UtilitySpec.crra(gamma)
        assert u.u_prime_inv(u.u_prime(c)) == pytest.approx(c, rel=1e-12)

    def test_monotone_and_concave(self):
        u = UtilitySpec.crra(2.0)
        grid = np.geomspace(1e-6, 1e6, 100)
        assert np.all(np.diff(u.u(grid)) > 0)
        assert np.all(np.diff(u.u_prime(grid)) < 0)

    def test_inada_limits(self):
        u = UtilitySpec.log()
        assert u.u_prime(1e-12) > 1e6
        assert u.u_prime(1e12) < 1e-6

    def test_log_is_gamma_one(self):
        assert UtilitySpec.log().gamma == 1.0
        assert UtilitySpec("log", 3.0).gamma == 1.0


class TestFiniteChain:
    def test_validation(self):
        with pytest.raises(ValueError):
            FiniteChain(np.array([0.0, 1.0]), np.array([[0.5, 0.4], [0.5, 0.5]]))
        with pytest.raises(ValueError):
            FiniteChain(np.array([1.0, 0.0]), np.eye(2))
        with pytest.raises(ValueError):
            FiniteChain(np.array([0.0, 1.0]), np.array([[1.2, -0.2], [0.0, 1.0]]))

    def test_single(self):
        c = FiniteChain.single(0.3)
        assert c.n == 1
        assert c.stationary_mean() == pytest.approx(0.3)

    def test_stationary_two_state(self):
        # analytic stationary law of a 2-state chain: pi = (q, p) / (p + q)
        p, q = 0.3, 0.1
        chain = FiniteChain(np.array([0.0, 1.0]), np.array([[1 - p, p], [q, 1 - q]]))
        pi = chain.stationary
        assert pi == pytest.approx(np.array([q, p]) / (p + q), abs=1e-12)

    def test_stationary_periodic(self):
        chain = FiniteChain(np.array([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert chain.stationary == pytest.approx([0.5, 0.5], abs=1e-12)


def _toy_process(K=2, M=1, N=2, eta_std=0.0, mode="stochastic"):
    chi = FiniteChain(np.array([-0.5, 0.5]), np.array([[0.9, 0.1], [0.2, 0.8]]))
    if K == 1:
        chi = FiniteChain.single(0.0)
    mu = FiniteChain.single(0.02) if M == 1 else FiniteChain(
        np.array([0.0, 0.04]), np.array([[0.7, 0.3], [0.3, 0.7]])
    )
    sigma = FiniteChain.single(0.1) if N == 1 else FiniteChain(
        np.array([0.05, 0.2]), np.array([[0.6, 0.4], [0.5, 0.5]])
    )
    const = np.exp(0.02) if mode == "constant" else None
    return ExogenousProcess(chi, mu, sigma, eta_std=eta_std, return_mode=mode, constant_R=const)


class TestExogenousProcess:
    def test_composite_ordering(self):
        proc = _toy_process(K=2, M=1, N=2)
        triples, index = proc.composite_states()
        assert len(triples) == 4
        # chi slowest, sigma fastest
        np.testing.assert_allclose(triples[:, 0], [-0.5, -0.5, 0.5, 0.5])
        np.testing.assert_allclose(triples[:, 2], [0.05, 0.2, 0.05, 0.2])
        assert index[(0, 0, 1)] == 1
        assert index[(1, 0, 0)] == 2

    def test_single_triple(self):
        proc = _toy_process(K=1, M=1, N=1)
        triples, _ = proc.composite_states()
        assert triples.shape == (1, 3)

    def test_calibrated_count(self):
        # 5 x 5 x 5 chains give 125 composite states
        from ifpkit.config import default_config, build_model, with_variant

        model = build_model(with_variant(default_config().model, "full"))
        assert model.n_states == 125

    def test_kronecker_kernel(self):
        proc = _toy_process(K=2, M=2, N=2)
        P = proc.P
        assert P.shape == (8, 8)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-10)
        # P[(a,b,c),(d,e,f)] = chi[a,d] * mu[b,e] * sigma[c,f]
        _, index = proc.composite_states()
        for (i, j, k), s in index.items():
            for (d, e, f), t in index.items():
                expected = proc.chi.Pi[i, d] * proc.mu.Pi[j, e] * proc.sigma.Pi[k, f]
                assert P[s, t] == pytest.approx(expected, abs=1e-15)

    def test_composite_override(self):
        proc = _toy_process(K=2, M=1, N=2)
        override = np.full((4, 4), 0.25)
        proc2 = ExogenousProcess(
            proc.chi, proc.mu, proc.sigma, composite_Pi=override
        )
        np.testing.assert_allclose(proc2.P, override)
        with pytest.raises(ValueError):
            ExogenousProcess(proc.chi, proc.mu, proc.sigma, composite_Pi=np.eye(3))

    def test_sigma_nonnegative(self):
        with pytest.raises(ValueError):
            _toy = ExogenousProcess(
                FiniteChain.single(0.0),
                FiniteChain.single(0.0),
                FiniteChain.single(-0.1),
            )

    def test_eta_std_guard(self):
        with pytest.raises(ValueError):
            ExogenousProcess(
                FiniteChain.single(0.0),
                FiniteChain.single(0.0),
                FiniteChain.single(0.1),
                eta_std=np.inf,
            )

    def test_constant_needs_R(self):
        with pytest.raises(ValueError):
            ExogenousProcess(
                FiniteChain.single(0.0),
                FiniteChain.single(0.0),
                FiniteChain.single(0.1),
                return_mode="constant",
            )


class TestRYNodes:
    def test_degenerate_single_node(self):
        proc = ExogenousProcess(
            FiniteChain.single(0.3),
            FiniteChain.single(0.02),
            FiniteChain.single(0.0),
            eta_std=0.0,
        )
        nodes = proc.conditional_RY_nodes(0, 21)
        assert nodes.weights.shape == (1,)
        assert nodes.weights[0] == pytest.approx(1.0)
        assert nodes.R[0] == pytest.approx(np.exp(0.02))
        assert nodes.Y[0] == pytest.approx(np.exp(0.3))

    def test_one_node_rule_is_midpoint(self):
        proc = _toy_process(eta_std=0.2)
        nodes = proc.conditional_RY_nodes(1, 1)
        # GH-1 abscissa is zero, so R = e^mu and Y = e^chi
        assert nodes.R[0] == pytest.approx(np.exp(0.02))
        assert nodes.Y[0] == pytest.approx(np.exp(-0.5))

    def test_weights_sum_to_one(self):
        proc = _toy_process(eta_std=0.3)
        for s in range(proc.n_states):
            nodes = proc.conditional_RY_nodes(s, 11)
            assert nodes.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_lognormal_mean_identity(self):
        # E[e^(sigma * zeta)] = e^(sigma^2 / 2) at 21 nodes
        x, w = gauss_hermite_normal(21)
        sigma = 0.2
        approx = w @ np.exp(sigma * x)
        assert approx == pytest.approx(np.exp(sigma**2 / 2), rel=1e-6)

    def test_quadrature_consistency_band(self):
        x, w = gauss_hermite_normal(21)
        for s_sig in (0.1, 0.5, 1.0, 1.5, 2.0):
            approx = w @ np.exp(s_sig * x)
            assert approx == pytest.approx(np.exp(s_sig**2 / 2), rel=1e-6)

    def test_bad_state_index(self):
        proc = _toy_process()
        with pytest.raises(IndexError):
            proc.conditional_RY_nodes(99, 5)

    def test_constant_mode_single_R(self):
        proc = _toy_process(mode="constant", eta_std=0.1)
        nodes = proc.conditional_RY_nodes(0, 7)
        assert np.unique(nodes.R).size == 1
        assert nodes.R[0] == pytest.approx(np.exp(0.02))


class TestModelSpec:
    def test_beta_domain(self):
        proc = _toy_process()
        with pytest.raises(ValueError):
            ModelSpec(beta=1.0, utility=UtilitySpec.log(), process=proc)
        with pytest.raises(ValueError):
            ModelSpec(beta=-0.1, utility=UtilitySpec.log(), process=proc)
        ModelSpec(beta=0.0, utility=UtilitySpec.log(), process=proc)

    def test_fingerprint_changes_with_model(self):
        proc = _toy_process()
        m1 = ModelSpec(beta=0.95, utility=UtilitySpec.crra(2.0), process=proc)
        m2 = ModelSpec(beta=0.96, utility=UtilitySpec.crra(2.0), process=proc)
        assert m1.fingerprint() != m2.fingerprint()
        assert m1.fingerprint() == ModelSpec(0.95, UtilitySpec.crra(2.0), proc).fingerprint()


def test_stationary_mean_return_collapsed():
    mu = FiniteChain.single(0.0281)
    sigma = FiniteChain.single(0.0393)
    expected = np.exp(0.0281) * np.exp(0.0393**2 / 2)
    assert stationary_mean_return(mu, sigma) == pytest.approx(expected, rel=1e-14)
