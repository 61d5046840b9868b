import numpy as np
import pytest

from ifpkit import (
    ExogenousProcess,
    FiniteChain,
    ModelSpec,
    SpectralRadiusError,
    UtilitySpec,
    assumption_report,
    check_contraction,
    check_drift,
    check_income_moments,
    check_patience,
    spectral_radius,
)
from ifpkit.config import default_config, build_model, with_variant


def _two_by_two_dominant_root(M):
    # hand oracle: roots of lambda^2 - tr * lambda + det = 0
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = tr * tr - 4 * det
    if disc >= 0:
        r1 = (tr + np.sqrt(disc)) / 2
        r2 = (tr - np.sqrt(disc)) / 2
        return max(abs(r1), abs(r2))
    return np.sqrt(det)


class TestSpectralRadius:
    def test_identity(self):
        assert spectral_radius(np.eye(3)) == pytest.approx(1.0, abs=1e-10)

    def test_diagonal(self):
        assert spectral_radius(np.diag([0.5, 2.0])) == pytest.approx(2.0, abs=1e-10)

    def test_zero(self):
        assert spectral_radius(np.zeros((4, 4))) == 0.0

    def test_permutation(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert spectral_radius(M) == pytest.approx(1.0, abs=1e-9)

    def test_two_state_hand_oracle(self):
        Pi = np.array([[0.9, 0.1], [0.1, 0.9]])
        D = np.diag([1.0, 1.1])
        K = Pi @ D
        assert spectral_radius(K) == pytest.approx(_two_by_two_dominant_root(K), abs=1e-9)

    def test_random_two_state_against_hand_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            p, q = rng.uniform(0.05, 0.95, size=2)
            Pi = np.array([[1 - p, p], [q, 1 - q]])
            scale = rng.uniform(0.2, 0.99)  # row-substochastic
            D = np.diag(rng.uniform(0.5, 1.5, size=2))
            K = scale * Pi @ D
            assert spectral_radius(K) == pytest.approx(
                _two_by_two_dominant_root(K), abs=1e-9
            )

    def test_validation(self):
        with pytest.raises(ValueError):
            spectral_radius(np.ones((2, 3)))
        with pytest.raises(ValueError):
            spectral_radius(np.array([[1.0, -0.1], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            spectral_radius(np.array([[np.inf, 0.0], [0.0, 1.0]]))

    def test_nonconvergence_carries_estimate(self):
        M = np.array([[0.9, 0.1], [0.1, 0.9]])
        with pytest.raises(SpectralRadiusError) as info:
            spectral_radius(M, tol=1e-10, max_iter=2)
        assert info.value.estimate > 0


def _scalar_model(beta=0.95, R=1.02, gamma=1.0, Y=1.0, mode="constant"):
    proc = ExogenousProcess(
        chi=FiniteChain.single(np.log(Y)),
        mu=FiniteChain.single(np.log(R)),
        sigma=FiniteChain.single(0.05),
        eta_std=0.0,
        return_mode=mode,
        constant_R=R if mode == "constant" else None,
    )
    utility = UtilitySpec.log() if gamma == 1.0 else UtilitySpec.crra(gamma)
    return ModelSpec(beta=beta, utility=utility, process=proc)


class TestContraction:
    def test_constant_scalar(self):
        r, ok = check_contraction(_scalar_model(beta=0.95, R=1.02))
        assert r == pytest.approx(1.02, abs=1e-10)
        assert ok  # 0.95 * 1.02 = 0.969 < 1

    def test_boundary_strict(self):
        R = 1.06
        model = _scalar_model(beta=0.5, R=R)
        r, _ = check_contraction(model)
        beta = 1.0 / r
        if beta * r < 1.0:
            beta = np.nextafter(beta, 1.0)
        boundary = ModelSpec(beta=beta, utility=model.utility, process=model.process)
        _, ok = check_contraction(boundary)
        assert not ok

    def test_calibrated_model_one_passes(self):
        model = build_model(default_config().model)
        r, ok = check_contraction(model)
        assert ok
        assert 0.95 * r < 1.0

    def test_separable_composite_consistency(self):
        # r(K) on the Kronecker composite equals the product of component radii
        from ifpkit.assumptions import _expected_return_matrix
        from ifpkit.coleman import _pack_for

        model = build_model(default_config().model)
        proc = model.process
        K = _expected_return_matrix(model)
        r_composite = spectral_radius(K)
        from ifpkit.assumptions import _conditional_return_moment

        D_mu = _conditional_return_moment(proc.mu, 1.0, "drift", model.quad_nodes)
        D_sig = _conditional_return_moment(proc.sigma, 1.0, "vol", model.quad_nodes)
        r_mu = spectral_radius(proc.mu.Pi * D_mu[None, :])
        r_sig = spectral_radius(proc.sigma.Pi * D_sig[None, :])
        assert r_composite == pytest.approx(r_mu * r_sig, abs=1e-8)

    def test_raising_beta_shrinks_margin(self):
        model = _scalar_model(beta=0.9, R=1.05)
        margins = []
        for beta in (0.90, 0.92, 0.94):
            m = ModelSpec(beta=beta, utility=model.utility, process=model.process)
            r, _ = check_contraction(m)
            margins.append(1.0 - beta * r)
        assert margins[0] > margins[1] > margins[2]


class TestPatience:
    def test_log_utility_rhs_is_inverse_beta(self):
        model = _scalar_model(beta=0.95, R=1.02, gamma=1.0, mode="stochastic")
        lhs, rhs, ok, band = check_patience(model)
        assert rhs == pytest.approx(1.0 / 0.95, rel=1e-12)
        assert ok

    def test_log_utility_vectors_are_ones_multistate(self):
        cfg = default_config()
        import dataclasses

        mcfg = dataclasses.replace(cfg.model, gamma=1.0, utility="log")
        model = build_model(mcfg)
        _, rhs, _, _ = check_patience(model)
        assert rhs == pytest.approx(1.0 / 0.95, rel=1e-12)

    def test_constant_R_scalar_algebra(self):
        # with constant R the condition is max{R, 1} < (beta R^(1-gamma))^(-1/gamma)
        beta, R, gamma = 0.95, 1.02, 2.0
        model = _scalar_model(beta=beta, R=R, gamma=gamma)
        lhs, rhs, ok, band = check_patience(model)
        assert lhs == pytest.approx(max(R, 1.0), abs=1e-12)
        assert rhs == pytest.approx((beta * R ** (1 - gamma)) ** (-1 / gamma), rel=1e-12)
        # share floor alpha = 1 - (beta E R^(1-gamma))^(1/gamma) sits in the band
        alpha_star = 1.0 - (beta * R ** (1 - gamma)) ** (1 / gamma)
        lo, hi = band
        assert lo < alpha_star <= hi + 1e-15
        assert (1 - hi) * R < 1.0

    def test_calibrated_model_two_passes(self):
        for gamma in (1.0, 2.0):
            import dataclasses

            cfg = default_config()
            mcfg = dataclasses.replace(
                with_variant(cfg.model, "mean_persistence"),
                gamma=gamma,
                utility="log" if gamma == 1.0 else "crra",
            )
            model = build_model(mcfg)
            lhs, rhs, ok, _ = check_patience(model)
            assert ok, f"gamma={gamma}: lhs={lhs} rhs={rhs}"

    def test_gamma_guard(self):
        model = _scalar_model()
        bad = ModelSpec(model.beta, UtilitySpec.crra(2.0), model.process)
        object.__setattr__(bad.utility, "gamma", -1.0)
        with pytest.raises(ValueError):
            check_patience(bad)


class TestIncomeMoments:
    def test_unit_income(self):
        # Y = 1 identically: E u'(Y) = 1 for any gamma
        for gamma in (1.0, 2.0, 3.5):
            ok, detail = check_income_moments(_scalar_model(gamma=gamma))
            assert ok
            assert detail["sup_Eu_prime_Y"] == pytest.approx(1.0, rel=1e-12)

    def test_lognormal_transient_moment(self):
        # E e^(-2 gamma eta) = e^(2 gamma^2 eta_var) for eta ~ N(0, eta_var)
        gamma = 2.0
        eta_var = 0.075
        proc = ExogenousProcess(
            chi=FiniteChain.single(0.0),
            mu=FiniteChain.single(0.0),
            sigma=FiniteChain.single(0.05),
            eta_std=np.sqrt(eta_var),
        )
        model = ModelSpec(0.95, UtilitySpec.crra(gamma), proc, quad_nodes=31)
        ok, detail = check_income_moments(model)
        assert ok
        expected = np.exp(gamma**2 * eta_var / 2.0)  # E e^(-gamma eta)
        assert detail["sup_Eu_prime_Y"] == pytest.approx(expected, rel=1e-6)

    def test_constant_mode_R2(self):
        ok, detail = check_income_moments(_scalar_model(R=1.03))
        assert detail["sup_ER2"] == pytest.approx(1.03**2, rel=1e-12)


class TestDrift:
    def test_unit_income(self):
        q, qp = check_drift(_scalar_model(Y=1.0))
        assert q == 0.0
        assert qp == pytest.approx(1.0, rel=1e-12)

    def test_calibrated_two_step_oracle(self):
        model = build_model(default_config().model)
        q, qp = check_drift(model)
        proc = model.process
        # direct matrix-vector oracle: P^2 (e^chi) * E e^eta
        from ifpkit.model import gauss_hermite_normal

        y, w = gauss_hermite_normal(model.quad_nodes)
        e_eta = w @ np.exp(proc.eta_std * y)
        oracle = np.max(proc.P @ (proc.P @ np.exp(proc.chi_values))) * e_eta
        assert qp == pytest.approx(oracle, rel=1e-12)


class TestReport:
    def test_stability_implies_contraction(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            beta = rng.uniform(0.85, 0.99)
            R = rng.uniform(0.98, 1.08)
            model = _scalar_model(beta=beta, R=R, gamma=2.0)
            rep = assumption_report(model)
            if rep.stability_ok:
                assert rep.contraction_ok
                assert 0.0 < rep.alpha < 1.0

    def test_report_dict_roundtrip(self):
        rep = assumption_report(_scalar_model())
        d = rep.as_dict()
        assert d["contraction_ok"] and d["stability_ok"]
        assert "income_sup_EY" in d

    def test_theta_below_one_when_contraction_holds(self):
        rep = assumption_report(build_model(default_config().model))
        assert rep.contraction_ok
        assert rep.contraction_factor < 1.0
        assert rep.contraction_steps >= 1
