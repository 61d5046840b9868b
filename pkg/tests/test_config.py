import dataclasses

import numpy as np
import pytest

from ifpkit import ConfigError, build_model, config_digest, default_config, with_variant
from ifpkit.config import (
    build_grid,
    config_from_dict,
    config_to_dict,
    dump_config,
    load_config,
    model_digest,
)


class TestDefaults:
    def test_default_calibration(self):
        cfg = default_config()
        assert cfg.model.beta == 0.95
        assert cfg.model.gamma == 2.0
        r = cfg.model.returns
        assert (r.mu_bar, r.rho_mu, r.delta_mu) == (0.0281, 0.5722, 0.0067)
        assert (r.sigma_bar, r.rho_sigma, r.delta_sigma) == (-3.2556, 0.2895, 0.1896)
        assert cfg.model.income.rho_chi == 0.9770
        assert cfg.model.income.delta_chi == pytest.approx(np.sqrt(0.02))
        assert cfg.model.income.eta_std == pytest.approx(np.sqrt(0.075))

    def test_sigma_hat(self):
        r = default_config().model.returns
        expected = np.exp(r.sigma_bar + r.delta_sigma**2 / (2 * (1 - r.rho_sigma**2)))
        assert r.sigma_hat == pytest.approx(expected)
        assert r.sigma_hat == pytest.approx(0.0393, abs=2e-4)

    def test_variants_build(self):
        cfg = default_config()
        for variant, n_states in [
            ("stochastic_volatility", 25),
            ("mean_persistence", 25),
            ("iid", 5),
            ("constant", 5),
            ("full", 125),
        ]:
            model = build_model(with_variant(cfg.model, variant))
            assert model.n_states == n_states

    def test_constant_R_value(self):
        cfg = default_config()
        model = build_model(with_variant(cfg.model, "constant"))
        r = cfg.model.returns
        expected = np.exp(r.mu_bar) * np.exp(r.sigma_hat**2 / 2)
        assert model.process.constant_R == pytest.approx(expected, rel=1e-12)

    def test_grid_builders(self):
        cfg = default_config()
        g = build_grid(cfg.grid)
        assert g.n == 100 and g.spacing == "linear"
        g2 = build_grid(dataclasses.replace(cfg.grid, spacing="log"))
        assert g2.spacing == "log"


class TestRoundTrip:
    def test_dict_round_trip(self):
        cfg = default_config()
        assert config_from_dict(config_to_dict(cfg)) == cfg

    def test_yaml_round_trip(self, tmp_path):
        cfg = default_config()
        path = tmp_path / "config.yaml"
        path.write_text(dump_config(cfg))
        assert load_config(path) == cfg

    def test_digest_stability(self):
        cfg = default_config()
        assert config_digest(cfg) == config_digest(default_config())
        other = dataclasses.replace(cfg, model=dataclasses.replace(cfg.model, beta=0.9))
        assert config_digest(cfg) != config_digest(other)

    def test_model_digest_ignores_simulation(self):
        cfg = default_config()
        other = dataclasses.replace(
            cfg, simulate=dataclasses.replace(cfg.simulate, seed=777)
        )
        assert model_digest(cfg) == model_digest(other)


class TestValidation:
    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            config_from_dict({"model": {"beta": 0.9, "bogus": 1}})

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            config_from_dict({"extra_section": {}})

    def test_bad_variant(self):
        with pytest.raises(ConfigError):
            config_from_dict({"model": {"returns": {"variant": "sideways"}}})

    def test_partial_overrides(self):
        cfg = config_from_dict({"model": {"beta": 0.9}})
        assert cfg.model.beta == 0.9
        assert cfg.model.gamma == 2.0

    def test_yaml_parse_error_has_location(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("model:\n  beta: [unclosed\n")
        with pytest.raises(ConfigError, match="line"):
            load_config(path)
