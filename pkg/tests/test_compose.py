"""Tests for pipeline composition and method-chain naming."""

import numpy as np
import pytest

from gradlab.attribution import SmootherMode
from gradlab.attribution.compose import (
    AttributionPipeline,
    MethodTag,
    chain_name,
    compose,
    compose_chain,
    parse_chain,
    parse_smoother,
)
from gradlab.core.errors import ConfigError

ALL_CHAINS = [
    "Grad", "SG", "AG",
    "GI", "S-GI", "A-GI",
    "IG(B)", "S-IG(B)", "A-IG(B)",
    "IG(W)", "S-IG(W)", "A-IG(W)",
    "NG", "S-NG", "A-NG",
]


class TestNaming:
    @pytest.mark.parametrize("chain", ALL_CHAINS)
    def test_parse_inverts_chain_name(self, chain):
        assert chain_name(*parse_chain(chain)) == chain

    def test_parse_smoother_case_insensitive(self):
        assert parse_smoother("AG") is SmootherMode.ADAPTGRAD
        assert parse_smoother("sg") is SmootherMode.SMOOTHGRAD
        assert parse_smoother("none") is SmootherMode.NONE

    def test_unknown_tags(self):
        with pytest.raises(ConfigError):
            parse_smoother("xg")
        with pytest.raises(ConfigError):
            MethodTag.parse("LRP")


class TestCompose:
    @pytest.mark.parametrize("chain", ALL_CHAINS)
    def test_every_chain_runs(self, chain, small_mlp, unit_range, single_thread):
        pipeline = compose_chain(
            chain, data_range=unit_range, n_samples=3, ig_steps=4,
        )
        assert pipeline.method_chain == chain
        smap = pipeline(small_mlp, [0.2, 0.4, 0.6, 0.8], 1)
        assert smap.method_chain == chain
        assert smap.values.shape == (4,)
        assert np.all(np.isfinite(smap.values))

    def test_sg_rejects_confidence(self, unit_range):
        with pytest.raises(ConfigError):
            compose("SG", "Grad", data_range=unit_range, confidence=0.9)

    def test_ag_rejects_alpha(self, unit_range):
        with pytest.raises(ConfigError):
            compose("AG", "GI", data_range=unit_range, alpha=0.1)

    def test_smoothing_needs_range(self):
        with pytest.raises(ConfigError):
            compose("AG", "Grad")

    def test_white_ig_needs_range(self):
        with pytest.raises(ConfigError):
            compose("none", "IG(W)")

    def test_matches_direct_call(self, small_mlp, unit_range):
        from gradlab.attribution import SmootherConfig, adaptgrad

        pipeline = compose("AG", "Grad", data_range=unit_range, n_samples=20, confidence=0.99, seed=6)
        x = [0.3, 0.1, 0.7, 0.5]
        direct = adaptgrad(small_mlp, x, 0, SmootherConfig.adaptgrad(0.99, 20, 6), unit_range)
        np.testing.assert_array_equal(pipeline(small_mlp, x, 0).values, direct.values)

    def test_with_range_and_seed(self, unit_range):
        pipeline = compose("SG", "NG", data_range=unit_range, seed=1)
        moved = pipeline.with_range(unit_range.shifted(2.0)).with_seed(9)
        assert isinstance(moved, AttributionPipeline)
        assert moved.data_range.x_min == 2.0
        assert moved.smoother.seed == 9
        assert moved.noisegrad.seed == 9

    def test_to_dict(self, unit_range):
        d = compose("none", "IG(B)", data_range=unit_range, ig_steps=16).to_dict()
        assert d["method_chain"] == "IG(B)"
        assert d["ig_steps"] == 16
        assert d["range"] == {"x_min": 0.0, "x_max": 1.0}
