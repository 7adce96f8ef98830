import json
from pathlib import Path

import pytest

from nfswarm.config import (RunConfig, SweepParams, config_from_dict, default_document,
                            dump_config, load_config)
from nfswarm.errors import ConfigError
from nfswarm.geometry import reference_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class TestConfig:
    def test_shipped_config_is_default(self):
        rc = load_config(CONFIGS / "reference.json")
        assert rc.cfg == reference_config()
        assert rc.spec_hash() == RunConfig().spec_hash()

    def test_empty_document(self):
        rc = config_from_dict({})
        assert rc.cfg == reference_config() and rc.experiment.trials == 200

    def test_round_trip(self, tmp_path):
        rc = config_from_dict({"array": {"m_x": 2}, "experiment": {"trials": 7, "seed": 4},
                               "grid": {"delta": 5e-4}, "sweep": {"range": 60.0}})
        p = tmp_path / "c.json"
        dump_config(rc, p)
        back = load_config(p)
        assert back.spec_hash() == rc.spec_hash()
        assert back.experiment.cfg.m_x == 2 and back.grid.delta == 5e-4
        assert back.sweep.range == 60.0

    def test_hash_sensitive(self):
        assert config_from_dict({"experiment": {"seed": 1}}).spec_hash() != RunConfig().spec_hash()

    def test_default_document_is_json(self):
        json.dumps(default_document())

    @pytest.mark.parametrize("doc", [
        {"extra": {}},
        {"array": {"mx": 4}},
        {"grid": {"step": 1}},
        {"experiment": {"cfg": {}}},
        {"sweep": {"theta": 3}},
        {"array": []},
        [],
        {"experiment": {"trials": 0}},
        {"array": {"n_x": 0}},
    ])
    def test_rejected(self, doc):
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_unknown_key_message_lists_allowed(self):
        with pytest.raises(ConfigError, match="allowed"):
            config_from_dict({"grid": {"step": 1}})

    def test_missing_and_malformed(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(bad)

    def test_sweep_grids(self):
        s = SweepParams()
        assert s.axis_grid("uav_spacing") == tuple(float(v) for v in range(10, 101, 10))
        assert s.axis_grid("element_count") == tuple(range(1, 17))
        scn = s.scenario(reference_config())
        assert scn.range == 50.0
