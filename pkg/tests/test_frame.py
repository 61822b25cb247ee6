"""Tests for frame configuration, grid indexing, and pilot patterns."""

import json

import numpy as np
import pytest

from mprx.frame import (
    ConfigError,
    InvalidGridError,
    OutOfRangeError,
    QPSK_POINTS,
    ResourceGrid,
    build_default_config,
    build_pilot_pattern,
    flat_index,
    load_config,
    pilot_positions,
)


class TestFlatIndex:
    def test_first_element(self):
        assert flat_index(1, 1, 75) == 0

    def test_end_of_first_symbol(self):
        assert flat_index(75, 1, 75) == 74

    def test_start_of_second_symbol(self):
        assert flat_index(1, 2, 75) == 75

    def test_bijection(self):
        seen = {flat_index(k, l, 75) for l in range(1, 8) for k in range(1, 76)}
        assert seen == set(range(75 * 7))

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            flat_index(0, 1, 75)
        with pytest.raises(OutOfRangeError):
            flat_index(76, 1, 75)
        with pytest.raises(OutOfRangeError):
            flat_index(1, 0, 75)


class TestPilotPattern:
    def test_positions(self):
        pos = pilot_positions(75, 7)
        assert len(pos) == 13
        assert {l for (_, l) in pos} == {0, 4}
        first = sorted(k for (k, l) in pos if l == 0)
        second = sorted(k for (k, l) in pos if l == 4)
        assert first == [0, 12, 24, 36, 48, 60, 72]
        assert second == [6, 18, 30, 42, 54, 66]

    def test_values_unit_magnitude_qpsk(self):
        pat = build_pilot_pattern(75, 7, np.random.default_rng(0))
        assert np.allclose(np.abs(pat.values), 1.0)
        # every value is one of the four QPSK points
        d = np.abs(pat.values[..., None] - QPSK_POINTS)
        assert np.all(d.min(axis=-1) < 1e-12)

    def test_deterministic(self):
        a = build_pilot_pattern(75, 7, np.random.default_rng(42))
        b = build_pilot_pattern(75, 7, np.random.default_rng(42))
        assert a.positions == b.positions
        assert np.array_equal(a.values, b.values)

    def test_grid_too_small(self):
        with pytest.raises(InvalidGridError):
            build_pilot_pattern(72, 7, np.random.default_rng(0))
        with pytest.raises(InvalidGridError):
            build_pilot_pattern(75, 4, np.random.default_rng(0))


class TestResourceGrid:
    def test_partition_covers_grid(self):
        cfg = build_default_config()
        grid = cfg.grid
        assert grid.n_pilots + grid.n_data == 75 * 7
        assert grid.n_pilots == 13
        assert grid.n_data == 512

    def test_index_sets_disjoint(self):
        grid = build_default_config().grid
        assert not set(grid.data_indices) & set(grid.pilot_indices)
        assert len(grid.data_indices) + len(grid.pilot_indices) == grid.size


class TestDefaultConfig:
    def test_dimensions(self):
        cfg = build_default_config()
        assert (cfg.tx_antennas, cfg.rx_antennas) == (2, 2)
        assert (cfg.subcarriers, cfg.ofdm_symbols) == (75, 7)
        assert cfg.subcarrier_spacing_hz == 15e3

    def test_pilot_count(self):
        assert build_default_config().pilot_pattern.count == 13

    def test_code(self):
        cfg = build_default_config()
        assert cfg.code.generators_octal == (0o133, 0o171, 0o165)
        assert cfg.code.rate == pytest.approx(1 / 3)


class TestConfigFile:
    def _write(self, tmp_path, payload):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(payload))
        return str(path)

    def test_round_trip(self, tmp_path):
        path = self._write(
            tmp_path,
            {
                "subcarriers": 75,
                "ofdm_symbols": 7,
                "constellation": "qpsk",
                "eb_n0_db": 4.0,
                "pilot_seed": 3,
                "channel_profile": "etu",
            },
        )
        loaded = load_config(path)
        assert loaded.frame.constellation == "qpsk"
        assert loaded.frame.eb_n0_db == 4.0
        assert loaded.profile.name == "etu"

    def test_unknown_key_rejected(self, tmp_path):
        path = self._write(tmp_path, {"subcarriers": 75, "bogus": 1})
        with pytest.raises(ConfigError, match="bogus"):
            load_config(path)

    def test_custom_profile(self, tmp_path):
        path = self._write(tmp_path, {"channel_profile": [[0, 0.0], [100, -3.0]]})
        loaded = load_config(path)
        assert loaded.profile.n_taps == 2
        assert loaded.profile.powers.sum() == pytest.approx(1.0)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_bad_profile_name(self, tmp_path):
        path = self._write(tmp_path, {"channel_profile": "tdl-z"})
        with pytest.raises(ConfigError):
            load_config(path)
