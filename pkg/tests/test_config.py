"""Architecture config validation and address arithmetic."""

import pytest

from pimsim.config import (
    ArchConfig,
    column_of,
    decompose_column,
    load_config,
    validate_config,
    word_columns,
)
from pimsim.errors import ConfigError


def test_default_geometry():
    cfg = ArchConfig()
    assert cfg.partition_width == 32
    assert cfg.h_user == 1022
    assert list(cfg.scratch_regs) == list(range(16, 32))
    cfg.validate()


def test_invalid_configs():
    assert validate_config(ArchConfig(word_n=33))  # N does not divide w
    assert validate_config(ArchConfig(num_crossbars=8))  # not a power of 4
    assert validate_config(ArchConfig(rows_h=2, scratch_rows=2))
    assert validate_config(ArchConfig(user_regs=64))
    assert validate_config(ArchConfig(clock_hz=0))
    with pytest.raises(ConfigError):
        ArchConfig(num_crossbars=3).validate()


def test_column_addressing_roundtrip():
    cfg = ArchConfig()
    # bit j of word k lives at column j*(w/N) + k
    assert column_of(cfg, 3, 7) == 3 * 32 + 7
    cols = word_columns(cfg, 5)
    assert cols == [j * 32 + 5 for j in range(32)]
    for c in (0, 31, 32, 1023):
        addr = decompose_column(cfg, c)
        assert column_of(cfg, addr.partition, addr.intra_index) == c
    with pytest.raises(ConfigError):
        column_of(cfg, 32, 0)
    with pytest.raises(ConfigError):
        decompose_column(cfg, 1024)


def test_load_config(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("# comment\nrows = 66\ncrossbars=16\nclock_hz = 1e6\n")
    cfg = load_config(str(p))
    assert (cfg.rows_h, cfg.num_crossbars, cfg.clock_hz) == (66, 16, 1e6)
    bad = tmp_path / "b.cfg"
    bad.write_text("rowz = 10\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    bad.write_text("rows ten\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    bad.write_text("crossbars = 5\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
