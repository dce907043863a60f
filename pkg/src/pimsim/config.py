"""Architecture parameters and strided address arithmetic.

The crossbar stores an N-bit word with bit j in partition j at a shared
intra-partition index, so a single word occupies columns
``j * (w/N) + k`` for j = 0..N-1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

__all__ = [
    "ArchConfig",
    "ColumnAddress",
    "column_of",
    "word_columns",
    "decompose_column",
    "validate_config",
    "load_config",
    "DEFAULT_CONFIG",
]


def _is_power_of(value: int, base: int) -> bool:
    if value < 1:
        return False
    while value % base == 0:
        value //= base
    return value == 1


@dataclass(frozen=True)
class ArchConfig:
    """Immutable architecture description (safely shareable across threads)."""

    rows_h: int = 1024
    cols_w: int = 1024
    word_n: int = 32
    num_crossbars: int = 16
    clock_hz: float = 300e6
    user_regs: int = 16
    scratch_rows: int = 2

    @property
    def partition_width(self) -> int:
        """Columns per partition = intra-partition indices = total registers."""
        return self.cols_w // self.word_n

    @property
    def num_regs(self) -> int:
        return self.partition_width

    @property
    def scratch_regs(self) -> range:
        """Register indices reserved for driver temporaries."""
        return range(self.user_regs, self.partition_width)

    @property
    def h_user(self) -> int:
        """Rows usable by tensors; the top scratch_rows rows are reserved."""
        return self.rows_h - self.scratch_rows

    def validate(self) -> None:
        diags = validate_config(self)
        if diags:
            raise ConfigError("; ".join(diags))


@dataclass(frozen=True)
class ColumnAddress:
    """A (partition, intra_index) pair naming one column of a crossbar."""

    partition: int
    intra_index: int


def validate_config(cfg: ArchConfig) -> list[str]:
    """Check all ArchConfig invariants; returns every violation found."""
    diags: list[str] = []
    if cfg.word_n < 1 or cfg.cols_w < 1:
        diags.append("word and column counts must be positive")
        return diags
    if cfg.cols_w % cfg.word_n != 0:
        diags.append("N must divide w (cols_w %% word_n != 0)")
    elif cfg.cols_w // cfg.word_n < 1:
        diags.append("partition width must be >= 1")
    if cfg.cols_w % cfg.word_n == 0 and cfg.user_regs > cfg.cols_w // cfg.word_n:
        diags.append("user_regs exceeds the register file (w/N intra indices)")
    if not _is_power_of(cfg.num_crossbars, 4):
        diags.append("crossbar count must be a power of 4")
    if cfg.scratch_rows < 1:
        diags.append("scratch_rows must be >= 1")
    if cfg.rows_h - cfg.scratch_rows < 1:
        diags.append("rows_h - scratch_rows must be >= 1")
    if cfg.user_regs < 1:
        diags.append("user_regs must be >= 1")
    if cfg.clock_hz <= 0:
        diags.append("clock_hz must be positive")
    return diags


def column_of(cfg: ArchConfig, partition: int, intra_index: int) -> int:
    """Column index of bit `partition` of the word at `intra_index`."""
    width = cfg.partition_width
    if not 0 <= partition < cfg.word_n:
        raise ConfigError(f"partition {partition} out of range [0, {cfg.word_n})")
    if not 0 <= intra_index < width:
        raise ConfigError(f"intra index {intra_index} out of range [0, {width})")
    return partition * width + intra_index


def word_columns(cfg: ArchConfig, intra_index: int) -> list[int]:
    """All N columns of the word at `intra_index`, ascending by bit."""
    return [column_of(cfg, j, intra_index) for j in range(cfg.word_n)]


def decompose_column(cfg: ArchConfig, column: int) -> ColumnAddress:
    """Inverse of column_of."""
    width = cfg.partition_width
    if not 0 <= column < cfg.cols_w:
        raise ConfigError(f"column {column} out of range [0, {cfg.cols_w})")
    return ColumnAddress(column // width, column % width)


_CONFIG_KEYS = {
    "rows": ("rows_h", int),
    "cols": ("cols_w", int),
    "word": ("word_n", int),
    "crossbars": ("num_crossbars", int),
    "clock_hz": ("clock_hz", float),
    "user_regs": ("user_regs", int),
    "scratch_rows": ("scratch_rows", int),
}


def load_config(path: str) -> ArchConfig:
    """Parse a key=value config file (keys: rows, cols, word, crossbars,
    clock_hz, user_regs, scratch_rows); missing keys take defaults."""
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            field, conv = _CONFIG_KEYS[key]
            try:
                values[field] = conv(val.strip())
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    cfg = ArchConfig(**values)  # type: ignore[arg-type]
    cfg.validate()
    return cfg


DEFAULT_CONFIG = ArchConfig()
