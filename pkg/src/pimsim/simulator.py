"""Bit-accurate micro-operation simulator over the full memory state.

Storage is bit-packed along the row axis (a condensed row format): `bits[xb, intra, partition, chunk]` is a uint64 whose
bit b is the cell at row `chunk*64 + b`, column `partition*(w/N) + intra`.
A naive bool-grid reference implementation lives in the test suite and is
checked for observational equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ArchConfig
from .errors import AmbiguousRead, InvalidMove, InvalidOperation, UninitializedOutput
from .halfgates import check_hlogic, gate_count
from .microops import (
    CrossbarMask,
    Gate,
    HLogic,
    Layout,
    MicroOp,
    Move,
    RangeMask,
    Read,
    RowMask,
    VLogic,
    Write,
    decode,
    expand_mask,
)

__all__ = ["ProfileCounters", "Simulator"]

_KIND_NAMES = ("CrossbarMask", "RowMask", "Read", "Write", "HLogic", "VLogic", "Move")

_U1 = np.uint64(1)
_UFULL = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass
class ProfileCounters:
    """Per micro-op-kind cycle counts; one cycle per executed micro-op."""

    counts: dict[str, int] = field(default_factory=lambda: {k: 0 for k in _KIND_NAMES})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def snapshot(self) -> "ProfileCounters":
        return ProfileCounters(dict(self.counts))

    def delta(self, earlier: "ProfileCounters") -> "ProfileCounters":
        return ProfileCounters(
            {k: self.counts[k] - earlier.counts.get(k, 0) for k in self.counts}
        )

    def report(self) -> str:
        lines = [f"{k:>14}: {v}" for k, v in self.counts.items() if v]
        lines.append(f"{'total':>14}: {self.total}")
        return "\n".join(lines)


class Simulator:
    """One MemoryState plus its execution engine.

    Confined to one execution context at a time; distinct Simulators are
    independent. `strict_init=True` (checked mode) raises UninitializedOutput
    when a NOR/NOT output cell is 0; physical mode silently applies the
    one-directional AND semantics.
    """

    def __init__(self, cfg: ArchConfig, strict_init: bool = True):
        cfg.validate()
        self.cfg = cfg
        self.layout = Layout(cfg)
        self.strict_init = strict_init
        self.chunks = (cfg.rows_h + 63) // 64
        self.bits = np.zeros(
            (cfg.num_crossbars, cfg.partition_width, cfg.word_n, self.chunks),
            dtype=np.uint64,
        )
        self.counters = ProfileCounters()
        # Initial mask state: all crossbars active, all rows masked.
        self.xb_mask = RangeMask(0, cfg.num_crossbars - 1, 1)
        self.row_mask = RangeMask(0, cfg.rows_h - 1, 1)
        self._rowbits_cache: dict[tuple[int, int, int], np.ndarray] = {}
        self._rowbits = self._row_bit_array(self.row_mask)
        self._hl_cache: dict[HLogic, tuple] = {}

    # -- mask helpers ------------------------------------------------------

    def _xb_slice(self) -> slice:
        m = self.xb_mask
        step = m.step if m.step > 0 else 1
        return slice(m.start, m.stop + 1, step)

    def _active_ids(self) -> list[int]:
        return list(self.xb_mask.indices())

    def _row_bit_array(self, mask: RangeMask) -> np.ndarray:
        key = (mask.start, mask.stop, mask.step)
        arr = self._rowbits_cache.get(key)
        if arr is None:
            arr = np.zeros(self.chunks, dtype=np.uint64)
            rows = np.arange(mask.start, mask.stop + 1, mask.step if mask.step else 1)
            np.bitwise_or.at(arr, rows // 64, _U1 << (rows % 64).astype(np.uint64))
            arr.setflags(write=False)
            self._rowbits_cache[key] = arr
        return arr

    # -- execution ---------------------------------------------------------

    def execute(self, op: MicroOp):
        """Execute one micro-op; returns the N-bit word for Read, else None."""
        result = None
        if isinstance(op, CrossbarMask):
            expand_mask(op.mask, self.cfg.num_crossbars)
            self.xb_mask = op.mask
        elif isinstance(op, RowMask):
            expand_mask(op.mask, self.cfg.rows_h)
            self.row_mask = op.mask
            self._rowbits = self._row_bit_array(op.mask)
        elif isinstance(op, Read):
            result = self._read(op)
        elif isinstance(op, Write):
            self._write(op)
        elif isinstance(op, HLogic):
            self._hlogic(op)
        elif isinstance(op, VLogic):
            self._vlogic(op)
        elif isinstance(op, Move):
            self._move(op)
        else:
            raise InvalidOperation(f"unknown micro-op {type(op).__name__}")
        self.counters.counts[_KIND_NAMES[_kind_index(op)]] += 1
        return result

    def run_ops(self, ops, out_reads: list | None = None):
        for i, op in enumerate(ops):
            try:
                r = self.execute(op)
            except Exception as exc:
                raise type(exc)(f"trace op {i}: {exc}") from exc
            if r is not None and out_reads is not None:
                out_reads.append(r)

    def run_trace(self, words) -> tuple[list[int], ProfileCounters]:
        """Decode and execute a word sequence; returns (reads, counter delta)."""
        before = self.counters.snapshot()
        reads: list[int] = []
        for i, word in enumerate(words):
            try:
                op = decode(word, self.layout)
                r = self.execute(op)
            except Exception as exc:
                raise type(exc)(f"trace line {i + 1}: {exc}") from exc
            if r is not None:
                reads.append(r)
        return reads, self.counters.delta(before)

    # -- per-variant implementations ----------------------------------------

    def _read(self, op: Read) -> int:
        if len(self.xb_mask) != 1 or len(self.row_mask) != 1:
            raise AmbiguousRead(
                f"read requires singleton masks (crossbars={len(self.xb_mask)}, "
                f"rows={len(self.row_mask)})"
            )
        xb = self.xb_mask.start
        row = self.row_mask.start
        chunk, bit = divmod(row, 64)
        lanes = (self.bits[xb, op.intra_index, :, chunk] >> np.uint64(bit)) & _U1
        return int(np.bitwise_or.reduce(lanes.astype(np.uint64) << np.arange(self.cfg.word_n, dtype=np.uint64)))

    def _write(self, op: Write) -> None:
        rowbits = self._rowbits
        datab = np.array(
            [(op.data >> j) & 1 for j in range(self.cfg.word_n)], dtype=np.uint64
        )[:, None]
        target = self.bits[self._xb_slice(), op.intra_index]
        target &= ~rowbits
        target |= datab * rowbits

    def _compile_hlogic(self, op: HLogic):
        check_hlogic(op, self.cfg.word_n)
        count = gate_count(op)
        step = op.p_step if op.p_step else 1
        span = (count - 1) * step + 1

        def sl(p0: int) -> slice:
            return slice(p0, p0 + span, step)

        info = (op.gate, sl(op.in_a.partition), sl(op.in_b.partition), sl(op.out.partition), op.in_a.intra_index, op.in_b.intra_index, op.out.intra_index)
        return info

    def _hlogic(self, op: HLogic) -> None:
        info = self._hl_cache.get(op)
        if info is None:
            info = self._compile_hlogic(op)
            self._hl_cache[op] = info
        gate, sa, sb, so, ia, ib, io = info
        rowbits = self._rowbits
        xsl = self._xb_slice()
        out = self.bits[xsl, io, so]
        if gate == Gate.INIT1:
            out |= rowbits
            return
        if gate == Gate.INIT0:
            out &= ~rowbits
            return
        if self.strict_init and np.any(~out & rowbits):
            raise UninitializedOutput(
                "NOR/NOT with uninitialized (0) output cell in a masked row"
            )
        val = self.bits[xsl, ia, sa].copy()
        if gate == Gate.NOR:
            val |= self.bits[xsl, ib, sb]
        out &= ~rowbits | ~val

    def _vlogic(self, op: VLogic) -> None:
        ci, bi = divmod(op.row_in, 64)
        co, bo = divmod(op.row_out, 64)
        xsl = self._xb_slice()
        outchunk = self.bits[xsl, op.intra_index, :, co]
        mask = _U1 << np.uint64(bo)
        if op.gate == Gate.INIT1:
            outchunk |= mask
            return
        if op.gate == Gate.INIT0:
            outchunk &= ~mask
            return
        # NOT
        if self.strict_init and np.any(~outchunk & mask):
            raise UninitializedOutput("VLogic NOT with uninitialized output cell")
        inbit = (self.bits[xsl, op.intra_index, :, ci] >> np.uint64(bi)) & _U1
        outchunk &= ~(inbit << np.uint64(bo))

    def _move(self, op: Move) -> None:
        srcs = self._active_ids()
        if not srcs:
            return
        # Signed transfer distance: the encoded field is the (non-negative)
        # destination of the first source, so descending moves stay legal.
        d = op.xb_dest - self.xb_mask.start
        dests = [s + d for s in srcs]
        if dests[0] < 0 or dests[-1] >= self.cfg.num_crossbars:
            raise InvalidMove("move destination out of range")
        if set(dests) & set(srcs):
            raise InvalidMove("move destination overlaps active sources")
        ci, bi = divmod(op.src_row, 64)
        co, bo = divmod(op.dst_row, 64)
        vals = (self.bits[srcs, op.src_index, :, ci] >> np.uint64(bi)) & _U1
        chunk = self.bits[dests, op.dst_index, :, co]
        mask = _U1 << np.uint64(bo)
        self.bits[dests, op.dst_index, :, co] = (chunk & ~mask) | (vals << np.uint64(bo))

    # -- state inspection (tests / snapshots) --------------------------------

    def get_grid(self, xb: int) -> np.ndarray:
        """Unpacked h x w bool grid of one crossbar (slow; tests only)."""
        cfg = self.cfg
        grid = np.zeros((cfg.rows_h, cfg.cols_w), dtype=bool)
        width = cfg.partition_width
        for intra in range(width):
            for p in range(cfg.word_n):
                chunks = self.bits[xb, intra, p]
                rowvals = np.unpackbits(
                    chunks.view(np.uint8), bitorder="little"
                )[: cfg.rows_h]
                grid[:, p * width + intra] = rowvals.astype(bool)
        return grid

    def set_grid(self, xb: int, grid: np.ndarray) -> None:
        cfg = self.cfg
        width = cfg.partition_width
        for intra in range(width):
            for p in range(cfg.word_n):
                col = grid[:, p * width + intra].astype(np.uint8)
                padded = np.zeros(self.chunks * 64, dtype=np.uint8)
                padded[: cfg.rows_h] = col
                self.bits[xb, intra, p] = np.packbits(padded, bitorder="little").view(
                    np.uint64
                )

    def snapshot(self) -> bytes:
        """Raw bit-grid dump, one crossbar after another, row-major."""
        parts = []
        for xb in range(self.cfg.num_crossbars):
            parts.append(np.packbits(self.get_grid(xb), axis=None).tobytes())
        return b"".join(parts)


def _kind_index(op: MicroOp) -> int:
    if isinstance(op, CrossbarMask):
        return 0
    if isinstance(op, RowMask):
        return 1
    if isinstance(op, Read):
        return 2
    if isinstance(op, Write):
        return 3
    if isinstance(op, HLogic):
        return 4
    if isinstance(op, VLogic):
        return 5
    return 6
