"""Naive bool-grid reference simulator and random micro-op generator.

Written directly from the architecture description (one cell per bool,
explicit loops over gates) as an independent oracle for the bit-packed
production simulator.
"""

from __future__ import annotations

import numpy as np

from pimsim.config import ArchConfig
from pimsim.errors import InvalidMove, UninitializedOutput
from pimsim.halfgates import check_hlogic, gate_count
from pimsim.microops import (
    CrossbarMask,
    Gate,
    HLogic,
    Move,
    RangeMask,
    Read,
    RowMask,
    VLogic,
    Write,
)


class NaiveSim:
    """One bool grid per crossbar; direct cell-by-cell gate semantics."""

    def __init__(self, cfg: ArchConfig, strict_init: bool = True):
        self.cfg = cfg
        self.strict = strict_init
        self.grids = [np.zeros((cfg.rows_h, cfg.cols_w), dtype=bool)
                      for _ in range(cfg.num_crossbars)]
        self.xbs = list(range(cfg.num_crossbars))
        self.rows = list(range(cfg.rows_h))
        self.xb_start = 0

    def col(self, partition: int, intra: int) -> int:
        return partition * self.cfg.partition_width + intra

    def execute(self, op):
        if isinstance(op, CrossbarMask):
            self.xbs = list(op.mask.indices())
            self.xb_start = op.mask.start
        elif isinstance(op, RowMask):
            self.rows = list(op.mask.indices())
        elif isinstance(op, Read):
            assert len(self.xbs) == 1 and len(self.rows) == 1
            g = self.grids[self.xbs[0]]
            word = 0
            for p in range(self.cfg.word_n):
                if g[self.rows[0], self.col(p, op.intra_index)]:
                    word |= 1 << p
            return word
        elif isinstance(op, Write):
            for xb in self.xbs:
                for row in self.rows:
                    for p in range(self.cfg.word_n):
                        self.grids[xb][row, self.col(p, op.intra_index)] = bool(
                            (op.data >> p) & 1)
        elif isinstance(op, HLogic):
            self._hlogic(op)
        elif isinstance(op, VLogic):
            self._vlogic(op)
        elif isinstance(op, Move):
            self._move(op)
        return None

    def _apply_gate(self, grid, row, gate, ca, cb, co):
        if gate == Gate.INIT1:
            grid[row, co] = True
            return
        if gate == Gate.INIT0:
            grid[row, co] = False
            return
        result = not grid[row, ca] if gate == Gate.NOT else not (
            grid[row, ca] or grid[row, cb])
        if self.strict and not grid[row, co]:
            raise UninitializedOutput("output cell is 0")
        # One-directional switching: the cell can only fall to 0.
        grid[row, co] = grid[row, co] and result

    def _hlogic(self, op: HLogic):
        step = op.p_step
        for g in range(gate_count(op)):
            ca = self.col(op.in_a.partition + g * step, op.in_a.intra_index)
            cb = self.col(op.in_b.partition + g * step, op.in_b.intra_index)
            co = self.col(op.out.partition + g * step, op.out.intra_index)
            for xb in self.xbs:
                for row in self.rows:
                    self._apply_gate(self.grids[xb], row, op.gate, ca, cb, co)

    def _vlogic(self, op: VLogic):
        # Operates on every partition's column at the intra index; the row
        # mask does not apply (rows are named explicitly).
        for p in range(self.cfg.word_n):
            c = self.col(p, op.intra_index)
            for xb in self.xbs:
                grid = self.grids[xb]
                if op.gate == Gate.INIT1:
                    grid[op.row_out, c] = True
                elif op.gate == Gate.INIT0:
                    grid[op.row_out, c] = False
                else:
                    if self.strict and not grid[op.row_out, c]:
                        raise UninitializedOutput("output cell is 0")
                    grid[op.row_out, c] = (grid[op.row_out, c]
                                           and not grid[op.row_in, c])

    def _move(self, op: Move):
        d = op.xb_dest - self.xb_start
        dests = [s + d for s in self.xbs]
        if dests and (dests[0] < 0 or dests[-1] >= self.cfg.num_crossbars):
            raise InvalidMove("destination out of range")
        if set(dests) & set(self.xbs):
            raise InvalidMove("destination overlaps sources")
        for s, t in zip(self.xbs, dests):
            for p in range(self.cfg.word_n):
                self.grids[t][op.dst_row, self.col(p, op.dst_index)] = \
                    self.grids[s][op.src_row, self.col(p, op.src_index)]


# -- random valid micro-op generation ----------------------------------------


def random_mask(rng, limit: int) -> RangeMask:
    start = int(rng.integers(0, limit))
    if limit - start == 1 or rng.random() < 0.25:
        return RangeMask(start, start, int(rng.integers(0, 2)))
    step = int(rng.integers(1, min(8, limit - 1 - start) + 1))
    count = int(rng.integers(1, (limit - 1 - start) // step + 2))
    if count == 1:
        return RangeMask(start, start, int(rng.integers(0, 2)))
    return RangeMask(start, start + (count - 1) * step, step)


def random_pow4_mask(rng, limit: int) -> RangeMask:
    step = int(rng.choice([1, 4]))
    start = int(rng.integers(0, limit))
    count = int(rng.integers(1, (limit - 1 - start) // step + 2))
    m = RangeMask(start, start + (count - 1) * step, step if count > 1 else 1)
    return m


def random_microop(rng, cfg: ArchConfig, kinds=None):
    """One random valid micro-op (HLogic patterns filtered by the validator)."""
    kind = rng.choice(kinds if kinds is not None
                      else ["xbmask", "rowmask", "write", "hlogic", "vlogic"])
    width, n = cfg.partition_width, cfg.word_n
    if kind == "xbmask":
        return CrossbarMask(random_mask(rng, cfg.num_crossbars))
    if kind == "rowmask":
        return RowMask(random_mask(rng, cfg.rows_h))
    if kind == "write":
        return Write(int(rng.integers(0, width)), int(rng.integers(0, 1 << n)))
    if kind == "vlogic":
        return VLogic(Gate(int(rng.integers(0, 3))), int(rng.integers(0, cfg.rows_h)),
                      int(rng.integers(0, cfg.rows_h)), int(rng.integers(0, width)))
    if kind == "move":
        return Move(int(rng.integers(0, cfg.num_crossbars)),
                    int(rng.integers(0, cfg.rows_h)), int(rng.integers(0, cfg.rows_h)),
                    int(rng.integers(0, width)), int(rng.integers(0, width)))
    from pimsim.config import ColumnAddress
    from pimsim.errors import InvalidOperation
    while True:  # rejection-sample a section-valid pattern
        gate = Gate(int(rng.integers(0, 4)))
        pa, pb = sorted(int(x) for x in rng.integers(0, n, size=2))
        po = int(rng.integers(0, n))
        if rng.random() < 0.5:
            p_step, p_end = 0, po
        else:
            p_step = int(rng.integers(1, n))
            room = (n - 1 - max(pa, pb, po)) // p_step
            if room < 0:
                continue
            p_end = po + p_step * int(rng.integers(0, room + 1))
        op = HLogic(gate,
                    ColumnAddress(pa, int(rng.integers(0, width))),
                    ColumnAddress(pb, int(rng.integers(0, width))),
                    ColumnAddress(po, int(rng.integers(0, width))),
                    p_end, p_step)
        try:
            check_hlogic(op, n)
        except InvalidOperation:
            continue
        if max(pa, pb) + (gate_count(op) - 1) * p_step < n:
            return op
