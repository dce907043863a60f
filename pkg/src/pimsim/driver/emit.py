"""Micro-op emission helpers shared by all lowering routines.

Cells are (partition, register) pairs. Pattern helpers mirror the
restricted semi-parallel encoding: one HLogic op describes the first gate
plus (p_end, p_step); input and output partition sets are arithmetic
progressions with a common step.
"""

from __future__ import annotations

from ..config import ArchConfig, ColumnAddress
from ..errors import InvalidOperation
from ..microops import (
    CrossbarMask,
    Gate,
    HLogic,
    MicroOp,
    Move,
    RangeMask,
    Read,
    RowMask,
    VLogic,
    Write,
)

__all__ = ["Emitter", "Scratch"]

Cell = tuple[int, int]  # (partition, register)


class Scratch:
    """Stack allocator over whole scratch registers."""

    def __init__(self, cfg: ArchConfig):
        self._free = list(reversed(list(cfg.scratch_regs)))

    def alloc(self, count: int = 1) -> list[int]:
        if count > len(self._free):
            raise InvalidOperation("driver scratch registers exhausted")
        return [self._free.pop() for _ in range(count)]

    def one(self) -> int:
        return self.alloc(1)[0]

    def free(self, *regs: int) -> None:
        for r in regs:
            self._free.append(r)


class Emitter:
    def __init__(self, cfg: ArchConfig):
        self.cfg = cfg
        self.n = cfg.word_n
        self.ops: list[MicroOp] = []

    # -- raw ops -----------------------------------------------------------

    def crossbar_mask(self, mask: RangeMask) -> None:
        self.ops.append(CrossbarMask(mask))

    def row_mask(self, mask: RangeMask) -> None:
        self.ops.append(RowMask(mask))

    def read(self, reg: int) -> None:
        self.ops.append(Read(reg))

    def write(self, reg: int, data: int) -> None:
        self.ops.append(Write(reg, data))

    def vlogic(self, gate: Gate, row_in: int, row_out: int, reg: int) -> None:
        self.ops.append(VLogic(gate, row_in, row_out, reg))

    def move(self, xb_dest: int, src_row: int, dst_row: int, src_reg: int, dst_reg: int) -> None:
        self.ops.append(Move(xb_dest, src_row, dst_row, src_reg, dst_reg))

    def hlogic(self, gate: Gate, in_a: Cell, in_b: Cell, out: Cell, p_end: int, p_step: int) -> None:
        a = ColumnAddress(*in_a)
        b = ColumnAddress(*in_b)
        if a.partition > b.partition:
            a, b = b, a
        self.ops.append(HLogic(gate, a, b, ColumnAddress(*out), p_end, p_step))

    # -- serial gates ------------------------------------------------------

    def serial(self, gate: Gate, out: Cell, a: Cell | None = None, b: Cell | None = None) -> None:
        """One gate (p_step = 0) on arbitrary cells."""
        if gate in (Gate.INIT0, Gate.INIT1):
            a = b = out
        elif gate == Gate.NOT:
            assert a is not None
            b = a
        else:
            assert a is not None and b is not None
        self.hlogic(gate, a, b, out, out[0], 0)

    # -- same-step patterns (AritPIM style) ----------------------------------

    def perform(self, gate: Gate, in_regs, out_reg: int, in_parts=None, out_parts=None) -> None:
        """One pattern op: gates at partitions in_parts[g] -> out_parts[g].

        in_parts defaults to every partition; in_parts/out_parts must be
        arithmetic progressions with one common step; for NOR both inputs
        sit in the same partition (distinct regs).
        """
        in_parts = list(in_parts if in_parts is not None else self.all_parts())
        if not in_parts:
            return
        out_parts = in_parts if out_parts is None else list(out_parts)
        if len(in_parts) != len(out_parts):
            raise InvalidOperation("pattern: partition set length mismatch")
        step = _common_step(in_parts, out_parts)
        if gate == Gate.NOR:
            a = (in_parts[0], in_regs[0])
            b = (in_parts[0], in_regs[1])
        elif gate == Gate.NOT:
            a = b = (in_parts[0], in_regs[0])
        else:
            a = b = (out_parts[0], out_reg)
        out = (out_parts[0], out_reg)
        self.hlogic(gate, a, b, out, out_parts[-1], step)

    def all_parts(self) -> range:
        return range(self.n)

    def init_reg(self, reg: int, value: int = 1, parts=None) -> None:
        """INIT a register across a partition set in one pattern op."""
        gate = Gate.INIT1 if value else Gate.INIT0
        self.perform(gate, [], reg, parts if parts is not None else self.all_parts())

    def copy_reg(self, src: int, dst: int, tmp: int, parts=None) -> None:
        """Partition-parallel register copy via double NOT (4 ops)."""
        parts = parts if parts is not None else self.all_parts()
        self.perform(Gate.INIT1, [], tmp, parts)
        self.perform(Gate.NOT, [src], tmp, parts)
        self.perform(Gate.INIT1, [], dst, parts)
        self.perform(Gate.NOT, [tmp], dst, parts)

    # -- tree helpers --------------------------------------------------------

    def broadcast_bit(self, src: Cell, dst: int, tmp: int) -> None:
        """dst[j] = bit at src, for every partition j (binary-tree doubling)."""
        n = self.n
        self.serial(Gate.INIT1, (0, tmp))
        self.serial(Gate.NOT, (0, tmp), src)
        self.init_reg(dst, 1)
        self.serial(Gate.NOT, (0, dst), (0, tmp))
        s = n
        while s > 1:
            half = s // 2
            outs = range(half, n, s)
            ins = range(0, n, s)
            self.perform(Gate.INIT1, [], tmp, outs)
            self.perform(Gate.NOT, [dst], tmp, ins, outs)
            self.perform(Gate.NOT, [tmp], dst, outs)
            s = half

    def reduce_or(self, t: int, tmp: int, tc: int) -> None:
        """Fold OR over all partitions of register t; result lands in t[0].

        t is clobbered everywhere; tmp/tc are scratch registers.
        """
        n = self.n
        m = 1
        while m < n:
            outs = range(0, n, 2 * m)
            ins = range(m, n, 2 * m)
            self.perform(Gate.INIT1, [], tmp, outs)
            self.perform(Gate.NOT, [t], tmp, ins, outs)  # tmp[j] = ~t[j+m]
            self.perform(Gate.INIT1, [], tc, outs)
            self.perform(Gate.NOT, [tmp], tc, outs)      # tc[j] = t[j+m]
            self.perform(Gate.INIT1, [], tmp, outs)
            self.perform(Gate.NOR, [t, tc], tmp, outs)   # tmp[j] = ~(t[j] | t[j+m])
            self.perform(Gate.INIT1, [], t, outs)
            self.perform(Gate.NOT, [tmp], t, outs)       # t[j] = t[j] | t[j+m]
            m *= 2

    def shift_copy(self, src: int, dst: int, tmp: int, offset: int) -> None:
        """dst[j + offset] = src[j] for |offset| == 1, using even/odd phases.

        dst cells in range must be initialized to 1 beforehand (INIT1).
        tmp must be initialized to 1 at the destination partitions.
        """
        n = self.n
        if offset == 1:
            ins = range(0, n - 1)
        elif offset == -1:
            ins = range(1, n)
        else:
            raise InvalidOperation("shift_copy supports offset +-1 only")
        for phase in (0, 1):
            phase_ins = [j for j in ins if j % 2 == phase]
            phase_outs = [j + offset for j in phase_ins]
            self.perform(Gate.NOT, [src], tmp, phase_ins, phase_outs)
        outs = [j + offset for j in ins]
        self.perform(Gate.NOT, [tmp], dst, outs)


def _common_step(in_parts: list[int], out_parts: list[int]) -> int:
    if len(in_parts) == 1:
        return 0
    step = in_parts[1] - in_parts[0]
    for seq in (in_parts, out_parts):
        for i in range(1, len(seq)):
            if seq[i] - seq[i - 1] != step:
                raise InvalidOperation("pattern: partitions not an arithmetic progression")
    if step <= 0:
        raise InvalidOperation("pattern: non-positive partition step")
    return step
