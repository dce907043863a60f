"""Lowering of the warp-parallel move instructions.

Intra-warp moves stage each thread's word through a scratch row with two
consecutive NOT gates (VLogic); a cross-register move adds one
partition-parallel register copy on the scratch row. Inter-warp moves use
the H-tree Move micro-op directly, one op per (thread, reg) tuple.
"""

from __future__ import annotations

from ..config import ArchConfig
from ..errors import InvalidMove
from ..isa import MoveInterWarp, MoveIntraWarp
from ..microops import Gate, MicroOp, RangeMask
from .emit import Emitter, Scratch

__all__ = ["lower_move"]


def lower_move(instr: MoveIntraWarp | MoveInterWarp, cfg: ArchConfig) -> list[MicroOp]:
    if isinstance(instr, MoveInterWarp):
        return _lower_inter(instr, cfg)
    return _lower_intra(instr, cfg)


def _lower_inter(instr: MoveInterWarp, cfg: ArchConfig) -> list[MicroOp]:
    srcs = list(instr.warp_mask.indices())
    shift = instr.warp_dest - instr.warp_mask.start
    dests = [s + shift for s in srcs]
    if dests[0] < 0 or dests[-1] >= cfg.num_crossbars:
        raise InvalidMove("inter-warp destination out of range")
    if set(dests) & set(srcs):
        raise InvalidMove("inter-warp destinations overlap source warps")
    em = Emitter(cfg)
    em.crossbar_mask(instr.warp_mask)
    em.move(instr.warp_dest, instr.src_thread, instr.dst_thread,
            instr.src_reg, instr.dst_reg)
    return em.ops


def _lower_intra(instr: MoveIntraWarp, cfg: ArchConfig) -> list[MicroOp]:
    cross = instr.src_reg != instr.dst_reg
    live = [(s, d) for s, d in instr.pairs if cross or s != d]
    written = [d for _, d in live]
    if len(set(written)) != len(written):
        raise InvalidMove("two pairs write the same destination thread")

    em = Emitter(cfg)
    em.crossbar_mask(instr.warp_mask)
    srow = cfg.h_user  # first scratch row
    em.row_mask(RangeMask(srow, srow, 1))
    tmp = Scratch(cfg).one() if cross else 0
    for s, d in live:
        # Stage through the scratch row: two consecutive NOTs restore polarity.
        em.vlogic(Gate.INIT1, srow, srow, instr.src_reg)
        em.vlogic(Gate.NOT, s, srow, instr.src_reg)
        if cross:
            # Hop registers on the scratch row (row mask covers srow only).
            em.copy_reg(instr.src_reg, instr.dst_reg, tmp)
        em.vlogic(Gate.INIT1, d, d, instr.dst_reg)
        em.vlogic(Gate.NOT, srow, d, instr.dst_reg)
    return em.ops
