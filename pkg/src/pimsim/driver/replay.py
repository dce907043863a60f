"""Differential replay harness: lowered streams vs the host oracle."""

from __future__ import annotations

import numpy as np

from ..config import ArchConfig
from ..isa import RType
from ..simulator import Simulator
from .oracle import host_rtype_array

__all__ = ["load_words", "read_words", "replay_check"]

# Operand patterns worth hitting deterministically in every float fuzz run.
_FLOAT_SPECIALS = (
    0x00000000, 0x80000000, 0x3F800000, 0xBF800000, 0x7F800000, 0xFF800000,
    0x7FC00000, 0x7F800001, 0x00000001, 0x80000001, 0x007FFFFF, 0x00800000,
    0x7F7FFFFF, 0xFF7FFFFF, 0x3F000000, 0x40000000,
)
_INT_SPECIALS = (
    0x00000000, 0x00000001, 0xFFFFFFFF, 0x7FFFFFFF, 0x80000000, 0x80000001,
    0x00000002, 0xFFFFFFFE, 0x55555555, 0xAAAAAAAA, 0x00010000, 0xFFFF0000,
)


def load_words(sim: Simulator, reg: int, values: np.ndarray) -> None:
    """Store values[xb, row] (uint32 words) into a register, bypassing ops."""
    rows = sim.cfg.rows_h
    padded = np.zeros((values.shape[0], sim.chunks * 64), dtype=np.uint8)
    for p in range(sim.cfg.word_n):
        padded[:, :rows] = (values >> p) & 1
        sim.bits[:, reg, p, :] = np.packbits(
            padded, axis=1, bitorder="little"
        ).view(np.uint64)


def read_words(sim: Simulator, reg: int) -> np.ndarray:
    """Read back every (xb, row) word of a register as uint32."""
    cfg = sim.cfg
    out = np.zeros((cfg.num_crossbars, cfg.rows_h), dtype=np.uint32)
    for p in range(cfg.word_n):
        rowvals = np.unpackbits(
            sim.bits[:, reg, p, :].view(np.uint8), axis=1, bitorder="little"
        )[:, : cfg.rows_h]
        out |= rowvals.astype(np.uint32) << np.uint32(p)
    return out


def _operand_pool(dtype: str, rng: np.random.Generator, shape) -> np.ndarray:
    vals = rng.integers(0, 1 << 32, size=shape, dtype=np.uint64).astype(np.uint32)
    specials = np.array(
        _FLOAT_SPECIALS if dtype == "float32" else _INT_SPECIALS, dtype=np.uint32
    )
    flat = vals.reshape(-1)
    k = min(len(specials) * 4, flat.size)
    flat[:k] = specials[rng.integers(0, len(specials), size=k)]
    return vals


def replay_check(instr: RType, cfg: ArchConfig, seed: int = 0):
    """Load random operands, lower, replay, compare against the host oracle.

    Covers every (warp, thread) lane in the instruction's masks; also checks
    non-interference on unmasked lanes and non-dst user registers. Returns
    None on pass, else the first counterexample as a dict.
    """
    from . import lower  # deferred: this module is re-exported by the package

    if not isinstance(instr, RType):
        raise TypeError("replay_check covers R-type instructions")
    rng = np.random.default_rng(seed)
    sim = Simulator(cfg)
    shape = (cfg.num_crossbars, cfg.rows_h)

    regs = sorted({instr.dst, *instr.srcs})
    before = {}
    for reg in regs:
        vals = _operand_pool(instr.dtype, rng, shape)
        load_words(sim, reg, vals)
        before[reg] = vals

    ops = lower(instr, cfg)
    sim.run_ops(ops)

    warps = np.fromiter(instr.warp_mask.indices(), dtype=np.int64)
    threads = np.fromiter(instr.thread_mask.indices(), dtype=np.int64)
    lane = np.ix_(warps, threads)
    srcs = [before[r][lane].reshape(-1) for r in instr.srcs]
    want = host_rtype_array(instr.opcode, instr.dtype, srcs)
    got_grid = read_words(sim, instr.dst)
    got = got_grid[lane].reshape(-1)

    bad = np.nonzero(got != want)[0]
    if bad.size:
        i = int(bad[0])
        w, t = int(warps[i // threads.size]), int(threads[i % threads.size])
        return {
            "operands": tuple(int(s[i]) for s in srcs),
            "got": int(got[i]),
            "want": int(want[i]),
            "warp": w,
            "thread": t,
        }

    # Non-interference: dst outside the masks, sources everywhere (unless
    # aliased by dst).
    untouched = before[instr.dst].copy()
    untouched[lane] = got_grid[lane]
    if not np.array_equal(got_grid, untouched):
        return {"violation": "dst modified outside the instruction masks"}
    for r in instr.srcs:
        if r != instr.dst and not np.array_equal(read_words(sim, r), before[r]):
            return {"violation": f"source register {r} clobbered"}
    return None
