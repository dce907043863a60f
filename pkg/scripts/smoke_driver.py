"""End-to-end smoke of the driver facade: lower + replay_check + moves."""

import sys

import numpy as np

from pimsim.config import ArchConfig
from pimsim.driver import lower, replay_check, routine_budgets
from pimsim.driver.replay import load_words, read_words
from pimsim.isa import MoveInterWarp, MoveIntraWarp, RType, WriteInstr, ReadInstr
from pimsim.microops import RangeMask
from pimsim.simulator import Simulator

cfg = ArchConfig(rows_h=34, num_crossbars=4)
wm = RangeMask(0, cfg.num_crossbars - 1, 1)
tm = RangeMask(0, cfg.h_user - 1, 1)

OPS = [
    ("add", "int32", 2), ("subtract", "int32", 2), ("multiply", "int32", 2),
    ("divide", "int32", 2), ("modulo", "int32", 2), ("negate", "int32", 1),
    ("lt", "int32", 2), ("le", "int32", 2), ("gt", "int32", 2),
    ("ge", "int32", 2), ("eq", "int32", 2),
    ("not", "int32", 1), ("and", "int32", 2), ("or", "int32", 2), ("xor", "int32", 2),
    ("sign", "int32", 1), ("zero", "int32", 1), ("abs", "int32", 1), ("mux", "int32", 3),
    ("add", "float32", 2), ("subtract", "float32", 2), ("multiply", "float32", 2),
    ("divide", "float32", 2), ("negate", "float32", 1),
    ("lt", "float32", 2), ("le", "float32", 2), ("gt", "float32", 2),
    ("ge", "float32", 2), ("eq", "float32", 2),
    ("not", "float32", 1), ("and", "float32", 2), ("xor", "float32", 2),
    ("sign", "float32", 1), ("zero", "float32", 1), ("abs", "float32", 1),
    ("mux", "float32", 3),
]


def main():
    bad = 0
    budgets = routine_budgets(cfg)
    for op, dtype, nsrc in OPS:
        for dst in (5, 0):  # plain and aliased
            instr = RType(op, dtype, dst, tuple(range(nsrc)), wm, tm)
            stream = lower(instr, cfg)
            if len(stream) > budgets[(op, dtype)]:
                print(f"FAIL {op}/{dtype}: {len(stream)} > budget {budgets[(op, dtype)]}")
                bad += 1
                continue
            cex = replay_check(instr, cfg, seed=dst + 1)
            if cex is not None:
                print(f"FAIL {op}/{dtype} dst={dst}: {cex}")
                bad += 1
                break
        else:
            print(f"ok   {op:9s} {dtype:8s} ops={len(stream)} budget={budgets[(op, dtype)]}")

    # Write/Read lowering shape
    w = lower(WriteInstr(RangeMask(0, 0, 1), RangeMask(4, 4, 1), 3, 0x8), cfg)
    assert len(w) == 3, w
    r = lower(ReadInstr(0, 4, 3), cfg)
    sim = Simulator(cfg)
    sim.run_ops(w)
    reads = []
    sim.run_ops(r, reads)
    assert reads == [0x8], reads

    # Intra-warp move, same reg
    rng = np.random.default_rng(7)
    vals = rng.integers(0, 1 << 32, size=(4, 34), dtype=np.uint64).astype(np.uint32)
    sim2 = Simulator(cfg)
    load_words(sim2, 1, vals.copy())
    mv = MoveIntraWarp(((3, 5), (0, 7), (9, 9)), 1, 1, RangeMask(0, 3, 1))
    ops = lower(mv, cfg)
    assert sum(1 for o in ops if type(o).__name__ == "VLogic") == 8, ops
    sim2.run_ops(ops)
    after = read_words(sim2, 1)
    want = vals.copy()
    want[:, 5] = vals[:, 3]
    want[:, 7] = vals[:, 0]
    assert np.array_equal(after[:, : cfg.h_user], want[:, : cfg.h_user]), "intra move"

    # Intra-warp move, cross reg
    sim3 = Simulator(cfg)
    load_words(sim3, 1, vals.copy())
    load_words(sim3, 2, np.zeros_like(vals))
    mv2 = MoveIntraWarp(((3, 3), (4, 6)), 1, 2, RangeMask(1, 2, 1))
    sim3.run_ops(lower(mv2, cfg))
    a2 = read_words(sim3, 2)
    assert np.array_equal(a2[1:3, 3], vals[1:3, 3]) and np.array_equal(
        a2[1:3, 6], vals[1:3, 4]
    ), "cross-reg move"
    assert a2[0, 3] == 0 and a2[3, 6] == 0, "unmasked warp touched"

    # Inter-warp move: sources 0 step 4 is pow4; use mask (1,1,0)->dest 2
    sim4 = Simulator(cfg)
    load_words(sim4, 0, vals.copy())
    mvx = MoveInterWarp(RangeMask(1, 1, 0), 2, 5, 9, 0, 3)
    sim4.run_ops(lower(mvx, cfg))
    a3 = read_words(sim4, 3)
    assert a3[2, 9] == vals[1, 5], "inter-warp move"

    print("moves/facade checks ok")
    sys.exit(1 if bad else 0)


main()
