"""Replay compiled float circuits through the simulator vs the evaluator."""

import random
import sys

from pimsim.config import ArchConfig
from pimsim.driver import floatops
from pimsim.driver.netlist import compile_circuit, evaluate
from pimsim.microops import RangeMask, Read, RowMask, Write
from pimsim.simulator import Simulator

rng = random.Random(3)
cfg = ArchConfig(rows_h=8, num_crossbars=1)


def run(op, pairs, dst, ra, rb):
    b, outs = floatops.get_circuit(op)
    ops = compile_circuit(b, outs, cfg, dst, [ra, rb])
    want = evaluate(b, outs, {0: [p[0] for p in pairs], 1: [p[1] for p in pairs]})
    sim = Simulator(cfg)
    pre = []
    for row, (aw, bw) in enumerate(pairs):
        pre.append(RowMask(RangeMask(row, row, 1)))
        pre.append(Write(ra, aw))
        pre.append(Write(rb, bw))
    pre.append(RowMask(RangeMask(0, len(pairs) - 1, 1)))
    sim.run_ops(pre)
    sim.run_ops(ops)
    for row, w in enumerate(want):
        sim.execute(RowMask(RangeMask(row, row, 1)))
        got = sim.execute(Read(dst))
        if got != w:
            print(f"FAIL {op} row={row} got={got:#010x} want={w:#010x}")
            return len(ops), False
        # non-interference: sources intact (when not aliased)
        if dst not in (ra, rb):
            if sim.execute(Read(ra)) != pairs[row][0] or sim.execute(Read(rb)) != pairs[row][1]:
                print(f"FAIL {op} row={row}: source clobbered")
                return len(ops), False
    return len(ops), True


def main():
    bad = 0
    for op in ("fadd", "fsub", "fmul", "fdiv", "flt", "feq", "fsign"):
        pairs = [(rng.getrandbits(32), rng.getrandbits(32)) for _ in range(6)]
        n1, ok1 = run(op, pairs, dst=2, ra=0, rb=1)
        n2, ok2 = run(op, pairs, dst=0, ra=0, rb=1)  # aliased dst
        if ok1 and ok2:
            print(f"ok   {op:6s} ops={n1}")
        else:
            bad += 1
    sys.exit(1 if bad else 0)


main()
