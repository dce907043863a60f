"""Quick differential smoke test for the hand-scheduled int routines."""

import random
import sys

from pimsim.config import ArchConfig
from pimsim.driver.emit import Emitter, Scratch
from pimsim.driver import intops
from pimsim.microops import RangeMask, Read, RowMask, Write
from pimsim.simulator import Simulator

M = 0xFFFFFFFF
cfg = ArchConfig(rows_h=8, num_crossbars=1)
rng = random.Random(7)

EDGE = [0, 1, M, 0x7FFFFFFF, 0x80000000, 2, 0xFFFFFFFE]


def s32(v):
    v &= M
    return v - (1 << 32) if v & 0x80000000 else v


def idiv(a, b):
    if b == 0:
        return M
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q & M


def imod(a, b):
    if b == 0:
        return M
    r = abs(a) % abs(b)
    if a < 0:
        r = -r
    return r & M


ORACLES = {
    "add": lambda a, b: (a + b) & M,
    "sub": lambda a, b: (a - b) & M,
    "mul": lambda a, b: (a * b) & M,
    "neg": lambda a, b: (-a) & M,
    "not": lambda a, b: ~a & M,
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
    "div": lambda a, b: idiv(s32(a), s32(b)),
    "mod": lambda a, b: imod(s32(a), s32(b)),
    "lt": lambda a, b: int(s32(a) < s32(b)),
    "le": lambda a, b: int(s32(a) <= s32(b)),
    "gt": lambda a, b: int(s32(a) > s32(b)),
    "ge": lambda a, b: int(s32(a) >= s32(b)),
    "eq": lambda a, b: int(a == b),
    "abs": lambda a, b: abs(s32(a)) & M,
    "zero": lambda a, b: int(a == 0),
    "sign": lambda a, b: (0 if a == 0 else (M if s32(a) < 0 else 1)),
}


def emit_routine(em, sc, op, dst, a, b, c=None):
    if op == "add":
        intops.lower_add(em, sc, dst, a, b)
    elif op == "sub":
        intops.lower_sub(em, sc, dst, a, b)
    elif op == "mul":
        intops.lower_mul(em, sc, dst, a, b)
    elif op == "neg":
        intops.lower_neg(em, sc, dst, a)
    elif op == "not":
        intops.lower_not(em, sc, dst, a)
    elif op == "and":
        intops.lower_and(em, sc, dst, a, b)
    elif op == "or":
        intops.lower_or(em, sc, dst, a, b)
    elif op == "xor":
        intops.lower_xor(em, sc, dst, a, b)
    elif op == "div":
        intops.lower_divmod(em, sc, dst, a, b, False)
    elif op == "mod":
        intops.lower_divmod(em, sc, dst, a, b, True)
    elif op in ("lt", "le", "gt", "ge"):
        intops.lower_cmp_int(em, sc, dst, a, b, op)
    elif op == "eq":
        intops.lower_eq_int(em, sc, dst, a, b)
    elif op == "abs":
        intops.lower_abs_int(em, sc, dst, a)
    elif op == "zero":
        intops.lower_zero(em, sc, dst, a, False)
    elif op == "sign":
        intops.lower_sign_int(em, sc, dst, a)
    elif op == "mux":
        intops.lower_mux(em, sc, dst, c, a, b, False)


def run_case(op, pairs, dst, ra, rb, alias_label):
    sim = Simulator(cfg)
    ops = []
    for row, (a, b) in enumerate(pairs):
        ops.append(RowMask(RangeMask(row, row, 1)))
        ops.append(Write(ra, a))
        if rb is not None:
            ops.append(Write(rb, b))
    ops.append(RowMask(RangeMask(0, len(pairs) - 1, 1)))
    em = Emitter(cfg)
    sc = Scratch(cfg)
    emit_routine(em, sc, op, dst, ra, rb if rb is not None else ra)
    assert len(sc._free) == len(list(cfg.scratch_regs)), f"{op}: scratch leak"
    ops.extend(em.ops)
    sim.run_ops(ops)
    nops = len(em.ops)
    for row, (a, b) in enumerate(pairs):
        sim.execute(RowMask(RangeMask(row, row, 1)))
        got = sim.execute(Read(dst))
        want = ORACLES[op](a if ra != dst else a, b)
        if got != want:
            print(f"FAIL {op} ({alias_label}) a={a:#x} b={b:#x}: got {got:#x} want {want:#x}")
            return nops, False
    return nops, True


def main():
    bad = 0
    for op in ORACLES:
        pairs = [(rng.getrandbits(32), rng.getrandbits(32)) for _ in range(10)]
        pairs += [(a, b) for a in EDGE[:4] for b in EDGE[:4]]
        pairs = pairs[: cfg.rows_h - 2]
        # non-aliased
        n1, ok1 = run_case(op, pairs, dst=2, ra=0, rb=1, alias_label="plain")
        # dst aliases src a
        n2, ok2 = run_case(op, pairs, dst=0, ra=0, rb=1, alias_label="alias")
        if not (ok1 and ok2):
            bad += 1
        else:
            print(f"ok   {op:5s} ops={n1} alias_ops={n2}")
    # mux separately (3 sources)
    sim_ok = True
    sim = Simulator(cfg)
    ops = []
    tri = [(rng.getrandbits(32), rng.getrandbits(32), rng.getrandbits(32)) for _ in range(4)]
    tri += [(0, 5, 9), (1, 5, 9)]
    for row, (c, x, y) in enumerate(tri):
        ops.append(RowMask(RangeMask(row, row, 1)))
        ops.append(Write(0, c))
        ops.append(Write(1, x))
        ops.append(Write(2, y))
    ops.append(RowMask(RangeMask(0, len(tri) - 1, 1)))
    em = Emitter(cfg)
    sc = Scratch(cfg)
    intops.lower_mux(em, sc, 3, 0, 1, 2, False)
    ops.extend(em.ops)
    sim.run_ops(ops)
    for row, (c, x, y) in enumerate(tri):
        sim.execute(RowMask(RangeMask(row, row, 1)))
        got = sim.execute(Read(3))
        want = x if c != 0 else y
        if got != want:
            print(f"FAIL mux c={c:#x}: got {got:#x} want {want:#x}")
            sim_ok = False
            bad += 1
            break
    if sim_ok:
        print(f"ok   mux   ops={len(em.ops)}")
    sys.exit(1 if bad else 0)


main()
