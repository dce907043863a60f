"""Host-evaluator differential test of the float circuits vs numpy."""

import random
import struct
import sys

import numpy as np

from pimsim.driver import floatops
from pimsim.driver.netlist import evaluate

rng = random.Random(11)
QNAN = 0x7FC00000

SPECIALS = [
    0x00000000, 0x80000000, 0x3F800000, 0xBF800000, 0x7F800000, 0xFF800000,
    0x7FC00000, 0xFFC00000, 0x7F800001, 0x00000001, 0x80000001, 0x007FFFFF,
    0x00800000, 0x7F7FFFFF, 0xFF7FFFFF, 0x3F000000, 0x40000000, 0x41200000,
    0x3FC00000, 0x7FBFFFFF, 0x00400000, 0x80400000,
]


def bits_to_f(x):
    return struct.unpack("<f", struct.pack("<I", x))[0]


def f_to_bits(v):
    return struct.unpack("<I", struct.pack("<f", v))[0]


def host_op(op, aw, bw):
    a = np.float32(bits_to_f(aw))
    b = np.float32(bits_to_f(bw))
    with np.errstate(all="ignore"):
        if op == "fadd":
            r = np.float32(a + b)
        elif op == "fsub":
            r = np.float32(a - b)
        elif op == "fmul":
            r = np.float32(a * b)
        elif op == "fdiv":
            r = np.float32(np.divide(a, b))
        elif op == "flt":
            return int(bool(a < b))
        elif op == "fle":
            return int(bool(a <= b))
        elif op == "fgt":
            return int(bool(a > b))
        elif op == "fge":
            return int(bool(a >= b))
        elif op == "feq":
            return int(bool(a == b))
        elif op == "fsign":
            if a != a or a == 0:
                return 0x00000000
            return 0xBF800000 if a < 0 else 0x3F800000
    w = f_to_bits(r)
    if np.isnan(r):
        w = QNAN
    return w


def gen_pairs(k):
    pairs = []
    for s in SPECIALS:
        for t in SPECIALS[:8]:
            pairs.append((s, t))
    while len(pairs) < k:
        kind = rng.random()
        if kind < 0.6:
            pairs.append((rng.getrandbits(32), rng.getrandbits(32)))
        elif kind < 0.8:
            # close exponents (cancellation paths)
            e = rng.randrange(0, 255)
            a = (rng.getrandbits(1) << 31) | (e << 23) | rng.getrandbits(23)
            b = (rng.getrandbits(1) << 31) | (min(254, max(0, e + rng.randrange(-2, 3))) << 23) | rng.getrandbits(23)
            pairs.append((a, b))
        else:
            # subnormal-heavy
            a = (rng.getrandbits(1) << 31) | rng.getrandbits(23)
            b = (rng.getrandbits(1) << 31) | (rng.randrange(0, 3) << 23) | rng.getrandbits(23)
            pairs.append((a, b))
    return pairs[:k]


def main():
    npairs = int(sys.argv[1]) if len(sys.argv) > 1 else 4000
    bad = 0
    for op in ("fadd", "fsub", "fmul", "fdiv", "flt", "fle", "fgt", "fge", "feq", "fsign"):
        b, outs = floatops.get_circuit(op)
        pairs = gen_pairs(npairs)
        # chunk lanes to keep bitset ints modest
        fails = 0
        first = None
        for base in range(0, len(pairs), 512):
            chunk = pairs[base : base + 512]
            got = evaluate(b, outs, {0: [p[0] for p in chunk], 1: [p[1] for p in chunk]})
            for (aw, bw), g in zip(chunk, got):
                want = host_op(op, aw, bw)
                if g != want:
                    fails += 1
                    if first is None:
                        first = (aw, bw, g, want)
        if fails:
            bad += 1
            aw, bw, g, want = first
            print(f"FAIL {op}: {fails}/{len(pairs)} e.g. a={aw:#010x} b={bw:#010x} got={g:#010x} want={want:#010x}")
        else:
            print(f"ok   {op:6s} nodes={len(b.kind)}")
    sys.exit(1 if bad else 0)


main()
