"""Acceptance gate: one test (and one printed PASS/FAIL line) per criterion.

Oracles are computed independently here (host numpy arithmetic, same-tree
reductions, direct gate evaluation); no stored expectations.
"""

import math
import time

import numpy as np
import pytest

from pimsim.bench import cordic_sincos, published_add_crosscheck, run_benchmark, throughput
from pimsim.config import ArchConfig
from pimsim.driver import lower, replay_check, routine_budgets
from pimsim.driver.replay import load_words, read_words
from pimsim.errors import UninitializedOutput
from pimsim.isa import _SRC_COUNT, RType
from pimsim.microops import (
    CrossbarMask,
    HLogic,
    Layout,
    Move,
    RangeMask,
    Read,
    RowMask,
    VLogic,
    Write,
    decode,
    encode,
)
from pimsim.simulator import Simulator
from pimsim.tensors import Session
from conftest import CFG_SMALL, CFG_TINY, CFG_SCALE
from refsim import random_microop
from test_halfgates import run_exhaustive_n4, run_sampled_n32

CFG_DIFF = ArchConfig(rows_h=1026, num_crossbars=16)  # 16384 lanes per run


def report(name: str, ok: bool, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'}: {name}" + (f" [{detail}]" if detail else "")
    print(line)
    assert ok, line


# -- [PRIMARY] codec round-trip ------------------------------------------------


def test_codec_roundtrip_million():
    layout = Layout(CFG_SMALL)
    rng = np.random.default_rng(100)
    pool = [random_microop(rng, CFG_SMALL,
                           kinds=["xbmask", "rowmask", "write", "hlogic",
                                  "vlogic", "move"])
            for _ in range(4000)]
    start = time.time()
    n = 1_000_000
    mismatches = 0
    idx = rng.integers(0, len(pool), size=n)
    for i in range(n):
        op = pool[idx[i]]
        if decode(encode(op, layout), layout) != op:
            mismatches += 1
    elapsed = time.time() - start
    width_ok = Layout(ArchConfig()).hlogic_bits == 42
    report("codec: 10^6 encode/decode round-trips, HLogic payload = 42 bits",
           mismatches == 0 and width_ok,
           f"{n} round-trips, {mismatches} mismatches, {elapsed:.1f}s")


# -- [PRIMARY] half-gate soundness ----------------------------------------------


def test_halfgates_exhaustive_and_sampled():
    total, accepted = run_exhaustive_n4()
    samples = run_sampled_n32()
    report("half-gates: exhaustive N=4 + sampled N=32 vs direct evaluation",
           True, f"{total} patterns ({accepted} valid), {samples} N=32 samples")


# -- [PRIMARY] integer differential suite ----------------------------------------


INT_OPS = ["add", "subtract", "multiply", "divide", "modulo", "negate",
           "lt", "le", "gt", "ge", "eq", "not", "and", "or", "xor",
           "sign", "zero", "abs", "mux"]


def test_int_differential():
    w = RangeMask(0, CFG_DIFF.num_crossbars - 1, 1)
    t = RangeMask(0, CFG_DIFF.h_user - 1, 1)
    lanes = len(w) * len(t)
    failures = []
    for op in INT_OPS:
        instr = RType(op, "int32", 5, tuple(range(_SRC_COUNT[op])), w, t)
        r = replay_check(instr, CFG_DIFF, seed=101)
        if r is not None:
            failures.append((op, r))
    # explicit edge set, all pairs
    from pimsim.driver import host_rtype_array
    edges = np.array([0, 1, 0xFFFFFFFF, 0x80000000, 0x7FFFFFFF], dtype=np.uint32)
    a = np.repeat(edges, len(edges))
    b = np.tile(edges, len(edges))
    sim = Simulator(CFG_SMALL)
    grid_a = np.zeros((CFG_SMALL.num_crossbars, CFG_SMALL.rows_h), np.uint32)
    grid_b = grid_a.copy()
    grid_a.reshape(-1)[: a.size] = a
    grid_b.reshape(-1)[: b.size] = b
    load_words(sim, 0, grid_a)
    load_words(sim, 1, grid_b)
    load_words(sim, 2, grid_a)
    for op in INT_OPS:
        nsrc = _SRC_COUNT[op]
        instr = RType(op, "int32", 5, tuple(range(nsrc)),
                      RangeMask(0, CFG_SMALL.num_crossbars - 1, 1),
                      RangeMask(0, CFG_SMALL.h_user - 1, 1))
        sim.run_ops(lower(instr, CFG_SMALL))
        got = read_words(sim, 5).reshape(-1)[: a.size]
        srcs = [grid_a.reshape(-1)[: a.size], grid_b.reshape(-1)[: a.size],
                grid_a.reshape(-1)[: a.size]][:nsrc]
        want = host_rtype_array(op, "int32", srcs)
        if not np.array_equal(got, want):
            failures.append((op, "edge mismatch"))
    report("int differential: >=10^4 random pairs per op + edge set, bit-exact",
           not failures, f"{lanes} lanes/op x {len(INT_OPS)} ops"
           + (f"; failures: {failures[:2]}" if failures else ""))


# -- [PRIMARY] float differential suite ------------------------------------------


def test_float_differential():
    w = RangeMask(0, CFG_DIFF.num_crossbars - 1, 1)
    t = RangeMask(0, CFG_DIFF.h_user - 1, 1)
    lanes = len(w) * len(t)
    seeds = range(200, 207)  # 7 x 16384 = 114688 >= 10^5 patterns per op
    failures = []
    for op in ("add", "subtract", "multiply", "divide"):
        instr = RType(op, "float32", 5, (0, 1), w, t)
        for seed in seeds:
            r = replay_check(instr, CFG_DIFF, seed=seed)
            if r is not None:
                failures.append((op, seed, r))
                break
    report("float differential: >=10^5 bit patterns per op, IEEE-754 bit-exact "
           "(NaN canonicalized to 0x7FC00000)",
           not failures, f"{lanes * len(seeds)} patterns/op"
           + (f"; failures: {failures[:1]}" if failures else ""))


# -- [PRIMARY] cycle budgets -------------------------------------------------------


def test_cycle_budgets():
    cfg = CFG_SMALL
    n = cfg.word_n
    w = RangeMask(0, cfg.num_crossbars - 1, 1)
    t = RangeMask(0, cfg.h_user - 1, 1)
    problems = []
    add_len = len(lower(RType("add", "int32", 5, (0, 1), w, t), cfg))
    if add_len > 9 * n + 3 * n + 2:
        problems.append(f"add stream {add_len} > {12 * n + 2}")
    for op in ("not", "and", "or", "xor"):
        body = len(lower(RType(op, "int32", 5, tuple(range(_SRC_COUNT[op])),
                               w, t), cfg)) - 2  # excluding the two mask ops
        if body > 10:
            problems.append(f"{op} body {body} > 10")
    budgets = routine_budgets(cfg)
    for (op, dtype), budget in budgets.items():
        nsrc = _SRC_COUNT[op]
        stream = len(lower(RType(op, dtype, 5, tuple(range(nsrc)), w, t), cfg))
        if stream > budget:
            problems.append(f"{op}/{dtype} {stream} > {budget}")
    report("cycle budgets: add <= 12N+2, bitwise bodies <= 10, all "
           "RoutineBudget entries hold",
           not problems, f"{len(budgets)} entries"
           + (f"; {problems[:3]}" if problems else ""))


# -- [PRIMARY] demo program end-to-end ---------------------------------------------------


def my_func(s, a, b):
    prod = s.elementwise("multiply", a, b)
    out = s.elementwise("add", prod, a)
    s.free(prod)
    return out


def run_demo_program(session, nelem):
    """The example application, at desk-scale vector length."""
    x = session.alloc(nelem, "float32")
    y = session.alloc(nelem, "float32")
    session.set_element(x, 4, 8.0)
    session.set_element(y, 4, 0.5)
    session.set_element(x, 5, 20.0)
    session.set_element(y, 5, 1.0)
    session.set_element(x, 8, 10.0)
    session.set_element(y, 8, 1.0)
    z = my_func(session, x, y)
    return session.reduce(z[::2], "sum")


def test_demo_program_end_to_end():
    session = Session(CFG_SCALE)
    result = run_demo_program(session, 2 ** 16)
    report("demo program: z[::2].sum() == 32.0 exactly",
           np.float32(result) == np.float32(32.0), f"got {result!r} on 2^16 elements")


# -- [PRIMARY] interactive session ----------------------------------------


def test_interactive_session():
    s = Session(ArchConfig(rows_h=10, num_crossbars=4))
    x = s.alloc(8, "float32")
    ok = list(s.to_host(x)) == [0.0] * 8
    s.set_element(x, 2, 2.5)
    s.set_element(x, 3, 1.25)
    s.set_element(x, 4, 2.25)
    view = s.to_host(x[::2])
    ok &= list(view) == [0.0, 2.5, 2.25, 0.0]
    total = s.reduce(x[::2], "sum")
    ok &= np.float32(total) == np.float32(4.75)
    s.sort(x[::2])
    ok &= list(s.to_host(x[::2])) == [0.0, 0.0, 2.25, 2.5]
    report("interactive session: view [0,2.5,2.25,0], sum 4.75, "
           "sort [0,0,2.25,2.5], exact", bool(ok))


# -- [PRIMARY] reduction / sort at scale --------------------------------------------


def _tree_sum(vals):
    vals = list(vals)
    while len(vals) > 1:
        half = len(vals) // 2
        nxt = [np.float32(vals[2 * i] + vals[2 * i + 1]) for i in range(half)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def test_reduce_and_sort_at_scale():
    rng = np.random.default_rng(300)
    s = Session(CFG_SCALE)
    data = rng.standard_normal(65536).astype(np.float32)
    t = s.from_host(data)
    got = s.reduce(t, "sum")
    sum_ok = np.float32(got).tobytes() == np.float32(_tree_sum(data)).tobytes()
    s.free(t)

    small = rng.standard_normal(1024).astype(np.float32)
    t1 = s.from_host(small)
    s.sort(t1)
    sort1k_ok = bool(np.array_equal(s.to_host(t1), np.sort(small)))
    s.free(t1)

    t2 = s.from_host(data)
    s.sort(t2)
    sort64k_ok = bool(np.array_equal(s.to_host(t2), np.sort(data)))
    s.free(t2)
    report("at scale: 64k float tree-sum bit-exact; 1k and 64k float sorts exact",
           sum_ok and sort1k_ok and sort64k_ok,
           f"sum={sum_ok} sort1k={sort1k_ok} sort64k={sort64k_ok}")


# -- [PRIMARY] throughput formula ----------------------------------------------------


def test_throughput_formula_reproduces_published():
    computed, published = published_add_crosscheck()
    gap = abs(computed - published) / published
    assert computed == throughput(64e6, 92, 300e6)
    report("throughput: 64M rows / 92 cycles * 300 MHz within 2% of 208e12",
           gap < 0.02, f"computed {computed:.4e}, gap {gap * 100:.2f}%")


# -- [PRIMARY] isolation property suite ------------------------------------------------


def test_isolation_properties():
    cfg = CFG_TINY
    rng = np.random.default_rng(400)
    sim = Simulator(cfg, strict_init=False)  # physical mode
    for xb in range(cfg.num_crossbars):
        sim.set_grid(xb, rng.random((cfg.rows_h, cfg.cols_w)) < 0.5)
    violations = []
    checked = 0
    for i in range(1000):
        op = random_microop(rng, cfg,
                            kinds=["xbmask", "rowmask", "write", "hlogic",
                                   "vlogic", "hlogic"])
        before = [sim.get_grid(xb) for xb in range(cfg.num_crossbars)]
        active_xb = set(sim.xb_mask.indices())
        active_rows = set(sim.row_mask.indices())
        sim.execute(op)
        checked += 1
        if isinstance(op, (CrossbarMask, RowMask)):
            continue
        after = [sim.get_grid(xb) for xb in range(cfg.num_crossbars)]
        for xb in range(cfg.num_crossbars):
            changed = before[xb] != after[xb]
            if xb not in active_xb:
                if changed.any():
                    violations.append((i, "masked-out crossbar changed"))
                continue
            rows_hit = set(np.nonzero(changed.any(axis=1))[0].tolist())
            if isinstance(op, (HLogic, Write)) and not rows_hit <= active_rows:
                violations.append((i, "masked-out row changed"))
            if isinstance(op, (HLogic, VLogic)) and op.gate in (2, 3):
                # NOR/NOT may only switch 1 -> 0 in physical mode
                rose = (~before[xb]) & after[xb] & changed
                if rose.any():
                    violations.append((i, "cell rose 0->1 under NOR/NOT"))
    report("isolation: 10^3 random ops; masked-out cells unchanged; physical "
           "mode never flips 0->1 via NOR/NOT",
           not violations, f"{checked} ops"
           + (f"; violations: {violations[:3]}" if violations else ""))


# -- [PRIMARY] CORDIC ---------------------------------------------------------------------


def test_cordic_accuracy():
    rng = np.random.default_rng(500)
    n = 2 ** 16
    angles = rng.uniform(-math.pi / 2, math.pi / 2, size=n).astype(np.float32)
    s = Session(CFG_SCALE)
    t = s.from_host(angles)
    sin_t, cos_t = cordic_sincos(s, t, iterations=24)
    err = max(float(np.max(np.abs(s.to_host(sin_t) - np.sin(angles, dtype=np.float32)))),
              float(np.max(np.abs(s.to_host(cos_t) - np.cos(angles, dtype=np.float32)))))
    report("CORDIC: 2^16 angles, 24 iterations, max |error| <= 1e-3",
           err <= 1e-3, f"max error {err:.2e}")
