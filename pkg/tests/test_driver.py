"""Host-driver lowering: replay vs oracle, budgets, moves, assembly."""

import numpy as np
import pytest

from pimsim.config import ArchConfig
from pimsim.driver import (
    format_budgets,
    host_rtype,
    host_rtype_array,
    lower,
    replay_check,
    routine_budgets,
)
from pimsim.driver.replay import load_words, read_words
from pimsim.errors import InvalidMove, PimError, UnsupportedInstruction
from pimsim.isa import (
    RTYPE_OPCODES,
    _SRC_COUNT,
    MoveInterWarp,
    MoveIntraWarp,
    ReadInstr,
    RType,
    WriteInstr,
    format_instr,
    parse_asm,
)
from pimsim.microops import (
    CrossbarMask,
    Move,
    RangeMask,
    Read,
    RowMask,
    VLogic,
    Write,
)
from pimsim.simulator import Simulator
from conftest import CFG_SMALL

CFG = CFG_SMALL
FULL_W = RangeMask(0, CFG.num_crossbars - 1, 1)
FULL_T = RangeMask(0, CFG.h_user - 1, 1)

ALL_OPS = [(op, dtype)
           for op in RTYPE_OPCODES
           for dtype in ("int32", "float32")
           if not (op == "modulo" and dtype == "float32")]


@pytest.mark.parametrize("op,dtype", ALL_OPS)
def test_replay_all_routines(op, dtype):
    nsrc = _SRC_COUNT[op]
    instr = RType(op, dtype, 5, tuple(range(nsrc)), FULL_W, FULL_T)
    assert replay_check(instr, CFG, seed=3) is None


@pytest.mark.parametrize("op,dtype", ALL_OPS)
def test_replay_aliased_dst(op, dtype):
    nsrc = _SRC_COUNT[op]
    instr = RType(op, dtype, 0, tuple(range(nsrc)), FULL_W, FULL_T)
    assert replay_check(instr, CFG, seed=4) is None


@pytest.mark.parametrize("op,dtype", ALL_OPS)
def test_stream_within_budget(op, dtype):
    budgets = routine_budgets(CFG)
    nsrc = _SRC_COUNT[op]
    instr = RType(op, dtype, 5, tuple(range(nsrc)), FULL_W, FULL_T)
    assert len(lower(instr, CFG)) <= budgets[(op, dtype)]


def test_budget_table_contents():
    budgets = routine_budgets(CFG)
    n = CFG.word_n
    assert budgets[("add", "int32")] == 12 * n + 2
    assert budgets[("multiply", "int32")] == n * (12 * n + 2) + 4 * n
    assert budgets[("divide", "int32")] == budgets[("modulo", "int32")]
    text = format_budgets(CFG)
    assert "add" in text and "float32" in text


def test_lowering_deterministic():
    instr = RType("add", "int32", 2, (0, 1), FULL_W, FULL_T)
    assert lower(instr, CFG) == lower(instr, CFG)


def test_checked_mode_clean():
    """Every lowered stream must run in checked mode from a written state."""
    sim = Simulator(CFG, strict_init=True)
    rng = np.random.default_rng(9)
    for reg in range(3):
        load_words(sim, reg, rng.integers(0, 1 << 32, size=(CFG.num_crossbars,
                   CFG.rows_h), dtype=np.uint64).astype(np.uint32))
    for op, dtype in ALL_OPS:
        instr = RType(op, dtype, 2, tuple(range(_SRC_COUNT[op])), FULL_W, FULL_T)
        sim.run_ops(lower(instr, CFG))  # UninitializedOutput would fail here


def test_write_read_lowering_shape():
    w = WriteInstr(RangeMask(0, 3, 1), RangeMask(1, 5, 2), 4, 0xABC)
    ops = lower(w, CFG)
    assert [type(o) for o in ops] == [CrossbarMask, RowMask, Write]
    r = ReadInstr(2, 5, 4)
    ops = lower(r, CFG)
    assert [type(o) for o in ops] == [CrossbarMask, RowMask, Read]
    assert len(ops[0].mask) == 1 and len(ops[1].mask) == 1


def test_move_intra_warp_lowering():
    instr = MoveIntraWarp(((3, 5), (7, 9), (2, 2)), 1, 1, RangeMask(0, 2, 1))
    ops = lower(instr, CFG)
    # 2 live pairs (the (2,2) same-reg pair is a no-op): 4 VLogic each.
    assert sum(isinstance(o, VLogic) for o in ops) == 8
    sim = Simulator(CFG)
    sim.run_ops(lower(WriteInstr(RangeMask(0, 3, 1), RangeMask(3, 3, 1), 1, 77), CFG))
    sim.run_ops(lower(WriteInstr(RangeMask(0, 3, 1), RangeMask(7, 7, 1), 1, 88), CFG))
    sim.run_ops(ops)
    words = read_words(sim, 1)
    assert words[0, 5] == 77 and words[2, 9] == 88
    assert words[3, 5] == 0  # warp 3 outside the mask: untouched


def test_move_intra_warp_cross_register():
    instr = MoveIntraWarp(((4, 4),), 0, 2, RangeMask(1, 1, 1))
    sim = Simulator(CFG)
    sim.run_ops(lower(WriteInstr(RangeMask(1, 1, 1), RangeMask(4, 4, 1), 0, 123), CFG))
    sim.run_ops(lower(instr, CFG))
    assert read_words(sim, 2)[1, 4] == 123
    assert read_words(sim, 0)[1, 4] == 123  # source preserved


def test_move_intra_warp_duplicate_dst_rejected():
    instr = MoveIntraWarp(((1, 5), (2, 5)), 0, 0, RangeMask(0, 0, 1))
    with pytest.raises(InvalidMove):
        lower(instr, CFG)


def test_move_inter_warp_lowering():
    instr = MoveInterWarp(RangeMask(0, 0, 1), 3, 2, 6, 1, 4)
    ops = lower(instr, CFG)
    assert [type(o) for o in ops] == [CrossbarMask, Move]
    sim = Simulator(CFG)
    sim.run_ops(lower(WriteInstr(RangeMask(0, 0, 1), RangeMask(2, 2, 1), 1, 9), CFG))
    sim.run_ops(ops)
    assert read_words(sim, 4)[3, 6] == 9


def test_move_inter_warp_descending():
    instr = MoveInterWarp(RangeMask(3, 3, 1), 0, 1, 1, 2, 2)
    sim = Simulator(CFG)
    sim.run_ops(lower(WriteInstr(RangeMask(3, 3, 1), RangeMask(1, 1, 1), 2, 42), CFG))
    sim.run_ops(lower(instr, CFG))
    assert read_words(sim, 2)[0, 1] == 42


def test_move_inter_warp_errors():
    with pytest.raises(InvalidMove):
        lower(MoveInterWarp(RangeMask(0, 1, 1), 1, 0, 0, 0, 0), CFG)  # overlap
    with pytest.raises(InvalidMove):
        lower(MoveInterWarp(RangeMask(2, 3, 1), 3, 0, 0, 0, 0), CFG)  # range
    with pytest.raises(UnsupportedInstruction):
        lower(MoveInterWarp(RangeMask(0, 2, 2), 3, 0, 0, 0, 0), CFG)  # step not 4^k


def test_instruction_validation_errors():
    with pytest.raises(UnsupportedInstruction):
        lower(RType("bogus", "int32", 0, (1,), FULL_W, FULL_T), CFG)
    with pytest.raises(UnsupportedInstruction):
        lower(RType("modulo", "float32", 0, (1, 2), FULL_W, FULL_T), CFG)
    with pytest.raises(UnsupportedInstruction):
        lower(RType("add", "int32", 99, (0, 1), FULL_W, FULL_T), CFG)
    with pytest.raises(UnsupportedInstruction):
        lower(RType("add", "int32", 0, (1,), FULL_W, FULL_T), CFG)  # arity
    with pytest.raises(PimError):
        # thread mask may not reach the scratch rows
        lower(WriteInstr(FULL_W, RangeMask(0, CFG.rows_h - 1, 1), 0, 0), CFG)


def test_asm_roundtrip():
    text = """
    # comment line
    add int32 dst=2 srcs=0,1 warps=0:3:1 threads=0:31:1
    write reg=3 value=0x8 warps=0:0:1 threads=4:4:1
    read warp=0 thread=4 reg=3
    movein warps=0:3:1 sreg=1 dreg=1 pairs=3:5,7:9
    movex warps=1:1:1 dest=2 sthread=0 dthread=0 sreg=1 dreg=1
    """
    instrs = parse_asm(text)
    assert len(instrs) == 5
    again = parse_asm("\n".join(format_instr(i) for i in instrs))
    assert again == instrs


def test_host_oracle_spot_values():
    def word(x):
        return x & 0xFFFFFFFF

    assert host_rtype("add", "int32", (word(2**31 - 1), 1)) == word(-2**31)
    assert host_rtype("divide", "int32", (7, 0)) == 0xFFFFFFFF  # sentinel
    assert host_rtype("modulo", "int32", (word(-7), 2)) == word(-1)  # trunc
    assert host_rtype("divide", "int32", (word(-7), 2)) == word(-3)
    one = 0x3F800000
    assert host_rtype("add", "float32", (one, one)) == 0x40000000
    inf = 0x7F800000
    assert host_rtype("subtract", "float32", (inf, inf)) == 0x7FC00000  # QNAN
    assert host_rtype("lt", "float32", (0x7FC00000, one)) == 0  # NaN compares false
    assert host_rtype("eq", "float32", (0x80000000, 0x00000000)) == 1  # -0 == +0


def test_oracle_array_matches_scalar():
    rng = np.random.default_rng(17)
    a = rng.integers(0, 1 << 32, size=64, dtype=np.uint64).astype(np.uint32)
    b = rng.integers(0, 1 << 32, size=64, dtype=np.uint64).astype(np.uint32)
    for op in ("add", "multiply", "divide", "lt", "xor"):
        arr = host_rtype_array(op, "int32", [a, b])
        for i in range(8):
            assert arr[i] == host_rtype(op, "int32", (int(a[i]), int(b[i])))
