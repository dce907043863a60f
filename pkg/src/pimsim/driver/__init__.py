"""Host driver: lowers warp/thread macro-instructions to micro-op streams.

`lower` is a pure function of (instruction, config); gate-level routine
bodies are cached per (config, opcode, dtype, dst, srcs) so identical
instructions produce byte-identical traces.
"""

from __future__ import annotations

from ..config import ArchConfig
from ..errors import UnsupportedInstruction
from ..isa import (
    MacroInstruction,
    MoveInterWarp,
    MoveIntraWarp,
    ReadInstr,
    RType,
    WriteInstr,
    validate_instr,
)
from ..microops import CrossbarMask, MicroOp, RangeMask, Read, RowMask, Write
from . import floatops, intops
from .emit import Emitter, Scratch
from .moves import lower_move
from .netlist import compile_circuit
from .oracle import host_rtype, host_rtype_array
from .replay import replay_check

__all__ = [
    "lower",
    "lower_move",
    "routine_budgets",
    "format_budgets",
    "replay_check",
    "host_rtype",
    "host_rtype_array",
]

_ROUTINE_CACHE: dict[tuple, tuple[MicroOp, ...]] = {}

# Netlist-compiled float routines, by opcode.
_FLOAT_CIRCUITS = {
    "add": "fadd",
    "subtract": "fsub",
    "multiply": "fmul",
    "divide": "fdiv",
    "lt": "flt",
    "le": "fle",
    "gt": "fgt",
    "ge": "fge",
    "eq": "feq",
    "sign": "fsign",
}


def lower(instr: MacroInstruction, cfg: ArchConfig) -> list[MicroOp]:
    """Lower one macro-instruction to its micro-op stream."""
    validate_instr(instr, cfg)
    if isinstance(instr, WriteInstr):
        return [
            CrossbarMask(instr.warp_mask),
            RowMask(instr.thread_mask),
            Write(instr.reg, instr.value),
        ]
    if isinstance(instr, ReadInstr):
        return [
            CrossbarMask(RangeMask(instr.warp, instr.warp, 1)),
            RowMask(RangeMask(instr.thread, instr.thread, 1)),
            Read(instr.reg),
        ]
    if isinstance(instr, (MoveIntraWarp, MoveInterWarp)):
        return lower_move(instr, cfg)
    key = (cfg, instr.opcode, instr.dtype, instr.dst, instr.srcs)
    body = _ROUTINE_CACHE.get(key)
    if body is None:
        body = tuple(_build_routine(instr.opcode, instr.dtype, instr.dst, instr.srcs, cfg))
        _ROUTINE_CACHE[key] = body
    return [CrossbarMask(instr.warp_mask), RowMask(instr.thread_mask), *body]


def _build_routine(opcode: str, dtype: str, dst: int, srcs: tuple[int, ...],
                   cfg: ArchConfig) -> list[MicroOp]:
    if dtype == "float32" and opcode in _FLOAT_CIRCUITS:
        b, outs = floatops.get_circuit(_FLOAT_CIRCUITS[opcode])
        return compile_circuit(b, outs, cfg, dst, list(srcs))
    em = Emitter(cfg)
    sc = Scratch(cfg)
    if opcode == "not":
        intops.lower_not(em, sc, dst, srcs[0])
    elif opcode == "and":
        intops.lower_and(em, sc, dst, *srcs)
    elif opcode == "or":
        intops.lower_or(em, sc, dst, *srcs)
    elif opcode == "xor":
        intops.lower_xor(em, sc, dst, *srcs)
    elif opcode == "zero":
        intops.lower_zero(em, sc, dst, srcs[0], dtype == "float32")
    elif opcode == "mux":
        intops.lower_mux(em, sc, dst, *srcs, dtype == "float32")
    elif dtype == "float32":
        if opcode == "negate":
            floatops.lower_fneg(em, sc, dst, srcs[0])
        elif opcode == "abs":
            floatops.lower_fabs(em, sc, dst, srcs[0])
        else:
            raise UnsupportedInstruction(f"no float32 lowering for {opcode!r}")
    elif opcode == "add":
        intops.lower_add(em, sc, dst, *srcs)
    elif opcode == "subtract":
        intops.lower_sub(em, sc, dst, *srcs)
    elif opcode == "multiply":
        intops.lower_mul(em, sc, dst, *srcs)
    elif opcode in ("divide", "modulo"):
        intops.lower_divmod(em, sc, dst, *srcs, opcode == "modulo")
    elif opcode == "negate":
        intops.lower_neg(em, sc, dst, srcs[0])
    elif opcode in ("lt", "le", "gt", "ge"):
        intops.lower_cmp_int(em, sc, dst, *srcs, opcode)
    elif opcode == "eq":
        intops.lower_eq_int(em, sc, dst, *srcs)
    elif opcode == "sign":
        intops.lower_sign_int(em, sc, dst, srcs[0])
    elif opcode == "abs":
        intops.lower_abs_int(em, sc, dst, srcs[0])
    else:
        raise UnsupportedInstruction(f"no int32 lowering for {opcode!r}")
    return em.ops


# -- routine budgets ---------------------------------------------------------

_MUX_BUDGET_PARALLEL = 96  # published cap for the mux building block
_BUDGET_CACHE: dict[ArchConfig, dict[tuple[str, str], int]] = {}


def routine_budgets(cfg: ArchConfig) -> dict[tuple[str, str], int]:
    """Documented worst-case stream lengths (mask ops included) per routine.

    Spec-pinned formulas cover the integer family; netlist-compiled float
    routines are deterministic per config, so their budgets are the measured
    stream lengths.
    """
    table = _BUDGET_CACHE.get(cfg)
    if table is not None:
        return table
    n = cfg.word_n
    add = 12 * n + 2  # 9N gate budget + 3N initializations + 2 mask ops
    table = {}
    for dtype in ("int32", "float32"):
        table[("not", dtype)] = 8  # aliased dst needs a staging copy
        table[("or", dtype)] = 6
        table[("and", dtype)] = 8
        table[("xor", dtype)] = 12
        table[("zero", dtype)] = 3 * n + 2
        table[("mux", dtype)] = _MUX_BUDGET_PARALLEL + 2
    for op in ("add", "subtract", "negate", "abs", "lt", "gt"):
        table[(op, "int32")] = add
    for op in ("le", "ge"):
        table[(op, "int32")] = add + 4
    table[("multiply", "int32")] = n * add + 4 * n
    table[("divide", "int32")] = n * (add + _MUX_BUDGET_PARALLEL) + 6 * n
    table[("modulo", "int32")] = table[("divide", "int32")]
    for op in ("eq", "sign"):
        table[(op, "int32")] = 3 * n + 2
    # Measured-once budgets for the float family (deterministic per config).
    mask = RangeMask(0, 0, 1)
    for op in ("add", "subtract", "multiply", "divide",
               "lt", "le", "gt", "ge", "eq", "sign", "negate", "abs"):
        nsrc = 1 if op in ("sign", "negate", "abs") else 2
        instr = RType(op, "float32", 0, tuple(range(1, 1 + nsrc)), mask, mask)
        table[(op, "float32")] = len(lower(instr, cfg))
    _BUDGET_CACHE[cfg] = table
    return table


def format_budgets(cfg: ArchConfig) -> str:
    """Render the RoutineBudget table (for the CLI's --budgets flag)."""
    table = routine_budgets(cfg)
    lines = [f"{'opcode':<10} {'dtype':<8} {'budget':>8}"]
    for (op, dtype), budget in sorted(table.items()):
        lines.append(f"{op:<10} {dtype:<8} {budget:>8}")
    return "\n".join(lines)
