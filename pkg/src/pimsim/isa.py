"""Warp/thread macro-ISA: instruction types and the textual assembly format.

A crossbar is a warp, each row a thread, each intra-partition index an N-bit
register. The textual format (one instruction per line) is the `lower` CLI
surface, e.g.:

    add int32 dst=2 srcs=0,1 warps=0:15:1 threads=0:1021:1
    write reg=3 value=0x00000008 warps=0:0:1 threads=4:4:1
    read warp=0 thread=4 reg=3
    movein warps=0:3:1 sreg=1 dreg=1 pairs=3:5,7:9
    movex warps=1:13:4 dest=2 sthread=0 dthread=0 sreg=1 dreg=1
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import ArchConfig
from .errors import UnsupportedInstruction
from .microops import RangeMask

__all__ = [
    "RTYPE_OPCODES",
    "RType",
    "MoveIntraWarp",
    "MoveInterWarp",
    "ReadInstr",
    "WriteInstr",
    "MacroInstruction",
    "parse_asm",
    "format_instr",
    "validate_instr",
]

RTYPE_OPCODES = (
    "add", "subtract", "multiply", "divide", "modulo", "negate",
    "lt", "le", "gt", "ge", "eq",
    "not", "and", "or", "xor",
    "sign", "zero", "abs", "mux",
)

_SRC_COUNT = {
    "add": 2, "subtract": 2, "multiply": 2, "divide": 2, "modulo": 2,
    "negate": 1, "lt": 2, "le": 2, "gt": 2, "ge": 2, "eq": 2,
    "not": 1, "and": 2, "or": 2, "xor": 2,
    "sign": 1, "zero": 1, "abs": 1, "mux": 3,
}


@dataclass(frozen=True)
class RType:
    opcode: str
    dtype: str  # int32 | float32
    dst: int
    srcs: tuple[int, ...]
    warp_mask: RangeMask
    thread_mask: RangeMask


@dataclass(frozen=True)
class MoveIntraWarp:
    pairs: tuple[tuple[int, int], ...]  # (src_thread, dst_thread)
    src_reg: int
    dst_reg: int
    warp_mask: RangeMask


@dataclass(frozen=True)
class MoveInterWarp:
    warp_mask: RangeMask  # source warps; step must be a power of 4
    warp_dest: int
    src_thread: int
    dst_thread: int
    src_reg: int
    dst_reg: int


@dataclass(frozen=True)
class ReadInstr:
    warp: int
    thread: int
    reg: int


@dataclass(frozen=True)
class WriteInstr:
    warp_mask: RangeMask
    thread_mask: RangeMask
    reg: int
    value: int


MacroInstruction = RType | MoveIntraWarp | MoveInterWarp | ReadInstr | WriteInstr


def validate_instr(instr: MacroInstruction, cfg: ArchConfig) -> None:
    if isinstance(instr, RType):
        if instr.opcode not in RTYPE_OPCODES:
            raise UnsupportedInstruction(f"unknown opcode {instr.opcode!r}")
        if instr.dtype not in ("int32", "float32"):
            raise UnsupportedInstruction(f"unknown dtype {instr.dtype!r}")
        if instr.opcode == "modulo" and instr.dtype != "int32":
            raise UnsupportedInstruction("modulo has integer support only")
        if len(instr.srcs) != _SRC_COUNT[instr.opcode]:
            raise UnsupportedInstruction(
                f"{instr.opcode} takes {_SRC_COUNT[instr.opcode]} sources"
            )
        for r in (instr.dst, *instr.srcs):
            if not 0 <= r < cfg.user_regs:
                raise UnsupportedInstruction(f"register {r} out of range")
        instr.warp_mask.check(cfg.num_crossbars, "warp mask")
        instr.thread_mask.check(cfg.h_user, "thread mask")
    elif isinstance(instr, MoveIntraWarp):
        for r in (instr.src_reg, instr.dst_reg):
            if not 0 <= r < cfg.user_regs:
                raise UnsupportedInstruction(f"register {r} out of range")
        instr.warp_mask.check(cfg.num_crossbars, "warp mask")
        for s, d in instr.pairs:
            if not (0 <= s < cfg.h_user and 0 <= d < cfg.h_user):
                raise UnsupportedInstruction("pair rows must avoid scratch rows")
    elif isinstance(instr, MoveInterWarp):
        for r in (instr.src_reg, instr.dst_reg):
            if not 0 <= r < cfg.user_regs:
                raise UnsupportedInstruction(f"register {r} out of range")
        instr.warp_mask.check(cfg.num_crossbars, "warp mask")
        step = instr.warp_mask.step
        if step > 0 and not _pow4(step):
            raise UnsupportedInstruction("inter-warp source step must be a power of 4")
        if not 0 <= instr.warp_dest < cfg.num_crossbars:
            raise UnsupportedInstruction("warp_dest out of range")
        if not (0 <= instr.src_thread < cfg.h_user and 0 <= instr.dst_thread < cfg.h_user):
            raise UnsupportedInstruction("thread out of range")
    elif isinstance(instr, ReadInstr):
        if not 0 <= instr.reg < cfg.user_regs:
            raise UnsupportedInstruction("register out of range")
        if not 0 <= instr.warp < cfg.num_crossbars:
            raise UnsupportedInstruction("warp out of range")
        if not 0 <= instr.thread < cfg.h_user:
            raise UnsupportedInstruction("thread out of range")
    elif isinstance(instr, WriteInstr):
        if not 0 <= instr.reg < cfg.user_regs:
            raise UnsupportedInstruction("register out of range")
        if not 0 <= instr.value < (1 << cfg.word_n):
            raise UnsupportedInstruction("value wider than N bits")
        instr.warp_mask.check(cfg.num_crossbars, "warp mask")
        instr.thread_mask.check(cfg.h_user, "thread mask")
    else:
        raise UnsupportedInstruction(f"unknown instruction {type(instr).__name__}")


def _pow4(v: int) -> bool:
    while v % 4 == 0:
        v //= 4
    return v == 1


# -- textual assembly ------------------------------------------------------


def _parse_mask(text: str) -> RangeMask:
    parts = text.split(":")
    if len(parts) == 1:
        v = int(parts[0])
        return RangeMask(v, v, 1)
    if len(parts) == 2:
        return RangeMask(int(parts[0]), int(parts[1]), 1)
    return RangeMask(int(parts[0]), int(parts[1]), int(parts[2]))


def _fmt_mask(mask: RangeMask) -> str:
    return f"{mask.start}:{mask.stop}:{mask.step}"


def parse_asm(text: str) -> list[MacroInstruction]:
    """Parse the textual macro-instruction list (one instruction per line)."""
    instrs: list[MacroInstruction] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            instrs.append(_parse_line(line))
        except (ValueError, KeyError) as exc:
            raise UnsupportedInstruction(f"line {lineno}: {exc}") from None
    return instrs


def _parse_line(line: str) -> MacroInstruction:
    tokens = line.split()
    head = tokens[0]
    kv = {}
    pos = []
    for tok in tokens[1:]:
        if "=" in tok:
            k, _, v = tok.partition("=")
            kv[k] = v
        else:
            pos.append(tok)
    if head in RTYPE_OPCODES:
        dtype = pos[0] if pos else kv.get("dtype", "int32")
        srcs = tuple(int(s) for s in kv["srcs"].split(","))
        return RType(
            head, dtype, int(kv["dst"]), srcs,
            _parse_mask(kv["warps"]), _parse_mask(kv["threads"]),
        )
    if head == "write":
        return WriteInstr(
            _parse_mask(kv["warps"]), _parse_mask(kv["threads"]),
            int(kv["reg"]), int(kv["value"], 0),
        )
    if head == "read":
        return ReadInstr(int(kv["warp"]), int(kv["thread"]), int(kv["reg"]))
    if head == "movein":
        pairs = tuple(
            tuple(int(x) for x in pair.split(":"))  # type: ignore[misc]
            for pair in kv["pairs"].split(",")
        )
        return MoveIntraWarp(pairs, int(kv["sreg"]), int(kv["dreg"]), _parse_mask(kv["warps"]))
    if head == "movex":
        return MoveInterWarp(
            _parse_mask(kv["warps"]), int(kv["dest"]),
            int(kv["sthread"]), int(kv["dthread"]),
            int(kv["sreg"]), int(kv["dreg"]),
        )
    raise KeyError(f"unknown instruction {head!r}")


def format_instr(instr: MacroInstruction) -> str:
    if isinstance(instr, RType):
        return (
            f"{instr.opcode} {instr.dtype} dst={instr.dst} "
            f"srcs={','.join(map(str, instr.srcs))} "
            f"warps={_fmt_mask(instr.warp_mask)} threads={_fmt_mask(instr.thread_mask)}"
        )
    if isinstance(instr, WriteInstr):
        return (
            f"write reg={instr.reg} value={hex(instr.value)} "
            f"warps={_fmt_mask(instr.warp_mask)} threads={_fmt_mask(instr.thread_mask)}"
        )
    if isinstance(instr, ReadInstr):
        return f"read warp={instr.warp} thread={instr.thread} reg={instr.reg}"
    if isinstance(instr, MoveIntraWarp):
        pairs = ",".join(f"{s}:{d}" for s, d in instr.pairs)
        return (
            f"movein warps={_fmt_mask(instr.warp_mask)} sreg={instr.src_reg} "
            f"dreg={instr.dst_reg} pairs={pairs}"
        )
    pairs = instr  # MoveInterWarp
    return (
        f"movex warps={_fmt_mask(pairs.warp_mask)} dest={pairs.warp_dest} "
        f"sthread={pairs.src_thread} dthread={pairs.dst_thread} "
        f"sreg={pairs.src_reg} dreg={pairs.dst_reg}"
    )
