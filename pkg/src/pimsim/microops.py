"""The seven micro-operation kinds and their bit-exact 64-bit encoding.

Canonical layout (documented in docs/microop_format.md): bits [63:61] hold the
kind tag (0=CrossbarMask, 1=RowMask, 2=Read, 3=Write, 4=HLogic, 5=VLogic,
6=Move); the remaining fields are packed most-significant-first in the order
they are listed in each variant, each at its width for the configured
(h, w, N, num_crossbars); unused low bits are zero and must be zero to decode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import IntEnum
from typing import Iterable, Union

from .config import ArchConfig, ColumnAddress
from .errors import DecodeError, EncodeError

__all__ = [
    "Gate",
    "RangeMask",
    "CrossbarMask",
    "RowMask",
    "Read",
    "Write",
    "HLogic",
    "VLogic",
    "Move",
    "MicroOp",
    "Layout",
    "encode",
    "decode",
    "expand_mask",
    "mask_length",
    "format_trace",
    "parse_trace",
]


class Gate(IntEnum):
    INIT0 = 0
    INIT1 = 1
    NOT = 2
    NOR = 3


@dataclass(frozen=True)
class RangeMask:
    """The set {start, start+step, ..., stop}; step=0 only for singletons."""

    start: int
    stop: int
    step: int

    def check(self, limit: int, what: str = "mask") -> None:
        if self.start < 0 or self.stop < 0 or self.step < 0:
            raise EncodeError(f"{what}: negative field")
        if self.start > self.stop:
            raise EncodeError(f"{what}: start {self.start} > stop {self.stop}")
        if self.step == 0:
            if self.start != self.stop:
                raise EncodeError(f"{what}: step 0 with start != stop")
        elif (self.stop - self.start) % self.step != 0:
            raise EncodeError(f"{what}: step {self.step} does not divide stop-start")
        if self.stop >= limit:
            raise EncodeError(f"{what}: stop {self.stop} >= limit {limit}")

    def indices(self) -> range:
        step = self.step if self.step > 0 else 1
        return range(self.start, self.stop + 1, step)

    def __len__(self) -> int:
        return len(self.indices())


def expand_mask(mask: RangeMask, limit: int) -> list[int]:
    """Expand a RangeMask to its ordered index list, validating bounds."""
    mask.check(limit)
    return list(mask.indices())


def mask_length(mask: RangeMask) -> int:
    return len(mask)


@dataclass(frozen=True)
class CrossbarMask:
    mask: RangeMask


@dataclass(frozen=True)
class RowMask:
    mask: RangeMask


@dataclass(frozen=True)
class Read:
    intra_index: int


@dataclass(frozen=True)
class Write:
    intra_index: int
    data: int


@dataclass(frozen=True)
class HLogic:
    gate: Gate
    in_a: ColumnAddress
    in_b: ColumnAddress
    out: ColumnAddress
    p_end: int
    p_step: int


@dataclass(frozen=True)
class VLogic:
    gate: Gate  # INIT0 / INIT1 / NOT only
    row_in: int
    row_out: int
    intra_index: int


@dataclass(frozen=True)
class Move:
    xb_dest: int
    src_row: int
    dst_row: int
    src_index: int
    dst_index: int


MicroOp = Union[CrossbarMask, RowMask, Read, Write, HLogic, VLogic, Move]

_TAGS = {CrossbarMask: 0, RowMask: 1, Read: 2, Write: 3, HLogic: 4, VLogic: 5, Move: 6}
_KINDS = {v: k for k, v in _TAGS.items()}


def _bits_for(limit: int) -> int:
    return max(1, math.ceil(math.log2(limit))) if limit > 1 else 1


class Layout:
    """Field widths for one ArchConfig; asserts the HLogic width identity."""

    def __init__(self, cfg: ArchConfig):
        self.cfg = cfg
        self.xb_bits = _bits_for(cfg.num_crossbars)
        self.row_bits = _bits_for(cfg.rows_h)
        self.part_bits = _bits_for(cfg.word_n)
        self.intra_bits = _bits_for(cfg.partition_width)
        self.col_bits = self.part_bits + self.intra_bits
        self.word_bits = cfg.word_n
        self.hlogic_bits = 2 + 3 * self.col_bits + 2 * self.part_bits
        # Width accounting invariant from the spec: 2 + 3*log2(w) + 2*log2(N).
        w, n = cfg.cols_w, cfg.word_n
        if w & (w - 1) == 0 and n & (n - 1) == 0:
            expect = 2 + 3 * int(math.log2(w)) + 2 * int(math.log2(n))
            if self.hlogic_bits != expect:
                raise EncodeError("HLogic width accounting failed")
        widths = {
            0: 3 * self.xb_bits,
            1: 3 * self.row_bits,
            2: self.intra_bits,
            3: self.intra_bits + self.word_bits,
            4: self.hlogic_bits,
            5: 2 + 2 * self.row_bits + self.intra_bits,
            6: self.xb_bits + 2 * self.row_bits + 2 * self.intra_bits,
        }
        for tag, width in widths.items():
            if width > 61:
                raise EncodeError(f"payload for tag {tag} needs {width} > 61 bits")
        self.payload_bits = widths


class _Packer:
    def __init__(self) -> None:
        self.value = 0
        self.width = 0

    def put(self, value: int, width: int, what: str) -> None:
        if not 0 <= value < (1 << width):
            raise EncodeError(f"{what}: value {value} does not fit in {width} bits")
        self.value = (self.value << width) | value
        self.width += width


class _Unpacker:
    def __init__(self, word: int):
        self.word = word
        self.pos = 61  # next unread bit boundary (below the tag)

    def take(self, width: int) -> int:
        self.pos -= width
        return (self.word >> self.pos) & ((1 << width) - 1)


def _check_op(op: MicroOp, layout: Layout, err: type) -> None:
    """Validate variant invariants (shared by encode and decode)."""
    cfg = layout.cfg
    if isinstance(op, CrossbarMask):
        try:
            op.mask.check(cfg.num_crossbars, "crossbar mask")
        except EncodeError as exc:
            raise err(str(exc)) from None
    elif isinstance(op, RowMask):
        try:
            op.mask.check(cfg.rows_h, "row mask")
        except EncodeError as exc:
            raise err(str(exc)) from None
    elif isinstance(op, Read):
        if not 0 <= op.intra_index < cfg.partition_width:
            raise err("read: intra_index out of range")
    elif isinstance(op, Write):
        if not 0 <= op.intra_index < cfg.partition_width:
            raise err("write: intra_index out of range")
        if not 0 <= op.data < (1 << cfg.word_n):
            raise err("write: data wider than N bits")
    elif isinstance(op, HLogic):
        for name, col in (("in_a", op.in_a), ("in_b", op.in_b), ("out", op.out)):
            if not 0 <= col.partition < cfg.word_n:
                raise err(f"hlogic {name}: partition out of range")
            if not 0 <= col.intra_index < cfg.partition_width:
                raise err(f"hlogic {name}: intra_index out of range")
        if op.in_a.partition > op.in_b.partition:
            raise err("hlogic: in_a.partition > in_b.partition")
        if not 0 <= op.p_end < cfg.word_n:
            raise err("hlogic: p_end out of range")
        if op.p_step == 0:
            if op.p_end != op.out.partition:
                raise err("hlogic: p_step 0 requires p_end == out.partition")
        else:
            if op.p_end < op.out.partition:
                raise err("hlogic: p_end < out.partition")
            if (op.p_end - op.out.partition) % op.p_step != 0:
                raise err("hlogic: p_step does not divide p_end - out.partition")
    elif isinstance(op, VLogic):
        if op.gate not in (Gate.INIT0, Gate.INIT1, Gate.NOT):
            raise err("vlogic: gate must be INIT0/INIT1/NOT")
        if not 0 <= op.row_in < cfg.rows_h or not 0 <= op.row_out < cfg.rows_h:
            raise err("vlogic: row out of range")
        if not 0 <= op.intra_index < cfg.partition_width:
            raise err("vlogic: intra_index out of range")
    elif isinstance(op, Move):
        if not 0 <= op.xb_dest < cfg.num_crossbars:
            raise err("move: xb_dest out of range")
        if not 0 <= op.src_row < cfg.rows_h or not 0 <= op.dst_row < cfg.rows_h:
            raise err("move: row out of range")
        if not 0 <= op.src_index < cfg.partition_width:
            raise err("move: index out of range")
        if not 0 <= op.dst_index < cfg.partition_width:
            raise err("move: index out of range")
    else:
        raise err(f"unknown micro-op type {type(op).__name__}")


def encode(op: MicroOp, layout: Layout) -> int:
    """Encode a MicroOp to its 64-bit word."""
    _check_op(op, layout, EncodeError)
    pk = _Packer()
    tag = _TAGS[type(op)]
    pk.put(tag, 3, "tag")
    if isinstance(op, (CrossbarMask, RowMask)):
        bits = layout.xb_bits if isinstance(op, CrossbarMask) else layout.row_bits
        pk.put(op.mask.start, bits, "start")
        pk.put(op.mask.stop, bits, "stop")
        pk.put(op.mask.step, bits, "step")
    elif isinstance(op, Read):
        pk.put(op.intra_index, layout.intra_bits, "intra_index")
    elif isinstance(op, Write):
        pk.put(op.intra_index, layout.intra_bits, "intra_index")
        pk.put(op.data, layout.word_bits, "data")
    elif isinstance(op, HLogic):
        pk.put(int(op.gate), 2, "gate")
        for col in (op.in_a, op.in_b, op.out):
            pk.put(col.partition, layout.part_bits, "partition")
            pk.put(col.intra_index, layout.intra_bits, "intra_index")
        pk.put(op.p_end, layout.part_bits, "p_end")
        pk.put(op.p_step, layout.part_bits, "p_step")
    elif isinstance(op, VLogic):
        pk.put(int(op.gate), 2, "gate")
        pk.put(op.row_in, layout.row_bits, "row_in")
        pk.put(op.row_out, layout.row_bits, "row_out")
        pk.put(op.intra_index, layout.intra_bits, "intra_index")
    elif isinstance(op, Move):
        pk.put(op.xb_dest, layout.xb_bits, "xb_dest")
        pk.put(op.src_row, layout.row_bits, "src_row")
        pk.put(op.dst_row, layout.row_bits, "dst_row")
        pk.put(op.src_index, layout.intra_bits, "src_index")
        pk.put(op.dst_index, layout.intra_bits, "dst_index")
    pad = 64 - pk.width
    return (pk.value << pad) & 0xFFFFFFFFFFFFFFFF


def decode(word: int, layout: Layout) -> MicroOp:
    """Decode a 64-bit word; rejects unknown tags, bad fields, nonzero padding."""
    if not 0 <= word < (1 << 64):
        raise DecodeError("word out of 64-bit range")
    tag = word >> 61
    if tag not in _KINDS:
        raise DecodeError(f"unknown micro-op kind (tag {tag})")
    up = _Unpacker(word)
    if tag == 0:
        bits = layout.xb_bits
        op: MicroOp = CrossbarMask(RangeMask(up.take(bits), up.take(bits), up.take(bits)))
    elif tag == 1:
        bits = layout.row_bits
        op = RowMask(RangeMask(up.take(bits), up.take(bits), up.take(bits)))
    elif tag == 2:
        op = Read(up.take(layout.intra_bits))
    elif tag == 3:
        op = Write(up.take(layout.intra_bits), up.take(layout.word_bits))
    elif tag == 4:
        gate = Gate(up.take(2))
        cols = [
            ColumnAddress(up.take(layout.part_bits), up.take(layout.intra_bits))
            for _ in range(3)
        ]
        op = HLogic(gate, cols[0], cols[1], cols[2], up.take(layout.part_bits), up.take(layout.part_bits))
    elif tag == 5:
        gval = up.take(2)
        if gval > 2:
            raise DecodeError("vlogic: gate 3 (NOR) is invalid")
        op = VLogic(Gate(gval), up.take(layout.row_bits), up.take(layout.row_bits), up.take(layout.intra_bits))
    else:
        op = Move(
            up.take(layout.xb_bits),
            up.take(layout.row_bits),
            up.take(layout.row_bits),
            up.take(layout.intra_bits),
            up.take(layout.intra_bits),
        )
    if word & ((1 << up.pos) - 1):
        raise DecodeError("nonzero padding bits")
    _check_op(op, layout, DecodeError)
    return op


def format_trace(words: Iterable[int]) -> str:
    """Trace file format: one lowercase 16-hex-digit word per line."""
    return "".join(f"{w:016x}\n" for w in words)


def parse_trace(text: str) -> list[int]:
    words = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if len(line) != 16:
            raise DecodeError(f"trace line {lineno}: expected 16 hex digits")
        try:
            words.append(int(line, 16))
        except ValueError as exc:
            raise DecodeError(f"trace line {lineno}: {exc}") from None
    return words
