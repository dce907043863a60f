"""Half-gate opcode derivation, transistor selects, and section validation.

Per-partition opcodes are 3-bit values: bit 2 enables the InA input decoder,
bit 1 the InB input decoder, bit 0 the output decoder (decoder-table reading order,
e.g. 0b110 = "(InA, InB) -> ?").
"""

from __future__ import annotations

from .errors import InvalidOperation
from .microops import Gate, HLogic

__all__ = [
    "INA",
    "INB",
    "OUT",
    "gate_count",
    "gate_direction",
    "derive_opcodes",
    "derive_transistors",
    "validate_sections",
    "check_hlogic",
]

INA = 0b100
INB = 0b010
OUT = 0b001


def gate_count(op: HLogic) -> int:
    """Number of gates in the pattern (1 when p_step == 0)."""
    if op.p_step == 0:
        return 1
    return (op.p_end - op.out.partition) // op.p_step + 1


def gate_direction(op: HLogic) -> str:
    """'out-right' when in_a.partition <= out.partition, else 'out-left'."""
    return "out-right" if op.in_a.partition <= op.out.partition else "out-left"


def derive_opcodes(op: HLogic, n: int) -> list[int]:
    """Per-partition 3-bit opcodes for the pattern; the opcodes repeat
    periodically at stride p_step starting from the first gate."""
    opcodes = [0] * n
    step = op.p_step
    for g in range(gate_count(op)):
        pa = op.in_a.partition + g * step
        pb = op.in_b.partition + g * step
        po = op.out.partition + g * step
        for p in (pa, pb, po):
            if not 0 <= p < n:
                raise InvalidOperation(
                    f"gate {g}: operand partition {p} out of range [0, {n})"
                )
        if op.gate in (Gate.NOT, Gate.NOR):
            opcodes[pa] |= INA
        if op.gate == Gate.NOR:
            opcodes[pb] |= INB
        opcodes[po] |= OUT
    return opcodes


def derive_transistors(opcodes: list[int], direction: str) -> list[bool]:
    """N-1 select bits; True = conducting. Out-right: transistor i is
    non-conducting iff partition i has Out or partition i+1 has InA;
    out-left is the mirrored rule."""
    n = len(opcodes)
    selects = []
    for i in range(n - 1):
        if direction == "out-right":
            noncond = bool(opcodes[i] & OUT) or bool(opcodes[i + 1] & INA)
        else:
            noncond = bool(opcodes[i] & INA) or bool(opcodes[i + 1] & OUT)
        selects.append(not noncond)
    return selects


def _sections(selects: list[bool]) -> list[tuple[int, int]]:
    """Maximal runs [lo, hi] of partitions joined by conducting transistors."""
    runs = []
    lo = 0
    for i, conducting in enumerate(selects):
        if not conducting:
            runs.append((lo, i))
            lo = i + 1
    runs.append((lo, len(selects)))
    return runs


def validate_sections(opcodes: list[int], selects: list[bool], gate: Gate) -> None:
    """Each section with any non-000 opcode must contain exactly one full gate:
    one Out bit, and for NOR one InA and one InB (NOT: one InA; INITx: none)."""
    want_ina = 1 if gate in (Gate.NOT, Gate.NOR) else 0
    want_inb = 1 if gate == Gate.NOR else 0
    for lo, hi in _sections(selects):
        ina = inb = out = 0
        for p in range(lo, hi + 1):
            code = opcodes[p]
            ina += bool(code & INA)
            inb += bool(code & INB)
            out += bool(code & OUT)
        if ina == inb == out == 0:
            continue
        if out != 1 or ina != want_ina or inb != want_inb:
            raise InvalidOperation(
                f"section [{lo}, {hi}] does not contain exactly one full "
                f"{gate.name} gate (InA={ina}, InB={inb}, Out={out})"
            )


def check_hlogic(op: HLogic, n: int) -> None:
    """Full pattern validation: opcode derivation + section check."""
    opcodes = derive_opcodes(op, n)
    selects = derive_transistors(opcodes, gate_direction(op))
    validate_sections(opcodes, selects, op.gate)
