"""Combinational NOR-netlist builder, evaluator, and micro-op compiler.

Deep routines (the IEEE-754 float family) are described as NOR/NOT dataflow
graphs over word inputs, then scheduled onto scratch-register cells and
serialized to checked-mode-clean HLogic streams.

Hash-consing plus constant folding keep graphs small; the host evaluator
runs every node as a lane-bitset (one Python int, bit l = lane l), which
gives a fast differential oracle for circuit validation.

Cell allocation honors the half-gate section rule for serial gates:
NOR output partition >= both input partitions (or both inputs
co-partitioned); NOT is direction-free. When no legal output cell exists,
both operands are re-staged to a common partition with double-NOTs.
"""

from __future__ import annotations

from ..config import ArchConfig
from ..errors import InvalidOperation
from ..microops import Gate
from .emit import Emitter

__all__ = ["Builder", "evaluate", "compile_circuit"]

C0, C1, IN, NOTK, NORK = 0, 1, 2, 3, 4


class Builder:
    """Hash-consed NOR/NOT graph; node ids are ints, 0 = const0, 1 = const1."""

    def __init__(self) -> None:
        self.kind: list[int] = [C0, C1]
        self.x: list[int] = [0, 0]
        self.y: list[int] = [0, 0]
        self._cache: dict[tuple[int, int, int], int] = {}

    ZERO = 0
    ONE = 1

    def _cons(self, kind: int, x: int, y: int) -> int:
        key = (kind, x, y)
        nid = self._cache.get(key)
        if nid is None:
            nid = len(self.kind)
            self.kind.append(kind)
            self.x.append(x)
            self.y.append(y)
            self._cache[key] = nid
        return nid

    def inp(self, slot: int, bit: int) -> int:
        return self._cons(IN, slot, bit)

    def const(self, v: int) -> int:
        return self.ONE if v else self.ZERO

    def not_(self, a: int) -> int:
        if a == self.ZERO:
            return self.ONE
        if a == self.ONE:
            return self.ZERO
        if self.kind[a] == NOTK:
            return self.x[a]
        return self._cons(NOTK, a, a)

    def nor(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == self.ONE or b == self.ONE:
            return self.ZERO
        if a == self.ZERO:
            if b == self.ZERO:
                return self.ONE
            return self.not_(b)
        if a == b:
            return self.not_(a)
        return self._cons(NORK, a, b)

    def or_(self, a: int, b: int) -> int:
        return self.not_(self.nor(a, b))

    def and_(self, a: int, b: int) -> int:
        return self.nor(self.not_(a), self.not_(b))

    def xor(self, a: int, b: int) -> int:
        n1 = self.nor(a, b)
        return self.not_(self.nor(self.nor(a, n1), self.nor(b, n1)))

    def mux(self, s: int, a: int, b: int) -> int:
        """s ? a : b."""
        return self.nor(self.nor(a, self.not_(s)), self.nor(b, s))

    # -- bit-vector helpers (LSB-first lists of node ids) --------------------

    def bv_in(self, slot: int, width: int) -> list[int]:
        return [self.inp(slot, i) for i in range(width)]

    def bv_const(self, value: int, width: int) -> list[int]:
        return [self.const((value >> i) & 1) for i in range(width)]

    def bv_not(self, a: list[int]) -> list[int]:
        return [self.not_(v) for v in a]

    def bv_and(self, a, b):
        return [self.and_(p, q) for p, q in zip(a, b)]

    def bv_or(self, a, b):
        return [self.or_(p, q) for p, q in zip(a, b)]

    def bv_xor(self, a, b):
        return [self.xor(p, q) for p, q in zip(a, b)]

    def bv_mux(self, s: int, a, b):
        return [self.mux(s, p, q) for p, q in zip(a, b)]

    def bv_add(self, a, b, cin: int = 0) -> tuple[list[int], int]:
        """Ripple-carry sum of equal-width vectors; returns (sum, cout)."""
        c = self.const(cin) if cin in (0, 1) else cin
        out = []
        for p, q in zip(a, b):
            n1 = self.nor(p, q)
            n4 = self.nor(self.nor(p, n1), self.nor(q, n1))
            n5 = self.nor(n4, c)
            out.append(self.nor(self.nor(n4, n5), self.nor(c, n5)))
            c = self.nor(n1, n5)
        return out, c

    def bv_sub(self, a, b) -> tuple[list[int], int]:
        """a - b; cout = 1 iff a >= b (unsigned)."""
        return self.bv_add(a, self.bv_not(b), cin=1)

    def lt_u(self, a, b) -> int:
        """Unsigned a < b."""
        _, cout = self.bv_sub(a, b)
        return self.not_(cout)

    def or_reduce(self, a: list[int]) -> int:
        """Balanced OR tree."""
        cur = list(a)
        while len(cur) > 1:
            nxt = [self.or_(cur[i], cur[i + 1]) for i in range(0, len(cur) - 1, 2)]
            if len(cur) % 2:
                nxt.append(cur[-1])
            cur = nxt
        return cur[0] if cur else self.ZERO

    def and_reduce(self, a: list[int]) -> int:
        return self.not_(self.or_reduce(self.bv_not(a)))

    def eq_zero(self, a: list[int]) -> int:
        return self.not_(self.or_reduce(a))

    def bv_eq(self, a, b) -> int:
        return self.eq_zero(self.bv_xor(a, b))

    def shr_jam(self, a: list[int], amt: list[int]) -> list[int]:
        """Logical right shift by the unsigned amount, ORing every dropped
        bit into bit 0 (sticky jam). Shift counts >= width drain fully."""
        cur = list(a)
        w = len(cur)
        for i, s in enumerate(amt):
            d = 1 << i
            if d >= w:
                # Everything would be dropped: jam the whole value.
                allv = self.or_reduce(cur)
                stay0 = cur[0]
                cur = [self.mux(s, self.ZERO, c) for c in cur]
                cur[0] = self.mux(s, allv, stay0)
                continue
            dropped = self.or_reduce(cur[:d])
            shifted = cur[d:] + [self.ZERO] * d
            shifted[0] = self.or_(shifted[0], dropped)
            cur = self.bv_mux(s, shifted, cur)
        return cur

    def shl(self, a: list[int], amt: list[int]) -> list[int]:
        """Logical left shift by the unsigned amount (bits drop off the top)."""
        cur = list(a)
        w = len(cur)
        for i, s in enumerate(amt):
            d = 1 << i
            if d >= w:
                cur = [self.mux(s, self.ZERO, c) for c in cur]
                continue
            shifted = [self.ZERO] * d + cur[:-d]
            cur = self.bv_mux(s, shifted, cur)
        return cur

    def clz(self, a: list[int]) -> list[int]:
        """Count of leading zeros of a power-of-two-width vector, as a
        (log2(w)+1)-bit vector (w when a == 0)."""
        w = len(a)
        if w & (w - 1):
            raise InvalidOperation("clz needs a power-of-two width")
        cur = list(a)
        bits: list[int] = []
        k = w // 2
        while k >= 1:
            top_zero = self.eq_zero(cur[len(cur) - k :])
            bits.append(top_zero)
            # keep the half that holds the leading one
            low = cur[: len(cur) - k]
            high = cur[len(cur) - k :]
            cur = self.bv_mux(top_zero, low, high)
            k //= 2
        # bits are MSB-first flags; reversed they are the count, LSB-first —
        # except for a == 0, where they are all 1 (count w-1) and the true
        # answer is w. Mask them with `nonzero` and give w its own top bit.
        bits.reverse()
        nonzero = self.or_reduce(a)
        return [self.and_(f, nonzero) for f in bits] + [self.not_(nonzero)]

    def bv_min_u(self, a, b):
        s = self.lt_u(a, b)
        return self.bv_mux(s, a, b)


def evaluate(b: Builder, outputs: list[int], inputs: dict[int, list[int]]) -> list[int]:
    """Evaluate outputs over lanes; inputs[slot] = per-lane words.

    Returns per-lane output words (outputs LSB-first).
    """
    lanes = len(next(iter(inputs.values())))
    full = (1 << lanes) - 1
    vals = [0] * len(b.kind)
    vals[Builder.ZERO] = 0
    vals[Builder.ONE] = full
    packed: dict[tuple[int, int], int] = {}
    for nid in range(2, len(b.kind)):
        k = b.kind[nid]
        if k == IN:
            key = (b.x[nid], b.y[nid])
            v = packed.get(key)
            if v is None:
                slot, bit = key
                v = 0
                for l, word in enumerate(inputs[slot]):
                    v |= ((word >> bit) & 1) << l
                packed[key] = v
            vals[nid] = v
        elif k == NOTK:
            vals[nid] = ~vals[b.x[nid]] & full
        elif k == NORK:
            vals[nid] = ~(vals[b.x[nid]] | vals[b.y[nid]]) & full
    res = [0] * lanes
    for j, o in enumerate(outputs):
        v = vals[o]
        for l in range(lanes):
            res[l] |= ((v >> l) & 1) << j
    return res


class _Alloc:
    """Free cells over (partition, scratch reg)."""

    def __init__(self, cfg: ArchConfig):
        self.n = cfg.word_n
        self.free: list[list[int]] = [
            sorted(cfg.scratch_regs, reverse=True) for _ in range(self.n)
        ]

    def take(self, part: int) -> int | None:
        if self.free[part]:
            return self.free[part].pop()
        return None

    def take_from(self, lo: int) -> tuple[int, int] | None:
        for p in range(lo, self.n):
            r = self.take(p)
            if r is not None:
                return (p, r)
        return None

    def take_best(self, prefer: int) -> tuple[int, int] | None:
        r = self.take(prefer)
        if r is not None:
            return (prefer, r)
        # fall back to the partition with the most room (keeps options open)
        p = max(range(self.n), key=lambda q: len(self.free[q]))
        r = self.take(p)
        if r is None:
            return None
        return (p, r)

    def give(self, cell: tuple[int, int]) -> None:
        self.free[cell[0]].append(cell[1])


def compile_circuit(
    b: Builder,
    outputs: list[int],
    cfg: ArchConfig,
    dst: int,
    src_regs: list[int],
) -> list:
    """Serialize the circuit to micro-ops computing dst from user registers.

    IN(slot, bit) reads bit `bit` of src_regs[slot] in place; dst is written
    only in the epilogue, so it may alias any source.
    """
    em = Emitter(cfg)
    n = cfg.word_n

    # Reachability + liveness over the needed subgraph.
    needed = set()
    stack = [o for o in outputs if o > 1]
    while stack:
        nid = stack.pop()
        if nid in needed:
            continue
        needed.add(nid)
        k = b.kind[nid]
        if k in (NOTK, NORK):
            stack.append(b.x[nid])
            if k == NORK:
                stack.append(b.y[nid])
    order = sorted(nid for nid in needed if b.kind[nid] in (NOTK, NORK))
    last_use: dict[int, int] = {}
    for idx, nid in enumerate(order):
        last_use[b.x[nid]] = idx
        if b.kind[nid] == NORK:
            last_use[b.y[nid]] = idx
    for o in outputs:
        last_use[o] = len(order) + 1  # outputs stay live to the epilogue

    alloc = _Alloc(cfg)
    cell: dict[int, tuple[int, int]] = {}

    def place(nid: int) -> tuple[int, int]:
        if nid in cell:
            return cell[nid]
        k = b.kind[nid]
        if k == IN:
            return (b.y[nid], src_regs[b.x[nid]])
        raise InvalidOperation("node evaluated before its operands")

    def emit_gate(out_cell, gate, ca, cb=None):
        em.serial(Gate.INIT1, out_cell)
        em.serial(gate, out_cell, ca, cb)

    def stage_copy(src_cell, part) -> tuple[int, int]:
        """Copy a bit to `part` via two NOTs; returns the new cell."""
        t1 = alloc.take(part)
        t2 = alloc.take(part)
        if t1 is None or t2 is None:
            raise InvalidOperation("netlist compiler ran out of cells")
        emit_gate((part, t1), Gate.NOT, src_cell)
        emit_gate((part, t2), Gate.NOT, (part, t1))
        alloc.give((part, t1))
        return (part, t2)

    def release(nid: int, idx: int) -> None:
        if nid in cell and last_use.get(nid, -1) <= idx:
            alloc.give(cell.pop(nid))

    for idx, nid in enumerate(order):
        k = b.kind[nid]
        ca = place(b.x[nid])
        if k == NOTK:
            got = alloc.take_best(ca[0])
            if got is None:
                raise InvalidOperation("netlist compiler ran out of cells")
            emit_gate(got, Gate.NOT, ca)
        else:
            cb = place(b.y[nid])
            pa, pb = ca[0], cb[0]
            # Co-partitioned inputs permit any output partition (out-left
            # sections still hold one full gate); otherwise out >= max.
            got = alloc.take_best(pa) if pa == pb else alloc.take_from(max(pa, pb))
            if got is None and pa != pb:
                # Re-stage both operands to the roomiest partition.
                q = max(range(n), key=lambda p: len(alloc.free[p]))
                sa = stage_copy(ca, q)
                sb = stage_copy(cb, q)
                got = alloc.take(q)
                if got is None:
                    raise InvalidOperation("netlist compiler ran out of cells")
                got = (q, got)
                emit_gate(got, Gate.NOR, sa, sb)
                alloc.give(sa)
                alloc.give(sb)
                cell[nid] = got
                release(b.x[nid], idx)
                release(b.y[nid], idx)
                continue
            if got is None:
                raise InvalidOperation("netlist compiler ran out of cells")
            emit_gate(got, Gate.NOR, ca, cb)
        cell[nid] = got
        release(b.x[nid], idx)
        if k == NORK:
            release(b.y[nid], idx)

    # Epilogue: stage complements of every non-const output, then write dst.
    staged: dict[int, tuple[int, int]] = {}
    for j, o in enumerate(outputs):
        if o <= 1 or j in staged:
            continue
        src_cell = place(o)
        got = alloc.take_best(src_cell[0])
        if got is None:
            raise InvalidOperation("netlist compiler ran out of cells")
        emit_gate(got, Gate.NOT, src_cell)
        staged[j] = got
    # Grouped constant bits (arithmetic-progression INIT patterns).
    for value in (0, 1):
        parts = [j for j, o in enumerate(outputs) if o == value]
        for run in _ap_runs(parts):
            em.perform(Gate.INIT1 if value else Gate.INIT0, [], dst, run)
    for j, o in enumerate(outputs):
        if o <= 1:
            continue
        em.serial(Gate.INIT1, (j, dst))
        em.serial(Gate.NOT, (j, dst), staged[j])
    return em.ops


def _ap_runs(parts: list[int]) -> list[list[int]]:
    """Split an ascending index list into arithmetic-progression runs."""
    runs: list[list[int]] = []
    i = 0
    while i < len(parts):
        if i + 1 == len(parts):
            runs.append([parts[i]])
            break
        step = parts[i + 1] - parts[i]
        j = i + 1
        while j + 1 < len(parts) and parts[j + 1] - parts[j] == step:
            j += 1
        runs.append(parts[i : j + 1])
        i = j + 1
    return runs
