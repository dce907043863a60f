"""Development library: sessions, 1-D tensors, views, elementwise ops,
logarithmic reduction, bitonic sort, and host transfer.

A tensor occupies one register index across the rows of consecutive warps
(element i at warp first_warp + i // h_user, row i % h_user). Views are
(start, step, length) windows over a base tensor and own no memory.
"""

from __future__ import annotations

import struct

import numpy as np

from .config import ArchConfig, DEFAULT_CONFIG
from .driver import lower
from .errors import (
    EmptyReduction,
    InvalidOperation,
    OutOfMemory,
    ZeroLength,
)
from .isa import MoveInterWarp, MoveIntraWarp, ReadInstr, RType, WriteInstr
from .microops import RangeMask, encode
from .simulator import ProfileCounters, Simulator

__all__ = ["Session", "Tensor", "TensorView", "Profiler"]

_INT_SENTINEL = 0x7FFFFFFF  # INT_MAX
_FLOAT_SENTINEL = 0x7F800000  # +inf


def _to_word(value, dtype: str) -> int:
    if dtype == "float32":
        return struct.unpack("<I", struct.pack("<f", float(value)))[0]
    return int(value) & 0xFFFFFFFF


def _from_words(words: np.ndarray, dtype: str) -> np.ndarray:
    words = np.asarray(words, dtype=np.uint32)
    if dtype == "float32":
        return words.view(np.float32)
    return words.view(np.int32)


class Tensor:
    """Owning handle: one register index over a consecutive warp range."""

    def __init__(self, session: "Session", dtype: str, length: int,
                 first_warp: int, warp_count: int, reg: int):
        self.session = session
        self.dtype = dtype
        self.length = length
        self.first_warp = first_warp
        self.warp_count = warp_count
        self.reg = reg
        self.alive = True

    def __len__(self) -> int:
        return self.length

    @property
    def base(self) -> "Tensor":
        return self

    def indices(self) -> np.ndarray:
        return np.arange(self.length, dtype=np.int64)

    def locs(self) -> tuple[np.ndarray, np.ndarray]:
        return self.session._locate(self, self.indices())

    def view(self, start: int, step: int, length: int) -> "TensorView":
        return TensorView(self, start, step, length)

    def __getitem__(self, key) -> "TensorView":
        return _slice_of(self, key)

    def __repr__(self) -> str:
        return (f"Tensor(dtype={self.dtype}, length={self.length}, "
                f"warps={self.first_warp}..{self.first_warp + self.warp_count - 1}, "
                f"reg={self.reg})")


class TensorView:
    """Non-owning strided window over a base tensor."""

    def __init__(self, base: Tensor, start: int, step: int, length: int):
        if step < 1:
            raise InvalidOperation("view step must be >= 1")
        if length and start + (length - 1) * step >= base.length:
            raise InvalidOperation("view exceeds the base tensor")
        self.base = base
        self.start = start
        self.step = step
        self.length = length

    @property
    def session(self) -> "Session":
        return self.base.session

    @property
    def dtype(self) -> str:
        return self.base.dtype

    def __len__(self) -> int:
        return self.length

    @property
    def mask(self) -> RangeMask:
        """The element-index RangeMask this view selects on its base."""
        if self.length == 0:
            raise InvalidOperation("empty view has no mask")
        return RangeMask(self.start, self.start + (self.length - 1) * self.step,
                         self.step if self.length > 1 else 1)

    def indices(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.length, dtype=np.int64)

    def locs(self) -> tuple[np.ndarray, np.ndarray]:
        return self.session._locate(self.base, self.indices())

    def view(self, start: int, step: int, length: int) -> "TensorView":
        # Nested slicing composes to a single (start, step) on the base.
        return TensorView(self.base, self.start + start * self.step,
                          self.step * step, length)

    def __getitem__(self, key) -> "TensorView":
        return _slice_of(self, key)

    def __repr__(self) -> str:
        return (f"TensorView(base={self.base!r}, start={self.start}, "
                f"step={self.step}, length={self.length})")


AnyTensor = Tensor | TensorView


def _slice_of(t: AnyTensor, key) -> TensorView:
    if isinstance(key, int):
        raise InvalidOperation("integer indexing uses get/set_element")
    start, stop, step = key.indices(len(t))
    if step < 1:
        raise InvalidOperation("negative slice steps are unsupported")
    length = max(0, (stop - start + step - 1) // step)
    base_view = t if isinstance(t, TensorView) else TensorView(t.base, 0, 1, len(t))
    return base_view.view(start, step, length)


class Profiler:
    """Scoped micro-op counter section over one session (re-entrant)."""

    def __init__(self, session: "Session"):
        self.session = session
        self.counters: ProfileCounters | None = None
        self._token = None

    def __enter__(self) -> "Profiler":
        self._token = self.session._profile_begin(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.counters = self.session._profile_end(self._token)


class Session:
    """One memory state, its allocation table, and a profiler stack."""

    def __init__(self, cfg: ArchConfig = DEFAULT_CONFIG, strict_init: bool = True,
                 record_trace: bool = False):
        cfg.validate()
        self.cfg = cfg
        self.sim = Simulator(cfg, strict_init=strict_init)
        self.h = cfg.h_user
        # occupancy[warp, reg] for user registers only
        self._occ = np.zeros((cfg.num_crossbars, cfg.user_regs), dtype=bool)
        self._profile_stack: list[tuple[Profiler, ProfileCounters]] = []
        self.trace_words: list[int] | None = [] if record_trace else None

    # -- plumbing ------------------------------------------------------------

    def _run(self, instr) -> None:
        ops = lower(instr, self.cfg)
        if self.trace_words is not None:
            layout = self.sim.layout
            self.trace_words.extend(encode(op, layout) for op in ops)
        self.sim.run_ops(ops)

    def _read(self, warp: int, thread: int, reg: int) -> int:
        instr = ReadInstr(warp, thread, reg)
        ops = lower(instr, self.cfg)
        if self.trace_words is not None:
            layout = self.sim.layout
            self.trace_words.extend(encode(op, layout) for op in ops)
        out: list[int] = []
        self.sim.run_ops(ops, out)
        return out[0]

    def _locate(self, base: Tensor, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return base.first_warp + idx // self.h, idx % self.h

    # -- allocation ------------------------------------------------------------

    def alloc(self, length: int, dtype: str, reference: AnyTensor | None = None) -> Tensor:
        if length <= 0:
            raise ZeroLength("tensor length must be positive")
        if dtype not in ("int32", "float32"):
            raise InvalidOperation(f"unknown dtype {dtype!r}")
        wc = -(-length // self.h)
        placement = None
        if reference is not None:
            ref = reference.base
            if wc <= ref.warp_count:
                reg = self._free_reg(ref.first_warp, wc)
                if reg is not None:
                    placement = (ref.first_warp, reg)
        if placement is None:
            placement = self._first_fit(wc)
        if placement is None:
            raise OutOfMemory(
                f"no free register over {wc} consecutive warps "
                f"(largest available: {self._largest_free() * self.h} elements)"
            )
        w0, reg = placement
        self._occ[w0:w0 + wc, reg] = True
        t = Tensor(self, dtype, length, w0, wc, reg)
        # zero-initialize via one broadcast write
        self._run(WriteInstr(RangeMask(w0, w0 + wc - 1, 1),
                             RangeMask(0, self.h - 1, 1), reg, 0))
        return t

    def _free_reg(self, w0: int, wc: int) -> int | None:
        if w0 + wc > self.cfg.num_crossbars:
            return None
        free = ~self._occ[w0:w0 + wc].any(axis=0)
        hits = np.nonzero(free)[0]
        return int(hits[0]) if hits.size else None

    def _first_fit(self, wc: int) -> tuple[int, int] | None:
        for w0 in range(self.cfg.num_crossbars - wc + 1):
            reg = self._free_reg(w0, wc)
            if reg is not None:
                return (w0, reg)
        return None

    def _largest_free(self) -> int:
        best = 0
        for reg in range(self.cfg.user_regs):
            run = 0
            for w in range(self.cfg.num_crossbars):
                run = run + 1 if not self._occ[w, reg] else 0
                best = max(best, run)
        return best

    def _alloc_exact(self, like: Tensor, length: int, dtype: str) -> Tensor:
        """A tensor over exactly `like`'s warp range (for shadows/outputs)."""
        reg = self._free_reg(like.first_warp, like.warp_count)
        if reg is None:
            raise OutOfMemory(
                f"no free register over warps {like.first_warp}.."
                f"{like.first_warp + like.warp_count - 1}"
            )
        self._occ[like.first_warp:like.first_warp + like.warp_count, reg] = True
        t = Tensor(self, dtype, length, like.first_warp, like.warp_count, reg)
        self._run(WriteInstr(RangeMask(like.first_warp,
                                       like.first_warp + like.warp_count - 1, 1),
                             RangeMask(0, self.h - 1, 1), reg, 0))
        return t

    def free(self, t: Tensor) -> None:
        if isinstance(t, TensorView):
            raise InvalidOperation("views do not own memory")
        if not t.alive:
            raise InvalidOperation("double free")
        self._occ[t.first_warp:t.first_warp + t.warp_count, t.reg] = False
        t.alive = False

    # -- element access --------------------------------------------------------

    def set_element(self, t: AnyTensor, i: int, value) -> None:
        if not 0 <= i < len(t):
            raise InvalidOperation(f"index {i} out of range [0, {len(t)})")
        idx = int(t.indices()[i])
        warp, row = (v[0] for v in self._locate(t.base, np.array([idx])))
        self._run(WriteInstr(RangeMask(int(warp), int(warp), 1),
                             RangeMask(int(row), int(row), 1),
                             t.base.reg, _to_word(value, t.dtype)))

    def get_element(self, t: AnyTensor, i: int):
        if not 0 <= i < len(t):
            raise InvalidOperation(f"index {i} out of range [0, {len(t)})")
        idx = int(t.indices()[i])
        warp, row = (int(v[0]) for v in self._locate(t.base, np.array([idx])))
        word = self._read(warp, row, t.base.reg)
        return _from_words(np.array([word]), t.dtype)[0].item()

    # -- host transfer -----------------------------------------------------------

    def from_host(self, values, dtype: str | None = None) -> Tensor:
        arr = np.asarray(values)
        if dtype is None:
            dtype = "float32" if arr.dtype.kind == "f" else "int32"
        arr = arr.astype(np.float32 if dtype == "float32" else np.int32)
        words = arr.view(np.uint32).reshape(-1)
        t = self.alloc(len(words), dtype)
        warps, rows = t.locs()
        for i in range(len(words)):
            self._run(WriteInstr(RangeMask(int(warps[i]), int(warps[i]), 1),
                                 RangeMask(int(rows[i]), int(rows[i]), 1),
                                 t.reg, int(words[i])))
        return t

    def to_host(self, t: AnyTensor) -> np.ndarray:
        warps, rows = t.locs()
        words = np.zeros(len(t), dtype=np.uint32)
        for i in range(len(t)):
            words[i] = self._read(int(warps[i]), int(rows[i]), t.base.reg)
        return _from_words(words, t.dtype)

    def _raw_words(self, t: AnyTensor) -> np.ndarray:
        warps, rows = t.locs()
        return np.array(
            [self._read(int(w), int(r), t.base.reg) for w, r in zip(warps, rows)],
            dtype=np.uint32,
        )

    # -- grouped instruction emission -------------------------------------------

    def _emit_rtype(self, opcode: str, dtype: str, dst_reg: int,
                    src_regs: tuple[int, ...], warps: np.ndarray,
                    rows: np.ndarray) -> None:
        for wmask, rmask in _lane_groups(warps, rows):
            self._run(RType(opcode, dtype, dst_reg, src_regs, wmask, rmask))

    def _emit_write(self, reg: int, word: int, warps: np.ndarray,
                    rows: np.ndarray) -> None:
        for wmask, rmask in _lane_groups(warps, rows):
            self._run(WriteInstr(wmask, rmask, reg, word))

    def _emit_moves(self, src_reg: int, dst_reg: int,
                    sw: np.ndarray, sr: np.ndarray,
                    dw: np.ndarray, dr: np.ndarray,
                    row_hint: int | None = None) -> None:
        """Copy words at (sw, sr) of src_reg to (dw, dr) of dst_reg."""
        same = sw == dw
        if same.any():
            isw, isr, idr = sw[same], sr[same], dr[same]
            patterns: dict[int, list[tuple[int, int]]] = {}
            for w, s, d in zip(isw, isr, idr):
                patterns.setdefault(int(w), []).append((int(s), int(d)))
            items = sorted((w, tuple(p)) for w, p in patterns.items())
            i = 0
            while i < len(items):
                j = i
                while (j + 1 < len(items) and items[j + 1][0] == items[j][0] + 1
                       and items[j + 1][1] == items[i][1]):
                    j += 1
                self._run(MoveIntraWarp(items[i][1], src_reg, dst_reg,
                                        RangeMask(items[i][0], items[j][0], 1)))
                i = j + 1
        cross = ~same
        if cross.any():
            groups: dict[tuple[int, int, int], list[int]] = {}
            for w, s, d, r in zip(sw[cross], sr[cross], dw[cross], dr[cross]):
                groups.setdefault((int(d) - int(w), int(s), int(r)), []).append(int(w))
            for (delta, s, r), warps_list in sorted(groups.items()):
                for w0, w1, step in _ap_cover(np.array(sorted(warps_list)), None):
                    if step != 1 and not _is_pow4(step):
                        for w in range(w0, w1 + 1, step):
                            self._move_chunk(w, w, 1, delta, s, r, src_reg, dst_reg)
                    else:
                        self._move_chunk(w0, w1, step, delta, s, r, src_reg, dst_reg)

    def _move_chunk(self, w0: int, w1: int, step: int, delta: int,
                    src_row: int, dst_row: int, src_reg: int, dst_reg: int) -> None:
        # Split runs whose destinations would overlap their own sources.
        count = (w1 - w0) // step + 1
        overlaps = delta % step == 0 and abs(delta) // step < count
        span = max(1, abs(delta) // step) if overlaps else count
        w = w0
        while w <= w1:
            hi = min(w1, w + (span - 1) * step)
            self._run(MoveInterWarp(RangeMask(w, hi, step if hi > w else 1),
                                    w + delta, src_row, dst_row, src_reg, dst_reg))
            w = hi + step

    # -- elementwise -------------------------------------------------------------

    def elementwise(self, opcode: str, *operands, out: AnyTensor | None = None) -> AnyTensor:
        tensors = [o for o in operands if isinstance(o, (Tensor, TensorView))]
        if not tensors:
            raise InvalidOperation("elementwise needs at least one tensor operand")
        dtype = tensors[0].dtype
        length = len(tensors[0])
        for t in tensors[1:]:
            if t.dtype != dtype:
                raise InvalidOperation("dtype mismatch")
            if len(t) != length:
                raise InvalidOperation("length mismatch")
        if length == 0:
            raise InvalidOperation("elementwise over empty tensors")
        own_out = out is None
        if own_out:
            out = self.alloc(length, dtype, reference=tensors[0].base)
        elif len(out) != length or out.dtype != dtype:
            raise InvalidOperation("out tensor has wrong shape or dtype")
        ow, orow = out.locs()
        shadows: list[Tensor] = []
        src_regs: list[int] = []
        try:
            for o in operands:
                if isinstance(o, (Tensor, TensorView)):
                    w, r = o.locs()
                    if np.array_equal(w, ow) and np.array_equal(r, orow):
                        src_regs.append(o.base.reg)
                    else:
                        tmp = self._alloc_exact(out.base, length, dtype)
                        shadows.append(tmp)
                        self._emit_moves(o.base.reg, tmp.reg, w, r, ow, orow)
                        src_regs.append(tmp.reg)
                else:  # scalar broadcast via write instructions
                    tmp = self._alloc_exact(out.base, length, dtype)
                    shadows.append(tmp)
                    self._emit_write(tmp.reg, _to_word(o, dtype), ow, orow)
                    src_regs.append(tmp.reg)
            self._emit_rtype(opcode, dtype, out.base.reg, tuple(src_regs), ow, orow)
        finally:
            for s in shadows:
                self.free(s)
        return out

    # -- reduction ---------------------------------------------------------------

    def reduce(self, t: AnyTensor, op: str = "sum"):
        if len(t) == 0:
            raise EmptyReduction("reduction over an empty tensor")
        opcode = {"sum": "add", "product": "multiply"}.get(op)
        if opcode is None:
            raise InvalidOperation(f"unknown reduction {op!r}")
        cur: AnyTensor = t
        owned = False
        while len(cur) > 1:
            half, odd = divmod(len(cur), 2)
            a = cur[: 2 * half : 2]
            b = cur[1::2]
            nxt = self.alloc(half + odd, cur.dtype)
            self.elementwise(opcode, a, b, out=nxt[:half])
            if odd:
                lw, lr = cur[-1:].locs()
                nw, nr = nxt[half:].locs()
                self._emit_moves(cur.base.reg, nxt.reg, lw, lr, nw, nr)
            if owned:
                self.free(cur.base)
            cur, owned = nxt, True
        result = self.get_element(cur, 0)
        if owned:
            self.free(cur.base)
        return result

    # -- bitonic sort ---------------------------------------------------------------

    def sort(self, t: AnyTensor) -> AnyTensor:
        length = len(t)
        if length == 0:
            return t
        if t.dtype == "float32":
            raw = self._raw_words(t)
            if np.any(((raw & 0x7F800000) == 0x7F800000)
                      & ((raw & 0x007FFFFF) != 0)):
                raise InvalidOperation("sort: NaN input has no total order")
        p = 1 << max(0, (length - 1).bit_length())
        work = self.alloc(p, t.dtype)
        tw, tr = t.locs()
        ww, wr = work.locs()
        self._emit_moves(t.base.reg, work.reg, tw, tr, ww[:length], wr[:length])
        if p > length:
            sentinel = _FLOAT_SENTINEL if t.dtype == "float32" else _INT_SENTINEL
            self._emit_write(work.reg, sentinel, ww[length:], wr[length:])
        partner = self._alloc_exact(work, p, t.dtype)
        swap = self._alloc_exact(work, p, t.dtype)
        flag = self._alloc_exact(work, p, "int32")
        idx = np.arange(p, dtype=np.int64)
        k = 2
        while k <= p:
            d = k // 2
            while d >= 1:
                lanes_all = (idx & d) == 0
                ascending = (idx & k) == 0
                for asc in (True, False):
                    sel = idx[lanes_all & (ascending == asc)]
                    if not sel.size:
                        continue
                    self._cas_stage(work, partner, swap, flag, sel, d, asc)
                d //= 2
            k *= 2
        self._emit_moves(work.reg, t.base.reg, ww[:length], wr[:length], tw, tr)
        for tmp in (flag, swap, partner, work):
            self.free(tmp)
        return t

    def _cas_stage(self, work: Tensor, partner: Tensor, swap: Tensor,
                   flag: Tensor, sel: np.ndarray, d: int, asc: bool) -> None:
        """One compare-and-swap direction group at distance d."""
        lw, lr = self._locate(work, sel)
        pw, pr = self._locate(work, sel + d)
        # partner values into alignment with the low lanes
        self._emit_moves(work.reg, partner.reg, pw, pr, lw, lr)
        groups = _lane_groups(lw, lr, period_hint=2 * d)
        for wmask, rmask in groups:
            self._run(RType("lt", work.dtype, flag.reg,
                            (work.reg, partner.reg), wmask, rmask))
        hi_first, hi_second = ((partner.reg, work.reg) if asc
                               else (work.reg, partner.reg))
        for wmask, rmask in groups:
            # value destined for the high lane, staged in swap
            self._run(RType("mux", work.dtype, swap.reg,
                            (flag.reg, hi_first, hi_second), wmask, rmask))
        for wmask, rmask in groups:
            # value kept at the low lane, computed in place
            self._run(RType("mux", work.dtype, work.reg,
                            (flag.reg, hi_second, hi_first), wmask, rmask))
        self._emit_moves(swap.reg, work.reg, lw, lr, pw, pr)

    # -- profiling ---------------------------------------------------------------

    def profiler(self) -> Profiler:
        return Profiler(self)

    def _profile_begin(self, owner: Profiler) -> int:
        self._profile_stack.append((owner, self.sim.counters.snapshot()))
        return len(self._profile_stack)

    def _profile_end(self, token: int) -> ProfileCounters:
        if token != len(self._profile_stack):
            raise InvalidOperation("unbalanced profiler sections")
        _, before = self._profile_stack.pop()
        return self.sim.counters.delta(before)


# -- lane grouping helpers ---------------------------------------------------


def _is_pow4(v: int) -> bool:
    while v % 4 == 0:
        v //= 4
    return v == 1


def _ap_cover(vals: np.ndarray, period_hint: int | None) -> list[tuple[int, int, int]]:
    """Cover a sorted index set with arithmetic progressions (start, stop, step)."""
    greedy = _greedy_runs(vals)
    if period_hint is None or len(vals) < 3 or len(greedy) == 1:
        return greedy
    strided: list[tuple[int, int, int]] = []
    offsets = np.unique(vals % period_hint)
    for off in offsets:
        strided.extend(_runs_with_step(vals[vals % period_hint == off], period_hint))
    return strided if len(strided) < len(greedy) else greedy


def _greedy_runs(vals: np.ndarray) -> list[tuple[int, int, int]]:
    runs = []
    i, n = 0, len(vals)
    while i < n:
        if i + 1 == n:
            runs.append((int(vals[i]), int(vals[i]), 1))
            break
        step = int(vals[i + 1] - vals[i])
        j = i + 1
        while j + 1 < n and int(vals[j + 1] - vals[j]) == step:
            j += 1
        runs.append((int(vals[i]), int(vals[j]), step))
        i = j + 1
    return runs


def _runs_with_step(vals: np.ndarray, step: int) -> list[tuple[int, int, int]]:
    runs = []
    i, n = 0, len(vals)
    while i < n:
        j = i
        while j + 1 < n and int(vals[j + 1] - vals[j]) == step:
            j += 1
        runs.append((int(vals[i]), int(vals[j]), step if j > i else 1))
        i = j + 1
    return runs


def _lane_groups(warps: np.ndarray, rows: np.ndarray,
                 period_hint: int | None = None) -> list[tuple[RangeMask, RangeMask]]:
    """Group (warp, row) lanes into (warp_mask, row_mask) instruction pairs."""
    patterns: dict[int, list[tuple[int, int, int]]] = {}
    for w in np.unique(warps):
        rs = np.sort(rows[warps == w])
        patterns[int(w)] = _ap_cover(rs, period_hint)
    items = sorted(patterns.items())
    out: list[tuple[RangeMask, RangeMask]] = []
    i = 0
    while i < len(items):
        j = i
        while (j + 1 < len(items) and items[j + 1][0] == items[j][0] + 1
               and items[j + 1][1] == items[i][1]):
            j += 1
        wmask = RangeMask(items[i][0], items[j][0], 1)
        for r0, r1, rs in items[i][1]:
            out.append((wmask, RangeMask(r0, r1, rs)))
        i = j + 1
    return out
