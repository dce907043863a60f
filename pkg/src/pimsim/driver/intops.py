"""Hand-scheduled int32 routines: bitwise, add/sub/neg, mul, div/mod, misc.

All routines append HLogic micro-ops to an Emitter under the caller's masks.
They write only `dst` and scratch registers, INIT1 every NOR/NOT output
first (checked-mode cleanliness), and defer any write that could clobber a
source until the sources are dead, so dst may alias any source.

The ripple-carry adder is the bit-serial 9-NOR full adder; multiply and
divide wrap it with semi-parallel pattern idioms (bit broadcast
trees, even/odd shift phases, partition-parallel carry-save adders).
"""

from __future__ import annotations

from ..microops import Gate
from .emit import Cell, Emitter, Scratch

NOR = Gate.NOR
NOT = Gate.NOT
INIT0 = Gate.INIT0
INIT1 = Gate.INIT1


def emit_adder(
    em: Emitter,
    sc: Scratch,
    a: int,
    b: int,
    out: int,
    cin: int = 0,
    cin_cell: Cell | None = None,
    cout_reg: int | None = None,
) -> None:
    """out = a + b + carry-in, bit-serial ripple (9 NOR gates per bit).

    The carry-in is the constant `cin` or, if given, the live bit at
    `cin_cell`. With `cout_reg`, the final carry-out lands at partition N-1
    of that caller-owned register. `out` must not alias a or b.
    """
    n = em.n
    t = sc.alloc(7)
    c = sc.one()
    for r in t:
        em.init_reg(r, 1)
    em.init_reg(out, 1)
    if cin_cell is not None:
        em.init_reg(c, 1, parts=range(1, n))
        w = sc.one()
        em.serial(INIT1, (0, w))
        em.serial(NOT, (0, w), cin_cell)
        em.serial(INIT1, (0, c))
        em.serial(NOT, (0, c), (0, w))
        sc.free(w)
    elif cin:
        em.init_reg(c, 1)
    else:
        em.init_reg(c, 1, parts=range(1, n))
        em.serial(INIT0, (0, c))
    for j in range(n):
        A, B, C = (j, a), (j, b), (j, c)
        n1, n2, n3, n4, n5, n6, n7 = ((j, r) for r in t)
        em.serial(NOR, n1, A, B)
        em.serial(NOR, n2, A, n1)
        em.serial(NOR, n3, B, n1)
        em.serial(NOR, n4, n2, n3)
        em.serial(NOR, n5, n4, C)
        em.serial(NOR, n6, n4, n5)
        em.serial(NOR, n7, C, n5)
        em.serial(NOR, (j, out), n6, n7)
        if j < n - 1:
            em.serial(NOR, (j + 1, c), n1, n5)
        elif cout_reg is not None:
            em.serial(INIT1, (j, cout_reg))
            em.serial(NOR, (j, cout_reg), n1, n5)
    sc.free(*t, c)


def _not_into(em: Emitter, sc: Scratch, src: int) -> int:
    """Fresh scratch register holding the bitwise complement of src."""
    r = sc.one()
    em.init_reg(r, 1)
    em.perform(NOT, [src], r)
    return r


def _finish(em: Emitter, sc: Scratch, tmp: int, dst: int) -> None:
    """Copy a scratch result into dst (alias-safe epilogue)."""
    w = sc.one()
    em.copy_reg(tmp, dst, w)
    sc.free(w)


# -- bitwise family ----------------------------------------------------------


def lower_not(em: Emitter, sc: Scratch, dst: int, src: int) -> None:
    if dst != src:
        em.init_reg(dst, 1)
        em.perform(NOT, [src], dst)
        return
    u = _not_into(em, sc, src)
    v = _not_into(em, sc, u)  # v = src, survives the INIT of dst
    em.init_reg(dst, 1)
    em.perform(NOT, [v], dst)
    sc.free(u, v)


def lower_or(em: Emitter, sc: Scratch, dst: int, a: int, b: int) -> None:
    n1 = sc.one()
    em.init_reg(n1, 1)
    em.perform(NOR, [a, b], n1)
    em.init_reg(dst, 1)
    em.perform(NOT, [n1], dst)
    sc.free(n1)


def lower_and(em: Emitter, sc: Scratch, dst: int, a: int, b: int) -> None:
    na = _not_into(em, sc, a)
    nb = _not_into(em, sc, b)
    em.init_reg(dst, 1)
    em.perform(NOR, [na, nb], dst)
    sc.free(na, nb)


def lower_xor(em: Emitter, sc: Scratch, dst: int, a: int, b: int) -> None:
    n1, n2, n3 = sc.alloc(3)
    em.init_reg(n1, 1)
    em.perform(NOR, [a, b], n1)
    em.init_reg(n2, 1)
    em.perform(NOR, [a, n1], n2)
    em.init_reg(n3, 1)
    em.perform(NOR, [b, n1], n3)
    em.init_reg(n1, 1)  # n1 is dead; reuse for the XNOR
    em.perform(NOR, [n2, n3], n1)
    em.init_reg(dst, 1)
    em.perform(NOT, [n1], dst)
    sc.free(n1, n2, n3)


def _xor_into(em: Emitter, sc: Scratch, out: int, a: int, b: int) -> None:
    """xor into a scratch register (same 4-step NOR decomposition)."""
    lower_xor(em, sc, out, a, b)


# -- add / subtract / negate -------------------------------------------------


def lower_add(em: Emitter, sc: Scratch, dst: int, a: int, b: int) -> None:
    if dst not in (a, b):
        emit_adder(em, sc, a, b, dst)
        return
    s = sc.one()
    emit_adder(em, sc, a, b, s)
    _finish(em, sc, s, dst)
    sc.free(s)


def lower_sub(em: Emitter, sc: Scratch, dst: int, a: int, b: int) -> None:
    nb = _not_into(em, sc, b)
    if dst != a and dst != b:
        emit_adder(em, sc, a, nb, dst, cin=1)
    else:
        s = sc.one()
        emit_adder(em, sc, a, nb, s, cin=1)
        _finish(em, sc, s, dst)
        sc.free(s)
    sc.free(nb)


def lower_neg(em: Emitter, sc: Scratch, dst: int, src: int) -> None:
    ns = _not_into(em, sc, src)
    z = sc.one()
    em.init_reg(z, 0)
    if dst != src:
        emit_adder(em, sc, ns, z, dst, cin=1)
    else:
        s = sc.one()
        emit_adder(em, sc, ns, z, s, cin=1)
        _finish(em, sc, s, dst)
        sc.free(s)
    sc.free(ns, z)


# -- multiply ----------------------------------------------------------------


def lower_mul(em: Emitter, sc: Scratch, dst: int, a: int, b: int) -> None:
    """Truncated 32-bit product via a carry-save serial multiplier.

    Iteration k broadcasts bit y_k of b to every partition (binary tree),
    forms the partial product in one parallel NOR, folds it into the
    carry-save pair (s, u) with a partition-parallel 9-NOR full adder, emits
    result bit k, and shifts the sum lanes right by one (even/odd phases).
    """
    n = em.n
    xnot = _not_into(em, sc, a)
    z = sc.one()
    em.init_reg(z, 1)  # result bits land here once each
    s = sc.one()
    em.init_reg(s, 0)
    u = sc.one()
    em.init_reg(u, 0)
    ykb, bt, nyk, pp, tsum = sc.alloc(5)
    t1, t2, t3, t4 = sc.alloc(4)

    def par(gate, ins, outr):
        em.init_reg(outr, 1)
        em.perform(gate, ins, outr)

    for k in range(n):
        em.broadcast_bit((k, b), ykb, bt)
        par(NOT, [ykb], nyk)
        par(NOR, [xnot, nyk], pp)  # pp_j = x_j AND y_k
        # Full adder (s, u, pp) -> (tsum, u), all partition-parallel.
        par(NOR, [s, u], t1)
        par(NOR, [s, t1], t2)
        par(NOR, [u, t1], t3)
        par(NOR, [t2, t3], t4)
        par(NOR, [t4, pp], t2)  # n5 (n2 dead)
        par(NOR, [t4, t2], t3)  # n6 (n3 dead)
        par(NOR, [pp, t2], t4)  # n7 (n4 dead)
        par(NOR, [t3, t4], tsum)
        par(NOR, [t1, t2], u)   # carry-out replaces u in place
        # Result bit k = tsum at partition 0.
        em.serial(INIT1, (0, bt))
        em.serial(NOT, (0, bt), (0, tsum))
        em.serial(NOT, (k, z), (0, bt))
        # s'_j = tsum_{j+1}; the dropped top lane only feeds truncated bits.
        em.init_reg(s, 1, parts=range(0, n - 1))
        em.serial(INIT0, (n - 1, s))
        em.init_reg(bt, 1, parts=range(0, n - 1))
        em.shift_copy(tsum, s, bt, offset=-1)
    _finish(em, sc, z, dst)
    sc.free(xnot, z, s, u, ykb, bt, nyk, pp, tsum, t1, t2, t3, t4)


# -- divide / modulo ---------------------------------------------------------


def _abs_into(em: Emitter, sc: Scratch, out: int, src: int) -> None:
    """out = |src| (two's complement; |INT_MIN| keeps its bit pattern)."""
    n = em.n
    sab, bt = sc.alloc(2)
    em.broadcast_bit((n - 1, src), sab, bt)
    ax = sc.one()
    _xor_into(em, sc, ax, src, sab)
    z = bt
    em.init_reg(z, 0)
    emit_adder(em, sc, ax, z, out, cin_cell=(0, sab))
    sc.free(sab, bt, ax)


def lower_divmod(em: Emitter, sc: Scratch, dst: int, a: int, b: int, want_mod: bool) -> None:
    """Signed restoring division, truncating toward zero.

    Quotient sign = sign(a) XOR sign(b); remainder sign = sign(a).
    Division by zero writes the all-ones sentinel.
    """
    n = em.n
    A, R1 = sc.alloc(2)
    _abs_into(em, sc, A, a)
    _abs_into(em, sc, R1, b)
    nB, Q, R2, T, w, cw = sc.alloc(6)
    em.init_reg(nB, 1)
    em.perform(NOT, [R1], nB)
    em.init_reg(Q, 1)
    em.init_reg(R1, 0)
    rcur, rnext = R1, R2
    for i in range(n - 1, -1, -1):
        # Shift left and insert A_i: rnext = (rcur << 1) | A_i.
        em.init_reg(w, 1, parts=range(1, n))
        em.init_reg(rnext, 1, parts=range(1, n))
        em.shift_copy(rcur, rnext, w, offset=1)
        em.serial(INIT1, (0, w))
        em.serial(NOT, (0, w), (i, A))
        em.serial(INIT1, (0, rnext))
        em.serial(NOT, (0, rnext), (0, w))
        # Trial subtract: T = rnext - B, carry-out (no borrow) at cw.
        emit_adder(em, sc, rnext, nB, T, cin=1, cout_reg=cw)
        # Q_i = carry-out.
        em.serial(INIT1, (n - 1, w))
        em.serial(NOT, (n - 1, w), (n - 1, cw))
        em.serial(INIT1, (i, Q))
        em.serial(NOT, (i, Q), (n - 1, w))
        # rnext = carry ? T : rnext.
        cb, bt, m2 = sc.alloc(3)
        em.broadcast_bit((n - 1, cw), cb, bt)
        ncb = bt
        em.init_reg(ncb, 1)
        em.perform(NOT, [cb], ncb)
        m1 = sc.one()
        em.init_reg(m1, 1)
        em.perform(NOR, [T, ncb], m1)
        em.init_reg(m2, 1)
        em.perform(NOR, [rnext, cb], m2)
        em.init_reg(rnext, 1)
        em.perform(NOR, [m1, m2], rnext)
        sc.free(cb, bt, m2, m1)
        rcur, rnext = rnext, rcur
    # rcur holds |a| mod |b|; Q holds |a| div |b|.
    sc.free(A, nB, T, w, cw, rnext)
    res = sc.one()
    if want_mod:
        # Remainder takes the dividend's sign.
        sab, bt = sc.alloc(2)
        em.broadcast_bit((n - 1, a), sab, bt)
        rx = sc.one()
        _xor_into(em, sc, rx, rcur, sab)
        z = bt
        em.init_reg(z, 0)
        emit_adder(em, sc, rx, z, res, cin_cell=(0, sab))
        sc.free(sab, bt, rx)
    else:
        # Quotient sign = sa ^ sb.
        sab, sbb, sqb, bt = sc.alloc(4)
        em.broadcast_bit((n - 1, a), sab, bt)
        em.broadcast_bit((n - 1, b), sbb, bt)
        _xor_into(em, sc, sqb, sab, sbb)
        qx = sab
        _xor_into(em, sc, qx, Q, sqb)
        z = sbb
        em.init_reg(z, 0)
        emit_adder(em, sc, qx, z, res, cin_cell=(0, sqb))
        sc.free(sab, sbb, sqb, bt)
    sc.free(rcur, Q)
    # Division by zero: overwrite with the all-ones sentinel.
    t, w1, w2 = sc.alloc(3)
    em.copy_reg(b, t, w1)
    em.reduce_or(t, w1, w2)  # t_0 = (b != 0)
    zb = w1
    em.broadcast_bit((0, t), zb, w2)
    nzb = w2
    em.init_reg(nzb, 1)
    em.perform(NOT, [zb], nzb)
    ones = t
    em.init_reg(ones, 1)
    m1, m2 = sc.alloc(2)
    em.init_reg(m1, 1)
    em.perform(NOR, [res, nzb], m1)
    em.init_reg(m2, 1)
    em.perform(NOR, [ones, zb], m2)
    em.init_reg(dst, 1)
    em.perform(NOR, [m1, m2], dst)
    sc.free(res, t, w1, w2, m1, m2)


# -- misc (int paths + shared mux) -------------------------------------------


def lower_abs_int(em: Emitter, sc: Scratch, dst: int, src: int) -> None:
    if dst != src:
        _abs_into(em, sc, dst, src)
        return
    s = sc.one()
    _abs_into(em, sc, s, src)
    _finish(em, sc, s, dst)
    sc.free(s)


def lower_zero(em: Emitter, sc: Scratch, dst: int, src: int, is_float: bool) -> None:
    """dst = 1 iff src == 0 (for float: iff +-0, i.e. sign bit ignored)."""
    n = em.n
    t, w1, w2 = sc.alloc(3)
    em.copy_reg(src, t, w1)
    if is_float:
        em.serial(INIT0, (n - 1, t))
    em.reduce_or(t, w1, w2)  # t_0 = (src != 0)
    em.init_reg(dst, 0, parts=range(1, n))
    em.serial(INIT1, (0, dst))
    em.serial(NOT, (0, dst), (0, t))
    sc.free(t, w1, w2)


def lower_sign_int(em: Emitter, sc: Scratch, dst: int, src: int) -> None:
    """dst = -1 / 0 / +1: bits [1..N-1] = sign, bit 0 = (src != 0)."""
    n = em.n
    t, w1, w2 = sc.alloc(3)
    em.copy_reg(src, t, w1)
    em.reduce_or(t, w1, w2)  # t_0 = (src != 0)
    cb = w1
    em.broadcast_bit((n - 1, src), cb, w2)
    ncb = w2
    em.init_reg(ncb, 1)
    em.perform(NOT, [cb], ncb)
    em.init_reg(dst, 1)
    em.perform(NOT, [ncb], dst, range(1, n))  # high bits = sign
    em.serial(INIT1, (0, w2))  # fresh cell for the low-bit staging
    em.serial(NOT, (0, w2), (0, t))
    em.serial(NOT, (0, dst), (0, w2))
    sc.free(t, w1, w2)


def lower_mux(em: Emitter, sc: Scratch, dst: int, sel: int, x: int, y: int, is_float: bool) -> None:
    """dst = (sel != 0) ? x : y; for float32, -0.0 counts as zero."""
    n = em.n
    t, w1, w2 = sc.alloc(3)
    em.copy_reg(sel, t, w1)
    if is_float:
        em.serial(INIT0, (n - 1, t))
    em.reduce_or(t, w1, w2)
    cb = w1
    em.broadcast_bit((0, t), cb, w2)
    ncb = w2
    em.init_reg(ncb, 1)
    em.perform(NOT, [cb], ncb)
    m1, m2 = sc.alloc(2)
    em.init_reg(m1, 1)
    em.perform(NOR, [x, ncb], m1)
    em.init_reg(m2, 1)
    em.perform(NOR, [y, cb], m2)
    em.init_reg(dst, 1)
    em.perform(NOR, [m1, m2], dst)
    sc.free(t, w1, w2, m1, m2)


# -- int comparisons ---------------------------------------------------------


def lower_eq_int(em: Emitter, sc: Scratch, dst: int, a: int, b: int) -> None:
    n = em.n
    t, w1, w2 = sc.alloc(3)
    _xor_into(em, sc, t, a, b)
    em.reduce_or(t, w1, w2)  # t_0 = (a != b)
    em.init_reg(dst, 0, parts=range(1, n))
    em.serial(INIT1, (0, dst))
    em.serial(NOT, (0, dst), (0, t))
    sc.free(t, w1, w2)


def _lt_flag(em: Emitter, sc: Scratch, a: int, b: int, regs: list[int]) -> Cell:
    """Emit a < b (signed, via a - b with overflow-safe sign logic).

    Uses the six caller-owned scratch registers in `regs`; returns the cell
    holding the COMPLEMENT of (a < b), at partition N-1 of one of them.
    """
    n = em.n
    T, w1, w2, w3, w4, w5 = regs
    nb = _not_into(em, sc, b)
    emit_adder(em, sc, a, nb, T, cin=1)  # T = a - b
    sc.free(nb)
    p = n - 1
    sa, sb, sd = (p, a), (p, b), (p, T)

    def g(gate, out, i1=None, i2=None):
        em.serial(INIT1, out)
        em.serial(gate, out, i1, i2)

    nsa = (p, w1)
    g(NOT, nsa, sa)
    x1 = (p, w2)
    g(NOR, x1, nsa, sb)      # x1 = sa & ~sb
    n1, n2, n3 = (p, w3), (p, w4), (p, w5)
    g(NOR, n1, sa, sb)
    g(NOR, n2, sa, n1)
    g(NOR, n3, sb, n1)
    xnor = (p, w1)           # w1 (nsa) is dead; re-INIT and reuse
    g(NOR, xnor, n2, n3)     # ~(sa ^ sb)
    nsd = (p, w4)
    g(NOT, nsd, sd)
    nxnor = (p, w5)
    g(NOT, nxnor, xnor)
    x2 = (p, w3)             # same_sign & sd = NOR(~same_sign, ~sd)
    g(NOR, x2, nxnor, nsd)
    nlt = (p, w4)            # ~(x1 | x2) = ~(a < b)
    g(NOR, nlt, x1, x2)
    return nlt


def lower_cmp_int(em: Emitter, sc: Scratch, dst: int, a: int, b: int, op: str) -> None:
    """lt/le/gt/ge as 0x0/0x1 words. eq is handled by lower_eq_int."""
    n = em.n
    if op == "lt":
        x, y, invert = a, b, False
    elif op == "gt":
        x, y, invert = b, a, False
    elif op == "ge":
        x, y, invert = a, b, True   # ge = not (a < b)
    else:  # le = not (b < a)
        x, y, invert = b, a, True
    regs = sc.alloc(6)
    nlt = _lt_flag(em, sc, x, y, regs)
    em.init_reg(dst, 0, parts=range(1, n))
    if invert:
        # dst_0 = ~lt = nlt: double-NOT staging through a scratch cell.
        w = (n - 1, regs[5])
        em.serial(INIT1, w)
        em.serial(NOT, w, nlt)
        em.serial(INIT1, (0, dst))
        em.serial(NOT, (0, dst), w)
    else:
        em.serial(INIT1, (0, dst))
        em.serial(NOT, (0, dst), nlt)
    sc.free(*regs)
