"""IEEE-754 binary32 circuits: add/sub/mul/div, comparisons, sign.

Built as NOR netlists (see netlist.py) in the softfloat style: operands are
unpacked, subnormals normalized, the significand datapath runs with a
hidden bit at position 30 of a 31-bit working vector plus 7 guard bits and
a bit-0 sticky jam, and one shared round-and-pack tail performs
round-to-nearest-even, subnormal underflow, and overflow-to-infinity by
letting the rounding increment carry through the packed word.

NaN results are canonicalized to the quiet pattern 0x7FC00000.
"""

from __future__ import annotations

from ..microops import Gate
from .emit import Emitter, Scratch
from .netlist import Builder

QNAN = 0x7FC00000

_cache: dict[str, tuple[Builder, list[int]]] = {}


def _unpack(b: Builder, slot: int):
    A = b.bv_in(slot, 32)
    m = A[0:23]
    e = A[23:31]
    s = A[31]
    e_all1 = b.and_reduce(e)
    m_nz = b.or_reduce(m)
    e_zero = b.eq_zero(e)
    return {
        "bits": A,
        "m": m,
        "e": e,
        "s": s,
        "nan": b.and_(e_all1, m_nz),
        "inf": b.and_(e_all1, b.not_(m_nz)),
        "zero": b.and_(e_zero, b.not_(m_nz)),
        "e_zero": e_zero,
        "hidden": b.not_(e_zero),
        "sig": m + [b.not_(e_zero)],  # 24 bits
        # E = e + (e == 0): the effective unbiased-offset exponent.
        "E": [b.or_(e[0], e_zero)] + e[1:],
        "mag": m + e,  # 31-bit magnitude key: (e, m) lexicographic
    }


def _sx(b: Builder, v: list[int], width: int) -> list[int]:
    """Zero-extend (our exponent intermediates are non-negative)."""
    return v + [b.ZERO] * (width - len(v))


def _round_pack(b: Builder, sign: int, EZ: list[int], S: list[int]) -> list[int]:
    """Shared tail: S is 31 bits (hidden at 30, 7 guards, sticky jam at 0),
    EZ the 11-bit two's-complement tentative biased exponent. Returns the
    32 result bits (finite path, including subnormals and overflow->inf)."""
    assert len(S) == 31 and len(EZ) == 11
    # Underflow: EZ <= 0 -> shift right by 1 - EZ (clamped to 31), EZ := 1.
    neg = EZ[10]
    le0 = b.or_(neg, b.eq_zero(EZ))
    sh, _ = b.bv_add(b.bv_not(EZ), b.bv_const(2, 11))  # 1 - EZ
    sh_big = b.or_reduce(sh[5:10])  # >= 32 (sh >= 0 whenever le0)
    amt = [b.and_(le0, b.or_(sh_big, sh[i])) for i in range(5)]
    S = b.shr_jam(S, amt)
    one11 = b.bv_const(1, 11)
    EZ = b.bv_mux(le0, one11, EZ)
    hidden = S[30]
    expf = [b.and_(EZ[i], hidden) for i in range(8)]
    mant = S[7:30]
    g = S[6]
    st = b.or_reduce(S[0:6])
    roundup = b.and_(g, b.or_(st, S[7]))
    W = mant + expf  # 31 bits
    W, _ = b.bv_add(W, b.bv_const(0, 31), cin=roundup)
    # Overflow to infinity when EZ >= 255 with a normalized significand.
    _, ge255 = b.bv_sub(EZ, b.bv_const(255, 11))
    ovf = b.and_(hidden, ge255)
    inf31 = b.bv_const(0x7F800000, 31)
    W = b.bv_mux(ovf, inf31, W)
    return W + [sign]


def _build_addsub(subtract: bool) -> tuple[Builder, list[int]]:
    b = Builder()
    a = _unpack(b, 0)
    bb = _unpack(b, 1)
    sb = b.not_(bb["s"]) if subtract else bb["s"]
    b_bigger = b.lt_u(a["mag"], bb["mag"])
    sx = b.mux(b_bigger, sb, a["s"])
    EX = b.bv_mux(b_bigger, bb["E"], a["E"])
    EY = b.bv_mux(b_bigger, a["E"], bb["E"])
    sigX = b.bv_mux(b_bigger, bb["sig"], a["sig"])
    sigY = b.bv_mux(b_bigger, a["sig"], bb["sig"])
    eff_sub = b.xor(a["s"], sb)
    d, _ = b.bv_sub(EX, EY)  # EX >= EY by magnitude order
    d_big = b.or_reduce(d[5:8])
    dd = [b.or_(d_big, d[i]) for i in range(5)]
    A31 = [b.ZERO] * 7 + sigX
    B31 = b.shr_jam([b.ZERO] * 7 + sigY, dd)
    add_s, add_c = b.bv_add(A31, B31)
    sub_s, _ = b.bv_sub(A31, B31)
    sum31 = b.bv_mux(eff_sub, sub_s, add_s)
    carry = b.and_(b.not_(eff_sub), add_c)
    # Carry path: right shift 1 with jam, exponent + 1.
    Sr = [b.or_(sum31[1], sum31[0])] + sum31[2:31] + [carry]
    # Normalize path: left shift by clz-1 capped at EX-1 (subnormal floor).
    c6 = b.clz(sum31 + [b.ZERO])  # 32-wide => 6 bits, >= 1
    L, _ = b.bv_sub(c6, b.bv_const(1, 6))
    EXm1, _ = b.bv_sub(EX, b.bv_const(1, 8))
    Lc = b.bv_min_u(_sx(b, L, 8), EXm1)[0:5]
    Sn = b.shl(sum31, Lc)
    EZn, _ = b.bv_sub(_sx(b, EX, 11), _sx(b, Lc, 11))
    EZc, _ = b.bv_add(_sx(b, EX, 11), b.bv_const(1, 11))
    S = b.bv_mux(carry, Sr, Sn)
    EZ = b.bv_mux(carry, EZc, EZn)
    ss = b.and_(sx, b.not_(b.and_(eff_sub, b.eq_zero(sum31))))
    W = _round_pack(b, ss, EZ, S)
    # Specials.
    cancel = b.and_(b.and_(a["inf"], bb["inf"]), eff_sub)
    to_nan = b.or_(b.or_(a["nan"], bb["nan"]), cancel)
    some_inf = b.or_(a["inf"], bb["inf"])
    inf_sign = b.mux(a["inf"], a["s"], sb)
    infv = b.bv_const(0x7F800000, 31) + [inf_sign]
    qnan = b.bv_const(QNAN, 32)
    out = b.bv_mux(some_inf, infv, W)
    out = b.bv_mux(to_nan, qnan, out)
    return b, out


def _norm_sig(b: Builder, u) -> tuple[list[int], list[int]]:
    """Normalize a (possibly subnormal) operand: returns (sig24 with MSB
    at 23, 11-bit adjusted exponent E - shift)."""
    sig = u["sig"]
    c6 = b.clz(sig + [b.ZERO] * 8)  # 32-wide; = 8 for normals
    sh, _ = b.bv_sub(c6, b.bv_const(8, 6))
    sig = b.shl(sig, sh[0:5])
    E, _ = b.bv_sub(_sx(b, u["E"], 11), _sx(b, sh[0:5], 11))
    return sig, E


def _build_mul() -> tuple[Builder, list[int]]:
    b = Builder()
    a = _unpack(b, 0)
    bb = _unpack(b, 1)
    sz = b.xor(a["s"], bb["s"])
    sigA, EA = _norm_sig(b, a)
    sigB, EB = _norm_sig(b, bb)
    # 24x24 shift-add product, 48 bits.
    acc = [b.ZERO] * 24
    low: list[int] = []
    for i in range(24):
        pp = [b.and_(sigB[i], x) for x in sigA]
        s, c = b.bv_add(acc, pp)
        low.append(s[0])
        acc = s[1:] + [c]
    P = low + acc  # 48 bits
    EAB, _ = b.bv_add(EA, EB)
    p47 = P[47]
    S_hi = [b.or_(P[17], b.or_reduce(P[0:17]))] + P[18:48]   # P >> 17, jam
    S_lo = [b.or_(P[16], b.or_reduce(P[0:16]))] + P[17:47]   # P >> 16, jam
    S = b.bv_mux(p47, S_hi, S_lo)
    EZ_hi, _ = b.bv_add(EAB, b.bv_const((-126) & 0x7FF, 11))
    EZ_lo, _ = b.bv_add(EAB, b.bv_const((-127) & 0x7FF, 11))
    EZ = b.bv_mux(p47, EZ_hi, EZ_lo)
    W = _round_pack(b, sz, EZ, S)
    inf_zero = b.or_(
        b.and_(a["inf"], bb["zero"]), b.and_(a["zero"], bb["inf"])
    )
    to_nan = b.or_(b.or_(a["nan"], bb["nan"]), inf_zero)
    some_inf = b.or_(a["inf"], bb["inf"])
    some_zero = b.or_(a["zero"], bb["zero"])
    out = b.bv_mux(some_zero, b.bv_const(0, 31) + [sz], W)
    out = b.bv_mux(some_inf, b.bv_const(0x7F800000, 31) + [sz], out)
    out = b.bv_mux(to_nan, b.bv_const(QNAN, 32), out)
    return b, out


def _build_div() -> tuple[Builder, list[int]]:
    b = Builder()
    a = _unpack(b, 0)
    bb = _unpack(b, 1)
    sz = b.xor(a["s"], bb["s"])
    sigA, EA = _norm_sig(b, a)
    sigB, EB = _norm_sig(b, bb)
    # Restoring division: 27 quotient bits of sigA / sigB in [0.5, 2).
    D = sigB + [b.ZERO]  # 25 bits
    R = sigA + [b.ZERO]
    qbits: list[int] = []  # MSB first
    for k in range(27):
        if k > 0:
            R = [b.ZERO] + R[:-1]  # R <<= 1 (fits: R < D <= 2^24)
        t, c = b.bv_sub(R, D)
        qbits.append(c)
        R = b.bv_mux(c, t, R)
    sticky = b.or_reduce(R)
    Q = list(reversed(qbits))  # 27 bits, LSB first; MSB at 26 or 25
    q26 = Q[26]
    S_hi = [b.ZERO] * 4 + Q          # Q << 4 -> MSB at 30
    S_lo = ([b.ZERO] * 5 + Q)[0:31]  # Q << 5, top (zero) bit dropped
    S_hi = [sticky] + S_hi[1:]
    S_lo = [sticky] + S_lo[1:]
    S = b.bv_mux(q26, S_hi, S_lo)
    EZ0, _ = b.bv_sub(EA, EB)
    EZ0, _ = b.bv_add(EZ0, b.bv_const(127, 11))
    EZm1, _ = b.bv_sub(EZ0, b.bv_const(1, 11))
    EZ = b.bv_mux(q26, EZ0, EZm1)
    W = _round_pack(b, sz, EZ, S)
    to_nan = b.or_(
        b.or_(a["nan"], bb["nan"]),
        b.or_(b.and_(a["zero"], bb["zero"]), b.and_(a["inf"], bb["inf"])),
    )
    to_inf = b.or_(a["inf"], bb["zero"])
    to_zero = b.or_(a["zero"], bb["inf"])
    out = b.bv_mux(to_zero, b.bv_const(0, 31) + [sz], W)
    out = b.bv_mux(to_inf, b.bv_const(0x7F800000, 31) + [sz], out)
    out = b.bv_mux(to_nan, b.bv_const(QNAN, 32), out)
    return b, out


def _build_cmp(op: str) -> tuple[Builder, list[int]]:
    b = Builder()
    a = _unpack(b, 0)
    bb = _unpack(b, 1)
    nan_any = b.or_(a["nan"], bb["nan"])
    bothzero = b.and_(a["zero"], bb["zero"])
    mag_lt = b.lt_u(a["mag"], bb["mag"])
    mag_gt = b.lt_u(bb["mag"], a["mag"])
    mag_eq = b.bv_eq(a["mag"], bb["mag"])
    sdiff = b.xor(a["s"], bb["s"])
    lt = b.mux(
        sdiff,
        b.and_(a["s"], b.not_(bothzero)),
        b.mux(a["s"], mag_gt, mag_lt),
    )
    eq = b.or_(b.and_(b.not_(sdiff), mag_eq), bothzero)
    if op == "lt":
        r = lt
    elif op == "le":
        r = b.or_(lt, eq)
    elif op == "gt":
        r = b.not_(b.or_(lt, eq))
    elif op == "ge":
        r = b.not_(lt)
    else:  # eq
        r = eq
    r = b.and_(r, b.not_(nan_any))
    return b, [r] + [b.ZERO] * 31


def _build_sign() -> tuple[Builder, list[int]]:
    # sign(x): -1.0 / 0.0 / +1.0; NaN and +-0 both map to 0.0.
    b = Builder()
    a = _unpack(b, 0)
    ok = b.not_(b.or_(a["nan"], a["zero"]))
    out = [b.ZERO] * 23 + [ok] * 7 + [b.ZERO] + [b.and_(a["s"], ok)]
    return b, out


def get_circuit(name: str) -> tuple[Builder, list[int]]:
    """Cached circuits: fadd, fsub, fmul, fdiv, flt, fle, fgt, fge, feq, fsign."""
    got = _cache.get(name)
    if got is not None:
        return got
    if name == "fadd":
        got = _build_addsub(False)
    elif name == "fsub":
        got = _build_addsub(True)
    elif name == "fmul":
        got = _build_mul()
    elif name == "fdiv":
        got = _build_div()
    elif name in ("flt", "fle", "fgt", "fge", "feq"):
        got = _build_cmp(name[1:])
    elif name == "fsign":
        got = _build_sign()
    else:
        raise KeyError(name)
    _cache[name] = got
    return got


# -- hand-rolled trivial float ops -------------------------------------------


def lower_fneg(em: Emitter, sc: Scratch, dst: int, src: int) -> None:
    """Flip the sign bit (pure bit operation; does not canonicalize NaN)."""
    n = em.n
    t, t2 = sc.alloc(2)
    em.init_reg(t, 1)
    em.perform(Gate.NOT, [src], t)           # t = ~src
    em.serial(Gate.INIT1, (n - 1, t2))
    em.serial(Gate.NOT, (n - 1, t2), (n - 1, t))  # t2_31 = src_31
    em.init_reg(dst, 1)
    em.perform(Gate.NOT, [t], dst, range(0, n - 1))  # low bits = src
    em.serial(Gate.NOT, (n - 1, dst), (n - 1, t2))   # top bit flipped
    sc.free(t, t2)


def lower_fabs(em: Emitter, sc: Scratch, dst: int, src: int) -> None:
    """Clear the sign bit."""
    n = em.n
    t = sc.one()
    em.init_reg(t, 1)
    em.perform(Gate.NOT, [src], t)  # t = ~src
    em.init_reg(dst, 1)
    em.perform(Gate.NOT, [t], dst, range(0, n - 1))
    em.serial(Gate.INIT0, (n - 1, dst))
    sc.free(t)
