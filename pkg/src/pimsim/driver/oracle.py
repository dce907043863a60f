"""Host reference semantics for every R-type (opcode, dtype) pair.

Words are raw N-bit integers (N = 32). Conventions match the lowered
routines exactly: two's-complement wrapping, truncating signed division
with an all-ones divide-by-zero sentinel, IEEE-754 binary32 with NaN
results canonicalized to one quiet pattern, comparisons returning 0x1/0x0.
"""

from __future__ import annotations

import numpy as np

__all__ = ["QNAN", "host_rtype", "host_rtype_array"]

QNAN = 0x7FC00000
_SIGN = np.uint32(0x80000000)
_MAG = np.uint32(0x7FFFFFFF)
_ONES = np.uint32(0xFFFFFFFF)


def host_rtype(opcode: str, dtype: str, operands: tuple[int, ...]) -> int:
    arrs = [np.array([w], dtype=np.uint32) for w in operands]
    return int(host_rtype_array(opcode, dtype, arrs)[0])


def host_rtype_array(opcode: str, dtype: str, operands: list[np.ndarray]) -> np.ndarray:
    """Vectorized oracle over parallel uint32 word arrays."""
    ops = [np.asarray(a, dtype=np.uint32) for a in operands]
    if opcode in ("not", "and", "or", "xor"):
        return _bitwise(opcode, ops)
    if dtype == "int32":
        return _int_op(opcode, ops)
    return _float_op(opcode, ops)


def _bitwise(opcode: str, ops: list[np.ndarray]) -> np.ndarray:
    if opcode == "not":
        return ~ops[0]
    a, b = ops
    if opcode == "and":
        return a & b
    if opcode == "or":
        return a | b
    return a ^ b


def _flag(cond: np.ndarray) -> np.ndarray:
    return cond.astype(np.uint32)


def _int_op(opcode: str, ops: list[np.ndarray]) -> np.ndarray:
    sig = [a.view(np.int32) for a in ops]
    a = sig[0]
    b = sig[1] if len(sig) > 1 else None
    with np.errstate(all="ignore"):
        if opcode == "add":
            return (a + b).view(np.uint32)
        if opcode == "subtract":
            return (a - b).view(np.uint32)
        if opcode == "multiply":
            return (a * b).view(np.uint32)
        if opcode == "negate":
            return (-a).view(np.uint32)
        if opcode == "abs":
            return np.abs(a).view(np.uint32)
        if opcode in ("divide", "modulo"):
            a64 = a.astype(np.int64)
            b64 = b.astype(np.int64)
            safe = np.where(b64 == 0, 1, b64)
            mag = np.abs(a64) // np.abs(safe)
            q = np.where((a64 ^ b64) >= 0, mag, -mag)
            r = a64 - q * safe
            out = q if opcode == "divide" else r
            out = (out & 0xFFFFFFFF).astype(np.uint32)
            return np.where(b64 == 0, _ONES, out)
        if opcode == "lt":
            return _flag(a < b)
        if opcode == "le":
            return _flag(a <= b)
        if opcode == "gt":
            return _flag(a > b)
        if opcode == "ge":
            return _flag(a >= b)
        if opcode == "eq":
            return _flag(a == b)
        if opcode == "sign":
            return np.where(a > 0, np.uint32(1), np.where(a < 0, _ONES, np.uint32(0)))
        if opcode == "zero":
            return _flag(a == 0)
        if opcode == "mux":
            sel, x, y = ops
            return np.where(sel != 0, x, y)
    raise ValueError(f"unknown int opcode {opcode!r}")


def _float_op(opcode: str, ops: list[np.ndarray]) -> np.ndarray:
    flt = [a.view(np.float32) for a in ops]
    a = flt[0]
    b = flt[1] if len(flt) > 1 else None
    with np.errstate(all="ignore"):
        if opcode in ("add", "subtract", "multiply", "divide"):
            fn = {"add": np.add, "subtract": np.subtract,
                  "multiply": np.multiply, "divide": np.divide}[opcode]
            r = fn(a, b).astype(np.float32)
            bits = r.view(np.uint32).copy()
            bits[np.isnan(r)] = QNAN
            return bits
        if opcode == "negate":
            return ops[0] ^ _SIGN
        if opcode == "abs":
            return ops[0] & _MAG
        if opcode == "lt":
            return _flag(a < b)
        if opcode == "le":
            return _flag(a <= b)
        if opcode == "gt":
            return _flag(a > b)
        if opcode == "ge":
            return _flag(a >= b)
        if opcode == "eq":
            return _flag(a == b)
        if opcode == "sign":
            none = np.isnan(a) | (a == 0)
            return np.where(none, np.uint32(0),
                            np.where(a < 0, np.uint32(0xBF800000), np.uint32(0x3F800000)))
        if opcode == "zero":
            return _flag((ops[0] & _MAG) == 0)
        if opcode == "mux":
            sel, x, y = ops
            return np.where((sel & _MAG) != 0, x, y)
    raise ValueError(f"unknown float opcode {opcode!r}")
