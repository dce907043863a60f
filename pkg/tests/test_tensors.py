"""Tensor library: allocation, views, elementwise, reduce, sort, profiling."""

import numpy as np
import pytest

from pimsim.config import ArchConfig
from pimsim.errors import (
    EmptyReduction,
    InvalidOperation,
    OutOfMemory,
    ZeroLength,
)
from pimsim.tensors import Session

CFG = ArchConfig(rows_h=10, num_crossbars=4)  # h_user = 8
CFG2 = ArchConfig(rows_h=18, num_crossbars=16)  # h_user = 16


def tree_reduce(vals, fn):
    vals = list(vals)
    while len(vals) > 1:
        half = len(vals) // 2
        nxt = [fn(vals[2 * i], vals[2 * i + 1]) for i in range(half)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


@pytest.fixture
def session():
    return Session(CFG)


def test_float_roundtrip_specials(session):
    vals = np.array([0.0, -0.0, 1.5, -2.25, np.inf, -np.inf, 3e-41, 1e38],
                    dtype=np.float32)
    t = session.from_host(vals)
    back = session.to_host(t)
    assert np.array_equal(back.view(np.uint32), vals.view(np.uint32))


def test_int_roundtrip_and_elements(session):
    rng = np.random.default_rng(0)
    vals = rng.integers(-2**31, 2**31, size=20, dtype=np.int64).astype(np.int32)
    t = session.from_host(vals)
    assert np.array_equal(session.to_host(t), vals)
    session.set_element(t, 8, -7)  # crosses the first warp boundary
    assert session.get_element(t, 8) == -7


def test_alloc_errors(session):
    with pytest.raises(ZeroLength):
        session.alloc(0, "int32")
    with pytest.raises(InvalidOperation):
        session.alloc(4, "float64")
    capacity = CFG.num_crossbars * CFG.h_user
    with pytest.raises(OutOfMemory):
        session.alloc(capacity * CFG.user_regs + 1, "int32")


def test_free_semantics(session):
    t = session.alloc(4, "int32")
    v = t[0:2]
    with pytest.raises(InvalidOperation):
        session.free(v)  # views own nothing
    session.free(t)
    with pytest.raises(InvalidOperation):
        session.free(t)  # double free


def test_view_composition(session):
    vals = np.arange(20, dtype=np.int32)
    t = session.from_host(vals)
    assert np.array_equal(session.to_host(t[1::2][::2]), vals[1::2][::2])
    assert np.array_equal(session.to_host(t[3:15][2:8:2]), vals[3:15][2:8:2])
    with pytest.raises(InvalidOperation):
        t[::-1]


def test_elementwise_aligned(session):
    rng = np.random.default_rng(1)
    a = rng.integers(-1000, 1000, size=20).astype(np.int32)
    b = rng.integers(-1000, 1000, size=20).astype(np.int32)
    ta, tb = session.from_host(a), session.from_host(b)
    with session.profiler() as prof:
        out = session.elementwise("add", ta, tb)
    assert np.array_equal(session.to_host(out), a + b)
    assert prof.counters.total > 0


def test_elementwise_misaligned_copy_fallback(session):
    vals = np.arange(20, dtype=np.int32)
    t = session.from_host(vals)
    out = session.elementwise("add", t[::2], t[1::2])
    assert np.array_equal(session.to_host(out), vals[::2] + vals[1::2])


def test_elementwise_scalar_broadcast(session):
    vals = np.arange(20, dtype=np.int32)
    t = session.from_host(vals)
    out = session.elementwise("multiply", t, 3)
    assert np.array_equal(session.to_host(out), vals * 3)


def test_elementwise_shape_checks(session):
    a = session.from_host(np.arange(4, dtype=np.int32))
    b = session.from_host(np.arange(5, dtype=np.int32))
    f = session.from_host(np.arange(4, dtype=np.float32))
    with pytest.raises(InvalidOperation):
        session.elementwise("add", a, b)
    with pytest.raises(InvalidOperation):
        session.elementwise("add", a, f)
    with pytest.raises(InvalidOperation):
        session.elementwise("add", 1, 2)


def test_alloc_reference_alignment_fallback(session):
    """Exhaust aligned registers so an op's output lands elsewhere and the
    operands are staged through copies."""
    base = session.from_host(np.arange(8, dtype=np.int32))  # warp 0 only
    fillers = [session.alloc(8, "int32", reference=base)
               for _ in range(CFG.user_regs - 1)]
    assert all(f.first_warp == 0 for f in fillers)  # warp 0 fully occupied
    other = session.from_host(np.arange(8, dtype=np.int32) * 2)
    assert other.first_warp != base.first_warp  # forced to a different warp
    session.free(fillers.pop())
    session.free(fillers.pop())  # room for the output and one staging copy
    out = session.elementwise("add", base, other)
    assert out.first_warp == base.first_warp
    assert np.array_equal(session.to_host(out), np.arange(8) * 3)


def test_reduce_int_matches_tree(session):
    rng = np.random.default_rng(2)
    vals = rng.integers(-2**30, 2**30, size=23).astype(np.int32)
    t = session.from_host(vals)
    want = tree_reduce([int(x) for x in vals],
                       lambda a, b: (a + b + 2**31) % 2**32 - 2**31)
    assert session.reduce(t, "sum") == want


def test_reduce_float_bitexact_same_tree(session):
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(23).astype(np.float32)
    t = session.from_host(vals)
    got = session.reduce(t, "sum")
    want = tree_reduce(list(vals), lambda a, b: np.float32(a + b))
    assert np.float32(got).tobytes() == np.float32(want).tobytes()
    got = session.reduce(t[::2], "product")
    want = tree_reduce(list(vals[::2]), lambda a, b: np.float32(a * b))
    assert np.float32(got).tobytes() == np.float32(want).tobytes()


def test_reduce_errors(session):
    t = session.from_host(np.arange(4, dtype=np.int32))
    with pytest.raises(EmptyReduction):
        session.reduce(t[0:0])
    with pytest.raises(InvalidOperation):
        session.reduce(t, "max")


def test_sort_small_float(session):
    t = session.from_host(np.array([0.0, 2.5, 2.25, 0.0], dtype=np.float32))
    session.sort(t)
    assert np.array_equal(session.to_host(t),
                          np.array([0, 0, 2.25, 2.5], np.float32))
    session.sort(t)  # idempotent
    assert np.array_equal(session.to_host(t),
                          np.array([0, 0, 2.25, 2.5], np.float32))


def test_sort_view_with_padding(session):
    data = np.random.default_rng(4).integers(-50, 50, size=21).astype(np.int32)
    t = session.from_host(data)
    session.sort(t[3:20])
    want = data.copy()
    want[3:20] = np.sort(data[3:20])
    assert np.array_equal(session.to_host(t), want)


def test_sort_nan_rejected(session):
    t = session.from_host(np.array([1.0, np.nan, 2.0], dtype=np.float32))
    with pytest.raises(InvalidOperation):
        session.sort(t)


def test_sort_negatives_and_zeros(session):
    data = np.array([-0.0, 1.5, -3.25, 0.0, -1.5, 2.0], dtype=np.float32)
    t = session.from_host(data)
    session.sort(t)
    assert np.array_equal(session.to_host(t), np.sort(data))


def test_cross_warp_sort_and_reduce():
    s = Session(CFG2)
    rng = np.random.default_rng(5)
    big = rng.integers(-10**6, 10**6, size=256).astype(np.int32)
    t = s.from_host(big)
    s.sort(t)
    assert np.array_equal(s.to_host(t), np.sort(big))
    s.free(t)
    vals = rng.standard_normal(100).astype(np.float32)
    tf = s.from_host(vals)
    got = s.reduce(tf, "sum")
    want = tree_reduce(list(vals), lambda a, b: np.float32(a + b))
    assert np.float32(got).tobytes() == np.float32(want).tobytes()


def test_profiler_nesting(session):
    t = session.from_host(np.arange(8, dtype=np.int32))
    with session.profiler() as outer:
        session.elementwise("add", t, t)
        with session.profiler() as inner:
            session.elementwise("add", t, t)
    assert inner.counters.total < outer.counters.total


def test_profiler_unbalanced_rejected(session):
    p1 = session.profiler()
    p2 = session.profiler()
    p1.__enter__()
    p2.__enter__()
    with pytest.raises(InvalidOperation):
        p1.__exit__(None, None, None)


def test_trace_recording():
    s = Session(CFG, record_trace=True)
    t = s.from_host(np.arange(4, dtype=np.int32))
    s.elementwise("add", t, t)
    assert s.trace_words and all(0 <= w < 2**64 for w in s.trace_words)
    s2 = Session(CFG)
    assert s2.trace_words is None
