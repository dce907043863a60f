"""Smoke test for the tensor library against host oracles."""

import sys

import numpy as np

from pimsim.config import ArchConfig
from pimsim.tensors import Session

rng = np.random.default_rng(5)
fails = []


def check(name, cond):
    print(("ok   " if cond else "FAIL ") + name)
    if not cond:
        fails.append(name)


def tree_reduce(vals, fn):
    vals = list(vals)
    while len(vals) > 1:
        half = len(vals) // 2
        nxt = [fn(vals[2 * i], vals[2 * i + 1]) for i in range(half)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def main():
    cfg = ArchConfig(rows_h=10, num_crossbars=4)  # h_user = 8
    s = Session(cfg)

    # host round-trip, float specials
    fvals = np.array([0.0, -0.0, 1.5, -2.25, np.inf, -np.inf, 3e-41, 1e38],
                     dtype=np.float32)
    t = s.from_host(fvals)
    back = s.to_host(t)
    check("float round-trip bits", np.array_equal(back.view(np.uint32),
                                                  fvals.view(np.uint32)))
    s.free(t)

    ivals = rng.integers(-2**31, 2**31, size=20, dtype=np.int64).astype(np.int32)
    t = s.from_host(ivals)
    check("int round-trip", np.array_equal(s.to_host(t), ivals))

    # element access across a warp boundary
    s.set_element(t, 8, -7)
    check("set/get at warp boundary", s.get_element(t, 8) == -7)
    ivals[8] = -7

    # aligned elementwise
    u = s.from_host(rng.integers(-1000, 1000, size=20).astype(np.int32))
    uv = s.to_host(u)
    with s.profiler() as prof:
        z = s.elementwise("add", t, u)
    check("aligned int add", np.array_equal(s.to_host(z), ivals + uv))
    check("profiler counted", prof.counters.total > 0)

    # view arithmetic with automatic moves: even + odd halves
    w = s.elementwise("add", t[::2], t[1::2])
    want = ivals[::2] + ivals[1::2]
    check("strided view add (move fall-back)", np.array_equal(s.to_host(w), want))

    # nested view composition
    v = t[1::2][::2]
    check("nested views", np.array_equal(s.to_host(v), ivals[1::2][::2]))

    # scalar broadcast
    q = s.elementwise("multiply", t, 3)
    check("scalar broadcast", np.array_equal(s.to_host(q), ivals * 3))
    for h in (z, w, q, u):
        s.free(h)

    # reduce: same-tree oracle, int and float
    got = s.reduce(t, "sum")
    want = tree_reduce([int(x) for x in ivals],
                       lambda a, b: (a + b + 2**31) % 2**32 - 2**31)
    check("int tree sum", got == want)
    s.free(t)

    fdata = rng.standard_normal(23).astype(np.float32)
    ft = s.from_host(fdata)
    got = s.reduce(ft, "sum")
    want = tree_reduce(list(fdata), lambda a, b: np.float32(a + b))
    check("float tree sum bit-exact", np.float32(got) == want)
    got = s.reduce(ft[::2], "product")
    want = tree_reduce(list(fdata[::2]), lambda a, b: np.float32(a * b))
    check("float view tree product", np.float32(got) == want)
    s.free(ft)

    # sort small: appendix-style values, non-power-of-two, idempotence
    xs = s.from_host(np.array([0.0, 2.5, 2.25, 0.0], dtype=np.float32))
    s.sort(xs)
    check("4-elt float sort", np.array_equal(s.to_host(xs),
                                             np.array([0, 0, 2.25, 2.5], np.float32)))
    s.sort(xs)
    check("sort idempotent", np.array_equal(s.to_host(xs),
                                            np.array([0, 0, 2.25, 2.5], np.float32)))
    s.free(xs)

    data = rng.integers(-50, 50, size=21).astype(np.int32)
    ti = s.from_host(data)
    s.sort(ti[3:20])  # sort a view region in place
    want = data.copy()
    want[3:20] = np.sort(data[3:20])
    check("int view sort (pad path)", np.array_equal(s.to_host(ti), want))
    s.free(ti)

    # larger multi-warp sort with cross-warp stages
    cfg2 = ArchConfig(rows_h=18, num_crossbars=16)  # h_user = 16, pow2
    s2 = Session(cfg2)
    big = rng.integers(-10**6, 10**6, size=256).astype(np.int32)
    tb = s2.from_host(big)
    s2.sort(tb)
    check("256-elt cross-warp int sort", np.array_equal(s2.to_host(tb), np.sort(big)))
    s2.free(tb)

    fbig = rng.standard_normal(100).astype(np.float32)
    tf = s2.from_host(fbig)
    s2.sort(tf)
    check("100-elt cross-warp float sort", np.array_equal(s2.to_host(tf), np.sort(fbig)))
    got = s2.reduce(tf, "sum")
    check("multi-warp reduce", np.float32(got) == tree_reduce(sorted(fbig), # noqa
          lambda a, b: np.float32(a + b)))
    s2.free(tf)

    sys.exit(1 if fails else 0)


main()
