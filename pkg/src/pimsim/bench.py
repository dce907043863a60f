"""Benchmark suite: seeded random inputs through the tensor library on the
simulator, verified against host oracles, with cycle/throughput reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ArchConfig
from .errors import InvalidOperation
from .tensors import Session, Tensor

__all__ = [
    "BenchReport",
    "run_benchmark",
    "cordic_sincos",
    "throughput",
    "throughput_report",
    "published_add_crosscheck",
    "BENCHMARKS",
    "csv_header",
    "csv_row",
]

# Full-scale reference point: 64M rows at 300 MHz, ~92-cycle int add.
_FULL_SCALE_ROWS = 64e6
_FULL_SCALE_CLOCK = 300e6
_INT_ADD_LATENCY = 92
_PUBLISHED_INT_ADD = 208e12


@dataclass
class BenchReport:
    name: str
    elements: int
    dtype: str
    cycles_total: int
    cycles_by_kind: dict[str, int] = field(default_factory=dict)
    throughput_ops: float = 0.0
    passed: bool = True
    detail: str = ""


def throughput(parallelism_rows: float, latency_cycles: float, clock_hz: float) -> float:
    """ops/s = Parallelism[ops] / Latency[cycles] * Frequency[cycles/s]."""
    return parallelism_rows / latency_cycles * clock_hz


def published_add_crosscheck() -> tuple[float, float]:
    """(computed, published) full-scale int-add throughput in ops/s."""
    return (throughput(_FULL_SCALE_ROWS, _INT_ADD_LATENCY, _FULL_SCALE_CLOCK),
            _PUBLISHED_INT_ADD)


def throughput_report(report: BenchReport, cfg: ArchConfig) -> str:
    rows = cfg.num_crossbars * cfg.rows_h
    lines = [
        f"benchmark       : {report.name} ({report.dtype}, {report.elements} elements)",
        f"status          : {'pass' if report.passed else 'FAIL'}"
        + (f" ({report.detail})" if report.detail else ""),
        f"total cycles    : {report.cycles_total}",
    ]
    for kind, count in report.cycles_by_kind.items():
        if count:
            lines.append(f"  {kind:<14}: {count}")
    lines += [
        f"parallelism     : {rows} rows",
        f"clock           : {cfg.clock_hz:.3e} Hz",
        f"throughput      : {report.throughput_ops:.4e} ops/s "
        f"(= {rows} / {report.cycles_total} * {cfg.clock_hz:.3e})",
    ]
    computed, published = published_add_crosscheck()
    lines.append(
        f"full-scale check: 64M rows @ 300 MHz, {_INT_ADD_LATENCY}-cycle int add "
        f"-> {computed:.4e} ops/s (published {published:.2e}, "
        f"gap {abs(computed - published) / published * 100:.2f}%)"
    )
    return "\n".join(lines)


def csv_header() -> str:
    return "name,dtype,elements,cycles,throughput_ops_s,passed"


def csv_row(r: BenchReport) -> str:
    return (f"{r.name},{r.dtype},{r.elements},{r.cycles_total},"
            f"{r.throughput_ops:.6e},{int(r.passed)}")


# -- CORDIC -------------------------------------------------------------------


def cordic_sincos(session: Session, t: Tensor, iterations: int = 24):
    """Rotation-mode CORDIC sin/cos over a float32 angle tensor.

    Angles must lie in [-pi/2, pi/2] (no argument reduction).
    """
    if t.dtype != "float32":
        raise InvalidOperation("cordic needs a float32 tensor")
    angles = session.to_host(t)
    if np.any(np.abs(angles) > np.float32(math.pi / 2) * np.float32(1 + 1e-6)):
        raise InvalidOperation("cordic angle out of [-pi/2, pi/2]")
    gain = 1.0
    for i in range(iterations):
        gain *= 1.0 / math.sqrt(1.0 + 2.0 ** (-2 * i))
    s = session
    x = s.elementwise("multiply", t, 0.0)
    s.elementwise("add", x, np.float32(gain), out=x)  # x0 = K
    y = s.elementwise("multiply", t, 0.0)              # y0 = 0
    z = s.elementwise("add", t, 0.0)                   # z0 = angle
    for i in range(iterations):
        p2 = np.float32(2.0 ** (-i))
        at = np.float32(math.atan(2.0 ** (-i)))
        d = s.elementwise("sign", z)
        # z == 0 must still rotate (by +1): the gain constant assumes every
        # iteration applies a rotation.
        s.elementwise("mux", d, d, np.float32(1.0), out=d)
        dx = s.elementwise("multiply", y, p2)
        s.elementwise("multiply", dx, d, out=dx)
        dy = s.elementwise("multiply", x, p2)
        s.elementwise("multiply", dy, d, out=dy)
        dz = s.elementwise("multiply", d, at)
        s.elementwise("subtract", x, dx, out=x)
        s.elementwise("add", y, dy, out=y)
        s.elementwise("subtract", z, dz, out=z)
        for tmp in (d, dx, dy, dz):
            s.free(tmp)
    s.free(z)
    return y, x  # (sin, cos)


# -- host same-tree reduction oracle ---------------------------------------------


def tree_oracle(values, fn):
    vals = list(values)
    while len(vals) > 1:
        half = len(vals) // 2
        nxt = [fn(vals[2 * i], vals[2 * i + 1]) for i in range(half)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


# -- benchmark bodies -------------------------------------------------------------


class _SessionFactory:
    """Creates the sessions a benchmark uses and keeps them for trace capture."""

    def __init__(self, cfg: ArchConfig, record: bool = False):
        self.cfg = cfg
        self.record = record
        self.sessions: list[Session] = []

    def __call__(self) -> Session:
        s = Session(self.cfg, record_trace=self.record)
        self.sessions.append(s)
        return s

    def trace_words(self) -> list[int]:
        words: list[int] = []
        for s in self.sessions:
            if s.trace_words:
                words.extend(s.trace_words)
        return words


def _capacity(cfg: ArchConfig) -> int:
    return cfg.num_crossbars * cfg.h_user


def _default_elements(cfg: ArchConfig, want: int | None, divisor: int = 4) -> int:
    if want is not None:
        return want
    return min(4096, _capacity(cfg) // divisor)


def _report_op(session: Session, name: str, elements: int, dtype: str,
               cycles, ok: bool, detail: str = "") -> BenchReport:
    cfg = session.cfg
    rows = cfg.num_crossbars * cfg.rows_h
    total = cycles.total
    return BenchReport(name, elements, dtype, total, dict(cycles.counts),
                       throughput(rows, max(1, total), cfg.clock_hz), ok, detail)


def _bench_arith(new: _SessionFactory, seed: int, elements: int | None) -> list[BenchReport]:
    return _bench_binary(new, seed, elements,
                         ("add", "subtract", "multiply", "divide"), "arith")


def _bench_compare(new: _SessionFactory, seed: int, elements: int | None) -> list[BenchReport]:
    return _bench_binary(new, seed, elements,
                         ("lt", "le", "gt", "ge", "eq"), "compare")


def _bench_binary(new, seed, elements, opcodes, prefix) -> list[BenchReport]:
    from .driver import host_rtype_array

    cfg = new.cfg
    n = _default_elements(cfg, elements)
    rng = np.random.default_rng(seed)
    reports = []
    for dtype in ("int32", "float32"):
        session = new()
        if dtype == "int32":
            a_host = rng.integers(-10**6, 10**6, size=n, dtype=np.int64).astype(np.int32)
            b_host = rng.integers(-10**6, 10**6, size=n, dtype=np.int64).astype(np.int32)
            b_host[b_host == 0] = 1
        else:
            a_host = (rng.standard_normal(n) * 100).astype(np.float32)
            b_host = (rng.standard_normal(n) * 100 + 1).astype(np.float32)
        a = session.from_host(a_host)
        b = session.from_host(b_host)
        for op in opcodes:
            with session.profiler() as prof:
                out = session.elementwise(op, a, b)
            got = session.to_host(out).view(np.uint32)
            want = host_rtype_array(op, dtype, [a_host.view(np.uint32),
                                                b_host.view(np.uint32)])
            ok = bool(np.array_equal(got, want))
            detail = "" if ok else _first_mismatch(a_host, b_host, got, want)
            reports.append(_report_op(session, f"{prefix}/{op}", n, dtype,
                                      prof.counters, ok, detail))
            session.free(out)
        session.free(a)
        session.free(b)
    return reports


def _first_mismatch(a, b, got, want) -> str:
    bad = np.nonzero(got != want)[0][0]
    return (f"first mismatch at {bad}: a={a[bad]!r} b={b[bad]!r} "
            f"got=0x{got[bad]:08x} want=0x{want[bad]:08x}")


def _bench_cordic(new: _SessionFactory, seed: int, elements: int | None) -> list[BenchReport]:
    cfg = new.cfg
    n = _default_elements(cfg, elements, divisor=8)
    rng = np.random.default_rng(seed)
    angles = (rng.uniform(-math.pi / 2, math.pi / 2, size=n)).astype(np.float32)
    session = new()
    t = session.from_host(angles)
    with session.profiler() as prof:
        sin_t, cos_t = cordic_sincos(session, t)
    got_sin = session.to_host(sin_t)
    got_cos = session.to_host(cos_t)
    err = max(np.max(np.abs(got_sin - np.sin(angles, dtype=np.float32))),
              np.max(np.abs(got_cos - np.cos(angles, dtype=np.float32))))
    ok = bool(err <= 1e-3)
    return [_report_op(session, "cordic/sincos", n, "float32", prof.counters,
                       ok, f"max |err| = {err:.2e}")]


def _bench_reduce(new: _SessionFactory, seed: int, elements: int | None) -> list[BenchReport]:
    cfg = new.cfg
    n = _default_elements(cfg, elements)
    rng = np.random.default_rng(seed)
    reports = []
    for dtype, op in (("int32", "sum"), ("int32", "product"),
                      ("float32", "sum"), ("float32", "product")):
        session = new()
        if dtype == "int32":
            host = rng.integers(-9, 9, size=n, dtype=np.int64).astype(np.int32)
            fn = lambda x, y: int(((int(x) * int(y) if op == "product"
                                    else int(x) + int(y)) + 2**31) % 2**32 - 2**31)
        else:
            host = (rng.standard_normal(n)).astype(np.float32)
            if op == "product":
                host = (1.0 + host * 0.01).astype(np.float32)
            fn = (lambda x, y: np.float32(x * y)) if op == "product" else \
                 (lambda x, y: np.float32(x + y))
        t = session.from_host(host)
        with session.profiler() as prof:
            got = session.reduce(t, op)
        want = tree_oracle(host, fn)
        if dtype == "int32":
            ok = int(got) == int(np.int32(want))
        else:
            ok = np.float32(got).tobytes() == np.float32(want).tobytes()
        reports.append(_report_op(session, f"reduce/{op}", n, dtype,
                                  prof.counters, bool(ok),
                                  "" if ok else f"got {got} want {want}"))
        session.free(t)
    return reports


def _bench_sort(new: _SessionFactory, seed: int, elements: int | None) -> list[BenchReport]:
    n = _default_elements(new.cfg, elements)
    rng = np.random.default_rng(seed)
    host = rng.standard_normal(n).astype(np.float32)
    session = new()
    t = session.from_host(host)
    with session.profiler() as prof:
        session.sort(t)
    got = session.to_host(t)
    ok = bool(np.array_equal(got, np.sort(host)))
    return [_report_op(session, "sort/bitonic", n, "float32", prof.counters,
                       ok, "" if ok else "order mismatch")]


BENCHMARKS = {
    "arith": _bench_arith,
    "compare": _bench_compare,
    "cordic": _bench_cordic,
    "reduce": _bench_reduce,
    "sort": _bench_sort,
}


def run_benchmark(name: str, cfg: ArchConfig, seed: int = 0,
                  elements: int | None = None,
                  trace_sink: list[int] | None = None) -> list[BenchReport]:
    """Run one suite; if `trace_sink` is given, append the micro-op words."""
    if name not in BENCHMARKS:
        raise InvalidOperation(f"unknown benchmark {name!r} "
                               f"(choose from {sorted(BENCHMARKS)})")
    factory = _SessionFactory(cfg, record=trace_sink is not None)
    reports = BENCHMARKS[name](factory, seed, elements)
    if trace_sink is not None:
        trace_sink.extend(factory.trace_words())
    return reports
