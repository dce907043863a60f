"""Array-library-style bindings over the pimsim tensor library.

Every bound operation delegates 1:1 to a tensor-library call on a shared
session; no computation happens here. Tensors free their memory when the
host object is garbage-collected.

    >>> import pypim as pim
    >>> x = pim.zeros(8, dtype=pim.float32)
    >>> x[2] = 2.5
    >>> x[::2].sum()
    2.5
"""

from __future__ import annotations

import numpy as np

from pimsim.config import ArchConfig, DEFAULT_CONFIG, load_config
from pimsim.errors import InvalidOperation
from pimsim.tensors import Session
from pimsim.tensors import Tensor as _CoreTensor
from pimsim.tensors import TensorView as _CoreView

__all__ = [
    "init",
    "session",
    "zeros",
    "from_numpy",
    "to_numpy",
    "Tensor",
    "Profiler",
    "float32",
    "int32",
]

float32 = "float32"
int32 = "int32"

_SESSION: Session | None = None


def init(config: ArchConfig | str | None = None, record_trace: bool = False) -> Session:
    """(Re)initialize the global session; a path loads a key=value config."""
    global _SESSION
    if isinstance(config, str):
        config = load_config(config)
    _SESSION = Session(config or DEFAULT_CONFIG, record_trace=record_trace)
    return _SESSION


def session() -> Session:
    global _SESSION
    if _SESSION is None:
        _SESSION = Session(DEFAULT_CONFIG)
    return _SESSION


def zeros(length: int, dtype: str = float32) -> "Tensor":
    return Tensor(session().alloc(length, dtype), owns=True)


def from_numpy(values) -> "Tensor":
    return Tensor(session().from_host(np.asarray(values)), owns=True)


def to_numpy(t: "Tensor") -> np.ndarray:
    return t._session.to_host(t._core)


class Profiler:
    """`with pim.Profiler() as p:` — counts micro-op cycles in the scope."""

    def __init__(self):
        self._inner = session().profiler()
        self.counters = None

    def __enter__(self) -> "Profiler":
        self._inner.__enter__()
        return self

    def __exit__(self, exc_type, exc, tb):
        self._inner.__exit__(exc_type, exc, tb)
        self.counters = self._inner.counters


class Tensor:
    """Bound tensor/view wrapper with operator syntax."""

    def __init__(self, core, owns: bool):
        self._core = core
        self._owns = owns

    # -- bookkeeping ------------------------------------------------------

    @property
    def _session(self) -> Session:
        return self._core.session

    @property
    def dtype(self) -> str:
        return self._core.dtype

    @property
    def shape(self) -> tuple[int]:
        return (len(self._core),)

    def __len__(self) -> int:
        return len(self._core)

    def __del__(self):
        if not self._owns:
            return
        try:
            if self._core.alive:
                self._session.free(self._core)
        except Exception:
            pass  # interpreter shutdown or an already-dropped session

    # -- element and slice access ------------------------------------------

    def __getitem__(self, key):
        if isinstance(key, (int, np.integer)):
            return self._session.get_element(self._core, int(key))
        return Tensor(self._core[key], owns=False)

    def __setitem__(self, key, value):
        if not isinstance(key, (int, np.integer)):
            raise InvalidOperation("only single elements can be assigned")
        self._session.set_element(self._core, int(key), value)

    # -- arithmetic and comparison delegates -----------------------------------

    def _binary(self, opcode: str, other, reflected: bool = False):
        rhs = other._core if isinstance(other, Tensor) else other
        args = (rhs, self._core) if reflected else (self._core, rhs)
        return Tensor(self._session.elementwise(opcode, *args), owns=True)

    def __add__(self, other):
        return self._binary("add", other)

    def __radd__(self, other):
        return self._binary("add", other, reflected=True)

    def __sub__(self, other):
        return self._binary("subtract", other)

    def __rsub__(self, other):
        return self._binary("subtract", other, reflected=True)

    def __mul__(self, other):
        return self._binary("multiply", other)

    def __rmul__(self, other):
        return self._binary("multiply", other, reflected=True)

    def __truediv__(self, other):
        return self._binary("divide", other)

    def __rtruediv__(self, other):
        return self._binary("divide", other, reflected=True)

    def __lt__(self, other):
        return self._binary("lt", other)

    def __le__(self, other):
        return self._binary("le", other)

    def __gt__(self, other):
        return self._binary("gt", other)

    def __ge__(self, other):
        return self._binary("ge", other)

    def __neg__(self):
        return Tensor(self._session.elementwise("negate", self._core), owns=True)

    def __abs__(self):
        return Tensor(self._session.elementwise("abs", self._core), owns=True)

    def eq(self, other) -> "Tensor":
        """Elementwise equality (kept off __eq__ to preserve hashing)."""
        return self._binary("eq", other)

    # -- reductions and sorting ---------------------------------------------------

    def sum(self):
        return self._session.reduce(self._core, "sum")

    def prod(self):
        return self._session.reduce(self._core, "product")

    def sort(self) -> "Tensor":
        self._session.sort(self._core)
        return self

    # -- representation --------------------------------------------------------------

    def _values_text(self) -> str:
        vals = self._session.to_host(self._core)
        return "[" + ", ".join(repr(float(v)) if self.dtype == float32
                               else repr(int(v)) for v in vals) + "]"

    def __repr__(self) -> str:
        if isinstance(self._core, _CoreView):
            c = self._core
            sl = f"slice({c.start}, {c.start + (len(c) - 1) * c.step + 1}, {c.step})"
            head = (f"TensorView(shape=({len(c)},), dtype={self.dtype}, "
                    f"slicing={sl})")
        else:
            head = f"Tensor(shape=({len(self._core)},), dtype={self.dtype})"
        return f"{head}:\n  {self._values_text()}"
