"""Exception hierarchy shared by all pimsim layers."""


class PimError(Exception):
    """Base class for all pimsim errors."""


class ConfigError(PimError):
    """Invalid architecture configuration."""


class EncodeError(PimError):
    """Micro-op cannot be encoded (invariant violation)."""


class DecodeError(PimError):
    """64-bit word does not decode to a valid micro-op."""


class InvalidOperation(PimError):
    """Half-gate pattern violates the section rules, or operands out of range."""


class UninitializedOutput(PimError):
    """Checked mode: NOR/NOT issued with an output cell that is not 1."""


class AmbiguousRead(PimError):
    """Read issued while the masks select more or fewer than one row."""


class InvalidMove(PimError):
    """Move with out-of-range destination, source/destination overlap, or pair collision."""


class UnsupportedInstruction(PimError):
    """No lowering exists for this (opcode, dtype) pair."""


class OutOfMemory(PimError):
    """Allocator cannot satisfy the request."""


class ZeroLength(PimError):
    """Zero-length tensor allocation."""


class EmptyReduction(PimError):
    """Reduction over an empty tensor."""
