"""Size limits that keep brute-force oracles at desk scale.

The three user-tunable caps can be overridden through environment variables,
read at call time so tests and the CLI can change them without reimporting.
"""

import os

DEFAULT_MAX_N = 4
DEFAULT_MAX_TCOPY_DIM = 4096
DEFAULT_MAX_ENUM = 10**6
MAX_DENSE_DIM = 64


class CapExceededError(ValueError):
    """Raised when a request would exceed one of the computational caps."""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    value = int(raw)
    if value < 1:
        raise ValueError(f"{name} must be a positive integer, got {raw!r}")
    return value


def max_qubits() -> int:
    """Largest address-qubit count allowed for full-register statevectors."""
    return _env_int("UQD_MAX_N", DEFAULT_MAX_N)


def max_tcopy_dim() -> int:
    return _env_int("UQD_MAX_TCOPY_DIM", DEFAULT_MAX_TCOPY_DIM)


def max_enum() -> int:
    return _env_int("UQD_MAX_ENUM", DEFAULT_MAX_ENUM)
