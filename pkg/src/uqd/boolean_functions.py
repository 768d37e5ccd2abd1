"""Truth tables of Boolean functions on N = 2**n addresses and their bias classes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .caps import CapExceededError, max_enum


def _check_power_of_two(N: int) -> int:
    if not isinstance(N, (int, np.integer)) or N < 2 or N & (N - 1):
        raise ValueError(f"address count must be a power of two >= 2, got {N!r}")
    return int(N).bit_length() - 1


@dataclass(frozen=True)
class TruthTable:
    """A Boolean function f: [N] -> {0, 1} stored as its truth table.

    ``bits[a]`` is ``f(a)``. String forms put address 0 leftmost, so
    ``TruthTable.from_string("1000")`` is the function with ``f(0) = 1``.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        _check_power_of_two(len(bits))
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"truth-table entries must be 0 or 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "TruthTable":
        return cls(tuple(int(c) for c in s.strip()))

    @classmethod
    def from_int(cls, value: int, N: int) -> "TruthTable":
        """Inverse of :meth:`to_int`: bit j of ``value`` is f(j)."""
        return cls(tuple((value >> j) & 1 for j in range(N)))

    @property
    def N(self) -> int:
        return len(self.bits)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def weight(self) -> int:
        return sum(self.bits)

    def to_int(self) -> int:
        """Memory-register basis label: bit j of the integer holds cell j."""
        return sum(b << j for j, b in enumerate(self.bits))

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.int8)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class BiasHypothesis:
    """Exact-weight hypothesis H_m: f is uniform over tables of weight m."""

    N: int
    m: int

    def __post_init__(self):
        _check_power_of_two(self.N)
        if not 0 <= self.m <= self.N:
            raise ValueError(f"weight must satisfy 0 <= m <= N={self.N}, got m={self.m}")

    @property
    def p(self) -> float:
        return self.m / self.N

    @property
    def mu(self) -> float:
        # (N - 2m)/N keeps mu(m) == -mu(N - m) bit for bit
        return (self.N - 2 * self.m) / self.N

    @property
    def mu_sq(self) -> float:
        return self.mu * self.mu

    @property
    def mu_sq_exact(self) -> Fraction:
        return Fraction((self.N - 2 * self.m) ** 2, self.N**2)

    def complement(self) -> "BiasHypothesis":
        return BiasHypothesis(self.N, self.N - self.m)


def enumerate_weight_class(N: int, m: int) -> list[TruthTable]:
    """All truth tables on N addresses with exactly m ones.

    Tables come back in lexicographic order of their bit strings (address 0
    leftmost), so ``enumerate_weight_class(4, 1)`` starts with ``0001`` and
    ends with ``1000``.

    Raises:
        ValueError: if m is outside [0, N] or N is not a power of two.
        CapExceededError: if binomial(N, m) exceeds the enumeration cap.
    """
    return list(iter_weight_class(N, m))


def iter_weight_class(N: int, m: int) -> Iterator[TruthTable]:
    _check_power_of_two(N)
    if not 0 <= m <= N:
        raise ValueError(f"weight must satisfy 0 <= m <= N={N}, got m={m}")
    size = math.comb(N, m)
    cap = max_enum()
    if size > cap:
        raise CapExceededError(
            f"class too large to enumerate: binomial({N}, {m}) = {size} > cap {cap}"
        )
    # combinations of zero positions come out in lexicographic order, which is
    # exactly lexicographic order of the bit strings
    for zeros in itertools.combinations(range(N), N - m):
        bits = [1] * N
        for a in zeros:
            bits[a] = 0
        yield TruthTable(tuple(bits))


def weight_class_matrix(N: int, m: int) -> np.ndarray:
    """The enumerated class as a (binomial(N, m), N) int8 array, same order."""
    tables = enumerate_weight_class(N, m)
    return np.array([t.bits for t in tables], dtype=np.int8).reshape(len(tables), N)


def sample_uniform(N: int, m: int, rng: np.random.Generator) -> TruthTable:
    """Draw f uniformly from the weight-m class with a partial Fisher-Yates shuffle."""
    _check_power_of_two(N)
    if not 0 <= m <= N:
        raise ValueError(f"weight must satisfy 0 <= m <= N={N}, got m={m}")
    idx = list(range(N))
    for i in range(m):
        j = int(rng.integers(i, N))
        idx[i], idx[j] = idx[j], idx[i]
    bits = [0] * N
    for a in idx[:m]:
        bits[a] = 1
    return TruthTable(tuple(bits))


def sample_uniform_batch(N: int, m: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent uniform draws from the weight-m class, as an int8 array."""
    if not 0 <= m <= N:
        raise ValueError(f"weight must satisfy 0 <= m <= N={N}, got m={m}")
    base = np.zeros((size, N), dtype=np.int8)
    base[:, :m] = 1
    return rng.permuted(base, axis=1)


def phase_bias(f: TruthTable) -> float:
    """mu(f) = (1/N) * sum_a (-1)**f(a)."""
    signs = 1 - 2 * f.as_array().astype(np.int64)
    return float(signs.sum()) / f.N


def complement(f: TruthTable) -> TruthTable:
    return TruthTable(tuple(1 - b for b in f.bits))
