"""Exact statevector mechanics for one U-QRAM query.

Register layout for the joint address/data/memory state: the amplitude for
basis label (a, y, m) lives at flat index ``a * 2**(N+1) + y * 2**N + m``,
where bit j of the integer m is the content of memory cell j. Address-major
order keeps the address register's partial trace a plain matrix product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .boolean_functions import TruthTable
from .caps import CapExceededError, max_qubits

NORM_ATOL = 1e-10


def _as_state_vector(amplitudes) -> np.ndarray:
    vec = np.array(amplitudes, dtype=np.complex128).reshape(-1)
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True, eq=False)
class AddressState:
    """Unit vector on the n-qubit address register."""

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_state_vector(self.amplitudes)
        N = vec.size
        if N < 2 or N & (N - 1):
            raise ValueError(f"address state length must be a power of two >= 2, got {N}")
        norm = float(np.vdot(vec, vec).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"address state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", vec)

    @property
    def N(self) -> int:
        return self.amplitudes.size

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    def to_json(self) -> str:
        return state_to_json(self.amplitudes)


@dataclass(frozen=True, eq=False)
class RegisterState:
    """Joint state of address (n qubits), data (1 qubit) and memory (N qubits)."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_state_vector(self.amplitudes)
        if vec.size != register_dim(self.n):
            raise ValueError(
                f"register state for n={self.n} needs {register_dim(self.n)} amplitudes, got {vec.size}"
            )
        norm = float(np.vdot(vec, vec).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"register state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", vec)

    @property
    def N(self) -> int:
        return 1 << self.n

    def tensor(self) -> np.ndarray:
        """View as an (address, data, memory) array of shape (N, 2, 2**N)."""
        return self.amplitudes.reshape(self.N, 2, 1 << self.N)

    def to_json(self) -> str:
        return state_to_json(self.amplitudes)


def register_dim(n: int) -> int:
    N = 1 << n
    return N * 2 * (1 << N)


def _check_register_cap(n: int) -> None:
    cap = max_qubits()
    if n > cap:
        raise CapExceededError(
            f"statevector too large: n={n} address qubits exceeds cap {cap} "
            f"({register_dim(n)} amplitudes)"
        )


def state_to_json(amplitudes: np.ndarray) -> str:
    """Debug dump as a JSON list of [re, im] pairs."""
    return json.dumps([[float(z.real), float(z.imag)] for z in np.asarray(amplitudes)])


def plus_state(N: int) -> AddressState:
    return AddressState(np.full(N, 1 / math.sqrt(N)))


def signs(f: TruthTable) -> np.ndarray:
    """(-1)**f(a) as a float vector."""
    return 1.0 - 2.0 * f.as_array()


def address_state(f: TruthTable) -> AddressState:
    """psi_f = (1/sqrt(N)) * sum_a (-1)**f(a) |a>."""
    return AddressState(signs(f) / math.sqrt(f.N))


def address_state_batch(tables: np.ndarray) -> np.ndarray:
    """Row-wise address states for a (batch, N) 0/1 array; real float64 output."""
    tables = np.asarray(tables)
    return (1.0 - 2.0 * tables) / math.sqrt(tables.shape[-1])


def apply_phase_oracle(f: TruthTable, s: AddressState) -> AddressState:
    if s.N != f.N:
        raise ValueError(f"dimension mismatch: oracle on N={f.N}, state has N={s.N}")
    return AddressState(signs(f) * s.amplitudes)


def walsh_hadamard(x: np.ndarray) -> np.ndarray:
    """Apply H^{(x)n} along the last axis of ``x`` (length 2**n) with a radix-2 butterfly.

    Leading axes are treated as a batch. Returns a new array.
    """
    out = np.array(x, dtype=np.result_type(x, np.float64), copy=True)
    N = out.shape[-1]
    if N < 1 or N & (N - 1):
        raise ValueError(f"last axis must have power-of-two length, got {N}")
    batch = out.shape[:-1]
    h = 1
    while h < N:
        view = out.reshape(*batch, N // (2 * h), 2, h)
        lo = view[..., 0, :].copy()
        hi = view[..., 1, :]
        view[..., 0, :] = lo + hi
        view[..., 1, :] = lo - hi
        h *= 2
    out /= math.sqrt(N)
    return out


def hadamard_transform(s: AddressState) -> AddressState:
    return AddressState(walsh_hadamard(s.amplitudes))


def plus_overlap(s: AddressState) -> complex:
    """<+|s> = (1/sqrt(N)) * sum_a s[a]."""
    return complex(s.amplitudes.sum() / math.sqrt(s.N))


def apply_uqram(s: RegisterState) -> RegisterState:
    """|a>|y>|m> -> |a>|y XOR m_a>|m>, extended linearly.

    The map is a permutation of basis labels and its own inverse, so the
    gather below is also the scatter.
    """
    psi = s.tensor()
    N = s.N
    memory = np.arange(1 << N)
    out = np.empty_like(psi)
    for a in range(N):
        flip = ((memory >> a) & 1).astype(bool)
        out[a, 0] = np.where(flip, psi[a, 1], psi[a, 0])
        out[a, 1] = np.where(flip, psi[a, 0], psi[a, 1])
    return RegisterState(s.n, out.reshape(-1))


def basis_register_state(n: int, a: int, y: int, m: int) -> RegisterState:
    N = 1 << n
    vec = np.zeros(register_dim(n), dtype=np.complex128)
    vec[a * (1 << (N + 1)) + y * (1 << N) + m] = 1.0
    return RegisterState(n, vec)


def minus_data_qubit() -> np.ndarray:
    return np.array([1.0, -1.0]) / math.sqrt(2)


def product_register_state(address: np.ndarray, data: np.ndarray, memory: np.ndarray) -> RegisterState:
    """Tensor product of address, data and memory vectors in register order."""
    n = int(address.size).bit_length() - 1
    return RegisterState(n, np.kron(np.kron(address, data), memory))


def memory_basis(f: TruthTable) -> np.ndarray:
    """|M_f> as a vector on the N-qubit memory register."""
    vec = np.zeros(1 << f.N, dtype=np.complex128)
    vec[f.to_int()] = 1.0
    return vec


def probe_state(f: TruthTable) -> RegisterState:
    """|+>_A |->_D |M_f>_M."""
    _check_register_cap(f.n)
    return product_register_state(plus_state(f.N).amplitudes, minus_data_qubit(), memory_basis(f))


def reduced_address_matrix(s: RegisterState) -> np.ndarray:
    """Density matrix of the address register after tracing out data and memory."""
    block = s.amplitudes.reshape(s.N, -1)
    return block @ block.conj().T


def _fix_global_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[k]) / vec[k])


def probe_and_query(f: TruthTable) -> tuple[AddressState, float]:
    """Run one full-register U-QRAM query on the probe and read off the address state.

    Returns the dominant eigenvector of the address register's reduced state
    (global phase chosen so the largest-magnitude amplitude is real positive)
    and the product-form residual ``1 - |<psi_f, -, M_f | output>|**2``.

    Raises:
        CapExceededError: if f.n exceeds the statevector cap.
    """
    out = apply_uqram(probe_state(f))
    rho_a = reduced_address_matrix(out)
    _, vecs = np.linalg.eigh(rho_a)
    extracted = _fix_global_phase(vecs[:, -1])
    expected = product_register_state(address_state(f).amplitudes, minus_data_qubit(), memory_basis(f))
    residual = 1.0 - abs(np.vdot(expected.amplitudes, out.amplitudes)) ** 2
    return AddressState(extracted), max(float(residual), 0.0)


def fidelity_pure(u: np.ndarray, v: np.ndarray) -> float:
    """|<u|v>|**2 for unit vectors; insensitive to global phase."""
    return float(abs(np.vdot(u, v)) ** 2)


def von_neumann_entropy(rho: np.ndarray, clip: float = 1e-10) -> float:
    """Entropy in bits, with 0 log 0 = 0 and eigenvalues below ``clip`` dropped."""
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > clip]
    return float(-np.sum(evals * np.log2(evals)) + 0.0)


def superposed_memory_query(
    coefficients: Mapping[TruthTable, complex], *, atol: float = 1e-10
) -> tuple[RegisterState, float]:
    """Query a memory prepared in sum_f c_f |M_f> and measure address entanglement.

    Returns the output register state and the entropy (bits) of the address
    register's reduced state.

    Raises:
        ValueError: if the coefficients are not normalized or mix table sizes.
    """
    if not coefficients:
        raise ValueError("at least one memory configuration is required")
    sizes = {f.N for f in coefficients}
    if len(sizes) != 1:
        raise ValueError(f"all truth tables must share one size, got {sorted(sizes)}")
    N = sizes.pop()
    n = N.bit_length() - 1
    _check_register_cap(n)
    norm = sum(abs(c) ** 2 for c in coefficients.values())
    if abs(norm - 1.0) > atol:
        raise ValueError(f"memory coefficients are not normalized (sum |c|^2 = {norm!r})")
    memory = np.zeros(1 << N, dtype=np.complex128)
    for f, c in coefficients.items():
        memory[f.to_int()] += c
    probe = product_register_state(plus_state(N).amplitudes, minus_data_qubit(), memory)
    out = apply_uqram(probe)
    return out, von_neumann_entropy(reduced_address_matrix(out))
