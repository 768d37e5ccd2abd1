"""Induced ensemble states of exact-weight classes.

Density operators are plain complex ``numpy`` arrays; :func:`check_density_operator`
validates them. Everything in scope is real symmetric, but the matrices are kept
complex so superposed-memory outputs can flow through the same functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolean_functions import BiasHypothesis, weight_class_matrix
from .caps import MAX_DENSE_DIM, CapExceededError, max_tcopy_dim

HERMITIAN_ATOL = 1e-10


@dataclass(frozen=True)
class TwoEigenspaceState:
    """rho = mu^2 |+><+| + (1 - mu^2)/(N - 1) * (I - |+><+|)."""

    N: int
    mu_sq: float

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"dimension must be at least 2, got {self.N}")
        if not 0.0 <= self.mu_sq <= 1.0:
            raise ValueError(f"mu^2 must lie in [0, 1], got {self.mu_sq}")

    @property
    def lambda_plus(self) -> float:
        return self.mu_sq

    @property
    def lambda_perp(self) -> float:
        return (1.0 - self.mu_sq) / (self.N - 1)

    def eigenvalues(self) -> np.ndarray:
        """Ascending-sorted spectrum, multiplicities included."""
        return np.sort(np.array([self.lambda_plus] + [self.lambda_perp] * (self.N - 1)))


def check_density_operator(rho: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking Hermiticity, unit trace and PSD.

    Raises:
        ValueError: if any invariant is violated beyond ``atol``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density operator must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density operator is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density operator trace is {tr}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("density operator has a negative eigenvalue")
    return rho


def ensemble_closed_form(h: BiasHypothesis) -> TwoEigenspaceState:
    return TwoEigenspaceState(h.N, h.mu_sq)


def plus_projector(N: int) -> np.ndarray:
    return np.full((N, N), 1.0 / N, dtype=np.complex128)


def densify(s: TwoEigenspaceState) -> np.ndarray:
    if s.N > MAX_DENSE_DIM:
        raise CapExceededError(f"dense dimension {s.N} exceeds cap {MAX_DENSE_DIM}")
    proj = plus_projector(s.N)
    perp = np.eye(s.N, dtype=np.complex128) - proj
    return s.lambda_plus * proj + s.lambda_perp * perp


def _sign_rows(N: int, m: int) -> np.ndarray:
    """(-1)**f(a) for every f of weight m, one row per table, as float64."""
    return 1.0 - 2.0 * weight_class_matrix(N, m)


def _sign_gram(rows: np.ndarray, chunk: int) -> np.ndarray:
    # entries are sums of +-1 products: exact integers in float64 whatever the
    # summation order, so classes m and N - m give bit-identical results
    dim = rows.shape[1]
    acc = np.zeros((dim, dim))
    for start in range(0, rows.shape[0], chunk):
        block = rows[start : start + chunk]
        acc += block.T @ block
    return acc


def ensemble_brute_force(N: int, m: int) -> np.ndarray:
    """Average of |psi_f><psi_f| over every f of weight m.

    With psi_f = signs / sqrt(N), the average is the integer sign Gram matrix
    divided by N * binomial(N, m), so only the final division rounds.
    """
    if N > MAX_DENSE_DIM:
        raise CapExceededError(f"dense dimension {N} exceeds cap {MAX_DENSE_DIM}")
    rows = _sign_rows(N, m)
    return (_sign_gram(rows, 4096) / (N * rows.shape[0])).astype(np.complex128)


def _tensor_power_rows(rows: np.ndarray, t: int) -> np.ndarray:
    out = rows
    for _ in range(t - 1):
        out = np.einsum("bi,bj->bij", out, rows).reshape(rows.shape[0], -1)
    return out


def t_copy_ensemble_brute(N: int, m: int, t: int) -> np.ndarray:
    """Average of (|psi_f><psi_f|)^{(x)t} over the weight-m class (N**t square)."""
    if t < 1:
        raise ValueError(f"copy count must be >= 1, got {t}")
    dim = N**t
    cap = max_tcopy_dim()
    if dim > cap:
        raise CapExceededError(f"t-copy dimension {N}^{t} = {dim} exceeds cap {cap}")
    rows = _sign_rows(N, m)
    acc = np.zeros((dim, dim))
    chunk = max(1, 2**20 // dim)
    for start in range(0, rows.shape[0], chunk):
        acc += _sign_gram(_tensor_power_rows(rows[start : start + chunk], t), chunk)
    return (acc / (dim * rows.shape[0])).astype(np.complex128)


def _check_same_n(h0: BiasHypothesis, h1: BiasHypothesis) -> None:
    if h0.N != h1.N:
        raise ValueError(f"hypotheses must share N, got {h0.N} and {h1.N}")


def trace_distance_closed(h0: BiasHypothesis, h1: BiasHypothesis) -> float:
    """Delta = |mu0^2 - mu1^2|."""
    _check_same_n(h0, h1)
    return abs(h0.mu_sq - h1.mu_sq)


def trace_distance_dense(rho0: np.ndarray, rho1: np.ndarray) -> float:
    """Half the trace norm of the difference, via a Hermitian eigensolver."""
    rho0 = np.asarray(rho0)
    rho1 = np.asarray(rho1)
    if rho0.shape != rho1.shape:
        raise ValueError(f"dimension mismatch: {rho0.shape} vs {rho1.shape}")
    diff = rho0 - rho1
    if np.max(np.abs(diff - diff.conj().T), initial=0.0) > HERMITIAN_ATOL:
        raise ValueError("difference of density operators is not Hermitian")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def helstrom_success(h0: BiasHypothesis, h1: BiasHypothesis) -> float:
    """Optimal single-copy success probability (1 + Delta)/2 under equal priors."""
    return 0.5 * (1.0 + trace_distance_closed(h0, h1))


def collective_trace_distance(N: int, m0: int, m1: int, t: int) -> float:
    """Trace distance between the t-copy induced states of two weight classes."""
    return trace_distance_dense(t_copy_ensemble_brute(N, m0, t), t_copy_ensemble_brute(N, m1, t))


def tensor_power(rho: np.ndarray, t: int) -> np.ndarray:
    out = rho
    for _ in range(t - 1):
        out = np.kron(out, rho)
    return out


def permutation_matrix(perm) -> np.ndarray:
    """U_pi with U_pi |a> = |pi(a)>."""
    perm = np.asarray(perm)
    U = np.zeros((perm.size, perm.size))
    U[perm, np.arange(perm.size)] = 1.0
    return U


def frobenius(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b), "fro"))

