"""Dense complex operator algebra on finite bipartite Hilbert spaces.

Composite indices flatten as (k, l) -> k*d2 + l, which is the np.kron
convention, so tensor products and partial traces agree index-wise.
Matrix functions go through a full Hermitian eigendecomposition; at the
dimensions allowed here that is both exact and cheap.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import config
from .errors import (
    DimensionError,
    HermiticityError,
    NotPositiveSemidefiniteError,
)


def hermitize(mat: np.ndarray, tol: float = config.EPS_HERM) -> np.ndarray:
    """Return the symmetrized (A + A†)/2, rejecting drift above tol."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
    drift = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    scale = max(1.0, np.max(np.abs(mat))) if mat.size else 1.0
    if drift > tol * scale:
        raise HermiticityError(
            f"hermiticity drift {drift:.3e} exceeds tolerance {tol * scale:.3e}"
        )
    return 0.5 * (mat + mat.conj().T)


def is_hermitian(mat: np.ndarray, tol: float = config.EPS_HERM) -> bool:
    mat = np.asarray(mat)
    scale = max(1.0, np.max(np.abs(mat))) if mat.size else 1.0
    return bool(np.max(np.abs(mat - mat.conj().T)) <= tol * scale)


@dataclass(frozen=True)
class HermitianOperator:
    """A validated Hermitian matrix, optionally with declared tensor factors."""

    mat: np.ndarray
    factor_dims: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        mat = hermitize(self.mat)
        object.__setattr__(self, "mat", mat)
        if self.factor_dims is not None:
            d1, d2 = self.factor_dims
            if d1 < 1 or d2 < 1 or d1 * d2 != mat.shape[0]:
                raise DimensionError(
                    f"factor dims {self.factor_dims} incompatible with dim {mat.shape[0]}"
                )

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def ptrace(self, side: str) -> "HermitianOperator":
        if self.factor_dims is None:
            raise DimensionError("partial trace requires declared factor_dims")
        return HermitianOperator(partial_trace(self.mat, self.factor_dims, side))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the configured total-dimension cap."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DimensionError("tensor_product expects square matrices")
    total = a.shape[0] * b.shape[0]
    cap = config.max_dim()
    if total > cap:
        raise DimensionError(
            f"product dimension {total} exceeds the configured cap {cap} "
            f"(set {config.MAX_DIM_ENV} to raise it)"
        )
    return np.kron(a, b)


def embed_first(a: np.ndarray, d2: int) -> np.ndarray:
    """A acting on factor 1: A ⊗ I."""
    return tensor_product(a, np.eye(d2))


def embed_second(b: np.ndarray, d1: int) -> np.ndarray:
    """B acting on factor 2: I ⊗ B."""
    return tensor_product(np.eye(d1), b)


def partial_trace(mat: np.ndarray, dims: Tuple[int, int], side: str) -> np.ndarray:
    """Trace out one factor; side names the factor that is summed away."""
    mat = np.asarray(mat, dtype=complex)
    d1, d2 = dims
    if mat.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"shape {mat.shape} incompatible with factor dims {dims}")
    t = mat.reshape(d1, d2, d1, d2)
    if side == "first":
        return np.einsum("klkq->lq", t)
    if side == "second":
        return np.einsum("klpl->kp", t)
    raise ValueError(f"side must be 'first' or 'second', got {side!r}")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"commutator shapes differ: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def eigh_psd(mat: np.ndarray, eps_psd: float = config.EPS_PSD):
    """Eigendecomposition of a PSD Hermitian matrix; rejects negative spectra."""
    mat = hermitize(mat)
    vals, vecs = np.linalg.eigh(mat)
    if vals.size and vals[0] < -eps_psd:
        raise NotPositiveSemidefiniteError(
            f"smallest eigenvalue {vals[0]:.3e} below -{eps_psd:.1e}"
        )
    return vals, vecs


def operator_log(mat: np.ndarray) -> np.ndarray:
    """Matrix logarithm on the support of a PSD Hermitian matrix.

    Eigenvalues at or below EPS_LOG are excluded from the support, which
    realizes the 0*log(0) = 0 convention in products with the input.
    """
    vals, vecs = eigh_psd(mat)
    logs = np.zeros_like(vals)
    support = vals > config.EPS_LOG
    logs[support] = np.log(vals[support])
    return hermitize((vecs * logs) @ vecs.conj().T, tol=1e-9)


def operator_exp(mat: np.ndarray) -> np.ndarray:
    """Matrix exponential of a Hermitian matrix (positive definite result)."""
    mat = hermitize(mat)
    vals, vecs = np.linalg.eigh(mat)
    return hermitize((vecs * np.exp(vals)) @ vecs.conj().T, tol=1e-9)


def unitary_evolution(h: np.ndarray, dt: float, hbar: float = config.HBAR_DEFAULT) -> np.ndarray:
    """exp(-i H dt / hbar) via the Hermitian eigendecomposition of H."""
    h = hermitize(h)
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * vals * dt / hbar)
    return (vecs * phases) @ vecs.conj().T
