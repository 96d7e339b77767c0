"""Ensembles: orthonormal frames of pure states with probability weights.

The frame is always complete (exactly dim vectors, stored as the columns of
a unitary matrix).  The density operator, its propagator and the f-vectors
that drive all entropy bookkeeping are diagonal in the frame, so most
operations reduce to real vector arithmetic on the weights.
"""

from dataclasses import dataclass

import numpy as np

from . import config, linops
from ._kernels import f1_kernel
from .errors import DimensionError, FrameError, InvalidRateError, InvalidTemperatureError


@dataclass(frozen=True)
class Frame:
    """Complete orthonormal frame; column j of ``vectors`` is |Φ^j>."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise FrameError(f"frame must be square (complete), got {v.shape}")
        drift = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0])))
        if drift > config.EPS_FRAME_REPAIR:
            raise FrameError(f"orthonormality drift {drift:.3e} beyond repair limit")
        if drift > config.EPS_FRAME:
            # Gram-Schmidt repair via QR; keep column phases stable
            q, r = np.linalg.qr(v)
            phases = np.diag(r) / np.abs(np.diag(r))
            v = q * phases
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def standard(cls, dim: int) -> "Frame":
        return cls(np.eye(dim, dtype=complex))

    def gram_drift(self) -> float:
        v = self.vectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))


def check_weights(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise InvalidRateError(f"weights outside [0, 1]: {p}")
    if abs(p.sum() - 1.0) > 1e-12:
        raise InvalidRateError(f"weights sum to {p.sum()}, not 1")
    return np.clip(p, 0.0, 1.0)


def check_zero_sum(dp: np.ndarray, what: str = "rate vector") -> np.ndarray:
    dp = np.asarray(dp, dtype=float)
    scale = max(1.0, np.max(np.abs(dp))) if dp.size else 1.0
    if abs(dp.sum()) > 1e-12 * scale:
        raise InvalidRateError(f"{what} sums to {dp.sum():.3e}, expected 0")
    return dp


@dataclass(frozen=True)
class RateSplit:
    """Weight rates split into exchange and isolated (irreversibility) parts."""

    dp_ex: np.ndarray
    dp_iso: np.ndarray

    def __post_init__(self):
        ex = check_zero_sum(self.dp_ex, "dp_ex")
        iso = check_zero_sum(self.dp_iso, "dp_iso")
        if ex.shape != iso.shape:
            raise DimensionError("dp_ex and dp_iso lengths differ")
        object.__setattr__(self, "dp_ex", ex)
        object.__setattr__(self, "dp_iso", iso)

    @property
    def dp(self) -> np.ndarray:
        return self.dp_ex + self.dp_iso

    @classmethod
    def zero(cls, dim: int) -> "RateSplit":
        return cls(np.zeros(dim), np.zeros(dim))


@dataclass(frozen=True)
class Ensemble:
    frame: Frame
    weights: np.ndarray

    def __post_init__(self):
        p = check_weights(self.weights)
        if p.shape[0] != self.frame.dim:
            raise DimensionError("weights length does not match frame dimension")
        object.__setattr__(self, "weights", p)

    @property
    def dim(self) -> int:
        return self.frame.dim


def density_of(ens: Ensemble) -> np.ndarray:
    """rho = sum_j p_j |Φ^j><Φ^j|."""
    v = ens.frame.vectors
    return (v * ens.weights) @ v.conj().T


def propagator_of(frame: Frame, dp: np.ndarray) -> np.ndarray:
    """rho° = sum_j dp_j |Φ^j><Φ^j|; dp must sum to zero."""
    dp = check_zero_sum(dp, "propagator rates")
    if dp.shape[0] != frame.dim:
        raise DimensionError("rate length does not match frame dimension")
    v = frame.vectors
    return (v * dp) @ v.conj().T


def diag_expectations(frame: Frame, h: np.ndarray) -> np.ndarray:
    """e_k = <Φ^k|H|Φ^k> (real for Hermitian H)."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (frame.dim, frame.dim):
        raise DimensionError("operator dimension does not match frame")
    v = frame.vectors
    return np.real(np.einsum("ij,ik,kj->j", v.conj(), h, v))


def f1_vector(ens: Ensemble, z: float, kb: float = config.KB_DEFAULT) -> np.ndarray:
    """f^I_k = k_B ln(Z p_k), with the weight floor saturating p -> 0."""
    if z <= 0:
        raise InvalidTemperatureError(f"Z must be positive, got {z}")
    return f1_kernel(np.asarray(ens.weights, dtype=float), float(z), float(kb))


def f2_vector(frame: Frame, h: np.ndarray, theta: float) -> np.ndarray:
    """f^II_k = <Φ^k|H|Φ^k> / Θ."""
    if theta <= 0:
        raise InvalidTemperatureError(f"contact temperature must be positive, got {theta}")
    return diag_expectations(frame, h) / theta


def f_vector(ens: Ensemble, h: np.ndarray, theta: float, z: float,
             kb: float = config.KB_DEFAULT) -> np.ndarray:
    """f = f^I + f^II."""
    return f1_vector(ens, z, kb) + f2_vector(ens.frame, h, theta)


def evolve_frame(frame: Frame, h: np.ndarray, dt: float,
                 hbar: float = config.HBAR_DEFAULT) -> Frame:
    """Advance every frame vector by the unitary exp(-i H dt / hbar)."""
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    if dt == 0.0:
        return frame
    u = linops.unitary_evolution(h, dt, hbar)
    return Frame(u @ frame.vectors)
