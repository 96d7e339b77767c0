"""Thermodynamic functionals: energy, first-law split, entropies and their
rates, contact temperature, partial entropies, and the entropy-exchange
chain inequality.

Entropy rate, exchange and production each have two computational routes
(operator trace vs weight-vector contraction); the vector route is used in
production code and the operator route is kept for cross-checking.
"""

from dataclasses import dataclass, fields
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import config, linops
from .ensemble import (
    Ensemble,
    Frame,
    RateSplit,
    check_zero_sum,
    density_of,
    diag_expectations,
    f1_vector,
    f2_vector,
    f_vector,
    propagator_of,
)
from .errors import (
    ConstraintViolationError,
    DimensionError,
    InvalidTemperatureError,
    ZeroEntropyExchangeError,
    ZeroHeatExchangeError,
)


def energy(h: np.ndarray, rho: np.ndarray) -> float:
    """E = Tr(H rho)."""
    h = np.asarray(h)
    rho = np.asarray(rho)
    if h.shape != rho.shape:
        raise DimensionError(f"shapes differ: {h.shape} vs {rho.shape}")
    val = np.trace(h @ rho)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ConstraintViolationError(f"energy has imaginary part {val.imag:.3e}")
    return float(val.real)


def heat_rate(h: np.ndarray, prop: np.ndarray) -> float:
    """Q̇ = Tr(H rho°) for a traceless propagator."""
    val = np.trace(np.asarray(h) @ np.asarray(prop))
    return float(val.real)


@dataclass(frozen=True)
class PowerRate:
    w_dot: float
    forces: np.ndarray  # generalized forces K_i = Tr((dH/da_i) rho)


def power_rate(generators: Sequence[np.ndarray], rho: np.ndarray,
               a_dot: np.ndarray) -> PowerRate:
    """Ẇ = K · ȧ with K_i = Tr((∂H/∂a_i) rho)."""
    a_dot = np.asarray(a_dot, dtype=float)
    if len(generators) != a_dot.shape[0]:
        raise DimensionError(
            f"{len(generators)} generators vs {a_dot.shape[0]} work-variable rates"
        )
    forces = np.array([energy(g, rho) for g in generators])
    return PowerRate(float(forces @ a_dot), forces)


def shannon_entropy(rho: np.ndarray, kb: float = config.KB_DEFAULT) -> float:
    """S = -k_B Tr(rho ln rho) over the support (0 ln 0 = 0)."""
    vals, _ = linops.eigh_psd(rho)
    support = vals > config.EPS_LOG
    lv = vals[support]
    return float(-kb * np.sum(lv * np.log(lv)))


def entropy_rate(ens: Ensemble, dp: np.ndarray, z: float = 1.0,
                 kb: float = config.KB_DEFAULT) -> float:
    """Ṡ = -ṗ · f^I (independent of Z and of the Hamiltonian)."""
    dp = check_zero_sum(dp, "dp")
    return float(-dp @ f1_vector(ens, z, kb))


def entropy_rate_operator(ens: Ensemble, dp: np.ndarray, z: float = 1.0,
                          kb: float = config.KB_DEFAULT) -> float:
    """Operator-route oracle: -k_B Tr(rho° ln(Z rho))."""
    rho = density_of(ens)
    prop = propagator_of(ens.frame, dp)
    log_zrho = linops.operator_log(rho) + np.log(z) * np.eye(ens.dim)
    return float(-kb * np.trace(prop @ log_zrho).real)


def entropy_exchange(frame: Frame, dp_ex: np.ndarray, h: np.ndarray,
                     theta: float) -> float:
    """Ξ = ṗ^ex · f^II = Q̇_ex / Θ."""
    dp_ex = check_zero_sum(dp_ex, "dp_ex")
    return float(dp_ex @ f2_vector(frame, h, theta))


def entropy_production(ens: Ensemble, rates: RateSplit, h: np.ndarray,
                       theta: float, z: float = 1.0,
                       kb: float = config.KB_DEFAULT, strict: bool = True) -> float:
    """Σ = -ṗ · f, cross-checked against -ṗ^iso · f^I.

    The two routes coincide when the rate split satisfies ṗ^ex·f = 0 and
    ṗ^iso·f^II = 0; a larger disagreement indicates a bad constitutive
    model and raises when strict.
    """
    f = f_vector(ens, h, theta, z, kb)
    full = float(-rates.dp @ f)
    split = float(-rates.dp_iso @ f1_vector(ens, z, kb))
    scale = max(1.0, abs(full), abs(split))
    if strict and abs(full - split) > 1e-10 * scale:
        raise ConstraintViolationError(
            f"entropy-production routes disagree: -p_dot.f = {full:.3e} "
            f"vs -p_dot_iso.f1 = {split:.3e}"
        )
    return full


def contact_temperature_qm(ens: Ensemble, dp_ex: np.ndarray, h: np.ndarray,
                           z: float = 1.0, kb: float = config.KB_DEFAULT) -> float:
    """Θ = Tr(H rho°_ex) / (-k_B Tr(rho°_ex ln(Z rho))); Z-invariant."""
    dp_ex = check_zero_sum(dp_ex, "dp_ex")
    num = float(dp_ex @ diag_expectations(ens.frame, h))
    den = float(-dp_ex @ f1_vector(ens, z, kb))
    if abs(num) < 1e-14:
        raise ZeroHeatExchangeError("heat exchange vanishes; Θ undefined")
    if abs(den) < 1e-14:
        raise ZeroEntropyExchangeError("entropy exchange vanishes; Θ undefined")
    return num / den


@dataclass(frozen=True)
class PartialEntropies:
    total: float          # S of the joint state
    s1: float
    s2: float
    deficiency: float     # S1 + S2 - S, nonnegative by Klein's inequality
    cross_residual_1: float  # |S1 - (-kB Tr(rho_com ln rho^1))|
    cross_residual_2: float


def partial_entropies(rho_com: np.ndarray, dims: Tuple[int, int],
                      kb: float = config.KB_DEFAULT) -> PartialEntropies:
    """Entropies of a bipartite state and its reductions, plus the compound
    deficiency S1 + S2 - S."""
    d1, d2 = dims
    s = shannon_entropy(rho_com, kb)
    rho1 = linops.partial_trace(rho_com, dims, "second")
    rho2 = linops.partial_trace(rho_com, dims, "first")
    s1 = shannon_entropy(rho1, kb)
    s2 = shannon_entropy(rho2, kb)
    # trace identity: S_A(rho^A) = -kB Tr(rho_com ln rho^A)
    log1 = linops.embed_first(linops.operator_log(rho1), d2)
    log2 = linops.embed_second(linops.operator_log(rho2), d1)
    cross1 = float(-kb * np.trace(rho_com @ log1).real)
    cross2 = float(-kb * np.trace(rho_com @ log2).real)
    r1 = abs(s1 - cross1)
    r2 = abs(s2 - cross2)
    tol = 1e-10 * max(1.0, abs(s1), abs(s2))
    if r1 > tol or r2 > tol:
        raise ConstraintViolationError(
            f"partial-entropy trace identity violated: residuals {r1:.3e}, {r2:.3e}"
        )
    return PartialEntropies(s, s1, s2, s1 + s2 - s, r1, r2)


@dataclass(frozen=True)
class ExchangeChainReport:
    """Evaluation of sum_j Q̇^j/Θ^j >= Q̇/Θ >= Q̇/T□."""

    lhs: float
    mid: float
    rhs: float
    q_total: float
    theta_plus: Optional[float]   # exchange-weighted harmonic mean, heating parts
    theta_minus: Optional[float]  # same for cooling parts
    theta_consistent: bool        # Θ inside the [Θ+, Θ-] bracket
    sign_condition: bool          # Q̇ (1/Θ - 1/T□) >= 0
    chain_holds: bool
    violated_link: Optional[str]


def entropy_exchange_inequality(parts: Sequence[Tuple[float, float]],
                                theta: float, t_box: float,
                                tol: float = 1e-12) -> ExchangeChainReport:
    """Check the entropy-exchange chain for per-part heat flows.

    parts: (Q̇^j, Θ^j) pairs.  The bracket temperatures Θ± are the
    exchange-weighted harmonic means of the heating and cooling parts;
    when Θ lies inside [Θ+, Θ-] and the defining sign condition against
    T□ holds, the full chain must hold.
    """
    if theta <= 0 or t_box <= 0:
        raise InvalidTemperatureError("Θ and T□ must be positive")
    for _, th in parts:
        if th <= 0:
            raise InvalidTemperatureError("part temperatures must be positive")
    q = np.array([p[0] for p in parts], dtype=float)
    th = np.array([p[1] for p in parts], dtype=float)
    lhs = float(np.sum(q / th))
    q_total = float(np.sum(q))
    mid = q_total / theta
    rhs = q_total / t_box

    pos = q > 0
    neg = q < 0
    theta_plus = float(np.sum(q[pos]) / np.sum(q[pos] / th[pos])) if pos.any() else None
    theta_minus = float(np.sum(q[neg]) / np.sum(q[neg] / th[neg])) if neg.any() else None
    lo = theta_plus if theta_plus is not None else 0.0
    hi = theta_minus if theta_minus is not None else np.inf
    theta_consistent = lo - tol <= theta <= hi + tol
    sign_condition = q_total * (1.0 / theta - 1.0 / t_box) >= -tol

    violated = None
    if lhs < mid - tol:
        violated = "sum(Q/Theta_j) >= Q/Theta"
    elif mid < rhs - tol:
        violated = "Q/Theta >= Q/T_box"
    return ExchangeChainReport(
        lhs=lhs, mid=mid, rhs=rhs, q_total=q_total,
        theta_plus=theta_plus, theta_minus=theta_minus,
        theta_consistent=theta_consistent, sign_condition=sign_condition,
        chain_holds=violated is None, violated_link=violated,
    )


# Per-time-step ledger.  Column order is frozen; cli writes one CSV row per
# record in exactly this order.
THERMO_COLUMNS = (
    "t", "E", "W_dot", "Q_dot", "S", "S_dot", "Xi", "Sigma", "Theta",
    "Q1_ex", "Q2_ex", "Q12_ex", "Q1_int", "Q2_int", "Q12_int",
    "W1_ex", "W2_ex", "W1_int", "W2_int", "W12_int",
    "Xi1_ex", "Xi2_ex", "Xi12_ex", "Xi1_int", "Xi2_int", "Xi12_int",
    "S_def", "Sdot_def", "Xi_ex_gap",
)


@dataclass(frozen=True)
class ThermoRecord:
    t: float
    E: float
    W_dot: float
    Q_dot: float
    S: float
    S_dot: float
    Xi: float
    Sigma: float
    Theta: float
    Q1_ex: float
    Q2_ex: float
    Q12_ex: float
    Q1_int: float
    Q2_int: float
    Q12_int: float
    W1_ex: float
    W2_ex: float
    W1_int: float
    W2_int: float
    W12_int: float
    Xi1_ex: float
    Xi2_ex: float
    Xi12_ex: float
    Xi1_int: float
    Xi2_int: float
    Xi12_int: float
    S_def: float
    Sdot_def: float
    Xi_ex_gap: float

    def __post_init__(self):
        if abs(self.S_dot - (self.Xi + self.Sigma)) > 1e-10 * max(
            1.0, abs(self.S_dot)
        ):
            raise ConstraintViolationError(
                f"S_dot != Xi + Sigma: {self.S_dot} vs {self.Xi + self.Sigma}"
            )

    def row(self) -> List[float]:
        return [getattr(self, name) for name in THERMO_COLUMNS]


assert tuple(f.name for f in fields(ThermoRecord)) == THERMO_COLUMNS
