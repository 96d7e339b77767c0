"""Material-dependent closures for the weight-rate propagators.

The isolated channel is an antisymmetric bivector built from the zero-mean
projections of f^I and f^II; entropy production is then a Gram determinant
and nonnegative by Cauchy-Schwarz.  The exchange channel is the zero-mean
part of f^II, deflated along f so that ṗ^ex·f = 0, and scaled so the heat
flow matches the kappa conduction law against the environment temperature.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import config
from ._kernels import (
    STATUS_OK,
    STATUS_UNREACHABLE,
    ex_rate_kernel,
    iso_rate_kernel,
    zero_mean,
)
from .ensemble import Ensemble, RateSplit, f1_vector, f2_vector
from .errors import (
    InvalidTemperatureError,
    RootBracketError,
    UnreachableExchangeError,
)


@dataclass(frozen=True)
class HeatConduction:
    """Heat-conduction coefficients (energy/time); all strictly positive."""

    kappa_ex_1: float = 1.0
    kappa_ex_2: float = 1.0
    kappa_ex: float = 1.0
    kappa_int_1: float = 1.0
    kappa_int_2: float = 1.0

    def __post_init__(self):
        for name in ("kappa_ex_1", "kappa_ex_2", "kappa_ex", "kappa_int_1", "kappa_int_2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ConstitutiveModel:
    """Rate-model parameters: isolated-channel strength and conduction."""

    alpha: float = 0.0
    conduction: HeatConduction = HeatConduction()
    fit_theta: bool = True   # contact temperature from the canonical fit
    track_tbox: bool = False  # T□(t) := Θ(t) (zero net heat exchange)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


def heat_conduction_law(kappa: float, theta: float, t_box: float) -> float:
    """Q̇ = kappa (1/Θ - 1/T□)."""
    if theta <= 0 or t_box <= 0:
        raise InvalidTemperatureError("temperatures must be positive")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return kappa * (1.0 / theta - 1.0 / t_box)


@dataclass(frozen=True)
class RootResult:
    theta: float
    converged: bool
    zero_everywhere: bool = False


def find_contact_temperature(q_of_tbox: Callable[[float], float],
                             bracket: Tuple[float, float],
                             tol: float = 1e-12,
                             max_iter: int = 200) -> RootResult:
    """Bisect for the environment temperature at which the net heat
    exchange vanishes by change of sign; that root is Θ."""
    lo, hi = bracket
    if lo <= 0 or hi <= lo:
        raise InvalidTemperatureError(f"invalid bracket {bracket}")
    q_lo = q_of_tbox(lo)
    q_hi = q_of_tbox(hi)
    if q_lo == 0.0 and q_hi == 0.0 and q_of_tbox(0.5 * (lo + hi)) == 0.0:
        return RootResult(0.5 * (lo + hi), True, zero_everywhere=True)
    if q_lo * q_hi > 0:
        raise RootBracketError(
            f"no sign change on [{lo}, {hi}]: Q({lo})={q_lo:.3e}, Q({hi})={q_hi:.3e}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        q_mid = q_of_tbox(mid)
        if abs(q_mid) < tol or hi - lo < tol:
            return RootResult(mid, True)
        if q_lo * q_mid <= 0:
            hi = mid
        else:
            lo, q_lo = mid, q_mid
    return RootResult(0.5 * (lo + hi), False)


def fit_contact_temperature(weights: np.ndarray, energies: np.ndarray,
                            kb: float = config.KB_DEFAULT) -> float:
    """State contact temperature from the least-squares canonical match.

    Minimizes ||P0(k_B ln p) + P0(e)/Θ|| over Θ; exact for canonical
    weights on the energy frame.  Raises for inverted (nonthermal)
    populations, which have no positive temperature.
    """
    g1 = zero_mean(kb * np.log(np.maximum(np.asarray(weights, float), 1e-300)))
    ge = zero_mean(np.asarray(energies, dtype=float))
    gg = float(ge @ ge)
    if gg < 1e-28:
        raise InvalidTemperatureError("degenerate spectrum: no thermal direction")
    inv_theta = float(-(g1 @ ge) / gg)
    if inv_theta <= 0:
        raise InvalidTemperatureError(
            f"canonical fit gives nonpositive 1/Θ = {inv_theta:.3e}"
        )
    return 1.0 / inv_theta


def iso_rates(ens: Ensemble, h: np.ndarray, theta: float, z: float,
              alpha: float, kb: float = config.KB_DEFAULT) -> np.ndarray:
    """ṗ^iso = alpha (g^II (g^I·f^II) - g^I (g^II·f^II)).

    Zero-sum, orthogonal to f^II, entropy production alpha times the Gram
    determinant of (g^I, g^II) hence nonnegative; vanishes at micro-
    canonical and canonical weights.
    """
    g1 = zero_mean(f1_vector(ens, z, kb))
    g2 = zero_mean(f2_vector(ens.frame, h, theta))
    return iso_rate_kernel(g1, g2, float(alpha))


def ex_rates(ens: Ensemble, h: np.ndarray, theta: float, z: float,
             conduction: HeatConduction, t_box: float,
             kb: float = config.KB_DEFAULT) -> np.ndarray:
    """Exchange rates realizing Q̇_ex = kappa (1/Θ - 1/T□) with ṗ^ex·f = 0."""
    qdot = heat_conduction_law(conduction.kappa_ex, theta, t_box)
    g1 = zero_mean(f1_vector(ens, z, kb))
    g2 = zero_mean(f2_vector(ens.frame, h, theta))
    rate, status = ex_rate_kernel(g2, g1 + g2, float(qdot), float(theta))
    if status == STATUS_UNREACHABLE:
        raise UnreachableExchangeError(
            f"no direction can carry the requested heat flow {qdot:.3e}"
        )
    assert status == STATUS_OK
    return rate


@dataclass(frozen=True)
class ConstraintAudit:
    """Realized-rate checks of the propagator-matrix constraints."""

    sigma: float
    sigma_nonneg: bool
    iso_orthogonal: bool      # ṗ^iso · f^II = 0
    ex_orthogonal: bool       # ṗ^ex · f = 0
    xi_matches_exchange: bool  # ṗ · f^II = ṗ^ex · f^II
    all_pass: bool


def constraint_audit(ens: Ensemble, rates: RateSplit, h: np.ndarray,
                     theta: float, z: float = 1.0,
                     kb: float = config.KB_DEFAULT,
                     tol: float = 1e-10) -> ConstraintAudit:
    f1 = f1_vector(ens, z, kb)
    f2 = f2_vector(ens.frame, h, theta)
    f = f1 + f2
    sigma = float(-rates.dp_iso @ f1)
    scale = max(1.0, float(np.max(np.abs(f))), float(np.max(np.abs(rates.dp))))
    iso_orth = abs(float(rates.dp_iso @ f2)) <= tol * scale
    ex_orth = abs(float(rates.dp_ex @ f)) <= tol * scale
    xi_total = float(rates.dp @ f2)
    xi_ex = float(rates.dp_ex @ f2)
    checks = ConstraintAudit(
        sigma=sigma,
        sigma_nonneg=sigma >= -tol,
        iso_orthogonal=iso_orth,
        ex_orthogonal=ex_orth,
        xi_matches_exchange=abs(xi_total - xi_ex) <= tol * scale,
        all_pass=False,
    )
    ok = (checks.sigma_nonneg and checks.iso_orthogonal and checks.ex_orthogonal
          and checks.xi_matches_exchange)
    return ConstraintAudit(**{**checks.__dict__, "all_pass": ok})


def classify_adiabatic(record, tol: float = 1e-10) -> str:
    """'strong' (all external heats zero), 'weak' (net zero, opposite
    sub-system flows), or 'none', from the external heat parts of a
    per-step thermodynamic record."""
    q1_ex, q2_ex, q12_ex = record.Q1_ex, record.Q2_ex, record.Q12_ex
    q_ex = q1_ex + q2_ex + q12_ex
    if abs(q1_ex) < tol and abs(q2_ex) < tol and abs(q_ex) < tol:
        return "strong"
    if abs(q_ex) < tol and abs(q1_ex + q2_ex) < tol and abs(q1_ex) >= tol:
        return "weak"
    return "none"


def weak_adiabatic_balance(conduction: HeatConduction, theta1: float,
                           theta2: float, theta: float) -> float:
    """Residual of kappa1 (1/Θ1 - 1/Θ) + kappa2 (1/Θ2 - 1/Θ) = 0."""
    return (conduction.kappa_ex_1 * (1.0 / theta1 - 1.0 / theta)
            + conduction.kappa_ex_2 * (1.0 / theta2 - 1.0 / theta))


@dataclass(frozen=True)
class ReversibilityReport:
    reversible: bool
    sigma: float
    canonical_case: bool  # f^I = -f^II up to the Z gauge constant


def reversibility_check(ens: Ensemble, rates: RateSplit, h: np.ndarray,
                        theta: float, z: float = 1.0,
                        kb: float = config.KB_DEFAULT) -> ReversibilityReport:
    """Reversible: zero entropy production while rates or forces are alive."""
    f1 = f1_vector(ens, z, kb)
    g1 = zero_mean(f1)
    g2 = zero_mean(f2_vector(ens.frame, h, theta))
    sigma = float(-rates.dp_iso @ f1)
    alive = (float(np.linalg.norm(rates.dp_iso)) > 1e-12
             or float(np.linalg.norm(g1)) > 1e-12)
    canonical = float(np.linalg.norm(g1 + g2)) <= 1e-10 * max(
        1.0, float(np.linalg.norm(g2))
    )
    return ReversibilityReport(abs(sigma) < 1e-12 and alive, sigma, canonical)


def internal_heat_closure(conduction: HeatConduction, theta1: float,
                          theta2: float, theta12: float) -> Tuple[float, float, float]:
    """kappa-parameterized internal heats; the partition part balances the
    sub-system parts so the internal sum vanishes."""
    q1 = heat_conduction_law(conduction.kappa_int_1, theta1, theta12)
    q2 = heat_conduction_law(conduction.kappa_int_2, theta2, theta12)
    return q1, q2, -(q1 + q2)


def continuity_forced_internal_heat(theta1: float, theta2: float,
                                    q12_int: float) -> Optional[float]:
    """Q̇^1_int from the continuous-entropy-exchange condition
    Q̇^12_int/Θ² = Q̇^1_int (1/Θ¹ - 1/Θ²); None when Θ¹ = Θ² leaves it free."""
    gap = 1.0 / theta1 - 1.0 / theta2
    if abs(gap) < 1e-14:
        return None
    return (q12_int / theta2) / gap
