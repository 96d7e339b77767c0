"""Bipartite compound systems: decomposed Hamiltonians with work variables,
the compound equation of motion, traced sub-system dynamics, internal vs
external exchange splits, equilibrium ensembles and checks, and the
system-plus-reservoir configuration.

Sub-system operators are stored on their own factors and embedded on
demand; composite indices follow the np.kron convention of linops.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import config, linops
from .ensemble import (
    Ensemble,
    Frame,
    RateSplit,
    density_of,
    f1_vector,
    propagator_of,
)
from .errors import (
    ConstraintViolationError,
    DimensionError,
    InvalidTemperatureError,
)
from .observables import heat_rate, shannon_entropy


def _herm_tuple(ops, dim, what):
    out = []
    for i, g in enumerate(ops):
        g = linops.hermitize(g)
        if g.shape != (dim, dim):
            raise DimensionError(f"{what}[{i}] has shape {g.shape}, expected {(dim, dim)}")
        out.append(g)
    return tuple(out)


@dataclass(frozen=True)
class WorkState:
    """Work variables and their rates, one block per Hamiltonian part."""

    a1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a12: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a1_dot: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a2_dot: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a12_dot: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        for name in ("a1", "a2", "a12", "a1_dot", "a2_dot", "a12_dot"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        for name in ("a1", "a2", "a12"):
            if getattr(self, name).shape != getattr(self, name + "_dot").shape:
                raise DimensionError(f"{name} and {name}_dot lengths differ")

    @classmethod
    def rigid(cls) -> "WorkState":
        return cls()


@dataclass(frozen=True)
class CompoundHamiltonian:
    """H = H¹ + H² + H¹² with affine work-variable dependence.

    H¹ = H¹_0 + a¹·G¹ + a¹²·G¹_s acts on factor 1 (stored d1 x d1);
    H² analogously on factor 2; H¹² = H¹²_0 + a¹²·G¹²_s on the product
    space.  The three shared-generator lists all pair with a¹².
    """

    d1: int
    d2: int
    h1_base: np.ndarray
    h2_base: np.ndarray
    h12_base: np.ndarray
    gens_1: Tuple[np.ndarray, ...] = ()
    gens_2: Tuple[np.ndarray, ...] = ()
    gens_1_shared: Tuple[np.ndarray, ...] = ()
    gens_2_shared: Tuple[np.ndarray, ...] = ()
    gens_12_shared: Tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise DimensionError("factor dimensions must be >= 1")
        n = self.d1 * self.d2
        h1 = linops.hermitize(self.h1_base)
        h2 = linops.hermitize(self.h2_base)
        h12 = linops.hermitize(self.h12_base)
        if h1.shape != (self.d1, self.d1):
            raise DimensionError(f"h1_base shape {h1.shape}, expected {(self.d1, self.d1)}")
        if h2.shape != (self.d2, self.d2):
            raise DimensionError(f"h2_base shape {h2.shape}, expected {(self.d2, self.d2)}")
        if h12.shape != (n, n):
            raise DimensionError(f"h12_base shape {h12.shape}, expected {(n, n)}")
        object.__setattr__(self, "h1_base", h1)
        object.__setattr__(self, "h2_base", h2)
        object.__setattr__(self, "h12_base", h12)
        object.__setattr__(self, "gens_1", _herm_tuple(self.gens_1, self.d1, "gens_1"))
        object.__setattr__(self, "gens_2", _herm_tuple(self.gens_2, self.d2, "gens_2"))
        object.__setattr__(self, "gens_1_shared",
                           _herm_tuple(self.gens_1_shared, self.d1, "gens_1_shared"))
        object.__setattr__(self, "gens_2_shared",
                           _herm_tuple(self.gens_2_shared, self.d2, "gens_2_shared"))
        object.__setattr__(self, "gens_12_shared",
                           _herm_tuple(self.gens_12_shared, n, "gens_12_shared"))
        n12 = {len(self.gens_1_shared), len(self.gens_2_shared), len(self.gens_12_shared)}
        if len(n12) > 1:
            raise DimensionError("shared generator lists must have equal length")

    @property
    def dim(self) -> int:
        return self.d1 * self.d2

    def _check_work(self, work: WorkState):
        if work.a1.shape[0] != len(self.gens_1):
            raise DimensionError("a1 length does not match gens_1")
        if work.a2.shape[0] != len(self.gens_2):
            raise DimensionError("a2 length does not match gens_2")
        if work.a12.shape[0] != len(self.gens_12_shared):
            raise DimensionError("a12 length does not match shared generators")

    def part1_local(self, work: WorkState) -> np.ndarray:
        self._check_work(work)
        h = self.h1_base.copy()
        for a, g in zip(work.a1, self.gens_1):
            h = h + a * g
        for a, g in zip(work.a12, self.gens_1_shared):
            h = h + a * g
        return h

    def part2_local(self, work: WorkState) -> np.ndarray:
        self._check_work(work)
        h = self.h2_base.copy()
        for a, g in zip(work.a2, self.gens_2):
            h = h + a * g
        for a, g in zip(work.a12, self.gens_2_shared):
            h = h + a * g
        return h

    def part1(self, work: WorkState) -> np.ndarray:
        return linops.embed_first(self.part1_local(work), self.d2)

    def part2(self, work: WorkState) -> np.ndarray:
        return linops.embed_second(self.part2_local(work), self.d1)

    def part12(self, work: WorkState) -> np.ndarray:
        self._check_work(work)
        h = self.h12_base.copy()
        for a, g in zip(work.a12, self.gens_12_shared):
            h = h + a * g
        return h

    def total(self, work: WorkState) -> np.ndarray:
        # built as the exact sum, so H - H1 - H2 = H12 holds identically
        return self.part1(work) + self.part2(work) + self.part12(work)

    def own_generators(self, which: int) -> Tuple[np.ndarray, ...]:
        """dH^A/da^A, embedded on the product space."""
        if which == 1:
            return tuple(linops.embed_first(g, self.d2) for g in self.gens_1)
        if which == 2:
            return tuple(linops.embed_second(g, self.d1) for g in self.gens_2)
        raise ValueError(f"which must be 1 or 2, got {which}")

    def shared_generators(self, which) -> Tuple[np.ndarray, ...]:
        """dH^A/da¹², embedded on the product space; which in {1, 2, 12}."""
        if which == 1:
            return tuple(linops.embed_first(g, self.d2) for g in self.gens_1_shared)
        if which == 2:
            return tuple(linops.embed_second(g, self.d1) for g in self.gens_2_shared)
        if which == 12:
            return self.gens_12_shared
        raise ValueError(f"which must be 1, 2 or 12, got {which}")


@dataclass(frozen=True)
class TemperatureSet:
    theta1: float
    theta2: float
    theta12: float
    theta: float
    t_box: float

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta12", "theta", "t_box"):
            if getattr(self, name) <= 0:
                raise InvalidTemperatureError(f"{name} must be positive")

    @classmethod
    def uniform(cls, theta: float, t_box: Optional[float] = None) -> "TemperatureSet":
        return cls(theta, theta, theta, theta, t_box if t_box is not None else theta)


@dataclass(frozen=True)
class BipartiteSystem:
    """Immutable snapshot of a compound system between two partitions.

    The isolated flag is a pure statement about the rates: it never
    touches the ensemble or the Hamiltonians.
    """

    hamiltonian: CompoundHamiltonian
    state: Ensemble
    rates: RateSplit
    work: WorkState
    temps: TemperatureSet
    isolated: bool = False
    t: float = 0.0
    hbar: float = config.HBAR_DEFAULT
    kb: float = config.KB_DEFAULT

    def __post_init__(self):
        if self.state.dim != self.hamiltonian.dim:
            raise DimensionError("ensemble dimension does not match Hamiltonian")
        if self.rates.dp_ex.shape[0] != self.state.dim:
            raise DimensionError("rate length does not match ensemble")
        if self.isolated and np.max(np.abs(self.rates.dp_ex)) > 1e-15:
            raise ConstraintViolationError("isolated system carries exchange rates")

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.hamiltonian.d1, self.hamiltonian.d2)

    def h_total(self) -> np.ndarray:
        return self.hamiltonian.total(self.work)

    def rho(self) -> np.ndarray:
        return density_of(self.state)

    def prop_ex(self) -> np.ndarray:
        return propagator_of(self.state.frame, self.rates.dp_ex)

    def prop_iso(self) -> np.ndarray:
        return propagator_of(self.state.frame, self.rates.dp_iso)

    def prop(self) -> np.ndarray:
        return propagator_of(self.state.frame, self.rates.dp)


def compound_rhs(sys: BipartiteSystem) -> np.ndarray:
    """ρ̇_com = -(i/hbar)[H, ρ_com] + ρ°_ex + ρ°_iso; traceless, Hermitian."""
    h = sys.h_total()
    rho = sys.rho()
    return (-1j / sys.hbar) * linops.commutator(h, rho) + sys.prop()


def subsystem_eom_residual(sys: BipartiteSystem, which: int) -> float:
    """Norm mismatch between the traced compound motion and the sub-system
    form built from the local commutator, the traced interaction
    commutator and the reduced propagator.  An algebraic identity; any
    sizable residual flags broken tensor bookkeeping."""
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}")
    dims = sys.dims
    side = "second" if which == 1 else "first"  # factor that is traced away
    rho_com = sys.rho()
    traced = linops.partial_trace(compound_rhs(sys), dims, side)
    h_local = (sys.hamiltonian.part1_local(sys.work) if which == 1
               else sys.hamiltonian.part2_local(sys.work))
    rho_a = linops.partial_trace(rho_com, dims, side)
    h12 = sys.hamiltonian.part12(sys.work)
    direct = ((-1j / sys.hbar) * linops.commutator(h_local, rho_a)
              + (-1j / sys.hbar) * linops.partial_trace(
                  linops.commutator(h12, rho_com), dims, side)
              + linops.partial_trace(sys.prop(), dims, side))
    return float(np.linalg.norm(traced - direct))


@dataclass(frozen=True)
class PartialPower:
    w1_ex: float
    w2_ex: float
    w1_int: float
    w2_int: float
    w12_int: float
    balance_residual: float  # total vs external + internal parts

    @property
    def w_ex_total(self) -> float:
        return self.w1_ex + self.w2_ex

    @property
    def w_int_total(self) -> float:
        """Internal power sum; zero only when the shared generators balance."""
        return self.w1_int + self.w2_int + self.w12_int

    @property
    def w_total(self) -> float:
        return self.w_ex_total + self.w_int_total


def _gen_power(gens, rho, a_dot) -> float:
    return float(sum(float(np.trace(g @ rho).real) * ad for g, ad in zip(gens, a_dot)))


def partial_power(sys: BipartiteSystem) -> PartialPower:
    """First-law power split: own-variable parts are external, shared-
    variable parts are internal (through the partition)."""
    ham = sys.hamiltonian
    rho = sys.rho()
    w = sys.work
    w1_ex = _gen_power(ham.own_generators(1), rho, w.a1_dot)
    w2_ex = _gen_power(ham.own_generators(2), rho, w.a2_dot)
    w1_int = _gen_power(ham.shared_generators(1), rho, w.a12_dot)
    w2_int = _gen_power(ham.shared_generators(2), rho, w.a12_dot)
    w12_int = _gen_power(ham.shared_generators(12), rho, w.a12_dot)
    total_direct = (
        _gen_power(ham.own_generators(1), rho, w.a1_dot)
        + _gen_power(ham.own_generators(2), rho, w.a2_dot)
        + _gen_power(
            tuple(
                g1 + g2 + g12
                for g1, g2, g12 in zip(
                    ham.shared_generators(1), ham.shared_generators(2),
                    ham.shared_generators(12))
            ),
            rho, w.a12_dot,
        )
    )
    res = abs(total_direct - (w1_ex + w2_ex + w1_int + w2_int + w12_int))
    return PartialPower(w1_ex, w2_ex, w1_int, w2_int, w12_int, res)


@dataclass(frozen=True)
class PartialHeat:
    q1_ex: float
    q2_ex: float
    q12_ex: float
    q1_int: float
    q2_int: float
    q12_int: float
    q_total: float
    additivity_residual: float  # sum of parts vs Tr(H rho°)

    @property
    def q_ex_total(self) -> float:
        return self.q1_ex + self.q2_ex + self.q12_ex

    @property
    def q_int_total(self) -> float:
        return self.q1_int + self.q2_int + self.q12_int


def partial_heat(sys: BipartiteSystem) -> PartialHeat:
    """Heat split per part: internal parts carry the interaction-driven
    commutator flow plus the isolated propagator, external parts the
    exchange propagator."""
    h = sys.h_total()
    rho = sys.rho()
    comm = linops.commutator(h, rho)
    p_iso = sys.prop_iso()
    p_ex = sys.prop_ex()
    parts = {
        1: sys.hamiltonian.part1(sys.work),
        2: sys.hamiltonian.part2(sys.work),
        12: sys.hamiltonian.part12(sys.work),
    }

    def q_int(ha):
        val = (-1j / sys.hbar) * np.trace(ha @ comm) + np.trace(ha @ p_iso)
        return float(val.real)

    def q_ex(ha):
        return float(np.trace(ha @ p_ex).real)

    q1i, q2i, q12i = q_int(parts[1]), q_int(parts[2]), q_int(parts[12])
    q1e, q2e, q12e = q_ex(parts[1]), q_ex(parts[2]), q_ex(parts[12])
    q_total = heat_rate(h, sys.prop())
    res = abs((q1i + q2i + q12i + q1e + q2e + q12e) - q_total)
    return PartialHeat(q1e, q2e, q12e, q1i, q2i, q12i, q_total, res)


@dataclass(frozen=True)
class PartialEntropyExchange:
    xi1_ex: float
    xi2_ex: float
    xi12_ex: float
    xi1_int: float
    xi2_int: float
    xi12_int: float
    xi_ex_total: float       # Q̇_ex / Θ of the undecomposed system
    ex_gap: float            # sum of external parts minus xi_ex_total
    int_sum: float
    continuity_residual: Optional[float]  # continuous-entropy-exchange condition


def partial_entropy_exchange(sys: BipartiteSystem,
                             heats: Optional[PartialHeat] = None,
                             check_continuity: bool = False) -> PartialEntropyExchange:
    """Ξ^A = Q̇^A/Θ^A per part and exchange channel, with the compound-
    deficiency gap against the undecomposed Ξ_ex = Q̇_ex/Θ."""
    q = heats if heats is not None else partial_heat(sys)
    th = sys.temps
    xi1e, xi2e, xi12e = q.q1_ex / th.theta1, q.q2_ex / th.theta2, q.q12_ex / th.theta12
    xi1i, xi2i, xi12i = q.q1_int / th.theta1, q.q2_int / th.theta2, q.q12_int / th.theta12
    xi_ex_total = q.q_ex_total / th.theta
    cont = None
    if check_continuity:
        cont = q.q12_int / th.theta2 - q.q1_int * (1.0 / th.theta1 - 1.0 / th.theta2)
    return PartialEntropyExchange(
        xi1e, xi2e, xi12e, xi1i, xi2i, xi12i,
        xi_ex_total, (xi1e + xi2e + xi12e) - xi_ex_total,
        xi1i + xi2i + xi12i, cont,
    )


def microcanonical(n: int) -> Ensemble:
    """Uniform weights 1/N on the standard frame (sum-normalization Z = N)."""
    if n < 1:
        raise ValueError(f"need at least one state, got {n}")
    return Ensemble(Frame.standard(n), np.full(n, 1.0 / n))


def canonical(h: np.ndarray, theta: float,
              kb: float = config.KB_DEFAULT) -> Tuple[Ensemble, float]:
    """Boltzmann weights on the eigenframe of H; returns (ensemble, Z)."""
    if theta <= 0:
        raise InvalidTemperatureError(f"temperature must be positive, got {theta}")
    h = linops.hermitize(h)
    vals, vecs = np.linalg.eigh(h)
    shifted = np.exp(-(vals - vals[0]) / (kb * theta))
    z = float(np.sum(shifted) * np.exp(-vals[0] / (kb * theta)))
    return Ensemble(Frame(vecs), shifted / shifted.sum()), z


@dataclass(frozen=True)
class EquilibriumReport:
    rhs_zero: bool
    ex_zero: bool
    iso_zero: bool
    work_static: bool
    temps_equal: bool
    exchanges_zero: bool
    s_dot_zero: bool
    sigma_zero: bool

    @property
    def all_pass(self) -> bool:
        return all(getattr(self, f) for f in (
            "rhs_zero", "ex_zero", "iso_zero", "work_static", "temps_equal",
            "exchanges_zero", "s_dot_zero", "sigma_zero"))


def equilibrium_check(sys: BipartiteSystem, tol: float = 1e-10,
                      temp_tol: float = 1e-8) -> EquilibriumReport:
    rhs = compound_rhs(sys)
    th = sys.temps
    q = partial_heat(sys)
    w = partial_power(sys)
    f1 = f1_vector(sys.state, 1.0, sys.kb)
    s_dot = float(-sys.rates.dp @ f1)
    sigma = float(-sys.rates.dp_iso @ f1)
    exchanges = max(
        abs(q.q1_ex), abs(q.q2_ex), abs(q.q12_ex),
        abs(q.q1_int), abs(q.q2_int), abs(q.q12_int),
        abs(w.w1_ex), abs(w.w2_ex), abs(w.w1_int), abs(w.w2_int), abs(w.w12_int),
    )
    return EquilibriumReport(
        rhs_zero=float(np.linalg.norm(rhs)) < tol,
        ex_zero=float(np.max(np.abs(sys.rates.dp_ex), initial=0.0)) < tol,
        iso_zero=float(np.max(np.abs(sys.rates.dp_iso), initial=0.0)) < tol,
        work_static=all(
            float(np.max(np.abs(v), initial=0.0)) < tol
            for v in (sys.work.a1_dot, sys.work.a2_dot, sys.work.a12_dot)),
        temps_equal=max(abs(th.theta1 - th.theta), abs(th.theta2 - th.theta),
                        abs(th.theta12 - th.theta)) < temp_tol,
        exchanges_zero=exchanges < tol,
        s_dot_zero=abs(s_dot) < tol,
        sigma_zero=abs(sigma) < tol,
    )


def entropy_rate_deficiency(sys: BipartiteSystem) -> Tuple[float, float]:
    """Ṡ₁ + Ṡ₂ - Ṡ by two routes: the per-part definitions, and the
    explicit interaction-commutator form.  Both need full-rank reductions.
    """
    dims = sys.dims
    rho_com = sys.rho()
    rhs = compound_rhs(sys)
    prop = sys.prop()
    kb = sys.kb
    rho1 = linops.partial_trace(rho_com, dims, "second")
    rho2 = linops.partial_trace(rho_com, dims, "first")
    log1 = linops.operator_log(rho1)
    log2 = linops.operator_log(rho2)

    s1_dot = float(-kb * np.trace(linops.partial_trace(rhs, dims, "second") @ log1).real)
    s2_dot = float(-kb * np.trace(linops.partial_trace(rhs, dims, "first") @ log2).real)
    s_dot = float(-kb * np.trace(rhs @ linops.operator_log(rho_com)).real)
    route_def = s1_dot + s2_dot - s_dot

    log_prod = (linops.embed_first(log1, dims[1]) + linops.embed_second(log2, dims[0]))
    h12 = sys.hamiltonian.part12(sys.work)
    comm12 = linops.commutator(h12, rho_com)
    route_explicit = float(-kb * np.trace(
        (-1j / sys.hbar) * comm12 @ log_prod
        + prop @ (log_prod - linops.operator_log(rho_com))
    ).real)
    return route_def, route_explicit


@dataclass(frozen=True)
class ReservoirDiagnostics:
    partial_comm_residual: float   # reservoir-space trace of the interaction commutator
    system_eq_residual: float      # traced equilibrium condition on the system factor
    scalar_comm_residual: float    # full trace of the interaction commutator
    reservoir_commutes: bool       # [H_res, rho_res] vanishes (canonical reservoir)


def reservoir_diagnostics(sys: BipartiteSystem) -> ReservoirDiagnostics:
    dims = sys.dims
    rho_com = sys.rho()
    h_ia = sys.hamiltonian.part12(sys.work)
    comm = linops.commutator(h_ia, rho_com)
    partial_res = float(np.linalg.norm(linops.partial_trace(comm, dims, "first")))
    rho_sys = linops.partial_trace(rho_com, dims, "second")
    h_sys = sys.hamiltonian.part1_local(sys.work)
    sys_res = float(np.linalg.norm(
        linops.commutator(h_sys, rho_sys)
        + linops.partial_trace(comm, dims, "second")))
    scalar_res = abs(complex(np.trace(comm)))
    rho_res = linops.partial_trace(rho_com, dims, "first")
    h_res = sys.hamiltonian.part2_local(sys.work)
    commutes = float(np.linalg.norm(linops.commutator(h_res, rho_res))) < 1e-12
    return ReservoirDiagnostics(partial_res, sys_res, scalar_res, commutes)


def reservoir_config(system_h: np.ndarray, reservoir_h: np.ndarray,
                     interaction_h: np.ndarray, t_box: float,
                     theta_system: Optional[float] = None,
                     kb: float = config.KB_DEFAULT) -> BipartiteSystem:
    """Externally isolated system-plus-reservoir compound: the reservoir
    factor starts canonical at T□, the system factor canonical at its own
    temperature (default T□), no exchange rates."""
    if t_box <= 0:
        raise InvalidTemperatureError(f"T_box must be positive, got {t_box}")
    system_h = linops.hermitize(system_h)
    reservoir_h = linops.hermitize(reservoir_h)
    d1 = system_h.shape[0]
    d2 = reservoir_h.shape[0]
    interaction_h = linops.hermitize(interaction_h)
    if interaction_h.shape != (d1 * d2, d1 * d2):
        raise DimensionError(
            f"interaction shape {interaction_h.shape}, expected {(d1 * d2, d1 * d2)}"
        )
    th_sys = theta_system if theta_system is not None else t_box
    ens_sys, _ = canonical(system_h, th_sys, kb)
    ens_res, _ = canonical(reservoir_h, t_box, kb)
    frame = Frame(np.kron(ens_sys.frame.vectors, ens_res.frame.vectors))
    weights = np.kron(ens_sys.weights, ens_res.weights)
    ham = CompoundHamiltonian(d1, d2, system_h, reservoir_h, interaction_h)
    temps = TemperatureSet(th_sys, t_box, t_box, th_sys, t_box)
    return BipartiteSystem(
        hamiltonian=ham,
        state=Ensemble(frame, weights),
        rates=RateSplit.zero(d1 * d2),
        work=WorkState.rigid(),
        temps=temps,
        isolated=True,
        kb=kb,
    )
