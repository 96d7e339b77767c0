"""Batch front end: scenario files in, CSV/JSON/SVG artifacts out, plus
property-check suites runnable from the command line.

Scenario files are JSON; complex matrices are serialized as paired
real/imag row-major arrays.  Exit codes: 0 pass, 1 property or simulation
failure, 2 input error.
"""

import argparse
import csv
import json
import sys as _sys
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import config, linops
from .bipartite import (
    BipartiteSystem,
    CompoundHamiltonian,
    TemperatureSet,
    WorkState,
    canonical,
    microcanonical,
)
from .constitutive import (
    ConstitutiveModel,
    HeatConduction,
    classify_adiabatic,
    constraint_audit,
    iso_rates,
)
from .ensemble import Ensemble, Frame, RateSplit, f1_vector, f_vector
from .errors import QSchottkyError, ScenarioError
from .observables import (
    THERMO_COLUMNS,
    ThermoRecord,
    entropy_exchange_inequality,
    partial_entropies,
)
from .simulate import (
    PiecewiseLinear,
    Scenario,
    Schedule,
    Trajectory,
    first_law_audit,
    run,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


# ---------------------------------------------------------------- parsing

def _as_complex(node, field: str) -> np.ndarray:
    if not isinstance(node, dict) or "re" not in node:
        raise ScenarioError("expected {re, im} matrix", field=field)
    re = np.asarray(node["re"], dtype=float)
    im = np.asarray(node.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ScenarioError("re/im shapes differ", field=field)
    mat = re + 1j * im
    if not linops.is_hermitian(mat, tol=1e-10):
        raise ScenarioError("matrix is not Hermitian", field=field)
    return mat


def _mat_out(mat: np.ndarray) -> Dict:
    mat = np.asarray(mat, dtype=complex)
    return {"re": mat.real.tolist(), "im": mat.imag.tolist()}


def _gen_list(node, field: str) -> Tuple[np.ndarray, ...]:
    if node is None:
        return ()
    return tuple(_as_complex(m, f"{field}[{i}]") for i, m in enumerate(node))


def _schedule_block(node, field: str) -> Optional[PiecewiseLinear]:
    if node is None:
        return None
    try:
        return PiecewiseLinear(np.asarray(node["times"], float),
                               np.asarray(node["values"], float))
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"bad schedule block: {exc}", field=field)


def parse_scenario(doc: Dict) -> Scenario:
    """Build a Scenario from the JSON document structure."""
    try:
        dims = doc["dimensions"]
        d1, d2 = int(dims["d1"]), int(dims["d2"])
    except (KeyError, TypeError):
        raise ScenarioError("missing dimensions {d1, d2}", field="dimensions")
    consts = doc.get("constants", {})
    hbar = float(consts.get("hbar", config.HBAR_DEFAULT))
    kb = float(consts.get("k_B", config.KB_DEFAULT))

    hnode = doc.get("hamiltonian")
    if hnode is None:
        raise ScenarioError("missing hamiltonian section", field="hamiltonian")
    gens = hnode.get("generators", {})
    ham = CompoundHamiltonian(
        d1, d2,
        _as_complex(hnode["H1_0"], "hamiltonian.H1_0"),
        _as_complex(hnode["H2_0"], "hamiltonian.H2_0"),
        _as_complex(hnode["H12_0"], "hamiltonian.H12_0"),
        gens_1=_gen_list(gens.get("G1"), "hamiltonian.generators.G1"),
        gens_2=_gen_list(gens.get("G2"), "hamiltonian.generators.G2"),
        gens_1_shared=_gen_list(gens.get("G1_shared"), "hamiltonian.generators.G1_shared"),
        gens_2_shared=_gen_list(gens.get("G2_shared"), "hamiltonian.generators.G2_shared"),
        gens_12_shared=_gen_list(gens.get("G12_shared"), "hamiltonian.generators.G12_shared"),
    )

    sched_node = doc.get("schedule", {})
    tnode = doc.get("temperatures", {})
    tb_node = tnode.get("T_box", 1.0)
    if isinstance(tb_node, dict):
        tbox_sched = _schedule_block(tb_node, "temperatures.T_box")
        t_box0 = float(tbox_sched.value(0.0)[0])
    else:
        tbox_sched = None
        t_box0 = float(tb_node)
    schedule = Schedule(
        a1=_schedule_block(sched_node.get("a1"), "schedule.a1"),
        a2=_schedule_block(sched_node.get("a2"), "schedule.a2"),
        a12=_schedule_block(sched_node.get("a12"), "schedule.a12"),
        t_box=tbox_sched,
    )

    n1, n2, n12 = len(ham.gens_1), len(ham.gens_2), len(ham.gens_12_shared)
    work0 = schedule.work_at(0.0, WorkState(
        np.zeros(n1), np.zeros(n2), np.zeros(n12),
        np.zeros(n1), np.zeros(n2), np.zeros(n12)))

    init = doc.get("initial", {})
    try:
        weights = np.asarray(init["weights"], dtype=float)
    except (KeyError, TypeError):
        raise ScenarioError("missing initial weights", field="initial.weights")
    frame_node = init.get("frame", "eigen")
    if isinstance(frame_node, str):
        if frame_node != "eigen":
            raise ScenarioError(f"unknown frame spec {frame_node!r}", field="initial.frame")
        _, vecs = np.linalg.eigh(linops.hermitize(ham.total(work0)))
        frame = Frame(vecs)
    else:
        v = _as_frame_matrix(frame_node)
        frame = Frame(v)
    try:
        ens = Ensemble(frame, weights)
    except QSchottkyError as exc:
        raise ScenarioError(str(exc), field="initial.weights")

    theta0 = float(tnode.get("Theta", t_box0))
    tie = []
    part_temps = {}
    for key, name in (("Theta1", "theta1"), ("Theta2", "theta2"),
                      ("Theta12", "theta12")):
        val = tnode.get(key, theta0)
        if val == "fit":
            tie.append(name)
            part_temps[name] = theta0
        else:
            part_temps[name] = float(val)
    temps = TemperatureSet(part_temps["theta1"], part_temps["theta2"],
                           part_temps["theta12"], theta0, t_box0)

    mnode = doc.get("model", {})
    conduction = HeatConduction(
        kappa_ex_1=float(mnode.get("kappa_ex_1", 1.0)),
        kappa_ex_2=float(mnode.get("kappa_ex_2", 1.0)),
        kappa_ex=float(mnode.get("kappa_ex", 1.0)),
        kappa_int_1=float(mnode.get("kappa_int_1", 1.0)),
        kappa_int_2=float(mnode.get("kappa_int_2", 1.0)),
    )
    model = ConstitutiveModel(
        alpha=float(mnode.get("alpha", 0.0)),
        conduction=conduction,
        fit_theta=bool(mnode.get("fit_theta", True)),
        track_tbox=bool(mnode.get("track_tbox", False)),
    )

    rnode = doc.get("run", {})
    system = BipartiteSystem(
        hamiltonian=ham, state=ens, rates=RateSplit.zero(d1 * d2),
        work=work0, temps=temps,
        isolated=bool(rnode.get("isolated", False)),
        hbar=hbar, kb=kb,
    )
    events = tuple((float(t), bool(f)) for t, f in rnode.get("isolation_events", []))
    return Scenario(
        system=system, model=model, schedule=schedule,
        isolation_events=events,
        t_end=float(rnode.get("t_end", 1.0)),
        dt=float(rnode.get("dt", 1e-3)),
        record_every=int(rnode.get("record_every", 1)),
        tie_part_temps=tuple(tie),
    )


def _as_frame_matrix(node) -> np.ndarray:
    if not isinstance(node, dict) or "re" not in node:
        raise ScenarioError("frame must be 'eigen' or an {re, im} matrix",
                            field="initial.frame")
    re = np.asarray(node["re"], dtype=float)
    im = np.asarray(node.get("im", np.zeros_like(re)), dtype=float)
    return re + 1j * im


def _pl_out(pl: Optional[PiecewiseLinear]):
    if pl is None:
        return None
    return {"times": pl.times.tolist(), "values": pl.values.tolist()}


def serialize_scenario(sc: Scenario) -> Dict:
    """Inverse of parse_scenario (frames always explicit)."""
    ham = sc.system.hamiltonian
    sched = sc.schedule
    doc = {
        "dimensions": {"d1": ham.d1, "d2": ham.d2},
        "constants": {"hbar": sc.system.hbar, "k_B": sc.system.kb},
        "hamiltonian": {
            "H1_0": _mat_out(ham.h1_base),
            "H2_0": _mat_out(ham.h2_base),
            "H12_0": _mat_out(ham.h12_base),
            "generators": {
                "G1": [_mat_out(g) for g in ham.gens_1] or None,
                "G2": [_mat_out(g) for g in ham.gens_2] or None,
                "G1_shared": [_mat_out(g) for g in ham.gens_1_shared] or None,
                "G2_shared": [_mat_out(g) for g in ham.gens_2_shared] or None,
                "G12_shared": [_mat_out(g) for g in ham.gens_12_shared] or None,
            },
        },
        "initial": {
            "weights": sc.system.state.weights.tolist(),
            "frame": _mat_out(sc.system.state.frame.vectors),
        },
        "temperatures": {
            "Theta1": ("fit" if "theta1" in sc.tie_part_temps
                       else sc.system.temps.theta1),
            "Theta2": ("fit" if "theta2" in sc.tie_part_temps
                       else sc.system.temps.theta2),
            "Theta12": ("fit" if "theta12" in sc.tie_part_temps
                        else sc.system.temps.theta12),
            "Theta": sc.system.temps.theta,
            "T_box": (_pl_out(sched.t_box) if sched.t_box is not None
                      else sc.system.temps.t_box),
        },
        "model": {
            "alpha": sc.model.alpha,
            "kappa_ex": sc.model.conduction.kappa_ex,
            "kappa_ex_1": sc.model.conduction.kappa_ex_1,
            "kappa_ex_2": sc.model.conduction.kappa_ex_2,
            "kappa_int_1": sc.model.conduction.kappa_int_1,
            "kappa_int_2": sc.model.conduction.kappa_int_2,
            "fit_theta": sc.model.fit_theta,
            "track_tbox": sc.model.track_tbox,
        },
        "schedule": {
            "a1": _pl_out(sched.a1), "a2": _pl_out(sched.a2),
            "a12": _pl_out(sched.a12),
        },
        "run": {
            "t_end": sc.t_end, "dt": sc.dt, "record_every": sc.record_every,
            "isolated": sc.system.isolated,
            "isolation_events": [[t, f] for t, f in sc.isolation_events],
        },
    }
    return doc


def load_scenario(name_or_path: str) -> Scenario:
    """Load from a file path, or fall back to a bundled scenario name."""
    path = Path(name_or_path)
    if path.exists():
        text = path.read_text()
    else:
        res = resources.files("qschottky") / "scenarios" / f"{name_or_path}.json"
        if not res.is_file():
            raise ScenarioError(f"scenario not found: {name_or_path}")
        text = res.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}")
    return parse_scenario(doc)


def bundled_scenario_names() -> List[str]:
    base = resources.files("qschottky") / "scenarios"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


# ---------------------------------------------------------------- run

def write_trajectory_csv(traj: Trajectory, path: Path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(THERMO_COLUMNS)
        for rec in traj.records:
            writer.writerow([repr(float(v)) for v in rec.row()])


def _svg_panel(x, y, label, x0, y0, w, h):
    """One polyline panel; returns SVG fragment strings."""
    xr = (min(x), max(x)) if len(x) else (0, 1)
    yr = (min(y), max(y)) if len(y) else (0, 1)
    xs = (xr[1] - xr[0]) or 1.0
    ys = (yr[1] - yr[0]) or 1.0
    pts = " ".join(
        f"{x0 + (xi - xr[0]) / xs * w:.2f},{y0 + h - (yi - yr[0]) / ys * h:.2f}"
        for xi, yi in zip(x, y))
    return [
        f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#999"/>',
        f'<polyline points="{pts}" fill="none" stroke="#06c" stroke-width="1.2"/>',
        f'<text x="{x0 + 4}" y="{y0 + 14}" font-size="12" font-family="monospace">'
        f'{label} [{yr[0]:.4g}, {yr[1]:.4g}]</text>',
    ]


def write_plots_svg(traj: Trajectory, path: Path):
    t = traj.times
    panels = [("S", traj.column("S")), ("Sigma", traj.column("Sigma")),
              ("Theta", traj.column("Theta")), ("E", traj.column("E"))]
    w, h, pad = 560, 120, 16
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w + 2 * pad}" '
             f'height="{len(panels) * (h + pad) + pad}">']
    for i, (label, y) in enumerate(panels):
        lines += _svg_panel(t, y, label, pad, pad + i * (h + pad), w, h)
    lines.append("</svg>")
    path.write_text("\n".join(lines))


def cmd_run(scenario_path: str, out_dir: str, plots: bool = True) -> int:
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as exc:
        loc = f" (field: {exc.field})" if getattr(exc, "field", None) else ""
        print(f"scenario error: {exc}{loc}", file=_sys.stderr)
        return EXIT_INPUT
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        traj = run(scenario)
    except QSchottkyError as exc:
        print(f"simulation failed: {exc}", file=_sys.stderr)
        return EXIT_FAIL
    write_trajectory_csv(traj, out / "trajectory.csv")
    fin = traj.final_state
    last = traj.records[-1]
    summary = {
        "records": len(traj.records),
        "t_final": last.t,
        "final": {
            "weights": fin.state.weights.tolist(),
            "E": last.E, "S": last.S, "Theta": last.Theta,
        },
        "log": {"renormalizations": traj.log.renormalizations,
                "damping_saturations": traj.log.damping_saturations},
        "adiabatic_class_final": classify_adiabatic(last),
        "sigma_min": float(min(r.Sigma for r in traj.records)),
    }
    if len(traj.records) >= 3:
        audit = first_law_audit(traj)
        summary["first_law"] = {
            "max_deviation": audit.max_deviation,
            "threshold": audit.threshold, "passed": audit.passed,
        }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    if plots:
        write_plots_svg(traj, out / "plots.svg")
    print(f"wrote {len(traj.records)} records to {out / 'trajectory.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------- check

def _random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def _random_density(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _random_ensemble(rng, n) -> Ensemble:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    p = rng.dirichlet(np.ones(n) * 2.0)
    p = np.clip(p, 1e-8, None)
    return Ensemble(Frame(q), p / p.sum())


def _suite_appendix1(rng, n_cases):
    """Partial-trace algebra: trace factorization of embedded operators,
    vanishing partial trace of local commutators, commuting iterated traces."""
    fails = []
    checked = 0
    for d1, d2 in ((2, 2), (2, 3), (3, 3), (2, 4)):
        for _ in range(n_cases // 4 + 1):
            a1 = _random_hermitian(rng, d1)
            b = _random_hermitian(rng, d1 * d2)
            a_emb = linops.embed_first(a1, d2)
            # Tr(A1 B) computed on the product equals Tr1(A1 Tr2 B)
            lhs = complex(np.trace(a_emb @ b))
            rhs = complex(np.trace(a1 @ linops.partial_trace(b, (d1, d2), "second")))
            ok1 = abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
            # partial trace over factor 1 of [A1 (x) I, B] vanishes... over the
            # factor the local operator acts on
            comm = linops.commutator(a_emb, b)
            ok2 = float(np.linalg.norm(
                linops.partial_trace(comm, (d1, d2), "first"))) <= 1e-12
            # iterated traces commute
            t12 = complex(np.trace(linops.partial_trace(b, (d1, d2), "second")))
            t21 = complex(np.trace(linops.partial_trace(b, (d1, d2), "first")))
            ok3 = abs(t12 - t21) <= 1e-12 * max(1.0, abs(t12))
            checked += 1
            if not (ok1 and ok2 and ok3):
                fails.append({"dims": [d1, d2], "checks": [ok1, ok2, ok3],
                              "B": _mat_out(b)})
    return checked, fails


def _suite_klein(rng, n_cases):
    fails = []
    checked = 0
    dims_pool = ((2, 2), (2, 3), (3, 3), (2, 4))
    for _ in range(n_cases):
        d1, d2 = dims_pool[int(rng.integers(len(dims_pool)))]
        rho = _random_density(rng, d1 * d2)
        try:
            pe = partial_entropies(rho, (int(d1), int(d2)))
        except QSchottkyError as exc:
            fails.append({"dims": [int(d1), int(d2)], "error": str(exc)})
            checked += 1
            continue
        checked += 1
        if pe.deficiency < -1e-10:
            fails.append({"dims": [int(d1), int(d2)],
                          "deficiency": pe.deficiency, "rho": _mat_out(rho)})
    # maximally entangled two-qubit state: joint entropy 0, reductions ln 2
    bell = np.zeros((4, 4), dtype=complex)
    for i in (0, 3):
        for j in (0, 3):
            bell[i, j] = 0.5
    pe = partial_entropies(bell, (2, 2))
    checked += 1
    if not (abs(pe.total) < 1e-10 and abs(pe.s1 - np.log(2)) < 1e-10
            and abs(pe.s2 - np.log(2)) < 1e-10):
        fails.append({"case": "bell", "values": [pe.total, pe.s1, pe.s2]})
    return checked, fails


def _suite_secondlaw(rng, n_cases):
    fails = []
    checked = 0
    for dim in (2, 3, 4, 6):
        for _ in range(max(n_cases // 4, 1)):
            ens = _random_ensemble(rng, dim)
            h = _random_hermitian(rng, dim)
            theta = float(rng.uniform(0.3, 3.0))
            z = float(rng.uniform(0.5, 2.0))
            alpha = float(rng.uniform(0.1, 2.0))
            dp_iso = iso_rates(ens, h, theta, z, alpha)
            sigma = float(-dp_iso @ f1_vector(ens, z))
            checked += 1
            if sigma < -1e-12:
                fails.append({"dim": dim, "sigma": sigma,
                              "weights": ens.weights.tolist(),
                              "H": _mat_out(h), "theta": theta, "z": z,
                              "alpha": alpha})
    return checked, fails


def _suite_appendix2(rng, n_cases):
    fails = []
    checked = 0
    for _ in range(n_cases):
        k = int(rng.integers(2, 6))
        kappas = rng.uniform(0.1, 2.0, size=k)
        thetas = rng.uniform(0.3, 3.0, size=k)
        t_box = float(rng.uniform(0.3, 3.0))
        q = kappas * (1.0 / thetas - 1.0 / t_box)
        inv_theta = float(np.sum(kappas / thetas) / np.sum(kappas))
        theta = 1.0 / inv_theta
        rep = entropy_exchange_inequality(list(zip(q, thetas)), theta, t_box,
                                          tol=1e-10)
        checked += 1
        if not rep.chain_holds:
            fails.append({"kappas": kappas.tolist(), "thetas": thetas.tolist(),
                          "t_box": t_box, "violated": rep.violated_link})
    # fixed hand-check: parts (+2 at 1, -1 at 4), theta 1.5, T_box 2
    rep = entropy_exchange_inequality([(2.0, 1.0), (-1.0, 4.0)], 1.5, 2.0)
    checked += 1
    if not (abs(rep.lhs - 1.75) < 1e-12 and abs(rep.mid - 1.0 / 1.5) < 1e-12
            and abs(rep.rhs - 0.5) < 1e-12 and rep.chain_holds):
        fails.append({"case": "hand", "values": [rep.lhs, rep.mid, rep.rhs]})
    return checked, fails


def _suite_settings(rng, n_cases):
    """Constitutive constraints of the exchange/isolation split on random
    states: rate orthogonality, zero sums, audit pass."""
    from .constitutive import ex_rates

    fails = []
    checked = 0
    for _ in range(n_cases):
        dim = int(rng.choice([2, 3, 4]))
        ens = _random_ensemble(rng, dim)
        h = _random_hermitian(rng, dim)
        theta = float(rng.uniform(0.3, 3.0))
        t_box = float(rng.uniform(0.3, 3.0))
        z = float(rng.uniform(0.5, 2.0))
        alpha = float(rng.uniform(0.1, 2.0))
        cond = HeatConduction()
        dp_iso = iso_rates(ens, h, theta, z, alpha)
        try:
            dp_ex = ex_rates(ens, h, theta, z, cond, t_box)
        except QSchottkyError:
            dp_ex = np.zeros(dim)
        audit = constraint_audit(ens, RateSplit(dp_ex, dp_iso), h, theta, z)
        checked += 1
        if not audit.all_pass:
            fails.append({"dim": dim, "audit": audit.__dict__ | {"sigma": audit.sigma},
                          "weights": ens.weights.tolist(), "H": _mat_out(h),
                          "theta": theta, "t_box": t_box, "z": z})
    return checked, fails


def _suite_equilibrium(rng, n_cases):
    fails = []
    checked = 0
    for _ in range(n_cases):
        dim = int(rng.choice([2, 3, 4]))
        h = _random_hermitian(rng, dim)
        theta = float(rng.uniform(0.3, 3.0))
        ens, z = canonical(h, theta)
        f = f_vector(ens, h, theta, z)
        dp = iso_rates(ens, h, theta, z, alpha=1.0)
        micro = microcanonical(dim)
        f1_micro = f1_vector(micro, float(dim))
        checked += 1
        if (np.max(np.abs(f)) > 1e-10 or np.max(np.abs(dp)) > 1e-12
                or np.max(np.abs(f1_micro)) > 1e-12):
            fails.append({"dim": dim, "theta": theta,
                          "f_norm": float(np.max(np.abs(f))),
                          "dp_norm": float(np.max(np.abs(dp))),
                          "H": _mat_out(h)})
    return checked, fails


_SUITES = {
    "appendix1": _suite_appendix1,
    "appendix2": _suite_appendix2,
    "klein": _suite_klein,
    "secondlaw": _suite_secondlaw,
    "settings": _suite_settings,
    "equilibrium": _suite_equilibrium,
}


def cmd_check(suite: str, seed: int, cases: int) -> int:
    if suite not in _SUITES:
        print(f"unknown suite {suite!r}; choose from {sorted(_SUITES)}",
              file=_sys.stderr)
        return EXIT_INPUT
    rng = np.random.default_rng(seed)
    checked, fails = _SUITES[suite](rng, cases)
    print(f"{suite}: {checked - len(fails)}/{checked} cases passed "
          f"(seed={seed})")
    if fails:
        print("first counterexample:")
        print(json.dumps(fails[0], indent=2, default=str))
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- report

def read_trajectory_csv(path: Path) -> List[ThermoRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ScenarioError("empty trajectory file")
        if tuple(header) != THERMO_COLUMNS:
            raise ScenarioError("trajectory header does not match the "
                                "expected column order")
        out = []
        for row in reader:
            vals = [float(v) for v in row]
            out.append(ThermoRecord(**dict(zip(THERMO_COLUMNS, vals))))
    return out


def cmd_report(csv_path: str) -> int:
    path = Path(csv_path)
    try:
        records = read_trajectory_csv(path)
    except (ScenarioError, OSError, ValueError) as exc:
        print(f"report error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    if not records:
        print("report error: no data rows", file=_sys.stderr)
        return EXIT_INPUT

    chain_violations = 0
    classes = {"weak": 0, "strong": 0, "none": 0}
    reversible_rows = 0
    for rec in records:
        if rec.Xi_ex_gap < -1e-10:
            chain_violations += 1
        classes[classify_adiabatic(rec)] += 1
        if (abs(rec.Sigma) < 1e-12
                and (abs(rec.S_dot) > 1e-12 or abs(rec.Xi) > 1e-12)):
            reversible_rows += 1
    s_def = [rec.S_def for rec in records]
    report = {
        "rows": len(records),
        "chain_violations": chain_violations,
        "adiabatic_classes": classes,
        "reversible_rows": reversible_rows,
        "sigma_min": min(rec.Sigma for rec in records),
        "deficiency": {"min": min(s_def), "max": max(s_def),
                       "final": s_def[-1]},
    }
    print(f"rows:             {report['rows']}")
    print(f"chain violations: {chain_violations}")
    print(f"adiabatic:        strong={classes['strong']} "
          f"weak={classes['weak']} none={classes['none']}")
    print(f"reversible rows:  {reversible_rows}")
    print(f"min Sigma:        {report['sigma_min']:.3e}")
    print(f"S deficiency:     min={report['deficiency']['min']:.3e} "
          f"max={report['deficiency']['max']:.3e}")
    out = path.with_suffix(".report.json")
    out.write_text(json.dumps(report, indent=2))
    print(f"wrote {out}")
    return EXIT_OK if chain_violations == 0 else EXIT_FAIL


# ---------------------------------------------------------------- main

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qschottky",
        description="Phenomenological quantum-thermodynamics batch runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario file or bundled name")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--no-plots", action="store_true")

    p_check = sub.add_parser("check", help="run a property suite")
    p_check.add_argument("suite", choices=sorted(_SUITES))
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--cases", type=int, default=200)

    p_rep = sub.add_parser("report", help="inequality report over a trajectory CSV")
    p_rep.add_argument("csv")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.scenario, args.out, plots=not args.no_plots)
    if args.command == "check":
        return cmd_check(args.suite, args.seed, args.cases)
    return cmd_report(args.csv)


if __name__ == "__main__":
    _sys.exit(main())
