"""Outer alternating loops, benchmark schemes, sweeps and the feasibility
auditor."""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .beamformers import (build_transmit_subproblem, init_transmit,
                          opt_receive, opt_transmit)
from .psm import jop_step, sop_active_step, sop_passive_step
from .system import (BeamState, PhaseState, ScenarioConfig,
                     assemble_covariances, dbm_to_mw, linearize_theta,
                     power_bar, rate_bob_bar, rate_mallory_bar)

SCHEMES = ("sop", "jop", "passive", "passive_boost", "random", "none")


@dataclass
class RunReport:
    scheme: str
    seed: int
    trace: list[float] = field(default_factory=list)
    final_sr: float = 0.0
    outer_iters: int = 0
    subsolver_iters: dict = field(default_factory=dict)
    wall_ms: float = 0.0
    feasible: bool = True
    audit: dict = field(default_factory=dict)
    converged: bool = True
    failure: str | None = None
    phase: PhaseState | None = None
    beam: BeamState | None = None
    config: ScenarioConfig | None = None


def audit_state(cfg: ScenarioConfig, scheme: str, phase: PhaseState,
                beam: BeamState, tol: float = 1e-8) -> dict:
    """Re-checks a final state from its raw vectors alone: unit modulus of
    passive phases, active support, unit-norm beamformers and the power cap."""
    ch = cfg.channels()
    checks = {}
    mask = phase.active_mask
    passive = ~mask
    if scheme == "none":
        checks["phase_zero"] = bool(np.abs(phase.theta).max(initial=0.0) == 0.0)
    else:
        dev = np.abs(np.abs(phase.theta[passive]) - 1.0)
        checks["unit_modulus"] = bool(dev.size == 0 or dev.max() <= tol)
    off = np.abs(phase.psi[passive])
    checks["active_support"] = bool(off.size == 0 or off.max(initial=0.0) == 0.0)
    checks["v_unit"] = bool(abs(np.linalg.norm(beam.v) - 1.0) <= tol)
    checks["v_br_unit"] = bool(abs(np.linalg.norm(beam.v_br) - 1.0) <= tol)
    checks["power"] = bool(power_bar(cfg, ch, phase, beam) <= cfg.p_rmax + tol)
    checks["ok"] = all(checks.values())
    return checks


def _objective_bits(cfg, ch, phase, beam) -> float:
    bundle = assemble_covariances(cfg, ch, phase, beam)
    return rate_bob_bar(bundle, beam) - rate_mallory_bar(bundle)


def _init_state(cfg: ScenarioConfig, ch, rng) -> tuple[PhaseState, BeamState]:
    """Random feasible start: uniform passive phases; active entries at a
    common amplitude using 81% of the power budget."""
    mask = cfg.active_mask
    phi = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cfg.m))
    psi_dir = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cfg.m))
    phase_tmp = PhaseState.from_parts(phi, psi_dir, mask)
    v0 = init_transmit(cfg, ch, phase_tmp)
    beam = BeamState(v=v0, v_br=np.eye(cfg.n_b, dtype=complex)[:, 0])
    if cfg.k > 0:
        lin = linearize_theta(cfg, ch, beam)
        quad = float(np.sum(lin.d_bar * np.abs(phase_tmp.psi) ** 2))
        amp = np.sqrt(0.81 * cfg.p_rmax / quad) if quad > 0 else 0.0
        phase = PhaseState.from_parts(phi, amp * psi_dir, mask)
    else:
        phase = PhaseState.from_parts(phi, np.zeros(cfg.m), mask)
    bundle = assemble_covariances(cfg, ch, phase, beam)
    beam = BeamState(v=v0, v_br=opt_receive(bundle, cfg.sigma_b2))
    return phase, beam


def _shrink_active(cfg, ch, phase, beam) -> PhaseState:
    """Uniformly shrink the active amplitudes until the fixed part of the
    power bound leaves 5% headroom."""
    lin = linearize_theta(cfg, ch, beam)
    quad = float(np.sum(lin.d_bar * np.abs(phase.psi) ** 2))
    if quad <= 0.95 * cfg.p_rmax:
        return phase
    s = np.sqrt(0.95 * cfg.p_rmax / quad)
    return PhaseState.from_parts(phase.phi, s * phase.psi, phase.active_mask)


def _alternating_run(cfg: ScenarioConfig, scheme: str, seed: int,
                     phase_step) -> RunReport:
    """Shared outer loop: receive beam, transmit beam, then the scheme's
    phase update; terminates on the objective increment threshold."""
    t0 = time.perf_counter()
    ch = cfg.channels()
    rng = np.random.default_rng(seed)
    report = RunReport(scheme=scheme, seed=seed, config=cfg)
    sub_iters = {"transmit": 0, "phase": 0}

    phase, beam = _init_state(cfg, ch, rng)
    obj = _objective_bits(cfg, ch, phase, beam)
    report.trace.append(obj)
    converged = False
    try:
        for outer in range(1, cfg.max_outer + 1):
            bundle = assemble_covariances(cfg, ch, phase, beam)
            beam = BeamState(v=beam.v, v_br=opt_receive(bundle, cfg.sigma_b2))

            state = build_transmit_subproblem(cfg, ch, phase, beam.v_br)
            if state.infeasible_budget:
                phase = _shrink_active(cfg, ch, phase, beam)
                state = build_transmit_subproblem(cfg, ch, phase, beam.v_br)
            v, tinfo = opt_transmit(state, beam.v, cfg.epsilon, cfg.solver_tol)
            beam = BeamState(v=v, v_br=beam.v_br)
            sub_iters["transmit"] += tinfo["iterations"]

            if phase_step is not None:
                phase, pinfo = phase_step(cfg, ch, phase, beam, rng)
                sub_iters["phase"] += pinfo.get("iterations", 0)

            obj_new = _objective_bits(cfg, ch, phase, beam)
            report.trace.append(obj_new)
            report.outer_iters = outer
            if obj_new - obj < cfg.epsilon:
                converged = True
                break
            obj = obj_new
    except Exception as exc:  # record and keep the last feasible state
        report.failure = f"{type(exc).__name__}: {exc}"
        report.feasible = False

    if not converged and report.failure is None:
        warnings.warn(f"{scheme} run hit the outer iteration cap", RuntimeWarning)
    report.converged = converged
    report.final_sr = max(0.0, report.trace[-1])
    report.subsolver_iters = sub_iters
    report.phase = phase
    report.beam = beam
    if report.failure is None:
        report.audit = audit_state(cfg, scheme, phase, beam)
        report.feasible = report.audit["ok"]
    report.wall_ms = (time.perf_counter() - t0) * 1e3
    return report


def _sop_phase_step(cfg, ch, phase, beam, rng):
    lin = linearize_theta(cfg, ch, beam)
    phi, info_p = sop_passive_step(lin, phase.psi, phase.phi, cfg, rng)
    phase = PhaseState.from_parts(phi, phase.psi, phase.active_mask)
    psi, info_a = sop_active_step(lin, phase.phi, phase.psi, cfg)
    phase = PhaseState.from_parts(phi, psi, phase.active_mask)
    return phase, {"iterations": info_p["iterations"] + info_a["iterations"]}


def _jop_phase_step(cfg, ch, phase, beam, rng):
    lin = linearize_theta(cfg, ch, beam)
    theta, info = jop_step(lin, phase.theta, cfg)
    return PhaseState(theta=theta, active_mask=phase.active_mask), {"iterations": 1}


def run_max_sr_sop(cfg: ScenarioConfig, seed: int | None = None) -> RunReport:
    return _alternating_run(cfg, "sop", cfg.seed if seed is None else seed,
                            _sop_phase_step)


def run_max_sr_jop(cfg: ScenarioConfig, seed: int | None = None) -> RunReport:
    return _alternating_run(cfg, "jop", cfg.seed if seed is None else seed,
                            _jop_phase_step)


def run_benchmark(cfg: ScenarioConfig, scheme: str,
                  seed: int | None = None) -> RunReport:
    """Fixed-phase baselines and the passive-only surface variants."""
    seed = cfg.seed if seed is None else seed
    if scheme in ("sop", "jop"):
        return {"sop": run_max_sr_sop, "jop": run_max_sr_jop}[scheme](cfg, seed)
    if scheme == "passive":
        cfg0 = cfg.with_(k=0, active_set=())
        rep = _alternating_run(cfg0, "passive", seed, _sop_phase_step)
        return rep
    if scheme == "passive_boost":
        boosted = 10.0 * np.log10(dbm_to_mw(cfg.p_a_dbm) + dbm_to_mw(cfg.p_rmax_dbm))
        cfg0 = cfg.with_(k=0, active_set=(), p_a_dbm=float(boosted))
        return _alternating_run(cfg0, "passive_boost", seed, _sop_phase_step)
    if scheme in ("none", "random"):
        cfg0 = cfg.with_(k=0, active_set=())
        rng = np.random.default_rng(seed)
        if scheme == "none":
            theta = np.zeros(cfg0.m, dtype=complex)
        else:
            theta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cfg0.m))
        return _alternating_run_fixed(cfg0, scheme, seed, theta)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _alternating_run_fixed(cfg, scheme, seed, theta) -> RunReport:
    """Beamformer-only alternation for a frozen phase vector."""
    t0 = time.perf_counter()
    ch = cfg.channels()
    report = RunReport(scheme=scheme, seed=seed, config=cfg)
    phase = PhaseState(theta=theta, active_mask=cfg.active_mask)
    v0 = init_transmit(cfg, ch, phase)
    beam = BeamState(v=v0, v_br=np.eye(cfg.n_b, dtype=complex)[:, 0])
    bundle = assemble_covariances(cfg, ch, phase, beam)
    beam = BeamState(v=v0, v_br=opt_receive(bundle, cfg.sigma_b2))
    obj = _objective_bits(cfg, ch, phase, beam)
    report.trace.append(obj)
    sub_iters = {"transmit": 0, "phase": 0}
    converged = False
    try:
        for outer in range(1, cfg.max_outer + 1):
            bundle = assemble_covariances(cfg, ch, phase, beam)
            beam = BeamState(v=beam.v, v_br=opt_receive(bundle, cfg.sigma_b2))
            state = build_transmit_subproblem(cfg, ch, phase, beam.v_br)
            v, tinfo = opt_transmit(state, beam.v, cfg.epsilon, cfg.solver_tol)
            beam = BeamState(v=v, v_br=beam.v_br)
            sub_iters["transmit"] += tinfo["iterations"]
            obj_new = _objective_bits(cfg, ch, phase, beam)
            report.trace.append(obj_new)
            report.outer_iters = outer
            if obj_new - obj < cfg.epsilon:
                converged = True
                break
            obj = obj_new
    except Exception as exc:
        report.failure = f"{type(exc).__name__}: {exc}"
        report.feasible = False
    report.converged = converged
    report.final_sr = max(0.0, report.trace[-1])
    report.subsolver_iters = sub_iters
    report.phase = phase
    report.beam = beam
    if report.failure is None:
        report.audit = audit_state(cfg, scheme, phase, beam)
        report.feasible = report.audit["ok"]
    report.wall_ms = (time.perf_counter() - t0) * 1e3
    return report


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepSpec:
    param: str                 # one of M, P_M, P_A, K, P_Rmax
    values: list
    seeds: int = 1
    schemes: tuple = ("sop", "jop")

    PARAMS = ("M", "P_M", "P_A", "K", "P_Rmax")

    def __post_init__(self):
        if self.param not in self.PARAMS:
            raise ValueError(f"unknown sweep parameter {self.param!r}")
        if not self.values:
            raise ValueError("sweep value list is empty")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")


def apply_param(cfg: ScenarioConfig, param: str, value) -> ScenarioConfig:
    if param == "M":
        return cfg.with_(m=int(value))
    if param == "K":
        return cfg.with_(k=int(value), active_set=tuple(range(int(value))))
    if param == "P_M":
        return cfg.with_(p_m_dbm=float(value))
    if param == "P_A":
        return cfg.with_(p_a_dbm=float(value))
    if param == "P_Rmax":
        return cfg.with_(p_rmax_dbm=float(value))
    raise ValueError(f"unknown sweep parameter {param!r}")


def point_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((base_seed, index)).generate_state(1)[0])


def _run_point(args):
    cfg, scheme, seed = args
    return run_benchmark(cfg, scheme, seed)


def run_sweep(spec: SweepSpec, base: ScenarioConfig, workers: int = 1,
              timing: bool = True):
    """One report per (scheme, value, seed), in deterministic order.

    Returns (rows, reports). Set timing=False to zero the wall-time column so
    replayed sweeps serialize byte-identically.
    """
    points = []
    idx = 0
    for scheme in spec.schemes:
        for value in spec.values:
            cfg = apply_param(base, spec.param, value)
            for _ in range(spec.seeds):
                points.append((cfg, scheme, point_seed(base.seed, idx), value))
                idx += 1
    tasks = [(cfg, scheme, seed) for cfg, scheme, seed, _ in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_point, tasks))
    else:
        reports = [_run_point(t) for t in tasks]

    rows = []
    for (cfg, scheme, seed, value), rep in zip(points, reports):
        rows.append({
            "scheme": scheme,
            "param": spec.param,
            "value": float(value),
            "seed": seed,
            "sr": rep.final_sr,
            "iters": rep.outer_iters,
            "wall_ms": rep.wall_ms if timing else 0.0,
            "feasible": int(rep.feasible),
        })
    return rows, reports


CSV_HEADER = "scheme,param,value,seed,sr,iters,wall_ms,feasible"


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r['scheme']},{r['param']},{r['value']:.12e},{r['seed']},"
            f"{r['sr']:.12e},{r['iters']},{r['wall_ms']:.12e},{r['feasible']}")
    return "\n".join(lines) + "\n"
