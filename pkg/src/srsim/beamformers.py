"""Receive beamformer (top generalized eigenvector) and the fractional
transmit beamformer (ratio iteration with one convexification per step)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .numerics import (ConvexQcqpProblem, InfeasibleError,
                       max_generalized_eigvec, solve_convex_qcqp)
from .system import (BeamState, CovarianceBundle, PhaseState, ScenarioConfig,
                     _herm, an_projection, equivalent_channels)


def opt_receive(bundle: CovarianceBundle, sigma_b2: float) -> np.ndarray:
    """SINR-optimal unit receive vector: top generalized eigenvector of the
    (interference + noise, signal) pencil."""
    n_b = bundle.R_AB.shape[0]
    denom = bundle.R_MJ_bar + bundle.R_BR + sigma_b2 * np.eye(n_b)
    vec, _ = max_generalized_eigvec(bundle.R_AB, denom)
    return vec


@dataclass
class TransmitSubproblemState:
    """Data of the fixed-phase transmit problem: maximize v^H T1 v / v^H T2 v
    over the unit ball subject to the residual relay power budget."""

    T1: np.ndarray
    T2: np.ndarray
    B: np.ndarray
    p1_rmax: float
    infeasible_budget: bool


def build_transmit_subproblem(cfg: ScenarioConfig, ch: ChannelSet,
                              phase: PhaseState, v_br: np.ndarray) -> TransmitSubproblemState:
    psi = phase.psi
    abs_psi2 = np.abs(psi) ** 2
    H_A1, H_M1, H_A2 = equivalent_channels(cfg, ch, phase)
    T_AAN, _ = an_projection(ch.H_AI, ch.H_AB_h.conj().T)

    R_MJ_bar = cfg.p_m * _herm(H_M1 @ H_M1.conj().T)
    R_BR = cfg.sigma_r2 * ch.g_ib * _herm(
        (ch.H_IB_h * abs_psi2[None, :]) @ ch.H_IB_h.conj().T)
    kappa = float(np.real(v_br.conj() @ (R_MJ_bar + R_BR) @ v_br)) + cfg.sigma_b2

    amt = ch.H_AM_h @ T_AAN
    R_AJ = (1.0 - cfg.beta) * cfg.p_a * ch.g_am * _herm(amt @ amt.conj().T)
    R_MR = cfg.sigma_r2 * ch.g_im * _herm(
        (ch.H_IM_h * abs_psi2[None, :]) @ ch.H_IM_h.conj().T)
    A = R_AJ + R_MR + cfg.sigma_m2 * np.eye(cfg.n_m)

    a1_br = H_A1.conj().T @ v_br
    T1 = cfg.beta * cfg.p_a / kappa * np.outer(a1_br, a1_br.conj()) + np.eye(cfg.n_a)
    T2 = _herm(cfg.beta * cfg.p_a * H_A2.conj().T @ np.linalg.solve(A, H_A2)
               + np.eye(cfg.n_a))
    B = ch.g_ai * cfg.beta * cfg.p_a * _herm(
        (ch.H_AI * abs_psi2[None, :]) @ ch.H_AI.conj().T)
    relay_noise_diag = (ch.g_im * cfg.p_m * np.sum(np.abs(ch.H_MI_h) ** 2, axis=1)
                        + cfg.sigma_r2)
    p1 = cfg.p_rmax - float(np.sum(abs_psi2 * relay_noise_diag))

    return TransmitSubproblemState(T1=_herm(T1), T2=T2, B=B, p1_rmax=p1,
                                   infeasible_budget=p1 <= 0)


def _ratio(state: TransmitSubproblemState, v: np.ndarray) -> float:
    num = float(np.real(v.conj() @ state.T1 @ v))
    den = float(np.real(v.conj() @ state.T2 @ v))
    return num / den


def opt_transmit(state: TransmitSubproblemState, v_init: np.ndarray,
                 eps: float, solver_tol: float = 1e-8,
                 max_iter: int = 200) -> tuple[np.ndarray, dict]:
    """Ratio-maximizing transmit vector.

    Each iteration fixes the ratio parameter at the previous iterate, solves
    the convexified subproblem anchored there, and stops once the parametric
    residual drops below ``eps``. The ratio sequence is non-decreasing.
    """
    if state.infeasible_budget:
        raise InfeasibleError(
            f"residual relay power budget is {state.p1_rmax:.3e} <= 0")
    v = np.asarray(v_init, dtype=complex)
    v = v / np.linalg.norm(v)

    # the power coupling is vacuous when no direction can exceed the budget
    b_top = float(np.linalg.eigvalsh(state.B)[-1])
    use_power = b_top > state.p1_rmax

    iters = 0
    converged = False
    for _ in range(max_iter):
        eta = _ratio(state, v)
        quad = None
        if use_power:
            quad = (state.B, state.p1_rmax * v,
                    -state.p1_rmax * float(np.vdot(v, v).real))
        prob = ConvexQcqpProblem(T2=eta * state.T2, t_lin=state.T1 @ v,
                                 quad_vs_lin=quad)
        v_new, _ = solve_convex_qcqp(prob, tol=solver_tol, v0=v)
        iters += 1
        ratio_new = _ratio(state, v_new)
        if ratio_new < eta:
            # convexified step failed to improve the exact ratio; keep v
            converged = True
            break
        v = v_new
        resid = float(np.real(v.conj() @ state.T1 @ v)
                      - eta * np.real(v.conj() @ state.T2 @ v))
        if resid < eps or ratio_new - eta <= 1e-13 * max(1.0, abs(eta)):
            # below the inner solver's resolution no further progress exists
            converged = True
            break
    if not converged:
        warnings.warn("transmit beamformer hit its iteration cap", RuntimeWarning)
    v = v / np.linalg.norm(v)
    return v, {"iterations": iters, "ratio": _ratio(state, v),
               "converged": converged}


def init_transmit(cfg: ScenarioConfig, ch: ChannelSet, phase: PhaseState) -> np.ndarray:
    """Matched-filter start: principal right singular direction of the
    effective Alice-to-Bob channel."""
    H_A1, _, _ = equivalent_channels(cfg, ch, phase)
    _, _, vh = np.linalg.svd(H_A1)
    v = vh[0].conj()
    i = int(np.argmax(np.abs(v)))
    v = v * (v[i].conjugate() / abs(v[i]))
    return v / np.linalg.norm(v)
