"""Phase-shift designs for the hybrid surface.

Separate design: the passive part is lifted to a unit-diagonal SDP, bounded
by tangent-plane majorization and rounded by Gaussian randomization; the
active part goes through a slack-variable LMI program. Joint design: a single
surrogate with a closed-form passive update and a dual-searched diagonal QCQP
for the active amplitudes. Every accepted step is safeguarded against the
exact objective, which restores the monotone ascent the alternating loop
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import (DiagSdpLogProblem, InfeasibleError, IterationError,
                       LmiQpProblem, gaussian_randomize, solve_diag_sdp_log,
                       solve_lmi_qp)
from .system import ScenarioConfig, ThetaLinearization

INNER_CAP = 100


def _embed(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.zeros(mask.size, dtype=complex)
    out[mask] = values
    return out


# ---------------------------------------------------------------------------
# separate design, passive part


@dataclass
class PassiveSdrState:
    """Lifted quadratic forms of the fixed-active passive subproblem."""

    L_M: np.ndarray  # jamming-plus-noise form, (M+1, M+1)
    L_A: np.ndarray  # signal form
    L_E: np.ndarray  # leakage form


def _lift_matrices(lin: ThetaLinearization, psi: np.ndarray) -> PassiveSdrState:
    """Fixed-psi lifted quadratic forms over [phi; 1]."""
    pas = ~lin.active_mask
    l_ab_t = complex(lin.t_aib.conj() @ psi + lin.l_ab)
    t_mb_t = lin.P_mib @ psi.conj() + lin.t_mb
    sig_b2_t = float(np.sum(np.abs(lin.p_ib) ** 2 * np.abs(psi) ** 2) + lin.sigma_b2)
    amp = float(np.sum(lin.p_im * np.abs(psi) ** 2))
    R_nj_t = amp * np.outer(lin.h_im_r, lin.h_im_r.conj()) + lin.R_nj
    t_am_t = lin.P_aim @ psi + lin.t_am
    P_mib_t = lin.P_mib * pas[None, :]
    P_aim_t = lin.P_aim * pas[None, :]
    t_aib_t = lin.t_aib * pas

    m = lin.active_mask.size
    L_M = np.zeros((m + 1, m + 1), dtype=complex)
    L_M[:m, :m] = P_mib_t.T @ P_mib_t.conj()
    L_M[:m, m] = P_mib_t.T @ t_mb_t.conj()
    L_M[m, :m] = L_M[:m, m].conj()
    L_M[m, m] = float(np.sum(np.abs(t_mb_t) ** 2)) + sig_b2_t

    L_A = np.zeros((m + 1, m + 1), dtype=complex)
    L_A[:m, :m] = np.outer(t_aib_t, t_aib_t.conj())
    L_A[:m, m] = t_aib_t * l_ab_t
    L_A[m, :m] = L_A[:m, m].conj()
    L_A[m, m] = abs(l_ab_t) ** 2

    X = np.linalg.solve(R_nj_t, P_aim_t)
    xt = np.linalg.solve(R_nj_t, t_am_t)
    L_E = np.zeros((m + 1, m + 1), dtype=complex)
    L_E[:m, :m] = P_aim_t.conj().T @ X
    L_E[:m, m] = P_aim_t.conj().T @ xt
    L_E[m, :m] = L_E[:m, m].conj()
    L_E[m, m] = 1.0 + float(np.real(t_am_t.conj() @ xt))

    def herm(a):
        return (a + a.conj().T) / 2

    return PassiveSdrState(L_M=herm(L_M), L_A=herm(L_A), L_E=herm(L_E))


def sop_passive_step(lin: ThetaLinearization, psi_fixed: np.ndarray,
                     phi_init: np.ndarray, cfg: ScenarioConfig,
                     rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    """Passive phase update via lifting, majorization and randomized rounding.

    Returns a unit-modulus vector on the passive indices (zero on the active
    set) whose exact objective is never below the one of ``phi_init``.
    """
    act = lin.active_mask
    pas = ~act
    psi = np.where(act, psi_fixed, 0.0)
    sdr = _lift_matrices(lin, psi)
    L_M, L_A, L_E = sdr.L_M, sdr.L_A, sdr.L_E

    def score(phi_any: np.ndarray) -> float:
        return lin.objective_nats(np.where(pas, phi_any, 0.0) + psi)

    phi = np.where(pas, phi_init, 0.0)
    g_prev = score(phi)
    iters = 0
    solver_iters = 0
    for _ in range(INNER_CAP):
        iters += 1
        lift = np.concatenate([np.where(act, 1.0 + 0j, phi), [1.0 + 0j]])
        W_anchor = np.outer(lift, lift.conj())
        c_m = float(np.trace(L_M @ W_anchor).real)
        c_e = float(np.trace(L_E @ W_anchor).real)
        prob = DiagSdpLogProblem(
            C_log=(L_M + L_A) / max(c_m, 1e-300),
            C_lin=[(L_M / c_m, 1.0), (L_E / c_e, 1.0)])
        try:
            W, _ = solve_diag_sdp_log(prob, tol=cfg.solver_tol)
        except IterationError as err:
            if err.best is None:
                raise
            W = err.best
        solver_iters += 1
        phi_cand = gaussian_randomize(W, cfg.trials, score,
                                      int(rng.integers(2 ** 62)))
        g_new = score(phi_cand)
        if g_new <= g_prev + cfg.epsilon:
            if g_new > g_prev:
                phi = np.where(pas, phi_cand, 0.0)
            break
        phi = np.where(pas, phi_cand, 0.0)
        g_prev = g_new
    if score(phi) - score(np.where(pas, phi_init, 0.0)) < cfg.epsilon:
        phi = np.where(pas, phi_init, 0.0)
    return phi, {"iterations": iters, "subsolver_calls": solver_iters,
                 "objective_nats": score(phi)}


# ---------------------------------------------------------------------------
# separate design, active part


@dataclass
class ActiveLmiState:
    """Fixed-passive quantities of the active subproblem, reduced to the
    active index set; y-anchor values are strictly positive by construction."""

    l_ab: complex
    t_mb: np.ndarray
    t_am: np.ndarray
    t_aib: np.ndarray
    P_mib: np.ndarray
    P_aim: np.ndarray
    p_ib: np.ndarray
    p_im: np.ndarray
    d_bar: np.ndarray

    def anchors(self, psi_r: np.ndarray, sigma_b2: float) -> tuple[complex, float]:
        x = complex(self.t_aib.conj() @ psi_r + self.l_ab)
        y = (float(np.sum(np.abs(self.P_mib @ psi_r.conj() + self.t_mb) ** 2))
             + float(np.sum(np.abs(self.p_ib) ** 2 * np.abs(psi_r) ** 2))
             + sigma_b2)
        return x, y


def _active_quadratics(lin: ThetaLinearization, phi: np.ndarray) -> ActiveLmiState:
    act = lin.active_mask
    return ActiveLmiState(
        l_ab=complex(lin.t_aib.conj() @ phi + lin.l_ab),
        t_mb=lin.P_mib @ phi.conj() + lin.t_mb,
        t_am=lin.P_aim @ phi + lin.t_am,
        t_aib=lin.t_aib[act], P_mib=lin.P_mib[:, act],
        P_aim=lin.P_aim[:, act], p_ib=lin.p_ib[act],
        p_im=lin.p_im[act].real, d_bar=lin.d_bar[act].real)


def _active_gamma(lin, qd: ActiveLmiState, psi_r: np.ndarray) -> float:
    w = qd.P_aim @ psi_r + qd.t_am
    amp = float(np.sum(qd.p_im * np.abs(psi_r) ** 2))
    Rden = amp * np.outer(lin.h_im_r, lin.h_im_r.conj()) + lin.R_nj
    return float(np.real(w.conj() @ np.linalg.solve(Rden, w)))


def sop_active_step(lin: ThetaLinearization, phi_fixed: np.ndarray,
                    psi_init: np.ndarray, cfg: ScenarioConfig) -> tuple[np.ndarray, dict]:
    """Active amplitude-and-phase update through the slack-variable LMI
    program; keeps the iterate with the best exact objective."""
    act = lin.active_mask
    k = int(np.sum(act))
    if k == 0:
        return np.zeros(act.size, dtype=complex), {"iterations": 0,
                                                   "subsolver_calls": 0}
    phi = np.where(act, 0.0, phi_fixed)
    psi_r = psi_init[act]
    qd = _active_quadratics(lin, phi)

    power0 = float(np.sum(qd.d_bar * np.abs(psi_r) ** 2))
    if power0 > lin.p_rmax * (1 + 1e-10) + 1e-300:
        raise InfeasibleError(
            f"active start violates the power budget: {power0:.6e} > {lin.p_rmax:.6e}")

    def true_obj(psi_red):
        return lin.objective_nats(phi + _embed(psi_red, act))

    def g2(psi_red, gamma):
        x, y = qd.anchors(psi_red, lin.sigma_b2)
        return float(np.log1p(abs(x) ** 2 / y) - np.log1p(gamma))

    h = lin.h_im_r
    hh = np.outer(h, h.conj())
    m_lmi = h.size + 1

    gamma = _active_gamma(lin, qd, psi_r)
    g_prev = g2(psi_r, gamma)
    best_psi, best_val = psi_r.copy(), true_obj(psi_r)
    iters = 0
    subsolver = 0
    t_hint = None
    for _ in range(INNER_CAP):
        iters += 1
        x_t, y_t = qd.anchors(psi_r, lin.sigma_b2)
        c = abs(x_t) ** 2 / (y_t * (y_t + abs(x_t) ** 2))

        Q = c * (qd.P_mib.T @ qd.P_mib.conj()
                 + np.diag(np.abs(qd.p_ib) ** 2)
                 + np.outer(qd.t_aib, qd.t_aib.conj()))
        z = (c * (qd.P_mib.T @ qd.t_mb.conj())
             + c * qd.t_aib * qd.l_ab
             - (x_t / y_t) * qd.t_aib)
        q = -z

        w_anchor = qd.p_im * psi_r
        c0 = float(np.real(psi_r.conj() @ w_anchor))
        E0 = np.zeros((m_lmi, m_lmi), dtype=complex)
        E0[:-1, :-1] = lin.R_nj - c0 * hh
        E0[:-1, -1] = qd.t_am
        E0[-1, :-1] = qd.t_am.conj()
        lmi_re = np.zeros((k, m_lmi, m_lmi), dtype=complex)
        lmi_im = np.zeros((k, m_lmi, m_lmi), dtype=complex)
        for j in range(k):
            col = qd.P_aim[:, j]
            lmi_re[j, :-1, :-1] = 2.0 * w_anchor[j].real * hh
            lmi_re[j, :-1, -1] = col
            lmi_re[j, -1, :-1] = col.conj()
            lmi_im[j, :-1, :-1] = 2.0 * w_anchor[j].imag * hh
            lmi_im[j, :-1, -1] = 1j * col
            lmi_im[j, -1, :-1] = (1j * col).conj()
        lmi_gamma = np.zeros((m_lmi, m_lmi), dtype=complex)
        lmi_gamma[-1, -1] = 1.0

        prob = LmiQpProblem(Q=(Q + Q.conj().T) / 2, q=q,
                            c_gamma=1.0 / (1.0 + gamma),
                            lmi_const=E0, lmi_re=lmi_re, lmi_im=lmi_im,
                            lmi_gamma=lmi_gamma, d_bar=qd.d_bar,
                            p_max=lin.p_rmax)
        gamma_start = _active_gamma(lin, qd, psi_r)
        try:
            psi_new, gamma_new, _, sinfo = solve_lmi_qp(
                prob, tol=cfg.solver_tol,
                x0=(psi_r, gamma_start * (1 + 1e-6) + 1e-18),
                t0=t_hint, return_info=True)
            # successive surrogates start near-optimal: reuse the path depth
            t_hint = sinfo["t"] / 100.0
        except (InfeasibleError, IterationError):
            break
        subsolver += 1
        g_new = g2(psi_new, gamma_new)
        if true_obj(psi_new) > best_val:
            best_psi, best_val = psi_new.copy(), true_obj(psi_new)
        if g_new - g_prev < cfg.epsilon:
            break
        psi_r, gamma, g_prev = psi_new, gamma_new, g_new

    if best_val - true_obj(psi_init[act]) < cfg.epsilon:
        best_psi = psi_init[act]
    return _embed(best_psi, act), {"iterations": iters,
                                   "subsolver_calls": subsolver}


# ---------------------------------------------------------------------------
# joint design


def dual_search(q_x: np.ndarray, Q_x: np.ndarray, D_x: np.ndarray,
                p_rmax: float, tol: float = 1e-10) -> float:
    """Positive multiplier equating the diagonal-QCQP power to its budget.

    The delivered power sum |q_i|^2 D_i / (Q_i + mu D_i)^2 is monotone
    decreasing in mu; the dual function is bracketed by doubling and refined
    by golden-section search.
    """
    aq2 = np.abs(q_x) ** 2

    def power(mu):
        return float(np.sum(aq2 * D_x / (Q_x + mu * D_x) ** 2))

    def g_dual(mu):
        return float(-np.sum(aq2 / (Q_x + mu * D_x)) - mu * p_rmax)

    if power(0.0) <= p_rmax:
        raise ValueError("unconstrained minimizer already meets the budget; "
                         "the multiplier search must not be invoked")
    hi = 1.0
    doublings = 0
    while power(hi) > p_rmax:
        hi *= 2.0
        doublings += 1
        if doublings > 60:
            raise IterationError("multiplier bracket expansion failed after "
                                 "60 doublings", best=hi)

    # light unimodality probe of the dual on the bracket
    probes = np.linspace(0.0, hi, 9)
    vals = np.array([g_dual(t) for t in probes])
    rises = np.diff(vals) > 1e-15 * max(1.0, np.abs(vals).max())
    if np.any(rises[1:] & ~rises[:-1]):
        raise ArithmeticError("dual function is not unimodal on the bracket")

    lo = 0.0
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c_pt = b - invphi * (b - a)
    d_pt = a + invphi * (b - a)
    fc, fd = g_dual(c_pt), g_dual(d_pt)
    while b - a > tol * max(1.0, b):
        if fc >= fd:
            b, d_pt, fd = d_pt, c_pt, fc
            c_pt = b - invphi * (b - a)
            fc = g_dual(c_pt)
        else:
            a, c_pt, fc = c_pt, d_pt, fd
            d_pt = a + invphi * (b - a)
            fd = g_dual(d_pt)
    mu = (a + b) / 2.0
    if power(mu) > p_rmax:
        # monotone polish onto the feasible side
        lo_f, hi_f = mu, hi
        for _ in range(200):
            mid = (lo_f + hi_f) / 2.0
            if power(mid) > p_rmax:
                lo_f = mid
            else:
                hi_f = mid
            if hi_f - lo_f <= tol * max(1.0, hi_f):
                break
        mu = hi_f
    return float(mu)


def jop_step(lin: ThetaLinearization, theta_prev: np.ndarray,
             cfg: ScenarioConfig) -> tuple[np.ndarray, dict]:
    """Joint surrogate optimization of the whole phase vector: iterates the
    closed-form passive update and the semi-closed active update until the
    objective increment drops below the convergence threshold.

    Each accepted iterate is safeguarded against the exact objective.
    """
    theta = theta_prev
    obj = lin.objective_bits(theta)
    best_theta, best_obj = theta, obj
    info = {"iterations": 0, "mu": 0.0, "binding": False,
            "jensen_fallback": False, "kept_previous": False}
    for _ in range(INNER_CAP):
        info["iterations"] += 1
        theta_new, step_info = _jop_iteration(lin, theta, cfg)
        info.update({k_: step_info[k_] for k_ in
                     ("mu", "binding", "jensen_fallback", "kept_previous")})
        obj_new = lin.objective_bits(theta_new)
        theta = theta_new
        if obj_new > best_obj:
            best_theta, best_obj = theta_new, obj_new
        if obj_new - obj < cfg.epsilon:
            break
        obj = obj_new
    # idempotent at convergence: only material improvements move the iterate
    if best_obj - lin.objective_bits(theta_prev) < cfg.epsilon:
        return theta_prev, info
    return best_theta, info


@dataclass
class JopSurrogateState:
    """Anchor-dependent pieces of one joint-design pass. The curvature
    bounds lam1 and Q_x are strictly positive whenever the anchor is valid."""

    a_t: complex
    b_t: float
    c: float
    F_t: np.ndarray
    e: float
    Q1: np.ndarray
    q1: np.ndarray
    lam1: float
    q2: np.ndarray
    q_x: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    Q_x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    D_x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    psi_x: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    mu: float = 0.0


def _jop_surrogate(lin: ThetaLinearization, theta_t: np.ndarray) -> JopSurrogateState:
    """Build the joint-design surrogate anchored at the current iterate."""
    psi_t = np.where(lin.active_mask, theta_t, 0.0)
    a_t = complex(lin.t_aib.conj() @ theta_t + lin.l_ab)
    b_t = (float(np.sum(np.abs(lin.P_mib @ theta_t.conj() + lin.t_mb) ** 2))
           + float(np.sum(np.abs(lin.p_ib) ** 2 * np.abs(psi_t) ** 2))
           + lin.sigma_b2)
    c = abs(a_t) ** 2 / (b_t * (b_t + abs(a_t) ** 2))

    amp = float(np.sum(lin.p_im * np.abs(psi_t) ** 2))
    w_vec = lin.P_aim @ theta_t + lin.t_am
    F_t = (amp * np.outer(lin.h_im_r, lin.h_im_r.conj()) + lin.R_nj
           + np.outer(w_vec, w_vec.conj()))
    Finv_P = np.linalg.solve(F_t, lin.P_aim)
    Finv_h = np.linalg.solve(F_t, lin.h_im_r)
    e = float(np.real(lin.h_im_r.conj() @ Finv_h))

    Q1 = (c * (lin.P_mib.T @ lin.P_mib.conj())
          + c * np.outer(lin.t_aib, lin.t_aib.conj())
          + lin.P_aim.conj().T @ Finv_P)
    Q1 = (Q1 + Q1.conj().T) / 2
    row = (c * (lin.t_mb[None, :] @ lin.P_mib.conj())[0]
           + c * lin.l_ab.conjugate() * lin.t_aib.conj()
           + lin.t_am.conj() @ Finv_P)
    q1 = row.conj()
    lam1 = float(np.linalg.eigvalsh(Q1)[-1])
    if lam1 <= 0:
        raise ArithmeticError(f"surrogate curvature bound is not positive: {lam1:.3e}")
    q2 = (lam1 * theta_t - Q1 @ theta_t) - q1 + (a_t / b_t) * lin.t_aib
    return JopSurrogateState(a_t=a_t, b_t=b_t, c=c, F_t=F_t, e=e,
                             Q1=Q1, q1=q1, lam1=lam1, q2=q2)


def _jop_iteration(lin: ThetaLinearization, theta_prev: np.ndarray,
                   cfg: ScenarioConfig) -> tuple[np.ndarray, dict]:
    """One anchor-rebuild-update pass of the joint design."""
    act = lin.active_mask
    pas = ~act
    k = int(np.sum(act))
    theta_t = theta_prev
    psi_t = np.where(act, theta_t, 0.0)

    sur = _jop_surrogate(lin, theta_t)
    phi_new = np.where(pas, np.exp(1j * np.angle(sur.q2)), 0.0)

    info = {"mu": 0.0, "binding": False, "jensen_fallback": False}
    if k == 0:
        psi_new_r = np.zeros(0, dtype=complex)
    else:
        p_ii = lin.p_imh[act].real
        p_ir2 = k * p_ii / lin.sigma_r2
        psi_tr = psi_t[act]
        sur.q_x = sur.q2[act] + p_ir2 * psi_tr
        w_sq = p_ir2 * np.abs(psi_tr) ** 2
        q2diag = (sur.lam1 + sur.c * np.abs(lin.p_ib[act]) ** 2
                  + sur.e * lin.p_im[act].real)
        sur.Q_x = q2diag + (w_sq / (1.0 + w_sq)) * p_ir2
        sur.D_x = lin.d_bar[act].real
        if np.any(sur.Q_x <= 0):
            raise ArithmeticError("diagonal curvature of the active subproblem "
                                  "is not positive")
        if float(np.sum(np.abs(sur.q_x) ** 2 * sur.D_x / sur.Q_x ** 2)) <= lin.p_rmax:
            psi_new_r = sur.q_x / sur.Q_x
        else:
            sur.mu = dual_search(sur.q_x, sur.Q_x, sur.D_x, lin.p_rmax)
            psi_new_r = sur.q_x / (sur.Q_x + sur.mu * sur.D_x)
            info["mu"] = sur.mu
            info["binding"] = True
        sur.psi_x = psi_new_r

        # runtime guard on the averaging bound used for the log term
        lb = float(np.sum(np.log1p(w_sq)
                          + 2.0 * p_ir2 * np.real(psi_tr.conj() * psi_new_r)
                          - w_sq
                          - (w_sq / (1.0 + w_sq)) * (1.0 + p_ir2 * np.abs(psi_new_r) ** 2)
                          + np.log(lin.sigma_r2 / k)))
        true_log = float(np.log(np.sum(p_ii * np.abs(psi_new_r) ** 2) + lin.sigma_r2))
        if lb > true_log + 1e-9:
            psi_new_r = psi_tr
            info["jensen_fallback"] = True

    theta_new = phi_new + _embed(psi_new_r, act)
    if lin.objective_bits(theta_new) < lin.objective_bits(theta_t) - 1e-9:
        theta_new = theta_t
        info["kept_previous"] = True
    else:
        info["kept_previous"] = False
    return theta_new, info
