"""The three small convex subproblem solvers and the rank-one rounding step.

Every solver is deterministic given its inputs; randomized rounding takes an
explicit seed. Outputs are re-checkable with the audit_* helpers, which look
only at the returned iterates, never at solver state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._barrier import (LogDetBarrier, QuadObjective, QuadSlackBarrier,
                       cplx_to_real, herm_quad_embed, real_to_cplx,
                       solve_barrier)
from .errors import DomainError, InfeasibleError
from .linalg import check_hermitian

DEFAULT_TOL = 1e-8


# ---------------------------------------------------------------------------
# unit-diagonal SDP with a log-trace objective


@dataclass
class DiagSdpLogProblem:
    """maximize ln tr(C_log W) - sum_i w_i tr(C_i W)
    over Hermitian W >= 0 with W(i,i) = 1."""

    C_log: np.ndarray
    C_lin: list  # [(Hermitian matrix, real weight), ...]
    n: int = 0

    def __post_init__(self):
        self.C_log = check_hermitian(self.C_log, name="C_log")
        self.C_lin = [(check_hermitian(c, name="linear term"), float(w))
                      for c, w in self.C_lin]
        self.n = self.C_log.shape[0]

    def linear_part(self) -> np.ndarray:
        S = np.zeros_like(self.C_log)
        for c, w in self.C_lin:
            S = S + w * c
        return S

    def objective(self, W) -> float:
        t = float(np.trace(self.C_log @ W).real)
        if t <= 0:
            raise DomainError(f"tr(C_log W) = {t:.3e} is not positive")
        return float(np.log(t) - np.trace(self.linear_part() @ W).real)


def solve_diag_sdp_log(p: DiagSdpLogProblem, tol: float = DEFAULT_TOL,
                       max_iter: int = 500):
    """Returns (W, obj) with W PSD and exactly unit-diagonal."""
    W, obj, _ = _backend.elliptope_logsdp(p.C_log, p.linear_part(),
                                          tol=tol, max_iter=max_iter)
    return W, obj


def audit_diag_sdp(p: DiagSdpLogProblem, W, tol) -> dict:
    evmin = float(np.linalg.eigvalsh((W + W.conj().T) / 2)[0])
    return {
        "psd": evmin >= -tol,
        "unit_diag": float(np.abs(np.diag(W) - 1.0).max()) <= tol,
        "min_eig": evmin,
    }


# ---------------------------------------------------------------------------
# LMI-constrained quadratic program with a slack variable


@dataclass
class LmiQpProblem:
    """minimize psi^H Q psi - 2 Re(q^H psi) + c_gamma * gamma
    s.t. lmi(psi, gamma) >= 0  and  psi^H diag(d_bar) psi <= p_max.

    The LMI pencil is affine in (Re psi, Im psi, gamma): lmi_const plus
    lmi_re[k] per Re psi_k, lmi_im[k] per Im psi_k, lmi_gamma per gamma.
    """

    Q: np.ndarray
    q: np.ndarray
    c_gamma: float
    lmi_const: np.ndarray
    lmi_re: np.ndarray     # (K, m, m)
    lmi_im: np.ndarray     # (K, m, m)
    lmi_gamma: np.ndarray  # (m, m)
    d_bar: np.ndarray      # (K,) real nonnegative
    p_max: float
    k: int = field(init=False)

    def __post_init__(self):
        self.Q = check_hermitian(self.Q, name="quadratic cost")
        self.k = self.Q.shape[0]

    def lmi(self, psi, gamma) -> np.ndarray:
        E = self.lmi_const + gamma * self.lmi_gamma
        E = E + np.tensordot(np.asarray(psi).real, self.lmi_re, axes=(0, 0))
        E = E + np.tensordot(np.asarray(psi).imag, self.lmi_im, axes=(0, 0))
        return E

    def objective(self, psi, gamma) -> float:
        return float((psi.conj() @ self.Q @ psi).real
                     - 2.0 * (self.q.conj() @ psi).real
                     + self.c_gamma * gamma)


def _lmi_qp_feasible_start(p: LmiQpProblem, x0):
    """Strictly feasible (psi, gamma); shrinks the hint, then falls back to
    psi = 0 with gamma grown geometrically."""
    def ok(psi, gamma):
        power = float((psi.conj() @ (p.d_bar * psi)).real)
        if power >= p.p_max:
            return False
        try:
            np.linalg.cholesky(p.lmi(psi, gamma))
            return True
        except np.linalg.LinAlgError:
            return False

    candidates = []
    if x0 is not None:
        psi0, gamma0 = x0
        for shrink in (1.0, 1.0 - 1e-6, 0.9, 0.5):
            candidates.append((psi0 * shrink, abs(gamma0) * (1 + 1e-6) + 1e-12))
    zero = np.zeros(p.k, dtype=complex)
    gamma_try = 1.0
    for _ in range(60):
        candidates.append((zero, gamma_try))
        gamma_try *= 10.0
    for psi0, gamma0 in candidates:
        for bump in range(30):
            g = gamma0 * (1 + bump) + 1e-12 * (1 + bump)
            if ok(psi0, g):
                return psi0, g
    raise InfeasibleError("no strictly feasible point found for the LMI program")


def solve_lmi_qp(p: LmiQpProblem, tol: float = DEFAULT_TOL, x0=None,
                 max_iter: int = 500, t0=None, return_info=False):
    """Returns (psi, gamma, obj). Raises InfeasibleError for p_max < 0.

    The gap/KKT tolerance is relative to the objective scale, so problems
    with tiny coefficients are solved to the same relative accuracy. ``t0``
    warm-starts the interior path when x0 comes from a previous solve.
    """
    if p.p_max < 0:
        raise InfeasibleError(f"power budget is negative: {p.p_max:.3e}")
    psi0, gamma0 = _lmi_qp_feasible_start(p, x0)

    k = p.k
    H = np.zeros((2 * k + 1, 2 * k + 1))
    H[:2 * k, :2 * k] = herm_quad_embed(p.Q)
    g = np.concatenate([-2.0 * p.q.real, -2.0 * p.q.imag, [p.c_gamma]])
    # objective scale at the typical iterate magnitude
    x_typ = max(np.linalg.norm(psi0), np.sqrt(max(p.p_max, 0.0) /
                max(float(np.min(p.d_bar)) if k else 1.0, 1e-300)), 1.0)
    scale = max(float(np.abs(H).max()) * x_typ**2,
                float(np.abs(g).max()) * x_typ, 1e-300)
    obj = QuadObjective(H=H / scale, g=g / scale)

    Es = np.concatenate([p.lmi_re, p.lmi_im, p.lmi_gamma[None]], axis=0)
    lmi_bar = LogDetBarrier(p.lmi_const, Es)
    M = np.diag(np.concatenate([p.d_bar, p.d_bar, [0.0]]))
    power_bar = QuadSlackBarrier(M, np.zeros(2 * k + 1), p.p_max)

    x0r = np.concatenate([psi0.real, psi0.imag, [gamma0]])
    x, info = solve_barrier(obj, [lmi_bar, power_bar], x0r, tol=tol,
                            max_iter=max_iter, t0=t0)
    psi = real_to_cplx(x[:2 * k])
    gamma = float(x[2 * k])
    if return_info:
        return psi, gamma, p.objective(psi, gamma), info
    return psi, gamma, p.objective(psi, gamma)


def audit_lmi_qp(p: LmiQpProblem, psi, gamma, tol) -> dict:
    E = p.lmi(psi, gamma)
    evmin = float(np.linalg.eigvalsh((E + E.conj().T) / 2)[0])
    scale = max(float(np.abs(E).max()), 1.0)
    power = float((psi.conj() @ (p.d_bar * psi)).real)
    return {
        "lmi_psd": evmin >= -tol * scale,
        "power_ok": power <= p.p_max + tol * max(1.0, abs(p.p_max)),
        "min_eig": evmin,
        "power": power,
    }


# ---------------------------------------------------------------------------
# convex QCQP for the transmit direction


@dataclass
class ConvexQcqpProblem:
    """maximize 2 Re(t_lin^H v) - v^H T2 v over the unit ball ||v|| <= radius,
    optionally with v^H B v <= 2 Re(w^H v) + d."""

    T2: np.ndarray
    t_lin: np.ndarray
    radius: float = 1.0
    quad_vs_lin: tuple | None = None  # (B, w, d)

    def __post_init__(self):
        self.T2 = check_hermitian(self.T2, name="quadratic cost")

    def objective(self, v) -> float:
        return float(2.0 * (self.t_lin.conj() @ v).real
                     - (v.conj() @ self.T2 @ v).real)

    def constraint_slacks(self, v) -> dict:
        out = {"ball": self.radius**2 - float(np.vdot(v, v).real)}
        if self.quad_vs_lin is not None:
            B, w, d = self.quad_vs_lin
            out["quad_vs_lin"] = float(
                d + 2.0 * (w.conj() @ v).real - (v.conj() @ B @ v).real)
        return out


def _solve_ball_quadratic(T2, t_lin, radius, tol):
    """Exact maximizer of 2 Re(t^H v) - v^H T2 v over ||v|| <= radius via the
    secular equation: v = (T2 + lam I)^{-1} t with lam >= 0 picked so the norm
    constraint is complementary."""
    w, U = np.linalg.eigh((T2 + T2.conj().T) / 2)
    t_hat = U.conj().T @ t_lin

    def norm2(lam):
        return float(np.sum(np.abs(t_hat) ** 2 / (w + lam) ** 2))

    if w[0] > 0 and norm2(0.0) <= radius**2:
        lam = 0.0
    else:
        lo = max(0.0, -w[0]) + 1e-300
        hi = max(lo, 1.0)
        while norm2(hi) > radius**2:
            hi *= 2.0
        for _ in range(200):
            mid = (lo + hi) / 2.0
            if norm2(mid) > radius**2:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        lam = hi
    v = U @ (t_hat / (w + lam))
    return v


def solve_convex_qcqp(p: ConvexQcqpProblem, tol: float = DEFAULT_TOL,
                      v0=None, max_iter: int = 500):
    """Returns (v, obj). Raises InfeasibleError when no strictly interior
    candidate is found."""
    n = p.t_lin.shape[0]
    if p.quad_vs_lin is None:
        v = _solve_ball_quadratic(p.T2, p.t_lin, p.radius, tol)
        return v, p.objective(v)
    H = herm_quad_embed(p.T2)
    g = np.concatenate([-2.0 * p.t_lin.real, -2.0 * p.t_lin.imag])
    scale = max(float(np.abs(H).max()), float(np.abs(g).max()), 1e-300)
    obj = QuadObjective(H=H / scale, g=g / scale)
    barriers = [QuadSlackBarrier(np.eye(2 * n), np.zeros(2 * n), p.radius**2)]
    if p.quad_vs_lin is not None:
        B, w, d = p.quad_vs_lin
        B = check_hermitian(B, name="power-coupling matrix")
        barriers.append(QuadSlackBarrier(
            herm_quad_embed(B), np.concatenate([w.real, w.imag]), float(d)))

    candidates = []
    if v0 is not None:
        v0 = np.asarray(v0, dtype=complex)
        candidates.append(0.999 * v0)
        if p.quad_vs_lin is not None:
            B, w, d = p.quad_vs_lin
            evw, evv = np.linalg.eigh((B + B.conj().T) / 2)
            u = evv[:, -1]
            for t in (0.5, 1.0):
                cand = v0 - t * (u.conj() @ v0) * u
                candidates.append(0.999 * cand)
    candidates.append(np.zeros(n, dtype=complex))

    x0 = None
    for cand in candidates:
        xr = cplx_to_real(cand)
        if all(b.feasible(xr) for b in barriers):
            x0 = xr
            break
    if x0 is None:
        raise InfeasibleError("no strictly feasible start for the QCQP")

    x, info = solve_barrier(obj, barriers, x0, tol=tol, max_iter=max_iter)
    v = real_to_cplx(x)
    return v, p.objective(v)


def audit_qcqp(p: ConvexQcqpProblem, v, tol) -> dict:
    slacks = p.constraint_slacks(v)
    return {name: s >= -tol * max(1.0, p.radius**2) for name, s in slacks.items()}


# ---------------------------------------------------------------------------
# Gaussian randomization rounding


def gaussian_randomize(W, trials: int, score, rng_seed: int) -> np.ndarray:
    """Best unit-modulus vector from Gaussian samples shaped by the lifted W.

    Samples z ~ CN(0, W) are de-homogenized by their last coordinate and
    projected entrywise onto the unit circle; ``score`` ranks the candidates.
    Deterministic for a fixed seed.
    """
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    W = np.asarray(W, dtype=complex)
    n = W.shape[0]
    w, v = np.linalg.eigh((W + W.conj().T) / 2)
    factor = v * np.sqrt(np.clip(w, 0.0, None))
    rng = np.random.default_rng(rng_seed)
    z = (rng.standard_normal((n, trials)) + 1j * rng.standard_normal((n, trials)))
    z = factor @ (z / np.sqrt(2.0))
    anchor = z[n - 1, :]
    safe = np.abs(anchor) > 1e-300
    x = np.where(safe[None, :], z[:n - 1, :] * np.conj(anchor)[None, :], z[:n - 1, :])
    candidates = np.exp(1j * np.angle(x))
    best_phi = None
    best_score = -np.inf
    for t in range(trials):
        phi = candidates[:, t]
        s = score(phi)
        if s > best_score:
            best_score = s
            best_phi = phi
    return best_phi
