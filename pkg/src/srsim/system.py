"""Single source of truth for the objective: artificial-noise projector,
covariance matrices, worst-case rate bounds, relay power bound, and the
phase-vector reformulation of the same quantities.

Powers are configured in dBm and converted once to linear milliwatt scale;
all formulas are unit-consistent in that scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelSet, Geometry, build_channels
from .numerics import pseudo_inverse

LN2 = float(np.log(2.0))


def dbm_to_mw(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """All physical and algorithmic parameters of one experiment point."""

    p_a_dbm: float = 30.0
    p_m_dbm: float = 20.0
    p_rmax_dbm: float = 20.0
    beta: float = 0.9
    n_a: int = 5
    n_b: int = 5
    n_m: int = 5
    m: int = 40
    k: int = 2
    active_set: tuple[int, ...] | None = None  # 0-based indices, |set| = k
    sigma_b_dbm: float = -40.0
    sigma_m_dbm: float = -40.0
    sigma_r_dbm: float = -40.0
    geometry: Geometry = field(default_factory=Geometry)
    loss_const: float = 1e-2
    epsilon: float = 1e-10
    solver_tol: float = 1e-8
    max_outer: int = 200
    seed: int = 1
    trials: int = 100
    # kept for documentation only: the optimized bounds assume the attacker
    # cancels its own self-interference, so rho never enters any computation
    rho: float = 0.0
    n_j: int = 1

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.k > self.m:
            raise ValueError(f"active element count {self.k} exceeds m={self.m}")
        if self.active_set is None:
            object.__setattr__(self, "active_set", tuple(range(self.k)))
        q = tuple(sorted(self.active_set))
        object.__setattr__(self, "active_set", q)
        if len(q) != self.k or len(set(q)) != self.k:
            raise ValueError(f"active set {q} must hold exactly {self.k} distinct indices")
        if q and (q[0] < 0 or q[-1] >= self.m):
            raise ValueError(f"active set {q} out of range for m={self.m}")
        for name in ("n_a", "n_b", "n_m", "m"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    # linear milliwatt scale
    @property
    def p_a(self) -> float:
        return dbm_to_mw(self.p_a_dbm)

    @property
    def p_m(self) -> float:
        return dbm_to_mw(self.p_m_dbm)

    @property
    def p_rmax(self) -> float:
        return dbm_to_mw(self.p_rmax_dbm)

    @property
    def sigma_b2(self) -> float:
        return dbm_to_mw(self.sigma_b_dbm)

    @property
    def sigma_m2(self) -> float:
        return dbm_to_mw(self.sigma_m_dbm)

    @property
    def sigma_r2(self) -> float:
        return dbm_to_mw(self.sigma_r_dbm)

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return (self.n_a, self.n_b, self.n_m, self.m)

    @property
    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.m, dtype=bool)
        if self.active_set:
            mask[list(self.active_set)] = True
        return mask

    def with_(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    def channels(self) -> ChannelSet:
        return build_channels(self.geometry, self.sizes, self.loss_const)


@dataclass
class PhaseState:
    """Reflecting-surface phase vector split into passive (unit modulus) and
    active (free amplitude) parts over the active index set."""

    theta: np.ndarray
    active_mask: np.ndarray

    @property
    def phi(self) -> np.ndarray:
        return np.where(self.active_mask, 0.0, self.theta)

    @property
    def psi(self) -> np.ndarray:
        return np.where(self.active_mask, self.theta, 0.0)

    @classmethod
    def from_parts(cls, phi, psi, active_mask) -> "PhaseState":
        phi = np.where(active_mask, 0.0, np.asarray(phi, dtype=complex))
        psi = np.where(active_mask, np.asarray(psi, dtype=complex), 0.0)
        return cls(theta=phi + psi, active_mask=np.asarray(active_mask, dtype=bool))

    def validate(self, tol: float = 1e-8, allow_zero: bool = False) -> None:
        if allow_zero and np.abs(self.theta).max(initial=0.0) == 0.0:
            return
        passive = ~self.active_mask
        dev = np.abs(np.abs(self.theta[passive]) - 1.0)
        if dev.size and dev.max() > tol:
            raise ValueError(f"passive entries deviate from unit modulus by {dev.max():.3e}")


@dataclass
class BeamState:
    """Transmit and receive beamformers, both unit norm."""

    v: np.ndarray
    v_br: np.ndarray

    def validate(self, tol: float = 1e-10) -> None:
        for name, vec in (("v", self.v), ("v_br", self.v_br)):
            err = abs(np.linalg.norm(vec) - 1.0)
            if err > tol:
                raise ValueError(f"{name} is not unit norm: |1 - ||{name}||| = {err:.3e}")


def an_projection(H_AI: np.ndarray, H_AB: np.ndarray) -> tuple[np.ndarray, bool]:
    """Null-space projector of the confidential-message channel, rescaled to
    unit Frobenius power tr(T T^H) = 1.

    Returns (T, disabled). ``disabled`` is set when the stacked channel has a
    trivial null space, in which case T is identically zero.
    """
    n_a = H_AI.shape[0]
    h_cm = np.concatenate([H_AI, H_AB], axis=1).conj().T
    gram = h_cm @ h_cm.conj().T
    T = np.eye(n_a) - h_cm.conj().T @ pseudo_inverse(gram) @ h_cm
    T = (T + T.conj().T) / 2
    r = float(np.trace(T @ T.conj().T).real)
    if r < 1e-12:
        return np.zeros((n_a, n_a), dtype=complex), True
    return T / np.sqrt(r), False


def equivalent_channels(cfg: ScenarioConfig, ch: ChannelSet, phase: PhaseState):
    """Effective end-to-end matrices through the reflecting surface."""
    theta_d = phase.theta
    H_AI_h = ch.H_AI.conj().T
    H_A1 = (np.sqrt(ch.g_aib) * (ch.H_IB_h * theta_d[None, :]) @ H_AI_h
            + np.sqrt(ch.g_ab) * ch.H_AB_h)
    H_M1 = (np.sqrt(ch.g_mib) * (ch.H_IB_h * theta_d[None, :]) @ ch.H_MI_h
            + np.sqrt(ch.g_mb) * ch.H_MB_h)
    H_A2 = (np.sqrt(ch.g_aim) * (ch.H_IM_h * theta_d[None, :]) @ H_AI_h
            + np.sqrt(ch.g_am) * ch.H_AM_h)
    return H_A1, H_M1, H_A2


@dataclass
class CovarianceBundle:
    """Covariances and derived quantities for one (config, channel, phase,
    beam) snapshot. All R_* are Hermitian PSD."""

    T_AAN: np.ndarray
    an_disabled: bool
    H_A1: np.ndarray
    H_M1: np.ndarray
    H_A2: np.ndarray
    R_AB: np.ndarray
    R_MJ_bar: np.ndarray
    R_BR: np.ndarray
    R_AM: np.ndarray
    R_AJ: np.ndarray
    R_MR: np.ndarray
    kappa: float
    A: np.ndarray
    B: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    p1_rmax: float
    sigma_b2: float
    sigma_m2: float


def _herm(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def assemble_covariances(cfg: ScenarioConfig, ch: ChannelSet, phase: PhaseState,
                         beam: BeamState) -> CovarianceBundle:
    v, v_br = beam.v, beam.v_br
    psi = phase.psi
    abs_psi2 = np.abs(psi) ** 2

    T_AAN, an_disabled = an_projection(ch.H_AI, ch.H_AB_h.conj().T)
    H_A1, H_M1, H_A2 = equivalent_channels(cfg, ch, phase)

    a1v = H_A1 @ v
    a2v = H_A2 @ v
    R_AB = cfg.beta * cfg.p_a * np.outer(a1v, a1v.conj())
    R_MJ_bar = cfg.p_m * _herm(H_M1 @ H_M1.conj().T)
    R_BR = cfg.sigma_r2 * ch.g_ib * _herm(
        (ch.H_IB_h * abs_psi2[None, :]) @ ch.H_IB_h.conj().T)
    R_AM = cfg.beta * cfg.p_a * np.outer(a2v, a2v.conj())
    amt = ch.H_AM_h @ T_AAN
    R_AJ = (1.0 - cfg.beta) * cfg.p_a * ch.g_am * _herm(amt @ amt.conj().T)
    R_MR = cfg.sigma_r2 * ch.g_im * _herm(
        (ch.H_IM_h * abs_psi2[None, :]) @ ch.H_IM_h.conj().T)

    kappa = float(np.real(v_br.conj() @ (R_MJ_bar + R_BR) @ v_br)) + cfg.sigma_b2
    A = R_AJ + R_MR + cfg.sigma_m2 * np.eye(cfg.n_m)
    a1_br = H_A1.conj().T @ v_br
    T1 = cfg.beta * cfg.p_a / kappa * np.outer(a1_br, a1_br.conj()) + np.eye(cfg.n_a)
    T2 = _herm(cfg.beta * cfg.p_a * H_A2.conj().T @ np.linalg.solve(A, H_A2)
               + np.eye(cfg.n_a))
    B = ch.g_ai * cfg.beta * cfg.p_a * _herm(
        (ch.H_AI * abs_psi2[None, :]) @ ch.H_AI.conj().T)
    relay_noise_diag = (ch.g_im * cfg.p_m * np.sum(np.abs(ch.H_MI_h) ** 2, axis=1)
                        + cfg.sigma_r2)
    p1_rmax = cfg.p_rmax - float(np.sum(abs_psi2 * relay_noise_diag))

    return CovarianceBundle(
        T_AAN=T_AAN, an_disabled=an_disabled,
        H_A1=H_A1, H_M1=H_M1, H_A2=H_A2,
        R_AB=_herm(R_AB), R_MJ_bar=R_MJ_bar, R_BR=R_BR, R_AM=_herm(R_AM),
        R_AJ=R_AJ, R_MR=R_MR, kappa=kappa, A=A, B=B, T1=_herm(T1), T2=T2,
        p1_rmax=p1_rmax, sigma_b2=cfg.sigma_b2, sigma_m2=cfg.sigma_m2)


def rate_bob_bar(bundle: CovarianceBundle, beam: BeamState) -> float:
    """Worst-case rate of the legitimate link, bits/s/Hz."""
    v_br = beam.v_br
    num = float(np.real(v_br.conj() @ bundle.R_AB @ v_br))
    den = (float(np.real(v_br.conj() @ (bundle.R_MJ_bar + bundle.R_BR) @ v_br))
           + bundle.sigma_b2)
    return float(np.log2(1.0 + max(num, 0.0) / den))


def rate_mallory_bar(bundle: CovarianceBundle) -> float:
    """Worst-case rate of the attacker, bits/s/Hz (trace form)."""
    val = float(np.trace(np.linalg.solve(bundle.A, bundle.R_AM)).real)
    return float(np.log2(1.0 + max(val, 0.0)))


def power_bar(cfg: ScenarioConfig, ch: ChannelSet, phase: PhaseState,
              beam: BeamState) -> float:
    """Upper bound on consumed relay power (linear scale, trace form)."""
    av = ch.H_AI.conj().T @ beam.v
    S = (ch.g_ai * cfg.beta * cfg.p_a * np.outer(av, av.conj())
         + ch.g_im * cfg.p_m * ch.H_MI_h @ ch.H_MI_h.conj().T
         + cfg.sigma_r2 * np.eye(cfg.m))
    Psi = np.diag(phase.psi)
    return float(np.trace(Psi @ S @ Psi.conj().T).real)


def secrecy_objective(cfg: ScenarioConfig, ch: ChannelSet, phase: PhaseState,
                      beam: BeamState) -> tuple[float, float]:
    """(rate difference which may be negative, secrecy rate >= 0)."""
    bundle = assemble_covariances(cfg, ch, phase, beam)
    obj = rate_bob_bar(bundle, beam) - rate_mallory_bar(bundle)
    return obj, max(0.0, obj)


@dataclass
class ThetaLinearization:
    """Everything needed to evaluate both rates and the power bound as
    functions of the phase vector alone, for fixed beamformers."""

    t_aib: np.ndarray     # (M,)
    l_ab: complex
    P_mib: np.ndarray     # (N_M, M)
    t_mb: np.ndarray      # (N_M,)
    p_ib: np.ndarray      # (M,) diagonal entries
    P_aim: np.ndarray     # (N_M, M)
    t_am: np.ndarray      # (N_M,)
    p_im: np.ndarray      # (M,) real diagonal
    p_imh: np.ndarray     # (M,) real diagonal
    R_nj: np.ndarray      # (N_M, N_M)
    t_ai: np.ndarray      # (M,)
    t_mi: np.ndarray      # (M,)
    d_diag: np.ndarray    # (M,) real
    d_bar: np.ndarray     # (M,) real, masked to the active set
    h_im_r: np.ndarray    # (N_M,)
    active_mask: np.ndarray
    sigma_b2: float
    sigma_m2: float
    sigma_r2: float
    p_rmax: float

    def psi_of(self, theta: np.ndarray) -> np.ndarray:
        return np.where(self.active_mask, theta, 0.0)

    def bob_parts(self, theta: np.ndarray) -> tuple[float, float]:
        psi = self.psi_of(theta)
        num = float(np.abs(self.t_aib.conj() @ theta + self.l_ab) ** 2)
        jam = self.P_mib @ theta.conj() + self.t_mb
        den = (float(np.sum(np.abs(jam) ** 2))
               + float(np.sum(np.abs(self.p_ib) ** 2 * np.abs(psi) ** 2))
               + self.sigma_b2)
        return num, den

    def rate_bob(self, theta: np.ndarray) -> float:
        num, den = self.bob_parts(theta)
        return float(np.log2(1.0 + num / den))

    def mallory_val(self, theta: np.ndarray) -> float:
        psi = self.psi_of(theta)
        w = self.P_aim @ theta + self.t_am
        amp = float(np.sum(self.p_im * np.abs(psi) ** 2))
        Rden = amp * np.outer(self.h_im_r, self.h_im_r.conj()) + self.R_nj
        return float(np.real(w.conj() @ np.linalg.solve(Rden, w)))

    def rate_mallory(self, theta: np.ndarray) -> float:
        return float(np.log2(1.0 + self.mallory_val(theta)))

    def power(self, theta: np.ndarray) -> float:
        psi = self.psi_of(theta)
        return float(np.sum(self.d_bar * np.abs(psi) ** 2))

    def objective_bits(self, theta: np.ndarray) -> float:
        return self.rate_bob(theta) - self.rate_mallory(theta)

    def objective_nats(self, theta: np.ndarray) -> float:
        return LN2 * self.objective_bits(theta)


def linearize_theta(cfg: ScenarioConfig, ch: ChannelSet,
                    beam: BeamState) -> ThetaLinearization:
    """Extract the phase vector out of every rate and power expression."""
    v, v_br = beam.v, beam.v_br
    bp = cfg.beta * cfg.p_a
    a_vec = ch.H_AI.conj().T @ v          # (M,)
    b_vec = ch.H_IB_h.conj().T @ v_br     # (M,)

    T_AAN, _ = an_projection(ch.H_AI, ch.H_AB_h.conj().T)
    amt = ch.H_AM_h @ T_AAN
    R_AJ = (1.0 - cfg.beta) * cfg.p_a * ch.g_am * _herm(amt @ amt.conj().T)

    t_ai = np.sqrt(bp * ch.g_ai) * a_vec
    t_mi = np.sqrt(ch.g_im * cfg.p_m) * ch.h_mi_r
    d_diag = np.abs(t_ai) ** 2 + np.abs(t_mi) ** 2 + cfg.sigma_r2

    return ThetaLinearization(
        t_aib=np.sqrt(bp * ch.g_aib) * a_vec.conj() * b_vec,
        l_ab=complex(np.sqrt(bp * ch.g_ab) * (v_br.conj() @ ch.H_AB_h @ v)),
        P_mib=np.sqrt(ch.g_mib * cfg.p_m) * ch.H_MI_h.conj().T * b_vec[None, :],
        t_mb=np.sqrt(ch.g_mb * cfg.p_m) * ch.H_MB_h.conj().T @ v_br,
        p_ib=np.sqrt(cfg.sigma_r2 * ch.g_ib) * b_vec,
        P_aim=np.sqrt(bp * ch.g_aim) * ch.H_IM_h * a_vec[None, :],
        t_am=np.sqrt(bp * ch.g_am) * ch.H_AM_h @ v,
        p_im=cfg.sigma_r2 * ch.g_im * np.abs(ch.h_im_t) ** 2,
        p_imh=float(np.sum(np.abs(ch.h_im_r) ** 2))
              * cfg.sigma_r2 * ch.g_im * np.abs(ch.h_im_t) ** 2,
        R_nj=R_AJ + cfg.sigma_m2 * np.eye(cfg.n_m),
        t_ai=t_ai, t_mi=t_mi, d_diag=d_diag,
        d_bar=np.where(cfg.active_mask, d_diag, 0.0),
        h_im_r=ch.h_im_r, active_mask=cfg.active_mask,
        sigma_b2=cfg.sigma_b2, sigma_m2=cfg.sigma_m2, sigma_r2=cfg.sigma_r2,
        p_rmax=cfg.p_rmax)
