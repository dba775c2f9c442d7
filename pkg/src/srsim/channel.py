"""LOS geometry: steering vectors, rank-one channel matrices and path-loss gains
for the four-node layout (Alice, hybrid IRS, Bob, Mallory)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def steering_vector(theta: float, n: int, spacing: float = 0.5) -> np.ndarray:
    """Normalized ULA steering vector for angle ``theta`` (radians).

    Entry m (1-based) is (1/sqrt(n)) * exp(j*2*pi*p(m)) with phase
    p(m) = -(m - (n+1)/2) * spacing * cos(theta), spacing in wavelengths.
    """
    if n < 1:
        raise ValueError(f"antenna count must be >= 1, got {n}")
    if spacing <= 0:
        raise ValueError(f"antenna spacing must be positive, got {spacing}")
    idx = np.arange(1, n + 1, dtype=float)
    phase = -(idx - (n + 1) / 2.0) * spacing * np.cos(theta)
    return np.exp(2j * np.pi * phase) / np.sqrt(n)


def los_channel(theta_r: float, theta_t: float, n_r: int, n_t: int,
                spacing: float = 0.5) -> np.ndarray:
    """Rank-one LOS channel h(theta_r) h(theta_t)^H of shape (n_r, n_t).

    This is the receive-side matrix: y = H x with x at the transmit array.
    """
    h_r = steering_vector(theta_r, n_r, spacing)
    h_t = steering_vector(theta_t, n_t, spacing)
    return np.outer(h_r, h_t.conj())


def path_loss(distance: float, loss_const: float) -> float:
    """Inverse-square gain loss_const / distance^2 (dimensionless power ratio)."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return loss_const / distance**2


@dataclass(frozen=True)
class Geometry:
    """Node positions in meters, antenna spacing ratio d/lambda, and the local
    array orientation (unit 2-D vector) of each node.

    Default orientations: the legitimate terminals' arrays lie along y (facing
    the scene broadside); the attacker's array is tilted so that its look
    directions toward the transmitter and toward the reflecting surface share
    one cosine, the orientation under which the surface's active elements
    mask the eavesdropped signal most directly.
    """

    alice: tuple[float, float] = (0.0, 0.0)
    irs: tuple[float, float] = (280.0, 20.0)
    bob: tuple[float, float] = (300.0, 0.0)
    mallory: tuple[float, float] = (150.0, -20.0)
    spacing: float = 0.5
    alice_orient: tuple[float, float] = (0.0, 1.0)
    irs_orient: tuple[float, float] = (0.0, 1.0)
    bob_orient: tuple[float, float] = (0.0, 1.0)
    mallory_orient: tuple[float, float] = (0.082878, -0.99656)

    def pos(self, node: str) -> np.ndarray:
        return np.asarray(getattr(self, node), dtype=float)

    def orient(self, node: str) -> np.ndarray:
        u = np.asarray(getattr(self, node + "_orient"), dtype=float)
        nrm = np.hypot(u[0], u[1])
        if nrm == 0:
            raise ValueError(f"orientation of {node} must be a nonzero vector")
        return u / nrm

    def distance(self, a: str, b: str) -> float:
        d = float(np.hypot(*(self.pos(b) - self.pos(a))))
        if d <= 0:
            raise ValueError(f"nodes {a} and {b} are coincident")
        return d

    def link_angle(self, at: str, toward: str) -> float:
        """Angle in [0, pi] between ``at``'s array axis and the line toward
        the other endpoint."""
        d = self.pos(toward) - self.pos(at)
        dist = np.hypot(d[0], d[1])
        if dist <= 0:
            raise ValueError(f"nodes {at} and {toward} are coincident")
        d = d / dist
        c = float(np.clip(d @ self.orient(at), -1.0, 1.0))
        return float(np.arccos(c))


@dataclass
class ChannelSet:
    """All link matrices and gains.

    Matrix attributes ending in ``_h`` are receive-side (conjugate-transposed)
    forms; ``H_AI`` is stored transmit-side so that ``H_AI.conj().T`` maps
    Alice's array to the IRS elements.
    """

    H_AI: np.ndarray      # (N_A, M)
    H_IB_h: np.ndarray    # (N_B, M)
    H_AB_h: np.ndarray    # (N_B, N_A)
    H_MI_h: np.ndarray    # (M, N_M)
    H_MB_h: np.ndarray    # (N_B, N_M)
    H_IM_h: np.ndarray    # (N_M, M)
    H_AM_h: np.ndarray    # (N_M, N_A)
    h_im_r: np.ndarray    # (N_M,) receive steering at Mallory for the IRS link
    h_im_t: np.ndarray    # (M,)   transmit steering at the IRS toward Mallory
    h_mi_r: np.ndarray    # (M,)   receive steering at the IRS from Mallory
    g_ai: float
    g_ib: float
    g_ab: float
    g_mi: float
    g_mb: float
    g_im: float
    g_am: float
    g_aib: float = field(init=False)
    g_mib: float = field(init=False)
    g_aim: float = field(init=False)

    def __post_init__(self):
        self.g_aib = self.g_ai * self.g_ib
        self.g_mib = self.g_mi * self.g_ib
        self.g_aim = self.g_ai * self.g_im


def build_channels(geom: Geometry, sizes: tuple[int, int, int, int],
                   loss_const: float = 1e-2) -> ChannelSet:
    """Build every LOS channel matrix and path-loss gain from the geometry.

    ``sizes`` is (N_A, N_B, N_M, M). Link angles are measured at each endpoint
    toward the other endpoint, against that node's array orientation.
    """
    n_a, n_b, n_m, m = sizes
    sp = geom.spacing

    def ang(at, toward):
        return geom.link_angle(at, toward)

    # receive-side matrices h(theta_r) h(theta_t)^H
    h_ai_recv = los_channel(ang("irs", "alice"), ang("alice", "irs"), m, n_a, sp)
    ch = ChannelSet(
        H_AI=h_ai_recv.conj().T,
        H_IB_h=los_channel(ang("bob", "irs"), ang("irs", "bob"), n_b, m, sp),
        H_AB_h=los_channel(ang("bob", "alice"), ang("alice", "bob"), n_b, n_a, sp),
        H_MI_h=los_channel(ang("irs", "mallory"), ang("mallory", "irs"), m, n_m, sp),
        H_MB_h=los_channel(ang("bob", "mallory"), ang("mallory", "bob"), n_b, n_m, sp),
        H_IM_h=los_channel(ang("mallory", "irs"), ang("irs", "mallory"), n_m, m, sp),
        H_AM_h=los_channel(ang("mallory", "alice"), ang("alice", "mallory"), n_m, n_a, sp),
        h_im_r=steering_vector(ang("mallory", "irs"), n_m, sp),
        h_im_t=steering_vector(ang("irs", "mallory"), m, sp),
        h_mi_r=steering_vector(ang("irs", "mallory"), m, sp),
        g_ai=path_loss(geom.distance("alice", "irs"), loss_const),
        g_ib=path_loss(geom.distance("irs", "bob"), loss_const),
        g_ab=path_loss(geom.distance("alice", "bob"), loss_const),
        g_mi=path_loss(geom.distance("mallory", "irs"), loss_const),
        g_mb=path_loss(geom.distance("mallory", "bob"), loss_const),
        g_im=path_loss(geom.distance("irs", "mallory"), loss_const),
        g_am=path_loss(geom.distance("alice", "mallory"), loss_const),
    )
    return ch
