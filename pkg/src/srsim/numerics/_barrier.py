"""Damped-Newton barrier method for small dense convex programs.

Problems are posed over a real decision vector: a convex quadratic objective
plus any mix of quadratic-slack constraints and linear matrix inequalities.
Dimensions here are tiny (tens of variables, LMI blocks of a few rows), so
exact Hessians and dense factorizations are used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InfeasibleError, IterationError


@dataclass
class QuadObjective:
    """f(x) = x^T H x + g^T x + c with H symmetric PSD."""

    H: np.ndarray
    g: np.ndarray
    c: float = 0.0

    def value(self, x):
        return float(x @ self.H @ x + self.g @ x + self.c)

    def grad(self, x):
        return 2.0 * (self.H @ x) + self.g

    def hess(self, x):
        return 2.0 * self.H


class QuadSlackBarrier:
    """-ln s(x) for the slack s(x) = d + 2 w^T x - x^T M x, M symmetric PSD."""

    nu = 1.0

    def __init__(self, M, w, d):
        self.M = np.asarray(M, dtype=float)
        self.w = np.asarray(w, dtype=float)
        self.d = float(d)

    def slack(self, x):
        return self.d + 2.0 * self.w @ x - x @ self.M @ x

    def feasible(self, x):
        return self.slack(x) > 0.0

    def value(self, x):
        s = self.slack(x)
        if s <= 0.0:
            return np.inf
        return -np.log(s)

    def grad_hess(self, x):
        s = self.slack(x)
        ds = 2.0 * (self.w - self.M @ x)
        g = -ds / s
        h = 2.0 * self.M / s + np.outer(ds, ds) / s**2
        return g, h


class LogDetBarrier:
    """-ln det E(x) for the affine Hermitian pencil E(x) = E0 + sum_k x_k Ek."""

    def __init__(self, E0, Es):
        self.E0 = np.asarray(E0, dtype=complex)
        self.Es = np.asarray(Es, dtype=complex)  # (p, m, m)
        self.nu = float(self.E0.shape[0])

    def pencil(self, x):
        return self.E0 + np.tensordot(x, self.Es, axes=(0, 0))

    def _chol(self, x):
        try:
            return np.linalg.cholesky(self.pencil(x))
        except np.linalg.LinAlgError:
            return None

    def feasible(self, x):
        return self._chol(x) is not None

    def value(self, x):
        L = self._chol(x)
        if L is None:
            return np.inf
        return -2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))

    def grad_hess(self, x):
        Einv = np.linalg.inv(self.pencil(x))
        G = Einv[None, :, :] @ self.Es  # (p, m, m)
        g = -np.einsum("aii->a", G).real
        h = np.einsum("aij,bji->ab", G, G).real
        return g, (h + h.T) / 2


def _newton_direction(H, g):
    jitter = 0.0
    scale = max(np.abs(np.diag(H)).max(), 1e-300)
    for _ in range(8):
        try:
            return np.linalg.solve(
                H + jitter * scale * np.eye(H.shape[0]), -g)
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100.0, 1e-14)
    return np.linalg.lstsq(H, -g, rcond=None)[0]


def solve_barrier(obj: QuadObjective, barriers, x0, tol=1e-8, max_iter=500,
                  t_mult=20.0, newton_tol=1e-11, t0=None):
    """Path-following minimization of ``obj`` subject to the barrier set.

    Returns (x, info) where info carries the complementarity gap bound nu/t,
    the stationarity residual of the true KKT system and the iteration count.
    ``t0`` warm-starts the path parameter when x0 is already near-optimal.
    Raises InfeasibleError when x0 is not strictly feasible and
    IterationError past ``max_iter`` total Newton steps.
    """
    x = np.asarray(x0, dtype=float).copy()
    if not all(b.feasible(x) for b in barriers):
        raise InfeasibleError("initial point is not strictly feasible")

    nu = sum(b.nu for b in barriers)

    def phi(t, x):
        v = t * obj.value(x)
        for b in barriers:
            bv = b.value(x)
            if not np.isfinite(bv):
                return np.inf
            v += bv
        return v

    def grad_hess(t, x):
        g = t * obj.grad(x)
        H = t * obj.hess(x)
        for b in barriers:
            bg, bh = b.grad_hess(x)
            g = g + bg
            H = H + bh
        return g, H

    if t0 is not None:
        t = float(np.clip(t0, 1e-6, nu / tol))
    else:
        # balance the first centering: barrier and objective gradients comparable
        g_obj = np.linalg.norm(obj.grad(x))
        g_bar = 0.0
        for b in barriers:
            bg, _ = b.grad_hess(x)
            g_bar += np.linalg.norm(bg)
        t = float(np.clip(max(g_bar, 1.0) / max(g_obj, 1e-12), 1e-6, 1e10))

    iters = 0
    while True:
        # center for the current t; damped Newton with alpha = 1/(1+lambda)
        # (objective + barriers is self-concordant). Intermediate stages only
        # need rough centering; the last stage is tightened for the KKT
        # residual.
        final_stage = nu / t <= tol
        stage_tol = newton_tol if final_stage else 0.025
        f_cur = phi(t, x)
        for _ in range(80):
            g, H = grad_hess(t, x)
            dx = _newton_direction(H, g)
            lam2 = float(-g @ dx)
            if lam2 <= 2.0 * stage_tol:
                break
            lam = np.sqrt(max(lam2, 0.0))
            alpha = 1.0 if lam <= 0.25 else 1.0 / (1.0 + lam)
            f_new = phi(t, x + alpha * dx)
            while alpha > 1e-18 and f_new >= f_cur:
                alpha *= 0.5
                f_new = phi(t, x + alpha * dx)
            if alpha <= 1e-18:
                break
            x = x + alpha * dx
            f_cur = f_new
            iters += 1
            if iters > max_iter:
                raise IterationError(
                    f"barrier solver exceeded {max_iter} Newton steps",
                    best=x, residuals={"gap": nu / t, "decrement2": lam2})
        if final_stage:
            break
        t *= t_mult

    g, _ = grad_hess(t, x)
    info = {
        "iterations": iters,
        "t": t,
        "gap": nu / t,
        "kkt_residual": float(np.linalg.norm(g) / t + nu / t),
    }
    return x, info


def cplx_to_real(psi: np.ndarray) -> np.ndarray:
    return np.concatenate([psi.real, psi.imag])


def real_to_cplx(x: np.ndarray) -> np.ndarray:
    k = x.size // 2
    return x[:k] + 1j * x[k:]


def herm_quad_embed(Q: np.ndarray) -> np.ndarray:
    """Real symmetric embedding: psi^H Q psi = z^T Qr z for z = [Re; Im]."""
    qr, qi = Q.real, Q.imag
    return np.block([[qr, -qi], [qi, qr]])
