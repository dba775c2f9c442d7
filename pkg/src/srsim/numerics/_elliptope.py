"""Pure-numpy backend for the unit-diagonal log-trace semidefinite program.

Solves   max_W  ln tr(C W) - tr(S W)   s.t.  W >= 0,  W(i,i) = 1
for Hermitian C, S by interior-point path following on the dual

    min_{y, tau>0}  sum(y) - ln(tau) - 1   s.t.  Diag(y) + S - tau*C >= 0,

whose Newton system is only (n+1)-dimensional. On the central path the primal
iterate W = mu * Z^{-1} has exactly unit diagonal and the duality gap is
mu * n, so the gap is driven below tolerance directly.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, IterationError


def _dual_value(y, tau):
    return float(np.sum(y) - np.log(tau) - 1.0)


def _phi(y, tau, mu, S, tauC_base):
    Z = np.diag(y.astype(complex)) + S - tau * tauC_base
    try:
        L = np.linalg.cholesky(Z)
    except np.linalg.LinAlgError:
        return np.inf, None
    logdet = 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))
    return _dual_value(y, tau) / mu - logdet, Z


def elliptope_logsdp(C, S, tol=1e-8, max_iter=500):
    """Returns (W, obj, info). Raises IterationError past the Newton cap."""
    C = np.asarray(C, dtype=complex)
    S = np.asarray(S, dtype=complex)
    n = C.shape[0]

    tr_c = float(np.trace(C).real)
    if tr_c <= 0:
        raise DomainError(
            f"log argument not positive on the feasible set: tr(C) = {tr_c:.3e}")
    # rescale C so tau starts near 1; shifts the objective by ln(c0) only
    c0 = tr_c / n
    C = C / c0

    tau = 1.0 / n  # stationary value at W = I for the rescaled C
    w_top = float(np.linalg.eigvalsh(tau * C - S)[-1])
    y = np.full(n, w_top + 1.0)
    Z = np.diag(y.astype(complex)) + S - tau * C
    Zinv = np.linalg.inv(Z)
    mu = n / float(np.trace(Zinv).real)

    iters = 0
    newton_tol = min(1e-11, tol * 1e-4)
    while True:
        final_stage = mu * n <= 0.25 * tol
        stage_tol = newton_tol if final_stage else 0.025
        f_cur, _ = _phi(y, tau, mu, S, C)
        for _ in range(60):
            Zinv = np.linalg.inv(Z)
            Zinv = (Zinv + Zinv.conj().T) / 2
            ZC = Zinv @ C
            g = np.empty(n + 1)
            g[:n] = 1.0 / mu - np.diag(Zinv).real
            g[n] = -1.0 / (mu * tau) + float(np.trace(ZC).real)
            H = np.empty((n + 1, n + 1))
            H[:n, :n] = np.abs(Zinv) ** 2
            zcz = np.einsum("ij,ji->i", ZC, Zinv).real
            H[:n, n] = -zcz
            H[n, :n] = -zcz
            H[n, n] = float(np.einsum("ij,ji->", ZC, ZC).real) + 1.0 / (mu * tau**2)
            try:
                d = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                d = np.linalg.lstsq(H, -g, rcond=None)[0]
            lam2 = float(-g @ d)
            if lam2 <= 2.0 * stage_tol:
                break
            dy, dtau = d[:n], d[n]
            lam = np.sqrt(max(lam2, 0.0))
            alpha = 1.0 if lam <= 0.25 else 1.0 / (1.0 + lam)
            f_new, Z_new = np.inf, None
            while alpha > 1e-18:
                tau_n = tau + alpha * dtau
                if tau_n > 0:
                    f_new, Z_new = _phi(y + alpha * dy, tau_n, mu, S, C)
                    if f_new < f_cur:
                        break
                alpha *= 0.5
            if alpha <= 1e-18:
                break
            y = y + alpha * dy
            tau += alpha * dtau
            Z = Z_new
            f_cur = f_new
            iters += 1
            if iters > max_iter:
                W = mu * np.linalg.inv(Z)
                raise IterationError(
                    f"interior-point cap of {max_iter} Newton steps exceeded",
                    best=_finish_w(W), residuals={"gap": mu * n})
        if final_stage:
            break
        mu /= 10.0

    Zinv = np.linalg.inv(Z)
    W = _finish_w(mu * Zinv)
    obj = float(np.log(np.trace(C @ W).real * c0) - np.trace(S @ W).real)
    gap_cert = _dual_value(y, tau) - (obj - np.log(c0))
    info = {"iterations": iters, "gap": abs(gap_cert), "mu": mu}
    return W, obj, info


def _finish_w(W):
    """Hermitize and congruence-rescale to an exactly unit diagonal."""
    W = (W + W.conj().T) / 2
    d = np.sqrt(np.diag(W).real)
    return W / np.outer(d, d)
