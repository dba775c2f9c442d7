# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of the pure-numpy unit-diagonal log-trace SDP solver.

Same dual path-following algorithm as ``_elliptope``; the Newton system
assembly and line search run as typed loops with LAPACK calls, which removes
the per-operation dispatch overhead that dominates at these matrix sizes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log, sqrt
from scipy.linalg.cython_lapack cimport zpotrf, zpotri, zpotrs

cnp.import_array()

from .errors import DomainError, IterationError


cdef int _chol_logdet(double complex[::1, :] Z, int n, double *logdet) nogil:
    """In-place lower Cholesky of Z; returns 0 and the log-determinant on
    success, LAPACK info otherwise."""
    cdef int info = 0
    cdef int i
    cdef char uplo = b'L'
    zpotrf(&uplo, &n, &Z[0, 0], &n, &info)
    if info != 0:
        return info
    logdet[0] = 0.0
    for i in range(n):
        logdet[0] += log(fabs(Z[i, i].real))
    logdet[0] *= 2.0
    return 0


cdef void _build_z(double complex[::1, :] Z, double complex[::1, :] S,
                   double complex[::1, :] C, double[::1] y, double tau,
                   int n) nogil:
    cdef int i, j
    for j in range(n):
        for i in range(n):
            Z[i, j] = S[i, j] - tau * C[i, j]
        Z[j, j] = Z[j, j] + y[j]


def elliptope_logsdp(C_in, S_in, double tol=1e-8, int max_iter=500):
    """Returns (W, obj, info); see the pure backend for the contract."""
    cdef cnp.ndarray C_arr = np.asfortranarray(C_in, dtype=np.complex128)
    cdef cnp.ndarray S_arr = np.asfortranarray(S_in, dtype=np.complex128)
    cdef int n = C_arr.shape[0]

    cdef double tr_c = float(np.trace(C_arr).real)
    if tr_c <= 0:
        raise DomainError(
            f"log argument not positive on the feasible set: tr(C) = {tr_c:.3e}")
    cdef double c0 = tr_c / n
    C_arr = np.asfortranarray(C_arr / c0)

    cdef double complex[::1, :] C = C_arr
    cdef double complex[::1, :] S = S_arr

    cate = np.zeros((n, n), dtype=np.complex128, order="F")
    cdef double complex[::1, :] Z = cate
    zinv_a = np.zeros((n, n), dtype=np.complex128, order="F")
    cdef double complex[::1, :] Zinv = zinv_a
    zc_a = np.zeros((n, n), dtype=np.complex128, order="F")

    cdef double tau = 1.0 / n
    w_top = float(np.linalg.eigvalsh(np.asarray(C) * tau - np.asarray(S))[-1])
    y_arr = np.full(n, w_top + 1.0)
    cdef double[::1] y = y_arr
    ytrial_a = np.zeros(n)
    cdef double[::1] y_trial = ytrial_a

    cdef double logdet = 0.0, mu, f_cur, f_new, lam2, lam, alpha, tau_trial
    cdef int i, j, k, info, iters = 0
    cdef bint final_stage

    _build_z(Z, S, C, y, tau, n)
    if _chol_logdet(Z, n, &logdet) != 0:
        raise DomainError("initial dual point is not feasible")
    # Z holds its Cholesky factor; recover the inverse for the mu estimate
    _invert_from_chol(Z, Zinv, n)
    cdef double tr_zinv = 0.0
    for i in range(n):
        tr_zinv += Zinv[i, i].real
    mu = n / tr_zinv

    H_arr = np.zeros((n + 1, n + 1))
    cdef double[:, ::1] H = H_arr
    g_arr = np.zeros(n + 1)
    cdef double[::1] g = g_arr

    cdef double newton_tol = min(1e-11, tol * 1e-4)
    cdef double stage_tol, dual_lin, tr_zc, h_corner
    cdef cnp.ndarray d_arr

    while True:
        final_stage = mu * n <= 0.25 * tol
        stage_tol = newton_tol if final_stage else 0.025
        _build_z(Z, S, C, y, tau, n)
        if _chol_logdet(Z, n, &logdet) != 0:
            raise DomainError("dual iterate left the cone")
        f_cur = _dual_value(y, tau, n) / mu - logdet
        for k in range(60):
            _build_z(Z, S, C, y, tau, n)
            if _chol_logdet(Z, n, &logdet) != 0:
                raise DomainError("dual iterate left the cone")
            _invert_from_chol(Z, Zinv, n)

            zc = np.asarray(Zinv) @ np.asarray(C)
            tr_zc = float(np.trace(zc).real)
            for i in range(n):
                g[i] = 1.0 / mu - Zinv[i, i].real
            g[n] = -1.0 / (mu * tau) + tr_zc
            for i in range(n):
                for j in range(n):
                    H[i, j] = (Zinv[i, j].real * Zinv[i, j].real
                               + Zinv[i, j].imag * Zinv[i, j].imag)
            zcz = zc @ np.asarray(Zinv)
            for i in range(n):
                H[i, n] = -zcz[i, i].real
                H[n, i] = H[i, n]
            h_corner = float(np.einsum("ij,ji->", zc, zc).real)
            H[n, n] = h_corner + 1.0 / (mu * tau * tau)

            try:
                d_arr = np.linalg.solve(H_arr, -g_arr)
            except np.linalg.LinAlgError:
                d_arr = np.linalg.lstsq(H_arr, -g_arr, rcond=None)[0]
            lam2 = float(-g_arr @ d_arr)
            if lam2 <= 2.0 * stage_tol:
                break
            lam = sqrt(lam2 if lam2 > 0 else 0.0)
            alpha = 1.0 if lam <= 0.25 else 1.0 / (1.0 + lam)
            while alpha > 1e-18:
                tau_trial = tau + alpha * d_arr[n]
                if tau_trial > 0:
                    for i in range(n):
                        y_trial[i] = y[i] + alpha * d_arr[i]
                    _build_z(Z, S, C, y_trial, tau_trial, n)
                    if _chol_logdet(Z, n, &logdet) == 0:
                        f_new = _dual_value(y_trial, tau_trial, n) / mu - logdet
                        if f_new < f_cur:
                            break
                alpha *= 0.5
            if alpha <= 1e-18:
                break
            for i in range(n):
                y[i] = y_trial[i]
            tau = tau_trial
            f_cur = f_new
            iters += 1
            if iters > max_iter:
                _build_z(Z, S, C, y, tau, n)
                _chol_logdet(Z, n, &logdet)
                _invert_from_chol(Z, Zinv, n)
                raise IterationError(
                    f"interior-point cap of {max_iter} Newton steps exceeded",
                    best=_finish_w(mu * np.asarray(Zinv)),
                    residuals={"gap": mu * n})
        if final_stage:
            break
        mu /= 10.0

    _build_z(Z, S, C, y, tau, n)
    _chol_logdet(Z, n, &logdet)
    _invert_from_chol(Z, Zinv, n)
    W = _finish_w(mu * np.asarray(Zinv))
    obj = float(np.log(np.trace(np.asarray(C) @ W).real * c0)
                - np.trace(np.asarray(S) @ W).real)
    gap_cert = _dual_value(y, tau, n) - (obj - np.log(c0))
    return W, obj, {"iterations": iters, "gap": abs(gap_cert), "mu": mu}


cdef double _dual_value(double[::1] y, double tau, int n) nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(n):
        s += y[i]
    return s - log(tau) - 1.0


cdef void _invert_from_chol(double complex[::1, :] L,
                            double complex[::1, :] out, int n) nogil:
    """Full Hermitian inverse from an in-place lower Cholesky factor."""
    cdef int info = 0
    cdef int i, j
    cdef char uplo = b'L'
    for j in range(n):
        for i in range(n):
            out[i, j] = L[i, j]
    zpotri(&uplo, &n, &out[0, 0], &n, &info)
    # zpotri fills the lower triangle; mirror it
    for j in range(n):
        for i in range(j):
            out[i, j] = out[j, i].real - 1j * out[j, i].imag


def _finish_w(W):
    W = (W + W.conj().T) / 2
    d = np.sqrt(np.diag(W).real)
    return W / np.outer(d, d)
