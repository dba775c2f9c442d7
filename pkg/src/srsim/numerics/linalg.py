"""Dense complex Hermitian linear algebra with deterministic conventions."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DomainError

HERM_RTOL = 1e-10


def check_hermitian(a: np.ndarray, rtol: float = HERM_RTOL, name: str = "matrix") -> np.ndarray:
    """Validate near-Hermitian input and return its exactly Hermitian part."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} must be square, got shape {a.shape}")
    scale = np.abs(a).max()
    dev = np.abs(a - a.conj().T).max()
    if dev > rtol * max(scale, 1e-300):
        raise DomainError(
            f"{name} is not Hermitian: max|A - A^H| = {dev:.3e} "
            f"exceeds {rtol:.0e} * max|A| = {rtol * scale:.3e}")
    return (a + a.conj().T) / 2


def fix_phase(u: np.ndarray) -> np.ndarray:
    """Rotate a vector so its largest-magnitude entry is real-positive.

    Eigenvectors are phase-ambiguous; this pins one representative so
    alternating loops are reproducible."""
    i = int(np.argmax(np.abs(u)))
    p = u[i]
    if p == 0:
        return u
    return u * (p.conjugate() / abs(p))


def hermitian_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues descending, eigenvector columns), each eigenvector
    unit-norm with its largest-magnitude entry made real-positive.
    """
    a = check_hermitian(a)
    w, v = np.linalg.eigh(a)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for k in range(v.shape[1]):
        v[:, k] = fix_phase(v[:, k])
    return w, v


def max_generalized_eigvec(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit vector maximizing the Rayleigh quotient (x^H a x)/(x^H b x).

    ``a`` must be Hermitian PSD and ``b`` Hermitian positive definite;
    returns the top generalized eigenpair of (a, b).
    """
    a = check_hermitian(a, name="numerator matrix")
    b = check_hermitian(b, name="denominator matrix")
    wb = np.linalg.eigvalsh(b)
    if wb[0] <= 1e-12 * max(wb[-1], 1e-300):
        raise DomainError(
            f"denominator matrix is numerically singular: "
            f"min eig {wb[0]:.3e} vs max eig {wb[-1]:.3e}")
    w, v = scipy.linalg.eigh(a, b)
    x = fix_phase(v[:, -1])
    x = x / np.linalg.norm(x)
    num = float(np.real(x.conj() @ a @ x))
    den = float(np.real(x.conj() @ b @ x))
    return x, num / den


def pseudo_inverse(a: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse (SVD-based)."""
    return np.linalg.pinv(np.asarray(a))
