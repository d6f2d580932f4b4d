"""Dense Hermitian eigendecomposition and Haar unitary sampling.

Eigenvectors are stored as rows: ``vectors[k]`` satisfies
``H @ vectors[k] = eigenvalues[k] * vectors[k]`` with eigenvalues ascending.
Row ``k`` is read as the coefficient sequence ``u_k(alpha)``; storage index
``alpha + N`` holds degree-``N`` index ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ConvergenceError, ValidationError

__all__ = [
    "EigenDecomposition",
    "check_hermitian",
    "check_unitary",
    "fix_phase",
    "haar_unitary",
    "hermitian_eig",
    "MAX_SWEEPS",
]

MAX_SWEEPS = 64


@dataclass(frozen=True)
class EigenDecomposition:
    """Full spectrum of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : ndarray, shape (d,)
        Nondecreasing real eigenvalues.
    vectors : ndarray, shape (d, d)
        Unitary matrix whose row ``k`` is the unit eigenvector for
        ``eigenvalues[k]``.
    residual : float
        ``max_k ||H v_k - lambda_k v_k||_2``.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residual: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def check_hermitian(h, rtol: float = 1e-12) -> np.ndarray:
    """Return ``h`` as a complex square array, raising if not Hermitian."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
        raise ValidationError(f"expected a nonempty square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValidationError("matrix has non-finite entries")
    h = h.astype(np.complex128, copy=False)
    scale = np.max(np.abs(h))
    if np.max(np.abs(h - h.conj().T), initial=0.0) > rtol * scale:
        raise ValidationError("matrix is not Hermitian within tolerance")
    return h


def check_unitary(u, atol: float = 1e-10) -> np.ndarray:
    """Return ``u`` as a complex array, raising unless ``U U^*`` is ``I``."""
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {u.shape}")
    err = np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0]))
    if err > atol:
        raise ValidationError(f"matrix is not unitary: ||UU* - I||_F = {err:.3e}")
    return u


def hermitian_eig(h, backend: str | None = None) -> EigenDecomposition:
    """Eigendecomposition of a dense complex Hermitian matrix.

    Householder reduction to real symmetric tridiagonal form followed by
    implicit-shift QL with Wilkinson shifts. Deterministic for fixed input.

    Parameters
    ----------
    h : array_like, shape (d, d)
        Hermitian matrix.
    backend : {"compiled", "python"}, optional
        Kernel implementation; defaults to the one selected at import.

    Raises
    ------
    ValidationError
        If ``h`` is not Hermitian.
    ConvergenceError
        If QL needs more than ``MAX_SWEEPS`` iterations for some eigenvalue.
    """
    h = check_hermitian(h)
    kern = _backend.kernels if backend is None else _backend.BACKENDS[backend]
    # the reduction needs an exactly Hermitian working copy
    work = np.ascontiguousarray(0.5 * (h + h.conj().T))
    n = work.shape[0]
    diag, off, q = kern.htridiag(work)
    d = np.ascontiguousarray(diag, dtype=np.float64)
    e = np.zeros(n, dtype=np.float64)
    e[: n - 1] = off
    zt = np.eye(n)
    failed = kern.tql(d, e, zt, MAX_SWEEPS)
    if failed >= 0:
        raise ConvergenceError(
            f"QL iteration exceeded {MAX_SWEEPS} sweeps at eigenvalue index {failed}",
            index=int(failed),
        )
    order = np.argsort(d, kind="stable")
    d = d[order]
    zt = zt[order]
    # contiguous real/imag parts keep both products on BLAS
    vectors = (zt @ np.ascontiguousarray(q.real.T)) + 1j * (zt @ np.ascontiguousarray(q.imag.T))
    resid = np.max(np.linalg.norm(vectors @ h.T - d[:, None] * vectors, axis=1))
    return EigenDecomposition(eigenvalues=d, vectors=vectors, residual=float(resid))


def fix_phase(v) -> np.ndarray:
    """Rotate ``v`` so its largest-modulus entry is real positive.

    Ties in modulus go to the smallest index.
    """
    v = np.asarray(v, dtype=np.complex128)
    mod = np.abs(v)
    if not np.any(mod > 0):
        raise ValidationError("cannot fix the phase of a zero vector")
    j = int(np.argmax(mod))
    return v * (mod[j] / v[j])


def haar_unitary(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Sample from Haar measure on U(d).

    QR of a standard complex Gaussian matrix, with the columns of ``Q``
    rescaled by the phases of ``diag(R)``. ``size`` draws a stacked batch.
    """
    if d < 1:
        raise ValidationError(f"dimension must be positive, got {d}")
    shape = (d, d) if size is None else (size, d, d)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    rd = np.diagonal(r, axis1=-2, axis2=-1)
    ph = rd / np.abs(rd)
    return q * ph[..., None, :]
