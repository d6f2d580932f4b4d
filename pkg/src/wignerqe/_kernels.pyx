# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the dense Hermitian eigensolver.

Two routines, mirrored one-for-one by ``_kernels_py``:

htridiag
    Householder reduction of a complex Hermitian matrix to a real symmetric
    tridiagonal matrix, returning the accumulated unitary transform. The
    level-2 steps go through BLAS (``zhemv``, ``zher2``, ``zgemv``, ``zgerc``).
tql
    Implicit-shift QL with Wilkinson shifts on a real symmetric tridiagonal
    matrix, accumulating rotations into the rows of ``zt``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot
cimport scipy.linalg.cython_blas as blas

cnp.import_array()

ctypedef double complex cplx


def htridiag(a_in):
    """Reduce Hermitian ``a_in``; return ``(diag, off, q)``.

    ``q`` is unitary with ``q^H a_in q`` real symmetric tridiagonal, diagonal
    ``diag`` and sub-diagonal ``off`` (both real, ``off >= 0``). Only the
    lower triangle of ``a_in`` is read.
    """
    arr = np.array(a_in, dtype=np.complex128, order="F", copy=True)
    cdef cplx[::1, :] a = arr
    cdef int n = a.shape[0]
    cdef int k, i, m, one = 1
    cdef double alpha, c0abs, scale
    cdef cplx phase, kk, z_two = 2.0, z_zero = 0.0, z_mone = -1.0, z_one = 1.0
    cdef char lower = b'L'
    cdef char trans = b'C'
    qarr = np.eye(n, dtype=np.complex128, order="F")
    cdef cplx[::1, :] q = qarr
    # column k of ``refl`` holds the unit reflector of step k (rows k+1..)
    reflarr = np.zeros((n, n), dtype=np.complex128, order="F")
    cdef cplx[::1, :] refl = reflarr
    parr = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] p = parr
    cdef cplx * u
    diag = np.zeros(n, dtype=np.float64)
    offc = np.zeros(max(n - 1, 0), dtype=np.complex128)
    cdef double[::1] dv = diag
    cdef cplx[::1] ev = offc
    cdef int[::1] used = np.zeros(max(n, 1), dtype=np.intc)

    with nogil:
        for k in range(n - 2):
            m = n - k - 1
            u = &refl[k + 1, k]
            for i in range(m):
                u[i] = a[k + 1 + i, k]
            alpha = blas.dznrm2(&m, u, &one)
            if alpha == 0.0:
                ev[k] = 0.0
                continue
            used[k] = 1
            c0abs = sqrt(u[0].real * u[0].real + u[0].imag * u[0].imag)
            if c0abs == 0.0:
                phase = 1.0
            else:
                phase = u[0] / c0abs
            ev[k] = -phase * alpha
            u[0] = u[0] + phase * alpha
            scale = 1.0 / sqrt(2.0 * alpha * (alpha + c0abs))
            for i in range(m):
                u[i] = u[i] * scale
            # p = 2 B u - (u^H 2 B u) u ; B -= u p^H + p u^H
            blas.zhemv(&lower, &m, &z_two, &a[k + 1, k + 1], &n, u, &one,
                       &z_zero, &p[0], &one)
            kk = -blas.zdotc(&m, u, &one, &p[0], &one)
            blas.zaxpy(&m, &kk, u, &one, &p[0], &one)
            blas.zher2(&lower, &m, &z_mone, u, &one, &p[0], &one,
                       &a[k + 1, k + 1], &n)
        if n >= 2:
            ev[n - 2] = a[n - 1, n - 2]
        for k in range(n):
            dv[k] = a[k, k].real
        # backward accumulation: Q = P_0 P_1 ... P_{n-3}
        k = n - 3
        while k >= 0:
            if used[k]:
                m = n - k - 1
                u = &refl[k + 1, k]
                # t = Q_sub^H u ; Q_sub -= 2 u t^H
                blas.zgemv(&trans, &m, &m, &z_one, &q[k + 1, k + 1], &n, u, &one,
                           &z_zero, &p[0], &one)
                kk = -2.0
                blas.zgerc(&m, &m, &kk, u, &one, &p[0], &one, &q[k + 1, k + 1], &n)
            k -= 1

    # gauge the complex sub-diagonal to its modulus
    off = np.abs(offc)
    phases = np.ones(n, dtype=np.complex128)
    for k in range(n - 1):
        if off[k] != 0.0:
            phases[k + 1] = phases[k] * offc[k] / off[k]
        else:
            phases[k + 1] = phases[k]
    qarr *= phases[None, :]
    return diag, off, np.ascontiguousarray(qarr)


def tql(double[::1] d, double[::1] e, double[:, ::1] zt, int max_sweeps=64):
    """Diagonalize the tridiagonal ``(d, e)`` in place.

    ``e`` has length ``n`` with ``e[i]`` coupling ``i`` and ``i + 1`` and
    ``e[n-1]`` unused. Rotations are applied to rows of ``zt``. Returns -1 on
    success, otherwise the index whose iteration count exceeded
    ``max_sweeps``.
    """
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t ncol = zt.shape[1]
    cdef Py_ssize_t l, m, i, kcol
    cdef int it
    cdef double g, r, s, c, p, f, b, dd, t
    cdef int failed = -1
    cdef bint underflow
    if n == 0:
        return -1
    e[n - 1] = 0.0
    with nogil:
        for l in range(n):
            it = 0
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) <= 2.220446049250313e-16 * dd:
                        break
                    m += 1
                if m == l:
                    break
                if it == max_sweeps:
                    failed = l
                    break
                it += 1
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                if g >= 0.0:
                    g = d[m] - d[l] + e[l] / (g + r)
                else:
                    g = d[m] - d[l] + e[l] / (g - r)
                s = 1.0
                c = 1.0
                p = 0.0
                underflow = False
                i = m - 1
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        underflow = True
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                    for kcol in range(ncol):
                        t = zt[i + 1, kcol]
                        zt[i + 1, kcol] = s * zt[i, kcol] + c * t
                        zt[i, kcol] = c * zt[i, kcol] - s * t
                    i -= 1
                if underflow:
                    continue
                d[l] -= p
                e[l] = g
                e[m] = 0.0
            if failed >= 0:
                break
    return failed
