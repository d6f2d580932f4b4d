"""Pure numpy fallback for the compiled eigensolver kernels.

Same algorithms and signatures as the ``_kernels`` extension: Householder
steps are vectorized over the trailing block, the QL chase runs in Python
with each rotation applied to two contiguous rows of ``zt``.
"""

import math

import numpy as np

_EPS = np.finfo(np.float64).eps


def htridiag(a):
    """Reduce Hermitian ``a`` in place; return ``(diag, off, q)``."""
    n = a.shape[0]
    q = np.eye(n, dtype=np.complex128)
    offc = np.zeros(max(n - 1, 0), dtype=np.complex128)
    for k in range(n - 2):
        u = a[k, k + 1:].conj()
        alpha = math.sqrt(float(np.vdot(u, u).real))
        if alpha == 0.0:
            continue
        c0abs = abs(u[0])
        phase = u[0] / c0abs if c0abs != 0.0 else 1.0
        offc[k] = -phase * alpha
        u[0] += phase * alpha
        u /= math.sqrt(2.0 * alpha * (alpha + c0abs))
        b = a[k + 1:, k + 1:]
        p = 2.0 * (b @ u)
        p -= np.vdot(u, p) * u
        b -= np.outer(u, p.conj()) + np.outer(p, u.conj())
        qs = q[:, k + 1:]
        qs -= 2.0 * np.outer(qs @ u, u.conj())
    if n >= 2:
        offc[n - 2] = a[n - 1, n - 2]
    diag = a.diagonal().real.copy()
    off = np.abs(offc)
    phases = np.ones(n, dtype=np.complex128)
    for k in range(n - 1):
        ratio = offc[k] / off[k] if off[k] != 0.0 else 1.0
        phases[k + 1] = phases[k] * ratio
    q *= phases[None, :]
    return diag, off, q


def tql(d, e, zt, max_sweeps=64):
    """Implicit-shift QL on ``(d, e)`` in place; -1 on success else index."""
    n = d.shape[0]
    if n == 0:
        return -1
    e[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + r if g >= 0.0 else g - r)
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
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
                lo = zt[i].copy()
                hi = zt[i + 1]
                zt[i] = c * lo - s * hi
                zt[i + 1] = s * lo + c * hi
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1
