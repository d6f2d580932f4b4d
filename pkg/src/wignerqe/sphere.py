"""Spherical harmonics, quadrature on S^2, and operator matrix-element blocks.

Harmonics ``Y_N^k`` are orthonormal under the raw surface measure (total mass
``4*pi``) and carry the Condon-Shortley phase. A block stores
``elements[alpha + N, beta + N] = <A Y_N^alpha, Y_N^beta>`` together with the
phase-space average ``omega`` of the operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ValidationError

__all__ = [
    "SphericalGrid",
    "HarmonicTable",
    "OperatorBlock",
    "build_grid",
    "legendre_table",
    "eval_harmonics",
    "eval_degree",
    "mult_operator_block",
    "diagonal_symbol_block",
    "identity_block",
    "fourier_band",
    "weyl_trace",
    "fourier_norm_profile",
    "save_block",
    "load_block",
    "MULTIPLIERS",
    "DEFAULT_BAND_LIMIT",
]

FOUR_PI = 4.0 * math.pi
DEFAULT_BAND_LIMIT = 32


@dataclass(frozen=True)
class SphericalGrid:
    """Product quadrature: Gauss-Legendre in ``cos(theta)``, uniform in ``phi``.

    Exact for integrands whose ``cos(theta)``-polynomial part has degree at
    most ``2 * n_theta - 1`` and whose azimuthal frequencies are below
    ``n_phi`` in absolute value.
    """

    n_theta: int
    n_phi: int
    x: np.ndarray
    w_theta: np.ndarray
    phi: np.ndarray
    n_max: int = 0
    band_limit: int = 0

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self.x)

    @property
    def w_phi(self) -> float:
        return 2.0 * math.pi / self.n_phi

    @property
    def weights(self) -> np.ndarray:
        """Full ``(n_theta, n_phi)`` weight array; sums to ``4*pi``."""
        return np.outer(self.w_theta, np.full(self.n_phi, self.w_phi))

    def integrate(self, values) -> complex:
        """Quadrature of an array sampled on the ``(n_theta, n_phi)`` nodes."""
        return np.sum(self.weights * values)

    def supports(self, N: int, L: int) -> bool:
        """True if products ``Y_N^a conj(Y_N^b) f`` with ``deg f <= L`` are exact."""
        return self.n_theta >= N + (L + 1) // 2 + 1 and self.n_phi >= 2 * N + L + 1


def build_grid(N_max: int, L: int = 0) -> SphericalGrid:
    """Smallest product grid integrating degree-``N_max`` products against degree ``L``."""
    if N_max < 0 or L < 0:
        raise ValidationError(f"N_max and L must be nonnegative, got {N_max}, {L}")
    n_theta = N_max + (L + 1) // 2 + 1
    n_phi = 2 * N_max + L + 1
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return SphericalGrid(n_theta, n_phi, x, w, phi, n_max=N_max, band_limit=L)


def legendre_table(N: int, x) -> np.ndarray:
    """Fully normalized associated Legendre functions of degree ``N``.

    Returns ``p`` of shape ``(N + 1, len(x))`` with
    ``Y_N^m(theta, phi) = p[m] * exp(i m phi)`` for ``m >= 0``, Condon-Shortley
    phase included. Uses the sectoral start and the normalized three-term
    recurrence in the degree, which stays in range for large ``N``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    sin = np.sqrt(np.maximum(1.0 - x * x, 0.0))
    nx = x.shape[0]
    pmm = np.empty((N + 1, nx))
    pmm[0] = 1.0 / math.sqrt(FOUR_PI)
    for m in range(1, N + 1):
        pmm[m] = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin * pmm[m - 1]
    m = np.arange(N + 1, dtype=np.float64)[:, None]
    prev = np.zeros((N + 1, nx))
    cur = np.zeros((N + 1, nx))
    cur[0] = pmm[0]
    for l in range(1, N + 1):
        active = m[:l, 0]
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - active * active))[:, None]
        b = np.sqrt(np.maximum((l - 1.0) ** 2 - active * active, 0.0) / (4.0 * (l - 1.0) ** 2 - 1.0))[:, None]
        new = np.zeros_like(cur)
        new[:l] = a * (x * cur[:l] - b * prev[:l])
        new[l] = pmm[l]
        prev, cur = cur, new
    return cur


@dataclass(frozen=True)
class HarmonicTable:
    """Degree-``N`` harmonics on a grid, stored in separated form.

    ``legendre[alpha + N, i]`` is the ``theta`` factor at node ``i``; the
    azimuthal factor is ``exp(1j * alpha * phi)`` exactly.
    """

    N: int
    grid: SphericalGrid
    legendre: np.ndarray

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @cached_property
    def values(self) -> np.ndarray:
        """Dense ``(d, n_theta, n_phi)`` array of ``Y_N^alpha`` at every node."""
        az = np.exp(1j * self.orders[:, None] * self.grid.phi[None, :])
        return self.legendre[:, :, None] * az[:, None, :]

    def synthesize(self, coeffs) -> np.ndarray:
        """Values of ``sum_alpha coeffs[alpha + N] * Y_N^alpha`` on the grid."""
        return np.tensordot(np.asarray(coeffs), self.values, axes=(0, 0))

    def gram(self) -> np.ndarray:
        """``<Y^alpha, Y^beta>`` by quadrature."""
        v = self.values.reshape(len(self.orders), -1)
        w = self.grid.weights.reshape(-1)
        return (v * w) @ v.conj().T


def eval_degree(N: int, x) -> np.ndarray:
    """``theta`` factors of ``Y_N^alpha`` for ``alpha = -N..N`` at ``x = cos(theta)``."""
    p = legendre_table(N, x)
    sign = np.where(np.arange(1, N + 1) % 2 == 1, -1.0, 1.0)[:, None]
    return np.vstack([(sign * p[1:])[::-1], p])


def eval_harmonics(N: int, grid: SphericalGrid) -> HarmonicTable:
    """Tabulate ``Y_N^k``, ``k = -N..N``, on ``grid``."""
    if N < 0:
        raise ValidationError(f"degree must be nonnegative, got {N}")
    if grid.n_theta < N + 1 or grid.n_phi < 2 * N + 1:
        raise ValidationError(
            f"grid ({grid.n_theta} x {grid.n_phi}) too small for degree {N}; "
            f"need at least ({N + 1} x {2 * N + 1})"
        )
    return HarmonicTable(N, grid, eval_degree(N, grid.x))


@dataclass(frozen=True)
class OperatorBlock:
    """Matrix elements of an operator on the degree-``N`` harmonic space.

    ``family`` is ``"multiplication"``, ``"diagonal-symbol"``,
    ``"identity"`` or ``"fourier-band"``; ``band`` records ``n`` for the last.
    """

    degree: int
    elements: np.ndarray
    omega: float
    family: str
    label: str = ""
    band: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return 2 * self.degree + 1

    def is_diagonal(self) -> bool:
        off = self.elements - np.diag(np.diag(self.elements))
        return not np.any(off)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.elements).copy()


# Named real multipliers on S^2: callable(theta, phi) and spherical-polynomial
# degree (None when not a polynomial; the default effective band limit applies).
MULTIPLIERS: dict[str, tuple[Callable, int | None]] = {
    "one": (lambda th, ph: np.ones(np.broadcast(th, ph).shape), 0),
    "cos_theta": (lambda th, ph: np.cos(th) + 0.0 * ph, 1),
    "xz": (lambda th, ph: np.sin(th) * np.cos(th) * np.cos(ph), 2),
    "y2_plus_z": (lambda th, ph: (np.sin(th) * np.sin(ph)) ** 2 + np.cos(th), 2),
    "sin2_theta_cos_2phi": (lambda th, ph: np.sin(th) ** 2 * np.cos(2 * ph), 2),
    "cos_theta_cos_phi": (lambda th, ph: np.cos(th) * np.cos(ph), None),
    "phi_bump": (lambda th, ph: _wrapped_gaussian(ph, 0.2) + 0.0 * th, None),
}


def _wrapped_gaussian(phi, width):
    """Periodic Gaussian bump of the given width centered at ``phi = pi``."""
    out = np.zeros(np.shape(phi))
    for j in range(-3, 4):
        out = out + np.exp(-((phi - math.pi - 2 * math.pi * j) ** 2) / (2 * width ** 2))
    return out


def _multiplier_values(f, grid: SphericalGrid) -> np.ndarray:
    th = grid.theta[:, None]
    ph = grid.phi[None, :]
    if callable(f):
        vals = np.asarray(f(th, ph))
        return np.broadcast_to(vals, (grid.n_theta, grid.n_phi)).astype(np.complex128)
    # dict {(l, m): c}: f = sum c * Y_l^m
    vals = np.zeros((grid.n_theta, grid.n_phi), dtype=np.complex128)
    for (l, m), c in f.items():
        if abs(m) > l:
            raise ValidationError(f"invalid harmonic index ({l}, {m})")
        p = eval_degree(l, grid.x)[m + l]
        vals += c * p[:, None] * np.exp(1j * m * grid.phi)[None, :]
    return vals


def _band_limit_of(f, band_limit):
    if band_limit is not None:
        return int(band_limit)
    if callable(f):
        return DEFAULT_BAND_LIMIT
    return max((l for l, _ in f), default=0)


def mult_operator_block(f, N: int, grid: SphericalGrid | None = None,
                        band_limit: int | None = None, label: str = "") -> OperatorBlock:
    """Block of the multiplication operator by ``f`` on degree ``N``.

    Parameters
    ----------
    f : callable or dict
        ``f(theta, phi)`` broadcasting over arrays, or a mapping
        ``{(l, m): c}`` meaning ``f = sum c Y_l^m``.
    N : int
        Harmonic degree.
    grid : SphericalGrid, optional
        Quadrature grid; built from ``N`` and the band limit when omitted.
    band_limit : int, optional
        Spherical-polynomial degree of ``f``. For callables it is the
        caller's effective band limit (default 32); for coefficient dicts it
        defaults to the largest ``l``.

    Returns
    -------
    OperatorBlock
        ``elements[a, b] = integral f Y^alpha conj(Y^beta) dA`` and
        ``omega = (1/4pi) integral f dA``.
    """
    L = _band_limit_of(f, band_limit)
    if grid is None:
        grid = build_grid(N, L)
    elif not grid.supports(N, L):
        raise ValidationError(
            f"grid ({grid.n_theta} x {grid.n_phi}) cannot integrate degree {N} products "
            f"against band limit {L}; need ({N + (L + 1) // 2 + 1} x {2 * N + L + 1})"
        )
    fv = _multiplier_values(f, grid)
    d = 2 * N + 1
    P = eval_degree(N, grid.x)  # (d, n_theta)
    shifts = np.arange(-2 * N, 2 * N + 1)
    # G[i, s] = w_phi * sum_j f(theta_i, phi_j) exp(i s phi_j), s = alpha - beta
    dft = np.exp(1j * grid.phi[:, None] * shifts[None, :])
    G = grid.w_phi * (fv @ dft)
    # azimuthal modes absent from f come out at rounding level; make them exact
    # zeros so rotation-invariant multipliers give exactly diagonal blocks
    mode = np.abs(G).max(axis=0)
    G[:, mode <= 1e-13 * max(mode.max(), 1e-300)] = 0.0
    a = np.arange(d)
    idx = a[:, None] - a[None, :] + 2 * N
    elements = np.zeros((d, d), dtype=np.complex128)
    for i in range(grid.n_theta):
        elements += (grid.w_theta[i] * np.outer(P[:, i], P[:, i])) * G[i, idx]
    # mode-0 column of G gives the full integral; reuse it so a cleaned mode stays zero
    omega_c = complex(grid.w_theta @ G[:, 2 * N]) / FOUR_PI
    omega = float(omega_c.real) if abs(omega_c.imag) <= 1e-12 * max(1.0, abs(omega_c)) else complex(omega_c)
    return OperatorBlock(N, elements, omega, "multiplication", label=label,
                         meta={"band_limit": L, "grid": (grid.n_theta, grid.n_phi)})


def diagonal_symbol_block(g: Callable[[np.ndarray], np.ndarray], N: int, label: str = "") -> OperatorBlock:
    """Rotationally invariant block ``g(L_z / (N + 1/2))``.

    Diagonal entries are ``g(alpha / (N + 1/2))``; ``omega`` is the Weyl
    limit ``(1/2) * integral_{-1}^{1} g``.
    """
    if N < 0:
        raise ValidationError(f"degree must be nonnegative, got {N}")
    alpha = np.arange(-N, N + 1)
    diag = np.asarray(g(alpha / (N + 0.5)), dtype=np.float64) * np.ones(2 * N + 1)
    val, _ = integrate.quad(lambda s: float(g(np.float64(s))), -1.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return OperatorBlock(N, np.diag(diag).astype(np.complex128), 0.5 * val, "diagonal-symbol", label=label)


def identity_block(N: int) -> OperatorBlock:
    d = 2 * N + 1
    return OperatorBlock(N, np.eye(d, dtype=np.complex128), 1.0, "identity", label="one")


def fourier_band(block: OperatorBlock, n: int) -> OperatorBlock:
    """Keep only the entries with ``alpha - beta = n``.

    The band's ``omega`` is the parent's for ``n = 0`` and zero otherwise.
    """
    N = block.degree
    if abs(n) > 2 * N:
        raise ValidationError(f"band index {n} out of range for degree {N}")
    d = block.dim
    mask = np.eye(d, k=-n, dtype=bool)
    elements = np.where(mask, block.elements, 0.0)
    omega = block.omega if n == 0 else 0.0
    return OperatorBlock(N, elements, omega, "fourier-band", label=block.label, band=n,
                         meta={"parent": block.family})


def weyl_trace(block: OperatorBlock, imag_tol: float = 1e-12) -> float:
    """Normalized trace ``(1/d) tr`` of the block.

    Raises ``ValidationError`` if the imaginary part exceeds ``imag_tol``
    (relative to ``max(1, |trace|)``), which signals a non-real generator.
    """
    tr = np.trace(block.elements) / block.dim
    if abs(tr.imag) > imag_tol * max(1.0, abs(tr)):
        raise ValidationError(f"block trace has imaginary part {tr.imag:.3e}")
    return float(tr.real)


def fourier_norm_profile(f: Callable, n_max: int, n_theta: int = 65, n_phi: int | None = None) -> np.ndarray:
    """Operator norms of the azimuthal Fourier bands of a multiplication operator.

    For multiplication by ``f`` the ``n``-th band is multiplication by
    ``f_{-n}(theta) exp(-i n phi)``, where ``f_m`` is the ``m``-th azimuthal
    Fourier coefficient, so its norm is ``sup_theta |f_{-n}(theta)|``.
    Returns the array of norms for ``n = -n_max..n_max``.
    """
    if n_phi is None:
        n_phi = max(256, 4 * n_max + 1)
    th = np.linspace(0.0, math.pi, n_theta)
    ph = 2.0 * math.pi * np.arange(n_phi) / n_phi
    vals = np.asarray(f(th[:, None], ph[None, :]), dtype=np.complex128)
    vals = np.broadcast_to(vals, (n_theta, n_phi))
    coef = np.fft.fft(vals, axis=1) / n_phi  # coef[:, m] = f_m
    ns = np.arange(-n_max, n_max + 1)
    return np.max(np.abs(coef[:, (-ns) % n_phi]), axis=0)


def save_block(block: OperatorBlock, path) -> None:
    """Write a block as portable text: a short header then ``alpha,beta,re,im`` rows."""
    N = block.degree
    lines = [
        "# wignerqe operator block v1",
        f"degree,{N}",
        f"omega,{_fmt(complex(block.omega).real)},{_fmt(complex(block.omega).imag)}",
        f"family,{block.family}",
        f"band,{'' if block.band is None else block.band}",
        "alpha,beta,re,im",
    ]
    el = block.elements
    for a in range(block.dim):
        for b in range(block.dim):
            z = el[a, b]
            lines.append(f"{a - N},{b - N},{_fmt(z.real)},{_fmt(z.imag)}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_block(path) -> OperatorBlock:
    with open(path) as fh:
        rows = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    head = {}
    i = 0
    while not rows[i].startswith("alpha,"):
        key, *rest = rows[i].split(",")
        head[key] = rest
        i += 1
    N = int(head["degree"][0])
    d = 2 * N + 1
    el = np.zeros((d, d), dtype=np.complex128)
    for line in rows[i + 1:]:
        a, b, re, im = line.split(",")
        el[int(a) + N, int(b) + N] = complex(float(re), float(im))
    ore, oim = (float(v) for v in head["omega"])
    omega = ore if oim == 0.0 else complex(ore, oim)
    band = head.get("band", [""])[0]
    return OperatorBlock(N, el, omega, head["family"][0], band=int(band) if band else None)


def _fmt(x: float) -> str:
    return repr(float(x))
