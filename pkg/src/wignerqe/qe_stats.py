"""Eigenvector statistics: the index set ``T``, the variance ``X_N``, its
Fourier-band pieces ``W_N(n)``, the rotation-invariant decomposition, the
local statistic and the moment estimators, plus series aggregation.

Eigenvectors are the rows of ``U`` (``U[k, a] = u_k(alpha)`` with storage
index ``a = alpha + N``). Block elements follow ``A[a, b] = <A Y^alpha, Y^beta>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .oracle import MomentPattern
from .sphere import OperatorBlock

__all__ = [
    "IndexSetT",
    "build_index_set",
    "diagonal_quadratic_forms",
    "qe_statistic",
    "band_forms",
    "band_statistic",
    "band_statistics",
    "band_limit",
    "RotInvTerms",
    "rotinv_decomposition",
    "local_que_statistic",
    "local_que_values",
    "MomentEstimate",
    "empirical_moment",
    "pattern_values",
    "entry_tuples",
    "scale_factor",
    "mean_se",
    "aggregate_series",
    "LogLogFit",
    "loglog_fit",
    "QEReport",
    "qe_report",
    "report_columns",
]

SCALINGS = ("sqrt_2d", "sqrt_d", "sqrt_2N")


# -- index set ---------------------------------------------------------------

@dataclass(frozen=True)
class IndexSetT:
    """Bulk and edge eigenvector indices ``k`` in ``[-N, N]``."""

    N: int
    nu: float
    members: np.ndarray

    @property
    def d(self) -> int:
        return 2 * self.N + 1

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    @property
    def storage(self) -> np.ndarray:
        """Row indices into ``U`` (``k + N``)."""
        return self.members + self.N

    @property
    def density(self) -> float:
        return self.size / self.d


def _ceil_power(N: int, p: float) -> int:
    x = float(N) ** p
    r = round(x)
    if abs(x - r) < 1e-9 * max(x, 1.0):
        return int(r)
    return math.ceil(x)


def build_index_set(N: int, nu: float = 0.25) -> IndexSetT:
    """Edges of width ``floor(N^(1/4))`` and the bulk ``|k| <= N - ceil(N^(1-nu))``.

    Examples
    --------
    >>> build_index_set(16, 0.25).size
    23
    """
    if not 0.0 < nu < 0.75:
        raise ValidationError(f"nu must lie in (0, 3/4), got {nu}")
    if N < 0:
        raise ValidationError(f"degree must be nonnegative, got {N}")
    edge = math.isqrt(math.isqrt(N))
    cut = _ceil_power(N, 1.0 - nu) if N > 0 else 0
    mask = np.zeros(2 * N + 1, dtype=bool)
    mask[0:edge + 1] = True
    mask[2 * N - edge:] = True
    if cut <= N:
        mask[cut:2 * N + 1 - cut] = True
    members = np.flatnonzero(mask) - N
    return IndexSetT(N, float(nu), members)


# -- quadratic forms ---------------------------------------------------------

def _check_dims(block: OperatorBlock, U: np.ndarray, T: IndexSetT | None = None) -> None:
    d = block.dim
    if U.ndim != 2 or U.shape != (d, d):
        raise ValidationError(f"unitary of shape {U.shape} does not match block dimension {d}")
    if T is not None and T.N != block.degree:
        raise ValidationError(f"index set degree {T.N} != block degree {block.degree}")


def diagonal_quadratic_forms(block: OperatorBlock, U) -> np.ndarray:
    """``q_k = sum_{a,b} A[a, b] u_k(a) conj(u_k(b))`` for every row ``k``."""
    U = np.asarray(U)
    _check_dims(block, U)
    if block.is_diagonal():
        return (np.abs(U) ** 2) @ block.diagonal()
    return ((U @ block.elements) * U.conj()).sum(axis=1)


def _variance(q: np.ndarray, omega: complex, T: IndexSetT, d: int) -> float:
    r = q[T.storage] - omega
    return float(np.sum(r.real ** 2 + r.imag ** 2) / d)


def qe_statistic(block: OperatorBlock, U, T: IndexSetT) -> float:
    """``X_N = (1/d) sum_{k in T} |q_k - omega|^2``; normalized by ``d``, not ``|T|``."""
    U = np.asarray(U)
    _check_dims(block, U, T)
    return _variance(diagonal_quadratic_forms(block, U), block.omega, T, block.dim)


def band_forms(block: OperatorBlock, U, n: int) -> np.ndarray:
    """Quadratic forms of the band ``alpha - beta = n`` without forming the band block."""
    U = np.asarray(U)
    d = block.dim
    if abs(n) >= d:
        return np.zeros(d, dtype=np.complex128)
    vals = np.diagonal(block.elements, -n)
    if n >= 0:
        return (U[:, n:] * vals * U[:, :d - n].conj()).sum(axis=1)
    m = -n
    return (U[:, :d - m] * vals * U[:, m:].conj()).sum(axis=1)


def band_limit(block: OperatorBlock, rtol: float = 1e-13) -> int:
    """Largest ``|alpha - beta|`` carrying an entry above ``rtol * max|A|``."""
    mag = np.abs(block.elements)
    a, b = np.nonzero(mag > rtol * mag.max()) if mag.size else ((), ())
    a, b = np.asarray(a), np.asarray(b)
    return int(np.max(np.abs(a - b))) if a.size else 0


def band_statistic(block: OperatorBlock, U, T: IndexSetT, n: int) -> float:
    """``W_N(n)``: the variance statistic of the ``n``-th Fourier band."""
    U = np.asarray(U)
    _check_dims(block, U, T)
    if abs(n) > 2 * block.degree:
        raise ValidationError(f"band index {n} out of range for degree {block.degree}")
    omega = block.omega if n == 0 else 0.0
    return _variance(band_forms(block, U, n), omega, T, block.dim)


def band_statistics(block: OperatorBlock, U, T: IndexSetT, L: int | None = None) -> dict:
    """``{n: W_N(n)}`` for ``|n| <= L`` (default: the block's band limit)."""
    U = np.asarray(U)
    _check_dims(block, U, T)
    if L is None:
        L = band_limit(block)
    out = {}
    for n in range(-L, L + 1):
        omega = block.omega if n == 0 else 0.0
        out[n] = _variance(band_forms(block, U, n), omega, T, block.dim)
    return out


def band_cross_remainder(block: OperatorBlock, U, T: IndexSetT) -> float:
    """``X_N - sum_n W_N(n)``: the cross-band interference for one draw.

    Equals ``(2/d) sum_{k in T} sum_{n < n'} Re[(q^n_k - w_n) conj(q^n'_k - w_n')]``;
    it vanishes in expectation under Haar rows but not draw by draw.
    """
    x = qe_statistic(block, U, T)
    return x - sum(band_statistics(block, U, T, 2 * block.degree).values())


# -- rotationally invariant blocks -------------------------------------------

@dataclass(frozen=True)
class RotInvTerms:
    Z: float
    S1: float
    S2: float
    T1: float
    T2: float
    T3: float
    T4: float
    T5: float

    @property
    def S(self) -> tuple:
        return (self.S1, self.S2)

    @property
    def T(self) -> tuple:
        return (self.T1, self.T2, self.T3, self.T4, self.T5)


def rotinv_decomposition(block: OperatorBlock, U, T: IndexSetT) -> RotInvTerms:
    """``Z_N`` and its expansions ``S1 + S2`` and ``T1 + ... + T5 = Z_N^2``.

    With ``q_k = sum_a b_a |u_k(a)|^2``, ``A1 = sum_T q_k`` and
    ``A2 = sum_T q_k^2``, each term of the quadruple sums factors:
    ``S1 = A2/d``, ``T1 = A2^2/d^2``, ``T2 = -4 w A1 A2/d^2`` and so on.
    """
    U = np.asarray(U)
    _check_dims(block, U, T)
    if not block.is_diagonal():
        raise ValidationError("rotinv_decomposition needs a diagonal block")
    b = block.diagonal()
    if np.any(b.imag != 0):
        raise ValidationError("diagonal block must be real")
    b = b.real
    w = float(np.real(block.omega))
    d = block.dim
    q = ((np.abs(U[T.storage]) ** 2) @ b)
    t = T.size
    a1 = float(q.sum())
    a2 = float((q * q).sum())
    z = float(((q - w) ** 2).sum() / d)
    d2 = float(d * d)
    return RotInvTerms(
        Z=z,
        S1=a2 / d,
        S2=(-2.0 * w * a1 + t * w * w) / d,
        T1=a2 * a2 / d2,
        T2=-4.0 * w * a2 * a1 / d2,
        T3=2.0 * w * w * t * a2 / d2,
        T4=4.0 * w * w * a1 * a1 / d2,
        T5=(-4.0 * w ** 3 * t * a1 + t * t * w ** 4) / d2,
    )


# -- local statistic ---------------------------------------------------------

def _check_weights(a: np.ndarray) -> int:
    support = int(np.count_nonzero(a))
    if support < 1:
        raise ValidationError("test weights must have nonempty support")
    if abs(a.sum()) > 1e-12:
        raise ValidationError(f"test weights must have zero mean, sum is {a.sum():.3g}")
    if np.any(np.abs(a) > 1.0):
        raise ValidationError("test weights must lie in [-1, 1]")
    return support


def local_que_statistic(u, a) -> float:
    """``(d/|a|) sum_a a(alpha) |u(alpha)|^2`` with ``|a|`` the support size."""
    u = np.asarray(u)
    a = np.asarray(a, dtype=np.float64)
    if u.shape != a.shape:
        raise ValidationError(f"vector shape {u.shape} != weight shape {a.shape}")
    support = _check_weights(a)
    return float(u.shape[0] / support * np.dot(np.abs(u) ** 2, a))


def local_que_values(U, a, rows=None) -> np.ndarray:
    """The local statistic for each row of ``U`` (or the selected ``rows``)."""
    U = np.asarray(U)
    a = np.asarray(a, dtype=np.float64)
    if U.shape[1] != a.shape[0]:
        raise ValidationError(f"vector length {U.shape[1]} != weight length {a.shape[0]}")
    support = _check_weights(a)
    if rows is not None:
        U = U[rows]
    return U.shape[1] / support * ((np.abs(U) ** 2) @ a)


def balanced_weights(d: int, support: int, offset: int = 0) -> np.ndarray:
    """``+1`` on ``support/2`` consecutive entries then ``-1`` on the next ``support/2``."""
    if support % 2 or not 2 <= support <= d:
        raise ValidationError(f"support must be even and in [2, {d}], got {support}")
    a = np.zeros(d)
    idx = (offset + np.arange(support)) % d
    a[idx[: support // 2]] = 1.0
    a[idx[support // 2:]] = -1.0
    return a


# -- moments -----------------------------------------------------------------

@dataclass(frozen=True)
class MomentEstimate:
    value: complex
    se: float
    n: int


def scale_factor(N: int, scaling: str = "sqrt_2d") -> float:
    """Entry scaling: ``sqrt(2 d_N)`` (default), ``sqrt(d_N)`` or ``sqrt(2N)``.

    ``sqrt(2 d_N)`` matches complex Gaussians with ``E|g|^2 = 2``.
    """
    d = 2 * N + 1
    if scaling == "sqrt_2d":
        return math.sqrt(2.0 * d)
    if scaling == "sqrt_d":
        return math.sqrt(d)
    if scaling == "sqrt_2N":
        if N < 1:
            raise ValidationError("sqrt_2N scaling needs N >= 1")
        return math.sqrt(2.0 * N)
    raise ValidationError(f"unknown scaling {scaling!r}; choose from {SCALINGS}")


def entry_tuples(U, T: IndexSetT, columns, scale: float, phase: float = 0.0) -> np.ndarray:
    """Scaled entry tuples ``(s e^{i phase} u_k(alpha_j + t))_j`` for ``k in T`` and every cyclic shift ``t``.

    Returns an array of shape ``(|T| * d, len(columns))``.
    """
    U = np.asarray(U)
    d = U.shape[1]
    rows = U[T.storage] * (scale * np.exp(1j * phase))
    cols = (np.arange(d)[:, None] + np.asarray(columns)[None, :]) % d
    return rows[:, cols].reshape(-1, len(columns))


def pattern_values(pattern: MomentPattern, tuples) -> np.ndarray:
    """Evaluate the monomial on each tuple; slot ``(k, j)`` reads position ``j``."""
    z = np.asarray(tuples)
    out = np.ones(z.shape[:-1], dtype=np.complex128)
    for _, j in pattern.unconj:
        out = out * z[..., j]
    for _, j in pattern.conj:
        out = out * z[..., j].conj()
    return out


def mean_se(values) -> tuple:
    """Mean and standard error (real and imaginary variances combined)."""
    v = np.asarray(values)
    n = v.shape[0]
    if n == 0:
        raise ValidationError("no samples")
    mean = v.mean()
    if n < 2:
        return mean, float("nan")
    if np.iscomplexobj(v):
        var = v.real.var(ddof=1) + v.imag.var(ddof=1)
    else:
        var = v.var(ddof=1)
    return mean, math.sqrt(var / n)


def empirical_moment(pattern: MomentPattern, samples) -> MomentEstimate:
    """Sample mean of the monomial with its standard error.

    ``samples`` has shape ``(n_draws, L)`` or ``(n_draws, n_sub, L)``; sub-samples
    of one draw are averaged first so the error reflects draw-to-draw spread.
    """
    z = np.asarray(samples)
    if z.size == 0 or z.shape[0] == 0:
        raise ValidationError("empirical_moment needs at least one sample")
    vals = pattern_values(pattern, z)
    if vals.ndim == 2:
        vals = vals.mean(axis=1)
    mean, se = mean_se(vals)
    return MomentEstimate(complex(mean), se, int(vals.shape[0]))


# -- aggregation -------------------------------------------------------------

def aggregate_series(means, variances) -> tuple:
    """Cesaro means and Kolmogorov partial sums over ``N = 0, 1, ...``.

    ``cesaro[M] = (1/M) sum_{N <= M} means[N]`` (``cesaro[0] = means[0]``) and
    ``kolmogorov[M] = sum_{1 <= N <= M} variances[N] / N^2``.
    """
    x = np.asarray(means, dtype=np.float64)
    v = np.asarray(variances, dtype=np.float64)
    if x.shape != v.shape:
        raise ValidationError("means and variances must have equal length")
    csum = np.cumsum(x)
    M = np.arange(x.shape[0], dtype=np.float64)
    cesaro = csum / np.maximum(M, 1.0)
    inc = np.zeros_like(v)
    inc[1:] = v[1:] / M[1:] ** 2
    return cesaro, np.cumsum(inc)


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r2: float


def loglog_fit(pairs, labels=None) -> LogLogFit:
    """Least squares of ``log value`` on ``log d``."""
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 3:
        raise ValidationError("loglog_fit needs at least 3 (d, value) pairs")
    labels = list(labels) if labels is not None else [int((x - 1) // 2) for x in arr[:, 0]]
    for lab, (x, y) in zip(labels, arr):
        if not (y > 0) or not (x > 0):
            raise ValidationError(f"nonpositive value {y!r} at N={lab}")
    lx, ly = np.log(arr[:, 0]), np.log(arr[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return LogLogFit(float(slope), float(intercept), r2)


# -- per-draw report ---------------------------------------------------------

@dataclass
class QEReport:
    N: int
    draw: int
    X: float
    Z: float | None = None
    S_terms: tuple | None = None
    T_terms: tuple | None = None
    W: dict = field(default_factory=dict)
    local_que: list = field(default_factory=list)
    notes: str = ""

    def row(self, L: int, n_que: int) -> list:
        nan = float("nan")
        s = self.S_terms or (nan, nan)
        t = self.T_terms or (nan,) * 5
        w = [self.W.get(n, nan) for n in range(-L, L + 1)]
        que = list(self.local_que) + [nan] * (n_que - len(self.local_que))
        z = nan if self.Z is None else self.Z
        return [self.N, self.draw, self.X, z, *s, *t, *w, *que[:n_que]]


def report_columns(L: int, n_que: int) -> list:
    return (["N", "draw", "X", "Z", "S1", "S2", "T1", "T2", "T3", "T4", "T5"]
            + [f"W_{n}" for n in range(-L, L + 1)]
            + [f"que_{i}" for i in range(n_que)])


def qe_report(block: OperatorBlock, U, T: IndexSetT, L: int, draw: int = 0,
              que_weights=()) -> QEReport:
    """Every statistic of one draw; ``que_weights`` gives the local-statistic tests.

    Each local entry is the largest ``|stat|`` over rows ``k in T``.
    """
    U = np.asarray(U)
    x = qe_statistic(block, U, T)
    rep = QEReport(block.degree, draw, x)
    rep.W = band_statistics(block, U, T, L)
    if block.is_diagonal():
        terms = rotinv_decomposition(block, U, T)
        rep.Z = terms.Z
        rep.S_terms = terms.S
        rep.T_terms = terms.T
    rep.local_que = [float(np.max(np.abs(local_que_values(U, a, T.storage)))) for a in que_weights]
    return rep
