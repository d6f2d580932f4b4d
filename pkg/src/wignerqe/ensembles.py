"""Generalized Wigner ensembles.

A generalized Wigner matrix has independent centered entries on and above the
diagonal with variances ``sigma2[j, k]`` whose columns sum to one and whose
entries are of order ``1/d``. The entry law is one of three unit-variance
laws, scaled entrywise by ``sqrt(sigma2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "ENTRY_LAWS",
    "VarianceProfile",
    "WignerEnsembleSpec",
    "EnsembleDiagnostics",
    "make_profile",
    "sample_wigner",
    "validate_ensemble",
    "gue_spec",
]

ENTRY_LAWS = ("complex-gaussian", "complex-rademacher", "complex-uniform")

_SQRT3 = math.sqrt(3.0)
# standard errors below rounding level (e.g. exact column norms of sign
# matrices) are floored so z-scores stay finite
_SE_FLOOR = 1e-12


@dataclass(frozen=True)
class VarianceProfile:
    """Symmetric matrix of entry variances with unit column sums."""

    sigma2: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma2, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] == 0:
            raise ValidationError(f"variance profile must be square, got {s.shape}")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValidationError("variance profile entries must be finite and nonnegative")
        if not np.allclose(s, s.T, rtol=0.0, atol=1e-14):
            raise ValidationError("variance profile must be symmetric")
        object.__setattr__(self, "sigma2", s)

    @property
    def dim(self) -> int:
        return self.sigma2.shape[0]

    def column_sums(self) -> np.ndarray:
        return self.sigma2.sum(axis=0)

    def check(self, c1: float, tol: float = 1e-12) -> None:
        """Raise ``ValidationError`` unless both profile invariants hold."""
        d = self.dim
        sums = self.column_sums()
        if np.max(np.abs(sums - 1.0)) > tol:
            raise ValidationError(
                f"normalization: column sums must equal 1, max deviation "
                f"{np.max(np.abs(sums - 1.0)):.3e}"
            )
        lo, hi = 1.0 / (c1 * d), c1 / d
        if self.sigma2.min() < lo * (1 - tol) or self.sigma2.max() > hi * (1 + tol):
            raise ValidationError(
                f"bounds: entries must lie in [{lo:.4g}, {hi:.4g}] for c1={c1}, "
                f"got [{self.sigma2.min():.4g}, {self.sigma2.max():.4g}]"
            )


def make_profile(kind: str, d: int, params=(), c1: float = 4.0) -> VarianceProfile:
    """Build a variance profile of the given family.

    ``flat``
        ``1/d`` everywhere.
    ``banded`` with ``params = (w, width)``
        ``(1 - w)/d`` plus ``w`` times a cyclic band indicator of half-width
        ``width``, normalized so every column of the band sums to one.
    ``two-block`` with ``params = (rho,)``
        Off-block entries ``(1 - rho)/d``; inside each of the two diagonal
        blocks a constant chosen so columns sum to one, which is
        ``(1 + rho)/d`` when ``d`` is even.

    The result is checked against the column-sum and ``c1`` bounds.
    """
    if d < 1:
        raise ValidationError(f"dimension must be positive, got {d}")
    params = tuple(float(p) for p in params)
    if kind == "flat":
        s = np.full((d, d), 1.0 / d)
    elif kind == "banded":
        if len(params) != 2:
            raise ValidationError("banded profile takes params (w, width)")
        w, width = params[0], int(params[1])
        if not 0.0 <= w < 1.0 or width < 0 or 2 * width + 1 > d:
            raise ValidationError(f"banded: need 0 <= w < 1 and 2*width+1 <= d, got w={w}, width={width}")
        idx = np.arange(d)
        dist = np.abs(idx[:, None] - idx[None, :])
        dist = np.minimum(dist, d - dist)
        band = (dist <= width).astype(np.float64) / (2 * width + 1)
        s = (1.0 - w) / d + w * band
    elif kind == "two-block":
        if len(params) != 1:
            raise ValidationError("two-block profile takes params (rho,)")
        rho = params[0]
        if not 0.0 <= rho < 1.0 or d < 2:
            raise ValidationError(f"two-block: need 0 <= rho < 1 and d >= 2, got rho={rho}, d={d}")
        n1 = (d + 1) // 2
        n2 = d - n1
        off = (1.0 - rho) / d
        s = np.full((d, d), off)
        s[:n1, :n1] = (1.0 - n2 * off) / n1
        s[n1:, n1:] = (1.0 - n1 * off) / n2
    else:
        raise ValidationError(f"unknown profile kind {kind!r}")
    prof = VarianceProfile(s)
    prof.check(c1)
    return prof


@dataclass(frozen=True)
class WignerEnsembleSpec:
    """Entry law plus variance profile.

    ``profile`` may be a fixed ``VarianceProfile`` or a profile family name
    (``"flat"``, ``"banded"``, ``"two-block"``) instantiated per dimension
    with ``params``.
    """

    entry_law: str = "complex-gaussian"
    profile: object = "flat"
    params: tuple = ()
    c1: float = 4.0
    c2: float = 0.25
    check_profile: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.entry_law not in ENTRY_LAWS:
            raise ValidationError(f"unknown entry law {self.entry_law!r}; expected one of {ENTRY_LAWS}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValidationError("c1 and c2 must be positive")

    def profile_for(self, d: int) -> VarianceProfile:
        if isinstance(self.profile, VarianceProfile):
            if self.profile.dim != d:
                raise ValidationError(f"profile has dimension {self.profile.dim}, requested {d}")
            if self.check_profile:
                self.profile.check(self.c1)
            return self.profile
        return make_profile(self.profile, d, self.params, c1=self.c1)

    def moment_bound(self, q: int) -> float:
        """Upper bound ``C_q`` on ``E|sqrt(d) h|^q`` implied by the law and ``c1``."""
        return self.c1 ** (q / 2) * max(_unit_moment(self.entry_law, q, diag=True),
                                        _unit_moment(self.entry_law, q, diag=False))


def gue_spec() -> WignerEnsembleSpec:
    """Flat complex-Gaussian ensemble, i.e. the GUE normalized to unit column sums."""
    return WignerEnsembleSpec("complex-gaussian", "flat")


def _unit_moment(law: str, q: int, diag: bool) -> float:
    """``E|xi|^q`` for the unit-variance law (real on the diagonal)."""
    if law == "complex-gaussian":
        # real N(0,1) on the diagonal; |xi|^2 ~ Exp(1) off it
        return _gauss_abs_moment(q) if diag else math.gamma(q / 2 + 1)
    if law == "complex-rademacher":
        return 1.0
    # uniform on [-sqrt3, sqrt3] per real component, components scaled by 1/sqrt2
    if diag:
        return _SQRT3 ** q / (q + 1)
    if q % 2:
        raise ValidationError("complex-uniform moment bound is tabulated for even q only")
    half = q // 2

    def even(j):
        return 3.0 ** j / (2 * j + 1)

    total = sum(math.comb(half, j) * even(j) * even(half - j) for j in range(half + 1))
    return total / 2.0 ** half


def _gauss_abs_moment(q: int) -> float:
    return 2 ** (q / 2) * math.gamma((q + 1) / 2) / math.sqrt(math.pi)


def _unit_entries(law: str, d: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix of unit-variance entries (real on the diagonal)."""
    if law == "complex-gaussian":
        re = rng.standard_normal((d, d))
        im = rng.standard_normal((d, d))
        dg = rng.standard_normal(d)
    elif law == "complex-rademacher":
        re = rng.integers(0, 2, size=(d, d)) * 2.0 - 1.0
        im = rng.integers(0, 2, size=(d, d)) * 2.0 - 1.0
        dg = rng.integers(0, 2, size=d) * 2.0 - 1.0
    else:
        re = rng.uniform(-_SQRT3, _SQRT3, size=(d, d))
        im = rng.uniform(-_SQRT3, _SQRT3, size=(d, d))
        dg = rng.uniform(-_SQRT3, _SQRT3, size=d)
    x = np.triu((re + 1j * im) / math.sqrt(2.0), k=1)
    x = x + x.conj().T
    x[np.diag_indices(d)] = dg
    return x


def sample_wigner(spec: WignerEnsembleSpec, d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one generalized Wigner matrix of dimension ``d``.

    Entries above the diagonal are independent with ``E h = 0`` and
    ``E|h_jk|^2 = sigma2[j, k]``; the diagonal is real with variance
    ``sigma2[j, j]``; the lower triangle is the conjugate mirror, so the
    result is exactly Hermitian.
    """
    prof = spec.profile_for(d)
    return _unit_entries(spec.entry_law, d, rng) * np.sqrt(prof.sigma2)


@dataclass
class EnsembleDiagnostics:
    """Monte Carlo check of the four generalized Wigner conditions.

    Each ``*_z`` value is the worst standardized deviation found for that
    condition; ``failed`` lists the conditions beyond ``threshold`` standard
    errors.
    """

    n_samples: int
    mean_z: float
    normalization_z: float
    bounds_z: float
    nondegeneracy_min: float
    nondegeneracy_z: float
    moments: dict
    moments_z: float
    threshold: float = 4.0
    failed: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failed


def validate_ensemble(spec: WignerEnsembleSpec, d: int, n_samples: int,
                      rng: np.random.Generator, threshold: float = 4.0) -> EnsembleDiagnostics:
    """Estimate the entry statistics of ``spec`` at dimension ``d`` and test them.

    Checked, each against ``threshold`` standard errors:

    * ``mean``: every column sum ``sum_j h_jk`` has mean zero;
    * ``normalization``: every ``sum_j |h_jk|^2`` has mean one;
    * ``bounds``: every ``E|h_jk|^2`` lies in ``[1/(c1 d), c1/d]``;
    * ``nondegeneracy``: the smallest eigenvalue of ``d`` times the 2x2
      covariance of ``(Re h_jk, Im h_jk)`` is at least ``c2`` for ``j != k``
      (diagonal entries of a Hermitian matrix are real, so the condition is
      only meaningful off the diagonal);
    * ``moments``: ``E|sqrt(d) h_jk|^q <= C_q`` for ``q = 2, 4, 6, 8``.

    The profile is not re-checked, so a deliberately defective profile is
    sampled as given.
    """
    if n_samples < 1000:
        raise ValidationError(f"validate_ensemble needs n_samples >= 1000, got {n_samples}")
    if isinstance(spec.profile, VarianceProfile):
        prof = spec.profile
        if prof.dim != d:
            raise ValidationError(f"profile has dimension {prof.dim}, requested {d}")
    else:
        prof = spec.profile_for(d)
    root = np.sqrt(prof.sigma2)
    n = n_samples
    iu = np.triu_indices(d, k=1)
    colsum = np.empty((n, d), dtype=np.complex128)
    colnorm = np.empty((n, d))
    abs2 = np.zeros((d, d))
    abs2_sq = np.zeros((d, d))
    re_im = np.zeros((3, len(iu[0])))  # sums of re^2, im^2, re*im
    mom = {q: np.zeros((d, d)) for q in (2, 4, 6, 8)}
    mom_sq = {q: np.zeros((d, d)) for q in (2, 4, 6, 8)}
    ri_samples = np.empty((n, 2, len(iu[0])))
    for t in range(n):
        h = _unit_entries(spec.entry_law, d, rng) * root
        colsum[t] = h.sum(axis=0)
        a2 = np.abs(h) ** 2
        colnorm[t] = a2.sum(axis=0)
        abs2 += a2
        abs2_sq += a2 * a2
        off = h[iu]
        ri_samples[t, 0] = off.real
        ri_samples[t, 1] = off.imag
        s = d * a2
        for q in mom:
            v = s ** (q / 2)
            mom[q] += v
            mom_sq[q] += v * v
    failed = []

    def zscore(mean, var):
        se = np.sqrt(np.maximum(var, 0.0) / n)
        return np.abs(mean) / np.maximum(se, _SE_FLOOR)

    cs_re = zscore(colsum.real.mean(0), colsum.real.var(0, ddof=1))
    cs_im = zscore(colsum.imag.mean(0), colsum.imag.var(0, ddof=1))
    mean_z = float(max(cs_re.max(), cs_im.max()))
    if mean_z > threshold:
        failed.append("mean")

    dev = colnorm.mean(0) - 1.0
    se = colnorm.std(0, ddof=1) / math.sqrt(n)
    norm_z = float(np.max(np.abs(dev) / np.maximum(se, _SE_FLOOR)))
    if norm_z > threshold:
        failed.append("normalization")

    m2 = abs2 / n
    se2 = np.sqrt(np.maximum(abs2_sq / n - m2 ** 2, 0.0) / n)
    lo, hi = 1.0 / (spec.c1 * d), spec.c1 / d
    below = (lo - m2) / np.maximum(se2, _SE_FLOOR)
    above = (m2 - hi) / np.maximum(se2, _SE_FLOOR)
    bounds_z = float(max(below.max(), above.max(), 0.0))
    if bounds_z > threshold:
        failed.append("bounds")

    x = ri_samples - ri_samples.mean(axis=0, keepdims=True)
    cxx = (x[:, 0] ** 2).mean(0)
    cyy = (x[:, 1] ** 2).mean(0)
    cxy = (x[:, 0] * x[:, 1]).mean(0)
    tr = cxx + cyy
    det = cxx * cyy - cxy ** 2
    lam = tr / 2 - np.sqrt(np.maximum(tr ** 2 / 4 - det, 0.0))
    # eigenvector of the smaller eigenvalue, for a delta-method standard error
    vx = np.where(np.abs(cxy) > 1e-300, cxy, np.where(cxx <= cyy, 1.0, 0.0))
    vy = np.where(np.abs(cxy) > 1e-300, lam - cxx, np.where(cxx <= cyy, 0.0, 1.0))
    vn = np.hypot(vx, vy)
    vx, vy = vx / vn, vy / vn
    proj2 = (x[:, 0] * vx + x[:, 1] * vy) ** 2
    lam_se = proj2.std(0, ddof=1) / math.sqrt(n)
    if len(lam):
        nd = d * lam
        nd_z = (spec.c2 - nd) / np.maximum(d * lam_se, _SE_FLOOR)
        nondeg_min = float(nd.min())
        nondeg_z = float(max(nd_z.max(), 0.0))
    else:
        nondeg_min, nondeg_z = math.inf, 0.0
    if nondeg_z > threshold:
        failed.append("nondegeneracy")

    moments = {}
    mom_z = 0.0
    for q in mom:
        mq = mom[q] / n
        seq = np.sqrt(np.maximum(mom_sq[q] / n - mq ** 2, 0.0) / n)
        cq = spec.moment_bound(q)
        moments[q] = float(mq.max())
        excess = (mq - cq) / np.maximum(seq, _SE_FLOOR)
        mom_z = max(mom_z, float(excess.max()), 0.0)
        if not np.all(np.isfinite(mq)):
            mom_z = math.inf
    if mom_z > threshold:
        failed.append("moments")

    return EnsembleDiagnostics(
        n_samples=n,
        mean_z=mean_z,
        normalization_z=norm_z,
        bounds_z=bounds_z,
        nondegeneracy_min=nondeg_min,
        nondegeneracy_z=nondeg_z,
        moments=moments,
        moments_z=mom_z,
        threshold=threshold,
        failed=failed,
    )
