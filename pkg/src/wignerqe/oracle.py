"""Exact reference moments for Haar unitaries and complex Gaussians.

Matrix indices here are plain 0-based ``(row, column)`` pairs. A row of a
Haar unitary is a uniform unit vector, so its squared moduli are
Dirichlet(1, ..., 1) distributed; that gives exact single-row moments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .linalg import haar_unitary

__all__ = [
    "MomentPattern",
    "dirichlet_moment",
    "weingarten_leading",
    "wick_moment",
    "haar_mc_moment",
    "haar_expected_rotinv",
    "same_row_pattern",
]

MAX_SLOTS = 8


@dataclass(frozen=True)
class MomentPattern:
    """Monomial ``prod U[k_i, a_i] * prod conj(U[k'_j, a'_j])``.

    ``unconj`` and ``conj`` are tuples of ``(row, column)`` index pairs.
    """

    unconj: tuple
    conj: tuple

    def __post_init__(self):
        object.__setattr__(self, "unconj", tuple(tuple(int(v) for v in s) for s in self.unconj))
        object.__setattr__(self, "conj", tuple(tuple(int(v) for v in s) for s in self.conj))

    @property
    def m(self) -> int:
        return len(self.unconj)

    @property
    def balanced(self) -> bool:
        return len(self.unconj) == len(self.conj)

    @property
    def columns(self) -> list:
        return sorted({a for _, a in self.unconj + self.conj})

    def shifted(self, row_shift: int, col_shift: int, d: int) -> "MomentPattern":
        def mv(s):
            return tuple(((k + row_shift) % d, (a + col_shift) % d) for k, a in s)
        return MomentPattern(mv(self.unconj), mv(self.conj))


def same_row_pattern(unconj_cols, conj_cols, row: int = 0) -> MomentPattern:
    """Pattern with every slot in the same row."""
    return MomentPattern(tuple((row, a) for a in unconj_cols), tuple((row, a) for a in conj_cols))


def dirichlet_moment(d: int, c) -> Fraction:
    """``E prod_i |u(a_i)|^(2 c_i)`` over distinct ``a_i`` for a Haar row.

    Equals ``prod c_i! (d-1)! / (d - 1 + sum c_i)!``.
    """
    c = [int(v) for v in c]
    if d < 1:
        raise ValidationError(f"dimension must be positive, got {d}")
    if any(v < 1 for v in c):
        raise ValidationError("exponents must be >= 1")
    if len(c) > d:
        raise ValidationError(f"{len(c)} distinct indices do not fit in dimension {d}")
    num = math.prod(math.factorial(v) for v in c) * math.factorial(d - 1)
    return Fraction(num, math.factorial(d - 1 + sum(c)))


def weingarten_leading(pattern: MomentPattern, d: int) -> float:
    """Leading Weingarten term ``d^-m * #{permutations pairing slots exactly}``.

    The ``O(d^(-m-1))`` remainder is not included. Unbalanced patterns give 0.
    """
    if not pattern.balanced:
        return 0.0
    m = pattern.m
    if m > MAX_SLOTS:
        raise ValidationError(f"weingarten_leading enumerates permutations only up to m={MAX_SLOTS}")
    return _pairings(pattern.unconj, pattern.conj) / d ** m


def _pairings(unconj, conj) -> int:
    """Number of bijections ``unconj -> conj`` matching labels exactly."""
    from collections import Counter
    cu, cc = Counter(unconj), Counter(conj)
    if cu != cc:
        return 0
    return math.prod(math.factorial(n) for n in cu.values())


def wick_moment(pattern: MomentPattern) -> int:
    """``E prod g_{s} prod conj(g_{s'})`` for i.i.d. complex Gaussians.

    Each distinct slot label is an independent ``g = N1 + i N2`` with standard
    real and imaginary parts, so ``E|g|^2 = 2`` and ``E g^2 = 0``. Only
    bijective pairings of unconjugated with conjugated slots contribute.
    """
    if len(pattern.unconj) + len(pattern.conj) > MAX_SLOTS:
        raise ValidationError(f"wick_moment supports at most {MAX_SLOTS} slots")
    if not pattern.balanced:
        return 0
    return 2 ** pattern.m * _pairings(pattern.unconj, pattern.conj)


def _pattern_values(U: np.ndarray, pattern: MomentPattern, pool: bool) -> np.ndarray:
    """Per-draw pattern values for a stack of unitaries ``U`` of shape (B, d, d).

    With ``pool`` the value is averaged over all ``d^2`` joint cyclic shifts of
    row and column labels, which leaves the Haar expectation unchanged.
    """
    B, d, _ = U.shape
    if pool:
        out = np.ones((B, d, d), dtype=np.complex128)
        for k, a in pattern.unconj:
            out *= np.roll(U, (-k, -a), axis=(1, 2))
        for k, a in pattern.conj:
            out *= np.roll(U, (-k, -a), axis=(1, 2)).conj()
        return out.mean(axis=(1, 2))
    out = np.ones(B, dtype=np.complex128)
    for k, a in pattern.unconj:
        out *= U[:, k, a]
    for k, a in pattern.conj:
        out *= U[:, k, a].conj()
    return out


def haar_mc_moment(pattern: MomentPattern, d: int, n_samples: int, rng: np.random.Generator,
                   pool: bool = True, batch: int = 2000):
    """Monte Carlo estimate of a Haar moment.

    Returns ``(estimate, standard_error)``; the estimate is complex, the
    standard error combines real and imaginary parts.
    """
    if n_samples < 1000:
        raise ValidationError(f"haar_mc_moment needs n_samples >= 1000, got {n_samples}")
    for k, a in pattern.unconj + pattern.conj:
        if not (0 <= k < d and 0 <= a < d):
            raise ValidationError(f"index ({k}, {a}) out of range for dimension {d}")
    vals = np.empty(n_samples, dtype=np.complex128)
    done = 0
    # keep each batch near 2^22 complex entries
    batch = max(1, min(batch, 2 ** 22 // (d * d)))
    while done < n_samples:
        b = min(batch, n_samples - done)
        U = haar_unitary(d, rng, size=b)
        vals[done:done + b] = _pattern_values(U, pattern, pool)
        done += b
    est = complex(vals.mean())
    se = math.sqrt((vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / n_samples)
    return est, se


def haar_expected_rotinv(diag, omega: float, t_size: int) -> float:
    """Exact Haar expectation of the statistic for a diagonal (rotationally invariant) block.

    ``E (1/d) sum_{k in T} (sum_a b_a |u_k(a)|^2 - omega)^2`` with ``b`` the
    real diagonal, computed from the Dirichlet moments ``E|u|^4`` and
    ``E|u_a|^2 |u_b|^2``; no sampling.
    """
    b = np.real(np.asarray(diag)).astype(np.float64)
    d = b.shape[0]
    e11 = dirichlet_moment(d, (1,)) if d >= 1 else Fraction(0)
    e2 = dirichlet_moment(d, (2,))
    e1_1 = dirichlet_moment(d, (1, 1)) if d >= 2 else Fraction(0)
    sb = float(b.sum())
    sb2 = float((b * b).sum())
    second = sb2 * float(e2) + (sb * sb - sb2) * float(e1_1)
    first = sb * float(e11)
    per_row = second - 2.0 * omega * first + omega * omega
    return t_size / d * per_row


def pairing_counts_agree(pattern: MomentPattern) -> bool:
    """``d^m * weingarten_leading`` equals ``wick_moment / 2^m`` for same-row patterns."""
    m = pattern.m
    d = 7
    lead = round(weingarten_leading(pattern, d) * d ** m)
    return lead == wick_moment(pattern) // (2 ** m if pattern.balanced else 1)


def enumerate_same_row_patterns(m: int, n_cols: int):
    """Every balanced same-row pattern with ``m`` slots per side on ``n_cols`` columns."""
    cols = range(n_cols)
    for uc in itertools.combinations_with_replacement(cols, m):
        for cc in itertools.product(cols, repeat=m):
            yield same_row_pattern(uc, cc)
