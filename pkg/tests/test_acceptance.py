"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Each test records its line before asserting, so the terminal summary lists
every criterion, red or green. Run directly (``python tests/test_acceptance.py``)
to print the lines without pytest.
"""

import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from wignerqe import qe_stats as qs
from wignerqe.ensembles import WignerEnsembleSpec, gue_spec, sample_wigner
from wignerqe.linalg import hermitian_eig
from wignerqe.oracle import (MomentPattern, dirichlet_moment, haar_expected_rotinv, haar_mc_moment,
                             same_row_pattern, weingarten_leading)
from wignerqe.runner import ExperimentConfig, run_experiment, stream
from wignerqe.sphere import (MULTIPLIERS, build_grid, diagonal_symbol_block, eval_harmonics, identity_block,
                             mult_operator_block, weyl_trace)

FOUR_PI = 4 * math.pi
RAD = WignerEnsembleSpec("complex-rademacher", "flat")
WORKERS = 4


def record(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    try:
        from conftest import ACCEPTANCE_LINES
        ACCEPTANCE_LINES[k] = line
    except ImportError:
        pass
    print(line)


def close(a, b, rel=1e-9, floor=1e-12) -> bool:
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), floor)


def eigvecs(spec, d, rng):
    return hermitian_eig(sample_wigner(spec, d, rng)).vectors


# -- 1 -----------------------------------------------------------------------

def test_criterion_01_exact_identities():
    rng = stream(1, 0, 0)
    fails = {"S": 0, "T": 0, "sumW": 0, "rotW": 0, "ident": 0}
    worst_sumw = 0.0
    n = 0
    for N in (1, 2, 4, 8, 16):
        T = qs.build_index_set(N)
        d = 2 * N + 1
        diag = [diagonal_symbol_block(g, N) for g in (lambda s: s, lambda s: s * s, lambda s: np.cos(np.pi * s))]
        banded = [mult_operator_block(MULTIPLIERS[m][0], N, band_limit=MULTIPLIERS[m][1])
                  for m in ("xz", "y2_plus_z", "sin2_theta_cos_2phi", "cos_theta")]
        for _ in range(10):
            U = eigvecs(gue_spec(), d, rng)
            n += 1
            for b in diag:
                r = qs.rotinv_decomposition(b, U, T)
                fails["S"] += not close(r.S1 + r.S2, r.Z)
                fails["T"] += not close(sum(r.T), r.Z ** 2)
                W = qs.band_statistics(b, U, T)
                fails["rotW"] += not (close(W[0], r.Z) and all(W[m] == 0.0 for m in W if m != 0))
            for b in banded:
                X = qs.qe_statistic(b, U, T)
                sw = sum(qs.band_statistics(b, U, T).values())
                worst_sumw = max(worst_sumw, abs(sw - X) / max(X, 1e-300))
                fails["sumW"] += not close(sw, X)
            fails["ident"] += not qs.qe_statistic(identity_block(N), U, T) <= 1e-12
    ok = not any(fails.values())
    detail = (f"{n} GUE draws, N<=16, rel 1e-9 / abs 1e-12; violations {fails}; "
              f"worst |sum W - X|/X = {worst_sumw:.3g}")
    record(1, ok, detail)
    assert ok, detail


# -- 2 -----------------------------------------------------------------------

def test_criterion_02_eigensolver():
    rng = stream(2, 0, 0)
    worst = {"residual": 0.0, "orth": 0.0, "trace": 0.0, "frob": 0.0}
    for d in (9, 33, 129):
        for _ in range(100):
            H = sample_wigner(gue_spec(), d, rng)
            e = hermitian_eig(H)
            lam, U = e.eigenvalues, e.vectors
            h2 = np.linalg.norm(H, 2)
            res = np.linalg.norm(H @ U.T - U.T * lam, axis=0).max()
            worst["residual"] = max(worst["residual"], res / h2)
            worst["orth"] = max(worst["orth"], np.abs(U @ U.conj().T - np.eye(d)).max())
            tr = np.trace(H).real
            worst["trace"] = max(worst["trace"], abs(lam.sum() - tr) / max(abs(tr), np.abs(lam).sum()))
            fro = np.linalg.norm(H) ** 2
            worst["frob"] = max(worst["frob"], abs((lam ** 2).sum() - fro) / fro)
    ok = worst["residual"] <= 1e-10 and worst["orth"] <= 1e-10 and worst["trace"] <= 1e-9 and worst["frob"] <= 1e-9
    detail = "100 GUE draws at d in {9, 33, 129}; worst " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    record(2, ok, detail)
    assert ok, detail


# -- 3 -----------------------------------------------------------------------

def test_criterion_03_sphere_exactness():
    gram = addition = 0.0
    for N in range(0, 33):
        t = eval_harmonics(N, build_grid(N, 0))
        gram = max(gram, np.abs(t.gram() - np.eye(2 * N + 1)).max())
        s = np.sum(np.abs(t.values) ** 2, axis=0)
        addition = max(addition, np.abs(s - (2 * N + 1) / FOUR_PI).max())
    weyl = 0.0
    for name, (f, deg) in MULTIPLIERS.items():
        ref, _ = integrate.dblquad(lambda ph, th: f(np.array(th), np.array(ph)).real * math.sin(th),
                                   0, math.pi, 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13)
        for N in (1, 4, 8):
            b = mult_operator_block(f, N, band_limit=deg)
            weyl = max(weyl, abs(weyl_trace(b) - ref / FOUR_PI))
    s2 = []
    for N in (4, 8, 16, 32):
        s2.append((abs(weyl_trace(diagonal_symbol_block(lambda s: s * s, N)) - 1 / 3), 2 / (2 * N + 1)))
    ok = gram <= 1e-10 and addition <= 1e-10 and weyl <= 1e-10 and all(g <= b for g, b in s2)
    detail = (f"Gram {gram:.2e}, addition {addition:.2e} (N<=32); weyl vs quadrature {weyl:.2e} over "
              f"{len(MULTIPLIERS)} multipliers; s^2 gaps " + ", ".join(f"{g:.2e}<={b:.3f}" for g, b in s2))
    record(3, ok, detail)
    assert ok, detail


# -- 4 -----------------------------------------------------------------------

def test_criterion_04_oracle_coherence():
    rng = stream(4, 0, 0)
    worst_z = 0.0
    cases = [(1,), (2,), (3,), (4,), (1, 1), (2, 1), (1, 1, 1), (2, 2), (3, 1), (2, 1, 1), (1, 1, 1, 1)]
    for d in (2, 4, 8, 16):
        for c in cases:
            if len(c) > d:
                continue
            cols = [a for a, k in enumerate(c) for _ in range(k)]
            est, se = haar_mc_moment(same_row_pattern(cols, cols), d, 100_000, rng)
            exact = float(dirichlet_moment(d, c))
            # m = 1 pooled moments are exact; the floor absorbs rounding
            worst_z = max(worst_z, abs(est - exact) / (se + 1e-14 / 4))
    pats = [MomentPattern(((0, 0),), ((0, 0),)),
            same_row_pattern((0, 0), (0, 0)),
            same_row_pattern((0, 1), (0, 1)),
            MomentPattern(((0, 0), (1, 0)), ((0, 0), (1, 0))),
            MomentPattern(((0, 0), (1, 1)), ((0, 1), (1, 0)))]
    worst_w = 0.0
    for d in (16, 32, 64):
        for p in pats:
            est, _ = haar_mc_moment(p, d, 10_000, rng)
            worst_w = max(worst_w, abs(weingarten_leading(p, d) - est) / (3.0 * d ** (-p.m - 1)))
    ok = worst_z <= 4.0 and worst_w <= 1.0
    detail = (f"dirichlet vs Haar MC (1e5 draws, d<=16, sum c<=4): worst {worst_z:.2f} SE (<=4); "
              f"|leading - MC| / 3d^(-m-1) worst {worst_w:.3f} (<=1) at d in {{16, 32, 64}}")
    record(4, ok, detail)
    assert ok, detail


# -- 5 -----------------------------------------------------------------------

UNIV_PATTERNS = [((0,), (1,)), ((0, 0), (2,)), ((0, 1), (1, 1))]  # (columns, dirichlet exponents)


def _universality(spec, d, draws, rng):
    N = (d - 1) // 2
    T = qs.build_index_set(N)
    samples = np.array([qs.entry_tuples(eigvecs(spec, d, rng), T, [0, 1], 1.0) for _ in range(draws)])
    out = []
    for cols, c in UNIV_PATTERNS:
        est = qs.empirical_moment(same_row_pattern(cols, cols), samples)
        out.append((est.value.real, est.se, float(dirichlet_moment(d, c))))
    return out


def test_criterion_05_universality():
    rng = stream(5, 0, 0)
    zmax = {}
    gaps = []
    for name, spec in (("gue", gue_spec()), ("rademacher", RAD)):
        for d in (17, 33, 65):
            res = _universality(spec, d, 2000, rng)
            z = max(abs(v - ex) / (se + 1e-14 / 4) for v, se, ex in res)
            zmax[(name, d)] = z
            if name == "rademacher":
                gaps.append(max(abs(v - ex) for v, se, ex in res))
    match = all(z <= 4.0 for z in zmax.values())
    mono = gaps[0] > gaps[1] > gaps[2]
    ok = match and mono
    detail = ("max |emp - dirichlet| in SE (<=4): " + ", ".join(f"{n}@{d} {z:.1f}" for (n, d), z in zmax.items())
              + "; rademacher gap " + " > ".join(f"{g:.2e}" for g in gaps) + f" monotone={mono}")
    record(5, ok, detail)
    assert ok, detail


# -- 6 -----------------------------------------------------------------------

def _normality(tmp, spec_name, draws):
    cfg = ExperimentConfig(kind="normality", N_list=(16, 32, 64, 128), draws=draws, seed=6,
                           entry_law=spec_name, workers=WORKERS, out=str(Path(tmp) / spec_name),
                           patterns=("0 1 | 0 1", "0 0 | 0 0"))
    rec = run_experiment(cfg)
    cols = rec.aggregate_columns
    return [dict(zip(cols, r)) for r in rec.aggregate_rows], rec.summary


def test_criterion_06_asymptotic_normality(tmp_path):
    results = {}
    ok = True
    parts = []
    for law in ("complex-gaussian", "complex-rademacher"):
        rows, summary = _normality(tmp_path, law, 2000)
        for pat in ("0:0 0:1 | 0:0 0:1", "0:0 0:0 | 0:0 0:0"):
            sub = [r for r in rows if r["pattern"] == pat]
            g = [r["gap"] for r in sub]
            se = [r["se"] for r in sub]
            dec = all(g[i + 1] - 2 * se[i + 1] <= g[i] + 2 * se[i] for i in range(len(g) - 1))
            slope = summary["fit_gap"][pat]["slope"]
            results[(law, pat)] = (dec, slope)
            ok &= dec
            if law == "complex-rademacher":
                ok &= slope is not None and slope <= -0.3
            parts.append(f"{law.split('-')[1]} [{pat}] gaps " + ",".join(f"{x:.3g}" for x in g)
                         + f" slope {slope:.2f}")
    detail = "2000 draws, N in {16..128}, 2-SE widened decrease; rademacher slope <= -0.3; " + "; ".join(parts)
    record(6, ok, detail)
    assert ok, detail


# -- 7 -----------------------------------------------------------------------

def test_criterion_07_qe_decay(tmp_path):
    Ns = (8, 16, 32, 64, 128)
    pairs = []
    for N in Ns:
        b, T = diagonal_symbol_block(lambda s: s, N), qs.build_index_set(N)
        pairs.append((2 * N + 1, haar_expected_rotinv(b.diagonal(), b.omega, T.size)))
    haar = qs.loglog_fit(pairs)
    ok = haar.slope <= -0.8 and haar.r2 >= 0.98
    parts = [f"Haar closed form slope {haar.slope:.3f} r2 {haar.r2:.4f}"]
    for law in ("complex-gaussian", "complex-rademacher"):
        cfg = ExperimentConfig(kind="qe", N_list=Ns, draws=200, seed=7, entry_law=law, workers=WORKERS,
                               out=str(tmp_path / law))
        s = run_experiment(cfg).summary
        fx, fx2 = s["fit_X"], s["fit_X2"]
        ok &= fx["slope"] <= -0.8 and fx["r2"] >= 0.98 and fx2["slope"] <= -1.5
        parts.append(f"{law.split('-')[1]} X slope {fx['slope']:.3f} r2 {fx['r2']:.4f}, X^2 slope {fx2['slope']:.3f}")
    detail = "g(s)=s, 200 draws, N in {8..128}; slope X <= -0.8 & r2 >= 0.98, X^2 <= -1.5; " + "; ".join(parts)
    record(7, ok, detail)
    assert ok, detail


# -- 8 -----------------------------------------------------------------------

def test_criterion_08_cesaro():
    M = 64
    first = np.zeros(M + 1)
    var = np.zeros(M + 1)
    for N in range(M + 1):
        b, T = diagonal_symbol_block(lambda s: s, N), qs.build_index_set(N)
        xs = []
        for draw in range(32):
            U = eigvecs(gue_spec(), 2 * N + 1, stream(8, N, draw))
            xs.append(qs.qe_statistic(b, U, T))
        first[N] = xs[0]
        var[N] = np.var(xs, ddof=1)
    ces, kol = qs.aggregate_series(first, var)
    incr = kol[M] - kol[M - 1]
    ok = ces[M] < 0.02 and ces[M] < 0.5 * ces[8] and incr < 1e-4
    detail = (f"one draw per N (variances from 32): cesaro[64] {ces[M]:.4g} (<0.02), cesaro[8] {ces[8]:.4g} "
              f"(need < half), kolmogorov increment at 64 {incr:.3g} (<1e-4)")
    record(8, ok, detail)
    assert ok, detail


# -- 9 -----------------------------------------------------------------------

def _tail(d, support, draws, seed):
    N = (d - 1) // 2
    T = qs.build_index_set(N)
    a = qs.balanced_weights(d, support)
    hits = total = 0
    for draw in range(draws):
        U = eigvecs(gue_spec(), d, stream(seed, d * 1000 + support, draw))
        v = np.abs(qs.local_que_values(U, a, T.storage))
        hits += int(np.sum(v > 1.0))
        total += v.size
    p = hits / total
    return p, math.sqrt(p * (1 - p) / total)


def test_criterion_09_local_que():
    draws = 1000
    by_support = {s: _tail(129, s, draws, 9) for s in (8, 32, 128)}
    by_dim = {d: _tail(d, 8, draws, 9) for d in (33, 65, 129)}
    ps = [by_support[s][0] for s in (8, 32, 128)]
    pd = [by_dim[d][0] for d in (33, 65, 129)]
    # a probability cannot fall below an exact zero, so the support direction
    # is read as non-increasing with a strict overall drop
    ok_a = ps[0] >= ps[1] >= ps[2] and ps[0] > ps[2]
    ok_d = pd[0] > pd[1] > pd[2]
    ok = ok_a and ok_d
    detail = (f"GUE, delta=1, {draws} draws; tail vs |a| (d=129) "
              + ", ".join(f"{s}:{p:.4g}±{e:.1g}" for s, (p, e) in by_support.items()) + f" decreasing={ok_a}; "
              + "tail vs d (|a|=8) " + ", ".join(f"{d}:{p:.4g}±{e:.1g}" for d, (p, e) in by_dim.items())
              + f" decreasing={ok_d}")
    record(9, ok, detail)
    assert ok, detail


# -- 10 ----------------------------------------------------------------------

def test_criterion_10_determinism(tmp_path):
    configs = {
        "qe": dict(N_list=(4, 8, 16), draws=20, family="multiplication", name="xz"),
        "normality": dict(N_list=(4, 8, 16), draws=20, entry_law="complex-rademacher"),
        "que": dict(N_list=(8, 16, 32), draws=20, supports=(4, 8)),
        "weingarten": dict(d_list=(4, 8), draws=1000),
    }
    mismatched = []
    n_files = 0
    for kind, kw in configs.items():
        outs = []
        for tag, workers in (("a", 1), ("b", 4), ("c", 1)):
            cfg = ExperimentConfig(kind=kind, seed=1234, workers=workers, out=str(tmp_path / f"{kind}-{tag}"), **kw)
            run_experiment(cfg)
            outs.append(Path(cfg.out))
        files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*.csv"))
        for f in files:
            n_files += 1
            ref = (outs[0] / f).read_bytes()
            if any((o / f).read_bytes() != ref for o in outs[1:]):
                mismatched.append(f"{kind}/{f}")
    ok = not mismatched and n_files > 0
    detail = f"{n_files} CSV files compared across 1, 4, 1 workers for 4 kinds; mismatches {mismatched or 'none'}"
    record(10, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    sys.path.insert(0, os.path.dirname(__file__))
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for t in tests:
        try:
            if "tmp_path" in t.__code__.co_varnames[:t.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    t(Path(d))
            else:
                t()
        except AssertionError:
            pass
