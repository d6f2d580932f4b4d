"""Aggregation of raw cells and report files.

Outputs in the run directory:

``raw.csv``
    one row per ``(key, draw)``, sorted.
``aggregate.csv``
    one row per key (per key and pattern/support for moment and tail runs).
``summary.json``
    fitted slopes, r^2 and pass flags against the configured thresholds.
``plots/*.csv``
    two-column ``x,y`` series, one per figure.
"""

from __future__ import annotations

import json
import math
import os
from collections import Counter

import numpy as np

from .. import qe_stats as qs
from ..errors import ValidationError
from ..oracle import dirichlet_moment, haar_expected_rotinv, weingarten_leading, wick_moment
from .config import format_pattern
from .experiments import RAW, RunRecord, que_columns, write_csv

NAN = float("nan")


def _mse(v: np.ndarray) -> tuple:
    if v.shape[0] == 0:
        return NAN, NAN
    if v.shape[0] == 1:
        return float(v[0]), NAN
    m, se = qs.mean_se(v)
    return float(m), float(se)


def _fit(xs, ys, labels) -> dict:
    if len(xs) < 3:
        return {"slope": None, "intercept": None, "r2": None, "note": "fewer than 3 points"}
    try:
        f = qs.loglog_fit(list(zip(xs, ys)), labels=labels)
    except ValidationError as e:
        return {"slope": None, "intercept": None, "r2": None, "note": str(e)}
    return {"slope": f.slope, "intercept": f.intercept, "r2": f.r2}


def _by_key(record: RunRecord) -> dict:
    groups: dict = {}
    for r in record.rows:
        groups.setdefault(r[0], []).append(r)
    return {k: np.array([r[2:] for r in v], dtype=np.float64).reshape(len(v), -1) for k, v in groups.items()}


def aggregate(record: RunRecord) -> None:
    """Fill ``aggregate_*``, ``summary`` and ``plots`` from ``record.rows``."""
    cfg = record.config
    record.summary = {"kind": cfg.kind, "config_hash": record.config_hash, "n_rows": len(record.rows)}
    {"qe": _agg_qe, "normality": _agg_normality, "que": _agg_que, "weingarten": _agg_weingarten}[cfg.kind](record)


def _agg_qe(record: RunRecord) -> None:
    cfg = record.config
    cols = record.columns[2:]
    ix = {c: i for i, c in enumerate(cols)}
    groups = _by_key(record)
    keys = sorted(groups)
    record.aggregate_columns = ["N", "d", "n", "mean_X", "se_X", "mean_X2", "se_X2", "var_X",
                                "mean_Z", "se_Z", "haar_X", "cesaro", "kolmogorov"]
    means, variances, rows = [], [], []
    for N in keys:
        g = groups[N]
        x = g[:, ix["X"]]
        z = g[:, ix["Z"]]
        mx, sx = _mse(x)
        mx2, sx2 = _mse(x * x)
        var = float(x.var(ddof=1)) if x.shape[0] > 1 else NAN
        mz, sz = _mse(z) if not np.all(np.isnan(z)) else (NAN, NAN)
        block = cfg.operator(N)
        haar = NAN
        if block.is_diagonal():
            haar = haar_expected_rotinv(block.diagonal(), float(np.real(block.omega)),
                                        qs.build_index_set(N, cfg.nu).size)
        means.append(mx)
        variances.append(var)
        rows.append([N, 2 * N + 1, int(x.shape[0]), mx, sx, mx2, sx2, var, mz, sz, haar])
    consecutive = len(keys) > 0 and keys == list(range(len(keys)))
    if consecutive:
        ces, kol = qs.aggregate_series(means, variances)
    else:
        ces = kol = [NAN] * len(keys)
    for r, c, k in zip(rows, ces, kol):
        r += [float(c), float(k)]
    record.aggregate_rows = rows

    ds = [r[1] for r in rows]
    fx = _fit(ds, [r[3] for r in rows], keys)
    fx2 = _fit(ds, [r[5] for r in rows], keys)
    fh = _fit(ds, [r[10] for r in rows], keys) if rows and not math.isnan(rows[0][10]) else \
        {"slope": None, "intercept": None, "r2": None, "note": "no closed form for this operator"}
    s = record.summary
    s["fit_X"] = fx
    s["fit_X2"] = fx2
    s["fit_haar_X"] = fh
    s["thresholds"] = {"slope_X": cfg.slope_X, "slope_X2": cfg.slope_X2, "r2_min": cfg.r2_min}
    s["pass"] = {
        "slope_X": None if fx["slope"] is None else bool(fx["slope"] <= cfg.slope_X and fx["r2"] >= cfg.r2_min),
        "slope_X2": None if fx2["slope"] is None else bool(fx2["slope"] <= cfg.slope_X2),
    }
    record.plots = {
        "mean_X_vs_d": [(r[1], r[3]) for r in rows],
        "mean_X2_vs_d": [(r[1], r[5]) for r in rows],
    }
    if consecutive:
        record.plots["cesaro_vs_M"] = [(r[0], r[11]) for r in rows]


def _agg_normality(record: RunRecord) -> None:
    cfg = record.config
    groups = _by_key(record)
    pats = cfg.moment_patterns()
    record.aggregate_columns = ["N", "d", "n", "pattern", "mean_re", "mean_im", "se", "target", "gap"]
    rows = []
    for N in sorted(groups):
        g = groups[N]
        for i, p in enumerate(pats):
            v = g[:, 1 + 2 * i] + 1j * g[:, 2 + 2 * i]
            m, se = qs.mean_se(v) if v.shape[0] > 1 else (v[0] if v.size else NAN, NAN)
            target = wick_moment(p)
            rows.append([N, 2 * N + 1, int(v.shape[0]), format_pattern(p), float(np.real(m)),
                         float(np.imag(m)), float(se), float(target), float(abs(m - target))])
    record.aggregate_rows = rows
    fits = {}
    for i, p in enumerate(pats):
        sub = [r for r in rows if r[3] == format_pattern(p)]
        fits[format_pattern(p)] = _fit([r[1] for r in sub], [r[8] for r in sub], [r[0] for r in sub])
        record.plots[f"gap_vs_N_p{i}"] = [(r[0], r[8]) for r in sub]
    record.summary["fit_gap"] = fits
    record.summary["scaling"] = cfg.scaling


def _agg_que(record: RunRecord) -> None:
    cfg = record.config
    groups = _by_key(record)
    names = que_columns(cfg)
    record.aggregate_columns = ["N", "d", "n", "support", "delta", "tail", "se"]
    rows = []
    for N in sorted(groups):
        g = groups[N]
        j = 0
        for s in cfg.supports:
            for dl in cfg.deltas:
                m, se = _mse(g[:, j])
                rows.append([N, 2 * N + 1, int(g.shape[0]), s, float(dl), m, se])
                j += 1
    record.aggregate_rows = rows
    if rows:
        top = max(groups)
        for dl in cfg.deltas:
            record.plots[f"tail_vs_support_delta{dl!r}"] = [(r[3], r[5]) for r in rows
                                                            if r[0] == top and r[4] == dl and not math.isnan(r[5])]
    record.summary["columns"] = names


def _dirichlet_exponents(p):
    """Exponents ``c`` when ``p`` is ``prod |u(a_i)|^(2 c_i)`` on one row, else ``None``."""
    rows = {k for k, _ in p.unconj + p.conj}
    if len(rows) != 1 or sorted(p.unconj) != sorted(p.conj):
        return None
    return list(Counter(a for _, a in p.unconj).values())


def _agg_weingarten(record: RunRecord) -> None:
    cfg = record.config
    groups = _by_key(record)
    pats = cfg.moment_patterns()
    record.aggregate_columns = ["d", "n", "pattern", "mean_re", "mean_im", "se", "dirichlet",
                                "leading", "gap_leading", "bound", "within_bound", "within_4se"]
    rows = []
    for d in sorted(groups):
        g = groups[d]
        for i, p in enumerate(pats):
            v = g[:, 2 * i] + 1j * g[:, 2 * i + 1]
            m, se = qs.mean_se(v)
            c = _dirichlet_exponents(p)
            exact = NAN if c is None else float(dirichlet_moment(d, c))
            lead = weingarten_leading(p, d)
            gap = float(abs(m - lead))
            bound = 3.0 * d ** (-p.m - 1)
            w4 = NAN if math.isnan(exact) else float(abs(m - exact) <= 4.0 * se)
            rows.append([d, int(v.shape[0]), format_pattern(p), float(m.real), float(m.imag), float(se),
                         exact, lead, gap, bound, float(gap <= bound), w4])
    record.aggregate_rows = rows
    for i, p in enumerate(pats):
        record.plots[f"gap_leading_vs_d_p{i}"] = [(r[0], r[8]) for r in rows if r[2] == format_pattern(p)]
    record.summary["all_within_bound"] = bool(all(r[10] == 1.0 for r in rows)) if rows else None


def _json_clean(obj):
    if isinstance(obj, dict):
        return {str(k): _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit_report(record: RunRecord, out: str | None = None) -> dict:
    """Write raw, aggregate, summary and plot files; return their paths."""
    out = out or record.config.out
    paths = {"raw": os.path.join(out, RAW), "aggregate": os.path.join(out, "aggregate.csv"),
             "summary": os.path.join(out, "summary.json")}
    plot_dir = os.path.join(out, "plots")
    try:
        os.makedirs(plot_dir, exist_ok=True)
    except OSError as e:
        raise OSError(e.errno, f"cannot create {plot_dir}: {e.strerror}") from None
    write_csv(paths["raw"], record.columns, record.rows)
    write_csv(paths["aggregate"], record.aggregate_columns, record.aggregate_rows)
    for name, pts in record.plots.items():
        p = os.path.join(plot_dir, f"{name}.csv")
        write_csv(p, ["x", "y"], [[float(x), float(y)] for x, y in pts])
        paths[f"plot:{name}"] = p
    try:
        with open(paths["summary"], "w") as fh:
            json.dump(_json_clean(record.summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as e:
        raise OSError(e.errno, f"cannot write {paths['summary']}: {e.strerror}") from None
    return paths
