"""Per-cell experiment kernels and the parallel, resumable driver.

A cell is one ``(key, draw)`` pair; ``key`` is the degree ``N`` (or the
dimension ``d`` for Haar runs). Each cell draws from its own counter-based
stream, so results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import os
import time
from concurrent.futures import FIRST_EXCEPTION, ProcessPoolExecutor, wait
from dataclasses import dataclass, field

import numpy as np

from .. import qe_stats as qs
from .._backend import BACKEND
from ..ensembles import sample_wigner
from ..errors import ConvergenceError, ValidationError
from ..linalg import haar_unitary, hermitian_eig
from ..oracle import _pattern_values
from .config import ExperimentConfig
from .seeding import stream

JOURNAL = "raw.csv.partial"
RAW = "raw.csv"
META = "run.json"


@dataclass
class RunRecord:
    config: ExperimentConfig
    config_hash: str
    columns: list
    rows: list
    aggregate_columns: list = field(default_factory=list)
    aggregate_rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    plots: dict = field(default_factory=dict)
    wall_clock: float = 0.0


# -- columns -----------------------------------------------------------------

def key_name(cfg: ExperimentConfig) -> str:
    return "d" if cfg.kind == "weingarten" else "N"


def que_columns(cfg: ExperimentConfig) -> list:
    return [f"tail_s{s}_delta{_tag(dl)}" for s in cfg.supports for dl in cfg.deltas]


def _tag(x: float) -> str:
    return repr(float(x)).replace(".", "p")


def raw_columns(cfg: ExperimentConfig) -> list:
    if cfg.kind == "qe":
        return qs.report_columns(cfg.L, 0)
    if cfg.kind == "que":
        return ["N", "draw"] + que_columns(cfg)
    pats = [f"{part}_{i}" for i in range(len(cfg.patterns)) for part in ("re", "im")]
    if cfg.kind == "normality":
        return ["N", "draw", "phase"] + pats
    return ["d", "draw"] + pats


# -- cell kernels ------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _operator(cfg: ExperimentConfig, N: int):
    return cfg.operator(N)


def _eigvecs(cfg: ExperimentConfig, N: int, rng) -> np.ndarray:
    h = sample_wigner(cfg.ensemble(), 2 * N + 1, rng)
    return hermitian_eig(h).vectors


def cell_qe(cfg: ExperimentConfig, N: int, draw: int, rng) -> list:
    U = _eigvecs(cfg, N, rng)
    T = qs.build_index_set(N, cfg.nu)
    rep = qs.qe_report(_operator(cfg, N), U, T, cfg.L, draw=draw)
    return rep.row(cfg.L, 0)


def cell_normality(cfg: ExperimentConfig, N: int, draw: int, rng) -> list:
    U = _eigvecs(cfg, N, rng)
    phase = float(rng.uniform(0.0, 2.0 * math.pi))
    T = qs.build_index_set(N, cfg.nu)
    scale = qs.scale_factor(N, cfg.scaling)
    row = [N, draw, phase]
    for p in cfg.moment_patterns():
        cols = p.columns
        pos = {c: j for j, c in enumerate(cols)}
        local = type(p)(tuple((0, pos[c]) for _, c in p.unconj), tuple((0, pos[c]) for _, c in p.conj))
        z = qs.entry_tuples(U, T, cols, scale, phase)
        v = complex(qs.pattern_values(local, z).mean())
        row += [v.real, v.imag]
    return row


def cell_que(cfg: ExperimentConfig, N: int, draw: int, rng) -> list:
    U = _eigvecs(cfg, N, rng)
    d = 2 * N + 1
    T = qs.build_index_set(N, cfg.nu)
    row = [N, draw]
    for s in cfg.supports:
        if s > d:
            row += [float("nan")] * len(cfg.deltas)
            continue
        stat = np.abs(qs.local_que_values(U, qs.balanced_weights(d, s), T.storage))
        row += [float(np.mean(stat > dl)) for dl in cfg.deltas]
    return row


def cell_weingarten(cfg: ExperimentConfig, d: int, draw: int, rng) -> list:
    U = haar_unitary(d, rng)[None]
    row = [d, draw]
    for p in cfg.moment_patterns():
        for k, a in p.unconj + p.conj:
            if k >= d or a >= d:
                raise ValidationError(f"pattern index ({k}, {a}) out of range for d={d}")
        v = complex(_pattern_values(U, p, pool=True)[0])
        row += [v.real, v.imag]
    return row


CELLS = {"qe": cell_qe, "normality": cell_normality, "que": cell_que, "weingarten": cell_weingarten}


def run_cell(cfg: ExperimentConfig, key: int, draw: int) -> list:
    rng = stream(cfg.seed, key, draw)
    where = f"{key_name(cfg)}={key}, draw={draw}"
    try:
        row = CELLS[cfg.kind](cfg, key, draw, rng)
    except ValidationError as e:
        raise ValidationError(f"{where}: {e}") from e
    except ConvergenceError as e:
        raise ConvergenceError(f"{where}: {e}", e.index) from e
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        raise ConvergenceError(f"{where}: {e}") from e
    return [int(row[0]), int(row[1])] + [float(v) for v in row[2:]]


def run_chunk(cfg: ExperimentConfig, key: int, draws: list) -> list:
    return [run_cell(cfg, key, dr) for dr in draws]


# -- persistence -------------------------------------------------------------

def fmt_value(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _parse_row(rec: list) -> list:
    return [int(rec[0]), int(rec[1])] + [float(x) for x in rec[2:]]


def read_rows(path, columns: list) -> list:
    """Rows of a raw CSV; a truncated last line (interrupted write) is dropped."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return rows
        if header != columns:
            raise ValidationError(f"{path}: columns do not match the configured experiment")
        for rec in reader:
            if len(rec) != len(columns):
                continue
            try:
                rows.append(_parse_row(rec))
            except ValueError:
                continue
    return rows


def write_csv(path, columns: list, rows: list) -> None:
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([fmt_value(v) if isinstance(v, (int, float, np.integer, np.floating)) else v for v in r])
        os.replace(tmp, path)
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from None


class Journal:
    """Append-only log of finished cells, flushed per chunk."""

    def __init__(self, path, columns: list):
        self.path = path
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        self.fh = open(path, "a", newline="")
        self.w = csv.writer(self.fh, lineterminator="\n")
        if new:
            self.w.writerow(columns)
            self.fh.flush()

    def append(self, rows: list) -> None:
        for r in rows:
            self.w.writerow([fmt_value(v) for v in r])
        self.fh.flush()
        os.fsync(self.fh.fileno())

    def close(self) -> None:
        self.fh.close()


def _check_meta(out: str, cfg: ExperimentConfig, h: str) -> None:
    path = os.path.join(out, META)
    if os.path.exists(path):
        with open(path) as fh:
            meta = json.load(fh)
        if meta.get("config_hash") != h:
            raise ValidationError(
                f"{out} holds a run with config hash {meta.get('config_hash')}, this config hashes to {h}; "
                "choose another output directory")
    with open(path, "w") as fh:
        json.dump({"config_hash": h, "kind": cfg.kind}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _load_done(out: str, columns: list) -> dict:
    done = {}
    for name in (RAW, JOURNAL):
        path = os.path.join(out, name)
        if os.path.exists(path):
            for r in read_rows(path, columns):
                done[(r[0], r[1])] = r
    return done


def _chunks(pending: list, workers: int) -> list:
    by_key: dict = {}
    for key, dr in pending:
        by_key.setdefault(key, []).append(dr)
    out = []
    for key, draws in by_key.items():
        size = max(1, math.ceil(len(draws) / (4 * workers)))
        out += [(key, draws[i:i + size]) for i in range(0, len(draws), size)]
    return out


# -- driver ------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig, emit: bool = True) -> RunRecord:
    """Run every pending cell, then aggregate and (optionally) write the report.

    Cells already present in the output directory are reused. Failures are
    re-raised naming the cell after the finished rows are flushed.
    """
    from .report import aggregate, emit_report

    t0 = time.perf_counter()
    out = cfg.out
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as e:
        raise OSError(e.errno, f"cannot create output directory {out}: {e.strerror}") from None
    h = cfg.config_hash()
    columns = raw_columns(cfg)
    _check_meta(out, cfg, h)
    with open(os.path.join(out, "config.ini"), "w") as fh:
        fh.write(cfg.to_ini())
    done = _load_done(out, columns)
    wanted = [(k, dr) for k in cfg.keys for dr in range(cfg.draws)]
    pending = [c for c in wanted if c not in done]

    journal = Journal(os.path.join(out, JOURNAL), columns)
    try:
        if cfg.workers == 1 or len(pending) <= 1:
            for key, draws in _chunks(pending, 1):
                for dr in draws:
                    row = run_cell(cfg, key, dr)
                    done[(key, dr)] = row
                    journal.append([row])
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
                futs = {ex.submit(run_chunk, cfg, key, draws): key for key, draws in _chunks(pending, cfg.workers)}
                remaining = set(futs)
                while remaining:
                    finished, remaining = wait(remaining, return_when=FIRST_EXCEPTION)
                    for f in finished:
                        if f.exception() is None:
                            rows = f.result()
                            journal.append(rows)
                            for r in rows:
                                done[(r[0], r[1])] = r
                    errors = [f.exception() for f in finished if f.exception() is not None]
                    if errors:
                        for f in remaining:
                            f.cancel()
                        raise errors[0]
    finally:
        journal.close()

    rows = [done[c] for c in sorted(wanted)]
    record = RunRecord(cfg, h, columns, rows)
    aggregate(record)
    record.wall_clock = time.perf_counter() - t0
    record.summary["wall_clock_s"] = record.wall_clock
    record.summary["backend"] = BACKEND
    if emit:
        emit_report(record)
        os.remove(os.path.join(out, JOURNAL))
    return record


def load_record(out: str) -> RunRecord:
    """Rebuild a record from a finished output directory."""
    from .config import load_config
    from .report import aggregate

    cfg = load_config(os.path.join(out, "config.ini"), out=out)
    columns = raw_columns(cfg)
    done = _load_done(out, columns)
    rows = [done[c] for c in sorted(done)]
    record = RunRecord(cfg, cfg.config_hash(), columns, rows)
    aggregate(record)
    return record
