"""INI experiment configuration.

Example::

    [experiment]
    kind = qe
    N_list = 8, 16, 32, 64
    nu = 0.25
    draws = 200
    seed = 42

    [ensemble]
    entry_law = complex-gaussian
    profile = flat

    [operator]
    family = diagonal-symbol
    name = s

Moment patterns are written ``"0 1 | 0 1"`` (columns of one row) or
``"0:0 1:0 | 0:0 1:0"`` (``row:column`` slots), several separated by ``;``.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import os
from dataclasses import dataclass, field

import numpy as np

from ..ensembles import ENTRY_LAWS, WignerEnsembleSpec
from ..errors import ValidationError
from ..oracle import MomentPattern
from ..qe_stats import SCALINGS
from ..sphere import MULTIPLIERS, OperatorBlock, diagonal_symbol_block, identity_block, mult_operator_block

KINDS = ("qe", "normality", "que", "weingarten")
OUT_ENV = "WIGNERQE_OUT"
DEFAULT_OUT = "wignerqe-out"

DIAGONAL_SYMBOLS = {
    "s": lambda s: s,
    "s2": lambda s: s * s,
    "one": lambda s: np.ones_like(s),
    "abs": lambda s: np.abs(s),
    "cos_pi_s": lambda s: np.cos(np.pi * s),
}

_SCHEMA = {
    "experiment": {"kind", "n_list", "d_list", "nu", "draws", "seed", "workers", "out"},
    "ensemble": {"entry_law", "profile", "params", "c1", "c2"},
    "operator": {"family", "name", "l"},
    "normality": {"scaling", "patterns"},
    "que": {"deltas", "supports"},
    "weingarten": {"patterns"},
    "thresholds": {"slope_x", "slope_x2", "r2_min"},
}

# excluded from the config hash so a run can be resumed or extended
RUNTIME_KEYS = ("draws", "workers", "out")


def default_out() -> str:
    return os.environ.get(OUT_ENV, DEFAULT_OUT)


def parse_pattern(text: str) -> MomentPattern:
    """``"0 1 | 0 1"`` or ``"0:0 1:2 | 0:0 1:2"`` to a ``MomentPattern``."""
    if text.count("|") != 1:
        raise ValidationError(f"pattern {text!r} needs exactly one '|'")
    sides = []
    for part in text.split("|"):
        slots = []
        for tok in part.split():
            try:
                if ":" in tok:
                    r, c = tok.split(":")
                    slots.append((int(r), int(c)))
                else:
                    slots.append((0, int(tok)))
            except ValueError:
                raise ValidationError(f"bad slot {tok!r} in pattern {text!r}") from None
        sides.append(tuple(slots))
    if any(v < 0 for s in sides for slot in s for v in slot):
        raise ValidationError(f"negative index in pattern {text!r}")
    return MomentPattern(sides[0], sides[1])


def format_pattern(p: MomentPattern) -> str:
    def side(s):
        return " ".join(f"{r}:{c}" for r, c in s)
    return f"{side(p.unconj)} | {side(p.conj)}"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "qe"
    N_list: tuple = (8, 16, 32, 64)
    d_list: tuple = (16, 32, 64)
    nu: float = 0.25
    draws: int = 200
    seed: int = 0
    workers: int = 1
    out: str = field(default_factory=default_out)
    entry_law: str = "complex-gaussian"
    profile: str = "flat"
    params: tuple = ()
    c1: float = 4.0
    c2: float = 0.25
    family: str = "diagonal-symbol"
    name: str = "s"
    L: int = 2
    scaling: str = "sqrt_2d"
    patterns: tuple = ("0 1 | 0 1",)
    deltas: tuple = (1.0,)
    supports: tuple = (8, 32, 128)
    slope_X: float = -0.8
    slope_X2: float = -1.5
    r2_min: float = 0.98

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        keys = self.keys
        if len(keys) == 0:
            raise ValidationError("empty degree list")
        if any(int(k) != k or k < 0 for k in keys):
            raise ValidationError("degrees must be nonnegative integers")
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValidationError(f"degree list must be strictly increasing, got {list(keys)}")
        if self.kind == "weingarten" and min(keys) < 1:
            raise ValidationError("dimensions must be positive")
        if self.draws < 1:
            raise ValidationError(f"draws must be >= 1, got {self.draws}")
        if self.kind == "weingarten" and self.draws < 1000:
            raise ValidationError(f"weingarten runs need draws >= 1000, got {self.draws}")
        if not 0.0 < self.nu < 0.75:
            raise ValidationError(f"nu must lie in (0, 3/4), got {self.nu}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")
        if self.entry_law not in ENTRY_LAWS:
            raise ValidationError(f"unknown entry law {self.entry_law!r}")
        if self.scaling not in SCALINGS:
            raise ValidationError(f"unknown scaling {self.scaling!r}; expected one of {SCALINGS}")
        if self.L < 0:
            raise ValidationError("band limit L must be >= 0")
        if self.family == "diagonal-symbol" and self.name not in DIAGONAL_SYMBOLS:
            raise ValidationError(f"unknown diagonal symbol {self.name!r}; known: {sorted(DIAGONAL_SYMBOLS)}")
        elif self.family == "multiplication" and self.name not in MULTIPLIERS:
            raise ValidationError(f"unknown multiplier {self.name!r}; known: {sorted(MULTIPLIERS)}")
        elif self.family not in ("diagonal-symbol", "multiplication", "identity"):
            raise ValidationError(f"unknown operator family {self.family!r}")
        for p in self.patterns:
            parse_pattern(p)
        if any(not (dl > 0) for dl in self.deltas):
            raise ValidationError("deltas must be positive")
        if any(s < 2 or s % 2 for s in self.supports):
            raise ValidationError("supports must be even integers >= 2")
        self.ensemble()

    @property
    def keys(self) -> tuple:
        return tuple(self.d_list if self.kind == "weingarten" else self.N_list)

    def ensemble(self) -> WignerEnsembleSpec:
        return WignerEnsembleSpec(self.entry_law, self.profile, tuple(self.params), self.c1, self.c2)

    def operator(self, N: int) -> OperatorBlock:
        if self.family == "identity":
            return identity_block(N)
        if self.family == "diagonal-symbol":
            return diagonal_symbol_block(DIAGONAL_SYMBOLS[self.name], N, label=self.name)
        f, deg = MULTIPLIERS[self.name]
        return mult_operator_block(f, N, band_limit=deg, label=self.name)

    def moment_patterns(self) -> list:
        return [parse_pattern(p) for p in self.patterns]

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def to_ini(self) -> str:
        def join(v):
            return ", ".join(_fmt(x) for x in v)
        cp = configparser.ConfigParser()
        cp["experiment"] = {"kind": self.kind, "N_list": join(self.N_list), "d_list": join(self.d_list),
                            "nu": _fmt(self.nu), "draws": str(self.draws), "seed": str(self.seed),
                            "workers": str(self.workers), "out": self.out}
        cp["ensemble"] = {"entry_law": self.entry_law, "profile": self.profile,
                          "params": join(self.params), "c1": _fmt(self.c1), "c2": _fmt(self.c2)}
        cp["operator"] = {"family": self.family, "name": self.name, "L": str(self.L)}
        cp["normality"] = {"scaling": self.scaling, "patterns": "; ".join(self.patterns)}
        cp["que"] = {"deltas": join(self.deltas), "supports": join(self.supports)}
        cp["weingarten"] = {"patterns": "; ".join(self.patterns)}
        cp["thresholds"] = {"slope_X": _fmt(self.slope_X), "slope_X2": _fmt(self.slope_X2),
                            "r2_min": _fmt(self.r2_min)}
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines.extend(f"{k} = {v}" for k, v in cp[sec].items())
            lines.append("")
        return "\n".join(lines)

    def config_hash(self) -> str:
        """Hash of every setting that changes the numbers of a given ``(key, draw)``."""
        d = dataclasses.asdict(self)
        for k in RUNTIME_KEYS:
            d.pop(k)
        text = repr(sorted((k, repr(v)) for k, v in d.items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    out = []
    for t in text.replace(",", " ").split():
        v = float(t)
        if v != int(v):
            raise ValidationError(f"expected an integer, got {t!r}")
        out.append(int(v))
    return tuple(out)


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Build a config from INI text; keyword ``overrides`` win (``None`` is ignored)."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ValidationError(f"malformed config: {e}") from None
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ValidationError(f"unknown config section [{sec}]")
        extra = set(cp[sec]) - _SCHEMA[sec]
        if extra:
            raise ValidationError(f"unknown keys in [{sec}]: {sorted(extra)}")

    def get(sec, key, conv):
        if cp.has_option(sec, key):
            raw = cp.get(sec, key).strip()
            try:
                return conv(raw)
            except ValueError as e:
                raise ValidationError(f"[{sec}] {key} = {raw!r}: {e}") from None
        return None

    kw = {
        "kind": get("experiment", "kind", str),
        "N_list": get("experiment", "n_list", _ints),
        "d_list": get("experiment", "d_list", _ints),
        "nu": get("experiment", "nu", float),
        "draws": get("experiment", "draws", int),
        "seed": get("experiment", "seed", int),
        "workers": get("experiment", "workers", int),
        "out": get("experiment", "out", str),
        "entry_law": get("ensemble", "entry_law", str),
        "profile": get("ensemble", "profile", str),
        "params": get("ensemble", "params", _floats),
        "c1": get("ensemble", "c1", float),
        "c2": get("ensemble", "c2", float),
        "family": get("operator", "family", str),
        "name": get("operator", "name", str),
        "L": get("operator", "l", int),
        "scaling": get("normality", "scaling", str),
        "deltas": get("que", "deltas", _floats),
        "supports": get("que", "supports", _ints),
        "slope_X": get("thresholds", "slope_x", float),
        "slope_X2": get("thresholds", "slope_x2", float),
        "r2_min": get("thresholds", "r2_min", float),
    }
    kind = overrides.get("kind") or kw["kind"] or "qe"
    psec = "weingarten" if kind == "weingarten" else "normality"
    pats = get(psec, "patterns", lambda s: tuple(p.strip() for p in s.split(";") if p.strip()))
    kw["patterns"] = pats
    if kind == "weingarten" and pats is None:
        kw["patterns"] = ("0:0 | 0:0", "0:0 0:0 | 0:0 0:0", "0:0 0:1 | 0:0 0:1", "0:0 1:0 | 0:0 1:0")
    kw.update({k: v for k, v in overrides.items() if v is not None})
    kw = {k: v for k, v in kw.items() if v is not None}
    return ExperimentConfig(**kw)


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ValidationError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text, **overrides)
