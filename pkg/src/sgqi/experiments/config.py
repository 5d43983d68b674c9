"""Experiment configuration files (INI syntax, versioned).

Layout::

    [experiment]
    format = sgqi-experiment
    version = 1
    name = table1
    kind = periodic            ; or nonperiodic
    d = 5
    levels = 5-8
    grid = sparse              ; or full
    shape = fixed              ; fixed | power
    r = 2
    alphas = 0                 ; derivative orders in the first coordinate
    prediction_points = 5      ; per axis
    prediction_grid = closed   ; closed (endpoints included) | open
    endpoint = identify
    threads = 1
    transform = logarithmic    ; nonperiodic only
    eta = 4

    [A.0]                      ; coefficients for derivative order 0
    n5 = 0.29, ...

A coefficient vector ending in ``...`` repeats its last entry up to
length ``d``; a single number also fills the whole vector.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from ..errors import ConfigError

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "emit_config",
    "load_config",
    "bundled_tables",
    "bundled_table_text",
]

FORMAT = "sgqi-experiment"
VERSION = 1
KINDS = ("periodic", "nonperiodic")
GRIDS = ("sparse", "full")
SHAPES = ("fixed", "power")
PREDICTION_GRIDS = ("closed", "open")
ENDPOINTS = ("identify", "duplicate")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    d: int
    levels: tuple[int, int]
    A: dict[int, dict[int, tuple[float, ...]]]
    grid: str = "sparse"
    shape: str = "fixed"
    r: int = 2
    alphas: tuple[int, ...] = (0,)
    prediction_points: int = 5
    prediction_grid: str = "closed"
    endpoint: str = "identify"
    threads: int = 1
    transform: str = "logarithmic"
    eta: float = 4.0
    extra: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.d < 1:
            raise ConfigError(f"d must be positive, got {self.d}")
        lo, hi = self.levels
        if lo < 1 or hi < lo:
            raise ConfigError(f"empty or invalid level range {lo}-{hi}")
        for name, value, allowed in (("grid", self.grid, GRIDS), ("shape", self.shape, SHAPES),
                                     ("prediction_grid", self.prediction_grid, PREDICTION_GRIDS),
                                     ("endpoint", self.endpoint, ENDPOINTS)):
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {value!r}")
        if self.prediction_points < 1:
            raise ConfigError(f"prediction_points must be positive, got {self.prediction_points}")
        if self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        if not self.alphas or any(a not in (0, 1, 2) for a in self.alphas):
            raise ConfigError(f"alphas must be a non-empty subset of 0, 1, 2, got {self.alphas}")
        if self.kind == "nonperiodic" and self.alphas != (0,):
            raise ConfigError("nonperiodic experiments only support alpha 0")
        if self.kind == "nonperiodic" and self.transform not in ("logarithmic", "identity"):
            raise ConfigError(f"unknown transform {self.transform!r}")
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        for alpha in self.alphas:
            table = self.A.get(alpha)
            if table is None:
                raise ConfigError(f"missing coefficient section [A.{alpha}]")
            for n in self.level_range:
                vec = table.get(n)
                if vec is None:
                    raise ConfigError(f"[A.{alpha}] has no entry for level n{n}")
                if len(vec) != self.d:
                    raise ConfigError(f"[A.{alpha}] n{n}: {len(vec)} coefficients for d={self.d}")
                if any(not a > 0 for a in vec):
                    raise ConfigError(f"[A.{alpha}] n{n}: coefficients must be positive")

    @property
    def level_range(self) -> range:
        return range(self.levels[0], self.levels[1] + 1)

    def coefficients(self, alpha: int, n: int) -> tuple[float, ...]:
        return self.A[alpha][n]

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return {
            "name": self.name, "kind": self.kind, "d": self.d, "levels": list(self.levels),
            "grid": self.grid, "shape": self.shape, "r": self.r, "alphas": list(self.alphas),
            "prediction_points": self.prediction_points, "prediction_grid": self.prediction_grid,
            "endpoint": self.endpoint, "threads": self.threads, "transform": self.transform,
            "eta": self.eta,
            "A": {str(a): {str(n): list(v) for n, v in t.items()} for a, t in self.A.items()},
        }


def _parse_vector(text: str, d: int, where: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    fill = False
    if parts and parts[-1] == "...":
        fill = True
        parts = parts[:-1]
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if not values:
        raise ConfigError(f"{where}: empty coefficient vector")
    if fill or len(values) == 1:
        if len(values) > d:
            raise ConfigError(f"{where}: {len(values)} coefficients for d={d}")
        values += [values[-1]] * (d - len(values))
    return tuple(values)


def _format_vector(vec: tuple[float, ...]) -> str:
    # trailing repeats collapse to "..."
    k = len(vec)
    while k > 1 and vec[k - 1] == vec[k - 2]:
        k -= 1
    head = ", ".join(repr(v) for v in vec[:k])
    return head if k == len(vec) and k > 1 else head + ", ..."


def _parse_levels(text: str) -> tuple[int, int]:
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise ConfigError(f"levels must look like '5-8', got {text!r}") from None


_KNOWN = {"format", "version", "name", "kind", "d", "levels", "grid", "shape", "r", "alphas",
          "prediction_points", "prediction_grid", "endpoint", "threads", "transform", "eta"}


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    sec = parser["experiment"]
    if sec.get("format", FORMAT) != FORMAT:
        raise ConfigError(f"unexpected format {sec.get('format')!r}")
    try:
        version = sec.getint("version", VERSION)
        if version != VERSION:
            raise ConfigError(f"unsupported config version {version}")
        d = sec.getint("d")
        if d is None:
            raise ConfigError("missing key d")
        kwargs = dict(
            name=sec.get("name", "experiment"),
            kind=sec.get("kind", "periodic"),
            d=d,
            levels=_parse_levels(sec.get("levels", "")),
            grid=sec.get("grid", "sparse"),
            shape=sec.get("shape", "fixed"),
            r=sec.getint("r", 2),
            alphas=tuple(int(a) for a in sec.get("alphas", "0").split(",") if a.strip()),
            prediction_points=sec.getint("prediction_points", 5),
            prediction_grid=sec.get("prediction_grid", "closed"),
            endpoint=sec.get("endpoint", "identify"),
            threads=sec.getint("threads", 1),
            transform=sec.get("transform", "logarithmic"),
            eta=sec.getfloat("eta", 4.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[experiment]: {exc}") from None
    A: dict[int, dict[int, tuple[float, ...]]] = {}
    for name in parser.sections():
        if not name.startswith("A."):
            continue
        try:
            alpha = int(name[2:])
        except ValueError:
            raise ConfigError(f"bad coefficient section name [{name}]") from None
        table = {}
        for key, value in parser[name].items():
            if not key.startswith("n") or not key[1:].isdigit():
                raise ConfigError(f"[{name}]: keys must look like n5, got {key!r}")
            table[int(key[1:])] = _parse_vector(value, d, f"[{name}] {key}")
        A[alpha] = table
    extra = {k: v for k, v in sec.items() if k not in _KNOWN}
    return ExperimentConfig(A=A, extra=extra, **kwargs)


def emit_config(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    parser["experiment"] = {
        "format": FORMAT,
        "version": str(VERSION),
        "name": cfg.name,
        "kind": cfg.kind,
        "d": str(cfg.d),
        "levels": f"{cfg.levels[0]}-{cfg.levels[1]}",
        "grid": cfg.grid,
        "shape": cfg.shape,
        "r": str(cfg.r),
        "alphas": ", ".join(str(a) for a in cfg.alphas),
        "prediction_points": str(cfg.prediction_points),
        "prediction_grid": cfg.prediction_grid,
        "endpoint": cfg.endpoint,
        "threads": str(cfg.threads),
        "transform": cfg.transform,
        "eta": repr(cfg.eta),
    }
    for alpha in sorted(cfg.A):
        parser[f"A.{alpha}"] = {f"n{n}": _format_vector(v) for n, v in sorted(cfg.A[alpha].items())}
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a config file, or a bundled table when ``path`` names one."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text())
    if str(path) in bundled_tables():
        return parse_config(bundled_table_text(str(path)))
    raise ConfigError(f"no config file or bundled table named {str(path)!r}")


def _tables_dir():
    return resources.files("sgqi.experiments").joinpath("tables")


def bundled_tables() -> list[str]:
    return sorted(p.name[:-4] for p in _tables_dir().iterdir() if p.name.endswith(".ini"))


def bundled_table_text(name: str) -> str:
    path = _tables_dir().joinpath(f"{name}.ini")
    if not path.is_file():
        raise ConfigError(f"unknown bundled table {name!r}; available: {', '.join(bundled_tables())}")
    return path.read_text()
