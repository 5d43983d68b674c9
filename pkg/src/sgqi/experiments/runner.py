"""Convergence runs over a range of sparse-grid levels."""

from __future__ import annotations

import csv
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DomainError
from ..periodic import QuasiInterpolant, ShapePolicy, sample_periodic, ENDPOINT_POLICIES
from ..periodization import NonPeriodicQuasiInterpolant, TransformSpec, periodize_samples, weighted_residual_grid
from ..sparse_grid import DEFAULT_NODE_BUDGET, _check_budget, combination_plan, count_full_nodes, count_sparse_nodes, full_plan
from .config import ExperimentConfig
from .testfns import nonperiodic_target, periodic_on_grid, periodic_target

__all__ = [
    "ResultRow",
    "fit_order",
    "fit_slope",
    "prediction_axes",
    "run_periodic",
    "run_nonperiodic",
    "run_experiment",
    "write_csv",
    "summary",
    "write_summary",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("n", "nodes", "error", "order", "seconds")


@dataclass(frozen=True)
class ResultRow:
    n: int
    nodes: int
    error: float
    order: float | None
    seconds: float


def fit_order(errors: Sequence[float]) -> list[float]:
    """Pairwise orders ``log2(e[i-1] / e[i])``, one fewer than ``errors``.

    >>> [round(v, 4) for v in fit_order([0.1990, 0.0497])]
    [2.0015]
    """
    if len(errors) < 2:
        raise DomainError("need at least two errors to compute an order")
    if any(not e > 0 for e in errors):
        raise DomainError(f"errors must be positive, got {list(errors)}")
    return [math.log2(a / b) for a, b in zip(errors, errors[1:])]


def fit_slope(levels: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of ``-log2(error)`` against the level."""
    if len(levels) != len(errors) or len(levels) < 2:
        raise DomainError("need at least two (level, error) pairs")
    if any(not e > 0 for e in errors):
        raise DomainError(f"errors must be positive, got {list(errors)}")
    slope, _ = np.polyfit(np.asarray(levels, dtype=float), -np.log2(errors), 1)
    return float(slope)


def prediction_axes(cfg: ExperimentConfig) -> list[np.ndarray]:
    m = cfg.prediction_points
    if cfg.kind == "periodic":
        lo, hi = 0.0, 1.0
    else:
        lo, hi = (-0.5, 0.5) if cfg.transform == "logarithmic" else (0.0, 1.0)
    if cfg.prediction_grid == "closed":
        axis = np.linspace(lo, hi, m)
    else:
        axis = lo + (hi - lo) * np.arange(m) / m
    return [axis] * cfg.d


def _plan(cfg: ExperimentConfig, n: int):
    return combination_plan(n, cfg.d) if cfg.grid == "sparse" else full_plan((n,) * cfg.d)


def _node_count(cfg: ExperimentConfig, n: int) -> int:
    convention = ENDPOINT_POLICIES[cfg.endpoint]
    if cfg.grid == "sparse":
        return count_sparse_nodes(n, cfg.d, convention)
    return count_full_nodes(n, cfg.d, convention)


def _with_orders(rows: list[ResultRow]) -> list[ResultRow]:
    out = []
    for i, row in enumerate(rows):
        order = None
        if i > 0 and rows[i - 1].error > 0 and row.error > 0:
            order = math.log2(rows[i - 1].error / row.error)
        out.append(ResultRow(row.n, row.nodes, row.error, order, row.seconds))
    return out


def _policy(cfg: ExperimentConfig, alpha: int, n: int) -> ShapePolicy:
    alpha_vec = (alpha,) + (0,) * (cfg.d - 1)
    mode = "fixed" if cfg.shape == "fixed" else "power"
    return ShapePolicy(cfg.coefficients(alpha, n), mode, cfg.r, alpha_vec)


def run_periodic(cfg: ExperimentConfig, *, budget: int | None = DEFAULT_NODE_BUDGET,
                 threads: int | None = None) -> dict[int, list[ResultRow]]:
    """Max errors of ``D^alpha Q f_d`` for every configured alpha and level.

    Samples are taken once per level and shared by all derivative orders.
    """
    if cfg.kind != "periodic":
        raise DomainError(f"run_periodic needs a periodic config, got {cfg.kind!r}")
    threads = threads or cfg.threads
    axes = prediction_axes(cfg)
    f = periodic_target(cfg.d)
    exact = {a: periodic_on_grid(axes, a) for a in cfg.alphas}
    rows: dict[int, list[ResultRow]] = {a: [] for a in cfg.alphas}
    for n in cfg.level_range:
        start = time.perf_counter()
        field = sample_periodic(f, _plan(cfg, n), cfg.endpoint, budget)
        sampling = time.perf_counter() - start
        nodes = _node_count(cfg, n)
        for alpha in cfg.alphas:
            start = time.perf_counter()
            q = QuasiInterpolant(field, _policy(cfg, alpha, n), threads=threads)
            approx = q.evaluate_grid(axes, (alpha,) + (0,) * (cfg.d - 1))
            err = float(np.max(np.abs(approx - exact[alpha])))
            rows[alpha].append(ResultRow(n, nodes, err, None, sampling + time.perf_counter() - start))
    return {a: _with_orders(r) for a, r in rows.items()}


def _transform(cfg: ExperimentConfig) -> TransformSpec:
    if cfg.transform == "identity":
        return TransformSpec.identity(cfg.d)
    return TransformSpec.logarithmic(cfg.eta, cfg.d)


def run_nonperiodic(cfg: ExperimentConfig, *, budget: int | None = DEFAULT_NODE_BUDGET,
                    threads: int | None = None) -> list[ResultRow]:
    """Weighted max errors of the non-periodic interpolant per level."""
    if cfg.kind != "nonperiodic":
        raise DomainError(f"run_nonperiodic needs a nonperiodic config, got {cfg.kind!r}")
    threads = threads or cfg.threads
    axes = prediction_axes(cfg)
    transform = _transform(cfg)
    g = nonperiodic_target(cfg.d)
    rows = []
    for n in cfg.level_range:
        start = time.perf_counter()
        field = periodize_samples(g, transform, _plan(cfg, n), cfg.endpoint, budget)
        q = QuasiInterpolant(field, _policy(cfg, 0, n), threads=threads)
        qg = NonPeriodicQuasiInterpolant(q, transform)
        err = float(np.max(np.abs(weighted_residual_grid(g, qg, axes))))
        rows.append(ResultRow(n, _node_count(cfg, n), err, None, time.perf_counter() - start))
    return _with_orders(rows)


def run_experiment(cfg: ExperimentConfig, *, budget: int | None = DEFAULT_NODE_BUDGET,
                   threads: int | None = None) -> dict[int, list[ResultRow]]:
    """Dispatch on ``cfg.kind``; results keyed by derivative order.

    The finest level is checked against ``budget`` before any work starts.
    """
    _check_budget(_plan(cfg, cfg.levels[1]).total_samples(ENDPOINT_POLICIES[cfg.endpoint]), budget)
    if cfg.kind == "periodic":
        return run_periodic(cfg, budget=budget, threads=threads)
    return {0: run_nonperiodic(cfg, budget=budget, threads=threads)}


def write_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([r.n, r.nodes, repr(r.error), "" if r.order is None else repr(r.order),
                             f"{r.seconds:.6f}"])


def summary(cfg: ExperimentConfig, results: dict[int, list[ResultRow]], *, threads: int,
            budget: int | None) -> dict:
    """JSON-ready record: config echo, environment and plot-ready pairs."""
    series = {}
    for alpha, rows in results.items():
        entry = {"rows": [asdict(r) for r in rows],
                 "log2_error": [[r.n, math.log2(r.error)] for r in rows if r.error > 0]}
        if len(rows) >= 2 and all(r.error > 0 for r in rows):
            entry["slope"] = fit_slope([r.n for r in rows], [r.error for r in rows])
        series[str(alpha)] = entry
    return {
        "format": "sgqi-results",
        "version": 1,
        "config": cfg.to_dict(),
        "environment": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "platform": platform.platform(),
            "threads": threads,
            "budget": budget,
        },
        "series": series,
    }


def write_summary(data: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2))
