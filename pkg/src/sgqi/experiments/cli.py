"""Command line entry point ``sgqi``.

Exit codes: 0 success, 1 failed invariant check, 2 configuration error,
3 node budget exceeded.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, ResourceError
from ..sparse_grid import DEFAULT_NODE_BUDGET, count_full_nodes, count_sparse_nodes
from .config import bundled_table_text, bundled_tables, load_config
from .runner import run_experiment, summary, write_csv, write_summary

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _budget(text: str) -> int | None:
    if text.lower() in ("none", "unlimited"):
        return None
    value = int(float(text))
    if value <= 0:
        raise argparse.ArgumentTypeError("budget must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgqi", description="Sparse-grid MQ quasi-interpolation experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log shape-parameter diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a convergence experiment")
    run.add_argument("--config", required=True, help="config file path or bundled table name")
    run.add_argument("--out", type=Path, help="directory for CSV and JSON output")
    run.add_argument("--threads", type=int, help="worker threads (default from config)")
    run.add_argument("--endpoint", choices=("identify", "duplicate"), help="override endpoint policy")
    run.add_argument("--budget", type=_budget, default=DEFAULT_NODE_BUDGET,
                     help="max stored samples per level ('none' disables)")

    count = sub.add_parser("count", help="sparse and full grid sizes")
    count.add_argument("n", type=int)
    count.add_argument("d", type=int)
    count.add_argument("--convention", choices=("cube", "torus"), default="cube")
    count.add_argument("--enumerate", action="store_true", help="count by explicit set union")
    count.add_argument("--budget", type=_budget, default=DEFAULT_NODE_BUDGET)

    sub.add_parser("check", help="run the quick invariant suite")

    table = sub.add_parser("table", help="print a bundled table config")
    table.add_argument("name", nargs="?", help="table name; omit to list")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(endpoint=args.endpoint, threads=args.threads)
    results = run_experiment(cfg, budget=args.budget, threads=cfg.threads)
    for alpha, rows in results.items():
        print(f"# {cfg.name} alpha={alpha}")
        print(f"{'n':>3} {'nodes':>10} {'error':>12} {'order':>8} {'seconds':>9}")
        for r in rows:
            order = "" if r.order is None else f"{r.order:.4f}"
            print(f"{r.n:>3} {r.nodes:>10} {r.error:>12.4e} {order:>8} {r.seconds:>9.3f}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        for alpha, rows in results.items():
            write_csv(rows, args.out / f"{cfg.name}-alpha{alpha}.csv")
        write_summary(summary(cfg, results, threads=cfg.threads, budget=args.budget),
                      args.out / f"{cfg.name}-summary.json")
    return EXIT_OK


def _cmd_count(args) -> int:
    method = "enumerate" if args.enumerate else "formula"
    sparse = count_sparse_nodes(args.n, args.d, args.convention, method, args.budget)
    full = count_full_nodes(args.n, args.d, args.convention)
    print(f"sparse {sparse}")
    print(f"full {full}")
    return EXIT_OK


def _invariant_checks():
    from ..kernel import eval_phi, eval_psi_c
    from ..periodic import QuasiInterpolant, ShapePolicy, build
    from ..periodization import TransformSpec
    from ..sparse_grid import combination_plan

    def coefficients():
        return all(combination_plan(n, d).coefficient_sum() == 1 for n in range(1, 6) for d in range(1, 5))

    def counts():
        return all(count_sparse_nodes(n, d, c) == count_sparse_nodes(n, d, c, "enumerate")
                   for n in range(1, 5) for d in range(1, 4) for c in ("cube", "torus"))

    def kernel_identity():
        x = np.linspace(-1, 1, 101)
        return all(np.allclose(eval_phi(c, x, 2) + np.pi**2 * eval_phi(c, x), eval_psi_c(c, x), rtol=1e-10)
                   for c in (1e-3, 1e-2, 0.1))

    def transform_round_trip():
        y = np.linspace(-0.5, 0.5, 1001)
        return all(np.allclose(TransformSpec.logarithmic(e).forward(TransformSpec.logarithmic(e).inverse(y)),
                               y, atol=1e-12, rtol=0) for e in (1.0, 2.0, 4.0))

    def deterministic_batches():
        q = build(lambda p: np.cos(2 * np.pi * p[:, 0]) * np.sin(2 * np.pi * p[:, 1]) + 2, 4, 2,
                  ShapePolicy((0.5, 0.5)))
        pts = np.random.default_rng(0).random((64, 2))
        single = np.array([q.evaluate(p) for p in pts])
        threaded = QuasiInterpolant(q.field, q.policy, threads=4).evaluate_batch(pts)
        return np.array_equal(single, q.evaluate_batch(pts)) and np.array_equal(single, threaded)

    return [("combination coefficients sum to 1", coefficients),
            ("node count formula equals set union", counts),
            ("phi'' + pi^2 phi equals closed form", kernel_identity),
            ("transform round trip", transform_round_trip),
            ("batch and threaded evaluation are bit-identical", deterministic_batches)]


def _cmd_check(args) -> int:
    failed = 0
    for name, check in _invariant_checks():
        ok = bool(check())
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def _cmd_table(args) -> int:
    if args.name is None:
        print("\n".join(bundled_tables()))
    else:
        sys.stdout.write(bundled_table_text(args.name))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "count": _cmd_count, "check": _cmd_check, "table": _cmd_table}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
