"""Command-line front end: run solvers and experiments from JSON configs.

Usage::

    lqr-rpi <subcommand> --config <path> [--out <prefix>] [--seed <int>]

Subcommands: solve-are, pi, pi-robust, pi-data, fig1.  Every run writes
CSV traces (deterministic given the config: rerunning a config reproduces
the bytes) plus one JSON run summary.  Exit codes: 0 success, 1 a
theoretical guarantee was violated at runtime (e.g. stabilization lost),
2 configuration error, 3 numerical failure.
"""

import argparse
import json
import sys as _sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import (
    STREAM_INPUT,
    STREAM_NEAR_GAIN,
    STREAM_NOISE,
    ExperimentConfig,
    config_hash,
    load_config,
    parse_config,
)
from .datadriven import SinusoidSignal, pi_data_run, simulate_collect
from .exceptions import ConfigError, LqrError, StabilityError
from .lyapunov import is_hurwitz
from .policy_iteration import DisturbanceSpec, pi_exact_run, pi_robust_run
from .riccati import AreSolution, LqrCost, find_stabilizing_gain, solve_are

__all__ = ["main", "near_optimal_gain", "far_stabilizing_gain"]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17e")


def _write_csv(path: str, header: list[str], rows, cfg_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_sha256={cfg_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_summary(path: str, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _resolve_gain(cfg: ExperimentConfig, key: str = "K1") -> np.ndarray:
    value = cfg.opts[key]
    if isinstance(value, str) and value == "auto":
        return find_stabilizing_gain(cfg.system)
    return np.asarray(value, dtype=float)


def near_optimal_gain(sys, K_star: np.ndarray, rel_scale: float, seed: int) -> np.ndarray:
    """K* plus a seeded random perturbation of spectral norm rel_scale*||K*||_2.

    Retries follow-on streams until the perturbed gain is stabilizing;
    deterministic in ``seed``.
    """
    K_star = np.atleast_2d(K_star)
    base = rel_scale * np.linalg.norm(K_star, 2)
    for attempt in range(16):
        rng = np.random.default_rng([seed, attempt])
        d = rng.standard_normal(K_star.shape)
        K = K_star + d * (base / np.linalg.norm(d, 2))
        if is_hurwitz(sys.A - sys.B @ K):
            return K
    raise StabilityError("could not find a stabilizing near-optimal gain")


def far_stabilizing_gain(sys, cost, are: AreSolution) -> np.ndarray:
    """A stabilizing gain with ||K - K*||_F > ||K*||_F, deterministically.

    The bootstrap gain is tried first, but on an open-loop-stable plant it
    is the zero gain, which sits exactly at distance ||K*||_F and fails the
    strict check; the ladder then falls back to the optimal gain of a
    100x state-weighted cost and to simple multiples of K*.
    """
    K_star = are.K_star
    k_norm = np.linalg.norm(K_star, "fro")
    candidates = [find_stabilizing_gain(sys)]
    try:
        heavy = solve_are(sys, LqrCost(Q=100.0 * cost.Q, R=cost.R))
        candidates.append(heavy.K_star)
    except LqrError:
        pass
    candidates.extend([3.0 * K_star, -K_star])
    for K in candidates:
        if is_hurwitz(sys.A - sys.B @ K) and np.linalg.norm(K - K_star, "fro") > k_norm:
            return K
    raise StabilityError("no stabilizing far gain found among candidates")


def _trace_rows(trace) -> list[list]:
    return [
        [it.index, it.err_to_opt, it.delta_G_norm, it.hurwitz, it.p_fro]
        for it in trace
    ]


def _data_rows(trace) -> list[list]:
    return [
        [it.index, it.err_to_opt, it.rank_ok, it.hurwitz, it.p_fro]
        for it in trace
    ]


def _cmd_solve_are(cfg: ExperimentConfig, prefix: str) -> int:
    t0 = time.perf_counter()
    h = config_hash(cfg.effective)
    sol = solve_are(
        cfg.system, cfg.cost, _resolve_gain(cfg),
        tol=cfg.opts["tol"], max_iter=cfg.opts["max_iter"],
    )
    rows = []
    for i in range(cfg.system.n):
        for j in range(cfg.system.n):
            rows.append([f"P{i}{j}", sol.P_star[i, j]])
    for i in range(cfg.system.m):
        for j in range(cfg.system.n):
            rows.append([f"K{i}{j}", sol.K_star[i, j]])
    rows.append(["residual_fro", sol.residual_norm])
    _write_csv(f"{prefix}_are.csv", ["name", "value"], rows, h)
    ok = sol.residual_norm < cfg.opts["residual_tol"]
    _write_summary(f"{prefix}_summary.json", {
        "mode": cfg.mode,
        "iterations": sol.iterations,
        "residual_fro": sol.residual_norm,
        "residual_ok": bool(ok),
        "config_sha256": h,
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0 if ok else 3


def _cmd_pi(cfg: ExperimentConfig, prefix: str) -> int:
    t0 = time.perf_counter()
    h = config_hash(cfg.effective)
    K1 = _resolve_gain(cfg)
    are = solve_are(cfg.system, cfg.cost, K1)
    trace = pi_exact_run(
        cfg.system, cfg.cost, K1,
        tol=cfg.opts["tol"], max_iter=cfg.opts["max_iter"], p_star=are.P_star,
    )
    _write_csv(f"{prefix}_trace.csv",
               ["i", "err_to_opt", "delta_G_norm", "hurwitz", "p_fro"],
               _trace_rows(trace), h)
    stabilizing_all = all(it.hurwitz for it in trace)
    _write_summary(f"{prefix}_summary.json", {
        "mode": cfg.mode,
        "iterations": len(trace),
        "final_err_to_opt": trace[-1].err_to_opt,
        "stabilizing_all": stabilizing_all,
        "config_sha256": h,
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0 if stabilizing_all else 1


def _cmd_pi_robust(cfg: ExperimentConfig, prefix: str) -> int:
    t0 = time.perf_counter()
    h = config_hash(cfg.effective)
    K1 = _resolve_gain(cfg)
    are = solve_are(cfg.system, cfg.cost, K1)
    spec = DisturbanceSpec(**cfg.opts["disturbance"])
    trace, report = pi_robust_run(
        cfg.system, cfg.cost, K1, spec,
        n_iter=cfg.opts["n_iter"], p_star=are.P_star,
    )
    _write_csv(f"{prefix}_trace.csv",
               ["i", "err_to_opt", "delta_G_norm", "hurwitz", "p_fro"],
               _trace_rows(trace), h)
    ok = report.truncated_at is None
    _write_summary(f"{prefix}_summary.json", {
        "mode": cfg.mode,
        "iterations": len(trace),
        "final_err_to_opt": trace[-1].err_to_opt if trace else float("nan"),
        "ultimate_error": report.ultimate_error,
        "sigma_hat": report.sigma_hat,
        "stabilizing_all": all(it.hurwitz for it in trace),
        "margins_ok": report.margins_ok,
        "status": report.status,
        "config_sha256": h,
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0 if ok else 1


def _make_signal(block: dict, channels: int) -> SinusoidSignal:
    if "frequencies" in block:
        return SinusoidSignal(amplitude=block["amplitude"],
                              frequencies=np.array(block["frequencies"]))
    return SinusoidSignal.sample(
        amplitude=block["amplitude"], channels=channels,
        count=block["count"], freq_range=tuple(block["freq_range"]),
        seed=block["seed"],
    )


def _cmd_pi_data(cfg: ExperimentConfig, prefix: str) -> int:
    t0 = time.perf_counter()
    h = config_hash(cfg.effective)
    sys, cost = cfg.system, cfg.cost
    K1 = _resolve_gain(cfg)
    are = solve_are(sys, cost, K1)
    u = _make_signal(cfg.opts["input"], sys.m)
    w = _make_signal(cfg.opts["noise"], sys.n) if cfg.opts["noise"] else None
    trace = pi_data_run(
        sys, cost, K1, u, w,
        x0=np.array(cfg.opts["x0"]), M=cfg.opts["M"], dt=cfg.opts["dt"],
        substeps=cfg.opts["substeps"], n_iter=cfg.opts["n_iter"], p_star=are.P_star,
    )
    _write_csv(f"{prefix}_trace.csv",
               ["i", "err_to_opt", "rank_ok", "hurwitz", "p_fro"],
               _data_rows(trace), h)
    stabilizing_all = all(it.hurwitz for it in trace)
    rank_ok = all(it.rank_ok for it in trace)
    _write_summary(f"{prefix}_summary.json", {
        "mode": cfg.mode,
        "iterations": len(trace),
        "final_err_to_opt": trace[-1].err_to_opt,
        "stabilizing_all": stabilizing_all,
        "rank_ok": rank_ok,
        "config_sha256": h,
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0 if (stabilizing_all and rank_ok) else 1


def _cmd_fig1(cfg: ExperimentConfig, prefix: str) -> int:
    """Four-cell comparison: {near, far} initial gain x disturbance scales."""
    t0 = time.perf_counter()
    h = config_hash(cfg.effective)
    sys, cost = cfg.system, cfg.cost
    o = cfg.opts
    master = cfg.seed

    are = solve_are(sys, cost)
    K_near = near_optimal_gain(sys, are.K_star, o["near_scale"],
                               1000 * master + STREAM_NEAR_GAIN)
    far = o["far_gain"]
    K_far = far_stabilizing_gain(sys, cost, are) if isinstance(far, str) else np.asarray(far)
    if not is_hurwitz(sys.A - sys.B @ K_far):
        raise ConfigError("config.far_gain: gain is not stabilizing")

    u = SinusoidSignal.sample(o["input_amplitude"], sys.m, o["input_count"],
                              tuple(o["input_freq_range"]), 1000 * master + STREAM_INPUT)
    x0 = np.ones(sys.n)

    def collect(xi: float):
        w = SinusoidSignal.sample(xi, sys.n, o["noise_count"],
                                  tuple(o["noise_freq_range"]), 1000 * master + STREAM_NOISE)
        return simulate_collect(sys, u, w, x0, o["M"], o["dt"], o["substeps"])

    xis = o["xi"]
    with ThreadPoolExecutor(max_workers=max(1, len(xis))) as pool:
        datasets = dict(zip(xis, pool.map(collect, xis)))

    cells = [(label, K, xi) for label, K in (("near", K_near), ("far", K_far)) for xi in xis]

    def run_cell(cell):
        label, K1, xi = cell
        return pi_data_run(sys, cost, K1, u, None, x0, o["M"], o["dt"], o["substeps"],
                           n_iter=o["n_iter"], p_star=are.P_star, data=datasets[xi])

    with ThreadPoolExecutor(max_workers=4) as pool:
        traces = list(pool.map(run_cell, cells))

    summary_cells = {}
    for (label, _, xi), trace in zip(cells, traces):
        name = f"{label}_xi{xi:g}"
        _write_csv(f"{prefix}_fig1_{name}.csv",
                   ["i", "err_to_opt", "rank_ok", "hurwitz", "p_fro"],
                   _data_rows(trace), h)
        summary_cells[name] = {
            "stabilizing_all": all(it.hurwitz for it in trace),
            "rank_ok": all(it.rank_ok for it in trace),
            "final_err_to_opt": trace[-1].err_to_opt,
            "iterations": len(trace),
        }

    # Caption claims: every generated gain stabilizing, and the final error
    # grows with the disturbance scale for both initial gains.
    stabilizing_all = all(c["stabilizing_all"] for c in summary_cells.values())
    lo, hi = min(xis), max(xis)
    ordering = {}
    for label in ("near", "far"):
        if lo == hi:
            ordering[label] = True
        else:
            ordering[label] = bool(
                summary_cells[f"{label}_xi{lo:g}"]["final_err_to_opt"]
                < summary_cells[f"{label}_xi{hi:g}"]["final_err_to_opt"]
            )
    _write_summary(f"{prefix}_summary.json", {
        "mode": cfg.mode,
        "cells": summary_cells,
        "stabilizing_all": stabilizing_all,
        "error_ordering_by_scale": ordering,
        "near_gain": K_near.tolist(),
        "far_gain": K_far.tolist(),
        "config_sha256": h,
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0 if stabilizing_all and all(ordering.values()) else 1


_COMMANDS = {
    "solve-are": ("are", _cmd_solve_are),
    "pi": ("pi-exact", _cmd_pi),
    "pi-robust": ("pi-robust", _cmd_pi_robust),
    "pi-data": ("pi-data", _cmd_pi_data),
    "fig1": ("fig1", _cmd_fig1),
}


def _error_record(exc: Exception) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc)})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lqr-rpi",
        description="Exact, disturbance-injected, and data-driven policy "
                    "iteration for continuous-time LQR.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=None, help="output path prefix")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
    args = parser.parse_args(argv)

    expected_mode, cmd = _COMMANDS[args.command]
    try:
        raw = load_config(args.config)
        cfg = parse_config(raw, seed_override=args.seed)
        if cfg.mode != expected_mode:
            raise ConfigError(
                f"config mode {cfg.mode!r} does not match subcommand "
                f"{args.command!r} (expected {expected_mode!r})"
            )
        prefix = args.out if args.out is not None else cfg.out_prefix
        return cmd(cfg, prefix)
    except ConfigError as exc:
        print(_error_record(exc), file=_sys.stderr)
        return 2
    except (LqrError, np.linalg.LinAlgError) as exc:
        print(_error_record(exc), file=_sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
