"""Strict JSON experiment configurations.

Every key is checked: unknown keys are rejected at every nesting level,
matrices are dimension-checked against the system, and all defaults are
filled in before hashing, so the hash written into output files pins the
complete effective configuration.

Seeding: each mode draws from a single master ``seed`` (default 0, CLI
``--seed`` overrides it).  Per-stream seeds derive arithmetically from the
master unless a block pins its own ``seed`` explicitly, in which case the
explicit value wins and the CLI override does not touch it.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .plants import stirred_tank
from .riccati import LqrCost, LtiSystem

__all__ = ["ExperimentConfig", "load_config", "parse_config", "config_hash"]

MODES = ("are", "pi-exact", "pi-robust", "pi-data", "fig1")

# Stream ids for master-derived seeds: seed_stream = 1000*master + id.
STREAM_INPUT = 1
STREAM_NOISE = 2
STREAM_DISTURBANCE = 3
STREAM_NEAR_GAIN = 4

_COMMON_KEYS = {"mode", "system", "cost", "out_prefix", "seed"}
_MODE_KEYS = {
    "are": {"K1", "tol", "max_iter", "residual_tol"},
    "pi-exact": {"K1", "tol", "max_iter"},
    "pi-robust": {"K1", "n_iter", "disturbance"},
    "pi-data": {"K1", "n_iter", "M", "dt", "substeps", "x0", "input", "noise"},
    "fig1": {
        "n_iter",
        "M",
        "dt",
        "substeps",
        "xi",
        "input_amplitude",
        "input_count",
        "input_freq_range",
        "noise_count",
        "noise_freq_range",
        "near_scale",
        "far_gain",
    },
}


@dataclass
class ExperimentConfig:
    """Parsed, validated configuration ready to run."""

    mode: str
    system: LtiSystem
    cost: LqrCost
    out_prefix: str
    seed: int
    opts: dict
    effective: dict  # canonical dict, defaults filled; basis of the hash


def load_config(path: str) -> dict:
    """Read a JSON config file, wrapping parse problems as ConfigError."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


def config_hash(effective: dict) -> str:
    """SHA-256 of the canonical JSON encoding of the effective config."""
    blob = json.dumps(effective, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _check_keys(d: dict, allowed: set, path: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return d[key]


def _matrix(value, path: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: not a numeric matrix") from exc
    if arr.ndim != 2:
        raise ConfigError(f"{path}: must be a nested (row-major) array of rows")
    if shape is not None and arr.shape != shape:
        raise ConfigError(f"{path}: expected shape {shape}, got {arr.shape}")
    return arr


def _number(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{path}: must be positive")
    return float(value)


def _integer(value, path: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}")
    return value


def _gain(value, n: int, m: int, path: str):
    """A gain block is either the literal "auto" or an m-by-n matrix."""
    if value == "auto":
        return "auto"
    return _matrix(value, path, shape=(m, n))


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"{path}: expected [lo, hi]")
    lo, hi = (_number(v, path) for v in value)
    if not lo < hi:
        raise ConfigError(f"{path}: need lo < hi")
    return lo, hi


def _signal_block(block, channels: int, default_seed: int, path: str) -> dict | None:
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected an object or null")
    _check_keys(block, {"amplitude", "count", "freq_range", "seed", "frequencies"}, path)
    amplitude = _number(_require(block, "amplitude", path), f"{path}.amplitude")
    if "frequencies" in block:
        freqs = _matrix(block["frequencies"], f"{path}.frequencies", shape=None)
        if freqs.shape[0] != channels:
            raise ConfigError(f"{path}.frequencies: need {channels} channel rows")
        return {"amplitude": amplitude, "frequencies": freqs.tolist()}
    count = _integer(_require(block, "count", path), f"{path}.count", minimum=1)
    freq_range = _pair(_require(block, "freq_range", path), f"{path}.freq_range")
    seed = _integer(block.get("seed", default_seed), f"{path}.seed")
    return {
        "amplitude": amplitude,
        "count": count,
        "freq_range": list(freq_range),
        "seed": seed,
    }


def _build_system(raw: dict, mode: str) -> tuple[LtiSystem, LqrCost, dict, dict]:
    sys_block = raw.get("system")
    cost_block = raw.get("cost")
    if mode != "fig1":
        # Only the default experiment carries built-in plant/cost defaults.
        if not isinstance(sys_block, dict):
            raise ConfigError("config.system: a {A, B} object is required")
        if not isinstance(cost_block, dict):
            raise ConfigError("config.cost: a {Q, R} object is required")

    if sys_block is None:
        sys = stirred_tank()[0]
    else:
        _check_keys(sys_block, {"A", "B"}, "system")
        A = _matrix(_require(sys_block, "A", "system"), "system.A")
        B = _matrix(_require(sys_block, "B", "system"), "system.B")
        try:
            sys = LtiSystem(A=A, B=B)
        except ValueError as exc:
            raise ConfigError(f"system: {exc}") from exc

    if cost_block is None:
        cost = LqrCost(Q=np.eye(sys.n), R=np.eye(sys.m))
    else:
        _check_keys(cost_block, {"Q", "R"}, "cost")
        Q = _matrix(_require(cost_block, "Q", "cost"), "cost.Q", shape=(sys.n, sys.n))
        R = _matrix(_require(cost_block, "R", "cost"), "cost.R", shape=(sys.m, sys.m))
        try:
            cost = LqrCost(Q=Q, R=R)
        except ValueError as exc:
            raise ConfigError(f"cost: {exc}") from exc

    sys_eff = {"A": sys.A.tolist(), "B": sys.B.tolist()}
    cost_eff = {"Q": cost.Q.tolist(), "R": cost.R.tolist()}
    return sys, cost, sys_eff, cost_eff


def parse_config(raw: dict, seed_override: int | None = None) -> ExperimentConfig:
    """Validate a raw config dict and fill in every default.

    ``seed_override`` replaces the master seed (the CLI --seed flag).
    """
    mode = _require(raw, "mode", "config")
    if mode not in MODES:
        raise ConfigError(f"config.mode must be one of {MODES}, got {mode!r}")
    _check_keys(raw, _COMMON_KEYS | _MODE_KEYS[mode], "config")

    master = _integer(raw.get("seed", 0), "config.seed")
    if seed_override is not None:
        master = seed_override
    out_prefix = raw.get("out_prefix", "run")
    if not isinstance(out_prefix, str) or not out_prefix:
        raise ConfigError("config.out_prefix must be a nonempty string")

    sys, cost, sys_eff, cost_eff = _build_system(raw, mode)
    n, m = sys.n, sys.m
    opts: dict = {}

    if mode in ("are", "pi-exact"):
        opts["K1"] = _gain(raw.get("K1", "auto"), n, m, "config.K1")
        opts["tol"] = _number(
            raw.get("tol", 1e-12 if mode == "are" else 1e-10), "config.tol", positive=True
        )
        opts["max_iter"] = _integer(raw.get("max_iter", 100 if mode == "are" else 50),
                                    "config.max_iter", minimum=1)
        if mode == "are":
            opts["residual_tol"] = _number(raw.get("residual_tol", 1e-10),
                                           "config.residual_tol", positive=True)
    elif mode == "pi-robust":
        opts["K1"] = _gain(raw.get("K1", "auto"), n, m, "config.K1")
        opts["n_iter"] = _integer(raw.get("n_iter", 30), "config.n_iter", minimum=1)
        block = raw.get("disturbance", {"mode": "none"})
        if not isinstance(block, dict):
            raise ConfigError("config.disturbance: expected an object")
        _check_keys(block, {"mode", "norm_bound", "decay", "seed"}, "config.disturbance")
        dmode = block.get("mode", "none")
        if dmode not in ("none", "fixed_norm", "decaying"):
            raise ConfigError(f"config.disturbance.mode: unknown mode {dmode!r}")
        opts["disturbance"] = {
            "mode": dmode,
            "norm_bound": _number(block.get("norm_bound", 0.0), "config.disturbance.norm_bound"),
            "decay": _number(block.get("decay", 0.5), "config.disturbance.decay"),
            "seed": _integer(block.get("seed", 1000 * master + STREAM_DISTURBANCE),
                             "config.disturbance.seed"),
        }
    elif mode == "pi-data":
        opts["K1"] = _gain(raw.get("K1", "auto"), n, m, "config.K1")
        opts["n_iter"] = _integer(raw.get("n_iter", 10), "config.n_iter", minimum=1)
        opts["M"] = _integer(_require(raw, "M", "config"), "config.M", minimum=1)
        opts["dt"] = _number(_require(raw, "dt", "config"), "config.dt", positive=True)
        opts["substeps"] = _integer(raw.get("substeps", 20), "config.substeps", minimum=1)
        x0 = raw.get("x0", "ones")
        if x0 == "ones":
            opts["x0"] = [1.0] * n
        else:
            if not isinstance(x0, list) or len(x0) != n:
                raise ConfigError(f"config.x0: expected 'ones' or a list of {n} numbers")
            opts["x0"] = [_number(v, "config.x0") for v in x0]
        sig = _signal_block(_require(raw, "input", "config"), m,
                            1000 * master + STREAM_INPUT, "config.input")
        if sig is None:
            raise ConfigError("config.input: must not be null")
        opts["input"] = sig
        opts["noise"] = _signal_block(raw.get("noise"), n,
                                      1000 * master + STREAM_NOISE, "config.noise")
    elif mode == "fig1":
        opts["n_iter"] = _integer(raw.get("n_iter", 10), "config.n_iter", minimum=1)
        opts["M"] = _integer(raw.get("M", 140), "config.M", minimum=1)
        opts["dt"] = _number(raw.get("dt", 0.1), "config.dt", positive=True)
        opts["substeps"] = _integer(raw.get("substeps", 20), "config.substeps", minimum=1)
        xi = raw.get("xi", [0.01, 0.5])
        if not isinstance(xi, list) or not xi:
            raise ConfigError("config.xi: expected a nonempty list of scales")
        opts["xi"] = [_number(v, "config.xi") for v in xi]
        opts["input_amplitude"] = _number(raw.get("input_amplitude", 0.2),
                                          "config.input_amplitude")
        opts["input_count"] = _integer(raw.get("input_count", 100),
                                       "config.input_count", minimum=1)
        opts["input_freq_range"] = list(_pair(raw.get("input_freq_range", [-500.0, 500.0]),
                                              "config.input_freq_range"))
        opts["noise_count"] = _integer(raw.get("noise_count", 50),
                                       "config.noise_count", minimum=1)
        opts["noise_freq_range"] = list(_pair(raw.get("noise_freq_range", [-100.0, 100.0]),
                                              "config.noise_freq_range"))
        opts["near_scale"] = _number(raw.get("near_scale", 0.05),
                                     "config.near_scale", positive=True)
        opts["far_gain"] = _gain(raw.get("far_gain", "auto"), n, m, "config.far_gain")

    effective = {
        "mode": mode,
        "system": sys_eff,
        "cost": cost_eff,
        "out_prefix": out_prefix,
        "seed": master,
    }
    for key, value in opts.items():
        effective[key] = value.tolist() if isinstance(value, np.ndarray) else value

    return ExperimentConfig(
        mode=mode,
        system=sys,
        cost=cost,
        out_prefix=out_prefix,
        seed=master,
        opts=opts,
        effective=effective,
    )
