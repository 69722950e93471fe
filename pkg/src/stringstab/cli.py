"""Command-line front end.

Five subcommands sharing one JSON config document plus flag overrides:

    stringstab check-lemmas|tune|simulate|sweep-n|freq-response
               [--config cfg.json] [--a1 --b1 --a2 --b2 --n --dt --t-end]
               [--out DIR] [--format csv|json]

Exit codes: 0 success, 2 invalid configuration, 3 tuner found no
qualifying ratio, 4 simulation divergence, 5 frequency-domain degeneracy.
CSV output is UTF-8, comma-separated, LF line endings, one header row,
numbers at 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

from .chain_closedform import check_denominator_conditions, transfer_at
from .errors import (
    ConfigError,
    DegeneratePointError,
    DivergenceError,
    StringStabError,
)
from .freq_analysis import (
    FrequencyGrid,
    NormEstimate,
    check_lemma1,
    tune_alpha,
)
from .sim_time import (
    DisturbanceSpec,
    SimConfig,
    default_dt,
    default_t_end,
    integrate,
    spectral_abscissa,
    sweep_N,
)
from .tf_core import AffineTerm, ControllerGains

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_FOUND = 3
EXIT_DIVERGED = 4
EXIT_DEGENERATE = 5

_MAX_CSV_ROWS = 5001  # simulate decimates stored samples beyond this


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass
class RunConfig:
    """Validated inputs for one CLI invocation."""

    gains: ControllerGains
    n: int = 12
    n_list: tuple[int, ...] = tuple(range(1, 13))
    vehicle: int = 1
    grid: FrequencyGrid = field(default_factory=FrequencyGrid)
    refine_iters: int = 40
    dt: Optional[float] = None
    t_end: Optional[float] = None
    store_every: Optional[int] = None
    disturbances: tuple[DisturbanceSpec, ...] = ()
    tuner_base: AffineTerm = field(default_factory=lambda: AffineTerm(1.0, 1.0))
    tuner_kappa: float = 2.0
    tuner_alpha_min: float = 1.5
    tuner_alpha_max: float = 1e3
    tuner_margin: float = 1e-3
    out_dir: str = "."
    out_format: str = "csv"

    def to_dict(self) -> dict[str, Any]:
        return {
            "gains": {"a1": self.gains.a1, "b1": self.gains.b1,
                      "a2": self.gains.a2, "b2": self.gains.b2},
            "chain": {"n": self.n, "n_list": list(self.n_list), "vehicle": self.vehicle},
            "frequency": {
                "omega_min": self.grid.omega_min,
                "omega_max": self.grid.omega_max,
                "points": self.grid.points,
                "refine_iters": self.refine_iters,
            },
            "simulation": {
                "dt": self.dt,
                "t_end": self.t_end,
                "store_every": self.store_every,
                "disturbances": [
                    {k: v for k, v in asdict(d).items() if v is not None}
                    for d in self.disturbances
                ],
            },
            "tuner": {
                "base_a": self.tuner_base.a,
                "base_b": self.tuner_base.b,
                "kappa": self.tuner_kappa,
                "alpha_min": self.tuner_alpha_min,
                "alpha_max": self.tuner_alpha_max,
                "margin": self.tuner_margin,
            },
            "output": {"dir": self.out_dir, "format": self.out_format},
        }


_SECTIONS = {"gains", "chain", "frequency", "simulation", "tuner", "output"}
_KEYS = {
    "gains": {"a1", "b1", "a2", "b2"},
    "chain": {"n", "n_list", "vehicle"},
    "frequency": {"omega_min", "omega_max", "points", "refine_iters"},
    "simulation": {"dt", "t_end", "store_every", "disturbances"},
    "tuner": {"base_a", "base_b", "kappa", "alpha_min", "alpha_max", "margin"},
    "output": {"dir", "format"},
}


def _check_keys(doc: dict) -> None:
    for section, body in doc.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(body, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        for key in body:
            if key not in _KEYS[section]:
                raise ConfigError(f"unknown key {section}.{key}")


def _positive_int(value, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return value


def parse_config(doc: dict, args: Optional[argparse.Namespace] = None) -> RunConfig:
    """Merge a config document with flag overrides into a RunConfig."""
    _check_keys(doc)
    gains_doc = dict(doc.get("gains", {}))
    chain = dict(doc.get("chain", {}))
    freq = dict(doc.get("frequency", {}))
    sim = dict(doc.get("simulation", {}))
    tuner = dict(doc.get("tuner", {}))
    output = dict(doc.get("output", {}))

    if args is not None:
        for key in ("a1", "b1", "a2", "b2"):
            val = getattr(args, key, None)
            if val is not None:
                gains_doc[key] = val
        if getattr(args, "n", None) is not None:
            chain["n"] = args.n
        if getattr(args, "dt", None) is not None:
            sim["dt"] = args.dt
        if getattr(args, "t_end", None) is not None:
            sim["t_end"] = args.t_end
        if getattr(args, "out", None) is not None:
            output["dir"] = args.out
        if getattr(args, "format", None) is not None:
            output["format"] = args.format

    defaults = {"a1": 1.0, "b1": 1.0, "a2": 10.0, "b2": 100.0}
    for key, value in defaults.items():
        gains_doc.setdefault(key, value)
    for key in ("a1", "b1", "a2", "b2"):
        if not isinstance(gains_doc[key], (int, float)) or isinstance(gains_doc[key], bool):
            raise ConfigError(f"gains.{key} must be a number, got {gains_doc[key]!r}")
    try:
        gains = ControllerGains.from_gains(
            gains_doc["a1"], gains_doc["b1"], gains_doc["a2"], gains_doc["b2"]
        )
    except StringStabError as err:
        raise ConfigError(f"gains: {err}") from err

    n = _positive_int(chain.get("n", 12), "chain.n")
    n_list = chain.get("n_list", list(range(1, 13)))
    if not isinstance(n_list, (list, tuple)) or not n_list:
        raise ConfigError(f"chain.n_list must be a nonempty list, got {n_list!r}")
    n_list = tuple(_positive_int(v, "chain.n_list entry") for v in n_list)
    vehicle = _positive_int(chain.get("vehicle", 1), "chain.vehicle")

    grid = FrequencyGrid(
        omega_min=float(freq.get("omega_min", 1e-4)),
        omega_max=float(freq.get("omega_max", 1e4)),
        points=_positive_int(freq.get("points", 2000), "frequency.points"),
    )
    refine_iters = int(freq.get("refine_iters", 40))
    if refine_iters < 0:
        raise ConfigError(f"frequency.refine_iters must be >= 0, got {refine_iters}")

    dt = sim.get("dt")
    if dt is not None:
        dt = float(dt)
    t_end = sim.get("t_end")
    if t_end is not None:
        t_end = float(t_end)
    store_every = sim.get("store_every")
    if store_every is not None:
        store_every = _positive_int(store_every, "simulation.store_every")

    specs = []
    for i, entry in enumerate(sim.get("disturbances", [])):
        if not isinstance(entry, dict):
            raise ConfigError(f"simulation.disturbances[{i}] must be an object")
        allowed = {"vehicle", "waveform", "amplitude", "start", "duration", "omega", "omega_end"}
        unknown = set(entry) - allowed
        if unknown:
            raise ConfigError(f"unknown key simulation.disturbances[{i}].{sorted(unknown)[0]}")
        try:
            specs.append(DisturbanceSpec(**entry))
        except (StringStabError, TypeError) as err:
            raise ConfigError(f"simulation.disturbances[{i}]: {err}") from err

    try:
        base = AffineTerm(float(tuner.get("base_a", 1.0)), float(tuner.get("base_b", 1.0)))
    except StringStabError as err:
        raise ConfigError(f"tuner base: {err}") from err
    kappa = float(tuner.get("kappa", 2.0))
    alpha_min = float(tuner.get("alpha_min", 1.5))
    alpha_max = float(tuner.get("alpha_max", 1e3))
    margin = float(tuner.get("margin", 1e-3))

    out_dir = str(output.get("dir", "."))
    out_format = str(output.get("format", "csv"))
    if out_format not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {out_format!r}")

    return RunConfig(
        gains=gains,
        n=n,
        n_list=n_list,
        vehicle=vehicle,
        grid=grid,
        refine_iters=refine_iters,
        dt=dt,
        t_end=t_end,
        store_every=store_every,
        disturbances=tuple(specs),
        tuner_base=base,
        tuner_kappa=kappa,
        tuner_alpha_min=alpha_min,
        tuner_alpha_max=alpha_max,
        tuner_margin=margin,
        out_dir=out_dir,
        out_format=out_format,
    )


def _norm_doc(est: NormEstimate) -> dict[str, float]:
    return {"value": est.value, "argmax_omega": est.argmax_omega}


def _emit_json(doc: dict, cfg: RunConfig, filename: str) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    sys.stdout.write(text)
    if cfg.out_dir != "-":
        os.makedirs(cfg.out_dir, exist_ok=True)
        with open(os.path.join(cfg.out_dir, filename), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _write_rows(path: str, header: list[str], rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except BaseException:
        if os.path.exists(path):
            os.remove(path)
        raise


def cmd_check_lemmas(cfg: RunConfig) -> int:
    report = check_lemma1(cfg.gains, cfg.grid, cfg.refine_iters)
    minima = check_denominator_conditions(cfg.gains, max(cfg.n, 2), cfg.grid)
    doc = {
        "gains": cfg.to_dict()["gains"],
        "n": cfg.n,
        "c1_norm": _norm_doc(report.c1_norm),
        "c2_norm": _norm_doc(report.c2_norm),
        "c1c2_norm": _norm_doc(report.c1c2_norm),
        "both_le_one": report.both_le_one,
        "product_le_one": report.product_le_one,
        "denominator_minima": {
            "min_abs_m": minima.min_abs_m,
            "min_abs_s2q_plus_m": minima.min_abs_w_plus_m,
            "min_abs_corner_det": minima.min_abs_corner_det,
        },
    }
    _emit_json(doc, cfg, "lemmas.json")
    return EXIT_OK


def cmd_tune(cfg: RunConfig) -> int:
    result = tune_alpha(
        cfg.tuner_base,
        cfg.tuner_kappa,
        (cfg.tuner_alpha_min, cfg.tuner_alpha_max),
        cfg.grid,
        margin=cfg.tuner_margin,
    )
    if result is None:
        doc = {
            "found": False,
            "alpha": None,
            "alpha_range": [cfg.tuner_alpha_min, cfg.tuner_alpha_max],
        }
        _emit_json(doc, cfg, "tune.json")
        return EXIT_NOT_FOUND
    doc = {
        "found": True,
        "alpha": result.alpha,
        "gains": {
            "a1": result.gains.a1,
            "b1": result.gains.b1,
            "a2": result.gains.a2,
            "b2": result.gains.b2,
        },
        "c1_norm": _norm_doc(result.c1_norm),
    }
    _emit_json(doc, cfg, "tune.json")
    return EXIT_OK


def _sim_config(cfg: RunConfig, n: int) -> SimConfig:
    dt = cfg.dt if cfg.dt is not None else default_dt(cfg.gains)
    t_end = cfg.t_end if cfg.t_end is not None else default_t_end(cfg.gains, n, dt)
    steps = int(round(t_end / dt))
    store_every = cfg.store_every
    if store_every is None:
        store_every = max(1, (steps + _MAX_CSV_ROWS - 1) // _MAX_CSV_ROWS)
    disturbances = cfg.disturbances or (DisturbanceSpec(vehicle=0),)
    return SimConfig(
        gains=cfg.gains,
        n=n,
        dt=dt,
        t_end=t_end,
        disturbances=disturbances,
        store_every=store_every,
    )


def cmd_simulate(cfg: RunConfig) -> int:
    sim_cfg = _sim_config(cfg, cfg.n)
    result = integrate(sim_cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    header = ["t"] + [f"e_{k}" for k in range(1, cfg.n + 1)]
    if cfg.out_format == "csv":
        path = os.path.join(cfg.out_dir, "errors.csv")
        rows = (
            [result.t[i]] + list(result.e[i]) for i in range(result.t.shape[0])
        )
        _write_rows(path, header, rows)
    else:
        path = os.path.join(cfg.out_dir, "errors.json")
        doc = {"t": result.t.tolist(), "e": result.e.tolist()}
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh)
            fh.write("\n")
    summary = {
        "n": cfg.n,
        "gains": cfg.to_dict()["gains"],
        "dt": sim_cfg.dt,
        "t_end": sim_cfg.t_end,
        "store_every": sim_cfg.store_every,
        "per_vehicle_l2": result.per_vehicle_l2.tolist(),
        "total_norm": result.total_norm,
        "d_norm": result.d_norm,
        "spectral_abscissa": spectral_abscissa(cfg.gains, cfg.n),
    }
    with open(
        os.path.join(cfg.out_dir, "summary.json"), "w", encoding="utf-8", newline="\n"
    ) as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    sys.stdout.write(f"wrote {path} and summary.json (total_norm {result.total_norm:.6g})\n")
    return EXIT_OK


def cmd_sweep_n(cfg: RunConfig) -> int:
    disturbances = cfg.disturbances or (DisturbanceSpec(vehicle=0),)
    if len(disturbances) != 1 or disturbances[0].vehicle != 0:
        raise ConfigError("sweep-n requires exactly one disturbance on vehicle 0")
    rows = sweep_N(cfg.gains, disturbances[0], cfg.n_list, dt=cfg.dt, t_end=cfg.t_end)
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.out_format == "csv":
        path = os.path.join(cfg.out_dir, "sweep.csv")
        _write_rows(path, ["N", "l2l2_norm"], rows)
    else:
        path = os.path.join(cfg.out_dir, "sweep.json")
        doc = [{"N": n, "l2l2_norm": norm} for n, norm in rows]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    sys.stdout.write(f"wrote {path} ({len(rows)} rows)\n")
    return EXIT_OK


def cmd_freq_response(cfg: RunConfig) -> int:
    k = cfg.vehicle
    if not 1 <= k <= cfg.n:
        raise ConfigError(f"chain.vehicle must be in 1..{cfg.n}, got {k}")
    omegas = cfg.grid.omegas()
    values = transfer_at(cfg.gains, cfg.n, k, 1j * omegas)
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.out_format == "csv":
        path = os.path.join(cfg.out_dir, "bode.csv")
        rows = zip(omegas, np.abs(values), np.angle(values))
        _write_rows(path, ["omega", "abs_Hk", "arg_Hk"], rows)
    else:
        path = os.path.join(cfg.out_dir, "bode.json")
        doc = {
            "omega": omegas.tolist(),
            "abs_Hk": np.abs(values).tolist(),
            "arg_Hk": np.angle(values).tolist(),
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh)
            fh.write("\n")
    sys.stdout.write(f"wrote {path} (vehicle {k} of {cfg.n})\n")
    return EXIT_OK


_COMMANDS = {
    "check-lemmas": cmd_check_lemmas,
    "tune": cmd_tune,
    "simulate": cmd_simulate,
    "sweep-n": cmd_sweep_n,
    "freq-response": cmd_freq_response,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stringstab",
        description="Analysis and simulation of the asymmetric bidirectional vehicle chain",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--a1", type=float)
        p.add_argument("--b1", type=float)
        p.add_argument("--a2", type=float)
        p.add_argument("--b2", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--t-end", dest="t_end", type=float)
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = {}
        if args.config:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
            except OSError as err:
                raise ConfigError(f"cannot read config file: {err}") from err
            except json.JSONDecodeError as err:
                raise ConfigError(f"config file is not valid JSON: {err}") from err
            if not isinstance(doc, dict):
                raise ConfigError("config file must contain a JSON object")
        cfg = parse_config(doc, args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as err:
        sys.stderr.write(f"config error: {err}\n")
        return EXIT_CONFIG
    except DivergenceError as err:
        sys.stderr.write(f"simulation diverged: {err}\n")
        return EXIT_DIVERGED
    except DegeneratePointError as err:
        omega = err.s.imag if err.s is not None else float("nan")
        sys.stderr.write(f"frequency-domain degeneracy at omega = {omega!r}: {err}\n")
        return EXIT_DEGENERATE
    except StringStabError as err:
        sys.stderr.write(f"config error: {err}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
