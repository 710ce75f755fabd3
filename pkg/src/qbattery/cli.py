"""Command-line entry point for reproducible experiment runs.

Every command reads a JSON config (all fields optional, defaults mirror
the standard simulation setup), applies ``--set key=value`` overrides,
and writes deterministic CSV artifacts plus, for protocol runs, a JSON
metadata sidecar. See docs/outputs.md for the per-command CSV schemas.

Exit codes: 0 success, 1 config error, 2 validation failure, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from .lindblad import DissipationParams, dissipative_protocol
from .rounds import charge_discharge_populations, coherence_population
from .scheduler import run_protocol, sample_protocol, tau_opt_analytic, tau_opt_numeric, tau_opt_power_off
from .states import (
    BatteryState,
    ChargerSpec,
    SystemParams,
    fano_ratio,
    mean_occupation,
    occupation_variance,
    thermal_state,
)
from .thermo import energy
from .validate import run_all_checks

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "sweep_theta_q",
    "interval_sweep",
    "power_on",
    "power_off",
    "histograms",
    "lindblad",
    "validate",
)

# Figure-matching defaults; beta varies per experiment below.
_BASE_CONFIG = {
    "schema": SCHEMA_VERSION,
    "params": {"n_levels": 100, "g": 0.04, "delta": 0.02, "omega_c": 1.0, "beta": 0.1},
    "charger": {"q": 0.0, "theta": 0.0, "c": 0.0},
    "schedule": {
        "scheme": "power_on",
        "policy": "analytic",
        "n_rounds": 80,
        "fixed_tau": None,
        "x": 10.0,
        "objective": "per_round",
        "tau_max": None,
        "grid_points": 400,
        "histogram_at": [0, 5, 20, 50, 80],
        "sampling": False,
    },
    "sweep": {
        "theta_points": 101,
        "q_points": 101,
        "c_values": [0.0, 1.0],
        "tau": 8.0,
        "m_values": [1, 5, 10, 15, 20],
        "tau_points": 200,
        "tau_max": 20.0,
    },
    "dissipation": {
        "gamma_b": 1e-4,
        "gamma_c": None,
        "nbar_th": None,
        "nbar_th_c": None,
        "rtol": 1e-9,
        "atol": 1e-12,
    },
    "validate_fast": False,
    "output_path": None,
    "seed": 0,
}

_EXPERIMENT_OVERRIDES = {
    "sweep_theta_q": {"params": {"beta": 0.1}},
    "interval_sweep": {"params": {"beta": 0.05}},
    "power_on": {"params": {"beta": 0.1}},
    "power_off": {
        "params": {"beta": 0.05},
        "schedule": {"scheme": "power_off", "policy": "power_off_compromise", "n_rounds": 20,
                     "histogram_at": [0, 5, 10, 20]},
    },
    "histograms": {"params": {"beta": 0.1}},
    "lindblad": {"params": {"beta": 0.1}, "schedule": {"n_rounds": 20}},
    "validate": {},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where!r} must be a table")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def _apply_set(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set needs key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = key.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config key {key!r}")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key {key!r}")
    node[parts[-1]] = value


def load_config(experiment: str, config_path: str | None, sets: list[str]) -> dict:
    config = _merge(_BASE_CONFIG, _EXPERIMENT_OVERRIDES[experiment])
    if config_path is not None:
        try:
            with open(config_path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {config_path}: {err}") from err
        if user.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {user.get('schema')!r}")
        config = _merge(config, user)
    for assignment in sets:
        _apply_set(config, assignment)
    return config


def _build_params(config: dict) -> SystemParams:
    p = config["params"]
    beta = p["beta"]
    if isinstance(beta, str):
        if beta not in ("inf", "Infinity"):
            raise ConfigError(f"beta must be a number or 'inf', got {beta!r}")
        beta = math.inf
    try:
        return SystemParams(
            n_levels=int(p["n_levels"]),
            g=float(p["g"]),
            delta=float(p["delta"]),
            omega_c=float(p["omega_c"]),
            beta=float(beta),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _build_charger(config: dict) -> ChargerSpec:
    c = config["charger"]
    try:
        return ChargerSpec(q=float(c["q"]), theta=float(c["theta"]), c=float(c["c"]))
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={SCHEMA_VERSION}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _single_round_ratio(
    populations: np.ndarray,
    charger: ChargerSpec,
    params: SystemParams,
    tau: float,
) -> float:
    """Mean after one normalized round over the initial mean, via the
    closed-form population decomposition."""
    state = BatteryState.diagonal(populations)
    charge, discharge = charge_discharge_populations(state, charger, params, tau)
    total = charge + discharge + coherence_population(state, charger, params, tau)
    prob = total.sum()
    if prob < 1e-15:
        return float("nan")
    levels = np.arange(total.size)
    before = float(levels @ populations)
    return float(levels @ total) / prob / before


def cmd_sweep_theta_q(config: dict, out: Path) -> None:
    params = _build_params(config)
    sweep = config["sweep"]
    thetas = np.linspace(0.0, math.pi, int(sweep["theta_points"]))
    qs = np.linspace(0.0, 1.0, int(sweep["q_points"]))
    tau = float(sweep["tau"])
    populations = thermal_state(params).populations
    rows = []
    for c in sweep["c_values"]:
        for theta in thetas:
            for q in qs:
                charger = ChargerSpec(q=float(q), theta=float(theta), c=float(c))
                ratio = _single_round_ratio(populations, charger, params, tau)
                rows.append((float(theta), float(q), float(c), ratio))
    write_csv(out, ["theta", "q", "c", "ratio"], rows)


def _prepared_state(params: SystemParams, scheme: str, rounds_done: int, schedule: dict) -> tuple[BatteryState, float]:
    """State after ``rounds_done`` optimally scheduled rounds, with the
    cumulative probability accumulated so far."""
    state = thermal_state(params)
    if rounds_done == 0:
        return state, 1.0
    policy = "numeric" if scheme == "power_on" else "power_off_compromise"
    trajectory = run_protocol(
        state, params, scheme, rounds_done, policy,
        x=float(schedule["x"]), objective=schedule["objective"],
        tau_max=schedule["tau_max"], grid_points=int(schedule["grid_points"]),
    )
    if trajectory.truncated:
        raise ConfigError(
            f"cannot prepare the round-{rounds_done + 1} state: "
            f"{trajectory.truncation_reason}"
        )
    return trajectory.rounds[-1].post_state, trajectory.cumulative_probability


def cmd_interval_sweep(config: dict, out: Path) -> None:
    from .propagator import ZeroProbabilityError
    from .rounds import power_off_round, power_on_round
    from .scheduler import round_probability

    params = _build_params(config)
    sweep = config["sweep"]
    schedule = config["schedule"]
    scheme = schedule["scheme"]
    if scheme not in ("power_on", "power_off"):
        raise ConfigError(f"interval_sweep needs a named scheme, got {scheme!r}")
    one_round = power_on_round if scheme == "power_on" else power_off_round
    taus = np.linspace(0.0, float(sweep["tau_max"]), int(sweep["tau_points"]) + 1)[1:]
    rows = []
    for m in sweep["m_values"]:
        state, cumulative = _prepared_state(params, scheme, int(m) - 1, schedule)
        marker_analytic = tau_opt_analytic(state, params) if scheme == "power_on" else None
        if scheme == "power_on":
            marker_numeric = tau_opt_numeric(state, params, scheme)
        else:
            marker_numeric = tau_opt_power_off(
                state, params, cumulative, x=float(schedule["x"]),
                objective=schedule["objective"],
            )
        for tau in taus:
            try:
                rec = one_round(state, params, float(tau))
                nbar, prob = mean_occupation(rec.post_state), rec.probability
            except ZeroProbabilityError:
                nbar = None
                prob = round_probability(state, params, scheme, float(tau))
            rows.append((scheme, int(m), float(tau), nbar, prob, marker_analytic, marker_numeric))
    write_csv(
        out,
        ["scheme", "m", "tau", "nbar", "prob", "tau_opt_analytic", "tau_opt_numeric"],
        rows,
    )


def _trajectory_rows(trajectory, params: SystemParams):
    from .thermo import snapshot

    initial = trajectory.initial_state
    first = snapshot(initial, params)
    rows = [(
        0, None, None, 1.0,
        first.energy, first.ergotropy, first.ratio, None,
        mean_occupation(initial), occupation_variance(initial),
        _safe_fano(initial),
    )]
    cumulative = 1.0
    for m, rec in enumerate(trajectory.rounds, start=1):
        cumulative *= rec.probability
        rows.append((
            m, rec.tau, rec.probability, cumulative,
            rec.thermo.energy, rec.thermo.ergotropy, rec.thermo.ratio, rec.thermo.power,
            mean_occupation(rec.post_state), occupation_variance(rec.post_state),
            _safe_fano(rec.post_state),
        ))
    return rows


def _safe_fano(state: BatteryState):
    try:
        return fano_ratio(state)
    except ValueError:
        return None


PROTOCOL_HEADER = [
    "m", "tau", "prob", "cumulative_prob", "energy", "ergotropy",
    "ratio", "power", "mean", "variance", "fano",
]


def _write_histograms(trajectory, at_rounds, path: Path) -> None:
    rows = []
    states = {0: trajectory.initial_state}
    for m, rec in enumerate(trajectory.rounds, start=1):
        states[m] = rec.post_state
    for m in at_rounds:
        if m not in states:
            continue
        for level, pop in enumerate(states[m].populations):
            rows.append((int(m), level, float(pop)))
    write_csv(path, ["m", "level", "population"], rows)


def _write_metadata(trajectory, config: dict, experiment: str, path: Path, attempts=None) -> None:
    meta = {
        "schema": SCHEMA_VERSION,
        "experiment": experiment,
        "config": config,
        "scheme": trajectory.scheme,
        "rounds_completed": trajectory.n_rounds,
        "cumulative_probability": trajectory.cumulative_probability,
        "truncated": trajectory.truncated,
        "truncation_reason": trajectory.truncation_reason,
    }
    if attempts is not None:
        meta["attempts"] = attempts
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_protocol(config: dict, out: Path, experiment: str) -> None:
    params = _build_params(config)
    schedule = config["schedule"]
    scheme = experiment if experiment in ("power_on", "power_off") else schedule["scheme"]
    charger = _build_charger(config) if scheme == "general" else None
    kwargs = dict(
        charger=charger,
        fixed_tau=schedule["fixed_tau"],
        x=float(schedule["x"]),
        objective=schedule["objective"],
        tau_max=schedule["tau_max"],
        grid_points=int(schedule["grid_points"]),
    )
    attempts = None
    if schedule["sampling"]:
        trajectory, attempts = sample_protocol(
            thermal_state(params), params, scheme, int(schedule["n_rounds"]),
            schedule["policy"], seed=int(config["seed"]), **kwargs,
        )
    else:
        trajectory = run_protocol(
            thermal_state(params), params, scheme, int(schedule["n_rounds"]),
            schedule["policy"], **kwargs,
        )
    write_csv(out, PROTOCOL_HEADER, _trajectory_rows(trajectory, params))
    _write_histograms(trajectory, schedule["histogram_at"], out.with_name(out.stem + "_hist.csv"))
    _write_metadata(trajectory, config, experiment, out.with_suffix(".json"), attempts)


def cmd_histograms(config: dict, out: Path) -> None:
    params = _build_params(config)
    schedule = config["schedule"]
    scheme = schedule["scheme"]
    trajectory = run_protocol(
        thermal_state(params), params, scheme, int(schedule["n_rounds"]),
        schedule["policy"],
        charger=_build_charger(config) if scheme == "general" else None,
        fixed_tau=schedule["fixed_tau"], x=float(schedule["x"]),
        objective=schedule["objective"], tau_max=schedule["tau_max"],
        grid_points=int(schedule["grid_points"]),
    )
    _write_histograms(trajectory, schedule["histogram_at"], out)


def cmd_lindblad(config: dict, out: Path) -> None:
    params = _build_params(config)
    schedule = config["schedule"]
    d = config["dissipation"]
    base = DissipationParams.thermal(params, gamma_b=float(d["gamma_b"]),
                                     gamma_c=None if d["gamma_c"] is None else float(d["gamma_c"]))
    diss = DissipationParams(
        gamma_b=base.gamma_b,
        gamma_c=base.gamma_c,
        nbar_th=base.nbar_th if d["nbar_th"] is None else float(d["nbar_th"]),
        nbar_th_c=base.nbar_th_c if d["nbar_th_c"] is None else float(d["nbar_th_c"]),
    )
    scheme = schedule["scheme"]
    policy = schedule["policy"]
    tau_schedule = None
    if scheme == "power_off" or policy == "power_off_compromise":
        # mirror the closed-system compromise schedule so the damped run
        # is directly comparable
        closed = run_protocol(
            thermal_state(params), params, "power_off", int(schedule["n_rounds"]),
            "power_off_compromise", x=float(schedule["x"]),
            objective=schedule["objective"], tau_max=schedule["tau_max"],
            grid_points=int(schedule["grid_points"]),
        )
        tau_schedule = list(closed.taus())
        policy = "schedule"
        scheme = "power_off"
    trajectory = dissipative_protocol(
        thermal_state(params), params, diss, scheme,
        n_rounds=int(schedule["n_rounds"]) if tau_schedule is None else len(tau_schedule),
        interval_policy=policy,
        charger=_build_charger(config) if scheme == "general" else None,
        fixed_tau=schedule["fixed_tau"],
        tau_schedule=tau_schedule,
        rtol=float(d["rtol"]), atol=float(d["atol"]),
    )
    write_csv(out, PROTOCOL_HEADER, _trajectory_rows(trajectory, params))
    _write_metadata(trajectory, config, "lindblad", out.with_suffix(".json"))


def cmd_validate(config: dict, out: Path | None) -> int:
    results = run_all_checks(fast=bool(config["validate_fast"]))
    lines = [r.line() for r in results]
    report = "\n".join(lines) + "\n"
    print(report, end="")
    if out is not None:
        with open(out, "w") as fh:
            fh.write(report)
    return 0 if all(r.passed for r in results) else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbattery",
        description="Measurement-fueled quantum-battery charging experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output path (CSV, or text for validate)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field (dotted keys, JSON values)")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.experiment, args.config, args.set)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1

    out = args.out or config["output_path"]
    if out is None and args.experiment != "validate":
        out = f"qbattery_{args.experiment}.csv"
    out_path = Path(out) if out is not None else None
    if out_path is not None and not out_path.parent.is_dir():
        print(f"config error: output directory {out_path.parent} does not exist",
              file=sys.stderr)
        return 1

    try:
        if args.experiment == "sweep_theta_q":
            cmd_sweep_theta_q(config, out_path)
        elif args.experiment == "interval_sweep":
            cmd_interval_sweep(config, out_path)
        elif args.experiment in ("power_on", "power_off"):
            cmd_protocol(config, out_path, args.experiment)
        elif args.experiment == "histograms":
            cmd_histograms(config, out_path)
        elif args.experiment == "lindblad":
            cmd_lindblad(config, out_path)
        elif args.experiment == "validate":
            return cmd_validate(config, out_path)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # runtime failures map to a distinct exit code
        print(f"error: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
