"""Measurement-interval selection and multi-round protocol drivers.

Interval policies:

* ``analytic`` -- quarter period of the mean-population block,
  tau = pi / (2 g sqrt(nbar + 1)), updated from the current state.
* ``numeric`` -- grid search plus golden-section refinement of the
  round's measurement probability.
* ``power_off_compromise`` -- maximizes exp(x * P) * log_x(r), trading
  the charging ratio r of the round against its success probability.
* ``fixed`` -- a constant interval supplied by the caller.

Protocols condition on the desired outcome every round (post-selection)
and track the cumulative success probability; ``sample_protocol`` adds a
seeded restart-on-failure simulation for demonstrations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .propagator import ZeroProbabilityError, _amplitude_vectors
from .rounds import RoundRecord, general_round, power_off_round, power_on_round
from .states import BatteryState, ChargerSpec, SystemParams, mean_occupation
from .thermo import energy, snapshot

POLICIES = ("analytic", "numeric", "power_off_compromise", "fixed")

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class NoChargingError(RuntimeError):
    """No interval on the search grid raises the mean population."""


@dataclass(frozen=True)
class Trajectory:
    """Ordered round records with their cumulative success probability."""

    rounds: tuple[RoundRecord, ...]
    cumulative_probability: float
    scheme: str
    params: SystemParams
    initial_state: BatteryState
    truncated: bool = False
    truncation_reason: str | None = None

    def __post_init__(self):
        if not self.rounds:
            raise ValueError("a trajectory needs at least one round")
        prod = 1.0
        for r in self.rounds:
            prod *= r.probability
        if abs(prod - self.cumulative_probability) > 1e-12 * max(1.0, prod):
            raise ValueError("cumulative probability is not the product of the rounds")

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def states(self) -> list[BatteryState]:
        return [r.post_state for r in self.rounds]

    def taus(self) -> np.ndarray:
        return np.array([r.tau for r in self.rounds])

    def probabilities(self) -> np.ndarray:
        return np.array([r.probability for r in self.rounds])

    def energies(self) -> np.ndarray:
        """Energy after each round, preceded by the initial energy."""
        e0 = energy(self.initial_state, self.params)
        return np.array([e0] + [r.thermo.energy for r in self.rounds])


def _golden_max(f, lo: float, hi: float, rel_tol: float = 1e-6) -> float:
    """Golden-section maximization of a unimodal scalar function."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    scale = max(abs(lo), abs(hi), 1e-12)
    while (b - a) > rel_tol * scale:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _tau_grid(params: SystemParams, tau_max: float | None, grid_points: int) -> np.ndarray:
    """Uniform grid on (0, tau_max]; the default span covers the first
    few swap lobes of every relevant block."""
    if tau_max is None:
        tau_max = 2.0 * math.pi / params.g
    return np.linspace(0.0, tau_max, grid_points + 1)[1:]


def round_probability(state: BatteryState, params: SystemParams, scheme: str, tau: float) -> float:
    """Measurement probability of one power-on or power-off round."""
    _, swap = _amplitude_vectors(params, tau)
    w = np.abs(swap) ** 2
    p = state.populations
    if scheme == "power_on":
        return float(w[1:] @ p[:-1])
    if scheme == "power_off":
        return float(w[1:] @ p[1:])
    raise ValueError(f"no closed-form probability for scheme {scheme!r}")


def quarter_period(params: SystemParams, nbar: float) -> float:
    """pi / (2 g sqrt(nbar + 1)), the interval that completes a quarter
    swap cycle of the block at mean population nbar."""
    return math.pi / (2.0 * params.g * math.sqrt(nbar + 1.0))


def tau_opt_analytic(state: BatteryState, params: SystemParams) -> float:
    """Quarter period of the block at the current mean population.

    tau = pi / (2 g sqrt(nbar + 1)); the detuning correction enters only
    at second order and is dropped. Strictly decreasing in nbar.
    """
    if not state.is_diagonal:
        raise ValueError("tau_opt_analytic requires a diagonal state")
    return quarter_period(params, mean_occupation(state))


def tau_opt_numeric(
    state: BatteryState,
    params: SystemParams,
    scheme: str = "power_on",
    tau_max: float | None = None,
    grid_points: int = 400,
    rel_tol: float = 1e-6,
) -> float:
    """Interval maximizing the round's measurement probability.

    Grid argmax refined by golden-section search between the two
    neighboring grid points.
    """
    taus = _tau_grid(params, tau_max, grid_points)
    probs = np.array([round_probability(state, params, scheme, t) for t in taus])
    i = int(probs.argmax())
    lo = taus[i - 1] if i > 0 else taus[i] / 2.0
    hi = taus[i + 1] if i + 1 < taus.size else taus[i]
    return _golden_max(lambda t: round_probability(state, params, scheme, t), lo, hi, rel_tol)


def power_off_objective(
    state: BatteryState,
    params: SystemParams,
    tau: float,
    cumulative_p: float = 1.0,
    x: float = 10.0,
    objective: str = "per_round",
) -> float:
    """exp(x * P) * log_x(r) for one candidate power-off interval.

    r is the normalized post-round mean over the current mean; P is
    either the round's own probability or the cumulative product
    including it. Positive only for intervals that actually charge.
    """
    _, swap = _amplitude_vectors(params, tau)
    w = np.abs(swap) ** 2
    p = state.populations
    out = np.zeros_like(p)
    out[:-1] = w[1:] * p[1:]
    prob = float(out.sum())
    if prob <= 0.0:
        return -math.inf
    m0 = mean_occupation(state)
    levels = np.arange(p.size)
    ratio = float(levels @ out) / prob / m0
    if ratio <= 0.0:  # everything landed on level 0
        return -math.inf
    weight = cumulative_p * prob if objective == "cumulative" else prob
    return math.exp(x * weight) * math.log(ratio) / math.log(x)


def tau_opt_power_off(
    state: BatteryState,
    params: SystemParams,
    cumulative_p: float = 1.0,
    x: float = 10.0,
    tau_max: float | None = None,
    grid_points: int = 400,
    objective: str = "per_round",
    rel_tol: float = 1e-6,
) -> float:
    """Compromise interval for a power-off round.

    Maximizes exp(x * P) * log_x(r) on the grid and refines the best
    point. Raises NoChargingError when no grid interval has r > 1, which
    happens once the distribution is too narrow for any downward-shifted
    reweighting to raise the mean.
    """
    if mean_occupation(state) <= 0.0:
        raise NoChargingError("state has no excited population to work with")
    if x <= 1.0:
        raise ValueError(f"the balance index x must exceed 1, got {x}")
    taus = _tau_grid(params, tau_max, grid_points)
    vals = np.array([
        power_off_objective(state, params, t, cumulative_p, x, objective) for t in taus
    ])
    if not (vals > 0.0).any():
        raise NoChargingError("no candidate interval raises the mean population")
    i = int(vals.argmax())
    lo = taus[i - 1] if i > 0 else taus[i] / 2.0
    hi = taus[i + 1] if i + 1 < taus.size else taus[i]
    return _golden_max(
        lambda t: power_off_objective(state, params, t, cumulative_p, x, objective),
        lo, hi, rel_tol,
    )


def _choose_tau(
    state: BatteryState,
    params: SystemParams,
    scheme: str,
    policy: str,
    cumulative_p: float,
    fixed_tau: float | None,
    x: float,
    objective: str,
    tau_max: float | None,
    grid_points: int,
) -> float:
    if policy == "fixed":
        if fixed_tau is None:
            raise ValueError("fixed policy needs fixed_tau")
        return fixed_tau
    if policy == "analytic":
        if scheme != "power_on":
            raise ValueError("the analytic interval formula applies to the power_on scheme")
        return tau_opt_analytic(state, params)
    if policy == "numeric":
        if scheme == "general":
            raise ValueError("numeric interval optimization needs a named scheme")
        return tau_opt_numeric(state, params, scheme, tau_max, grid_points)
    if policy == "power_off_compromise":
        if scheme != "power_off":
            raise ValueError("the compromise objective applies to the power_off scheme")
        return tau_opt_power_off(
            state, params, cumulative_p, x, tau_max, grid_points, objective
        )
    raise ValueError(f"policy must be one of {POLICIES}, got {policy!r}")


def run_protocol(
    initial: BatteryState,
    params: SystemParams,
    scheme: str,
    n_rounds: int,
    interval_policy: str = "analytic",
    *,
    charger: ChargerSpec | None = None,
    fixed_tau: float | None = None,
    x: float = 10.0,
    objective: str = "per_round",
    tau_max: float | None = None,
    grid_points: int = 400,
) -> Trajectory:
    """Drive ``n_rounds`` post-selected rounds under one interval policy.

    Each record carries the post state, outcome probability, interval,
    and an energy/ergotropy snapshot. A zero-probability outcome or a
    power-off stall truncates the trajectory (flagged with the failing
    round, not raised) since partial trajectories are still useful data;
    a failure in the very first round raises instead, as does an invalid
    scheme/policy combination.
    """
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    if scheme == "general" and charger is None:
        raise ValueError("the general scheme needs a ChargerSpec")
    state = initial
    records: list[RoundRecord] = []
    cumulative = 1.0
    truncated = False
    reason = None
    prev_energy = energy(initial, params)
    for m in range(1, n_rounds + 1):
        try:
            tau = _choose_tau(
                state, params, scheme, interval_policy, cumulative,
                fixed_tau, x, objective, tau_max, grid_points,
            )
            if scheme == "power_on":
                rec = power_on_round(state, params, tau)
            elif scheme == "power_off":
                rec = power_off_round(state, params, tau)
            else:
                rec = general_round(state, charger, params, tau)
        except (ZeroProbabilityError, NoChargingError) as err:
            truncated = True
            reason = f"round {m}: {err}"
            break
        thermo = snapshot(rec.post_state, params, prev_energy, rec.tau)
        rec = RoundRecord(rec.post_state, rec.probability, rec.tau, rec.scheme, thermo)
        records.append(rec)
        cumulative *= rec.probability
        prev_energy = thermo.energy
        state = rec.post_state
    if not records:
        raise NoChargingError(f"protocol produced no rounds ({reason})")
    return Trajectory(
        rounds=tuple(records),
        cumulative_probability=cumulative,
        scheme=scheme,
        params=params,
        initial_state=initial,
        truncated=truncated,
        truncation_reason=reason,
    )


def sample_protocol(
    initial: BatteryState,
    params: SystemParams,
    scheme: str,
    n_rounds: int,
    interval_policy: str = "analytic",
    seed: int = 0,
    max_attempts: int = 100_000,
    **kwargs,
) -> tuple[Trajectory, int]:
    """Simulate the feedback loop: restart from scratch on a failed outcome.

    The reference trajectory (states, intervals, probabilities) is the
    deterministic post-selected one; sampling only decides how many
    attempts a run takes. Returns the trajectory and the number of
    attempts until one run passed every measurement. Deterministic for a
    given seed.
    """
    trajectory = run_protocol(
        initial, params, scheme, n_rounds, interval_policy, **kwargs
    )
    rng = np.random.default_rng(seed)
    probs = trajectory.probabilities()
    for attempt in range(1, max_attempts + 1):
        if (rng.uniform(size=probs.size) < probs).all():
            return trajectory, attempt
    raise RuntimeError(f"no successful run within {max_attempts} attempts")
