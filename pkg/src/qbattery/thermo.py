"""Energetic diagnostics: energy, passive state, ergotropy, charging power."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import BatteryState, SystemParams, mean_occupation


def energy(state: BatteryState, params: SystemParams) -> float:
    """Mean battery energy omega_b * sum_n n p_n (off-diagonals carry none)."""
    return params.omega_b * mean_occupation(state)


def passive_state(state: BatteryState) -> BatteryState:
    """State with the same spectrum but eigenvalues sorted against energy.

    The largest eigenvalue sits on the lowest level, so no cyclic
    unitary can extract work from the result. General states are
    diagonalized first; only the eigenvalues survive. Idempotent.
    """
    if state.is_diagonal:
        spectrum = state.populations
    else:
        spectrum = np.linalg.eigvalsh(state.matrix)
    return BatteryState.diagonal(np.sort(np.clip(spectrum, 0.0, None))[::-1])


def ergotropy(state: BatteryState, params: SystemParams) -> float:
    """Maximum unitarily extractable energy, E(state) - E(passive state)."""
    value = energy(state, params) - energy(passive_state(state), params)
    return max(value, 0.0)


def ergotropy_ratio(state: BatteryState, params: SystemParams) -> float:
    """Ergotropy over energy; reported as 0 for a zero-energy state."""
    e = energy(state, params)
    if e <= 0.0:
        return 0.0
    return ergotropy(state, params) / e


@dataclass(frozen=True)
class ThermoSnapshot:
    """Per-round energetics; ``power`` is None for the initial state."""

    energy: float
    ergotropy: float
    ratio: float
    power: float | None = None


def snapshot(
    state: BatteryState,
    params: SystemParams,
    previous_energy: float | None = None,
    tau: float | None = None,
) -> ThermoSnapshot:
    """Bundle energy, ergotropy, their ratio, and the power of the round
    that produced ``state`` (energy gained per unit interaction time)."""
    e = energy(state, params)
    power = None
    if previous_energy is not None and tau is not None and tau > 0:
        power = (e - previous_energy) / tau
    return ThermoSnapshot(
        energy=e,
        ergotropy=ergotropy(state, params),
        ratio=ergotropy_ratio(state, params),
        power=power,
    )


def charging_power(trajectory, m: int) -> float:
    """Energy gained in round m per unit interval, (E_m - E_{m-1}) / tau_m."""
    records = trajectory.rounds
    if not 1 <= m <= len(records):
        raise IndexError(f"round {m} outside 1..{len(records)}")
    params = trajectory.params
    e_now = energy(records[m - 1].post_state, params)
    if m == 1:
        e_prev = energy(trajectory.initial_state, params)
    else:
        e_prev = energy(records[m - 2].post_state, params)
    return (e_now - e_prev) / records[m - 1].tau
