import itertools

import numpy as np
import pytest

from qbattery import (
    BatteryState,
    SystemParams,
    charging_power,
    energy,
    ergotropy,
    ergotropy_ratio,
    fock_state,
    passive_state,
    run_protocol,
    snapshot,
    thermal_state,
)

PARAMS = SystemParams(n_levels=100, g=0.04, delta=0.02, beta=0.05)


def test_energy_trivials():
    assert energy(fock_state(0, 10), PARAMS) == 0.0
    assert energy(fock_state(7, 10), PARAMS) == pytest.approx(7 * PARAMS.omega_b)
    thermal = thermal_state(PARAMS)
    assert energy(thermal, PARAMS) == pytest.approx(19.19099230 * PARAMS.omega_b, rel=1e-8)


def test_passive_state_simple_sort():
    state = BatteryState.diagonal([0.2, 0.8])
    passive = passive_state(state)
    assert np.allclose(passive.populations, [0.8, 0.2])


def test_passive_state_of_fock_is_vacuum():
    passive = passive_state(fock_state(6, 10))
    assert passive.populations[0] == pytest.approx(1.0)


def test_passive_state_idempotent():
    rng = np.random.default_rng(0)
    raw = rng.uniform(size=30)
    state = BatteryState.diagonal(raw / raw.sum())
    once = passive_state(state)
    twice = passive_state(once)
    assert np.abs(once.populations - twice.populations).max() < 1e-15


def test_passive_state_diagonalizes_general_states():
    rho = np.array([[0.5, 0.25], [0.25, 0.5]], dtype=complex)
    passive = passive_state(BatteryState.from_matrix(rho))
    assert np.allclose(passive.populations, [0.75, 0.25])


def test_passive_is_energy_minimizing_over_permutations():
    # brute force over every permutation of a small population vector
    rng = np.random.default_rng(1)
    params = SystemParams(n_levels=5, g=0.04)
    raw = rng.uniform(size=6)
    pops = raw / raw.sum()
    passive_energy = energy(passive_state(BatteryState.diagonal(pops)), params)
    for perm in itertools.permutations(range(6)):
        permuted = energy(BatteryState.diagonal(pops[list(perm)]), params)
        assert permuted >= passive_energy - 1e-12


def test_thermal_state_is_its_own_passive_state():
    thermal = thermal_state(PARAMS)
    assert np.abs(
        passive_state(thermal).populations - thermal.populations
    ).max() < 1e-15


def test_ergotropy_of_thermal_state_is_zero():
    assert ergotropy(thermal_state(PARAMS), PARAMS) == pytest.approx(0.0, abs=1e-12)


def test_ergotropy_of_fock_equals_energy():
    state = fock_state(9, 20)
    assert ergotropy(state, PARAMS) == pytest.approx(energy(state, PARAMS), abs=1e-12)


def test_ergotropy_brute_force_permutation_oracle():
    # on a diagonal state the passive energy is the minimum over every
    # permutation of the populations, so ergotropy has an exhaustive oracle
    rng = np.random.default_rng(2)
    params = SystemParams(n_levels=7, g=0.04)
    levels = np.arange(8)
    for _ in range(5):
        raw = rng.uniform(size=8)
        pops = raw / raw.sum()
        state = BatteryState.diagonal(pops)
        value = ergotropy(state, params)
        assert 0.0 <= value <= energy(state, params) + 1e-12
        brute_min = min(
            params.omega_b * float(levels @ pops[list(perm)])
            for perm in itertools.permutations(range(8))
        )
        assert value == pytest.approx(energy(state, params) - brute_min, abs=1e-12)


def test_passive_energy_is_permutation_invariant():
    rng = np.random.default_rng(3)
    params = SystemParams(n_levels=8, g=0.04)
    raw = rng.uniform(size=9)
    pops = raw / raw.sum()
    base = energy(passive_state(BatteryState.diagonal(pops)), params)
    for _ in range(10):
        shuffled = rng.permutation(pops)
        assert energy(
            passive_state(BatteryState.diagonal(shuffled)), params
        ) == pytest.approx(base, abs=1e-12)


def test_ergotropy_ratio_conventions():
    assert ergotropy_ratio(fock_state(0, 5), PARAMS) == 0.0
    assert ergotropy_ratio(fock_state(3, 5), PARAMS) == pytest.approx(1.0)


def test_snapshot_power_field():
    state = fock_state(2, 5)
    snap = snapshot(state, PARAMS)
    assert snap.power is None
    snap = snapshot(state, PARAMS, previous_energy=0.0, tau=2.0)
    assert snap.power == pytest.approx(energy(state, PARAMS) / 2.0)


def test_charging_power_matches_recorded_snapshots():
    trajectory = run_protocol(thermal_state(PARAMS), PARAMS, "power_on", 10, "analytic")
    for m in (1, 5, 10):
        assert charging_power(trajectory, m) == pytest.approx(
            trajectory.rounds[m - 1].thermo.power, abs=1e-12
        )
    with pytest.raises(IndexError):
        charging_power(trajectory, 0)
    with pytest.raises(IndexError):
        charging_power(trajectory, 11)


def test_charging_power_scales_with_sqrt_mean():
    # once the distribution has narrowed (a few rounds in), each round
    # gains ~1 quantum, so the power tracks omega_b * 2 g sqrt(nbar + 1) / pi
    trajectory = run_protocol(thermal_state(PARAMS), PARAMS, "power_on", 40, "analytic")
    from qbattery import mean_occupation

    state = trajectory.initial_state
    for m in range(1, 41):
        nbar = mean_occupation(state)
        predicted = PARAMS.omega_b * 2 * PARAMS.g * np.sqrt(nbar + 1.0) / np.pi
        if m >= 5:
            assert charging_power(trajectory, m) == pytest.approx(predicted, rel=0.1)
        state = trajectory.rounds[m - 1].post_state


def test_zero_energy_change_means_zero_power():
    from qbattery import RoundRecord, Trajectory

    state = fock_state(3, 5)
    rec = RoundRecord(state, 0.5, 2.0, "power_on", snapshot(state, PARAMS, energy(state, PARAMS), 2.0))
    trajectory = Trajectory(
        rounds=(rec,), cumulative_probability=0.5, scheme="power_on",
        params=PARAMS, initial_state=state,
    )
    assert charging_power(trajectory, 1) == pytest.approx(0.0, abs=1e-15)
