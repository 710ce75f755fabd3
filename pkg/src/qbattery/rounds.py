"""Single evolution-and-measurement rounds.

The two named schemes act on diagonal states through closed-form
population maps: power-on prepares the qubit excited and measures it in
the ground state (population climbs one level), power-off prepares it
in the ground state and measures it excited (population steps down, but
renormalization can still raise the mean). The general (q, theta, c)
round embeds the battery with the qubit, applies the exact joint
propagator, projects, and traces the qubit out, so it handles charger
coherence and non-diagonal battery states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .propagator import (
    ZERO_PROBABILITY_ATOL,
    ZeroProbabilityError,
    _amplitude_vectors,
    joint_unitary,
)
from .states import BatteryState, ChargerSpec, SystemParams
from .thermo import ThermoSnapshot

SCHEMES = ("power_on", "power_off", "general")


@dataclass(frozen=True)
class RoundRecord:
    """Outcome of one round: post state, outcome probability, interval."""

    post_state: BatteryState
    probability: float
    tau: float
    scheme: str
    thermo: ThermoSnapshot | None = None

    def __post_init__(self):
        if not 0.0 < self.probability <= 1.0 + 1e-12:
            raise ValueError(f"round probability {self.probability} outside (0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


def _swap_weights(params: SystemParams, tau: float) -> np.ndarray:
    """|swap amplitude|^2 for blocks 1..N (index 0 unused, zero)."""
    _, swap = _amplitude_vectors(params, tau)
    return np.abs(swap) ** 2


def power_on_round(state: BatteryState, params: SystemParams, tau: float) -> RoundRecord:
    """One charging round with an excited qubit measured in |g>.

    p_n <- |swap_n|^2 p_{n-1}, renormalized; the support floor rises by
    exactly one level, and any population already on the top level is
    lost to the discarded outcome.
    """
    if not state.is_diagonal:
        raise ValueError("power_on_round requires a diagonal state")
    if state.populations.size != params.dim:
        raise ValueError("state and params disagree on the ladder size")
    w = _swap_weights(params, tau)
    out = np.zeros_like(state.populations)
    out[1:] = w[1:] * state.populations[:-1]
    prob = float(out.sum())
    if prob < ZERO_PROBABILITY_ATOL:
        raise ZeroProbabilityError(f"ground-state outcome has probability {prob:.3e}")
    return RoundRecord(BatteryState.diagonal(out / prob), prob, tau, "power_on")


def power_off_round(state: BatteryState, params: SystemParams, tau: float) -> RoundRecord:
    """One round with a ground-state qubit measured in |e>.

    p_n <- |swap_{n+1}|^2 p_{n+1}: the work injected by the measurement
    excites the qubit while the battery populations shift down one level
    with an n-dependent weight. Because the (largest) ground population
    is removed before renormalizing, the mean can still rise. A state
    with no population above level 0 cannot trigger the outcome.
    """
    if not state.is_diagonal:
        raise ValueError("power_off_round requires a diagonal state")
    if state.populations.size != params.dim:
        raise ValueError("state and params disagree on the ladder size")
    w = _swap_weights(params, tau)
    out = np.zeros_like(state.populations)
    out[:-1] = w[1:] * state.populations[1:]
    prob = float(out.sum())
    if prob < ZERO_PROBABILITY_ATOL:
        raise ZeroProbabilityError(f"excited-state outcome has probability {prob:.3e}")
    return RoundRecord(BatteryState.diagonal(out / prob), prob, tau, "power_off")


def general_round(
    state: BatteryState,
    charger: ChargerSpec,
    params: SystemParams,
    tau: float,
) -> RoundRecord:
    """One round for an arbitrary charger preparation and measurement angle.

    Evolves the full qubit (x) battery density matrix with the exact
    joint propagator, projects the qubit onto
    cos(theta/2)|g> + sin(theta/2)|e>, traces the qubit out, and
    normalizes; the probability is the pre-normalization trace.
    """
    dim = params.dim
    if state.populations.size != dim:
        raise ValueError("state and params disagree on the ladder size")
    u = joint_unitary(params, tau)
    joint = np.kron(charger.density_matrix(), state.matrix)
    evolved = u @ joint @ u.conj().T
    phi = charger.measured_state().astype(complex)
    blocks = evolved.reshape(2, dim, 2, dim)
    battery = np.einsum("i,injm,j->nm", phi.conj(), blocks, phi)
    prob = float(np.trace(battery).real)
    if prob < ZERO_PROBABILITY_ATOL:
        raise ZeroProbabilityError(f"projection onto theta={charger.theta} has probability {prob:.3e}")
    return RoundRecord(BatteryState.from_matrix(battery / prob), prob, tau, "general")


def coherence_population(
    state: BatteryState,
    charger: ChargerSpec,
    params: SystemParams,
    tau: float,
) -> np.ndarray:
    """Unnormalized population contributed by the charger's initial coherence.

    For a diagonal input the coherence cross terms add
    c*sqrt(q(1-q))*sin(theta) * Re[stay_n stay_{n+1}] * p_n to level n,
    with the uncoupled top level using the bare detuning phase in place
    of a stay amplitude. Vanishes for c = 0 or theta in {0, pi}; near
    resonance with slowly varying block frequencies it reduces to the
    same shape as the diagonal no-exchange map.
    """
    if not state.is_diagonal:
        raise ValueError("coherence_population requires a diagonal state")
    stay, _ = _amplitude_vectors(params, tau)
    core = np.empty(params.dim)
    core[:-1] = np.real(stay[:-1] * stay[1:])
    core[-1] = np.real(stay[-1] * np.exp(0.5j * params.delta * tau))
    weight = charger.c * np.sqrt(charger.q * (1.0 - charger.q)) * np.sin(charger.theta)
    return weight * core * state.populations


def charge_discharge_populations(
    state: BatteryState,
    charger: ChargerSpec,
    params: SystemParams,
    tau: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized charging and discharging population parts of one round.

    The charging part mixes the two level-shifting maps with weights
    (1-q)cos^2(theta/2) and q sin^2(theta/2); the discharging part mixes
    the two diagonal maps. Together with ``coherence_population`` they
    reproduce the diagonal of ``general_round`` exactly.
    """
    if not state.is_diagonal:
        raise ValueError("requires a diagonal state")
    p = state.populations
    stay, swap = _amplitude_vectors(params, tau)
    w = np.abs(swap) ** 2
    a2 = np.abs(stay) ** 2
    up = np.zeros_like(p)
    up[1:] = w[1:] * p[:-1]
    down = np.zeros_like(p)
    down[:-1] = w[1:] * p[1:]
    hold = a2 * p
    hold_shifted = np.zeros_like(p)
    hold_shifted[:-1] = a2[1:] * p[:-1]
    hold_shifted[-1] = p[-1]    # uncoupled top level kept with unit weight
    cos2 = np.cos(charger.theta / 2.0) ** 2
    sin2 = np.sin(charger.theta / 2.0) ** 2
    q = charger.q
    charge = (1.0 - q) * cos2 * up + q * sin2 * down
    discharge = q * cos2 * hold + (1.0 - q) * sin2 * hold_shifted
    return charge, discharge
