"""Exact joint evolution of battery and charger qubit in the rotating frame.

The exchange coupling conserves the total excitation number, so the
joint propagator splits into 2x2 blocks spanned by |e, n-1> and |g, n>
plus two uncoupled levels, |g, 0> and |e, N>. Each block is
exponentiated in closed form; projecting the qubit afterwards yields
four Kraus operators on the battery, labeled by the prepared state i
and the measured state j of the qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import BatteryState, SystemParams

ZERO_PROBABILITY_ATOL = 1e-15

KRAUS_KINDS = ("eg", "ge", "gg", "ee")


class ZeroProbabilityError(ValueError):
    """Raised when a measurement outcome has (numerically) zero probability."""


def rabi_frequency(params: SystemParams, n) -> float | np.ndarray:
    """Oscillation rate of the n-excitation block, sqrt(g^2 n + delta^2/4)."""
    return np.sqrt(params.g**2 * np.asarray(n) + params.delta**2 / 4.0)


def _sin_over_omega(omega, tau: float) -> np.ndarray:
    """sin(omega*tau)/omega with the omega -> 0 limit tau."""
    omega = np.asarray(omega, dtype=float)
    safe = np.where(omega > 0.0, omega, 1.0)
    return np.where(omega > 0.0, np.sin(omega * tau) / safe, tau)


def _amplitude_vectors(params: SystemParams, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Stay and swap amplitudes for every block n = 0..N.

    stay[n] = cos(O_n tau) + i*(delta/2)*sin(O_n tau)/O_n
    swap[n] = -i*exp(-i*delta*tau/2)*g*sqrt(n)*sin(O_n tau)/O_n

    |stay[n]|^2 + |swap[n]|^2 = 1 for every n >= 1 (block unitarity);
    swap[0] = 0 since level 0 has no partner below it.
    """
    n = np.arange(params.dim)
    omega = rabi_frequency(params, n)
    s = _sin_over_omega(omega, tau)
    stay = np.cos(omega * tau) + 0.5j * params.delta * s
    swap = -1j * np.exp(-0.5j * params.delta * tau) * params.g * np.sqrt(n) * s
    return stay, swap


@dataclass(frozen=True)
class BlockCoefficients:
    """Closed-form amplitudes of one conserved-excitation block."""

    n: int
    rabi: float
    stay: complex   # diagonal (no exchange) amplitude, phase convention above
    swap: complex   # off-diagonal (one-quantum exchange) amplitude


def block_coefficients(params: SystemParams, n: int, tau: float) -> BlockCoefficients:
    """Amplitudes of the block coupling |e, n-1> and |g, n>, n >= 1."""
    if n < 1:
        raise ValueError(f"blocks are indexed by n >= 1, got {n}")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    omega = float(rabi_frequency(params, n))
    s = float(_sin_over_omega(omega, tau))
    stay = complex(np.cos(omega * tau) + 0.5j * params.delta * s)
    swap = complex(-1j * np.exp(-0.5j * params.delta * tau) * params.g * np.sqrt(n) * s)
    return BlockCoefficients(n=n, rabi=omega, stay=stay, swap=swap)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """The four battery-space Kraus operators <j|U|i> for one interval tau.

    ``eg`` moves population up one level (prepare excited, measure
    ground), ``ge`` moves it down, ``gg`` and ``ee`` are diagonal. For
    each prepared state i, eg/ee and ge/gg resolve the identity.
    """

    eg: np.ndarray
    ge: np.ndarray
    gg: np.ndarray
    ee: np.ndarray
    tau: float

    def operator(self, kind: str) -> np.ndarray:
        if kind not in KRAUS_KINDS:
            raise ValueError(f"kind must be one of {KRAUS_KINDS}, got {kind!r}")
        return getattr(self, kind)


def kraus_set(params: SystemParams, tau: float) -> KrausSet:
    """Build all four Kraus operators on the N+1 battery levels.

    The uncoupled top corner |e, N> evolves only by the detuning phase,
    which fills the [N, N] entry of the ee operator; without it the
    excited-preparation pair would not resolve the identity.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    dim = params.dim
    stay, swap = _amplitude_vectors(params, tau)
    phase = np.exp(-0.5j * params.delta * tau)

    eg = np.zeros((dim, dim), dtype=complex)
    eg[np.arange(1, dim), np.arange(dim - 1)] = swap[1:]
    ge = np.zeros((dim, dim), dtype=complex)
    ge[np.arange(dim - 1), np.arange(1, dim)] = swap[1:]
    gg = np.diag(phase * stay)
    ee_diag = np.concatenate([phase * np.conj(stay[1:]), [np.exp(-1j * params.delta * tau)]])
    ee = np.diag(ee_diag)
    return KrausSet(eg=eg, ge=ge, gg=gg, ee=ee, tau=tau)


def _diagonal_weights(kraus: KrausSet, kind: str) -> np.ndarray:
    """|matrix element|^2 weights used by the fast diagonal path."""
    op = kraus.operator(kind)
    if kind == "eg":
        return np.abs(np.diag(op, k=-1)) ** 2
    if kind == "ge":
        return np.abs(np.diag(op, k=1)) ** 2
    return np.abs(np.diag(op)) ** 2


def apply_map_diagonal(kraus: KrausSet, kind: str, populations: np.ndarray) -> np.ndarray:
    """Unnormalized populations after the map of one Kraus operator."""
    out = np.zeros_like(populations)
    w = _diagonal_weights(kraus, kind)
    if kind == "eg":
        out[1:] = w * populations[:-1]
    elif kind == "ge":
        out[:-1] = w * populations[1:]
    else:
        out[:] = w * populations
    return out


def povm_apply(kind: str, state: BatteryState, kraus: KrausSet) -> tuple[BatteryState, float]:
    """Apply one element of the measurement-induced channel.

    Returns the normalized post-measurement state and the outcome
    probability (the trace of the unnormalized map). Diagonal inputs
    stay diagonal for all four kinds.
    """
    if state.is_diagonal:
        out = apply_map_diagonal(kraus, kind, state.populations)
        prob = float(out.sum())
        if prob < ZERO_PROBABILITY_ATOL:
            raise ZeroProbabilityError(f"outcome {kind!r} has probability {prob:.3e}")
        return BatteryState.diagonal(out / prob), prob
    op = kraus.operator(kind)
    rho = op @ state.matrix @ op.conj().T
    prob = float(np.trace(rho).real)
    if prob < ZERO_PROBABILITY_ATOL:
        raise ZeroProbabilityError(f"outcome {kind!r} has probability {prob:.3e}")
    return BatteryState.from_matrix(rho / prob), prob


def qubit_lowering() -> np.ndarray:
    """|g><e| in the (|g>, |e>) basis."""
    return np.array([[0.0, 1.0], [0.0, 0.0]])


def battery_lowering(dim: int) -> np.ndarray:
    """Ladder operator with <n-1|A|n> = sqrt(n)."""
    a = np.zeros((dim, dim))
    a[np.arange(dim - 1), np.arange(1, dim)] = np.sqrt(np.arange(1, dim))
    return a


def joint_hamiltonian(params: SystemParams) -> np.ndarray:
    """Rotating-frame Hamiltonian on the qubit (x) battery product space.

    H = delta |e><e| + g (sigma_- A^dagger + sigma_+ A), ordering
    |i, n> -> i*(N+1) + n with i = 0 for |g>.
    """
    dim = params.dim
    a = battery_lowering(dim)
    sm = qubit_lowering()
    excited = np.diag([0.0, 1.0])
    h = params.delta * np.kron(excited, np.eye(dim))
    h = h + params.g * (np.kron(sm, a.conj().T) + np.kron(sm.T, a))
    return h.astype(complex)


def joint_unitary(params: SystemParams, tau: float) -> np.ndarray:
    """Exact propagator exp(-i H tau) on the 2(N+1) joint space.

    Assembled from the closed-form block amplitudes rather than a matrix
    exponential; |g, 0> is left invariant and |e, N> picks up only the
    detuning phase.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    dim = params.dim
    stay, swap = _amplitude_vectors(params, tau)
    phase = np.exp(-0.5j * params.delta * tau)
    u = np.zeros((2 * dim, 2 * dim), dtype=complex)
    u[0, 0] = 1.0
    u[2 * dim - 1, 2 * dim - 1] = np.exp(-1j * params.delta * tau)
    ns = np.arange(1, dim)
    up = dim + ns - 1   # |e, n-1>
    lo = ns             # |g, n>
    u[up, up] = phase * np.conj(stay[1:])
    u[lo, lo] = phase * stay[1:]
    u[up, lo] = swap[1:]
    u[lo, up] = swap[1:]
    return u
