"""Internal consistency checks pitting closed forms against brute force.

Every check returns the worst deviation it saw so the caller (tests or
the command-line ``validate`` report) can compare against the published
tolerance instead of a bare boolean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .lindblad import DissipationParams, integrate
from .propagator import (
    KrausSet,
    block_coefficients,
    joint_hamiltonian,
    joint_unitary,
    kraus_set,
)
from .states import SystemParams, thermal_state

BLOCK_UNITARITY_ATOL = 1e-12
COMPLETENESS_ATOL = 1e-12
ORACLE_ATOL = 1e-10
GAMMA_ZERO_ATOL = 1e-8

# (g, delta, tau, N) combinations exercised by default
DEFAULT_PARAMETER_SETS = (
    (0.04, 0.02, 8.0, 100),
    (0.04, 0.0, 8.0, 100),
    (0.04, 0.02, 39.27, 100),
    (0.1, -0.05, 3.0, 40),
    (0.01, 0.02, 120.0, 60),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: max deviation {self.max_deviation:.3e} (tol {self.tolerance:.0e})"


def check_block_unitarity(n_samples: int = 10_000, seed: int = 0) -> CheckResult:
    """|stay|^2 + |swap|^2 = 1 over random couplings, detunings, blocks, intervals."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        params = SystemParams(
            n_levels=int(rng.integers(1, 101)),
            g=float(rng.uniform(1e-3, 0.2)),
            delta=float(rng.uniform(-0.1, 0.1)),
        )
        n = int(rng.integers(1, params.n_levels + 1))
        tau = float(rng.uniform(0.0, 60.0))
        coeff = block_coefficients(params, n, tau)
        worst = max(worst, abs(abs(coeff.stay) ** 2 + abs(coeff.swap) ** 2 - 1.0))
    return CheckResult("block unitarity", worst, BLOCK_UNITARITY_ATOL)


def completeness_deviation(kraus: KrausSet) -> float:
    """Worst deviation of sum_j R_ij^+ R_ij from the identity over both i."""
    dim = kraus.gg.shape[0]
    eye = np.eye(dim)
    ground = kraus.gg.conj().T @ kraus.gg + kraus.ge.conj().T @ kraus.ge
    excited = kraus.eg.conj().T @ kraus.eg + kraus.ee.conj().T @ kraus.ee
    return max(np.abs(ground - eye).max(), np.abs(excited - eye).max())


def check_kraus_completeness(parameter_sets=DEFAULT_PARAMETER_SETS) -> CheckResult:
    worst = 0.0
    for g, delta, tau, n_levels in parameter_sets:
        params = SystemParams(n_levels=n_levels, g=g, delta=delta)
        worst = max(worst, completeness_deviation(kraus_set(params, tau)))
    return CheckResult("Kraus completeness", worst, COMPLETENESS_ATOL)


def block_oracle_deviation(params: SystemParams, n: int, tau: float) -> float:
    """Element-wise gap between closed-form block amplitudes and the
    matrix exponential of the corresponding 2x2 Hamiltonian block."""
    coeff = block_coefficients(params, n, tau)
    h = np.array(
        [[params.delta, params.g * np.sqrt(n)], [params.g * np.sqrt(n), 0.0]],
        dtype=complex,
    )
    u = expm(-1j * h * tau)
    phase = np.exp(-0.5j * params.delta * tau)
    analytic = np.array(
        [
            [phase * np.conj(coeff.stay), coeff.swap],
            [coeff.swap, phase * coeff.stay],
        ]
    )
    return float(np.abs(u - analytic).max())


def check_block_oracle(n_samples: int = 1000, seed: int = 1) -> CheckResult:
    """Closed-form amplitudes vs scipy's matrix exponential on random blocks."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        params = SystemParams(
            n_levels=100,
            g=float(rng.uniform(1e-3, 0.2)),
            delta=float(rng.uniform(-0.1, 0.1)),
        )
        n = int(rng.integers(1, 101))
        tau = float(rng.uniform(0.0, 60.0))
        worst = max(worst, block_oracle_deviation(params, n, tau))
    return CheckResult("block amplitudes vs matrix exponential", worst, ORACLE_ATOL)


def check_dense_oracle(
    n_levels: int = 20, cases=((0.04, 0.02, 8.0), (0.07, -0.03, 15.0), (0.04, 0.0, 39.27))
) -> CheckResult:
    """Block-assembled joint propagator vs dense scaling-and-squaring
    exponential of the full rotating-frame Hamiltonian."""
    worst = 0.0
    for g, delta, tau in cases:
        params = SystemParams(n_levels=n_levels, g=g, delta=delta)
        dense = expm(-1j * joint_hamiltonian(params) * tau)
        worst = max(worst, float(np.abs(dense - joint_unitary(params, tau)).max()))
    return CheckResult("joint propagator vs dense exponential", worst, ORACLE_ATOL)


def check_gamma_zero_reduction(
    n_levels: int = 10, beta: float = 0.1, tau: float = 8.0
) -> CheckResult:
    """Damping-free integration must reproduce the exact propagator."""
    params = SystemParams(n_levels=n_levels, g=0.04, delta=0.02, beta=beta)
    diss = DissipationParams(0.0, 0.0, 0.0, 0.0)
    rho_c = np.zeros((2, 2), dtype=complex)
    rho_c[1, 1] = 1.0  # excited qubit
    rho0 = np.kron(rho_c, thermal_state(params).matrix)
    evolved = integrate(rho0, tau, params, diss, rtol=1e-10, atol=1e-12)
    u = joint_unitary(params, tau)
    exact = u @ rho0 @ u.conj().T
    return CheckResult(
        "gamma=0 reduction to unitary evolution",
        float(np.abs(evolved - exact).max()),
        GAMMA_ZERO_ATOL,
    )


def run_all_checks(fast: bool = False) -> list[CheckResult]:
    """The standard battery of consistency checks, worst deviations included."""
    unitarity_samples = 2000 if fast else 10_000
    oracle_samples = 300 if fast else 1000
    return [
        check_block_unitarity(n_samples=unitarity_samples),
        check_kraus_completeness(),
        check_block_oracle(n_samples=oracle_samples),
        check_dense_oracle(),
        check_gamma_zero_reduction(),
    ]
