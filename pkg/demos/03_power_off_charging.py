# %%
# Power-off charging: ground-state qubits, measured excited
# ==========================================================
#
# Here the chargers carry no energy at all. Detecting a ground-prepared
# qubit in its excited state injects the work of the measurement into
# the joint system: the battery populations step down one level, but
# because the (largest) ground occupation is discarded before
# renormalizing, a well-chosen interval still raises the mean. Charging
# and success probability pull in opposite directions, so the interval
# maximizes exp(x P) * log_x(r): the ratio factor wants short intervals,
# the probability factor wants the swap peak.

import numpy as np

from qbattery import (
    SystemParams,
    mean_occupation,
    occupation_variance,
    run_protocol,
    thermal_state,
)
from qbattery.scheduler import power_off_objective

params = SystemParams(n_levels=100, g=0.04, delta=0.02, beta=0.05)
state = thermal_state(params)

# %%
# The tension: short intervals charge hard with tiny probability, the
# probability peak discharges.

for tau in (0.5, 2.0, 5.0, 8.0, 12.0):
    value = power_off_objective(state, params, tau, x=10.0)
    print(f"tau={tau:5.1f}: objective {value:8.3f}")

# %%
# Twenty compromise rounds against the power-on run with the same start.

off = run_protocol(state, params, "power_off", 20, "power_off_compromise")
on = run_protocol(state, params, "power_on", 20, "analytic")

for label, trajectory in (("power-off", off), ("power-on ", on)):
    final = trajectory.rounds[-1].post_state
    print(
        f"{label} m=20: mean {mean_occupation(final):5.1f}  "
        f"variance {occupation_variance(final):5.1f}  "
        f"ergotropy/energy {trajectory.rounds[-1].thermo.ratio:.3f}  "
        f"cumulative P {trajectory.cumulative_probability:.4f}"
    )

print("\npower-off intervals shrink round over round (greed costs probability):")
print(np.round(off.taus(), 2))

# %%
# The scheme converts a zero-ergotropy thermal state into a useful one
# within a handful of measurements, but the success probability decays
# far faster than under power-on: measurement-only charging is a
# short-burst tool.

erg_off = [r.thermo.ergotropy for r in off.rounds]
print(f"\nergotropy after 5 rounds:  {erg_off[4]:.1f}")
print(f"ergotropy after 20 rounds: {erg_off[-1]:.1f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    rounds = np.arange(1, 21)
    ax.plot(rounds, [r.thermo.energy for r in off.rounds], "o-", label="power-off energy")
    ax.plot(rounds, erg_off, "s--", label="power-off ergotropy")
    ax.plot(rounds, [r.thermo.energy for r in on.rounds], "^-", label="power-on energy")
    ax.set_xlabel("round")
    ax.set_ylabel("energy (qubit-gap units)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig("demo03_power_off_charging.png", dpi=150)
    print("wrote demo03_power_off_charging.png")
except ImportError:
    print("matplotlib not installed; skipping plots")
