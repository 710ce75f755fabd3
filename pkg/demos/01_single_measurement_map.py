# %%
# One evolution-and-measurement round across every charger setting
# ================================================================
#
# A charger qubit prepared with ground weight q couples to the battery
# for an interval tau and is then projected onto
# cos(theta/2)|g> + sin(theta/2)|e>. Scanning (theta, q) maps out which
# preparations/measurements charge the battery and which cool it: the
# (q=0, theta=0) corner pumps a quantum in, the (q=1, theta=pi) corner
# charges using only the work injected by the measurement, and the two
# remaining corners discharge.

import numpy as np

from qbattery import (
    ChargerSpec,
    SystemParams,
    general_round,
    mean_occupation,
    thermal_state,
)

params = SystemParams(n_levels=100, g=0.04, delta=0.02, beta=0.1)
state = thermal_state(params)
baseline = mean_occupation(state)
tau = 8.0

print(f"thermal start: mean occupation {baseline:.2f}")

# %%
# The four corners of the (theta, q) square.

for name, q, theta in [
    ("prepare e, measure g  (pump a quantum in)", 0.0, 0.0),
    ("prepare g, measure e  (measurement does the work)", 1.0, np.pi),
    ("prepare g, measure g  (cooling by measurement)", 1.0, 0.0),
    ("prepare e, measure e  (cooling by measurement)", 0.0, np.pi),
]:
    rec = general_round(state, ChargerSpec(q=q, theta=theta), params, tau)
    ratio = mean_occupation(rec.post_state) / baseline
    print(f"{name:<52} ratio {ratio:.3f}  prob {rec.probability:.3f}")

# %%
# A coarse map of the whole square. The ratio > 1 region hugs the two
# charging corners.

thetas = np.linspace(0.0, np.pi, 21)
qs = np.linspace(0.0, 1.0, 21)
ratio_map = np.empty((len(thetas), len(qs)))
for i, theta in enumerate(thetas):
    for j, q in enumerate(qs):
        rec = general_round(state, ChargerSpec(q=float(q), theta=float(theta)), params, tau)
        ratio_map[i, j] = mean_occupation(rec.post_state) / baseline

charging_fraction = (ratio_map > 1.0).mean()
print(f"\nfraction of the (theta, q) square that charges: {charging_fraction:.2f}")
print(f"strongest charging ratio: {ratio_map.max():.3f}")
print(f"strongest cooling ratio:  {ratio_map.min():.3f}")

# %%
# Optional heat map.

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.pcolormesh(qs, thetas, ratio_map, cmap="RdBu_r", vmin=0.4, vmax=1.6)
    ax.set_xlabel("ground weight q")
    ax.set_ylabel("measurement angle theta")
    ax.set_title("mean occupation ratio after one round")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig("demo01_single_measurement_map.png", dpi=150)
    print("\nwrote demo01_single_measurement_map.png")
except ImportError:
    print("\nmatplotlib not installed; skipping the heat map")
