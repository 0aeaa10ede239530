"""Positivity of the state vs complete positivity of the map.

For the depolarizing model with a dangerous exponential kernel the density
matrix remains positive for every parameter choice (|h| <= 1 keeps
det rho >= 0), yet the solution map rho(0) -> rho(t) can lose complete
positivity: its Choi matrix develops a negative eigenvalue, equivalently
one of the map-decomposition weights g_I, g_z goes negative.  The audit
below scans the dangerous region and locates the threshold
A_eps/gamma^2 ~ 2.62 where the violation actually sets in -- a dangerous
kernel by itself guarantees nothing about the map either way.
"""

import numpy as np

from ctqrw import (
    Depolarizing,
    ExponentialKernel,
    closed_form_solve,
    cp_defect_over_time,
    damping_basis,
    linear_entropy,
    lindblad_from_kraus,
    make_density,
    qubit_closed_solution,
    qubit_kraus,
)

rho0 = make_density(0.5 * np.array([[1, 1], [1, 1]], dtype=complex))
gen = lindblad_from_kraus(qubit_kraus(Depolarizing()))
basis = damping_basis(gen)

print("scan of min_t cp_defect over the dangerous region (gamma = 1):")
ratios = np.array([0.5, 1.0, 2.0, 2.5, 2.7, 3.0, 4.0, 6.0])
mins = []
for mu in ratios:
    kern = ExponentialKernel(amplitude=mu, decay=1.0)
    grid = np.linspace(0.0, 60.0, 601)

    def route(batch, _k=kern, _g=grid):
        return closed_form_solve(basis, _k, batch, _g)

    defects = cp_defect_over_time(route, 2, grid)
    states = closed_form_solve(basis, kern, rho0, grid)
    min_eig = min(np.linalg.eigvalsh((s + s.conj().T) / 2).min() for s in states)
    mins.append(defects.min())
    tag = "dangerous" if kern.discriminant < 0 else "safe"
    print(
        f"  A/gamma^2 = {mu:4.2f} ({tag:9s}): min cp_defect = {defects.min():+.4f}, "
        f"min state eigenvalue = {min_eig:+.1e}"
    )

print("\nthe map decomposition weights for a violating case (A/gamma^2 = 4):")
kern = ExponentialKernel(amplitude=1.0, decay=0.5)
grid = np.linspace(0.0, 40.0, 401)
sol = qubit_closed_solution(Depolarizing(), kern, rho0, grid)
i = int(np.argmin(sol.g["g_I"]))
print(
    f"  at t = {grid[i]:.2f}: g_I = {sol.g['g_I'][i]:+.4f}, g_x = {sol.g['g_x'][i]:+.4f}, "
    f"g_z = {sol.g['g_z'][i]:+.4f}; delta(t) = {linear_entropy(sol.states[i]):+.4f} >= 0"
)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
axes[0].plot(ratios, mins, "o-")
axes[0].axhline(0, color="k", lw=0.5)
axes[0].axvline(0.25, color="gray", ls=":", label=r"safety boundary $A/\gamma^2 = 1/4$")
axes[0].axvline(2.6209, color="r", ls="--", label=r"CP loss threshold $\approx 2.62$")
axes[0].set_xlabel(r"$A_\epsilon/\gamma^2$")
axes[0].set_ylabel(r"$\min_t$ cp defect")
axes[0].legend(fontsize=8)

for key in ("g_I", "g_x", "g_z"):
    axes[1].plot(grid * 0.5 / 1.0, sol.g[key], label=rf"$ {key} $")
axes[1].axhline(0, color="k", lw=0.5)
axes[1].set_xlabel(r"$t/T$")
axes[1].set_ylabel("map weights")
axes[1].legend()
fig.tight_layout()
fig.savefig("demo_cp_audit.png", dpi=150)
print("wrote demo_cp_audit.png")
