"""Rebuild the gauge field from ADHM data and integrate its charge.

The one-instanton density is compared with 6 rho^4 / (pi^2 (|x|^2 + rho^2)^4).
"""
import numpy as np

from adhm_kit import asd_residual, charge_integral, curvature_exact, charge_density, gauge_field_at, one_instanton, two_instanton

m = one_instanton(1.0)
xs = np.array([[0, 0, 0, 0], [0.5, 0, 0, 0], [1, 1, 0, 0], [0, 0.3, 2, 1]], dtype=float)
dens = charge_density(curvature_exact(m, xs))
exact = 6 / (np.pi ** 2 * (np.sum(xs ** 2, axis=1) + 1) ** 4)
for x, d, e in zip(xs, dens, exact):
    print(f"x={x}  density {d:.6f}  closed form {e:.6f}")
print("ASD residual at (0.3,0.1,-0.2,0.5):", f"{asd_residual(gauge_field_at(m, [0.3, 0.1, -0.2, 0.5])):.1e}")

for name, datum in (("k=1", m), ("k=2", two_instanton())):
    rep = charge_integral(datum, 6.0, 100_000, seed=0)
    print(f"{name}: charge {rep.charge:.4f} +- {rep.stderr:.4f}")
