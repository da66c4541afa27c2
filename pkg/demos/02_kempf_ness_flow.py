"""Kempf-Ness flow on the smallest example that has a closed form.

For k = r = 1 with b = 2, c = 1 the orbit of GL(1) meets mu = -1 where
|lambda|^2 = (-1 + sqrt 17) / 8. The flow finds it in a handful of steps.
"""
import numpy as np

from adhm_kit import AdhmDatumS4, FlowConfig, kempf_ness_flow_s4

m = AdhmDatumS4([[0]], [[0]], [[2.0]], [[1.0]])
history = []
out, rep = kempf_ness_flow_s4(m, 1.0, FlowConfig(tol=1e-12), require_integrable=False,
                              on_accept=lambda x: history.append(abs(x.b[0, 0]) ** 2 / 4))
for i, lam in enumerate(history):
    print(f"step {i + 1:2d}  lambda^2 = {lam:.14f}")
print("closed form       ", f"{(-1 + np.sqrt(17)) / 8:.14f}")
print(f"converged={rep.converged} residual={rep.final_residual:.1e} |log g|={rep.group_norm:.3f}")
