"""Follow blown-up data down to the unperturbed level.

A regular point keeps its stability verdicts and converges. The k = 1 datum
with c = d = 0 is an ideal point: its image under p is the zero datum.
"""
import numpy as np

from adhm_kit import MonadDatumP2, resolution_project, sample_on_level_p2

m, _ = sample_on_level_p2(2, 2, 0.5, seed=4)
res = resolution_project(m, 0.5)
print(f"regular: converged={res.report.converged} in {res.report.iterations} steps, "
      f"C1' {res.c1p_in}->{res.c1p_out}, C2' {res.c2p_in}->{res.c2p_out}, boundary={res.boundary}")
print("  |p(m_t)| first/last:", f"{res.p_trace[0]:.3f} / {res.p_trace[-1]:.3f}")

ideal = MonadDatumP2([[np.sqrt(0.5)]], [[0]], [[0]], [[np.sqrt(0.5)]], [[0]])
res = resolution_project(ideal, 0.5)
print(f"ideal point: boundary={res.boundary}, |p(limit)|={res.p_limit.norm():.1e}")
