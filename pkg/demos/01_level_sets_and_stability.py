"""Sample points on the perturbed S^4 and P2-bar level sets and check stability.

At a positive level the S^4 points satisfy C2 (no invariant subspace inside
ker c); at a negative level they satisfy C1. On the blown-up side the monad
data satisfy both C1' and C2' once the level is non-zero, and the group acts
freely.
"""
import numpy as np

from adhm_kit import (
    AdhmDatumS4, check_c1_s4, check_c2_s4, check_c1p, check_c2p, level_residual_s4, level_residual_p2,
    max_rank_margins, sample_on_level_p2, sample_on_level_s4, stabilizer_dim_p2,
)

for zeta in (0.5, -0.5):
    m, rep = sample_on_level_s4(2, 3, zeta, seed=1)
    print(f"S4  zeta={zeta:+.1f}  residual {level_residual_s4(m, zeta):.1e} after {rep.iterations} steps")
    print(f"    C1 {check_c1_s4(m).verdict.value:6s} C2 {check_c2_s4(m).verdict.value}")

for zeta in (0.5, -0.5):
    m, _ = sample_on_level_p2(3, 2, zeta, seed=1)
    s0, s1 = max_rank_margins(m)
    print(f"P2  zeta={zeta:+.1f}  residual {level_residual_p2(m, zeta):.1e}  "
          f"C1' {check_c1p(m).verdict.value}  C2' {check_c2p(m).verdict.value}  "
          f"margins ({s0:.2f}, {s1:.2f})  stabilizer dim {stabilizer_dim_p2(m)}")

# a hand-built datum with an invariant line in ker c, which C2 must catch
a1 = np.diag([1.0, 2.0]).astype(complex)
bad = AdhmDatumS4(a1, np.zeros((2, 2)), np.zeros((2, 2)), np.array([[0, 1], [0, 1]], dtype=complex))
res = check_c2_s4(bad)
print("planted violation:", res.verdict.value, "witness basis\n", np.round(res.witness.basis, 3))
