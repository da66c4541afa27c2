"""Contract the rank-stable level sets: every sampled point is pushed to one
constant datum while staying on the level set and inside the regular locus."""
import numpy as np

from adhm_kit import sample_on_level_p2, sample_on_level_s4, verify_null_homotopy

grid = np.linspace(0, 1, 11)
for zeta in (0.5, -0.5):
    m, _ = sample_on_level_s4(2, 3, zeta, seed=3)
    rep = verify_null_homotopy(m, "s4", grid, zeta)
    print(f"S4 zeta={zeta:+.1f}: level {rep['max_level_residual']:.1e}, "
          f"integrability {rep['max_integrability_residual']:.1e}, "
          f"regularity failures {len(rep['regularity_failures'])}")

for zeta in (0.5, -0.5):
    m, _ = sample_on_level_p2(2, 3, zeta, seed=3)
    rep = verify_null_homotopy(m, "p2", grid, zeta)
    print(f"P2 zeta={zeta:+.1f}: level {rep['max_level_residual']:.1e}, "
          f"endpoint drift {rep['endpoint_constancy']:.1e}, unknown verdicts {rep['unknown_verdicts']}")

# the unmodified last block only preserves the level at zeta = 1/2
m, _ = sample_on_level_p2(2, 3, 0.3, seed=3)
for literal in (False, True):
    rep = verify_null_homotopy(m, "p2", grid, 0.3, literal=literal)
    print(f"zeta=0.3 literal={literal}: max level residual {rep['max_level_residual']:.1e}")
