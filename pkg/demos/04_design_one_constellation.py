"""Design a 16-point constellation for a given current threshold.

Run: python demos/04_design_one_constellation.py
"""
import numpy as np

from fluidaqam import InfeasibleError, SolveConfig, papr, solve_p2
from fluidaqam.constellation import dumps_record

cfg = SolveConfig(epsilon=1.2, mean_gain2=1.84, mean_gain4=4.96, n_starts=8)
print(f"ceiling for these gain moments: {cfg.ceiling:.3f}")

res = solve_p2(cfg)
c = res.constellation
print(f"converged={res.converged}  surrogate={res.objective:.4f} bits  slack={res.constraint_slack:.2e}")
print(f"phase range {c.phase_range:.3f} rad, PAPR {papr(c):.2f}")
for r, t in sorted(zip(c.magnitudes, c.phases), reverse=True)[:5]:
    print(f"  r={r:.3f}  theta={t:+.3f}")

try:
    solve_p2(cfg.replace(epsilon=cfg.ceiling * 1.1))
except InfeasibleError as exc:
    print("as expected:", exc)

# The first lines of the record file for this design.
print(dumps_record(res.record).splitlines()[0:2])
assert np.isclose(c.mean_power, 1.0)
