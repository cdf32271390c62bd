"""Symbol success rate against the power-splitting factor.

Sending more power to the harvester (small rho) costs detection accuracy;
the noise power stays fixed while rho moves.

Run: python demos/06_ssr_versus_split.py
"""
from fluidaqam import (CorrelationSpec, EhParams, PortStrategy, SnrSpec, SolveConfig, average_harvested_current,
                       gain_moments, sample_ensemble, select_ports, solve_p2, ssr)

spec = CorrelationSpec(100, 0.5)
mu2, mu4 = gain_moments(select_ports(sample_ensemble(spec, 10_000, 0), PortStrategy.best()))
gains = select_ports(sample_ensemble(spec, 500, 5), PortStrategy.best())
n0 = SnrSpec(17.0).noise_power

designs = {eps: solve_p2(SolveConfig(epsilon=eps, mean_gain2=mu2, mean_gain4=mu4, n_starts=4)).constellation
           for eps in (0.08, 1.57)}
print("rho   " + "   ".join(f"SSR/i_DC eps={e}" for e in designs))
for rho in (0.0, 0.2, 0.5, 0.8, 1.0):
    cells = []
    for c in designs.values():
        s = ssr(c, gains, rho, n0, n_symbols_per_gain=100, seed=2)
        cur = average_harvested_current(c, gains, EhParams(rho=rho))
        cells.append(f"{s:.3f}/{cur:.3f}")
    print(f"{rho:.1f}   " + "       ".join(cells))
