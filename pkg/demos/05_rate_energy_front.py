"""Trace a rate-current front with the epsilon-constraint sweep.

Designs use best-port moments from one ensemble; rates are measured on a
fresh one so the numbers are out-of-sample.

Run: python demos/05_rate_energy_front.py   (a few seconds)
"""
import numpy as np

from fluidaqam import (CorrelationSpec, PortStrategy, SolveConfig, average_dimi, average_harvested_current,
                       gain_moments, make_apsk, pareto_sweep, sample_ensemble, select_ports)

spec = CorrelationSpec(100, 0.5)
design = select_ports(sample_ensemble(spec, 10_000, 0), PortStrategy.best())
held_out = select_ports(sample_ensemble(spec, 300, 99), PortStrategy.best())
mu2, mu4 = gain_moments(design)
cfg = SolveConfig(mean_gain2=mu2, mean_gain4=mu4, n_starts=6)

front = pareto_sweep(cfg, np.linspace(0.08, 3.5, 5), held_out, n_noise=128)
print("epsilon   rate (AQAM)   current   |  rate (APSK)   current")
for pt in front.points:
    ring = make_apsk(16, pt.record.constellation.phase_range)
    base = average_dimi(ring, held_out, cfg.snr, cfg.rho, 128, seed=1)
    print(f"{pt.epsilon:7.2f}   {pt.rate:.3f}±{pt.rate_se:.3f}   {pt.current:7.3f}   |"
          f"  {base.value:.3f}        {average_harvested_current(ring, held_out, cfg.eh):7.3f}")
