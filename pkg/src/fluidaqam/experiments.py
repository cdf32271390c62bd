"""Experiment runners behind the command line.

Each runner takes an :class:`~fluidaqam.config.ExperimentConfig` and an
output directory, writes plot-ready CSV files, and returns the rows it
wrote.  Output is a pure function of the config, so re-running with the
same config reproduces every file byte for byte.
"""

from __future__ import annotations

import csv
import logging
import math
from pathlib import Path

import numpy as np

from .channel import PortStrategy, gain_moments, sample_ensemble, save_ensemble, select_ports
from .config import ExperimentConfig
from .constellation import (
    ConstellationRecord,
    RecordParseError,
    load_record,
    make_apsk,
    save_record,
)
from .energy import current_from_moments, moment2, moment4, papr
from .info import SnrSpec, average_dimi, ssr
from .optimizer import SolveConfig, solve_p2, solve_sweep

log = logging.getLogger(__name__)

__all__ = [
    "channel_gen",
    "optimize",
    "re_region",
    "dimi_sweep",
    "ssr_sweep",
    "design_ensemble",
    "evaluation_ensemble",
    "solve_config",
    "read_csv",
]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, cfg: ExperimentConfig, columns, rows, extra=()):
    """Write rows with a provenance comment line followed by the column header."""
    path = Path(path)
    provenance = [
        f"config_hash={cfg.hash()}",
        f"seed={cfg.seed}",
        f"design_seed={cfg.design_seed}",
        f"eval_seed={cfg.eval_seed}",
        f"noise_seed={cfg.noise_seed}",
        f"scale={cfg.scale}",
        *extra,
    ]
    with open(path, "w", newline="") as fh:
        fh.write("# " + " ".join(provenance) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return path


def read_csv(path):
    """Parse a CSV written by :func:`write_csv` into ``(provenance, rows)``."""
    with open(path) as fh:
        first = fh.readline()
        prov = dict(item.split("=", 1) for item in first[1:].split()) if first.startswith("#") else {}
        rows = list(csv.DictReader(fh))
    return prov, rows


def design_ensemble(cfg: ExperimentConfig):
    return sample_ensemble(cfg.correlation, cfg.n_realizations, cfg.design_seed)


def evaluation_ensemble(cfg: ExperimentConfig):
    return sample_ensemble(cfg.correlation, cfg.n_channel, cfg.eval_seed)


def _gains(cfg, ens, strategy):
    return select_ports(ens, strategy, cfg.random_port_seed)


def solve_config(cfg: ExperimentConfig, ens=None) -> SolveConfig:
    """Solver settings with gain moments from best-port design realizations."""
    ens = design_ensemble(cfg) if ens is None else ens
    mu2, mu4 = gain_moments(_gains(cfg, ens, PortStrategy.best()))
    eh = cfg.eh
    return SolveConfig(
        papr_max=cfg.papr_max,
        rho=eh.rho,
        design_snr_db=cfg.design_snr_db,
        mean_gain2=mu2,
        mean_gain4=mu4,
        modulation_order=cfg.modulation_order,
        n_starts=cfg.n_starts,
        max_iters=cfg.max_iters,
        tol_obj=cfg.tol_obj,
        tol_constraint=cfg.tol_constraint,
        seed=cfg.solver_seed,
        k_o=eh.k_o,
        k2=eh.k2,
        k4=eh.k4,
        r_s=eh.r_s,
    )


# -- channel-gen ---------------------------------------------------------------


def channel_gen(cfg: ExperimentConfig, out, ensemble_format="bin"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ens = design_ensemble(cfg)
    save_ensemble(ens, out / f"design_ensemble.{ensemble_format}", ensemble_format)
    rows = []
    for strategy in cfg.port_strategies:
        mu2, mu4 = gain_moments(_gains(cfg, ens, strategy))
        rows.append({"strategy": strategy.label, "mu2": mu2, "mu4": mu4, "n_realizations": ens.n_realizations})
    write_csv(out / "channel_moments.csv", cfg, ["strategy", "mu2", "mu4", "n_realizations"], rows)
    return rows


# -- optimize ------------------------------------------------------------------


def record_name(index: int) -> str:
    return f"record_eps{index:02d}.txt"


def optimize(cfg: ExperimentConfig, out, verbosity: int = 0):
    """Design one constellation per threshold; write records and ``optimize_summary.csv``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    scfg = solve_config(cfg)
    rows = []
    for i, (eps, res) in enumerate(solve_sweep(scfg, cfg.epsilons)):
        row = {"index": i, "epsilon": eps, "record": "", "delta": "", "papr": "",
               "objective": "", "current": "", "status": ""}
        if res is None:
            row["status"] = "infeasible"
            log.info("epsilon=%g infeasible (ceiling %.6g)", eps, scfg.ceiling)
        else:
            c = res.constellation
            name = record_name(i)
            save_record(res.record, out / name)
            row.update(record=name, delta=c.phase_range, papr=papr(c), objective=res.objective,
                       current=res.constraint_slack + eps,
                       status="ok" if res.converged else "not_converged")
            if verbosity >= 1:
                cols = ["start", "iteration", "objective", "max_violation"]
                write_csv(out / f"solver_log_eps{i:02d}.csv", cfg, cols, res.history, [f"epsilon={eps!r}"])
            log.info("epsilon=%g delta=%.4f papr=%.3f bound=%.6f", eps, c.phase_range, papr(c), res.objective)
        rows.append(row)
    cols = ["index", "epsilon", "status", "record", "delta", "papr", "objective", "current"]
    write_csv(out / "optimize_summary.csv", cfg, cols, rows,
              [f"mu2={scfg.mean_gain2!r}", f"mu4={scfg.mean_gain4!r}", f"epsilon_max={scfg.ceiling!r}"])
    return rows


def find_records(directory):
    return sorted(Path(directory).glob("record_eps*.txt"))


def _load_records(paths):
    out = []
    for p in paths:
        try:
            out.append((Path(p), load_record(p), None))
        except (OSError, RecordParseError) as exc:
            out.append((Path(p), None, str(exc).replace("\n", " ")))
    return out


def _current_stats(c, gains, eh):
    g2 = np.abs(gains) ** 2
    per = current_from_moments(moment2(c), moment4(c), c.phase_range, g2, g2 * g2, eh)
    n = per.size
    mean = math.fsum(per) / n
    se = math.sqrt(math.fsum((per - mean) ** 2) / (n - 1) / n) if n > 1 else 0.0
    return mean, se


# -- re-region -----------------------------------------------------------------

RE_COLUMNS = ["strategy", "scheme", "record", "epsilon", "delta", "papr", "rate", "rate_se",
              "current", "current_se", "status"]


def re_region(cfg: ExperimentConfig, out, record_paths=None):
    """Rate/current of each record and its matched-range single-ring baseline, per strategy."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = find_records(out) if record_paths is None else [Path(p) for p in record_paths]
    records = _load_records(paths)
    rows = []
    strategies = cfg.port_strategies
    ens = evaluation_ensemble(cfg) if strategies else None
    for strategy in strategies:
        gains = _gains(cfg, ens, strategy)
        for path, rec, err in records:
            if err is not None:
                rows.append({**dict.fromkeys(RE_COLUMNS, ""), "strategy": strategy.label,
                             "record": path.name, "status": f"error: {err}"})
                continue
            for scheme, c in _schemes(rec):
                rate = average_dimi(c, gains, cfg.snr, cfg.eh.rho, cfg.n_noise, cfg.noise_seed)
                cur, cur_se = _current_stats(c, gains, cfg.eh)
                rows.append({"strategy": strategy.label, "scheme": scheme, "record": path.name,
                             "epsilon": rec.epsilon, "delta": c.phase_range, "papr": papr(c),
                             "rate": rate.value, "rate_se": rate.std_error,
                             "current": cur, "current_se": cur_se, "status": "ok"})
    write_csv(out / "re_region.csv", cfg, RE_COLUMNS, rows)
    return rows


def _schemes(rec: ConstellationRecord):
    c = rec.constellation
    return [("aqam", c), ("apsk", make_apsk(c.order, min(c.phase_range, math.pi / 2)))]


# -- dimi-sweep ----------------------------------------------------------------

DIMI_COLUMNS = ["strategy", "scheme", "snr_db", "dimi", "se"]


def _pick_record(cfg, out, record_path):
    if record_path is not None:
        return Path(record_path), load_record(record_path)
    candidates = [(p, r) for p, r, e in _load_records(find_records(out)) if e is None]
    if candidates:
        return min(candidates, key=lambda pr: (abs(pr[1].epsilon - cfg.dimi_epsilon), pr[0].name))
    res = solve_p2(solve_config(cfg).replace(epsilon=cfg.dimi_epsilon))
    path = Path(out) / "record_dimi.txt"
    save_record(res.record, path)
    return path, res.record


def dimi_sweep(cfg: ExperimentConfig, out, record_path=None, snr_grid_db=None):
    """Average DIMI versus design SNR for one record and its baseline, per strategy.

    The SNR axis is the design SNR ``rho / (2*N0)`` in dB; the received
    SNR of a realization is that times ``|h|^2``.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    path, rec = _pick_record(cfg, out, record_path)
    grid = cfg.snr_grid_db if snr_grid_db is None else snr_grid_db
    ens = evaluation_ensemble(cfg)
    rows = []
    for strategy in cfg.port_strategies:
        gains = _gains(cfg, ens, strategy)
        for scheme, c in _schemes(rec):
            for snr_db in grid:
                est = average_dimi(c, gains, SnrSpec(float(snr_db), cfg.eh.rho), cfg.eh.rho,
                                   cfg.n_noise, cfg.noise_seed)
                rows.append({"strategy": strategy.label, "scheme": scheme, "snr_db": float(snr_db),
                             "dimi": est.value, "se": est.std_error})
    write_csv(out / "dimi_sweep.csv", cfg, DIMI_COLUMNS, rows,
              [f"record={path.name}", f"record_epsilon={rec.epsilon!r}"])
    return rows


# -- ssr-sweep -----------------------------------------------------------------

SSR_COLUMNS = ["record", "epsilon", "rho", "ssr", "ssr_se", "current", "current_se"]


def ssr_sweep(cfg: ExperimentConfig, out, record_paths=None, rho_grid=None):
    """Symbol success rate and current versus split factor, best-port channels.

    The noise power stays at the configured design value while ``rho``
    varies.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = find_records(out) if record_paths is None else [Path(p) for p in record_paths]
    grid = cfg.rho_grid if rho_grid is None else rho_grid
    n0 = cfg.snr.noise_power
    gains = _gains(cfg, evaluation_ensemble(cfg), PortStrategy.best())
    rows = []
    for path, rec, err in _load_records(paths):
        if err is not None:
            log.error("skipping %s: %s", path, err)
            continue
        c = rec.constellation
        for rho in grid:
            hits, total = ssr(c, gains, float(rho), n0, cfg.n_symbols, cfg.noise_seed, return_counts=True)
            p = hits / total
            cur, cur_se = _current_stats(c, gains, cfg.eh.with_rho(float(rho)))
            rows.append({"record": path.name, "epsilon": rec.epsilon, "rho": float(rho), "ssr": p,
                         "ssr_se": math.sqrt(max(p * (1 - p), 0.0) / total),
                         "current": cur, "current_se": cur_se})
    write_csv(out / "ssr_sweep.csv", cfg, SSR_COLUMNS, rows, [f"n0={n0!r}"])
    return rows
