"""Experiment configuration files (YAML) and seed namespaces."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .channel import CorrelationSpec, PortStrategy
from .energy import EhParams
from .info import SnrSpec

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "derive_seed", "parse_strategy", "SCALES"]

# (design ensemble size, evaluation channels, noise draws, symbols per gain)
SCALES = {
    "desk": {"n_realizations": 10_000, "n_channel": 1_000, "n_noise": 256, "n_symbols": 100},
    "paper": {"n_realizations": 1_000_000, "n_channel": 1_000_000, "n_noise": 256, "n_symbols": 1},
}


class ConfigError(ValueError):
    pass


def derive_seed(seed: int, namespace: str) -> int:
    """Deterministic 63-bit seed for ``namespace`` under the top-level ``seed``."""
    digest = hashlib.sha256(f"{int(seed)}/{namespace}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def parse_strategy(text) -> PortStrategy:
    if isinstance(text, PortStrategy):
        return text
    s = str(text).strip().lower()
    if s in ("best", "random"):
        return PortStrategy(s)
    if s.startswith("fixed"):
        rest = s[5:].lstrip(":")
        return PortStrategy.fixed(int(rest) if rest else 1)
    raise ConfigError(f"unknown port strategy {text!r}")


def _default_epsilons():
    return [float(v) for v in np.linspace(0.08, 1.57, 8)]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs.  Defaults follow the reference setup:
    M=16, N=100, W=0.5, rho=0.5, 17 dB design SNR, PAPR cap 15, eight
    thresholds over [0.08, 1.57]."""

    n_ports: int = 100
    width: float = 0.5
    n_realizations: int = 10_000
    seed: int = 0
    eh: EhParams = field(default_factory=EhParams)
    design_snr_db: float = 17.0
    modulation_order: int = 16
    papr_max: float = 15.0
    epsilons: tuple = field(default_factory=lambda: tuple(_default_epsilons()))
    strategies: tuple = ("best", "fixed:1", "random")
    n_channel: int = 1_000
    n_noise: int = 256
    n_symbols: int = 100
    n_starts: int = 20
    max_iters: int = 500
    tol_obj: float = 1e-8
    tol_constraint: float = 1e-8
    dimi_epsilon: float = 0.3
    snr_grid_db: tuple = tuple(float(v) for v in range(-20, 45, 5))
    rho_grid: tuple = tuple(round(0.1 * k, 1) for k in range(11))
    output_dir: str = "out"
    scale: str = "desk"

    def __post_init__(self):
        try:
            CorrelationSpec(self.n_ports, self.width)
            SnrSpec(self.design_snr_db, self.eh.rho)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for s in self.strategies:
            parse_strategy(s)
        for name in ("n_realizations", "n_channel", "n_noise", "n_symbols", "n_starts"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if list(self.epsilons) != sorted(self.epsilons):
            raise ConfigError("epsilons must be sorted ascending")

    @property
    def correlation(self) -> CorrelationSpec:
        return CorrelationSpec(self.n_ports, self.width)

    @property
    def snr(self) -> SnrSpec:
        return SnrSpec(self.design_snr_db, self.eh.rho)

    @property
    def port_strategies(self):
        return [parse_strategy(s) for s in self.strategies]

    @property
    def design_seed(self) -> int:
        return derive_seed(self.seed, "design-channel")

    @property
    def eval_seed(self) -> int:
        return derive_seed(self.seed, "evaluation-channel")

    @property
    def noise_seed(self) -> int:
        return derive_seed(self.seed, "evaluation-noise")

    @property
    def random_port_seed(self) -> int:
        return derive_seed(self.seed, "random-port")

    @property
    def solver_seed(self) -> int:
        return derive_seed(self.seed, "solver") % (2**31)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["epsilons"] = list(self.epsilons)
        d["strategies"] = list(self.strategies)
        d["snr_grid_db"] = list(self.snr_grid_db)
        d["rho_grid"] = list(self.rho_grid)
        return d

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def at_scale(self, scale: str):
        if scale not in SCALES:
            raise ConfigError(f"unknown scale {scale!r}")
        return self.replace(scale=scale, **SCALES[scale])


_SECTIONS = {
    "channel": {"n_ports": "n_ports", "width": "width", "n_realizations": "n_realizations"},
    "snr": {"design_snr_db": "design_snr_db"},
    "mc_budget": {"n_channel": "n_channel", "n_noise": "n_noise", "n_symbols": "n_symbols"},
    "solver": {
        "n_starts": "n_starts",
        "max_iters": "max_iters",
        "tol_obj": "tol_obj",
        "tol_constraint": "tol_constraint",
        "papr_max": "papr_max",
    },
    "dimi_sweep": {"epsilon": "dimi_epsilon", "snr_grid_db": "snr_grid_db"},
    "ssr_sweep": {"rho_grid": "rho_grid"},
}
_TOP = {"seed", "modulation_order", "papr_max", "strategies", "output_dir", "scale", "epsilons"}


def _epsilons(value):
    if isinstance(value, dict):
        try:
            return tuple(float(v) for v in np.linspace(value["start"], value["stop"], int(value["num"])))
        except KeyError as exc:
            raise ConfigError(f"epsilons needs start/stop/num, missing {exc}") from None
    return tuple(float(v) for v in value)


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data or {})
    kw = {}
    scale = data.get("scale", "desk")
    if scale not in SCALES:
        raise ConfigError(f"unknown scale {scale!r}")
    kw.update(SCALES[scale])
    for section, keys in _SECTIONS.items():
        sub = data.pop(section, None) or {}
        if not isinstance(sub, dict):
            raise ConfigError(f"section '{section}' must be a mapping")
        for key, value in sub.items():
            if key == "seed" and section == "channel":
                kw["seed"] = int(value)
                continue
            if key not in keys:
                raise ConfigError(f"unknown key '{section}.{key}'")
            kw[keys[key]] = tuple(float(v) for v in value) if isinstance(value, list) else value
    eh = data.pop("eh", None)
    if eh is not None:
        unknown = set(eh) - {"k_o", "k2", "k4", "r_s", "rho"}
        if unknown:
            raise ConfigError(f"unknown eh keys {sorted(unknown)}")
        try:
            kw["eh"] = EhParams(**{k: float(v) for k, v in eh.items()})
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    for key, value in data.items():
        if key not in _TOP:
            raise ConfigError(f"unknown key '{key}'")
        if key == "epsilons":
            kw[key] = _epsilons(value)
        elif key == "strategies":
            kw[key] = tuple(str(v) for v in value)
        else:
            kw[key] = value
    return ExperimentConfig(**kw)


def load_config(path=None, **overrides) -> ExperimentConfig:
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    if overrides.get("scale"):
        data["scale"] = overrides.pop("scale")
    else:
        overrides.pop("scale", None)
    cfg = config_from_dict(data)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return cfg.replace(**overrides) if overrides else cfg


def dump_default_config(path):
    """Write the default configuration as an annotated YAML file."""
    cfg = ExperimentConfig()
    text = f"""\
# fluidaqam experiment configuration
seed: {cfg.seed}
scale: desk            # desk | paper (paper: 1e6 channel samples)
modulation_order: {cfg.modulation_order}
papr_max: {cfg.papr_max}
epsilons: {{start: 0.08, stop: 1.57, num: 8}}
strategies: [best, "fixed:1", random]
output_dir: out
channel:
  n_ports: {cfg.n_ports}
  width: {cfg.width}   # antenna length in wavelengths
eh:
  k_o: {cfg.eh.k_o}
  k2: {cfg.eh.k2}
  k4: {cfg.eh.k4}
  r_s: {cfg.eh.r_s}
  rho: {cfg.eh.rho}
snr:
  design_snr_db: {cfg.design_snr_db}
dimi_sweep:
  epsilon: {cfg.dimi_epsilon}
  snr_grid_db: {list(cfg.snr_grid_db)}
ssr_sweep:
  rho_grid: {list(cfg.rho_grid)}
"""
    Path(path).write_text(text)
    return Path(path)

