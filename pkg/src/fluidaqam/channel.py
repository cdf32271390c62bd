"""Correlated fluid-antenna fading ensembles and port selection.

The N ports of a fluid antenna spanning ``W`` wavelengths see a jointly
Gaussian channel whose port-to-port correlation follows the Jakes/Clarke
model, ``C[i, j] = J0(2*pi*(i - j)*W/(N - 1))``.  A realization is the row
vector ``h = g @ F.T`` with ``F @ F.T = C`` and ``g`` i.i.d. CN(0, 1).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

__all__ = [
    "CorrelationSpec",
    "ChannelEnsemble",
    "PortStrategy",
    "bessel_j0",
    "build_correlation_matrix",
    "psd_factor",
    "sample_ensemble",
    "select_ports",
    "save_ensemble",
    "load_ensemble",
]

_MAGIC = b"FAENS\x00\x01\x00"
_HEADER = struct.Struct("<8sQQdq")


@dataclass(frozen=True)
class CorrelationSpec:
    n_ports: int
    width: float

    def __post_init__(self):
        if int(self.n_ports) != self.n_ports or self.n_ports < 2:
            raise ValueError(f"n_ports must be an integer >= 2, got {self.n_ports!r}")
        if not math.isfinite(self.width) or self.width < 0:
            raise ValueError(f"width must be finite and >= 0, got {self.width!r}")


@dataclass(frozen=True, eq=False)
class ChannelEnsemble:
    """``gains`` is (L, N) complex; rows are realizations, columns ports."""

    gains: np.ndarray
    spec: CorrelationSpec
    seed: int

    @property
    def n_realizations(self) -> int:
        return self.gains.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ChannelEnsemble):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.seed == other.seed
            and self.gains.shape == other.gains.shape
            and np.array_equal(self.gains, other.gains)
        )


@dataclass(frozen=True)
class PortStrategy:
    """Port selection rule.

    ``kind`` is ``"best"``, ``"fixed"`` or ``"random"``.  ``port`` is the
    1-based port index used by ``"fixed"``.
    """

    kind: str
    port: int = 1

    def __post_init__(self):
        if self.kind not in ("best", "fixed", "random"):
            raise ValueError(f"unknown port strategy {self.kind!r}")
        if self.kind == "fixed" and self.port < 1:
            raise ValueError(f"fixed port index must be >= 1, got {self.port}")

    @classmethod
    def best(cls):
        return cls("best")

    @classmethod
    def fixed(cls, port=1):
        return cls("fixed", int(port))

    @classmethod
    def random(cls):
        return cls("random")

    @property
    def label(self) -> str:
        return f"fixed{self.port}" if self.kind == "fixed" else self.kind


def bessel_j0(x):
    """Zero-order Bessel function of the first kind.

    Accepts scalars or arrays; raises ``ValueError`` on non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("bessel_j0 requires finite input")
    out = special.j0(arr)
    return float(out) if out.ndim == 0 else out


def build_correlation_matrix(spec: CorrelationSpec) -> np.ndarray:
    n = spec.n_ports
    lag = np.arange(n)
    diff = lag[:, None] - lag[None, :]
    return bessel_j0(2.0 * np.pi * diff * spec.width / (n - 1))


def psd_factor(c: np.ndarray, sym_tol: float = 1e-10) -> np.ndarray:
    """Return ``F`` with ``F @ F.T`` equal to ``c`` with negative eigenvalues clipped."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {c.shape}")
    asym = np.max(np.abs(c - c.T)) if c.size else 0.0
    if asym > sym_tol * max(1.0, np.max(np.abs(c))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    w, v = np.linalg.eigh(0.5 * (c + c.T))
    w = np.clip(w, 0.0, None)
    return v * np.sqrt(w)


def sample_ensemble(spec: CorrelationSpec, n_realizations: int, seed: int) -> ChannelEnsemble:
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    factor = psd_factor(build_correlation_matrix(spec))
    rng = np.random.default_rng(seed)
    shape = (n_realizations, spec.n_ports)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)
    # W = 0 gives a rank-one C; broadcast port 1 so all ports are bit-identical.
    if spec.width == 0:
        gains = np.repeat((g @ factor.T)[:, :1], spec.n_ports, axis=1)
    else:
        gains = g @ factor.T
    return ChannelEnsemble(gains=gains, spec=spec, seed=int(seed))


def select_ports(ens: ChannelEnsemble, strategy: PortStrategy, seed: int = 0) -> np.ndarray:
    """Pick one gain per realization according to ``strategy``.

    Best: largest magnitude, ties to the lowest port.  Fixed: column
    ``strategy.port`` (1-based).  Random: one column per row drawn from a
    generator keyed on ``(seed, row)`` so the choice does not depend on
    evaluation order.
    """
    gains = ens.gains
    n_rows, n_ports = gains.shape
    if n_rows == 0:
        raise ValueError("empty ensemble")
    if strategy.kind == "best":
        idx = np.argmax(np.abs(gains), axis=1)
    elif strategy.kind == "fixed":
        if not 1 <= strategy.port <= n_ports:
            raise ValueError(f"fixed port {strategy.port} outside [1, {n_ports}]")
        return gains[:, strategy.port - 1].copy()
    else:
        idx = np.array(
            [np.random.default_rng([seed, row]).integers(n_ports) for row in range(n_rows)],
            dtype=np.intp,
        )
    return gains[np.arange(n_rows), idx]


def gain_moments(gains) -> tuple[float, float]:
    """Sample means of ``|h|^2`` and ``|h|^4``, accumulated with ``math.fsum``."""
    p = np.abs(np.asarray(gains)) ** 2
    if p.size == 0:
        raise ValueError("empty gain vector")
    return math.fsum(p) / p.size, math.fsum(p * p) / p.size


# -- ensemble files ---------------------------------------------------------
#
# Binary: 40-byte little-endian header (magic, L:u64, N:u64, W:f64, seed:i64)
# followed by L*2N float64 values, each row interleaved re0, im0, re1, ...
# CSV: first line "L,N,W,seed", second line the values, then L rows of 2N
# interleaved floats printed with 17 significant digits.


def _interleave(gains):
    out = np.empty((gains.shape[0], 2 * gains.shape[1]))
    out[:, 0::2] = gains.real
    out[:, 1::2] = gains.imag
    return out


def save_ensemble(ens: ChannelEnsemble, path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "bin")
    n_rows, n_ports = ens.gains.shape
    flat = _interleave(ens.gains)
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, n_rows, n_ports, ens.spec.width, ens.seed))
            fh.write(flat.astype("<f8").tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="\n") as fh:
            fh.write("L,N,W,seed\n")
            fh.write(f"{n_rows},{n_ports},{ens.spec.width:.17g},{ens.seed}\n")
            for row in flat:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    else:
        raise ValueError(f"unknown ensemble format {fmt!r}")
    return path


def load_ensemble(path) -> ChannelEnsemble:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if head[:8] == _MAGIC:
            _, n_rows, n_ports, width, seed = _HEADER.unpack(head)
            data = np.frombuffer(fh.read(), dtype="<f8")
            if data.size != n_rows * 2 * n_ports:
                raise ValueError(f"{path}: expected {n_rows * 2 * n_ports} values, got {data.size}")
            flat = data.reshape(n_rows, 2 * n_ports)
        else:
            return _load_csv(path)
    gains = flat[:, 0::2] + 1j * flat[:, 1::2]
    return ChannelEnsemble(gains, CorrelationSpec(int(n_ports), float(width)), int(seed))


def _load_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or lines[0].strip() != "L,N,W,seed":
        raise ValueError(f"{path}: missing 'L,N,W,seed' header")
    n_rows, n_ports, width, seed = lines[1].split(",")
    n_rows, n_ports = int(n_rows), int(n_ports)
    rows = lines[2:]
    if len(rows) != n_rows:
        raise ValueError(f"{path}: header says {n_rows} rows, found {len(rows)}")
    flat = np.array([[float(v) for v in r.split(",")] for r in rows]).reshape(n_rows, 2 * n_ports)
    gains = flat[:, 0::2] + 1j * flat[:, 1::2]
    return ChannelEnsemble(gains, CorrelationSpec(n_ports, float(width)), int(seed))
