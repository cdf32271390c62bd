"""Polar-form constellations, baselines, and the record file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Constellation",
    "ConstellationRecord",
    "RecordParseError",
    "validate",
    "normalize",
    "make_apsk",
    "make_square_qam",
    "dumps_record",
    "loads_record",
    "save_record",
    "load_record",
]

_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Constellation:
    """``M`` points ``r_k * exp(1j * theta_k)`` with phases confined to ``[-delta, delta]``.

    ``flags`` carries validation metadata such as ``"degenerate"`` (coincident
    APSK points) or ``"unconstrained_phase"`` (square QAM reference).
    """

    magnitudes: np.ndarray
    phases: np.ndarray
    phase_range: float
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        r = np.array(self.magnitudes, dtype=float).ravel()
        t = np.array(self.phases, dtype=float).ravel()
        if r.shape != t.shape:
            raise ValueError(f"{r.size} magnitudes but {t.size} phases")
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "magnitudes", r)
        object.__setattr__(self, "phases", t)
        object.__setattr__(self, "phase_range", float(self.phase_range))
        object.__setattr__(self, "flags", frozenset(self.flags))

    @classmethod
    def from_points(cls, points, phase_range=None, flags=()):
        points = np.asarray(points, dtype=complex)
        phases = np.angle(points)
        if phase_range is None:
            phase_range = float(np.max(np.abs(phases)))
        return cls(np.abs(points), phases, phase_range, frozenset(flags))

    @property
    def order(self) -> int:
        return self.magnitudes.size

    @property
    def points(self) -> np.ndarray:
        return self.magnitudes * np.exp(1j * self.phases)

    @property
    def mean_power(self) -> float:
        return float(np.mean(self.magnitudes**2))

    def __eq__(self, other):
        if not isinstance(other, Constellation):
            return NotImplemented
        return (
            np.array_equal(self.magnitudes, other.magnitudes)
            and np.array_equal(self.phases, other.phases)
            and self.phase_range == other.phase_range
        )

    def __repr__(self):
        return (
            f"Constellation(M={self.order}, phase_range={self.phase_range:.6g}, "
            f"mean_power={self.mean_power:.6g})"
        )


@dataclass(frozen=True)
class ConstellationRecord:
    constellation: Constellation
    epsilon: float
    design_snr_db: float
    seed: int = 0
    solver_hash: str = ""


def _papr(c):
    p = c.magnitudes**2
    return float(np.max(p) / np.mean(p))


def validate(c: Constellation, papr_max: float = math.inf) -> list[dict]:
    """List every violated constellation constraint; an empty list means valid.

    Each violation is a dict with at least ``code`` and ``message`` keys.
    Constellations flagged ``unconstrained_phase`` skip the phase checks.
    """
    out = []

    def bad(code, message, **extra):
        out.append({"code": code, "message": message, **extra})

    m = c.order
    if m < 2 or m & (m - 1):
        bad("order", f"M={m} is not a power of two >= 2", value=m)
    if m == 0:
        return out
    if np.any(~np.isfinite(c.magnitudes)) or np.any(~np.isfinite(c.phases)):
        bad("finite", "non-finite coordinates")
        return out
    if np.any(c.magnitudes < 0):
        bad("magnitude_sign", "negative magnitude", value=float(np.min(c.magnitudes)))
    power = c.mean_power
    if abs(power - 1.0) > _TOL:
        bad("power", f"mean power {power!r} != 1", value=power)
    delta = c.phase_range
    if "unconstrained_phase" not in c.flags:
        if not 0.0 <= delta <= math.pi / 2:
            bad("phase_range", f"phase range {delta!r} outside [0, pi/2]", value=delta)
        lo, hi = float(np.min(c.phases)), float(np.max(c.phases))
        if lo < -delta - _TOL or hi > delta + _TOL:
            bad("phase_bounds", "phases outside [-delta, delta]", value=(lo, hi))
        if abs(hi - delta) > _TOL:
            bad("phase_max", f"max phase {hi!r} != delta", value=hi)
        if abs(lo + delta) > _TOL:
            bad("phase_min", f"min phase {lo!r} != -delta", value=lo)
    if power > 0:
        papr = _papr(c)
        if papr > papr_max + _TOL:
            bad("papr", f"PAPR {papr!r} exceeds {papr_max!r}", value=papr)
    return out


def normalize(c: Constellation) -> Constellation:
    power = c.mean_power
    if not power > 0:
        raise ValueError("cannot normalize an all-zero constellation")
    r = c.magnitudes / math.sqrt(power)
    # One correction pass absorbs the rounding of the first division.
    r = r / math.sqrt(float(np.mean(r**2)))
    return Constellation(r, c.phases, c.phase_range, c.flags)


def make_apsk(m: int, delta: float) -> Constellation:
    """Single-ring asymmetric PSK: ``m`` unit points equally spaced over ``[-delta, delta]``."""
    if m < 2:
        raise ValueError("M must be >= 2")
    if not 0.0 <= delta <= math.pi / 2:
        raise ValueError(f"delta must lie in [0, pi/2], got {delta}")
    phases = np.linspace(-delta, delta, m)
    phases[0], phases[-1] = -delta, delta
    flags = {"degenerate"} if delta == 0 else set()
    return Constellation(np.ones(m), phases, delta, frozenset(flags))


def _gray(n):
    return n ^ (n >> 1)


def make_square_qam(m: int) -> Constellation:
    """Gray-labelled square QAM with unit mean power.

    Point ``k`` carries the label ``k``; its phase range exceeds pi/2, so it
    is flagged ``unconstrained_phase``.
    """
    bits = int(round(math.log2(m))) if m > 0 else 0
    if m < 4 or 2**bits != m or bits % 2:
        raise ValueError(f"square QAM needs M = 4, 16, 64, ...; got {m}")
    side = 2 ** (bits // 2)
    levels = 2 * np.arange(side) - (side - 1)
    # Gray label -> level index on each rail.
    rail = np.empty(side, dtype=int)
    rail[[_gray(i) for i in range(side)]] = np.arange(side)
    labels = np.arange(m)
    i_idx = rail[labels >> (bits // 2)]
    q_idx = rail[labels & (side - 1)]
    pts = levels[i_idx] + 1j * levels[q_idx]
    return normalize(Constellation.from_points(pts, flags={"unconstrained_phase"}))


# -- record files -----------------------------------------------------------

_FIELDS = (
    "modulation_order",
    "phase_range",
    "magnitudes",
    "phases",
    "epsilon",
    "design_snr_db",
    "seed",
    "solver_hash",
)


class RecordParseError(ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


def _f(x):
    return format(float(x), ".17g")


def dumps_record(rec: ConstellationRecord) -> str:
    c = rec.constellation
    lines = [
        f"modulation_order = {c.order}",
        f"phase_range = {_f(c.phase_range)}",
        "magnitudes = " + " ".join(_f(v) for v in c.magnitudes),
        "phases = " + " ".join(_f(v) for v in c.phases),
        f"epsilon = {_f(rec.epsilon)}",
        f"design_snr_db = {_f(rec.design_snr_db)}",
        f"seed = {int(rec.seed)}",
        f"solver_hash = {rec.solver_hash}",
    ]
    if c.flags:
        lines.append("flags = " + " ".join(sorted(c.flags)))
    return "\n".join(lines) + "\n"


def loads_record(text: str) -> ConstellationRecord:
    values, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise RecordParseError("expected 'key = value'", line=lineno)
        if key in values:
            raise RecordParseError("duplicate key", line=lineno, field=key)
        values[key] = val.strip()
        where[key] = lineno
    for name in _FIELDS:
        if name not in values:
            raise RecordParseError("missing required field", field=name)

    def num(name, conv=float):
        try:
            return conv(values[name])
        except ValueError:
            raise RecordParseError(f"bad value {values[name]!r}", line=where[name], field=name) from None

    def vec(name):
        try:
            return np.array([float(v) for v in values[name].split()])
        except ValueError:
            raise RecordParseError("bad number in list", line=where[name], field=name) from None

    m = num("modulation_order", int)
    mags, phases = vec("magnitudes"), vec("phases")
    for name, arr in (("magnitudes", mags), ("phases", phases)):
        if arr.size != m:
            raise RecordParseError(
                f"modulation_order is {m} but {arr.size} values given",
                line=where[name],
                field=name,
            )
    flags = frozenset(values.get("flags", "").split())
    c = Constellation(mags, phases, num("phase_range"), flags)
    return ConstellationRecord(
        constellation=c,
        epsilon=num("epsilon"),
        design_snr_db=num("design_snr_db"),
        seed=num("seed", int),
        solver_hash=values["solver_hash"],
    )


def save_record(rec: ConstellationRecord, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_record(rec))
    return path


def load_record(path) -> ConstellationRecord:
    with open(path) as fh:
        return loads_record(fh.read())
