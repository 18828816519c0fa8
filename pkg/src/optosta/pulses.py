"""Coupling schedules ``(g1(t), g2(t))`` with analytic time derivatives.

All samplers accept a scalar time or a numpy array of times and return a
:class:`PulseSample` whose fields have the same shape as ``t``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidArgumentError, OutOfRangeError


@dataclass(frozen=True)
class PulseSample:
    g1: np.ndarray | float
    g2: np.ndarray | float
    dg1: np.ndarray | float
    dg2: np.ndarray | float

    @property
    def g0(self):
        return np.hypot(self.g1, self.g2)

    def at(self, k) -> "PulseSample":
        """Pick element ``k`` out of an array-valued sample."""
        return PulseSample(*(np.asarray(v)[k] for v in (self.g1, self.g2, self.dg1, self.dg2)))


class Ordering(str, enum.Enum):
    AS_PRINTED = "as-printed"
    COUNTERINTUITIVE = "counterintuitive"


def sin4_envelope(t, T):
    """``sin(pi t/T)**4`` on ``0 < t < T`` and zero elsewhere."""
    if not T > 0:
        raise InvalidArgumentError(f"T must be > 0, got {T!r}")
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < T)
    out = np.where(inside, np.sin(np.pi * t / T) ** 4, 0.0)
    return out if out.ndim else float(out)


def _sin4_derivative(t, T):
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < T)
    x = np.pi * t / T
    out = np.where(inside, 4.0 * (np.pi / T) * np.sin(x) ** 3 * np.cos(x), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Sin4Schedule:
    """Two overlapping ``G sin^4`` pulses of length ``T`` offset by ``tau``.

    ``as-printed``: ``g1 = G f(t)``, ``g2 = G f(t - tau)``, so g1 leads when
    ``tau > 0``.  ``counterintuitive`` swaps the roles so g2 leads, which is
    the ordering that carries ``a1`` to ``a2`` through the dark mode.
    """

    G: float
    tau: float
    T: float
    ordering: Ordering = Ordering.AS_PRINTED

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidArgumentError(f"T must be > 0, got {self.T!r}")
        if not (math.isfinite(self.G) and self.G >= 0):
            raise InvalidArgumentError(f"G must be >= 0, got {self.G!r}")
        if not math.isfinite(self.tau):
            raise InvalidArgumentError("tau must be finite")
        object.__setattr__(self, "ordering", Ordering(self.ordering))

    @property
    def span(self) -> tuple[float, float]:
        return (min(0.0, self.tau), self.T + max(0.0, self.tau))

    @property
    def amplitude(self) -> float:
        return self.G

    def sample(self, t) -> PulseSample:
        return sample_sin4(self, t)


@dataclass(frozen=True)
class InvariantSchedule:
    """Constant-``g0`` schedule obtained from the invariant with ``alpha = xi``
    and ``beta = pi t / 2T``::

        g1 = (pi/2T) cot(xi) sin(pi t/2T)
        g2 = (pi/2T) cot(xi) cos(pi t/2T)
    """

    xi: float
    T: float

    def __post_init__(self):
        if not (0 < self.xi < math.pi / 2):
            raise InvalidArgumentError(f"xi must lie in (0, pi/2), got {self.xi!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidArgumentError(f"T must be > 0, got {self.T!r}")

    @property
    def span(self) -> tuple[float, float]:
        return (0.0, self.T)

    @property
    def amplitude(self) -> float:
        return math.pi / (2 * self.T) / math.tan(self.xi)

    def sample(self, t) -> PulseSample:
        return sample_invariant(self, t)


class TabulatedSchedule:
    """Couplings given on a grid, interpolated with natural cubic splines.

    Derivatives come from the splines themselves.
    """

    def __init__(self, t, g1, g2):
        t = np.asarray(t, dtype=float)
        g1 = np.asarray(g1, dtype=float)
        g2 = np.asarray(g2, dtype=float)
        if t.ndim != 1 or t.shape != g1.shape or t.shape != g2.shape:
            raise InvalidArgumentError("t, g1, g2 must be 1-d arrays of equal length")
        if t.size < 4:
            raise InvalidArgumentError("a tabulated schedule needs at least 4 points")
        if not np.all(np.diff(t) > 0):
            raise InvalidArgumentError("time grid must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
            raise InvalidArgumentError("tabulated values must be finite")
        self.t = t
        self.g1 = g1
        self.g2 = g2
        self._s1 = CubicSpline(t, g1, bc_type="natural")
        self._s2 = CubicSpline(t, g2, bc_type="natural")
        self._d1 = self._s1.derivative()
        self._d2 = self._s2.derivative()

    @classmethod
    def from_csv(cls, path) -> "TabulatedSchedule":
        """Load a ``t,g1,g2`` CSV file (header required)."""
        with open(Path(path), newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            if header != ["t", "g1", "g2"]:
                raise InvalidArgumentError(f"expected header 't,g1,g2', got {','.join(header)!r}")
            try:
                rows = [[float(x) for x in row] for row in reader
                        if row and any(c.strip() for c in row)]
            except ValueError as exc:
                raise InvalidArgumentError(f"{path}: {exc}") from None
        data = np.array(rows, dtype=float).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1], data[:, 2])

    @property
    def span(self) -> tuple[float, float]:
        return (float(self.t[0]), float(self.t[-1]))

    @property
    def amplitude(self) -> float:
        return float(max(np.max(np.abs(self.g1)), np.max(np.abs(self.g2))))

    def sample(self, t) -> PulseSample:
        tt = np.asarray(t, dtype=float)
        lo, hi = self.span
        slack = 1e-12 * (hi - lo)
        if np.any(tt < lo - slack) or np.any(tt > hi + slack):
            raise OutOfRangeError(f"t outside tabulated range [{lo}, {hi}]")
        tt = np.clip(tt, lo, hi)
        vals = (self._s1(tt), self._s2(tt), self._d1(tt), self._d2(tt))
        if tt.ndim == 0:
            vals = tuple(float(v) for v in vals)
        return PulseSample(*vals)


def sample_sin4(schedule: Sin4Schedule, t) -> PulseSample:
    G, T, tau = schedule.G, schedule.T, schedule.tau
    lead = G * sin4_envelope(t, T)
    lag = G * sin4_envelope(np.asarray(t) - tau, T)
    dlead = G * _sin4_derivative(t, T)
    dlag = G * _sin4_derivative(np.asarray(t) - tau, T)
    if schedule.ordering is Ordering.AS_PRINTED:
        return PulseSample(lead, lag, dlead, dlag)
    return PulseSample(lag, lead, dlag, dlead)


def sample_invariant(schedule: InvariantSchedule, t) -> PulseSample:
    T = schedule.T
    tt = np.asarray(t, dtype=float)
    slack = 1e-12 * T
    if np.any(tt < -slack) or np.any(tt > T + slack):
        raise OutOfRangeError(f"t must lie in [0, {T}] for the invariant schedule")
    rate = math.pi / (2 * T)
    amp = rate / math.tan(schedule.xi)
    beta = rate * tt
    s, c = np.sin(beta), np.cos(beta)
    out = (amp * s, amp * c, amp * rate * c, -amp * rate * s)
    if tt.ndim == 0:
        out = tuple(float(v) for v in out)
    return PulseSample(*out)


def sample(schedule, t) -> PulseSample:
    """Sample any schedule kind at ``t``."""
    if isinstance(schedule, Sin4Schedule):
        return sample_sin4(schedule, t)
    if isinstance(schedule, InvariantSchedule):
        return sample_invariant(schedule, t)
    if hasattr(schedule, "sample"):
        return schedule.sample(t)
    raise InvalidArgumentError(f"unknown schedule type {type(schedule).__name__}")


@dataclass(frozen=True)
class ZeroSchedule:
    """Both couplings off for the whole interval ``[0, T]``."""

    T: float

    @property
    def span(self) -> tuple[float, float]:
        return (0.0, self.T)

    @property
    def amplitude(self) -> float:
        return 0.0

    def sample(self, t) -> PulseSample:
        z = np.zeros_like(np.asarray(t, dtype=float))
        z = z if z.ndim else 0.0
        return PulseSample(z, z, z, z)
