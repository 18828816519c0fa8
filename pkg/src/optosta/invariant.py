"""Dynamical invariant of the undamped three-mode model and inverse engineering.

The invariant is parametrized by two auxiliary angles ``alpha`` and ``beta``::

    I = Omega [[0,              cos a sin b,  -i sin a   ],
               [cos a sin b,    0,             cos a cos b],
               [i sin a,        cos a cos b,   0         ]]

For ``i dA/dt = N A`` a quantity ``<A|I|A>`` is conserved when
``dI/dt = i [I, N]``.  With ``N`` the undamped dynamic matrix this holds
exactly when::

    dalpha/dt = g1 cos b - g2 sin b
    dbeta/dt  = tan a (g2 cos b + g1 sin b)

(The commutator sign in ``dI/dt = -i[I, N]``, as sometimes printed, is
inconsistent with the angle equations above; :func:`invariant_residual`
uses the sign that makes ``<A|I|A>`` a constant of motion.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError, SingularAngleError
from .model import SystemParams, build_dynamic_matrix
from .pulses import InvariantSchedule, PulseSample, sample

MIN_SIN_ALPHA = 1e-6


@dataclass(frozen=True)
class AuxiliaryAngles:
    alpha: float
    beta: float
    dalpha: float = 0.0
    dbeta: float = 0.0


@dataclass(frozen=True)
class InvariantMatrix:
    Omega: float
    matrix: np.ndarray


def _unit_matrix(alpha, beta):
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    return np.array([
        [0.0, ca * sb, -1j * sa],
        [ca * sb, 0.0, ca * cb],
        [1j * sa, ca * cb, 0.0],
    ], dtype=complex)


def _unit_matrix_rate(angles: AuxiliaryAngles):
    """Time derivative of the Omega=1 invariant via the chain rule."""
    a, b = angles.alpha, angles.beta
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    d_da = np.array([
        [0.0, -sa * sb, -1j * ca],
        [-sa * sb, 0.0, -sa * cb],
        [1j * ca, -sa * cb, 0.0],
    ], dtype=complex)
    d_db = np.array([
        [0.0, ca * cb, 0.0],
        [ca * cb, 0.0, -ca * sb],
        [0.0, -ca * sb, 0.0],
    ], dtype=complex)
    return angles.dalpha * d_da + angles.dbeta * d_db


def invariant_matrix(angles: AuxiliaryAngles, Omega: float = 1.0) -> InvariantMatrix:
    if not Omega > 0:
        raise InvalidArgumentError(f"Omega must be > 0, got {Omega!r}")
    return InvariantMatrix(Omega, Omega * _unit_matrix(angles.alpha, angles.beta))


def invariant_eigenstates(angles: AuxiliaryAngles) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvectors ``(phi1, phi2, phi3)`` for eigenvalues ``(0, -Omega, +Omega)``."""
    ca, sa = math.cos(angles.alpha), math.sin(angles.alpha)
    cb, sb = math.cos(angles.beta), math.sin(angles.beta)
    r = 1.0 / math.sqrt(2.0)
    phi1 = np.array([ca * cb, -1j * sa, -ca * sb], dtype=complex)
    phi2 = r * np.array([sa * cb - 1j * sb, 1j * ca, -sa * sb - 1j * cb], dtype=complex)
    phi3 = r * np.array([sa * cb + 1j * sb, 1j * ca, -sa * sb + 1j * cb], dtype=complex)
    return phi1, phi2, phi3


INVARIANT_EIGENVALUES = (0.0, -1.0, 1.0)


def aux_derivatives(alpha: float, beta: float, g1: float, g2: float) -> tuple[float, float]:
    """Angle rates ``(dalpha, dbeta)`` driven by couplings ``g1, g2``."""
    cb, sb = math.cos(beta), math.sin(beta)
    dalpha = g1 * cb - g2 * sb
    drive = g2 * cb + g1 * sb
    if math.sin(alpha) == 0.0 and drive != 0.0:
        raise SingularAngleError("alpha is a multiple of pi with nonzero drive; dbeta undefined")
    dbeta = math.tan(alpha) * drive
    return dalpha, dbeta


AngleFunction = Callable[[np.ndarray], tuple]


@dataclass
class InverseEngineeredSchedule:
    """Couplings obtained from prescribed angle trajectories.

    ``alpha_fn`` and ``beta_fn`` map time to ``(value, first derivative,
    second derivative)``; the second derivative feeds ``dg1`` and ``dg2``.
    """

    alpha_fn: AngleFunction
    beta_fn: AngleFunction
    t0: float
    t1: float

    @property
    def span(self) -> tuple[float, float]:
        return (self.t0, self.t1)

    @property
    def amplitude(self) -> float:
        t = np.linspace(self.t0, self.t1, 257)
        s = self.sample(t)
        return float(np.max(np.hypot(s.g1, s.g2)))

    def angles(self, t) -> AuxiliaryAngles:
        a, da, _ = self.alpha_fn(t)
        b, db, _ = self.beta_fn(t)
        return AuxiliaryAngles(a, b, da, db)

    def sample(self, t) -> PulseSample:
        tt = np.asarray(t, dtype=float)
        a, da, dda = (np.asarray(v, dtype=float) for v in self.alpha_fn(tt))
        b, db, ddb = (np.asarray(v, dtype=float) for v in self.beta_fn(tt))
        sa = np.sin(a)
        bad = np.abs(sa) < MIN_SIN_ALPHA
        if np.any(bad):
            t_bad = float(np.atleast_1d(tt)[np.argmax(np.atleast_1d(bad))]) if tt.ndim else float(tt)
            raise SingularAngleError(f"|sin(alpha)| < {MIN_SIN_ALPHA} at t={t_bad}", t=t_bad)
        cot = np.cos(a) / sa
        dcot = -da / sa**2
        cb, sb = np.cos(b), np.sin(b)
        g1 = db * cot * sb + da * cb
        g2 = db * cot * cb - da * sb
        dg1 = (ddb * cot * sb + db * dcot * sb + db * cot * cb * db
               + dda * cb - da * sb * db)
        dg2 = (ddb * cot * cb + db * dcot * cb - db * cot * sb * db
               - dda * sb - da * cb * db)
        out = (g1, g2, dg1, dg2)
        if tt.ndim == 0:
            out = tuple(float(v) for v in out)
        return PulseSample(*out)


def inverse_engineer(alpha_fn: AngleFunction, beta_fn: AngleFunction,
                     t0: float, t1: float) -> InverseEngineeredSchedule:
    """Couplings realizing the angle trajectories::

        g1 = dbeta cot(alpha) sin(beta) + dalpha cos(beta)
        g2 = dbeta cot(alpha) cos(beta) - dalpha sin(beta)
    """
    if not t1 > t0:
        raise InvalidArgumentError("need t1 > t0")
    return InverseEngineeredSchedule(alpha_fn, beta_fn, float(t0), float(t1))


def invariant_schedule_angles(schedule: InvariantSchedule):
    """Angle functions ``alpha = xi``, ``beta = pi t / 2T`` behind the schedule."""
    rate = math.pi / (2 * schedule.T)

    def alpha_fn(t):
        t = np.asarray(t, dtype=float)
        return (np.full_like(t, schedule.xi), np.zeros_like(t), np.zeros_like(t))

    def beta_fn(t):
        t = np.asarray(t, dtype=float)
        return (rate * t, np.full_like(t, rate), np.zeros_like(t))

    return alpha_fn, beta_fn


def invariant_residual(schedule, angles_fn: Callable[[float], AuxiliaryAngles],
                       Omega: float, t_grid) -> float:
    """Largest Frobenius norm of ``dI/dt - i [I, N]`` over the grid.

    ``angles_fn(t)`` returns :class:`AuxiliaryAngles` with analytic rates.  A
    consistent (schedule, angles) pair gives round-off level residuals; an
    inconsistent one returns a large value rather than raising.
    """
    zero = SystemParams()
    worst = 0.0
    for t in np.asarray(t_grid, dtype=float):
        ang = angles_fn(float(t))
        p = sample(schedule, float(t))
        n = build_dynamic_matrix(zero, p.g1, p.g2)
        inv = Omega * _unit_matrix(ang.alpha, ang.beta)
        rate = Omega * _unit_matrix_rate(ang)
        r = rate - 1j * (inv @ n - n @ inv)
        worst = max(worst, float(np.linalg.norm(r)))
    return worst


def angles_from_functions(alpha_fn: AngleFunction, beta_fn: AngleFunction):
    """Adapt ``(value, d1, d2)`` angle functions to an ``angles_fn`` for
    :func:`invariant_residual`."""
    def angles_fn(t):
        a, da, _ = alpha_fn(t)
        b, db, _ = beta_fn(t)
        return AuxiliaryAngles(float(a), float(b), float(da), float(db))
    return angles_fn
