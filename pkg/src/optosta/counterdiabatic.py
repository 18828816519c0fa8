"""Transitionless-driving correction for the three-mode model.

With the mixing angle ``phi = arctan(g1/g2)`` the instantaneous eigenvectors
depend on time only through ``phi``, and its rate is::

    theta = (dg1 g2 - g1 dg2) / (g1**2 + g2**2)

Summing ``i |d lambda_m><lambda_m|`` over the dark mode and both bright modes
cancels every cavity-mechanics term and leaves a direct cavity-cavity drive
``H13 = -H31 = i s theta``.  Two strengths ``s`` are supported:

``"printed"`` (default)
    ``s = 1/2``, the widely quoted matrix ``(1/2)[[0,0,i theta],[0,0,0],[-i theta,0,0]]``.
``"exact"``
    ``s = 1``, the value the sum above actually evaluates to.  Only this one
    keeps the state on the instantaneous dark mode at arbitrary speed.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .model import SystemParams, build_dynamic_matrix
from .pulses import PulseSample

CONVENTIONS = {"printed": 0.5, "exact": 1.0}
DEGENERACY_RTOL = 1e-9


def degeneracy_threshold(schedule) -> float:
    """``eps_g`` below which ``theta`` is forced to zero for this schedule."""
    return DEGENERACY_RTOL * float(schedule.amplitude)


def theta(sample: PulseSample, eps_g: float = 0.0):
    """Mixing-angle rate; zero wherever ``g0 <= eps_g`` (0/0 at pulse edges)."""
    g1, g2 = np.asarray(sample.g1, float), np.asarray(sample.g2, float)
    dg1, dg2 = np.asarray(sample.dg1, float), np.asarray(sample.dg2, float)
    g0sq = g1 * g1 + g2 * g2
    live = g0sq > eps_g * eps_g
    safe = np.where(live, g0sq, 1.0)
    out = np.where(live, (dg1 * g2 - g1 * dg2) / safe, 0.0)
    return out if out.ndim else float(out)


def _strength(convention: str) -> float:
    try:
        return CONVENTIONS[convention]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown CD convention {convention!r}; expected one of {sorted(CONVENTIONS)}") from None


def cd_matrix(theta_value, convention: str = "printed") -> np.ndarray:
    th = np.asarray(theta_value, dtype=float)
    if not np.all(np.isfinite(th)):
        raise InvalidArgumentError("theta must be finite")
    s = _strength(convention)
    m = np.zeros(th.shape + (3, 3), dtype=complex)
    m[..., 0, 2] = 1j * s * th
    m[..., 2, 0] = -1j * s * th
    return m


def driven_generator(params: SystemParams, sample: PulseSample,
                     convention: str = "printed", eps_g: float = 0.0) -> np.ndarray:
    """Dynamic matrix plus the CD correction, ``N + H_cd``."""
    return (build_dynamic_matrix(params, sample.g1, sample.g2)
            + cd_matrix(theta(sample, eps_g), convention))
