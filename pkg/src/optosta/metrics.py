"""Populations, transfer fidelity and the energetic cost of CD driving.

Two instantaneous costs are computed side by side:

paper (spectral) form
    ``sqrt(sum_m Re(E_m**2) + sum_m mu_m) = sqrt(2 g0**2 - 3 kappa**2/4 + 2 theta**2)``
    using the uniform-damping eigenvalues ``E_m`` and the eigenvector
    "velocities" ``mu_m = <d lam_m|d lam_m> - |<lam_m|d lam_m>|**2``.
Frobenius form
    ``||N + H_cd||_F`` evaluated entrywise, which for uniform damping and the
    printed CD strength is ``sqrt(2 g0**2 + 3 kappa**2/4 + theta**2/2)``.

They agree only when ``kappa = theta = 0``.  Neither is adjusted to match the
other; :class:`CostReport` carries both plus a discrepancy flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .counterdiabatic import degeneracy_threshold, driven_generator, theta
from .errors import DegenerateCouplingError, DomainError, UnsupportedConfigurationError
from .model import ModeState, SystemParams
from .pulses import PulseSample, sample

FIG4_THETAS = (0.0, 0.1 * math.pi, 0.2 * math.pi, 0.3 * math.pi)
FIG4_KAPPA_RATIO = 0.01
DISCREPANCY_RTOL = 1e-9
MIN_NODES = 2001
QUAD_RTOL = 1e-8
MAX_NODES = 2 ** 20 + 1


def populations(state) -> tuple[float, float, float]:
    if isinstance(state, ModeState):
        return state.populations()
    v = np.asarray(state, dtype=complex)
    p = np.abs(v) ** 2
    return (float(p[0]), float(p[1]), float(p[2]))


def transfer_fidelity(traj, target_mode: int = 2) -> float:
    """Final-time population of ``target_mode`` (0 = a1, 1 = b, 2 = a2)."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    return float(traj.populations[-1, target_mode])


@dataclass(frozen=True)
class MuValues:
    """``mu`` for the bright ``+g0`` mode, bright ``-g0`` mode and dark mode."""

    mu: tuple


def _eigvec_and_rate(g1, g2, dg1, dg2):
    """Uniform-damping eigenvectors and their analytic time derivatives,
    ordered (bright +g0, bright -g0, dark); shapes ``(..., 3)``."""
    g1, g2, dg1, dg2 = (np.asarray(x, dtype=float) for x in (g1, g2, dg1, dg2))
    g0 = np.hypot(g1, g2)
    if np.any(g0 == 0.0):
        raise DegenerateCouplingError("mu is undefined where g1 = g2 = 0")
    dg0 = (g1 * dg1 + g2 * dg2) / g0
    u1, u2 = g1 / g0, g2 / g0
    du1 = (dg1 * g0 - g1 * dg0) / g0**2
    du2 = (dg2 * g0 - g2 * dg0) / g0**2
    r = 1.0 / math.sqrt(2.0)
    one, zero = np.ones_like(g0), np.zeros_like(g0)
    vecs = [
        np.stack([u1 * r, one * r, u2 * r], axis=-1),
        np.stack([u1 * r, -one * r, u2 * r], axis=-1),
        np.stack([-u2, zero, u1], axis=-1),
    ]
    rates = [
        np.stack([du1 * r, zero, du2 * r], axis=-1),
        np.stack([du1 * r, zero, du2 * r], axis=-1),
        np.stack([-du2, zero, du1], axis=-1),
    ]
    return vecs, rates


def mu_values(g1, g2, dg1, dg2) -> MuValues:
    vecs, rates = _eigvec_and_rate(g1, g2, dg1, dg2)
    mu = []
    for v, dv in zip(vecs, rates):
        norm2 = np.sum(np.abs(dv) ** 2, axis=-1)
        proj = np.abs(np.sum(np.conj(v) * dv, axis=-1)) ** 2
        m = norm2 - proj
        mu.append(m if np.ndim(m) else float(m))
    return MuValues(tuple(mu))


def paper_radicand(g0, kappa, theta_value):
    return 2.0 * np.square(g0) - 0.75 * kappa**2 + 2.0 * np.square(theta_value)


def _paper_sqrt(radicand, **parameters):
    rad = np.asarray(radicand, dtype=float)
    if np.any(rad < 0):
        worst = float(np.min(rad))
        raise DomainError(
            f"negative radicand {worst:.6g} in sqrt(2 g0^2 - 3 kappa^2/4 + 2 theta^2)",
            radicand=worst, parameters=parameters)
    out = np.sqrt(rad)
    return out if out.ndim else float(out)


def cost_instantaneous_paper(g1, g2, dg1, dg2, kappa, eps_g: float = 0.0):
    """``sqrt(2 g0**2 - 3 kappa**2/4 + 2 theta**2)``; raises
    :class:`DomainError` for a negative radicand (damping too strong)."""
    s = PulseSample(g1, g2, dg1, dg2)
    th = theta(s, eps_g)
    g0 = np.hypot(g1, g2)
    return _paper_sqrt(paper_radicand(g0, kappa, th), kappa=kappa)


def cost_instantaneous_frobenius(params: SystemParams, sample_: PulseSample,
                                 convention: str = "printed", eps_g: float = 0.0):
    """``sqrt(Tr[H^dag H])`` of ``H = N + H_cd``, summed entry by entry."""
    m = driven_generator(params, sample_, convention, eps_g)
    out = np.sqrt(np.sum(m.real ** 2 + m.imag ** 2, axis=(-2, -1)))
    return out if out.ndim else float(out)


def _instantaneous(schedule, params, times, variant, convention):
    p = sample(schedule, times)
    eps = degeneracy_threshold(schedule)
    if variant == "frobenius":
        return cost_instantaneous_frobenius(params, p, convention, eps)
    if variant == "paper":
        if not params.uniform_damping():
            raise UnsupportedConfigurationError("the spectral cost formula assumes uniform damping")
        return cost_instantaneous_paper(p.g1, p.g2, p.dg1, p.dg2, params.gamma, eps)
    raise ValueError(f"unknown cost variant {variant!r}")


def cost_integral(schedule, params: SystemParams, variant: str = "frobenius",
                  convention: str = "printed", span=None) -> float:
    """Time-averaged cost ``(1/T) int ||H(t)|| dt`` over the schedule span.

    Composite Simpson starting at 2001 nodes, doubling the interval count
    until successive estimates agree to 1e-8 relative.
    """
    t0, t1 = span if span is not None else schedule.span
    length = t1 - t0
    n = MIN_NODES
    prev = None
    while True:
        t = np.linspace(t0, t1, n)
        val = float(simpson(_instantaneous(schedule, params, t, variant, convention), x=t)) / length
        if prev is not None and abs(val - prev) <= QUAD_RTOL * max(abs(val), 1e-300):
            return val
        if val == 0.0 and prev == 0.0:
            return 0.0
        if n >= MAX_NODES:
            return val
        prev = val
        n = 2 * (n - 1) + 1


def fig4_curve(g0_grid, theta_fixed: float, kappa_ratio: float = FIG4_KAPPA_RATIO) -> np.ndarray:
    """Normalized instantaneous cost ``d_t C / g0`` with ``kappa = kappa_ratio * g0``."""
    g0 = np.asarray(g0_grid, dtype=float)
    if np.any(g0 <= 0):
        raise ValueError("g0 values must be > 0")
    # radicand divided through by g0**2 so the theta = 0 curve is exactly flat
    rad = 2.0 - 0.75 * kappa_ratio**2 + 2.0 * np.square(theta_fixed / g0)
    return _paper_sqrt(rad, theta=theta_fixed, kappa_ratio=kappa_ratio)


@dataclass
class CostReport:
    times: np.ndarray
    instantaneous_paper: np.ndarray | None
    instantaneous_frobenius: np.ndarray
    C_frobenius: float
    C_spectral: float | None
    convention: str = "printed"
    notes: list = field(default_factory=list)

    @property
    def discrepancy_flag(self) -> bool:
        if self.instantaneous_paper is None:
            return True
        diff = np.max(np.abs(self.instantaneous_paper - self.instantaneous_frobenius))
        scale = max(np.max(self.instantaneous_paper), np.max(self.instantaneous_frobenius))
        return bool(diff > DISCREPANCY_RTOL * scale)

    def to_json(self) -> dict:
        return {
            "C_frobenius": self.C_frobenius,
            "C_spectral": self.C_spectral,
            "discrepancy_flag": self.discrepancy_flag,
            "cd_convention": self.convention,
            "formulas": {
                "spectral": "sqrt(sum_m Re(E_m^2) + sum_m mu_m) = sqrt(2 g0^2 - 3 kappa^2/4 + 2 theta^2)",
                "frobenius": "sqrt(Tr[H^dag H]), H = N + H_cd; uniform damping: "
                             "sqrt(2 g0^2 + 3 kappa^2/4 + 2 s^2 theta^2), s = CD strength (printed 1/2, exact 1)",
            },
            "notes": list(self.notes),
        }


def cost_report(schedule, params: SystemParams, convention: str = "printed",
                n_nodes: int = MIN_NODES) -> CostReport:
    """Both cost variants on an ``n_nodes`` grid plus their time averages.

    The spectral variant is left as ``None`` (with a note) for non-uniform
    damping; a negative radicand propagates as :class:`DomainError`.
    """
    t0, t1 = schedule.span
    times = np.linspace(t0, t1, n_nodes)
    frob = _instantaneous(schedule, params, times, "frobenius", convention)
    notes = []
    if params.uniform_damping():
        paper = _instantaneous(schedule, params, times, "paper", convention)
        c_spec = cost_integral(schedule, params, "paper", convention)
    else:
        paper, c_spec = None, None
        notes.append("spectral cost skipped: damping is not uniform")
    c_frob = cost_integral(schedule, params, "frobenius", convention)
    return CostReport(times, paper, frob, c_frob, c_spec, convention, notes)
