"""Fixed-step RK4 integration of ``i dA/dt = M(t) A``.

The generator is sampled at every RK4 stage time (start, midpoint, end of
each step), so fourth order is kept for time-dependent ``M``.  The stepping
loop itself lives in :mod:`optosta._kernels` (numba, or numpy when
``OPTOSTA_DISABLE_NUMBA=1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .counterdiabatic import degeneracy_threshold, driven_generator, theta
from .metrics import cost_instantaneous_frobenius
from .errors import AccuracyError, DivergenceError, InvalidArgumentError
from .model import ModeState, SystemParams, build_dynamic_matrix
from .pulses import PulseSample, sample

DEFAULT_STEPS_PER_PERIOD = 4000
CONVERGE_TOL = 1e-9
MAX_HALVINGS = 6
CHUNK_STEPS = 1 << 16
MIN_STEPS_PER_COUPLING = 20


@dataclass(frozen=True)
class IntegrationConfig:
    """Time span and step.

    When ``(t1 - t0) / dt`` is not an integer (to ~1e-9 relative) the grid
    takes whole steps of ``dt`` followed by one shorter final step, so the
    last state always sits exactly at ``t1``.
    """

    t0: float
    t1: float
    dt: float
    record_every: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1) and self.t1 > self.t0):
            raise InvalidArgumentError("need finite t1 > t0")
        if not (math.isfinite(self.dt) and 0 < self.dt <= (self.t1 - self.t0) * (1 + 1e-12)):
            raise InvalidArgumentError(f"dt must satisfy 0 < dt <= t1 - t0, got {self.dt!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidArgumentError("record_every must be a positive integer")

    def edges(self) -> np.ndarray:
        span = self.t1 - self.t0
        ratio = span / self.dt
        n = round(ratio)
        if n >= 1 and abs(ratio - n) <= 1e-9 * max(1.0, ratio):
            return np.linspace(self.t0, self.t1, n + 1)
        n = int(math.floor(ratio))
        e = self.t0 + self.dt * np.arange(n + 1)
        return np.append(e, self.t1)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray          # (n, 3) complex amplitudes [a1, b, a2]
    populations: np.ndarray     # (n, 3) = |states|**2
    pulses: PulseSample | None = None
    theta: np.ndarray | None = None
    cost_frobenius: np.ndarray | None = None

    def __len__(self):
        return len(self.times)

    def state(self, k) -> ModeState:
        return ModeState.from_array(self.states[k])

    @property
    def final_populations(self) -> np.ndarray:
        return self.populations[-1]


class ScheduleGenerator:
    """Generator ``M(t)`` built from a coupling schedule and damping rates.

    ``cd`` selects the counterdiabatic correction: ``None`` (bare dynamic
    matrix), ``"printed"`` or ``"exact"`` (see
    :mod:`optosta.counterdiabatic`).
    """

    def __init__(self, params: SystemParams, schedule, cd: str | None = None):
        self.params = params
        self.schedule = schedule
        self.cd = cd
        self.eps_g = degeneracy_threshold(schedule)

    def __call__(self, t: float) -> np.ndarray:
        return self.matrices(np.array([t]))[0]

    def matrices(self, times) -> np.ndarray:
        p = sample(self.schedule, np.asarray(times, dtype=float))
        if self.cd is None:
            return build_dynamic_matrix(self.params, p.g1, p.g2)
        return driven_generator(self.params, p, self.cd, self.eps_g)

    def diagnostics(self, times):
        """Pulses, theta and the instantaneous Frobenius cost of ``N + H_cd``.

        The cost always includes the CD term (printed strength when the run
        itself carries no CD drive), so it matches ``optosta cost``.
        """
        p = sample(self.schedule, np.asarray(times, dtype=float))
        th = theta(p, self.eps_g)
        cost = cost_instantaneous_frobenius(self.params, p, self.cd or "printed", self.eps_g)
        return p, th, np.asarray(cost, dtype=float)


def _generator_stack(generator, times) -> np.ndarray:
    if hasattr(generator, "matrices"):
        return np.asarray(generator.matrices(times), dtype=complex)
    return np.array([generator(float(t)) for t in times], dtype=complex)


def _run(generator, psi0, edges, use_numba=None):
    n = len(edges) - 1
    states = np.empty((n + 1, 3), dtype=complex)
    states[0] = psi0
    psi = psi0
    for lo in range(0, n, CHUNK_STEPS):
        hi = min(n, lo + CHUNK_STEPS)
        e = edges[lo:hi + 1]
        h = np.diff(e)
        nodes = np.empty(2 * len(h) + 1)
        nodes[0::2] = e
        nodes[1::2] = e[:-1] + 0.5 * h
        mats = _generator_stack(generator, nodes)
        chunk, done = _kernels.rk4(mats, h, psi, use_numba=use_numba)
        if done < len(h):
            t_bad = float(e[done])
            raise DivergenceError(f"non-finite state after t={t_bad:.17g}", last_good_time=t_bad)
        states[lo + 1:hi + 1] = chunk[1:]
        psi = chunk[-1]
    return states


def _record_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = np.arange(0, n_steps + 1, stride)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


def _as_array(initial) -> np.ndarray:
    if isinstance(initial, ModeState):
        return initial.as_array()
    v = np.asarray(initial, dtype=complex)
    if v.shape != (3,):
        raise InvalidArgumentError("initial state must have 3 components")
    return v


def _build(generator, times, states) -> Trajectory:
    traj = Trajectory(times=times, states=states, populations=np.abs(states) ** 2)
    if hasattr(generator, "diagnostics"):
        traj.pulses, traj.theta, traj.cost_frobenius = generator.diagnostics(times)
    return traj


def integrate(generator: Callable[[float], np.ndarray], initial,
              config: IntegrationConfig, use_numba: bool | None = None) -> Trajectory:
    """Classical RK4 on ``dA/dt = -i M(t) A`` over ``[config.t0, config.t1]``.

    ``generator`` is either a callable ``t -> (3, 3)`` array or an object with
    a vectorized ``matrices(times)`` method (and optionally
    ``diagnostics(times)``, which fills the pulse/theta/cost columns).
    """
    edges = config.edges()
    states = _run(generator, _as_array(initial), edges, use_numba)
    idx = _record_indices(len(edges) - 1, config.record_every)
    return _build(generator, edges[idx], states[idx])


def _refine(edges: np.ndarray, factor: int) -> np.ndarray:
    h = np.diff(edges)
    frac = np.arange(factor) / factor
    inner = (edges[:-1, None] + h[:, None] * frac[None, :]).ravel()
    return np.append(inner, edges[-1])


def converge(generator, initial, config: IntegrationConfig, tol: float = CONVERGE_TOL,
             max_halvings: int = MAX_HALVINGS, use_numba: bool | None = None):
    """Integrate at ``dt``, ``dt/2``, ``dt/4``, ... until two successive runs
    agree to ``tol`` (max Euclidean difference over the coarse grid points).

    Returns ``(trajectory, estimate)`` for the finer run of the accepted pair;
    the trajectory is recorded at the same times as ``integrate`` would
    record with ``config``.  Raises :class:`AccuracyError` after
    ``max_halvings`` halvings.
    """
    psi0 = _as_array(initial)
    base = config.edges()
    n = len(base) - 1
    idx = _record_indices(n, config.record_every)
    prev = _run(generator, psi0, base, use_numba)
    est = math.inf
    fine = prev
    for level in range(1, max_halvings + 1):
        factor = 2 ** level
        fine = _run(generator, psi0, _refine(base, factor), use_numba)
        on_base = fine[::factor]
        coarse_on_base = prev[:: factor // 2]
        est = float(np.max(np.linalg.norm(on_base - coarse_on_base, axis=1)))
        if est <= tol:
            return _build(generator, base[idx], fine[::factor][idx]), est
        prev = fine
    factor = 2 ** max_halvings
    best = _build(generator, base[idx], fine[::factor][idx])
    raise AccuracyError(
        f"RK4 did not converge to {tol:g} after {max_halvings} halvings (estimate {est:.3g})",
        estimate=est, trajectory=best)


def default_dt(T: float, amplitude: float = 0.0) -> float:
    """``T/4000``, shortened so that ``amplitude * dt <= 1/20`` for strong
    couplings (keeps the step-halving search within its budget)."""
    dt = T / DEFAULT_STEPS_PER_PERIOD
    if amplitude > 0:
        dt = min(dt, 1.0 / (MIN_STEPS_PER_COUPLING * amplitude))
    return dt
