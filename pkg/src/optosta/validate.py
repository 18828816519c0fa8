"""Property checks run by ``optosta validate``.

Every check uses a fixed seed and returns ``(passed, detail)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .counterdiabatic import theta
from .errors import AccuracyError
from .integrator import IntegrationConfig, ScheduleGenerator, converge, integrate
from .invariant import (
    INVARIANT_EIGENVALUES,
    AuxiliaryAngles,
    angles_from_functions,
    invariant_eigenstates,
    invariant_matrix,
    invariant_residual,
    invariant_schedule_angles,
)
from .metrics import (
    cost_instantaneous_frobenius,
    cost_instantaneous_paper,
    fig4_curve,
    mu_values,
)
from .model import (
    SystemParams,
    build_dynamic_matrix,
    dark_mode,
    eigensystem_damped_uniform,
    eigensystem_numeric,
)
from .pulses import InvariantSchedule, Ordering, PulseSample, Sin4Schedule, sample

SEED = 20240607


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    run: Callable[..., tuple]


def _eigen_crosscheck(**_):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        g1, g2 = rng.uniform(-5, 5, 2)
        kappa = rng.uniform(0, 3)
        g0 = math.hypot(g1, g2)
        closed = np.sort_complex(eigensystem_damped_uniform(g1, g2, kappa).eigenvalues)
        m = build_dynamic_matrix(SystemParams.uniform(kappa), g1, g2)
        numeric = eigensystem_numeric(m).eigenvalues
        worst = max(worst, float(np.max(np.abs(np.sort_complex(numeric) - closed))) / max(1.0, g0))
    return worst <= 1e-10, f"max scaled eigenvalue gap {worst:.2e} (tol 1e-10)"


def _dark_null(**_):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(1000):
        g1, g2 = rng.uniform(-5, 5, 2)
        g0 = math.hypot(g1, g2)
        m = build_dynamic_matrix(SystemParams(), g1, g2)
        worst = max(worst, float(np.linalg.norm(m @ dark_mode(g1, g2))) / g0)
    return worst <= 1e-12, f"max |N psi_dark|/g0 {worst:.2e} (tol 1e-12)"


def _pulse_fd(**_):
    rng = np.random.default_rng(SEED + 2)
    h = 1e-6
    worst = 0.0
    schedules = [
        Sin4Schedule(3.0, 0.2, 1.0, Ordering.AS_PRINTED),
        Sin4Schedule(3.0, 0.2, 1.0, Ordering.COUNTERINTUITIVE),
        InvariantSchedule(0.1, 1.0),
    ]
    for sch in schedules:
        lo, hi = sch.span
        t = rng.uniform(lo + 1e-3, hi - 1e-3, 10_000)
        s = sample(sch, t)
        sp, sm = sample(sch, t + h), sample(sch, t - h)
        scale = sch.amplitude * 2 * math.pi / 1.0
        for d, gp, gm in ((s.dg1, sp.g1, sm.g1), (s.dg2, sp.g2, sm.g2)):
            fd = (gp - gm) / (2 * h)
            worst = max(worst, float(np.max(np.abs(fd - d) / np.maximum(np.abs(d), scale))))
    return worst <= 1e-5, f"max relative FD mismatch {worst:.2e} (tol 1e-5)"


def _invariant_identity(**_):
    sch = InvariantSchedule(0.1, 1.0)
    a, b = invariant_schedule_angles(sch)
    r = invariant_residual(sch, angles_from_functions(a, b), 1.0, np.linspace(0, 1.0, 4001))
    tol = 1e-8 * sch.amplitude
    return r <= tol, f"residual {r:.2e} (tol {tol:.2e})"


def _invariant_spectrum(**_):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(1000):
        ang = AuxiliaryAngles(*rng.uniform(-math.pi, math.pi, 2))
        inv = invariant_matrix(ang, 1.0).matrix
        phis = invariant_eigenstates(ang)
        gram = np.array([[np.vdot(p, q) for q in phis] for p in phis])
        worst = max(worst,
                    float(np.max(np.abs(inv - inv.conj().T))),
                    float(np.max(np.abs(gram - np.eye(3)))),
                    max(float(np.linalg.norm(inv @ p - e * p))
                        for p, e in zip(phis, INVARIANT_EIGENVALUES)))
    return worst <= 1e-10, f"max hermiticity/orthonormality/eigen error {worst:.2e}"


def invariant_problem():
    sch = InvariantSchedule(0.1, 1.0)
    return sch, ScheduleGenerator(SystemParams(), sch)


def rk4_error_ratios(base_steps: int = 50):
    sch, gen = invariant_problem()
    psi0 = np.array([1, 0, 0], dtype=complex)
    finals = []
    for k in range(5):
        cfg = IntegrationConfig(0.0, sch.T, sch.T / (base_steps * 2 ** k))
        finals.append(integrate(gen, psi0, cfg).states[-1])
    ref = finals[-1]
    errs = [float(np.linalg.norm(f - ref)) for f in finals[:4]]
    return errs, [errs[i] / errs[i + 1] for i in range(3)]


def _rk4_order(**_):
    errs, ratios = rk4_error_ratios()
    ok = all(8 <= r <= 32 for r in ratios)
    return ok, "ratios " + ", ".join(f"{r:.2f}" for r in ratios) + " (want [8, 32])"


def _norm_conservation(**_):
    sch, gen = invariant_problem()
    traj, _ = converge(gen, [1, 0, 0], IntegrationConfig(0, sch.T, sch.T / 4000))
    dev = float(np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1)))
    return dev <= 1e-9, f"max | |A| - 1 | {dev:.2e} (tol 1e-9)"


def _convergence(debug_coarse_dt=False, **_):
    sch, gen = invariant_problem()
    dt = sch.T / 4 if debug_coarse_dt else sch.T / 4000
    try:
        _, est = converge(gen, [1, 0, 0], IntegrationConfig(0, sch.T, dt))
    except AccuracyError as exc:
        return False, f"not converged: estimate {exc.estimate:.2e} (tol 1e-9)"
    return est <= 1e-9, f"estimate {est:.2e} (tol 1e-9)"


def cd_transitionless_run(convention: str = "exact", G: float = 1000.0, T: float = 1.0,
                          tau_frac: float = 0.1):
    """Counterintuitive sin^4 with CD drive, started in the dark mode.

    Returns ``(trajectory, max directional deviation, final a2 population)``.
    The deviation is ``sqrt(1 - |<dark(t)|A(t)>|^2 / |A|^2)`` over every step
    where ``g0`` exceeds the degeneracy threshold.
    """
    sch = Sin4Schedule(G, tau_frac * T, T, Ordering.COUNTERINTUITIVE)
    gen = ScheduleGenerator(SystemParams(), sch, cd=convention)
    t0, t1 = sch.span
    probe = np.linspace(t0, t1, 200_001)
    s = sample(sch, probe)
    first = int(np.argmax(s.g0 > gen.eps_g))
    psi0 = dark_mode(float(s.g1[first]), float(s.g2[first]))
    traj, _ = converge(gen, psi0, IntegrationConfig(t0, t1, T / 20000))
    p = traj.pulses
    live = p.g0 > gen.eps_g
    g0 = np.where(live, p.g0, 1.0)
    dark = np.stack([-p.g2 / g0, np.zeros_like(g0), p.g1 / g0], axis=1)
    a = traj.states
    ov = np.abs(np.sum(np.conj(dark) * a, axis=1)) ** 2 / np.sum(np.abs(a) ** 2, axis=1)
    dev = np.sqrt(np.clip(1.0 - ov[live], 0.0, None))
    return traj, float(np.max(dev)), float(traj.populations[-1, 2])


def _cd_transitionless(**_):
    _, dev, final = cd_transitionless_run()
    ok = dev <= 1e-6 and abs(final - 1) <= 1e-4
    return ok, f"max deviation {dev:.2e} (tol 1e-6), final |a2|^2 {final:.10f}"


def _damping_factorization(**_):
    sch = InvariantSchedule(0.1, 1.0)
    cfg = IntegrationConfig(0, sch.T, sch.T / 4000)
    ref, _ = converge(ScheduleGenerator(SystemParams(), sch), [1, 0, 0], cfg)
    worst = 0.0
    for kappa in (0.1, 1.0):
        damped, _ = converge(ScheduleGenerator(SystemParams.uniform(kappa), sch), [1, 0, 0], cfg)
        scaled = ref.states * np.exp(-kappa * ref.times / 2)[:, None]
        worst = max(worst, float(np.max(np.abs(damped.states - scaled))))
    return worst <= 1e-8, f"max deviation {worst:.2e} (tol 1e-8)"


def fd_mu(g1f, g2f, t, kappa, h=1e-3):
    """mu for the three eigenvectors by a 5-point stencil on the closed-form
    eigenvectors.  ``g1f``/``g2f`` map time to couplings."""
    def vecs(tt):
        return eigensystem_damped_uniform(g1f(tt), g2f(tt), kappa).eigenvectors
    v = vecs(t)
    d = (-vecs(t + 2 * h) + 8 * vecs(t + h) - 8 * vecs(t - h) + vecs(t - 2 * h)) / (12 * h)
    return np.array([np.vdot(dv, dv).real - abs(np.vdot(vv, dv)) ** 2 for vv, dv in zip(v, d)])


def _cost_chain(**_):
    rng = np.random.default_rng(SEED + 4)
    worst_chain = worst_frob = 0.0
    for _ in range(200):
        a1, a2, w1, w2, p1, p2 = rng.uniform(0.5, 2.0, 6)
        kappa = rng.uniform(0, 0.5)
        def g1f(t): return a1 + 0.3 * math.sin(w1 * t + p1)
        def g2f(t): return a2 + 0.3 * math.cos(w2 * t + p2)
        t = rng.uniform(0, 3)
        s = PulseSample(g1f(t), g2f(t), 0.3 * w1 * math.cos(w1 * t + p1),
                        -0.3 * w2 * math.sin(w2 * t + p2))
        es = eigensystem_damped_uniform(s.g1, s.g2, kappa)
        oracle = float(np.sum(es.eigenvalues ** 2).real) + float(np.sum(fd_mu(g1f, g2f, t, kappa)))
        paper = cost_instantaneous_paper(s.g1, s.g2, s.dg1, s.dg2, kappa) ** 2
        worst_chain = max(worst_chain, abs(paper - oracle) / max(1.0, oracle))
        th = theta(s)
        g0 = math.hypot(s.g1, s.g2)
        frob = cost_instantaneous_frobenius(SystemParams.uniform(kappa), s)
        worst_frob = max(worst_frob, abs(frob - math.sqrt(2 * g0**2 + 0.75 * kappa**2 + th**2 / 2)))
    ok = worst_chain <= 1e-10 and worst_frob <= 1e-12
    return ok, f"spectral chain {worst_chain:.2e} (tol 1e-10), frobenius {worst_frob:.2e} (tol 1e-12)"


def _fig4_shape(**_):
    limit = math.sqrt(2 - 7.5e-5)
    ok = True
    worst = 0.0
    g0 = np.geomspace(0.1, 1e4, 2001)
    if np.ptp(fig4_curve(g0, 0.0)) != 0.0:
        ok = False
    for th in (0.1 * math.pi, 0.2 * math.pi, 0.3 * math.pi):
        c = fig4_curve(g0, th)
        ok &= bool(np.all(np.diff(c) < 0))
        gap = abs(float(fig4_curve([1e3 * th], th)[0]) - limit)
        worst = max(worst, gap)
    ok &= worst <= 1e-6
    return ok, f"monotone and flat as required; asymptote gap {worst:.2e} (tol 1e-6)"


CHECKS = [
    Check("eigen_crosscheck", "closed-form eigenvalues vs numerical eigensolve", _eigen_crosscheck),
    Check("dark_mode_null", "dark mode is a null vector of the undamped matrix", _dark_null),
    Check("pulse_derivatives", "analytic pulse derivatives vs central differences", _pulse_fd),
    Check("invariant_identity", "dI/dt = i[I, N] along the invariant protocol", _invariant_identity),
    Check("invariant_spectrum", "invariant hermiticity, spectrum and eigenstates", _invariant_spectrum),
    Check("rk4_order", "RK4 error ratio under step halving", _rk4_order),
    Check("norm_conservation", "norm conserved without damping", _norm_conservation),
    Check("convergence", "step-halving convergence estimate", _convergence),
    Check("cd_transitionless", "exact CD drive follows the dark mode", _cd_transitionless),
    Check("damping_factorization", "uniform damping = undamped x exp(-kappa t/2)",
          _damping_factorization),
    Check("cost_chain", "spectral and Frobenius cost formulas vs oracles", _cost_chain),
    Check("fig4_shape", "normalized cost curves: flat, decreasing, asymptote", _fig4_shape),
]


def run_checks(debug_coarse_dt: bool = False):
    results = []
    for check in CHECKS:
        try:
            ok, detail = check.run(debug_coarse_dt=debug_coarse_dt)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((check.name, bool(ok), detail))
    return results
