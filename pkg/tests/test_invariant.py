import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optosta.errors import InvalidArgumentError, SingularAngleError
from optosta.integrator import IntegrationConfig, ScheduleGenerator, converge
from optosta.invariant import (
    INVARIANT_EIGENVALUES,
    AuxiliaryAngles,
    angles_from_functions,
    aux_derivatives,
    inverse_engineer,
    invariant_eigenstates,
    invariant_matrix,
    invariant_residual,
    invariant_schedule_angles,
)
from optosta.model import SystemParams, build_dynamic_matrix
from optosta.pulses import InvariantSchedule, PulseSample, sample

angles = st.floats(-math.pi, math.pi, allow_nan=False)


def test_invariant_matrix_examples():
    np.testing.assert_array_equal(invariant_matrix(AuxiliaryAngles(0, 0), 1.0).matrix,
                                  [[0, 0, 0], [0, 0, 1], [0, 1, 0]])
    m = invariant_matrix(AuxiliaryAngles(math.pi / 2, 0.37), 1.0).matrix
    np.testing.assert_allclose(m, [[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], atol=1e-16)
    with pytest.raises(InvalidArgumentError):
        invariant_matrix(AuxiliaryAngles(0, 0), 0.0)


@settings(max_examples=300, deadline=None)
@given(angles, angles, st.floats(0.1, 10))
def test_invariant_hermitian_with_spectrum(a, b, omega):
    m = invariant_matrix(AuxiliaryAngles(a, b), omega).matrix
    np.testing.assert_allclose(m, m.conj().T, atol=1e-14)
    vals = np.linalg.eigvalsh(m)
    np.testing.assert_allclose(vals, [-omega, 0, omega], atol=1e-12 * omega)


def test_eigenstate_examples():
    phi1, _, _ = invariant_eigenstates(AuxiliaryAngles(0.1, 0.0))
    np.testing.assert_allclose(phi1, [math.cos(0.1), -1j * math.sin(0.1), 0], atol=1e-16)
    phi1, _, _ = invariant_eigenstates(AuxiliaryAngles(0.1, math.pi / 2))
    np.testing.assert_allclose(phi1, [0, -1j * math.sin(0.1), -math.cos(0.1)], atol=1e-16)


def test_eigenstates_orthonormal_and_eigen():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        ang = AuxiliaryAngles(*rng.uniform(-math.pi, math.pi, 2))
        phis = invariant_eigenstates(ang)
        gram = np.array([[np.vdot(p, q) for q in phis] for p in phis])
        np.testing.assert_allclose(gram, np.eye(3), atol=1e-12)
        m = invariant_matrix(ang, 2.5).matrix
        for p, eps in zip(phis, INVARIANT_EIGENVALUES):
            assert np.linalg.norm(m @ p - 2.5 * eps * p) <= 1e-10


def test_aux_derivatives_examples():
    assert aux_derivatives(math.pi / 4, 0.0, 1.0, 0.0) == pytest.approx((1.0, 0.0))
    assert aux_derivatives(math.pi / 4, 0.0, 0.0, 1.0) == pytest.approx((0.0, 1.0))
    with pytest.raises(SingularAngleError):
        aux_derivatives(0.0, 0.0, 0.0, 1.0)
    assert aux_derivatives(0.0, 0.0, 1.0, 0.0) == (1.0, 0.0)


def test_aux_derivatives_on_invariant_schedule():
    sch = InvariantSchedule(0.1, 1.0)
    for t in np.linspace(0, 1, 21):
        s = sample(sch, t)
        da, db = aux_derivatives(0.1, math.pi * t / 2, s.g1, s.g2)
        assert abs(da) <= 1e-13 * sch.amplitude
        assert db == pytest.approx(math.pi / 2, rel=1e-13)


def test_inverse_engineer_reproduces_closed_form():
    xi, T = 0.1, 1.0
    a, b = invariant_schedule_angles(InvariantSchedule(xi, T))
    eng = inverse_engineer(a, b, 0.0, T)
    t = np.linspace(0, T, 101)
    ref = sample(InvariantSchedule(xi, T), t)
    got = eng.sample(t)
    for x, y in ((got.g1, ref.g1), (got.g2, ref.g2), (got.dg1, ref.dg1), (got.dg2, ref.dg2)):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-12)


def test_inverse_engineer_static_angles_give_zero():
    const = lambda v: (lambda t: (np.full_like(np.asarray(t, float), v),  # noqa: E731
                                  np.zeros_like(np.asarray(t, float)),
                                  np.zeros_like(np.asarray(t, float))))
    s = inverse_engineer(const(0.2), const(0.9), 0, 1).sample(np.linspace(0, 1, 5))
    assert np.all(s.g1 == 0) and np.all(s.g2 == 0)


def _smooth_angles(rng):
    a0, a1, w1, b0, b1, w2 = rng.uniform(0.3, 1.0, 6)

    def alpha(t):
        t = np.asarray(t, float)
        return (a0 + 0.2 * np.sin(w1 * t), 0.2 * w1 * np.cos(w1 * t), -0.2 * w1**2 * np.sin(w1 * t))

    def beta(t):
        t = np.asarray(t, float)
        return (b0 + b1 * t + 0.3 * np.cos(w2 * t), b1 - 0.3 * w2 * np.sin(w2 * t),
                -0.3 * w2**2 * np.cos(w2 * t))
    return alpha, beta


def test_inverse_engineer_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(20):
        alpha, beta = _smooth_angles(rng)
        eng = inverse_engineer(alpha, beta, 0.0, 2.0)
        for t in np.linspace(0, 2, 41):
            s = eng.sample(t)
            a, da, _ = alpha(t)
            b, db, _ = beta(t)
            got = aux_derivatives(float(a), float(b), s.g1, s.g2)
            assert got[0] == pytest.approx(float(da), abs=1e-10)
            assert got[1] == pytest.approx(float(db), abs=1e-10)


def test_inverse_engineer_derivatives_by_finite_differences():
    alpha, beta = _smooth_angles(np.random.default_rng(8))
    eng = inverse_engineer(alpha, beta, 0.0, 2.0)
    t = np.linspace(0.1, 1.9, 50)
    h = 1e-6
    s, sp, sm = eng.sample(t), eng.sample(t + h), eng.sample(t - h)
    np.testing.assert_allclose(s.dg1, (sp.g1 - sm.g1) / (2 * h), rtol=1e-5, atol=1e-6)
    np.testing.assert_allclose(s.dg2, (sp.g2 - sm.g2) / (2 * h), rtol=1e-5, atol=1e-6)


def test_inverse_engineer_singular_alpha():
    zero = lambda t: (np.zeros_like(np.asarray(t, float)),) * 3  # noqa: E731
    beta = lambda t: (np.asarray(t, float), np.ones_like(np.asarray(t, float)),  # noqa: E731
                      np.zeros_like(np.asarray(t, float)))
    with pytest.raises(SingularAngleError) as info:
        inverse_engineer(zero, beta, 0, 1).sample(np.linspace(0, 1, 3))
    assert info.value.t == 0.0


def test_residual_small_for_consistent_pair():
    sch = InvariantSchedule(0.1, 1.0)
    a, b = invariant_schedule_angles(sch)
    r = invariant_residual(sch, angles_from_functions(a, b), 1.0, np.linspace(0, 1, 401))
    assert r <= 1e-8 * sch.amplitude


def test_residual_inconsistent_pair_and_omega_scaling():
    class Constant:
        span = (0.0, 1.0)
        amplitude = 1.0

        def sample(self, t):
            return PulseSample(1.0, 1.0, 0.0, 0.0)

    moving = lambda t: AuxiliaryAngles(0.4, 2.0 * t, 0.0, 2.0)  # noqa: E731
    grid = np.linspace(0, 1, 11)
    r1 = invariant_residual(Constant(), moving, 1.0, grid)
    r3 = invariant_residual(Constant(), moving, 3.0, grid)
    assert r1 > 0.1
    assert r3 == pytest.approx(3 * r1, rel=1e-12)


def test_residual_for_random_inverse_engineered_schedules():
    rng = np.random.default_rng(9)
    for _ in range(5):
        alpha, beta = _smooth_angles(rng)
        eng = inverse_engineer(alpha, beta, 0.0, 2.0)
        r = invariant_residual(eng, angles_from_functions(alpha, beta), 1.0, np.linspace(0, 2, 51))
        assert r <= 1e-10 * max(1.0, eng.amplitude)


def test_commutator_sign_selects_conserved_quantity():
    """<A|I|A> is constant along the dynamics, which fixes dI/dt = +i[I, N]."""
    sch = InvariantSchedule(0.1, 1.0)
    traj, _ = converge(ScheduleGenerator(SystemParams(), sch), [0.6, 0.8j, 0],
                       IntegrationConfig(0, 1.0, 1 / 4000, record_every=100))
    vals = []
    for t, a in zip(traj.times, traj.states):
        m = invariant_matrix(AuxiliaryAngles(0.1, math.pi * t / 2), 1.0).matrix
        vals.append(np.vdot(a, m @ a))
    vals = np.array(vals)
    assert np.max(np.abs(vals - vals[0])) < 1e-9

    # the opposite commutator sign leaves an O(g0) residual
    t = 0.3
    s = sample(sch, t)
    n = build_dynamic_matrix(SystemParams(), s.g1, s.g2)
    inv = invariant_matrix(AuxiliaryAngles(0.1, math.pi * t / 2), 1.0).matrix
    h = 1e-6
    rate = (invariant_matrix(AuxiliaryAngles(0.1, math.pi * (t + h) / 2), 1.0).matrix
            - invariant_matrix(AuxiliaryAngles(0.1, math.pi * (t - h) / 2), 1.0).matrix) / (2 * h)
    assert np.linalg.norm(rate - 1j * (inv @ n - n @ inv)) < 1e-8
    assert np.linalg.norm(rate + 1j * (inv @ n - n @ inv)) > 1.0
