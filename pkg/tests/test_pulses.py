import math

import numpy as np
import pytest

from optosta.errors import InvalidArgumentError, OutOfRangeError
from optosta.pulses import (
    InvariantSchedule,
    Ordering,
    PulseSample,
    Sin4Schedule,
    TabulatedSchedule,
    sample,
    sample_invariant,
    sample_sin4,
    sin4_envelope,
)


def test_sin4_envelope_values():
    assert sin4_envelope(0.5, 1.0) == 1.0
    assert sin4_envelope(0.0, 1.0) == 0.0
    assert sin4_envelope(1.0, 1.0) == 0.0
    assert sin4_envelope(-0.2, 1.0) == 0.0
    assert sin4_envelope(0.25, 1.0) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        sin4_envelope(0.1, 0.0)


def test_sin4_schedule_examples():
    G, T = 2.0, 1.0
    s = sample_sin4(Sin4Schedule(G, 0.1 * T, T), T / 2)
    assert s.g1 == pytest.approx(G)
    assert s.g2 == pytest.approx(G * math.sin(0.4 * math.pi) ** 4)
    for order in Ordering:
        z = sample_sin4(Sin4Schedule(G, 0.1, T, order), -0.01)
        assert z.g1 == 0 and z.g2 == 0
    t = np.linspace(-0.5, 1.5, 101)
    s = sample_sin4(Sin4Schedule(G, 0.0, T), t)
    np.testing.assert_array_equal(s.g1, s.g2)


def test_counterintuitive_swaps_roles():
    a = sample(Sin4Schedule(1.0, 0.2, 1.0, "as-printed"), np.linspace(0, 1.2, 50))
    b = sample(Sin4Schedule(1.0, 0.2, 1.0, "counterintuitive"), np.linspace(0, 1.2, 50))
    np.testing.assert_array_equal(a.g1, b.g2)
    np.testing.assert_array_equal(a.dg2, b.dg1)


def test_sin4_peak_offset_equals_tau():
    tau = 0.13
    t = np.linspace(-0.2, 1.4, 160_001)
    s = sample(Sin4Schedule(1.0, tau, 1.0), t)
    dt = t[1] - t[0]
    assert (t[np.argmax(s.g2)] - t[np.argmax(s.g1)]) == pytest.approx(tau, abs=dt)


def test_sin4_rejects_bad_parameters():
    with pytest.raises(InvalidArgumentError):
        Sin4Schedule(1.0, 0.1, -1.0)
    with pytest.raises(InvalidArgumentError):
        Sin4Schedule(-1.0, 0.1, 1.0)
    assert Sin4Schedule(1.0, -0.2, 1.0).span == (-0.2, 1.0)


def test_invariant_schedule_examples():
    sch = InvariantSchedule(0.1, 1.0)
    s = sample_invariant(sch, 0.0)
    # (pi/2) cot(0.1), evaluated independently
    expected = 1.5707963267948966 / 0.10033467208545055
    assert s.g1 == 0.0
    assert s.g2 == pytest.approx(expected, rel=1e-14)
    assert s.g2 == pytest.approx(15.655568450526451, rel=1e-14)
    assert abs(sample_invariant(sch, 1.0).g2) < 1e-14
    t = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(sample_invariant(sch, t).g0, expected, rtol=1e-14)
    with pytest.raises(OutOfRangeError):
        sample_invariant(sch, 1.1)
    with pytest.raises(InvalidArgumentError):
        InvariantSchedule(0.0, 1.0)


def test_invariant_schedule_keeps_alpha_constant():
    sch = InvariantSchedule(0.3, 2.0)
    t = np.linspace(0, 2.0, 1001)
    s = sample(sch, t)
    beta = math.pi * t / (2 * sch.T)
    resid = (s.g1 * np.cos(beta) - s.g2 * np.sin(beta)) / sch.amplitude
    assert np.max(np.abs(resid)) <= 1e-12


SCHEDULES = [
    Sin4Schedule(5.0, 0.1, 1.0, "as-printed"),
    Sin4Schedule(5.0, 0.25, 2.0, "counterintuitive"),
    Sin4Schedule(5.0, -0.3, 1.0, "as-printed"),
    InvariantSchedule(0.1, 1.0),
    InvariantSchedule(0.7, 3.0),
]


@pytest.mark.parametrize("sch", SCHEDULES, ids=lambda s: type(s).__name__)
def test_derivatives_match_central_differences(sch):
    rng = np.random.default_rng(3)
    lo, hi = sch.span
    h = 1e-6
    t = rng.uniform(lo + 2 * h, hi - 2 * h, 10_000)
    s, sp, sm = sample(sch, t), sample(sch, t + h), sample(sch, t - h)
    scale = sch.amplitude * 2 * math.pi / (hi - lo)
    for d, p, m in ((s.dg1, sp.g1, sm.g1), (s.dg2, sp.g2, sm.g2)):
        fd = (p - m) / (2 * h)
        assert np.max(np.abs(fd - d) / np.maximum(np.abs(d), scale)) <= 1e-5


def test_dispatch_identity():
    s4 = Sin4Schedule(2.0, 0.1, 1.0)
    inv = InvariantSchedule(0.2, 1.0)
    t = np.linspace(0, 1, 11)
    assert np.array_equal(sample(s4, t).g1, sample_sin4(s4, t).g1)
    assert np.array_equal(sample(inv, t).g2, sample_invariant(inv, t).g2)
    with pytest.raises(InvalidArgumentError):
        sample(object(), 0.0)


def test_tabulated_reproduces_nodes_and_loads_csv(tmp_path):
    t = np.linspace(0, 1, 41)
    g1, g2 = np.sin(np.pi * t) ** 2, np.cos(t)
    path = tmp_path / "sched.csv"
    path.write_text("t,g1,g2\n" + "".join(f"{float(a)!r},{float(b)!r},{float(c)!r}\n" for a, b, c in zip(t, g1, g2)))
    sch = TabulatedSchedule.from_csv(path)
    s = sample(sch, t)
    np.testing.assert_allclose(s.g1, g1, atol=1e-14)
    np.testing.assert_allclose(s.g2, g2, atol=1e-14)
    # spline derivative of a smooth function is close to the true one in the interior
    mid = sample(sch, 0.5)
    assert mid.dg2 == pytest.approx(-math.sin(0.5), abs=1e-4)
    with pytest.raises(OutOfRangeError):
        sample(sch, 1.5)


def test_tabulated_validation(tmp_path):
    with pytest.raises(InvalidArgumentError):
        TabulatedSchedule([0, 1, 2], [0, 0, 0], [0, 0, 0])
    with pytest.raises(InvalidArgumentError):
        TabulatedSchedule([0, 2, 1, 3], [0] * 4, [0] * 4)
    bad = tmp_path / "bad.csv"
    bad.write_text("time,a,b\n0,0,0\n")
    with pytest.raises(InvalidArgumentError):
        TabulatedSchedule.from_csv(bad)


def test_pulse_sample_helpers():
    s = PulseSample(np.array([3.0, 0.0]), np.array([4.0, 1.0]), np.zeros(2), np.zeros(2))
    np.testing.assert_allclose(s.g0, [5.0, 1.0])
    assert s.at(0).g1 == 3.0
