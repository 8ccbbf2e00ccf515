import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdrkcat.fluxes import buckley_leverett_derivative
from mdrkcat.problems import euler_sinewave_primitive, get_problem
from mdrkcat.reference import (
    ErrorRecord,
    PreconditionError,
    SelfReference,
    buckley_characteristics,
    burgers_characteristics,
    characteristic_residual,
    convergence_study,
    euler_advected_density,
    exact_reference,
    finest_order,
    l1_error,
)
from mdrkcat.fluxes import primitive_to_conservative

COSINE = get_problem("burgers-cosine")
EXPCS = get_problem("burgers-expcossin")
PULSE = get_problem("buckley-downpulse")


def test_burgers_initial_time():
    x = np.linspace(0, 2, 11)
    assert np.array_equal(burgers_characteristics(x, 0.0, COSINE.w0, COSINE.dw0), COSINE.w0(x))


def test_burgers_stationary_characteristic():
    # w0 vanishes at x = 1/2 and 3/2, and so does the solution
    for t in (0.2, 0.8, 1.2):
        w = burgers_characteristics(np.array([0.5, 1.5]), t, COSINE.w0, COSINE.dw0, COSINE.breaking_time)
        assert np.max(np.abs(w)) <= 1e-15


def test_burgers_breaking_time_guard():
    assert COSINE.breaking_time == pytest.approx(4 / math.pi)
    with pytest.raises(PreconditionError):
        burgers_characteristics(np.zeros(3), 1.3, COSINE.w0, COSINE.dw0, COSINE.breaking_time)


def test_expcossin_breaking_time():
    # steepest compression: min over x of w0'(x) equals -1/t*
    x = np.linspace(0, 2, 200001)
    assert -1 / EXPCS.dw0(x).min() == pytest.approx(4 / (math.pi * math.e), rel=1e-8)


@pytest.mark.parametrize("prob,t", [(COSINE, 0.8), (COSINE, 1.2), (EXPCS, 0.3), (EXPCS, 0.45)])
def test_burgers_residual(prob, t):
    x = np.linspace(*prob.domain, 1001)
    w = burgers_characteristics(x, t, prob.w0, prob.dw0, prob.breaking_time)
    res = characteristic_residual(x, t, w, prob.w0, lambda v: v)
    assert np.max(np.abs(res)) <= 1e-13


def test_burgers_against_fixed_point_iteration():
    # independent oracle: contraction w <- w0(x - w t) for t well below breaking
    x = np.linspace(0, 2, 101)
    w = COSINE.w0(x)
    for _ in range(400):
        w = COSINE.w0(x - w * 0.5)
    got = burgers_characteristics(x, 0.5, COSINE.w0, COSINE.dw0, COSINE.breaking_time)
    assert np.max(np.abs(got - w)) <= 1e-14


def test_buckley_residual_and_constant_state():
    x = np.linspace(-1, 1, 801)
    w = buckley_characteristics(x, 0.1, PULSE.w0, PULSE.dw0)
    res = characteristic_residual(x, 0.1, w, PULSE.w0, buckley_leverett_derivative)
    assert np.max(np.abs(res)) <= 1e-13
    const = lambda v: np.full_like(v, 0.3)
    assert np.all(buckley_characteristics(x, 0.1, const, lambda v: np.zeros_like(v)) == 0.3)
    assert np.array_equal(buckley_characteristics(x, 0.0, PULSE.w0, PULSE.dw0), PULSE.w0(x))


def test_buckley_fold_detected():
    with pytest.raises(PreconditionError):
        buckley_characteristics(np.zeros(4), 5.0, PULSE.w0, PULSE.dw0)


def test_buckley_profile_steepens():
    # compression ahead of the trough, values bounded by the initial range
    x = np.linspace(-1, 1, 801)
    w = buckley_characteristics(x, 0.1, PULSE.w0, PULSE.dw0)
    assert w.min() >= 0.25 - 1e-14 and w.max() <= 1.0 + 1e-14
    assert np.abs(np.diff(w)).max() > np.abs(np.diff(PULSE.w0(x))).max()


def test_euler_advected_density():
    x = np.linspace(0, 4, 9)[:-1]
    assert np.allclose(euler_advected_density(x, 0.0), primitive_to_conservative(euler_sinewave_primitive(x)),
                       rtol=0, atol=1e-15)
    assert np.allclose(euler_advected_density(x, 4.0), euler_advected_density(x, 0.0), rtol=0, atol=1e-14)
    rho = euler_advected_density(x, 0.8)[:, 0]
    assert rho == pytest.approx(1 + 0.3 * np.sin(np.pi * (x - 0.8)), abs=1e-14)


def test_l1_error_examples():
    a = np.random.default_rng(0).standard_normal((32, 1))
    assert l1_error(a, a, 0.1) == 0.0
    assert l1_error(a + 1e-3, a, 2.0 / 32) == pytest.approx(2.0 * 1e-3)
    two = np.zeros((4, 2))
    ref = np.column_stack([np.full(4, 0.5), np.full(4, 0.25)])
    assert l1_error(two, ref, 0.25) == pytest.approx(0.5 + 0.25)
    with pytest.raises(ValueError):
        l1_error(np.zeros(4), np.zeros(5), 0.1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_l1_error_is_a_norm(seed):
    rng = np.random.default_rng(seed)
    u, v, w = rng.standard_normal((3, 16, 3))
    dx = 0.1
    assert l1_error(u, v, dx) >= 0
    assert l1_error(u, v, dx) <= l1_error(u, w, dx) + l1_error(w, v, dx) + 1e-12


def test_exact_reference_rejects_self_reference_problem():
    with pytest.raises(ValueError):
        exact_reference(get_problem("euler-sine-system"), np.zeros(4), 0.2)


def test_self_reference_restriction():
    values = np.arange(64.0)[:, None]
    ref = SelfReference("euler-sine-system", "mdrk-3-7-3", 4, 64, 0.15, values)
    assert np.array_equal(ref.restrict(64), values)
    assert ref.restrict(8)[:, 0].tolist() == [0, 8, 16, 24, 32, 40, 48, 56]
    with pytest.raises(ValueError):
        ref.restrict(48)


def test_convergence_study_burgers_order_four():
    rec = convergence_study("burgers-cosine", "mdrk-2-4-2", 0.5, [32, 64, 128, 256])
    assert all(not r.diverged for r in rec)
    assert finest_order(rec) >= 3.7
    errors = [r.error for r in rec]
    assert errors == sorted(errors, reverse=True)


def test_convergence_study_requires_doubling():
    with pytest.raises(ValueError):
        convergence_study("burgers-cosine", "mdrk-2-4-2", 0.5, [8, 24])


def test_finest_order_skips_floored_and_diverged():
    recs = [
        ErrorRecord(8, 0.25, 1e-2),
        ErrorRecord(16, 0.125, 1e-4, order=6.6),
        ErrorRecord(32, 0.0625, 1e-6, order=6.6),
        ErrorRecord(64, 0.03125, 1e-13, order=23.0, floored=True),
        ErrorRecord(128, 0.015625, float("nan"), diverged=True),
    ]
    assert finest_order(recs) == 6.6
    assert math.isnan(finest_order(recs[:1]))
