"""
Integrator tests: analytic solutions, matrix-exponential oracle, RK4 order,
breakpoints and failure modes.
"""

import math

import numpy as np
import pytest
import scipy.linalg


def test_zero_field_keeps_state():
    """x' = 0 leaves the initial state untouched."""
    from landscape.odeint import integrate

    traj = integrate(lambda t, x: np.zeros_like(x), [1.0, 2.0], (0.0, 1.0))
    assert np.array_equal(traj.final, [1.0, 2.0])
    assert traj.start == 0.0 and traj.end == 1.0


def test_exponential_growth():
    """x' = x from x(0) = 1 reaches e at t = 1 within 1e-6 at default tolerances."""
    from landscape.odeint import integrate

    traj = integrate(lambda t, x: x, [1.0], (0.0, 1.0))
    assert abs(traj.final[0] - math.e) <= 1e-6


def test_full_rotation_returns_to_start():
    """Harmonic oscillator over one period matches expm and returns to [1, 0]."""
    from landscape.odeint import integrate

    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    traj = integrate(lambda t, x: A @ x, [1.0, 0.0], (0.0, 2.0 * np.pi))
    oracle = scipy.linalg.expm(A * 2.0 * np.pi) @ np.array([1.0, 0.0])
    assert np.allclose(traj.final, oracle, atol=1e-6)
    assert np.allclose(traj.final, [1.0, 0.0], atol=1e-6)


def test_linear_system_matches_matrix_exponential(rng):
    """Adaptive endpoints of x' = Ax stay within 10 (rel_tol |x| + abs_tol) of expm(A) x0."""
    from landscape.odeint import IntegratorConfig, integrate

    config = IntegratorConfig()
    for _ in range(10):
        A = rng.uniform(-1.0, 1.0, (2, 2))
        x0 = rng.uniform(-1.0, 1.0, 2)
        traj = integrate(lambda t, x: A @ x, x0, (0.0, 1.0), config)
        oracle = scipy.linalg.expm(A) @ x0
        allowance = 10.0 * config.tolerance_scale(np.linalg.norm(oracle))
        assert np.linalg.norm(traj.final - oracle) <= allowance


def test_fixed_rk4_order():
    """Halving the RK4 step cuts the error on x' = x by at least 8."""
    from landscape.odeint import IntegratorConfig, Method, integrate

    errors = []
    for h in (0.1, 0.05, 0.025):
        config = IntegratorConfig(method=Method.FIXED_RK4, initial_step=h)
        traj = integrate(lambda t, x: x, [1.0], (0.0, 1.0), config)
        errors.append(abs(traj.final[0] - math.e))
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine >= 8.0


def test_forward_backward_roundtrip(rng):
    """Integrating over [0, 1] and back over [1, 0] recovers x0."""
    from landscape.odeint import IntegratorConfig, integrate

    config = IntegratorConfig()
    A = rng.uniform(-1.0, 1.0, (2, 2))

    def rhs(t, x):
        return A @ x + np.array([np.sin(x[1]), 0.1 * np.cos(3.0 * t)])

    x0 = np.array([0.3, -0.7])
    forward = integrate(rhs, x0, (0.0, 1.0), config)
    backward = integrate(rhs, forward.final, (1.0, 0.0), config)
    assert backward.grid[0] > backward.grid[-1]
    assert np.linalg.norm(backward.final - x0) <= 100.0 * config.tolerance_scale(np.linalg.norm(x0))


def test_breakpoints_are_landed_exactly():
    """Every breakpoint inside the span shows up verbatim in the step grid."""
    from landscape.odeint import integrate

    knots = np.linspace(0.0, 1.0, 17)
    traj = integrate(lambda t, x: -x, [1.0], (0.0, 1.0), breakpoints=knots)
    for knot in knots:
        assert knot in traj.grid


def test_fixed_rk4_lands_on_breakpoints():
    """Fixed steps are rounded per segment so the breakpoints are hit."""
    from landscape.odeint import IntegratorConfig, Method, integrate

    config = IntegratorConfig(method=Method.FIXED_RK4, initial_step=0.03)
    traj = integrate(lambda t, x: x, [1.0], (0.0, 1.0), config, breakpoints=[0.1, 0.55])
    assert 0.1 in traj.grid and 0.55 in traj.grid
    assert traj.end == 1.0


def test_steps_yields_initial_condition_first():
    """The step generator starts with (t0, x0) and ends at t1."""
    from landscape.odeint import steps

    produced = list(steps(lambda t, x: -x, [2.0], (0.0, 0.5)))
    assert produced[0][0] == 0.0 and produced[0][1][0] == 2.0
    assert produced[-1][0] == 0.5
    assert all(a[0] < b[0] for a, b in zip(produced, produced[1:]))


def test_integration_is_deterministic():
    """Identical inputs give identical step sequences."""
    from landscape.odeint import integrate

    def rhs(t, x):
        return np.array([x[1], -np.sin(x[0])])

    first = integrate(rhs, [1.0, 0.0], (0.0, 3.0))
    second = integrate(rhs, [1.0, 0.0], (0.0, 3.0))
    assert np.array_equal(first.grid, second.grid)
    assert np.array_equal(first.values, second.values)


def test_max_steps_exceeded_raises():
    """Running out of steps raises StepLimitExceededError with the last good time."""
    from landscape.errors import IntegrationError, StepLimitExceededError
    from landscape.odeint import IntegratorConfig, integrate

    config = IntegratorConfig(max_steps=3)
    with pytest.raises(StepLimitExceededError) as excinfo:
        integrate(lambda t, x: np.array([np.cos(50.0 * t)]), [0.0], (0.0, 10.0), config)
    assert isinstance(excinfo.value, IntegrationError)
    assert 0.0 < excinfo.value.last_time < 10.0


def test_blow_up_raises_integration_error():
    """x' = x^2 from x(0) = 1 blows up at t = 1; integrating past it fails."""
    from landscape.errors import IntegrationError
    from landscape.odeint import integrate

    with pytest.raises(IntegrationError) as excinfo:
        integrate(lambda t, x: x * x, [1.0], (0.0, 2.0))
    assert excinfo.value.last_time < 1.0


def test_invalid_span_rejected():
    """An empty span is an input error."""
    from landscape.odeint import integrate

    with pytest.raises(ValueError):
        integrate(lambda t, x: x, [1.0], (1.0, 1.0))


def test_dense_output_interpolation():
    """Linear interpolation is exact at nodes and rejects times outside the span."""
    from landscape.odeint import DenseOutput

    dense = DenseOutput(np.array([0.0, 1.0, 3.0]), np.array([[0.0], [2.0], [6.0]]))
    assert dense(1.0)[0] == 2.0
    assert dense(2.0)[0] == pytest.approx(4.0)
    assert dense.sample([0.5, 3.0])[:, 0] == pytest.approx([1.0, 6.0])
    with pytest.raises(ValueError):
        dense(3.5)
    with pytest.raises(ValueError):
        DenseOutput(np.array([0.0, 1.0, 1.0]), np.zeros((3, 1)))


def test_integrator_config_rejects_unknown_fields():
    """Config documents are strict."""
    from pydantic import ValidationError

    from landscape.odeint import IntegratorConfig

    with pytest.raises(ValidationError):
        IntegratorConfig(rel_tol=1e-6, tolerance=1e-3)
    assert IntegratorConfig(method="fixed-rk4").method.value == "fixed-rk4"
