"""
Certificate tests: Kalman rank, the planar local margin, trig bounds and the
assembled report.
"""

import numpy as np
import pytest


def _random_trig(rng, trig_range=0.1):
    from landscape.system import TrigSystem

    A = rng.uniform(-1.0, 1.0, (2, 2))
    B = rng.uniform(-1.0, 1.0, 2)
    return TrigSystem(A, B, *(rng.uniform(-trig_range, trig_range, (2, 2)) for _ in range(4)))


def test_kalman_matrix_examples(rng):
    """Columns are B, AB, ..., A^(n-1) B."""
    from landscape.certify import kalman_matrix

    nilpotent = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.array_equal(kalman_matrix(nilpotent, np.array([0.0, 1.0])), [[0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(kalman_matrix(np.eye(2), np.array([1.0, 0.0])), [[1.0, 1.0], [0.0, 0.0]])

    A = rng.uniform(-1.0, 1.0, (4, 4))
    B = rng.uniform(-1.0, 1.0, 4)
    ctrb = kalman_matrix(A, B)
    column = B.copy()
    for k in range(4):
        assert ctrb[:, k] == pytest.approx(column, rel=1e-12, abs=1e-14)
        column = A @ column


def test_controllability_rank_examples():
    """Full rank for the double integrator, rank one when B is an eigenvector."""
    from landscape.certify import controllability_rank

    assert controllability_rank(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([0.0, 1.0])) == (2, True)
    assert controllability_rank(np.eye(2), np.array([1.0, 0.0])) == (1, False)


def test_random_pairs_are_controllable(rng):
    """Uniform(-1, 1) pairs are controllable with probability one."""
    from landscape.certify import controllability_rank

    for _ in range(1000):
        rank, controllable = controllability_rank(rng.uniform(-1.0, 1.0, (2, 2)), rng.uniform(-1.0, 1.0, 2))
        assert controllable and rank == 2


def test_spectral_norm_closed_form_matches_svd(rng):
    """The 2x2 closed form agrees with the SVD."""
    from landscape.certify import spectral_norm

    for _ in range(100):
        M = rng.normal(size=(2, 2))
        assert spectral_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-12)
    assert spectral_norm(0.1 * np.eye(2)) == pytest.approx(0.1)
    assert spectral_norm(np.zeros((2, 2))) == 0.0
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0)


def test_local_margin_examples():
    """Double integrator gives m = 1; identity A collapses the margin."""
    from landscape.certify import lipschitz_m, local_margin

    nilpotent = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert lipschitz_m(nilpotent, np.array([0.0, 1.0])) == pytest.approx(1.0)
    assert local_margin(nilpotent, np.array([0.0, 1.0])) == pytest.approx(1.0)
    assert local_margin(np.eye(2), np.array([0.3, -0.8])) == pytest.approx(0.0, abs=1e-15)


def test_local_margin_matches_brute_force(rng):
    """Closed form equals min over lambda of ||AB - lambda B|| / ||B||^2."""
    from landscape.certify import local_margin

    for _ in range(100):
        A = rng.uniform(-1.0, 1.0, (2, 2))
        B = rng.uniform(-1.0, 1.0, 2)
        ab = A @ B

        def objective(lams):
            return np.linalg.norm(ab[None, :] - lams[:, None] * B[None, :], axis=1)

        coarse = np.linspace(-10.0, 10.0, 20001)
        centre = coarse[np.argmin(objective(coarse))]
        fine = np.linspace(centre - 1e-3, centre + 1e-3, 20001)
        brute = objective(fine).min() / (B @ B)
        assert local_margin(A, B) == pytest.approx(brute, abs=1e-6)


def test_local_margin_scale_relations(rng):
    """m(A, cB) = m(A, B) and local_margin(A, cB) = local_margin(A, B) / c."""
    from landscape.certify import lipschitz_m, local_margin

    for _ in range(50):
        A = rng.uniform(-1.0, 1.0, (2, 2))
        B = rng.uniform(-1.0, 1.0, 2)
        for c in (0.5, 2.0, 10.0):
            assert abs(lipschitz_m(A, c * B) - lipschitz_m(A, B)) <= 1e-10
            assert local_margin(A, c * B) == pytest.approx(local_margin(A, B) / c, rel=1e-10, abs=1e-12)


def test_local_margin_positive_iff_controllable(rng):
    """Full Kalman rank gives a positive margin; an eigenvector B gives zero."""
    from landscape.certify import controllability_rank, local_margin

    for _ in range(50):
        A = rng.uniform(-1.0, 1.0, (2, 2))
        B = rng.uniform(-1.0, 1.0, 2)
        if controllability_rank(A, B)[1]:
            assert local_margin(A, B) > 0
    symmetric = np.array([[2.0, 1.0], [1.0, 2.0]])
    _, vectors = np.linalg.eigh(symmetric)
    assert local_margin(symmetric, vectors[:, 0]) == pytest.approx(0.0, abs=1e-12)


def test_local_margin_rejects_degenerate_input():
    """Zero B or non-planar systems have no margin."""
    from landscape.certify import local_margin
    from landscape.errors import DegenerateInputError

    with pytest.raises(DegenerateInputError):
        local_margin(np.eye(2), np.zeros(2))
    with pytest.raises(DegenerateInputError):
        local_margin(np.eye(3), np.ones(3))


def test_trig_bound_examples():
    """Closed-form values of both bounds on diagonal coefficient matrices."""
    from landscape.certify import trig_df_bound, trig_nonlinear_bound
    from landscape.system import TrigSystem

    zero = np.zeros((2, 2))
    B = np.array([1.0, 0.0])
    flat = TrigSystem(zero, B, zero, zero, zero, zero)
    assert trig_nonlinear_bound(flat) == 0.0
    assert trig_df_bound(flat) == 0.0
    cosine = TrigSystem(zero, B, 0.1 * np.eye(2), zero, zero, zero)
    assert trig_nonlinear_bound(cosine) == pytest.approx(0.2)
    double_sine = TrigSystem(zero, B, zero, zero, zero, 0.05 * np.eye(2))
    assert trig_df_bound(double_sine) == pytest.approx(0.141421, abs=1e-6)


def test_trig_bounds_dominate_sampled_sup(rng):
    """Monte-Carlo sups of ||f|| and ||Df|| over 10^4 states never exceed the bounds."""
    from landscape.certify import trig_df_bound, trig_nonlinear_bound

    for _ in range(100):
        sys_ = _random_trig(rng)
        C1, S1, C2, S2 = sys_.trig_matrices
        X = rng.uniform(-2.0 * np.pi, 2.0 * np.pi, (10_000, 2))
        f = np.cos(X) @ C1.T + np.sin(X) @ S1.T + np.cos(2 * X) @ C2.T + np.sin(2 * X) @ S2.T
        jac = (
            C1[None] * -np.sin(X)[:, None, :]
            + S1[None] * np.cos(X)[:, None, :]
            + C2[None] * (-2.0 * np.sin(2 * X))[:, None, :]
            + S2[None] * (2.0 * np.cos(2 * X))[:, None, :]
        )
        assert f[:3] == pytest.approx(np.vstack([sys_.f(x) for x in X[:3]]))
        assert jac[:3] == pytest.approx(np.stack([sys_.jacobian(x) for x in X[:3]]))
        assert np.linalg.norm(f, axis=1).max() <= trig_nonlinear_bound(sys_)
        assert np.linalg.norm(jac, ord=2, axis=(1, 2)).max() <= trig_df_bound(sys_)


def test_trajectory_check_reduces_to_static_test(rotation_system):
    """For f = 0 the trajectory check is the static Kalman test."""
    from landscape.certify import trajectory_kalman_check
    from landscape.system import ControlSignal, NonlinearSystem, endpoint_map

    w = ControlSignal(1.0, np.linspace(-1.0, 1.0, 9))
    _, traj = endpoint_map(rotation_system, np.zeros(2), w)
    assert trajectory_kalman_check(rotation_system, traj)

    stuck = NonlinearSystem.linear(np.eye(2), np.array([1.0, 0.0]))
    _, traj = endpoint_map(stuck, np.zeros(2), w)
    assert not trajectory_kalman_check(stuck, traj)


def test_certified_systems_pass_trajectory_check(certified_trig_system):
    """The margin certificate implies full rank along computed trajectories."""
    from landscape.certify import certify, trajectory_kalman_check
    from landscape.experiment import generate_initial_control
    from landscape.system import endpoint_map

    assert certify(certified_trig_system).local_controllability_certified
    for seed in range(5):
        w = generate_initial_control(np.random.default_rng(seed), 32)
        _, traj = endpoint_map(certified_trig_system, np.zeros(2), w)
        assert trajectory_kalman_check(certified_trig_system, traj)


def test_certify_generated_system(certified_trig_system):
    """A system accepted by the generator passes all three certificates."""
    from landscape.certify import certify

    report = certify(certified_trig_system)
    assert report.all_passed
    assert report.controllable_linear_part and report.kalman_rank == 2
    assert report.df_bound < report.local_margin
    assert report.trajectory_check is None


def test_certify_uncontrollable_linear_part():
    """A = I, B = e1 fails the global certificate."""
    from landscape.certify import certify
    from landscape.system import NonlinearSystem

    report = certify(NonlinearSystem.linear(np.eye(2), np.array([1.0, 0.0])))
    assert not report.controllable_linear_part
    assert not report.global_controllability_certified
    assert report.nonlinear_bound == 0.0
    assert not report.all_passed


def test_certify_large_nonlinearity_fails_local_certificate():
    """A strong cosine term exceeds the margin of any generated system."""
    from landscape.certify import certify
    from landscape.system import TrigSystem

    zero = np.zeros((2, 2))
    sys_ = TrigSystem(
        np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([0.0, 1.0]), 10.0 * np.eye(2), zero, zero, zero
    )
    report = certify(sys_)
    assert report.df_bound == pytest.approx(np.sqrt(2.0) * 10.0)
    assert not report.local_controllability_certified
    assert report.global_controllability_certified


def test_certify_general_dimension_uses_trajectories(rng):
    """Beyond the plane the local certificate comes from trajectory checks only."""
    from landscape.certify import certify
    from landscape.system import ControlSignal, NonlinearSystem, endpoint_map

    A = np.diag([1.0, 2.0, 3.0])
    sys_ = NonlinearSystem.linear(A, np.ones(3))
    assert not certify(sys_).local_controllability_certified
    _, traj = endpoint_map(sys_, np.zeros(3), ControlSignal(1.0, rng.uniform(-1.0, 1.0, 8)))
    report = certify(sys_, [traj])
    assert report.local_margin is None
    assert report.trajectory_check == [True]
    assert report.all_passed


def test_report_rejects_inconsistent_rank_flag():
    """controllable_linear_part must agree with kalman_rank == dim."""
    from pydantic import ValidationError

    from landscape.certify import CertificateReport

    with pytest.raises(ValidationError):
        CertificateReport(
            dim=2,
            kalman_rank=1,
            controllable_linear_part=True,
            nonlinear_bound=0.0,
            global_controllability_certified=True,
            local_controllability_certified=True,
        )
