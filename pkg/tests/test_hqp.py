import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from cocarry.errors import ConfigurationError, NumericError
from cocarry.hqp import (
    DampingSchedule,
    HqpWeights,
    damping_factor,
    nullspace_project,
    primary_objective,
    saturate,
    secondary_velocity,
    solve_primary,
    wholebody_command,
    wholebody_step,
)
from cocarry.kinematics import N_DOF, RobotModel, forward_kinematics, whole_body_jacobian


def random_problem(rng, m=N_DOF):
    J = rng.normal(size=(6, m))
    weights = HqpWeights(
        K=rng.uniform(0.1, 2.0, 6),
        W1=rng.uniform(0.5, 50.0, 6),
        W2=rng.uniform(0.5, 5.0, m),
        W3=rng.uniform(0.0, 1.0, m),
        q_def=rng.normal(size=m),
    )
    return J, rng.normal(size=6), rng.normal(size=6), weights, rng.uniform(0.1, 1.0)


def stacked_lstsq(J, xdot, e, weights, k):
    """Same objective written as one stacked least-squares system, solved by SVD."""
    s1 = np.sqrt(weights.W1)
    s2 = k * np.sqrt(weights.W2)
    A = np.vstack([s1[:, None] * J, np.diag(s2)])
    b = np.concatenate([s1 * (xdot + np.asarray(weights.K) * e), np.zeros(J.shape[1])])
    return np.linalg.lstsq(A, b, rcond=None)[0]


seeds = st.integers(0, 2**32 - 1)


def test_damping_schedule_examples():
    sched = DampingSchedule(0.1, 1.0, 0.01)
    assert damping_factor(0.02, sched) == 0.1
    assert damping_factor(0.01, sched) == 0.1
    assert damping_factor(0.0, sched) == 1.0
    assert damping_factor(0.005, sched) == pytest.approx(0.325, abs=1e-15)


@given(st.floats(0, 1.0), st.floats(0, 1.0))
def test_damping_schedule_bounded_and_monotone(w1, w2):
    sched = DampingSchedule()
    lo, hi = sorted((w1, w2))
    assert sched.k_min <= damping_factor(hi, sched) <= damping_factor(lo, sched) <= sched.k_max


def test_damping_schedule_continuous_at_threshold():
    sched = DampingSchedule()
    assert damping_factor(sched.w0 * (1 - 1e-12), sched) == pytest.approx(sched.k_min, abs=1e-12)


def test_damping_rejects_invalid():
    with pytest.raises(ConfigurationError):
        DampingSchedule(0.0, 1.0, 0.1)
    with pytest.raises(ConfigurationError):
        DampingSchedule(0.5, 0.1, 0.1)
    with pytest.raises(ConfigurationError):
        damping_factor(-1.0, DampingSchedule())


def test_primary_zero_demand():
    J, _, _, w, k = random_problem(np.random.default_rng(0))
    np.testing.assert_array_equal(solve_primary(J, np.zeros(6), np.zeros(6), w, k), np.zeros(N_DOF))


def test_primary_identity_case_halves_demand():
    w = HqpWeights(K=(1,) * 6, W1=(1,) * 6, W2=(1,) * 6, W3=(0,) * 6, q_def=(0,) * 6)
    u = np.arange(1.0, 7.0)
    np.testing.assert_allclose(solve_primary(np.eye(6), u, np.zeros(6), w, 1.0), u / 2, atol=1e-14)


@given(seeds)
def test_primary_matches_independent_minimizers(seed):
    J, xdot, e, w, k = random_problem(np.random.default_rng(seed))
    q1 = solve_primary(J, xdot, e, w, k)
    np.testing.assert_allclose(q1, stacked_lstsq(J, xdot, e, w, k), atol=1e-9)

    def f(x):
        return primary_objective(J, xdot, e, w, k, x)

    res = minimize(f, np.zeros(N_DOF), method="BFGS", options={"gtol": 1e-12})
    np.testing.assert_allclose(q1, res.x, atol=1e-4)


@given(seeds)
def test_primary_not_improved_by_perturbation(seed):
    rng = np.random.default_rng(seed)
    J, xdot, e, w, k = random_problem(rng)
    q1 = solve_primary(J, xdot, e, w, k)
    best = primary_objective(J, xdot, e, w, k, q1)
    for scale in (1e-3, 1e-2, 1e-1):
        deltas = rng.normal(size=(100, N_DOF)) * scale
        assert all(primary_objective(J, xdot, e, w, k, q1 + d) >= best for d in deltas)


@given(seeds, st.floats(0.01, 100.0))
def test_primary_invariant_to_common_weight_scale(seed, c):
    J, xdot, e, w, k = random_problem(np.random.default_rng(seed))
    scaled = HqpWeights(K=w.K, W1=np.asarray(w.W1) * c, W2=np.asarray(w.W2) * c, W3=w.W3, q_def=w.q_def)
    np.testing.assert_allclose(
        solve_primary(J, xdot, e, scaled, k), solve_primary(J, xdot, e, w, k), rtol=1e-9, atol=1e-12
    )


def test_primary_errors():
    J, xdot, e, w, _ = random_problem(np.random.default_rng(1))
    with pytest.raises(ConfigurationError):
        solve_primary(J, xdot, e, w, 0.0)
    with pytest.raises(NumericError):
        solve_primary(J, np.full(6, np.nan), e, w, 0.5)
    J_bad = J.copy()
    J_bad[0, 0] = np.inf
    with pytest.raises(NumericError):
        solve_primary(J_bad, xdot, e, w, 0.5)


def test_secondary_examples():
    w = HqpWeights()
    np.testing.assert_array_equal(secondary_velocity(w.q_def, w), np.zeros(N_DOF))
    q = np.random.default_rng(2).normal(size=N_DOF)
    assert np.all(secondary_velocity(q, w)[:3] == 0.0)
    w = HqpWeights(W3=(1.0,) * N_DOF, q_def=(0.0,) * N_DOF, posture_gain=0.5)
    q = np.zeros(N_DOF)
    q[0] = -1.0
    np.testing.assert_allclose(secondary_velocity(q, w), np.eye(N_DOF)[0])


@given(seeds)
def test_nullspace_leakage_bounded_by_k_squared(seed):
    J, _, _, w, k = random_problem(np.random.default_rng(seed))
    v = np.random.default_rng(seed + 1).normal(size=N_DOF)
    residual = np.linalg.norm(J @ nullspace_project(J, w, k, v))
    # in weighted coordinates the leak has gains sigma k^2 / (sigma^2 + k^2) per singular value
    s1, s2 = np.sqrt(w.W1), np.sqrt(w.W2)
    sig = np.linalg.svd(s1[:, None] * J / s2[None, :], compute_uv=False)
    bound = np.max(sig * k**2 / (sig**2 + k**2)) * np.max(1 / s1) * np.max(s2) * np.linalg.norm(v)
    assert residual <= bound * (1 + 1e-9)


@given(seeds)
def test_nullspace_exact_pseudoinverse_residual(seed):
    J, _, _, w, _ = random_problem(np.random.default_rng(seed))
    v = np.random.default_rng(seed + 1).normal(size=N_DOF)
    assert np.linalg.norm(J @ (v - np.linalg.pinv(J) @ (J @ v))) <= 1e-9
    # weighted limit of the damped inverse as k -> 0
    W2inv = 1.0 / np.asarray(w.W2)
    J_plus = (W2inv[:, None] * J.T) @ np.linalg.inv((J * W2inv) @ J.T)
    assert np.linalg.norm(J @ (v - J_plus @ (J @ v))) <= 1e-9
    damped = nullspace_project(J, w, 1e-4, v)
    np.testing.assert_allclose(damped, v - J_plus @ (J @ v), atol=1e-5)


@given(seeds, st.floats(0.1, 1.0))
def test_nullspace_keeps_null_vectors(seed, k):
    J, _, _, w, _ = random_problem(np.random.default_rng(seed))
    null = np.linalg.svd(J)[2][-1]
    np.testing.assert_allclose(nullspace_project(J, w, k, null), null, atol=1e-12)
    np.testing.assert_array_equal(nullspace_project(J, w, k, np.zeros(N_DOF)), np.zeros(N_DOF))


MODEL = RobotModel()


def test_wholebody_converged_is_zero():
    w, sched = HqpWeights(), DampingSchedule()
    q = np.asarray(w.q_def)
    x = forward_kinematics(MODEL, q)
    np.testing.assert_allclose(wholebody_step(MODEL, q, x, np.zeros(6), w, sched), np.zeros(N_DOF), atol=1e-15)


def test_wholebody_step_response_tracks_gain():
    w, sched = HqpWeights(), DampingSchedule()
    q = np.asarray(w.q_def)
    x_d = forward_kinematics(MODEL, q).translated([0.1, 0.0, 0.0])
    qdot = wholebody_step(MODEL, q, x_d, np.zeros(6), w, sched)
    twist = whole_body_jacobian(MODEL, q) @ qdot
    assert abs(twist[0] - 0.1) <= 0.05 * 0.1
    assert np.linalg.norm(twist[1:]) <= 0.05 * 0.1


def test_secondary_only_reaches_base_through_projector():
    w, sched = HqpWeights(), DampingSchedule()
    q = np.asarray(w.q_def) + np.r_[0, 0, 0, 0.2, -0.1, 0.1, 0.0, 0.1, 0.0]
    cmd = wholebody_command(MODEL, q, forward_kinematics(MODEL, q), np.zeros(6), w, sched)
    assert np.all(secondary_velocity(q, w)[:3] == 0.0)
    assert np.allclose(cmd.qdot_primary, 0.0)
    assert np.linalg.norm(cmd.qdot_secondary[:3]) > 0.0


@given(st.lists(st.floats(-5, 5), min_size=N_DOF, max_size=N_DOF))
def test_saturation_keeps_direction_and_limits(values):
    qdot = np.asarray(values)
    limits = np.r_[0.5, 0.5, 0.5, np.ones(6)]
    out, flag = saturate(qdot, limits)
    assert np.all(np.abs(out) <= limits * (1 + 1e-12))
    if flag:
        ratio = out @ qdot / (np.linalg.norm(out) * np.linalg.norm(qdot))
        assert ratio == pytest.approx(1.0)
    else:
        np.testing.assert_array_equal(out, qdot)
