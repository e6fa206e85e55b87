import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magflow import _backend
from magflow.dynamics import (
    FlowSpec,
    HypothesisViolated,
    StepFailure,
    block_rotation,
    complex_coordinates,
    integrate,
    larmor_period,
    pendulum_circle_radius,
    pendulum_momentum_drift,
    projected_circle,
    read_csv,
    rn_closed_form,
    rn_closed_form_many,
    simulate_pendulum,
    sphere_vector_field,
    tail_reduction,
    unit_speed_state,
    unitary_reduction,
)
from magflow.phasecore import MagneticField, PhaseState, SystemParams, canonicalize_kappa, random_orthogonal
from magflow.verification import reduction_run


def sphere(n, blocks, m=1.0, s=1.0):
    params = SystemParams(n, m, s)
    return FlowSpec("sphere", params, MagneticField.from_blocks(blocks, n))


# --- vector fields ------------------------------------------------------------------


def test_vector_field_tangent_on_many_states():
    rng = np.random.default_rng(0)
    for k in range(1000):
        n = int(rng.integers(2, 9))
        A = rng.standard_normal((n, n))
        field = canonicalize_kappa(A - A.T)
        params = SystemParams(n, float(rng.uniform(0.5, 2)), float(rng.uniform(-2, 2)) or 1.0)
        x = unit_speed_state(n, seed=k, speed=float(rng.uniform(0.1, 3)))
        gd, pd = sphere_vector_field(x, field, params)
        assert abs(2 * x.gamma @ gd) < 1e-12
        assert abs(pd @ x.gamma + x.p @ gd) < 1e-12 * max(1.0, x.p @ x.p)


def test_vector_field_examples():
    f = MagneticField.from_blocks((1.0, 0.0))
    st0 = PhaseState(np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0]))
    gd, pd = sphere_vector_field(st0, f, SystemParams(4))
    np.testing.assert_allclose(gd, [0, 1, 0, 0])
    # mu = -2: kappa p = (1,0,0,0) plus mu gamma
    np.testing.assert_allclose(pd, [-1, 0, 0, 0])
    gd, pd = sphere_vector_field(PhaseState(st0.gamma, np.zeros(4)), f, SystemParams(4))
    assert not gd.any() and not pd.any()


def test_flowspec_validation():
    with pytest.raises(ValueError):
        FlowSpec("pendulum", SystemParams(4))
    with pytest.raises(ValueError):
        FlowSpec("sphere", SystemParams(4), MagneticField.from_blocks((1.0,), 3))
    with pytest.raises(ValueError):
        FlowSpec("torus", SystemParams(4), MagneticField.from_blocks((1.0, 1.0)))


def test_integrate_rejects_unconstrained_start():
    spec = sphere(3, (1.0,))
    with pytest.raises(ValueError):
        integrate(spec, PhaseState(np.array([2.0, 0, 0]), np.zeros(3)), 1.0)


# --- R^n oracle -------------------------------------------------------------------------


def test_closed_form_larmor_circle():
    params = SystemParams(2)
    field = MagneticField.from_blocks((2.0,))
    x0 = PhaseState(np.zeros(2), np.array([1.0, 0.0]))
    X = rn_closed_form_many(x0, field, params, np.linspace(0, math.pi, 200, endpoint=False))
    r = np.linalg.norm(X[:, :2] - X[:, :2].mean(axis=0), axis=1)
    np.testing.assert_allclose(r, 0.5, atol=1e-12)
    np.testing.assert_allclose(rn_closed_form(x0, field, params, math.pi).as_vector(), X[0], atol=1e-14)


def test_closed_form_free_motion():
    params = SystemParams(3, m=2.0)
    field = MagneticField.from_blocks((0.0,), 3)
    x0 = PhaseState(np.array([1.0, 2, 3]), np.array([1.0, -1, 2]))
    out = rn_closed_form(x0, field, params, 3.0)
    np.testing.assert_allclose(out.gamma, x0.gamma + 1.5 * x0.p)
    np.testing.assert_allclose(out.p, x0.p)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_closed_form_matches_integrator(n):
    rng = np.random.default_rng(n)
    A = rng.standard_normal((n, n))
    field = canonicalize_kappa(A - A.T)
    params = SystemParams(n, 1.3, 0.7)
    x0 = PhaseState(rng.standard_normal(n), rng.standard_normal(n))
    T = 3 * larmor_period(max(field.blocks), params)
    traj = integrate(FlowSpec("ambient_rn", params, field), x0, T)
    exact = rn_closed_form_many(x0, field, params, traj.times)
    assert np.max(np.abs(traj.states - exact)) < 1e-8


# --- sphere flow --------------------------------------------------------------------


def test_zero_field_great_circle():
    spec = sphere(3, (0.0,))
    x0 = unit_speed_state(3, seed=2)
    traj = integrate(spec, x0, 2 * math.pi)
    normal = np.cross(x0.gamma, x0.p)
    assert np.max(np.abs(traj.states[:, :3] @ normal)) < 1e-9
    np.testing.assert_allclose(traj.states[-1], x0.as_vector(), atol=1e-6)


def test_projection_keeps_constraints():
    traj = integrate(sphere(5, (1.0, 2.0)), unit_speed_state(5, 1), 30.0)
    assert np.max(np.abs(traj.constraint_residuals())) < 1e-13
    loose = integrate(sphere(5, (1.0, 2.0)), unit_speed_state(5, 1), 30.0, project_every_step=False, rtol=1e-6, atol=1e-8)
    assert np.max(np.abs(loose.constraint_residuals())) > np.max(np.abs(traj.constraint_residuals()))


def test_drift_table_filled():
    traj = integrate(sphere(5, (1.0, 2.0)), unit_speed_state(5, 0), 20.0)
    assert set(traj.drift) >= {"H", "J", "Phi_12", "Phi_34"}
    assert max(traj.drift.values()) < 1e-8
    assert np.all(np.diff(traj.times) > 0)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), angles=st.lists(st.floats(0, 2 * math.pi), min_size=3, max_size=3))
def test_block_rotation_equivariance(seed, angles):
    n = 6
    spec = sphere(n, (1.0, 2.0, 0.5))
    R = block_rotation(n, angles)
    x0 = unit_speed_state(n, seed)
    a = integrate(spec, x0, 10.0).states[-1]
    b = integrate(spec, PhaseState(R @ x0.gamma, R @ x0.p, True), 10.0).states[-1]
    assert np.max(np.abs(np.concatenate([R @ a[:n], R @ a[n:]]) - b)) < 1e-8


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(1, 20))
def test_time_reversal(seed, t):
    spec = sphere(5, (1.5, 0.5))
    x0 = unit_speed_state(5, seed)
    fwd = integrate(spec, x0, t)
    back = integrate(spec, fwd.state(), 0.0, t0=t)
    assert back.times[-1] == 0.0
    assert np.max(np.abs(back.states[-1] - x0.as_vector())) < 1e-7


def test_step_failure():
    with pytest.raises(StepFailure):
        integrate(sphere(3, (1.0,)), unit_speed_state(3), 1.0, rtol=1e-30, atol=1e-300)


@pytest.mark.skipif("cython" not in _backend.KERNELS, reason="extension not built")
@pytest.mark.parametrize("kind", ["ambient_rn", "sphere"])
def test_kernels_agree(kind):
    params = SystemParams(5, 1.2, 0.8)
    spec = FlowSpec(kind, params, MagneticField.from_blocks((1.0, 2.0), 5))
    x0 = unit_speed_state(5, 3)
    a = integrate(spec, x0, 10.0, kernel="cython")
    b = integrate(spec, x0, 10.0, kernel="python")
    # same algorithm; only floating-point evaluation order differs
    assert len(a.times) == len(b.times)
    assert np.max(np.abs(a.states - b.states)) < 1e-8


def test_unknown_kernel():
    with pytest.raises(ValueError):
        _backend.get_kernel("fortran")


def test_csv_round_trip(tmp_path):
    traj = integrate(sphere(4, (1.0, 1.0)), unit_speed_state(4, 0), 2.0)
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    header, data = read_csv(path)
    assert header[:9] == ["t", "gamma_1", "gamma_2", "gamma_3", "gamma_4", "p_1", "p_2", "p_3", "p_4"]
    assert header[9:] == traj.integral_names
    np.testing.assert_array_equal(data[:, 0], traj.times)
    np.testing.assert_array_equal(data[:, 1:9], traj.states)
    np.testing.assert_array_equal(data[:, 9:], traj.values)


def test_projected_circle_ambient():
    params = SystemParams(2)
    spec = FlowSpec("ambient_rn", params, MagneticField.from_blocks((2.0,)))
    traj = integrate(spec, PhaseState(np.zeros(2), np.array([1.0, 0.0])), 2 * math.pi)
    _, radius, period = projected_circle(traj)
    assert abs(radius - 0.5) < 1e-8 and abs(period - math.pi) < 1e-8


def test_rotated_field_sphere_flow_conserves_catalog():
    Q = random_orthogonal(4, seed=5)
    field = canonicalize_kappa(Q @ MagneticField.from_blocks((2.0, 1.0)).kappa @ Q.T)
    spec = FlowSpec("sphere", SystemParams(4), field)
    traj = integrate(spec, unit_speed_state(4, 1), 20.0)
    assert max(traj.drift.values()) < 1e-8


# --- pendulum -------------------------------------------------------------------------


def test_pendulum_radius():
    assert abs(pendulum_circle_radius(1.0, via="simulate") - math.pi / 4) < 1e-4
    assert abs(pendulum_circle_radius(math.sqrt(3), via="simulate") - math.pi / 6) < 1e-4
    assert pendulum_circle_radius(1e-9) == pytest.approx(math.pi / 2, abs=1e-8)
    with pytest.raises(ValueError):
        pendulum_circle_radius(1.0, via="guess")


def test_pendulum_drift():
    d0 = pendulum_momentum_drift(simulate_pendulum(1.0, t_end=50.0))
    assert set(d0) == {"b.Phi", "Phi1", "Phi2", "Phi3"}
    assert max(d0.values()) < 1e-8
    tb = simulate_pendulum(0.7, b=(0.0, 0.0, 1.0), t_end=50.0)
    assert pendulum_momentum_drift(tb)["b.Phi"] < 1e-8
    assert tb.drift["H"] < 1e-8
    with pytest.raises(ValueError):
        pendulum_momentum_drift(integrate(sphere(3, (1.0,)), unit_speed_state(3), 1.0))


# --- reduction -------------------------------------------------------------------------


def test_unitary_reduction_zeroes_leading_coordinates():
    n, r = 9, 4
    field = MagneticField.from_blocks((1.0,) * 4, n)
    params = SystemParams(n)
    x0 = unit_speed_state(n, 0)
    R_real, red, R = unitary_reduction(x0, r, field, params)
    np.testing.assert_allclose(R @ R.conj().T, np.eye(r), atol=1e-12)
    assert np.max(np.abs(red.as_vector()[[0, 1, 2, 3, 9, 10, 11, 12]])) < 1e-15
    assert red.check_constraints()
    z, w = complex_coordinates(red.as_vector(), r)
    # reduced w lies in span of the last two complex coordinates
    assert np.allclose(z[:2], 0) and np.allclose(w[:2], 0)


def test_reduction_of_reduced_state_is_identity():
    n, r = 9, 4
    field = MagneticField.from_blocks((1.0,) * 4, n)
    _, red, _ = unitary_reduction(unit_speed_state(n, 1), r, field, SystemParams(n))
    _, red2, R2 = unitary_reduction(red, r, field, SystemParams(n))
    np.testing.assert_allclose(R2, np.eye(r))
    np.testing.assert_array_equal(red2.as_vector(), red.as_vector())


def test_reduction_parallel_z_w():
    n, r = 8, 4
    field = MagneticField.from_blocks((1.0,) * 4, n)
    g = np.ones(n) / math.sqrt(n)
    p = np.zeros(n)
    p[0::2], p[1::2] = -g[1::2], g[0::2]  # w = i z: parallel over C
    x0 = PhaseState(g, p, True)
    _, red, _ = unitary_reduction(x0, r, field, SystemParams(n))
    assert np.max(np.abs(red.as_vector()[[0, 1, 2, 3, 4, 5, 8, 9, 10, 11, 12, 13]])) < 1e-14


def test_reduction_hypothesis():
    with pytest.raises(HypothesisViolated):
        unitary_reduction(unit_speed_state(6), 2, MagneticField.from_blocks((1.0, 2.0, 2.0)), SystemParams(6))
    with pytest.raises(HypothesisViolated):
        unitary_reduction(unit_speed_state(6), 4, MagneticField.from_blocks((1.0,) * 3), SystemParams(6))
    with pytest.raises(HypothesisViolated):
        tail_reduction(unit_speed_state(6), 2, MagneticField.from_blocks((1.0, 1.0, 0.0)))


def test_tail_reduction():
    n = 7
    field = MagneticField.from_blocks((1.0, 0.0, 0.0), n)
    Q, red = tail_reduction(unit_speed_state(n, 4), 2, field)
    np.testing.assert_allclose(Q @ Q.T, np.eye(5), atol=1e-12)
    assert np.linalg.det(Q) > 0
    assert np.max(np.abs(red.as_vector()[[4, 5, 6, 11, 12, 13]])) < 1e-15
    run = reduction_run(SystemParams(n), (1.0, 0.0, 0.0), 1, t_end=20.0)
    assert run["zeroed"] == [5, 6, 7]
    assert run["invariance_drift"] < 1e-8


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MAGFLOW_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import magflow; print(magflow.BACKEND)"], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
