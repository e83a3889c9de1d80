import numpy as np
import pytest

from collapse_ns import PressureLaw, _kernels_py, kernels
from collapse_ns.geometry import build_profile, dlog_area
from collapse_ns.limit_solver import (
    LimitConfig,
    LimitSolverError,
    base_geometry,
    initial_state,
    mms_verify_limit,
    run_limit,
    step,
    time_derivatives,
    weighted_mass,
)
from collapse_ns.limit_solver import _params as limit_params

LAW = PressureLaw(2.0, 1.0)


def _smooth(profile, n=64, amp=0.1):
    return initial_state(profile, n, lambda x: 1 + 0.1 * np.cos(2 * np.pi * x), lambda x: amp * np.sin(2 * np.pi * x))


@pytest.mark.parametrize("model", ["ns_limit", "euler_limit"])
@pytest.mark.parametrize("name", ["cosine_circle", "affine_interval"])
def test_rest_state_has_zero_rates(model, name, request):
    profile = request.getfixturevalue(name)
    state = initial_state(profile, 64, 1.0, 0.0)
    dr, du = time_derivatives(state, profile, LimitConfig(law=LAW, model=model))
    assert np.max(np.abs(dr)) <= 1e-14
    assert np.max(np.abs(du)) <= 1e-14


def test_bulk_coefficient_in_two_dimensions_is_eta():
    assert LimitConfig(mu=0.3, eta=0.07, ambient_dim=2).bulk_coefficient == 0.07
    assert LimitConfig(mu=0.3, eta=0.07, ambient_dim=3).bulk_coefficient == pytest.approx(0.07 + 0.1)


def test_periodic_mass_conserved(cosine_circle):
    traj = run_limit(_smooth(cosine_circle), cosine_circle, LimitConfig(law=LAW), [0.0, 0.1, 0.2])
    mass = weighted_mass(traj)
    assert np.max(np.abs(mass - mass[0])) / mass[0] <= 1e-12 * 0.2 + 1e-15


def test_interval_mass_drift_is_second_order(affine_interval):
    drifts = []
    for n in (32, 64, 128):
        traj = run_limit(_smooth(affine_interval, n), affine_interval, LimitConfig(law=LAW), [0.0, 0.1])
        m = weighted_mass(traj)
        drifts.append(abs(m[-1] - m[0]) + 1e-16)
    assert max(drifts) <= 1e-3
    assert drifts[-1] <= drifts[0] / 3.5 or drifts[-1] <= 1e-13


def test_rest_mass_exactly_constant(cosine_circle):
    traj = run_limit(initial_state(cosine_circle, 32, 1.0, 0.0), cosine_circle, LimitConfig(law=LAW), [0.05, 0.1])
    m = weighted_mass(traj)
    assert np.all(m == m[0])


def test_euler_limit_is_area_scale_invariant():
    p1 = build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5})
    p2 = build_profile({"base": "circle", "area": "cosine", "mean": 3.0, "amplitude": 1.0})
    cfg = LimitConfig(0.0, 0.0, LAW, "euler_limit")
    a = run_limit(_smooth(p1), p1, cfg, [0.1]).states[-1]
    b = run_limit(_smooth(p2), p2, cfg, [0.1]).states[-1]
    assert np.max(np.abs(a.rho_hat - b.rho_hat)) <= 1e-12
    assert np.max(np.abs(a.u_hat - b.u_hat)) <= 1e-12


def test_constant_area_matches_disabled_geometric_term(constant_circle):
    on = LimitConfig(law=LAW)
    off = LimitConfig(law=LAW, disable_geometric_term=True)
    state = _smooth(constant_circle)
    for x, y in zip(time_derivatives(state, constant_circle, on), time_derivatives(state, constant_circle, off)):
        assert np.max(np.abs(x - y)) <= 1e-14
    a, b = state, state
    for _ in range(20):
        a = step(a, constant_circle, on, 1e-3)
        b = step(b, constant_circle, off, 1e-3)
    assert np.max(np.abs(a.u_hat - b.u_hat)) <= 1e-14
    assert np.max(np.abs(a.rho_hat - b.rho_hat)) <= 1e-14


def test_viscous_force_matches_finite_difference_oracle(cosine_circle):
    """Uniform density: the velocity rate is the viscous force minus advection."""
    n = 512
    mu, eta = 0.04, 0.09
    state = initial_state(cosine_circle, n, 1.0, lambda x: 0.1 * np.sin(2 * np.pi * x))
    _, du = time_derivatives(state, cosine_circle, LimitConfig(mu, eta, LAW, kappa=0.0))
    x = state.grid.x
    h = 1e-4
    u = lambda z: 0.1 * np.sin(2 * np.pi * z)  # noqa: E731
    ux = (u(x + h) - u(x - h)) / (2 * h)
    uxx = (u(x + h) - 2 * u(x) + u(x - h)) / h**2
    g = lambda z: u(z) * dlog_area(cosine_circle, z)  # noqa: E731
    gx = (g(x + h) - g(x - h)) / (2 * h)
    expected = (mu + eta) * uxx + eta * gx - u(x) * ux
    assert np.max(np.abs(du - expected)) <= 2e-3 * np.max(np.abs(expected))


@pytest.mark.parametrize("model", ["ns_limit", "euler_limit"])
def test_mms_orders(model, cosine_circle):
    cfg = LimitConfig(0.02, 0.03, LAW, model)
    rows = mms_verify_limit(cosine_circle, cfg, (32, 64, 128), min_order=0.0)
    for n, er, eu, orr, oru in rows[1:]:
        assert 1.9 <= orr <= 2.1
        assert 1.9 <= oru <= 2.1


def test_certificate_is_finite(cosine_circle):
    traj = run_limit(_smooth(cosine_circle), cosine_circle, LimitConfig(law=LAW), [0.1, 0.25])
    cert = traj.certificate
    assert np.isfinite(cert.Lambda) and cert.rho_min > 0 and cert.rho_max >= cert.rho_min
    rho = np.concatenate([s.rho_hat for s in traj.states])
    assert cert.rho_min <= rho.min() and cert.rho_max >= rho.max()
    assert [line.split("=")[0] for line in cert.lines()] == ["Lambda", "rho_min", "rho_max"]
    assert traj.at(0.1).t == 0.1
    with pytest.raises(KeyError):
        traj.at(0.2)


def test_euler_steepening_aborts(cosine_circle):
    state = initial_state(cosine_circle, 128, 1.0, lambda x: 1.5 * np.sin(2 * np.pi * x))
    with pytest.raises(LimitSolverError):
        run_limit(state, cosine_circle, LimitConfig(0.0, 0.0, LAW, "euler_limit", kappa=0.0), [2.0])


def test_kernels_agree(cosine_circle, affine_interval, rng):
    if kernels.BACKEND != "compiled":
        pytest.skip("compiled kernels not built")
    from collapse_ns import _kernels

    for profile in (cosine_circle, affine_interval):
        for model in ("ns_limit", "euler_limit", "ns_averaged"):
            st = _smooth(profile, 48)
            geom = base_geometry(profile, st.grid)
            w = geom["A"] * st.rho_hat * (1 + 0.01 * rng.normal(size=st.rho_hat.shape))
            u = st.u_hat + 0.01 * rng.normal(size=st.u_hat.shape)
            params = limit_params(LimitConfig(0.03, 0.07, LAW, model))
            a = _kernels_py.limit_rhs(w, u, geom, params)
            b = _kernels.limit_rhs(w, u, geom, params)
            for x, y in zip(a, b):
                assert np.max(np.abs(x - y)) <= 1e-12 * (1 + np.max(np.abs(x)))


def test_config_validation():
    with pytest.raises(ValueError):
        LimitConfig(model="stokes")
    with pytest.raises(ValueError):
        LimitConfig(model="ns_averaged", ambient_dim=3)
