import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_ns import PressureLaw
from collapse_ns.entropy import (
    ComparisonFields,
    _integrate,
    _lifted,
    cell_average,
    comparison_fields,
    dissipation,
    inequality_check,
    korn_estimate,
    korn_forms,
    measure_sample,
    relative_entropy,
    remainder_terms,
)
from collapse_ns.geometry import ThinGrid, build_profile
from collapse_ns.limit_solver import LimitConfig, LimitState, initial_state, run_limit
from collapse_ns.thin_solver import FluidState, SolverConfig, init_well_prepared, rest_state, run

LAW = PressureLaw(2.0, 1.0)
LCFG = LimitConfig(0.05, 0.05, LAW)


def _limit0(profile, n=128, amp=0.1):
    return initial_state(profile, n, lambda x: 1 + 0.05 * np.cos(2 * np.pi * x), lambda x: amp * np.sin(2 * np.pi * x))


def test_well_prepared_start_has_zero_lift_entropy(cosine_circle):
    lim = _limit0(cosine_circle)
    grid = ThinGrid(cosine_circle, 0.1, 32, 16)
    rep = relative_entropy(init_well_prepared(lim, cosine_circle, grid), lim, "lift", LAW)
    assert rep.E_vs_lift <= 1e-12
    assert rep.E_vs_uhat > rep.E_vs_lift


def test_uniform_density_two_against_one(cosine_circle):
    grid = ThinGrid(cosine_circle, 0.2, 32, 16)
    state = rest_state(grid, 2.0)
    lim = initial_state(cosine_circle, 64, 1.0, 0.0)
    rep = relative_entropy(state, lim, "uhat", LAW)
    assert rep.E_vs_uhat == pytest.approx(grid.measure(), rel=1e-12)
    assert rep.E_vs_lift == pytest.approx(grid.measure(), rel=1e-12)
    assert rep.E_normalized == pytest.approx(1.0, rel=1e-12)


def test_normalization_consistency(cosine_circle):
    lim = _limit0(cosine_circle)
    grid = ThinGrid(cosine_circle, 0.1, 32, 16)
    rep = relative_entropy(init_well_prepared(lim, cosine_circle, grid), lim, "uhat", LAW)
    assert abs(rep.E_normalized * rep.measure - rep.E_vs_uhat) <= 1e-13 * rep.E_vs_uhat


def test_lift_gap_is_order_epsilon_squared(cosine_circle):
    lim = _limit0(cosine_circle)
    scaled = []
    for eps in (0.2, 0.1, 0.05):
        grid = ThinGrid(cosine_circle, eps, 32, 16)
        rep = relative_entropy(init_well_prepared(lim, cosine_circle, grid), lim, "uhat", LAW)
        scaled.append(abs(rep.E_vs_uhat - rep.E_vs_lift) / (eps**2 * rep.measure))
    assert max(scaled) / min(scaled) <= 1.1


def test_uhat_entropy_of_lift_matches_closed_form(cosine_circle):
    """Equal densities: the integrand is rho |U_vertical|^2 / 2, integrable by hand."""
    xs = (np.arange(65536) + 0.5) / 65536
    u = 0.1 * np.sin(2 * np.pi * xs)
    A = 1.5 + 0.5 * np.cos(2 * np.pi * xs)
    L1 = -np.pi * np.sin(2 * np.pi * xs) / A
    # fiber integral of (eps u L1 A s)^2 / 2 over s in [-1/2, 1/2], times eps A
    exact = np.mean(0.5 * (0.1 * u * L1 * A) ** 2 / 12 * 0.1 * A)
    errors = []
    for n in (64, 128):
        lim = initial_state(cosine_circle, n, 1.0, lambda x: 0.1 * np.sin(2 * np.pi * x))
        grid = ThinGrid(cosine_circle, 0.1, n, n)
        rep = relative_entropy(init_well_prepared(lim, cosine_circle, grid), lim, "uhat", LAW)
        errors.append(abs(rep.E_vs_uhat / exact - 1))
    assert errors[1] <= 1e-3
    assert errors[0] / errors[1] >= 3.5


def test_lifted_state_has_vanishing_terms(cosine_circle):
    lim = _limit0(cosine_circle)
    grid = ThinGrid(cosine_circle, 0.1, 32, 16)
    state = init_well_prepared(lim, cosine_circle, grid)
    rep = measure_sample(state, lim, LCFG, 0.05, 0.05, LAW)
    assert max(abs(t) for t in rep.terms) <= 1e-12 * grid.measure()
    assert abs(rep.dissipation) <= 1e-12 * grid.measure()


def test_constant_area_removes_geometric_part(constant_circle):
    lim = _limit0(constant_circle)
    grid = ThinGrid(constant_circle, 0.1, 32, 16)
    state = init_well_prepared(lim, constant_circle, grid)
    state.rho = state.rho * 1.01
    fields = comparison_fields(lim, grid, LCFG)
    assert np.all(fields.L1 == 0) and np.all(fields.ul_x == 0) and np.all(fields.ul_xx == 0)
    terms = remainder_terms(state, fields, 0.05, 0.05, LAW)
    assert terms[3] == 0.0
    # without the geometric contribution V reduces to its pure Laplacian part
    rho = cell_average(state.rho, grid)
    r = cell_average(np.repeat(fields.rho[:, None], grid.ns + 1, 1), grid)
    _, Ux, _ = _lifted(fields, grid)
    wh = cell_average(Ux - state.mom[0] / state.rho, grid)
    uxx = cell_average(np.repeat(fields.uxx[:, None], grid.ns + 1, 1), grid)
    expected = _integrate((rho - r) / r * (0.05 + 0.05) * uxx * wh, grid)
    assert terms[4] == pytest.approx(expected, rel=1e-12, abs=1e-18)


def test_rest_state_slack_is_zero(cosine_circle):
    grid = ThinGrid(cosine_circle, 0.1, 16, 16)
    lim = initial_state(cosine_circle, 64, 1.0, 0.0)
    cfg = SolverConfig(0.05, 0.05, LAW)
    reps = []
    for snap in run(rest_state(grid, 1.0), cfg, [0.0, 0.01, 0.02]):
        reps.append(measure_sample(snap, LimitState(lim.grid, lim.rho_hat, lim.u_hat, snap.t), LCFG, 0.05, 0.05, LAW))
    slack = inequality_check(reps)
    assert np.max(np.abs(slack)) <= 1e-12
    assert all(r.inequality_slack == s for r, s in zip(reps, slack))


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 2**31 - 1))
def test_dissipation_is_nonnegative(mu, eta, seed):
    profile = build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5})
    grid = ThinGrid(profile, 0.2, 8, 16)
    rng = np.random.default_rng(seed)
    lim = initial_state(profile, 32, 1.0, lambda x: 0.1 * np.sin(2 * np.pi * x))
    state = init_well_prepared(lim, profile, grid)
    state.mom = state.mom + 0.05 * rng.normal(size=state.mom.shape)
    assert dissipation(state, comparison_fields(lim, grid), mu, eta) >= -1e-12


@given(st.floats(0.2, 5.0), st.floats(-1.0, 1.0), st.integers(0, 2**31 - 1))
def test_relative_entropy_is_nonnegative(scale, shift, seed):
    profile = build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5})
    grid = ThinGrid(profile, 0.1, 8, 16)
    rng = np.random.default_rng(seed)
    rho = scale * (1 + 0.1 * rng.random(grid.shape))
    mom = rho * (shift + 0.1 * rng.normal(size=(2,) + grid.shape))
    lim = initial_state(profile, 16, lambda x: 1 + 0.5 * np.sin(2 * np.pi * x), 0.3)
    rep = relative_entropy(FluidState(grid, rho, mom), lim, "lift", LAW)
    assert rep.E_vs_uhat >= -1e-13 * rep.measure
    assert rep.E_vs_lift >= -1e-13 * rep.measure


def test_entropy_converges_at_second_order(cosine_circle):
    """Analytic thin fields against analytic limit fields on refined grids."""

    def value(nx, ns):
        grid = ThinGrid(cosine_circle, 0.2, nx, ns)
        X = grid.x[:, None] + 0 * grid.s[None, :]
        S = grid.s[None, :] + 0 * X
        rho = 1.2 + 0.1 * np.sin(2 * np.pi * X) * np.cos(np.pi * S)
        mom = np.stack([rho * (0.3 + 0.2 * S * np.cos(2 * np.pi * X)), rho * 0.1 * S])
        lim = initial_state(cosine_circle, 4 * nx, lambda x: 1 + 0.1 * np.cos(2 * np.pi * x),
                            lambda x: 0.2 * np.sin(2 * np.pi * x))
        return relative_entropy(FluidState(grid, rho, mom), lim, "lift", LAW).E_vs_lift

    e = [value(16 * k, 8 * k) for k in (1, 2, 4)]
    ratio = abs(e[0] - e[1]) / abs(e[1] - e[2])
    assert 3.5 <= ratio <= 4.5


def test_term_three_obeys_epsilon_bound(cosine_circle):
    lim0 = _limit0(cosine_circle)
    traj = run_limit(lim0, cosine_circle, LCFG, [0.0, 0.05])
    for eps in (0.2, 0.1, 0.05):
        grid = ThinGrid(cosine_circle, eps, 32, 16)
        final = list(run(init_well_prepared(lim0, cosine_circle, grid), SolverConfig(0.05, 0.05, LAW), [0.05]))[-1]
        fields = comparison_fields(traj.states[-1], grid, LCFG)
        third = remainder_terms(final, fields, 0.05, 0.05, LAW)[2]
        _, Ux, Uy = _lifted(fields, grid)
        vel = final.mom / final.rho
        gap = np.hypot(cell_average(Ux - vel[0], grid), cell_average(Uy - vel[1], grid))
        weight = _integrate(cell_average(final.rho, grid) * gap, grid)
        ul = fields.u * fields.L1
        bracket = fields.du_dt * fields.L1 + fields.u * fields.ul_x + ul * ul
        bound = np.max(np.abs(bracket)) * np.max(cosine_circle.area(grid.x)) / 2
        assert abs(third) <= bound * eps * weight


def test_comparison_fields_validation(cosine_circle):
    grid = ThinGrid(cosine_circle, 0.1, 32, 16)
    with pytest.raises(ValueError):
        comparison_fields(initial_state(cosine_circle, 48, 1.0, 0.0), grid)
    with pytest.raises(ValueError):
        comparison_fields(initial_state(cosine_circle, 64, -1.0, 0.0), grid)
    fields = comparison_fields(initial_state(cosine_circle, 64, 1.0, 0.0), grid)
    assert isinstance(fields, ComparisonFields) and fields.du_dt is None
    with pytest.raises(ValueError):
        relative_entropy(rest_state(grid), fields, "other")


# ---------------------------------------------------------------------------
# Korn


def test_rotation_has_zero_symmetric_gradient(affine_interval):
    grid = ThinGrid(affine_interval, 0.2, 8, 16)
    a, b, _ = korn_forms(grid)
    X = np.repeat(grid.x[:, None], grid.ns + 1, 1)
    phi = np.stack([-grid.y(), X], -1).ravel()
    assert abs(phi @ (a @ phi)) <= 1e-12 * (phi @ (b @ phi))
    shear = np.stack([grid.y(), np.zeros_like(X)], -1).ravel()
    assert shear @ (a @ shear) > 0.1 * grid.measure()


def test_korn_matches_dense_eigensolver():
    from scipy.linalg import eigh

    profile = build_profile({"base": "interval", "area": "affine", "a0": 1.0, "a1": 0.5})
    grid = ThinGrid(profile, 0.2, 8, 16)
    a, b, P = korn_forms(grid)
    ar = (P.T @ a @ P).toarray()
    br = (P.T @ b @ P).toarray()
    vals = eigh(ar, br, eigvals_only=True)
    k = korn_estimate(grid)
    assert k.kernel_dim == int(np.sum(vals <= 1e-10))
    assert k.constant == pytest.approx(vals[k.kernel_dim], rel=1e-3)


def test_korn_interval_is_uniform_and_kernel_free(affine_interval):
    ks = [korn_estimate(ThinGrid(affine_interval, eps, 32, 16)) for eps in (0.2, 0.1, 0.05, 0.025)]
    consts = [k.constant for k in ks]
    assert all(k.kernel_dim == 0 for k in ks)
    assert min(consts) > 0 and max(consts) / min(consts) < 2.0


def test_korn_refining_fibers_changes_little(cosine_circle):
    a = korn_estimate(ThinGrid(cosine_circle, 0.1, 32, 16)).constant
    b = korn_estimate(ThinGrid(cosine_circle, 0.1, 32, 32)).constant
    assert abs(a - b) / a < 0.05


def test_constant_circle_has_translation_kernel(constant_circle):
    k = korn_estimate(ThinGrid(constant_circle, 0.1, 16, 16))
    assert k.kernel_dim == 1
    assert k.constant > 0.1
