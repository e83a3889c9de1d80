"""End-to-end acceptance runs.  Each test prints one PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py``; the lines are also repeated
in the terminal summary.
"""

import dataclasses
import math
import time
from pathlib import Path

import numpy as np
import pytest

from collapse_ns import build_profile
from collapse_ns.checks import default_lift_profiles, lift_checks, stress_checks, thermo_checks
from collapse_ns.config import load_config
from collapse_ns.entropy import korn_estimate
from collapse_ns.geometry import ThinGrid
from collapse_ns.limit_solver import LimitConfig, mms_verify_limit
from collapse_ns.study import StudyConfig, final_rows, fit_rate, limit_trajectory, run_study
from collapse_ns.thermo import PressureLaw
from collapse_ns.thin_solver import SolverConfig, mms_verify

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RESULTS: list[str] = []

pytestmark = pytest.mark.acceptance


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _timed(func, *args, **kwargs):
    start = time.perf_counter()
    out = func(*args, **kwargs)
    return out, time.perf_counter() - start


def _final_e(rows):
    sel = sorted(final_rows(rows), key=lambda r: -r["epsilon"])
    return np.array([r["epsilon"] for r in sel]), np.array([r["E_norm"] for r in sel])


@pytest.fixture(scope="module")
def default_config():
    return load_config(str(CONFIGS / "default.ini"))


@pytest.fixture(scope="module")
def default_trajectory(default_config):
    return limit_trajectory(default_config)


@pytest.fixture(scope="module")
def default_run(default_config, default_trajectory):
    rows, elapsed = _timed(run_study, default_config, default_trajectory)
    return rows, elapsed


def test_lift_identities():
    failed = []
    start = time.perf_counter()
    for label, profile in default_lift_profiles().items():
        for r in lift_checks(profile):
            if not r.ok:
                failed.append(f"{label}:{r.name}={r.value:.3e}")
    elapsed = time.perf_counter() - start
    ok = not failed and elapsed < 10.0
    report(1, ok, f"lift identities on cosine and affine profiles, {elapsed:.1f}s "
                  f"{'; '.join(failed) if failed else 'all within tolerance'}")


def test_thermo():
    rows, elapsed = _timed(thermo_checks, PressureLaw(2.0, 1.0), 2)
    by_name = {r.name: r for r in rows}
    ok = all(r.ok for r in rows) and elapsed < 5.0
    ok = ok and by_name["coercivity C1"].value > 0 and by_name["coercivity C3"].value > 0
    report(2, ok, f"ODE residual {by_name['renormalization ODE residual'].value:.2e}, "
                  f"C1={by_name['coercivity C1'].value:.4g} C3={by_name['coercivity C3'].value:.4g}, {elapsed:.2f}s")


def test_stress_identity():
    rows, elapsed = _timed(stress_checks, 10_000)
    worst = max(r.value for r in rows)
    report(3, all(r.ok for r in rows) and elapsed < 1.0,
           f"max relative contraction error {worst:.2e} for N=2,3, {elapsed:.2f}s")


def test_solver_verification():
    profile = build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5})
    law = PressureLaw(2.0, 1.0)
    sizes = (64, 128, 256)
    start = time.perf_counter()
    orders = {}
    thin = mms_verify(profile, SolverConfig(0.02, 0.03, law), sizes, epsilon=0.5, ns_ratio=4, min_order=0.0)
    orders["thin"] = [o for r in thin[1:] for o in (r.order_rho, r.order_u)]
    for model in ("ns_limit", "euler_limit"):
        rows = mms_verify_limit(profile, LimitConfig(0.02, 0.03, law, model), sizes, min_order=0.0)
        orders[model] = [o for row in rows[1:] for o in row[3:]]
    elapsed = time.perf_counter() - start
    ok = all(1.9 <= o <= 2.1 for v in orders.values() for o in v) and elapsed < 300.0
    detail = ", ".join(f"{k} [{min(v):.3f}, {max(v):.3f}]" for k, v in orders.items())
    report(4, ok, f"MMS order ranges {detail}, {elapsed:.0f}s")


def test_viscous_limit_rate(default_run):
    rows, elapsed = default_run
    eps, e = _final_e(rows)
    fit = fit_rate(rows)
    sel = sorted(final_rows(rows), key=lambda r: -r["epsilon"])
    c = np.array([r["E_norm"] / (r["epsilon"] + r["E0_norm"]) for r in sel])
    decreasing = bool(np.all(np.diff(e) < 0))
    spread = float(c.max() / c.min())
    ok = decreasing and fit.slope >= 0.9 and spread <= 3.0 and elapsed < 1200.0
    report(5, ok, f"E_norm(T) {np.array2string(e, precision=3)}, slope {fit.slope:.3f}, "
                  f"constant spread {spread:.3f}, {elapsed:.0f}s")


def test_inviscid_limit_rate():
    cfg = load_config(str(CONFIGS / "euler.ini"))
    rows, elapsed = _timed(run_study, cfg)
    sel = sorted(final_rows(rows), key=lambda r: -r["epsilon"])
    e = np.array([r["E_norm"] for r in sel])
    ratio = np.array([r["E_norm"] / (r["mu"] + r["eta"] + r["epsilon"]) for r in sel])
    spread = float(ratio.max() / ratio.min())
    ok = bool(np.all(np.diff(e) < 0)) and spread <= 3.0 and elapsed < 1200.0
    report(6, ok, f"E_norm(T) {np.array2string(e, precision=3)}, E/(mu+eta+eps) spread {spread:.3f}, {elapsed:.0f}s")


def test_entropy_inequality(default_config, default_run):
    rows, _ = default_run
    slack128 = np.array([r.slack for r in rows])
    excursion128 = max(0.0, -float(slack128.min()))
    fine = dataclasses.replace(default_config, nx=256, korn=False, output=None)
    literal = run_study(fine)
    excursion_literal = max(0.0, -min(r.slack for r in literal))
    refined = run_study(dataclasses.replace(fine, sample_dt=0.5 * default_config.sample_dt))
    excursion256 = max(0.0, -min(r.slack for r in refined))
    shrink = excursion128 / excursion256 if excursion256 > 0 else math.inf
    shrink_literal = excursion128 / excursion_literal if excursion_literal > 0 else math.inf
    ok = excursion128 <= 1e-4 and shrink >= 3.0
    report(7, ok, f"min slack Nx=128 {-excursion128:.3e}; Nx=256 with halved sample spacing "
                  f"{-excursion256:.3e} (shrink {shrink:.2f}x); Nx=256 same spacing shrink {shrink_literal:.2f}x")


def test_stability_probe(default_config, default_trajectory, default_run):
    rows, _ = default_run
    c_well = fit_rate(rows).bound_constant
    parts, ok = [], True
    for delta0 in (1e-2, 1e-3):
        cfg = dataclasses.replace(default_config, delta0=delta0, korn=False, output=None)
        ill = run_study(cfg, default_trajectory)
        e0 = np.array([r["E0_norm"] for r in final_rows(ill)])
        c_ill = fit_rate(ill).bound_constant
        factor = max(c_ill / c_well, c_well / c_ill)
        ok = ok and factor <= 2.0 and bool(np.allclose(e0, delta0, rtol=1e-6))
        parts.append(f"delta0={delta0:g}: C={c_ill:.3e} ({factor:.1f}x)")
    report(8, ok, f"well-prepared C={c_well:.3e}; " + "; ".join(parts))


def test_korn_diagnostic():
    interval = load_config(str(CONFIGS / "interval.ini"))
    profile = interval.build_profile()
    ks = [korn_estimate(ThinGrid(profile, e, interval.nx, interval.ns)) for e in interval.epsilons]
    consts = np.array([k.constant for k in ks])
    spread = float(consts.max() / consts.min())
    ok = spread < 2.0 and all(k.kernel_dim == 0 for k in ks) and all(k.converged for k in ks)
    default = StudyConfig()
    circle = default.build_profile()
    circ = [korn_estimate(ThinGrid(circle, e, default.nx, default.ns)) for e in default.epsilons]
    circle_text = ", ".join(f"eps={k.epsilon:g}: {k.constant:.3f}/dim {k.kernel_dim}" for k in circ)
    report(9, ok, f"interval constants {np.array2string(consts, precision=3)} spread {spread:.3f}, "
                  f"kernel dims {[k.kernel_dim for k in ks]}; circle (reported) {circle_text}")
