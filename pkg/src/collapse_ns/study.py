"""Convergence studies of the thin-domain flow towards the limit model."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .entropy import EntropyReport, cumulative, inequality_check, korn_estimate, measure_sample, relative_entropy
from .geometry import FiberProfile, ThinGrid, build_profile
from .limit_solver import LimitConfig, LimitSolverError, LimitTrajectory, initial_state, run_limit
from .thermo import PressureLaw
from .thin_solver import SolverConfig, SolverError, enforce_boundary, init_well_prepared, run

MODES = ("ns_limit_study", "euler_limit_study")


@dataclass
class StudyConfig:
    profile: dict = field(
        default_factory=lambda: {"base": "circle", "fiber": "interval", "area": "cosine", "mean": 1.5, "amplitude": 0.5}
    )
    gamma: float = 2.0
    a: float = 1.0
    rho_floor: float | None = None
    mu: float = 0.05
    eta: float = 0.05
    viscosity_scale: float = 1.0
    epsilons: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    nx: int = 128
    ns: int = 16
    t_end: float = 0.25
    sample_dt: float = 0.01
    mode: str = "ns_limit_study"
    output: str | None = None
    workers: int = 1
    rho0: float = 1.0
    u0_amplitude: float = 0.1
    delta0: float = 0.0
    limit_refine: int = 4
    cfl: float = 0.5
    kappa: float = 0.01
    korn: bool = True

    def __post_init__(self):
        self.epsilons = tuple(float(e) for e in self.epsilons)
        if not self.epsilons or any(e <= 0 for e in self.epsilons):
            raise ValueError("epsilons must be positive")
        if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.ns < 16:
            raise ValueError("ns must be at least 16 so the fiber stays resolved")
        if self.t_end <= 0 or self.sample_dt <= 0:
            raise ValueError("t_end and sample_dt must be positive")
        if self.workers < 1 or self.limit_refine < 1:
            raise ValueError("workers and limit_refine must be at least 1")
        if self.delta0 < 0:
            raise ValueError("delta0 must be non-negative")
        if self.rho_floor is not None and self.rho_floor <= 0:
            raise ValueError("rho_floor must be positive")

    @property
    def law(self) -> PressureLaw:
        return PressureLaw(self.gamma, self.a)

    def build_profile(self) -> FiberProfile:
        return build_profile(self.profile)

    def sample_times(self) -> list[float]:
        n = int(math.floor(self.t_end / self.sample_dt + 1e-9))
        times = [round(k * self.sample_dt, 12) for k in range(n + 1)]
        if self.t_end - times[-1] > 1e-12:
            times.append(self.t_end)
        return times

    def viscosities(self, epsilon: float) -> tuple[float, float]:
        if self.mode == "euler_limit_study":
            return self.viscosity_scale * epsilon, self.viscosity_scale * epsilon
        return self.mu, self.eta

    def limit_config(self) -> LimitConfig:
        if self.mode == "euler_limit_study":
            return LimitConfig(0.0, 0.0, self.law, "euler_limit", cfl=self.cfl, t_end=self.t_end, kappa=self.kappa)
        return LimitConfig(self.mu, self.eta, self.law, "ns_limit", cfl=self.cfl, t_end=self.t_end, kappa=self.kappa)


@dataclass
class StudyRow:
    epsilon: float
    mu: float
    eta: float
    t: float
    E0_norm: float
    E_norm: float
    E_lift_norm: float
    dissipation_cum: float
    remainder_cum: float
    slack: float
    I: float
    II: float
    III: float
    IV: float
    V: float
    korn: float
    korn_kernel_dim: int
    Lambda: float
    rho_min: float
    rho_max: float
    errors: str = ""


COLUMNS = tuple(f.name for f in fields(StudyRow))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def rows_to_csv(rows: list[StudyRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def read_csv(path_or_text: str) -> list[dict]:
    text = path_or_text
    if "\n" not in path_or_text and os.path.exists(path_or_text):
        with open(path_or_text, newline="") as fh:
            text = fh.read()
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in rec.items():
            try:
                row[k] = float(v)
            except (TypeError, ValueError):
                row[k] = v
        out.append(row)
    return out


# ---------------------------------------------------------------------------


def limit_trajectory(config: StudyConfig) -> LimitTrajectory:
    profile = config.build_profile()
    amp = config.u0_amplitude
    init = initial_state(
        profile, config.nx * config.limit_refine, config.rho0, lambda x: amp * np.sin(2.0 * np.pi * x)
    )
    return run_limit(init, profile, config.limit_config(), config.sample_times())


def ill_prepared(state, limit0, delta0: float, law: PressureLaw):
    """Add ``alpha sin(2 pi x)`` horizontal velocity so that ``E_norm(0)`` equals ``delta0``."""
    if delta0 <= 0:
        return state
    grid = state.grid
    shape = np.repeat(np.sin(2.0 * np.pi * grid.x)[:, None], grid.ns + 1, axis=1)

    def perturbed(alpha):
        st = state.copy()
        st.mom[0] += alpha * st.rho * shape
        enforce_boundary(grid, st.mom)
        return st

    def e_norm(alpha):
        return relative_entropy(perturbed(alpha), limit0, "uhat", law).E_normalized

    e0, ep, em = e_norm(0.0), e_norm(1.0), e_norm(-1.0)
    c2 = 0.5 * (ep + em) - e0
    c1 = 0.5 * (ep - em)
    target = delta0 - e0
    if target <= 0:
        return state
    alpha = (-c1 + math.sqrt(c1 * c1 + 4.0 * c2 * target)) / (2.0 * c2)
    return perturbed(alpha)


def _single_run(config: StudyConfig, epsilon: float, traj: LimitTrajectory) -> list[StudyRow]:
    profile = traj.profile
    law = config.law
    mu, eta = config.viscosities(epsilon)
    grid = ThinGrid(profile, epsilon, config.nx, config.ns)
    cert = traj.certificate
    times = [s.t for s in traj.states]
    korn = (math.nan, -1)
    errors = []
    if config.korn:
        try:
            k = korn_estimate(grid)
            korn = (k.constant, k.kernel_dim)
            if not k.converged:
                errors.append(f"korn iteration stopped at {k.iterations} (last quotient {k.constant:.6g})")
        except ArithmeticError as exc:
            errors.append(f"korn: {exc}")
    solver = SolverConfig(mu, eta, law, cfl=config.cfl, t_end=config.t_end, kappa=config.kappa)
    state = init_well_prepared(traj.states[0], profile, grid)
    state = ill_prepared(state, traj.states[0], config.delta0, law)
    floor = config.rho_floor if config.rho_floor is not None else cert.rho_min
    reports: list[EntropyReport] = []
    try:
        for snap, lim in zip(run(state, solver, times), traj.states):
            reports.append(measure_sample(snap, lim, traj.config, mu, eta, law, floor))
    except (SolverError, FloatingPointError, ValueError) as exc:
        errors.append(f"thin solver: {exc}")
    if not reports:
        return [_error_row(epsilon, mu, eta, "; ".join(errors) or "no samples")]
    inequality_check(reports)
    t = np.array([r.t for r in reports])
    diss = np.array([r.dissipation for r in reports])
    rem = np.array([r.remainder for r in reports])
    cum_d = cumulative(diss, t)
    cum_r = cumulative(rem, t)
    e0 = reports[0].E_normalized
    rows = []
    note = "; ".join(errors)
    for k, rep in enumerate(reports):
        m = rep.measure
        rows.append(
            StudyRow(
                epsilon, mu, eta, rep.t, e0, rep.E_normalized, rep.E_lift_normalized,
                cum_d[k] / m, cum_r[k] / m, rep.inequality_slack / m,
                *(v / m for v in rep.terms),
                korn[0], korn[1], cert.Lambda, cert.rho_min, cert.rho_max, note,
            )
        )
    return rows


def _error_row(epsilon, mu, eta, message) -> StudyRow:
    nan = math.nan
    return StudyRow(epsilon, mu, eta, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan,
                    nan, -1, nan, nan, nan, message)


def run_study(config: StudyConfig, trajectory: LimitTrajectory | None = None) -> list[StudyRow]:
    """Run every epsilon against one limit trajectory; rows come in epsilon order."""
    if trajectory is None:
        try:
            trajectory = limit_trajectory(config)
        except LimitSolverError as exc:
            rows = [_error_row(e, *config.viscosities(e), f"limit solver: {exc}") for e in config.epsilons]
            _write(config, rows)
            return rows
    if config.workers == 1:
        chunks = [_single_run(config, e, trajectory) for e in config.epsilons]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_single_run, config, e, trajectory) for e in config.epsilons]
            chunks = [f.result() for f in futures]
    rows = [r for chunk in chunks for r in chunk]
    _write(config, rows)
    return rows


def _write(config: StudyConfig, rows: list[StudyRow]) -> None:
    if config.output:
        with open(config.output, "w", newline="") as fh:
            fh.write(rows_to_csv(rows))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    bound_constant: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.bound_constant))


def _select(rows, t_select):
    recs = [r if isinstance(r, dict) else {c: getattr(r, c) for c in COLUMNS} for r in rows]
    recs = [r for r in recs if isinstance(r.get("t"), float) and math.isfinite(r["t"])]
    if not recs:
        return []
    target = max(r["t"] for r in recs) if t_select is None else float(t_select)
    return [r for r in recs if abs(r["t"] - target) <= 1e-9 * max(1.0, abs(target))]


def final_rows(rows, t_select: float | None = None) -> list[dict]:
    """Rows at ``t_select`` (default: the last sample time), one per epsilon."""
    return _select(rows if not isinstance(rows, str) else read_csv(rows), t_select)


def fit_rate(rows, t_select: float | None = None) -> RateFit:
    """Least-squares slope of ``log E_norm`` against ``log epsilon`` and the bound constant.

    ``rows``: a CSV path or text, or a list of rows (dicts or ``StudyRow``).
    """
    sel = final_rows(rows, t_select)
    if len(sel) < 3:
        raise ValueError("fit_rate needs at least three epsilons at the selected time")
    eps = np.array([r["epsilon"] for r in sel])
    e = np.array([r["E_norm"] for r in sel])
    e0 = np.array([r.get("E0_norm", 0.0) for r in sel])
    if np.any(e <= 0):
        raise ValueError("E_norm must be positive to fit a rate")
    slope, intercept = np.polyfit(np.log(eps), np.log(e), 1)
    bound = float(np.max(e / (eps + e0)))
    return RateFit(float(slope), float(intercept), bound)


def gnuplot_script(csv_path: str) -> str:
    """A plot script for ``E_norm`` against ``t`` per epsilon and the final-time rate."""
    name = os.path.basename(csv_path)
    col_t = COLUMNS.index("t") + 1
    col_e = COLUMNS.index("E_norm") + 1
    col_eps = COLUMNS.index("epsilon") + 1
    return "\n".join(
        [
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set logscale y",
            "set xlabel 't'",
            "set ylabel 'E_norm'",
            f"plot for [e in system(\"tail -n +2 '{name}' | cut -d, -f{col_eps} | sort -u -g\")] \\",
            f"  '{name}' using {col_t}:(abs(${col_eps} - e) < 1e-12 ? ${col_e} : 1/0) with linespoints title 'eps='.e",
            "pause -1",
            "",
        ]
    )
