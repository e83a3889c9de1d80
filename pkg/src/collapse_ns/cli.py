"""Command line entry point ``collapse-ns``."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import load_config
from .study import StudyConfig, fit_rate, gnuplot_script, limit_trajectory, rows_to_csv, run_study


def _config(args) -> StudyConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else StudyConfig()
    return cfg


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_study(args) -> int:
    cfg = _config(args)
    if args.out:
        cfg.output = args.out
    if args.workers:
        cfg.workers = args.workers
    rows = run_study(cfg)
    if not cfg.output:
        sys.stdout.write(rows_to_csv(rows))
    errors = [r for r in rows if r.errors]
    for r in errors:
        print(f"epsilon={r.epsilon:g}: {r.errors}", file=sys.stderr)
    if len({r.epsilon for r in rows}) >= 3:
        try:
            fit = fit_rate(rows)
            print(f"slope={fit.slope:.4f} intercept={fit.intercept:.4f} bound_constant={fit.bound_constant:.6g}",
                  file=sys.stderr)
        except ValueError as exc:
            print(f"rate fit skipped: {exc}", file=sys.stderr)
    if args.gnuplot:
        if not cfg.output:
            print("--gnuplot needs an output CSV path", file=sys.stderr)
            return 2
        script = os.path.splitext(cfg.output)[0] + ".gp"
        with open(script, "w") as fh:
            fh.write(gnuplot_script(cfg.output))
        print(f"wrote {script}", file=sys.stderr)
    return 1 if errors else 0


def cmd_run_ns(args) -> int:
    from .geometry import ThinGrid
    from .limit_solver import initial_state
    from .snapshots import thin_to_csv
    from .thin_solver import SolverConfig, init_well_prepared, run

    cfg = _config(args)
    profile = cfg.build_profile()
    eps = args.epsilon if args.epsilon is not None else cfg.epsilons[0]
    mu, eta = cfg.viscosities(eps)
    grid = ThinGrid(profile, eps, cfg.nx, cfg.ns)
    amp = cfg.u0_amplitude
    lim0 = initial_state(profile, cfg.nx, cfg.rho0, lambda x: amp * np.sin(2.0 * np.pi * x))
    state = init_well_prepared(lim0, profile, grid)
    solver = SolverConfig(mu, eta, cfg.law, cfg.cfl, args.t_end or cfg.t_end, kappa=cfg.kappa)
    final = list(run(state, solver, [solver.t_end]))[-1]
    _emit(thin_to_csv(final), args.out)
    return 0


def cmd_run_limit(args) -> int:
    from .snapshots import limit_to_csv

    cfg = _config(args)
    if args.t_end:
        cfg.t_end = args.t_end
    traj = limit_trajectory(cfg)
    _emit(limit_to_csv(traj.states[-1]), args.out)
    for line in traj.certificate.lines():
        print(line, file=sys.stderr)
    return 0


def cmd_entropy(args) -> int:
    from .entropy import comparison_fields, dissipation, relative_entropy, remainder, remainder_terms
    from .snapshots import limit_from_csv, thin_from_csv

    cfg = _config(args)
    profile = cfg.build_profile()
    with open(args.thin) as fh:
        state = thin_from_csv(fh.read(), profile)
    with open(args.limit) as fh:
        limit = limit_from_csv(fh.read(), profile)
    mu, eta = cfg.viscosities(state.grid.epsilon)
    fields = comparison_fields(limit, state.grid, cfg.limit_config())
    rep = relative_entropy(state, fields, "lift", cfg.law)
    out = [
        ("t", rep.t),
        ("E_vs_uhat", rep.E_vs_uhat),
        ("E_vs_lift", rep.E_vs_lift),
        ("E_normalized", rep.E_normalized),
        ("measure", rep.measure),
        ("dissipation", dissipation(state, fields, mu, eta)),
        ("remainder", remainder(state, fields, mu, eta, cfg.law)),
    ]
    out += list(zip(("I", "II", "III", "IV", "V"), remainder_terms(state, fields, mu, eta, cfg.law)))
    _emit("quantity,value\n" + "".join(f"{k},{v:.17g}\n" for k, v in out), args.out)
    return 0


def cmd_korn(args) -> int:
    from .entropy import korn_estimate
    from .geometry import ThinGrid

    cfg = _config(args)
    profile = cfg.build_profile()
    lines = ["epsilon,constant,kernel_dim,converged"]
    for eps in cfg.epsilons:
        k = korn_estimate(ThinGrid(profile, eps, args.nx or cfg.nx, args.ns or cfg.ns), n_iter=args.n_iter)
        lines.append(f"{eps:.17g},{k.constant:.17g},{k.kernel_dim},{int(k.converged)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _print_checks(rows) -> int:
    width = max(len(r.name) for r in rows)
    for r in rows:
        print(f"{r.name:<{width}s}  {r.value:.6e}  {'ok' if r.ok else 'FAIL'}")
    return 0 if all(r.ok for r in rows) else 1


def cmd_lift_check(args) -> int:
    from .checks import lift_checks

    cfg = _config(args)
    return _print_checks(lift_checks(cfg.build_profile(), epsilon=args.epsilon))


def cmd_thermo_check(args) -> int:
    from .checks import thermo_checks

    cfg = _config(args)
    return _print_checks(thermo_checks(cfg.law, args.ambient_dim))


def cmd_mms(args) -> int:
    from .limit_solver import LimitConfig, mms_verify_limit
    from .thin_solver import SolverConfig, mms_verify

    cfg = _config(args)
    profile = cfg.build_profile()
    sizes = tuple(int(n) for n in args.sizes.split(","))
    status = 0
    if args.which in ("thin", "both"):
        rows = mms_verify(profile, SolverConfig(args.mu, args.eta, cfg.law, kappa=cfg.kappa), sizes,
                          epsilon=args.epsilon, min_order=0.0)
        print("solver,n,error_rho,error_u,order_rho,order_u")
        for r in rows:
            print(f"thin,{r.nx},{r.error_rho:.6e},{r.error_u:.6e},{r.order_rho:.4f},{r.order_u:.4f}")
            if np.isfinite(r.order_rho) and not (1.9 <= r.order_rho <= 2.1 and 1.9 <= r.order_u <= 2.1):
                status = 1
    if args.which in ("limit", "both"):
        if args.which == "limit":
            print("solver,n,error_rho,error_u,order_rho,order_u")
        for model in ("ns_limit", "euler_limit"):
            lcfg = LimitConfig(args.mu, args.eta, cfg.law, model, kappa=cfg.kappa)
            for n, er, eu, orr, oru in mms_verify_limit(profile, lcfg, sizes, min_order=0.0):
                print(f"{model},{n},{er:.6e},{eu:.6e},{orr:.4f},{oru:.4f}")
                if np.isfinite(orr) and not (1.9 <= orr <= 2.1 and 1.9 <= oru <= 2.1):
                    status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="collapse-ns", description="Thin-domain compressible flow studies")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="INI file (defaults to the built-in study)")
        sp.set_defaults(func=func)
        return sp

    sp = add("study", cmd_study, "run an epsilon sweep and write CSV rows")
    sp.add_argument("--out")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--gnuplot", action="store_true")

    sp = add("run-ns", cmd_run_ns, "run the thin-domain solver to t_end and write a snapshot")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--out")

    sp = add("run-limit", cmd_run_limit, "run the limit solver to t_end and write a snapshot")
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--out")

    sp = add("entropy", cmd_entropy, "meter the relative entropy between two snapshots")
    sp.add_argument("--thin", required=True)
    sp.add_argument("--limit", required=True)
    sp.add_argument("--out")

    sp = add("korn", cmd_korn, "discrete Korn constants across the configured epsilons")
    sp.add_argument("--nx", type=int)
    sp.add_argument("--ns", type=int)
    sp.add_argument("--n-iter", type=int, default=300)
    sp.add_argument("--out")

    sp = add("lift-check", cmd_lift_check, "residuals of the lift identities")
    sp.add_argument("--epsilon", type=float, default=0.1)

    sp = add("thermo-check", cmd_thermo_check, "pressure potential and coercivity checks")
    sp.add_argument("--ambient-dim", type=int, default=2)

    sp = add("mms", cmd_mms, "manufactured-solution convergence orders")
    sp.add_argument("--which", choices=("thin", "limit", "both"), default="both")
    sp.add_argument("--sizes", default="64,128,256")
    sp.add_argument("--epsilon", type=float, default=0.5)
    sp.add_argument("--mu", type=float, default=0.02)
    sp.add_argument("--eta", type=float, default=0.03)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return int(args.func(args) or 0)


if __name__ == "__main__":
    raise SystemExit(main())
