"""CSV snapshots of thin-domain and limit states."""

from __future__ import annotations

import csv
import io

import numpy as np

from .geometry import BaseGrid, FiberProfile, ThinGrid
from .limit_solver import LimitState
from .thin_solver import FluidState

THIN_COLUMNS = ("t", "epsilon", "i", "j", "x", "s", "rho", "ux", "uy")
LIMIT_COLUMNS = ("t", "i", "x", "rho_hat", "u_hat")


def _g(v: float) -> str:
    return "%.17g" % v


def thin_to_csv(state: FluidState) -> str:
    grid = state.grid
    vel = state.mom / state.rho
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(THIN_COLUMNS)
    for i, x in enumerate(grid.x):
        for j, s in enumerate(grid.s):
            w.writerow([_g(state.t), _g(grid.epsilon), i, j, _g(x), _g(s),
                        _g(state.rho[i, j]), _g(vel[0, i, j]), _g(vel[1, i, j])])
    return buf.getvalue()


def limit_to_csv(state: LimitState) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LIMIT_COLUMNS)
    for i, x in enumerate(state.grid.x):
        w.writerow([_g(state.t), i, _g(x), _g(state.rho_hat[i]), _g(state.u_hat[i])])
    return buf.getvalue()


def _records(text: str, columns) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != tuple(columns):
        raise ValueError(f"expected columns {columns}, got {reader.fieldnames}")
    return [{k: float(v) for k, v in rec.items()} for rec in reader]


def thin_from_csv(text: str, profile: FiberProfile) -> FluidState:
    recs = _records(text, THIN_COLUMNS)
    ni = int(max(r["i"] for r in recs)) + 1
    nj = int(max(r["j"] for r in recs)) + 1
    nx = ni if profile.periodic else ni - 1
    grid = ThinGrid(profile, recs[0]["epsilon"], nx, nj - 1)
    rho = np.empty((ni, nj))
    mom = np.empty((2, ni, nj))
    for r in recs:
        i, j = int(r["i"]), int(r["j"])
        rho[i, j] = r["rho"]
        mom[0, i, j] = r["rho"] * r["ux"]
        mom[1, i, j] = r["rho"] * r["uy"]
    return FluidState(grid, rho, mom, recs[0]["t"])


def limit_from_csv(text: str, profile: FiberProfile) -> LimitState:
    recs = _records(text, LIMIT_COLUMNS)
    n = len(recs)
    grid = BaseGrid(n if profile.periodic else n - 1, profile.periodic)
    order = np.argsort([r["i"] for r in recs])
    rho = np.array([recs[k]["rho_hat"] for k in order])
    u = np.array([recs[k]["u_hat"] for k in order])
    return LimitState(grid, rho, u, recs[0]["t"])
