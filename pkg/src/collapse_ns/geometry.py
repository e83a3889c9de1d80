"""Thin product domains over a one-dimensional base.

The fluid domain is ``{(x, y) : x in base, y in eps * F_x}`` where the fiber
``F_x`` is either the symmetric interval ``[-A(x)/2, A(x)/2]`` (d = 1) or the
disk of radius ``R(x)`` (d = 2, with ``A = pi R^2``).  The flow solver works on
the mapped rectangle ``(x, s)`` with ``y = eps * A(x) * s`` and ``s`` in
``[-1/2, 1/2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.interpolate import CubicSpline

BASE_KINDS = ("interval", "circle")
FIBER_KINDS = ("interval", "disk")
AREA_KINDS = ("constant", "affine", "cosine", "exponential", "table")

_DENSE_SAMPLES = 4097
_PERIODIC_TOL = 1e-10


class ProfileError(ValueError):
    """Raised for inadmissible fiber profiles."""


@dataclass(frozen=True)
class FiberProfile:
    """Base kind, fiber kind and the generating shape function.

    ``shape`` is the fiber width ``A(x)`` for interval fibers and the radius
    ``R(x)`` for disk fibers.  All evaluation methods are vectorised.
    """

    base: str
    fiber: str
    kind: str
    params: tuple[float, ...] = ()
    spline: Any = field(default=None, repr=False, compare=False)

    @property
    def fiber_dim(self) -> int:
        return 1 if self.fiber == "interval" else 2

    @property
    def ambient_dim(self) -> int:
        """Dimension N of the fluid domain."""
        return 1 + self.fiber_dim

    @property
    def periodic(self) -> bool:
        return self.base == "circle"

    def shape(self, x, nu: int = 0):
        """``nu``-th derivative of the generating function."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.full_like(x, p[0] if nu == 0 else 0.0)
        if self.kind == "affine":
            if nu == 0:
                return p[0] + p[1] * x
            return np.full_like(x, p[1] if nu == 1 else 0.0)
        if self.kind == "cosine":
            mean, amp, phase = p
            w = 2.0 * math.pi
            arg = w * (x - phase)
            if nu == 0:
                return mean + amp * np.cos(arg)
            if nu == 1:
                return -amp * w * np.sin(arg)
            if nu == 2:
                return -amp * w * w * np.cos(arg)
            return amp * w**3 * np.sin(arg)
        if self.kind == "exponential":
            scale, rate = p
            return scale * rate**nu * np.exp(rate * x)
        if self.kind == "table":
            xw = np.mod(x, 1.0) if self.periodic else x
            return self.spline(xw, nu)
        raise ProfileError(f"unknown area kind {self.kind!r}")

    def area(self, x, nu: int = 0):
        """``nu``-th derivative (``nu <= 2``) of the fiber measure A."""
        if self.fiber_dim == 1:
            return self.shape(x, nu)
        r = self.shape(x)
        if nu == 0:
            return math.pi * r * r
        r1 = self.shape(x, 1)
        if nu == 1:
            return 2.0 * math.pi * r * r1
        if nu == 2:
            return 2.0 * math.pi * (r1 * r1 + r * self.shape(x, 2))
        raise ValueError("area derivatives are provided up to order 2")

    def radius(self, x, nu: int = 0):
        if self.fiber_dim != 2:
            raise ProfileError("radius is defined for disk fibers only")
        return self.shape(x, nu)


def _table_spline(values, periodic: bool) -> CubicSpline:
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size < 4:
        raise ProfileError("table profiles need at least 4 samples")
    nodes = np.linspace(0.0, 1.0, vals.size)
    if periodic:
        if abs(vals[0] - vals[-1]) > _PERIODIC_TOL * max(1.0, abs(vals[0])):
            raise ProfileError("table is not periodic but the base is a circle")
        vals = vals.copy()
        vals[-1] = vals[0]
        return CubicSpline(nodes, vals, bc_type="periodic")
    return CubicSpline(nodes, vals, bc_type="not-a-knot")


def _validate(profile: FiberProfile) -> FiberProfile:
    xs = np.linspace(0.0, 1.0, _DENSE_SAMPLES)
    g = profile.shape(xs)
    if not np.all(np.isfinite(g)) or np.min(g) <= 0.0:
        raise ProfileError("fiber shape must be strictly positive on the base")
    if profile.periodic:
        for nu in range(3):
            lo, hi = profile.shape(np.array([0.0, 1.0]), nu)
            if abs(hi - lo) > _PERIODIC_TOL * max(1.0, abs(lo)):
                raise ProfileError(
                    f"derivative {nu} of the fiber shape is not periodic on the circle"
                )
    return profile


def build_profile(config: Mapping[str, Any]) -> FiberProfile:
    """Build a profile from a flat mapping.

    Keys: ``base``, ``fiber``, ``area`` plus the parameters of the chosen
    area kind (``value``; ``a0, a1``; ``mean, amplitude, phase``;
    ``scale, rate``; ``values``).  For disk fibers the named function is the
    radius.
    """
    base = str(config.get("base", "interval")).strip()
    fiber = str(config.get("fiber", "interval")).strip()
    kind = str(config.get("area", "constant")).strip()
    if base not in BASE_KINDS:
        raise ProfileError(f"base must be one of {BASE_KINDS}, got {base!r}")
    if fiber not in FIBER_KINDS:
        raise ProfileError(f"fiber must be one of {FIBER_KINDS}, got {fiber!r}")

    def num(key, default=None):
        val = config.get(key, default)
        if val is None:
            raise ProfileError(f"area kind {kind!r} needs parameter {key!r}")
        return float(val)

    spline = None
    if kind == "constant":
        params = (num("value", 1.0),)
    elif kind == "affine":
        params = (num("a0"), num("a1"))
    elif kind == "cosine":
        params = (num("mean"), num("amplitude"), num("phase", 0.0))
    elif kind == "exponential":
        params = (num("scale", 1.0), num("rate"))
    elif kind == "table":
        raw = config.get("values")
        if raw is None:
            raise ProfileError("table profiles need 'values'")
        if isinstance(raw, str):
            raw = [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
        params = tuple(float(v) for v in raw)
        spline = _table_spline(params, base == "circle")
    else:
        raise ProfileError(f"area must be one of {AREA_KINDS}, got {kind!r}")
    return _validate(FiberProfile(base, fiber, kind, params, spline))


def dlog_area(profile: FiberProfile, x):
    """Derivative of ``log A`` along the base."""
    _check_base_point(profile, x)
    return profile.area(x, 1) / profile.area(x)


def d2log_area(profile: FiberProfile, x):
    """Second derivative of ``log A`` along the base."""
    _check_base_point(profile, x)
    a0 = profile.area(x)
    a1 = profile.area(x, 1)
    return (profile.area(x, 2) * a0 - a1 * a1) / (a0 * a0)


def _check_base_point(profile: FiberProfile, x) -> None:
    if profile.periodic:
        return
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -1e-12) or np.any(xa > 1.0 + 1e-12):
        raise ValueError("base point outside [0, 1]")


def domain_measure(profile: FiberProfile, epsilon: float, n: int = 4096) -> float:
    """Measure of the thin domain by the composite midpoint rule in x."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    xc = (np.arange(n) + 0.5) / n
    base_integral = float(np.sum(profile.area(xc))) / n
    return epsilon**profile.fiber_dim * base_integral


def wall_frame(profile: FiberProfile, epsilon: float, x, side: str):
    """Outward unit normal, fiber normal and unit tangent on an interval fiber wall.

    Returns three arrays of shape ``x.shape + (2,)``.  The tangent points in
    the direction of increasing x.
    """
    if profile.fiber_dim != 1:
        raise ProfileError("wall frames are defined for interval fibers")
    if side not in ("top", "bottom"):
        raise ValueError("side must be 'top' or 'bottom'")
    x = np.asarray(x, dtype=float)
    sign = 1.0 if side == "top" else -1.0
    slope = 0.5 * epsilon * profile.area(x, 1)
    norm = np.sqrt(1.0 + slope * slope)
    nu = np.stack([-slope / norm, sign / norm], axis=-1)
    n = np.stack([np.zeros_like(x), np.full_like(x, sign)], axis=-1)
    tangent = np.stack([1.0 / norm, sign * slope / norm], axis=-1)
    return nu, n, tangent


@dataclass(frozen=True)
class BaseGrid:
    """Uniform node grid on the base: ``n`` cells, periodic or with end nodes."""

    n: int
    periodic: bool

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @property
    def num_nodes(self) -> int:
        return self.n if self.periodic else self.n + 1

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.num_nodes) * self.dx

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights (sum to 1)."""
        w = np.full(self.num_nodes, self.dx)
        if not self.periodic:
            w[0] = w[-1] = 0.5 * self.dx
        return w


@dataclass(frozen=True)
class ThinGrid:
    """Mapped node grid on the thin domain over an interval-fiber profile.

    Nodes sit at ``(x_i, s_j)``; there are ``ns + 1`` levels in s including
    both walls.  Geometric factors are sampled at nodes, at x-faces and at
    cell centres.
    """

    profile: FiberProfile
    epsilon: float
    nx: int
    ns: int

    def __post_init__(self):
        if self.profile.fiber_dim != 1:
            raise ProfileError("the thin grid supports interval fibers only")
        if self.epsilon <= 0 or self.nx < 4 or self.ns < 2:
            raise ValueError("need epsilon > 0, nx >= 4, ns >= 2")

    @property
    def base(self) -> BaseGrid:
        return BaseGrid(self.nx, self.profile.periodic)

    @property
    def periodic(self) -> bool:
        return self.profile.periodic

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def ds(self) -> float:
        return 1.0 / self.ns

    @property
    def x(self) -> np.ndarray:
        return self.base.x

    @property
    def s(self) -> np.ndarray:
        return -0.5 + np.arange(self.ns + 1) * self.ds

    @property
    def shape(self) -> tuple[int, int]:
        return (self.base.num_nodes, self.ns + 1)

    @property
    def x_faces(self) -> np.ndarray:
        """x at faces i + 1/2 (one per node on the circle, nx on the interval)."""
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def s_faces(self) -> np.ndarray:
        return -0.5 + (np.arange(self.ns) + 0.5) * self.ds

    def area(self, nu: int = 0) -> np.ndarray:
        return self.profile.area(self.x, nu)

    def face_area(self, nu: int = 0) -> np.ndarray:
        return self.profile.area(self.x_faces, nu)

    def y(self) -> np.ndarray:
        """Physical vertical coordinate at nodes."""
        return self.epsilon * np.outer(self.area(), self.s)

    def node_weights(self) -> np.ndarray:
        """Trapezoid weights of physical node measures (used for conservation)."""
        ws = np.full(self.ns + 1, self.ds)
        ws[0] = ws[-1] = 0.5 * self.ds
        return self.epsilon * np.outer(self.base.weights * self.area(), ws)

    def cell_measures(self) -> np.ndarray:
        """Midpoint-rule physical measure of each cell, shape ``(nx, ns)``."""
        ac = self.face_area()
        return np.outer(self.epsilon * ac * self.dx, np.full(self.ns, self.ds))

    def measure(self) -> float:
        return float(np.sum(self.cell_measures()))

    def wall_normals(self, side: str) -> np.ndarray:
        """Unit outward normal at each wall node, shape ``(num_x_nodes, 2)``."""
        return wall_frame(self.profile, self.epsilon, self.x, side)[0]

    def dirichlet_mask(self) -> np.ndarray:
        """True at nodes of the base end fibers (interval base only)."""
        mask = np.zeros(self.shape, dtype=bool)
        if not self.periodic:
            mask[0, :] = True
            mask[-1, :] = True
        return mask


def boundary_frame(grid: ThinGrid, x, side: str):
    """Frame ``(nu, n, tangent)`` on the wall ``side`` of ``grid`` at base point ``x``."""
    return wall_frame(grid.profile, grid.epsilon, x, side)
