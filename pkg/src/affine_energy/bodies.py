"""Convex and star body algebra.

Bodies are immutable value objects carrying their dimension and vectorized
``support``/``radial`` evaluation; operations are pure functions taking a
working :class:`~affine_energy.spherequad.SphereGrid` where quadrature is
needed.  Exact formulas are used wherever the representation permits
(balls, ellipsoids, polytopes, Lq balls); sampled bodies fall back to the
grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, logm, sqrtm
from scipy.optimize import minimize
from scipy.spatial import ConvexHull
from scipy.stats import qmc

from . import kernels
from .errors import (
    ConfigurationError,
    DomainError,
    InvalidBodyError,
    UnsupportedRepresentationError,
)
from .spherequad import SphereGrid, unit_ball_volume

_POS_TOL = 1e-12


def _as_rows(u) -> tuple[np.ndarray, bool]:
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


def _ret(vals: np.ndarray, scalar: bool):
    return float(vals[0]) if scalar else vals


def centroid_normalization(n: int, p: float) -> float:
    """Moment normalization making the centroid body of the unit ball the unit ball."""
    return unit_ball_volume(n + p - 2) / (
        (n + p) * unit_ball_volume(n) * unit_ball_volume(p - 1)
    )


def _ball_abs_moment(n: int, p: float) -> float:
    """Integral of |<u, y>|^p over the unit ball, u a unit vector."""
    return (
        unit_ball_volume(n - 1)
        * math.gamma((p + 1) / 2.0)
        * math.gamma((n + 1) / 2.0)
        / math.gamma((n + p) / 2.0 + 1.0)
    )


@dataclass(frozen=True)
class SurfaceMeasure:
    """Discrete surface area measure: (unit outward normal, mass) pairs."""

    normals: np.ndarray
    masses: np.ndarray
    exact: bool = True

    def __post_init__(self):
        if np.any(self.masses < 0):
            raise InvalidBodyError("surface measure has negative mass")

    def total(self) -> float:
        return float(self.masses.sum())

    def closedness_defect(self) -> float:
        """|sum mass * normal|, relative to total mass; ~0 for a closed surface."""
        resultant = self.masses @ self.normals
        return float(np.linalg.norm(resultant)) / max(self.total(), 1e-300)


class ConvexBody:
    """Base class: support-function-bearing body with the origin interior."""

    dimension: int

    def support(self, u):
        """h(K, u) = sup_{y in K} <u, y>, positively 1-homogeneous in u."""
        raise NotImplementedError

    def radial(self, u):
        """rho(K, u) = max{lam >= 0 : lam*u in K}, (-1)-homogeneous in u."""
        raise NotImplementedError

    def exact_volume(self):
        """Volume when the representation permits, else None."""
        return None

    def surface_measure(self, grid: SphereGrid | None = None) -> SurfaceMeasure:
        raise UnsupportedRepresentationError(
            f"{type(self).__name__} carries no surface area measure"
        )

    def scaled(self, c: float) -> "ConvexBody":
        raise UnsupportedRepresentationError(f"{type(self).__name__} cannot be dilated")


@dataclass(frozen=True)
class Ball(ConvexBody):
    radius: float
    dimension: int = 2

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidBodyError("ball radius must be positive")

    def support(self, u):
        rows, scalar = _as_rows(u)
        return _ret(self.radius * np.linalg.norm(rows, axis=1), scalar)

    def radial(self, u):
        rows, scalar = _as_rows(u)
        return _ret(self.radius / np.linalg.norm(rows, axis=1), scalar)

    def exact_volume(self):
        return unit_ball_volume(self.dimension) * self.radius**self.dimension

    def surface_measure(self, grid=None):
        if grid is None:
            raise ConfigurationError("ball surface measure needs a working grid")
        masses = grid.weights * self.radius ** (self.dimension - 1)
        return SurfaceMeasure(grid.directions, masses, exact=False)

    def scaled(self, c):
        return Ball(self.radius * c, self.dimension)


@dataclass(frozen=True)
class Ellipsoid(ConvexBody):
    """Image A * B_2^n of the unit ball under an invertible linear map."""

    matrix: np.ndarray
    _inv: np.ndarray = field(init=False, repr=False)
    _det: float = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", a)
        det = np.linalg.det(a)
        if abs(det) < 1e-14:
            raise InvalidBodyError("ellipsoid matrix must be invertible")
        object.__setattr__(self, "_inv", np.linalg.inv(a))
        object.__setattr__(self, "_det", abs(det))

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def support(self, u):
        rows, scalar = _as_rows(u)
        return _ret(np.linalg.norm(rows @ self.matrix, axis=1), scalar)

    def radial(self, u):
        rows, scalar = _as_rows(u)
        return _ret(1.0 / np.linalg.norm(rows @ self._inv.T, axis=1), scalar)

    def exact_volume(self):
        return unit_ball_volume(self.dimension) * self._det

    def surface_measure(self, grid=None):
        if grid is None:
            raise ConfigurationError("ellipsoid surface measure needs a working grid")
        # push-forward of the sphere: x = A y, normal A^{-T} y, area |det A| |A^{-T} y|
        w = grid.directions @ self._inv  # rows A^{-T} y
        lens = np.linalg.norm(w, axis=1)
        return SurfaceMeasure(w / lens[:, None], grid.weights * self._det * lens, exact=False)

    def scaled(self, c):
        return Ellipsoid(self.matrix * c)


class Polytope(ConvexBody):
    """Convex hull of a vertex list with the origin interior; n in {2, 3}."""

    def __init__(self, vertices):
        vertices = np.asarray(vertices, dtype=float)
        n = vertices.shape[1]
        if n not in (2, 3):
            raise UnsupportedRepresentationError("polytopes are supported for n in {2, 3}")
        try:
            hull = ConvexHull(vertices)
        except Exception as exc:
            raise InvalidBodyError(f"vertex list has no full-dimensional hull: {exc}")
        self.dimension = n
        self._volume = float(hull.volume)
        if n == 2:
            self.vertices = vertices[hull.vertices]  # CCW order
            edges = np.roll(self.vertices, -1, axis=0) - self.vertices
            lengths = np.linalg.norm(edges, axis=1)
            normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
            self._facet_normals = normals
            self._facet_masses = lengths
        else:
            self.vertices = vertices[np.unique(hull.vertices)]
            self._simplices = vertices[hull.simplices]  # (F, 3, 3)
            a = self._simplices[:, 1] - self._simplices[:, 0]
            b = self._simplices[:, 2] - self._simplices[:, 0]
            cross = np.cross(a, b)
            areas = 0.5 * np.linalg.norm(cross, axis=1)
            normals = hull.equations[:, :3]
            normals = normals / np.linalg.norm(normals, axis=1)[:, None]
            self._facet_normals = normals
            self._facet_masses = areas
        self._facet_offsets = np.einsum(
            "fi,fi->f", self._facet_normals, self._first_facet_points()
        )
        if np.any(self._facet_offsets <= 0):
            raise InvalidBodyError("polytope must contain the origin in its interior")
        measure = SurfaceMeasure(self._facet_normals, self._facet_masses)
        if measure.closedness_defect() > 1e-9:
            raise InvalidBodyError("facet normals do not close up (Minkowski relation)")
        self._measure = measure

    def _first_facet_points(self):
        if self.dimension == 2:
            return self.vertices
        return self._simplices[:, 0]

    def support(self, u):
        rows, scalar = _as_rows(u)
        return _ret((rows @ self.vertices.T).max(axis=1), scalar)

    def radial(self, u):
        rows, scalar = _as_rows(u)
        vals = kernels.radial_from_support(
            np.ascontiguousarray(rows), self._facet_normals, self._facet_offsets
        )
        return _ret(vals, scalar)

    def exact_volume(self):
        return self._volume

    def surface_measure(self, grid=None):
        return self._measure

    def scaled(self, c):
        return Polytope(self.vertices * c)

    def negated(self):
        return Polytope(-self.vertices)


@dataclass(frozen=True)
class LqBall(ConvexBody):
    """Scaled unit ball of the lq norm, q >= 1."""

    q: float
    scale: float = 1.0
    dimension: int = 2

    def __post_init__(self):
        if self.q < 1:
            raise DomainError("lq ball needs q >= 1")
        if self.scale <= 0:
            raise InvalidBodyError("lq ball scale must be positive")

    def support(self, u):
        rows, scalar = _as_rows(u)
        if self.q == 1.0:
            vals = np.abs(rows).max(axis=1)
        else:
            qd = self.q / (self.q - 1.0) if self.q > 1.0 else math.inf
            if math.isinf(qd):
                vals = np.abs(rows).max(axis=1)
            else:
                vals = (np.abs(rows) ** qd).sum(axis=1) ** (1.0 / qd)
        return _ret(self.scale * vals, scalar)

    def radial(self, u):
        rows, scalar = _as_rows(u)
        vals = (np.abs(rows) ** self.q).sum(axis=1) ** (1.0 / self.q)
        return _ret(self.scale / vals, scalar)

    def exact_volume(self):
        n, q = self.dimension, self.q
        return (
            (2.0 * math.gamma(1.0 + 1.0 / q)) ** n
            / math.gamma(1.0 + n / q)
            * self.scale**n
        )

    def scaled(self, c):
        return LqBall(self.q, self.scale * c, self.dimension)


class SampledSupport(ConvexBody):
    """Body given by positive support values on a sphere grid.

    Off-grid support queries use periodic linear interpolation in angle for
    n=2 and nearest-direction lookup otherwise; radial values come from the
    wedge body cut out by the sampled halfspaces.
    """

    def __init__(self, grid: SphereGrid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.size,):
            raise InvalidBodyError("support values must match the grid directions")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidBodyError("support values must be positive and finite")
        self.grid = grid
        self.values = values
        self.dimension = grid.dimension
        self._angle_table = None
        self._own_radial = None

    def _angles(self):
        if self._angle_table is None:
            ang = np.arctan2(self.grid.directions[:, 1], self.grid.directions[:, 0])
            order = np.argsort(ang)
            self._angle_table = (ang[order], self.values[order])
        return self._angle_table

    def support(self, u):
        rows, scalar = _as_rows(u)
        g = self.grid.directions
        if rows.shape == g.shape and (rows is g or np.array_equal(rows, g)):
            return _ret(self.values.copy(), scalar)
        lens = np.linalg.norm(rows, axis=1)
        units = rows / lens[:, None]
        if self.dimension == 2:
            ang, vals = self._angles()
            hv = np.interp(np.arctan2(units[:, 1], units[:, 0]), ang, vals,
                           period=2.0 * np.pi)
        else:
            nearest = np.argmax(units @ g.T, axis=1)
            hv = self.values[nearest]
        return _ret(lens * hv, scalar)

    def radial(self, u):
        rows, scalar = _as_rows(u)
        g = self.grid.directions
        if rows.shape == g.shape and (rows is g or np.array_equal(rows, g)):
            if self._own_radial is None:
                self._own_radial = kernels.radial_from_support(g, g, self.values)
            vals = self._own_radial
        else:
            lens = np.linalg.norm(rows, axis=1)
            units = np.ascontiguousarray(rows / lens[:, None])
            vals = kernels.radial_from_support(units, g, self.values) / lens
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError(
                "degenerate direction set: some ray meets no sampled halfspace"
            )
        return _ret(vals.copy(), scalar)

    def scaled(self, c):
        return SampledSupport(self.grid, self.values * c)


class SampledRadial:
    """Star body given by positive radial values on a sphere grid."""

    def __init__(self, grid: SphereGrid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.size,):
            raise InvalidBodyError("radial values must match the grid directions")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidBodyError("radial values must be positive and finite")
        self.grid = grid
        self.values = values
        self.dimension = grid.dimension
        self._angle_table = None

    def radial(self, u):
        rows, scalar = _as_rows(u)
        g = self.grid.directions
        if rows.shape == g.shape and (rows is g or np.array_equal(rows, g)):
            return _ret(self.values.copy(), scalar)
        lens = np.linalg.norm(rows, axis=1)
        units = rows / lens[:, None]
        if self.dimension == 2:
            if self._angle_table is None:
                ang = np.arctan2(g[:, 1], g[:, 0])
                order = np.argsort(ang)
                self._angle_table = (ang[order], self.values[order])
            ang, vals = self._angle_table
            rv = np.interp(np.arctan2(units[:, 1], units[:, 0]), ang, vals,
                           period=2.0 * np.pi)
        else:
            nearest = np.argmax(units @ g.T, axis=1)
            rv = self.values[nearest]
        return _ret(rv / lens, scalar)

    def scaled(self, c):
        return SampledRadial(self.grid, self.values * c)


class Polar(ConvexBody):
    """Polar body K* = {x : <x, y> <= 1 for all y in K}."""

    def __init__(self, body: ConvexBody):
        self.body = body
        self.dimension = body.dimension

    def support(self, u):
        return 1.0 / self.body.radial(u)

    def radial(self, u):
        return 1.0 / self.body.support(u)


def polar(body: ConvexBody) -> Polar:
    return Polar(body)


# ---------------------------------------------------------------------------
# volume / quadrature operations


def support_on_grid(body, grid: SphereGrid) -> np.ndarray:
    return np.asarray(body.support(grid.directions), dtype=float)


def radial_on_grid(body, grid: SphereGrid) -> np.ndarray:
    return np.asarray(body.radial(grid.directions), dtype=float)


def body_volume(body, grid: SphereGrid | None = None) -> float:
    """Volume, exact where the representation permits, else (1/n) int rho^n du."""
    v = body.exact_volume() if isinstance(body, ConvexBody) else None
    if v is not None:
        return v
    if grid is None:
        raise ConfigurationError("sampled body volume needs a working grid")
    rho = radial_on_grid(body, grid)
    n = grid.dimension
    return float(grid.weights @ rho**n) / n


def polar_volume(body, grid: SphereGrid) -> float:
    """V(K*) = (1/n) int h(K, u)^{-n} du."""
    h = support_on_grid(body, grid)
    if np.any(h <= 0):
        raise InvalidBodyError("support must be positive on all grid directions")
    n = grid.dimension
    return float(grid.weights @ h ** (-float(n))) / n


def firey_combination(alpha, body_k, beta, body_l, p, grid: SphereGrid) -> SampledSupport:
    """Body with support (alpha h_K^p + beta h_L^p)^{1/p} on the working grid."""
    if p < 1:
        raise DomainError("Firey combination needs p >= 1")
    if alpha < 0 or beta < 0 or alpha + beta <= 0:
        raise DomainError("Firey weights must be nonnegative, not both zero")
    hk = support_on_grid(body_k, grid)
    hl = support_on_grid(body_l, grid)
    return SampledSupport(grid, (alpha * hk**p + beta * hl**p) ** (1.0 / p))


def lp_mixed_volume(body_k, body_l, p, grid: SphereGrid) -> float:
    """V_p(K, L) = (1/n) int h_L^p h_K^{1-p} dS(K, .)."""
    if p < 1:
        raise DomainError("mixed volume needs p >= 1")
    sm = body_k.surface_measure(grid)
    hl = np.asarray(body_l.support(sm.normals), dtype=float)
    hk = np.asarray(body_k.support(sm.normals), dtype=float)
    n = body_k.dimension
    return float(sm.masses @ (hl**p * hk ** (1.0 - p))) / n


def dual_mixed_volume(body_k, body_l, p, grid: SphereGrid) -> float:
    """tilde V_{-p}(K, L) = (1/n) int rho_K^{n+p} rho_L^{-p} du."""
    rk = radial_on_grid(body_k, grid)
    rl = radial_on_grid(body_l, grid)
    n = grid.dimension
    return float(grid.weights @ (rk ** (n + p) * rl ** (-float(p)))) / n


@dataclass(frozen=True)
class DualMixedGap:
    """Two sides of the strengthened dual mixed volume bound."""

    lhs_ratio_minus_1: float
    rhs_bound: float
    sym_diff_ratio: float

    @property
    def holds(self) -> bool:
        return self.lhs_ratio_minus_1 >= self.rhs_bound - 1e-9


def improved_dual_gap(body_k, body_l, p, grid: SphereGrid) -> DualMixedGap:
    """Gap record for the quadratic strengthening of the dual Hoelder bound.

    All volumes are taken on the same grid so the comparison is internally
    consistent; ``rhs_bound`` is (p/8n) (V(K delta gamma L)/V(K))^2 with
    gamma = (V(K)/V(L))^{1/n}.
    """
    n = grid.dimension
    rk = radial_on_grid(body_k, grid)
    rl = radial_on_grid(body_l, grid)
    w = grid.weights
    vk = float(w @ rk**n) / n
    vl = float(w @ rl**n) / n
    dual = float(w @ (rk ** (n + p) * rl ** (-float(p)))) / n
    lhs = dual / (vk ** ((n + p) / n) * vl ** (-p / n)) - 1.0
    gamma_n = vk / vl
    vdiff = float(w @ np.abs(rk**n - gamma_n * rl**n)) / n
    ratio = vdiff / vk
    return DualMixedGap(lhs, (p / (8.0 * n)) * ratio**2, ratio)


# ---------------------------------------------------------------------------
# one-sided body moments (centroid bodies)


def _polygon_chords(tv, sv, levels):
    """Chord lengths of a convex polygon at the given sweep levels.

    tv, sv: vertex coordinates along the sweep direction and its normal;
    levels must avoid the vertex values (callers sample strictly inside
    breakpoint intervals).
    """
    tj = np.roll(tv, -1)
    sj = np.roll(sv, -1)
    ti = tv[:, None]
    t = levels[None, :]
    cross = (ti - t) * (tj[:, None] - t) < 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = (t - ti) / (tj[:, None] - ti)
    s = np.where(cross, sv[:, None] + frac * (sj - sv)[:, None], np.nan)
    return np.nanmax(s, axis=0) - np.nanmin(s, axis=0)


def _polygon_sweep_moment(verts, u, p):
    """Exact integral of <u, y>_+^p over a convex polygon (CCW vertices)."""
    tv = verts @ u
    hi = float(tv.max())
    if hi <= 0.0:
        return 0.0
    lo = max(float(tv.min()), 0.0)
    if hi - lo <= 1e-15 * max(1.0, hi):
        return 0.0
    sv = verts @ np.array([-u[1], u[0]])
    inner = np.unique(tv[(tv > lo) & (tv < hi)])
    bps = np.concatenate([[lo], inner, [hi]])
    ba, bb = bps[:-1], bps[1:]
    keep = (bb - ba) > 1e-14 * max(1.0, hi)
    ba, bb = ba[keep], bb[keep]
    if ba.size == 0:
        return 0.0
    t1 = ba + (bb - ba) / 3.0
    t2 = ba + 2.0 * (bb - ba) / 3.0
    l1 = _polygon_chords(tv, sv, t1)
    l2 = _polygon_chords(tv, sv, t2)
    c1 = (l2 - l1) / (t2 - t1)
    c0 = l1 - c1 * t1
    q1 = (bb ** (p + 1) - ba ** (p + 1)) / (p + 1)
    q2 = (bb ** (p + 2) - ba ** (p + 2)) / (p + 2)
    return float(np.sum(c0 * q1 + c1 * q2))


def _orthobasis(u):
    a = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(u, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(u, e1)


def _polytope3_section_area(simplices, u, e1, e2, t):
    tv = np.einsum("fvk,k->fv", simplices, u)
    pts = []
    for i, j in ((0, 1), (1, 2), (2, 0)):
        ti, tj = tv[:, i], tv[:, j]
        cross = (ti - t) * (tj - t) < 0.0
        if not cross.any():
            continue
        frac = ((t - ti[cross]) / (tj[cross] - ti[cross]))[:, None]
        pts.append(simplices[cross, i] + frac * (simplices[cross, j] - simplices[cross, i]))
    if not pts:
        return 0.0
    pts = np.vstack(pts)
    if pts.shape[0] < 3:
        return 0.0
    xy = np.column_stack([pts @ e1, pts @ e2])
    c = xy.mean(axis=0)
    order = np.argsort(np.arctan2(xy[:, 1] - c[1], xy[:, 0] - c[0]))
    x, y = xy[order, 0], xy[order, 1]
    return 0.5 * abs(float(x @ np.roll(y, -1) - y @ np.roll(x, -1)))


def _polytope3_sweep_moment(poly, u, p):
    """Exact integral of <u, y>_+^p over a 3-polytope via quadratic sections."""
    tv = poly.vertices @ u
    hi = float(tv.max())
    if hi <= 0.0:
        return 0.0
    lo = max(float(tv.min()), 0.0)
    if hi - lo <= 1e-15 * max(1.0, hi):
        return 0.0
    e1, e2 = _orthobasis(u)
    inner = np.unique(tv[(tv > lo) & (tv < hi)])
    bps = np.concatenate([[lo], inner, [hi]])
    total = 0.0
    for ba, bb in zip(bps[:-1], bps[1:]):
        if bb - ba <= 1e-14 * max(1.0, hi):
            continue
        # section area is exactly quadratic between breakpoints
        ts = ba + np.array([0.25, 0.5, 0.75]) * (bb - ba)
        areas = [_polytope3_section_area(poly._simplices, u, e1, e2, t) for t in ts]
        tm = 0.5 * (ba + bb)
        tau = ts - tm
        coeff = np.linalg.solve(np.vander(tau, 3, increasing=True), areas)
        a0 = coeff[0] - coeff[1] * tm + coeff[2] * tm * tm
        a1 = coeff[1] - 2.0 * coeff[2] * tm
        a2 = coeff[2]
        q1 = (bb ** (p + 1) - ba ** (p + 1)) / (p + 1)
        q2 = (bb ** (p + 2) - ba ** (p + 2)) / (p + 2)
        q3 = (bb ** (p + 3) - ba ** (p + 3)) / (p + 3)
        total += a0 * q1 + a1 * q2 + a2 * q3
    return float(total)


def membership(body, pts: np.ndarray) -> np.ndarray:
    """Boolean mask of points inside the (star-shaped) body."""
    r = np.linalg.norm(pts, axis=1)
    out = np.ones(pts.shape[0], dtype=bool)
    nz = r > 0
    units = pts[nz] / r[nz][:, None]
    rho = np.asarray(body.radial(units), dtype=float)
    out[nz] = r[nz] <= rho
    return out


def _qmc_cloud(body, grid, mc_samples, seed):
    rho = radial_on_grid(body, grid)
    extent = 1.05 * float(rho.max())
    n = grid.dimension
    sampler = qmc.Halton(d=n, scramble=True, seed=seed)
    pts = sampler.random(mc_samples) * (2.0 * extent) - extent
    keep = membership(body, pts)
    cell = (2.0 * extent) ** n / mc_samples
    return np.ascontiguousarray(pts[keep]), cell


def one_sided_body_moments(body, dirs, p, grid=None, mc_samples=200_000, seed=0):
    """Per-direction moments (int_K <u,y>_+^p dy, int_K <u,y>_-^p dy, V(K)).

    Closed form for balls and ellipsoids, exact sweep-plane integration for
    polytopes, seeded low-discrepancy sampling with radial membership tests
    for everything else (the returned volume is the estimate matching the
    sampling, so downstream ratios are internally consistent).
    """
    dirs = np.asarray(dirs, dtype=float)
    if isinstance(body, Ball):
        body = Ellipsoid(np.eye(body.dimension) * body.radius)
    if isinstance(body, Ellipsoid):
        n = body.dimension
        half = 0.5 * body._det * _ball_abs_moment(n, p)
        lens = np.linalg.norm(dirs @ body.matrix, axis=1)
        mom = half * lens**p
        return mom, mom.copy(), body.exact_volume()
    if isinstance(body, Polytope):
        if body.dimension == 2:
            sweep = _polygon_sweep_moment
            verts = body.vertices
        else:
            sweep = _polytope3_sweep_moment
            verts = body
        pos = np.array([sweep(verts, u, p) for u in dirs])
        neg = np.array([sweep(verts, -u, p) for u in dirs])
        return pos, neg, body.exact_volume()
    if grid is None:
        raise ConfigurationError("sampled body moments need a working grid")
    pts, cell = _qmc_cloud(body, grid, mc_samples, seed)
    pos, neg = kernels.one_sided_power_sums(dirs, pts, float(p))
    return pos * cell, neg * cell, cell * pts.shape[0]


def centroid_body(body, lam, p, grid: SphereGrid, mc_samples=200_000, seed=0) -> SampledSupport:
    """General moment body: support^p is the lam-weighted one-sided p-moment
    of the body, normalized so the unit ball is a fixed point.
    """
    if not 0.0 <= lam <= 1.0:
        raise DomainError("lambda must lie in [0, 1]")
    if p < 1:
        raise DomainError("centroid body needs p >= 1")
    if mc_samples < 10_000:
        raise ConfigurationError("mc_samples floor is 10^4")
    n = grid.dimension
    pos, neg, vol = one_sided_body_moments(
        body, grid.directions, p, grid=grid, mc_samples=mc_samples, seed=seed
    )
    if vol <= 0:
        raise InvalidBodyError("body has nonpositive volume")
    hp = ((1.0 - lam) * pos + lam * neg) / (centroid_normalization(n, p) * vol)
    return SampledSupport(grid, hp ** (1.0 / p))


def busemann_petty_deficit(body, lam, p, grid, mc_samples=200_000, seed=0) -> float:
    """V(moment body)/V(body) - 1; nonnegative, zero only at centered ellipsoids."""
    gb = centroid_body(body, lam, p, grid, mc_samples=mc_samples, seed=seed)
    return body_volume(gb, grid) / body_volume(body, grid) - 1.0


def projection_body(body, grid: SphereGrid) -> SampledSupport:
    """Body whose support in u is the shadow (n-1)-volume of K on u-perp,
    normalized by omega_{n-1}.
    """
    sm = body.surface_measure(grid)
    n = body.dimension
    h = np.abs(grid.directions @ sm.normals.T) @ sm.masses
    h /= 2.0 * unit_ball_volume(n - 1)
    return SampledSupport(grid, h)


def petty_product(body, grid: SphereGrid) -> float:
    """Normalized shadow-body product V(Pi* K) V(K)^{n-1} / omega_n^n, <= 1."""
    n = body.dimension
    pk = projection_body(body, grid)
    vpolar = polar_volume(pk, grid)
    vk = body_volume(body, grid)
    return vpolar * vk ** (n - 1) / unit_ball_volume(n) ** n


def symmetric_difference_ratio(body_k, body_l, grid: SphereGrid) -> float:
    """V(K delta aL)/V(K) with a = (V(K)/V(L))^{1/n}, via the radial formula."""
    n = grid.dimension
    rk = radial_on_grid(body_k, grid)
    rl = radial_on_grid(body_l, grid)
    w = grid.weights
    vk = float(w @ rk**n) / n
    vl = float(w @ rl**n) / n
    an = vk / vl
    return float(w @ np.abs(rk**n - an * rl**n)) / n / vk


def _traceless_basis(n):
    basis = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            m = np.zeros((n, n))
            m[i, j] = 1.0
            basis.append(m)
    for i in range(n - 1):
        m = np.zeros((n, n))
        m[i, i] = 1.0
        m[i + 1, i + 1] = -1.0
        basis.append(m)
    return np.array(basis)


def _fit_support_quadratic(dirs, h):
    """Least-squares Q with u^T Q u ~ h(u)^2; exact for ellipsoids."""
    n = dirs.shape[1]
    cols = []
    for i in range(n):
        for j in range(i, n):
            c = dirs[:, i] * dirs[:, j]
            cols.append(c if i == j else 2.0 * c)
    a = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(a, h**2, rcond=None)
    q = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i, n):
            q[i, j] = q[j, i] = coef[k]
            k += 1
    return q


def _symmetrize_check(h, grid, what):
    half = grid.size // 2
    err = np.max(np.abs(h[:half] - h[half:])) / max(float(h.max()), 1e-300)
    if err > 1e-6:
        raise DomainError(f"{what} must be origin-symmetric (asymmetry {err:.2e})")


def banach_mazur_estimate(body_k, body_l, restarts=8, seed=0, grid=None) -> float:
    """Upper bound on the log Banach-Mazur distance of two symmetric bodies.

    Minimizes log(max_u h(Phi L, u)/h(K, u)) - log(min_u ...) over Phi in
    GL_n, parameterized as exp of a traceless matrix (the overall scale drops
    out of the objective), with derivative-free simplex search from seeded
    starts.  The result is an upper bound; no lower-bound claim is made.
    """
    n = body_k.dimension
    if grid is None:
        if n == 2:
            from .spherequad import build_sphere_grid

            grid = build_sphere_grid(2, 512, "uniform-angle")
        elif n == 3:
            from .spherequad import build_sphere_grid

            grid = build_sphere_grid(3, 1024, "product-gauss")
        else:
            raise ConfigurationError("pass an explicit grid for n > 3")
    hk = support_on_grid(body_k, grid)
    hl = support_on_grid(body_l, grid)
    _symmetrize_check(hk, grid, "first body")
    _symmetrize_check(hl, grid, "second body")
    basis = _traceless_basis(n)
    dirs = grid.directions

    def objective(theta):
        t = np.tensordot(theta, basis, axes=1)
        phi = expm(t)
        hphi = np.asarray(body_l.support(dirs @ phi), dtype=float)
        if np.any(hphi <= 0) or not np.all(np.isfinite(hphi)):
            return 1e6
        ratios = hphi / hk
        return math.log(ratios.max()) - math.log(ratios.min())

    def project(mat):
        mat = mat - np.trace(mat) / n * np.eye(n)
        return np.array([np.tensordot(mat, b, axes=2) / np.tensordot(b, b, axes=2)
                         for b in basis])

    starts = [np.zeros(len(basis))]
    try:
        qk = _fit_support_quadratic(dirs, hk)
        ql = _fit_support_quadratic(dirs, hl)
        phi0 = np.real(sqrtm(qk) @ np.linalg.inv(sqrtm(ql)))
        starts.append(project(np.real(logm(phi0))))
    except Exception:
        pass
    rng = np.random.default_rng(seed)
    while len(starts) < max(restarts, 1):
        starts.append(rng.normal(0.0, 0.4, size=len(basis)))

    best = math.inf
    for x0 in starts:
        best = min(best, objective(x0))
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 600 * len(basis)},
        )
        best = min(best, float(res.fun))
    return max(best, 0.0)
