"""Shared generators and independent oracles for the test suite."""

import numpy as np

from affine_energy.bodies import Ellipsoid, Polytope, SampledRadial, membership
from affine_energy.funcspace import GridFunction


def polygon_centroid(verts):
    """Area centroid of a convex polygon (CCW shoelace)."""
    x, y = verts[:, 0], verts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return np.array([cx, cy])


def random_polygon(rng, nv=7, scale=1.0):
    """Random convex polygon with the origin at its area centroid."""
    from scipy.spatial import ConvexHull

    while True:
        pts = rng.normal(size=(nv + 4, 2)) * scale
        hull = ConvexHull(pts)
        verts = pts[hull.vertices]
        if len(verts) >= 3:
            return Polytope(verts - polygon_centroid(verts))


def random_ellipsoid(rng, n=2, max_log_aspect=1.2):
    """Random centered ellipsoid with bounded condition number."""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    s = np.exp(rng.uniform(-max_log_aspect / 2, max_log_aspect / 2, n))
    q2, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Ellipsoid(q @ np.diag(s) @ q2)


def random_star2(rng, grid, roughness=0.12, modes=4):
    """Positive trigonometric radial field; antipodal by even harmonics."""
    th = np.arctan2(grid.directions[:, 1], grid.directions[:, 0])
    r = rng.uniform(-0.2, 0.2) * np.ones_like(th)
    for k in range(1, modes + 1):
        r += roughness * rng.standard_normal() * np.cos(2 * k * th)
        r += roughness * rng.standard_normal() * np.sin(2 * k * th)
    return SampledRadial(grid, np.exp(r))


def random_star3(rng, grid, roughness=0.15):
    u = grid.directions
    q = rng.standard_normal((3, 3)) * roughness
    q = (q + q.T) / 2.0
    return SampledRadial(grid, np.exp(np.einsum("ij,jk,ik->i", u, q, u)))


def random_bumps(rng, cells=129, extent=5.0, k_range=(2, 5)):
    """Sum of a few anisotropic Gaussian bumps, compactly supported in the box."""
    k = rng.integers(*k_range)
    comps = []
    for _ in range(k):
        c = rng.uniform(-1.8, 1.8, 2)
        m = rng.uniform(0.5, 1.6, (2, 2)) * rng.choice([-1.0, 1.0], (2, 2))
        m = m @ m.T + 0.4 * np.eye(2)
        comps.append((rng.uniform(0.3, 1.0), c, m))

    def fn(pts):
        out = np.zeros(len(pts))
        for amp, c, m in comps:
            d = pts - c
            out += amp * np.exp(-np.einsum("ij,jk,ik->i", d, m, d))
        return out

    return GridFunction.from_callable(fn, extent, cells)


def raster_volume(body, extent, cells=512):
    """Cell-count volume oracle, independent of the radial quadrature path."""
    h = 2.0 * extent / cells
    ax = -extent + h / 2 + h * np.arange(cells)
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return h**2 * int(membership(body, pts).sum())


def raster_symmetric_difference(body_k, body_l, scale_l, extent, cells=512):
    """Cell-count volume of K delta (scale_l * L)."""
    h = 2.0 * extent / cells
    ax = -extent + h / 2 + h * np.arange(cells)
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    in_k = membership(body_k, pts)
    in_l = membership(body_l, pts / scale_l)
    return h**2 * int(np.logical_xor(in_k, in_l).sum())


def bm_bruteforce_square_ball(square, grid, n_rot=180, n_scale=121):
    """Brute-force Banach-Mazur upper bound over rotations x diagonal scalings."""
    hk = np.asarray(square.support(grid.directions), dtype=float)
    dirs = grid.directions
    best = np.inf
    for phi in np.linspace(0.0, np.pi / 2, n_rot):
        c, s = np.cos(phi), np.sin(phi)
        rot = np.array([[c, -s], [s, c]])
        for ls in np.linspace(-0.5, 0.5, n_scale):
            mat = rot @ np.diag([np.exp(ls), np.exp(-ls)])
            hl = np.linalg.norm(dirs @ mat, axis=1)  # support of mat(B)
            ratios = hl / hk
            best = min(best, np.log(ratios.max()) - np.log(ratios.min()))
    return best
