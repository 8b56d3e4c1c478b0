"""Quadrature grids on the unit sphere S^{n-1}.

All sphere integrals in the package are discretized with an antipodally
symmetric direction/weight set: the grid is stored as ``[H; -H]`` so that the
antipode of direction ``i`` is direction ``i + m/2`` with bitwise-equal weight.
Weights are in spherical Lebesgue measure units (they sum to the surface area
``n * omega_n``).

Three schemes are provided:

* ``uniform-angle`` (n=2): equally spaced angles; trapezoid rule on the
  circle, exact for trigonometric polynomials of degree < m - 1.
* ``product-gauss`` (n=3): Gauss-Legendre nodes in z times uniform azimuth.
* ``monte-carlo`` (n>=2): seeded, symmetrized equal-weight directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalDomainError

SCHEMES = ("uniform-angle", "product-gauss", "monte-carlo")


def unit_ball_volume(s: float) -> float:
    """Volume of the unit ball in dimension s, extended to real s >= 0.

    Computed as pi^(s/2) / Gamma(1 + s/2); non-integer indices are needed by
    the energy normalization constants.
    """
    if s < 0:
        raise DomainError(f"ball volume index must be >= 0, got {s}")
    return math.pi ** (s / 2.0) / math.gamma(1.0 + s / 2.0)


def sphere_surface_area(n: int) -> float:
    """Surface measure of S^{n-1}, i.e. n * omega_n."""
    return n * unit_ball_volume(n)


@dataclass(frozen=True)
class SphereGrid:
    """Antipodally symmetric quadrature rule on S^{n-1}.

    directions has shape (m, n) with unit rows and ``directions[m//2 + i] ==
    -directions[i]`` exactly; weights are positive and sum to n * omega_n.
    ``poly2_tol`` is the scheme's declared tolerance on degree <= 2
    polynomial integrands.
    """

    dimension: int
    directions: np.ndarray
    weights: np.ndarray
    scheme: str
    resolution: int
    seed: int
    poly2_tol: float = field(default=1e-10)

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "weights", w)
        m = d.shape[0]
        if m % 2 != 0:
            raise ConfigurationError("direction count must be even (antipodal pairing)")
        norms = np.linalg.norm(d, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ConfigurationError("directions must be unit vectors (1e-12)")
        area = sphere_surface_area(self.dimension)
        if abs(w.sum() - area) > 1e-10 * area:
            raise ConfigurationError(
                f"weights sum {w.sum():.15g} != surface area {area:.15g}"
            )
        half = m // 2
        if not (np.array_equal(d[half:], -d[:half]) and np.array_equal(w[half:], w[:half])):
            raise ConfigurationError("grid is not antipodally symmetric")

    @property
    def size(self) -> int:
        return self.directions.shape[0]

    def antipode(self, i: int) -> int:
        """Index of -directions[i]."""
        half = self.size // 2
        return i + half if i < half else i - half

    def config(self) -> dict:
        """JSON-ready description, sufficient to rebuild the grid bit-exactly."""
        return {
            "n": self.dimension,
            "resolution": self.resolution,
            "scheme": self.scheme,
            "seed": self.seed,
        }


def _halfgrid_uniform_angle(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    half = resolution // 2
    theta = 2.0 * np.pi * np.arange(half) / resolution
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    w = np.full(half, 2.0 * np.pi / resolution)
    return dirs, w


def _halfgrid_product_gauss(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    # factor the requested point count as m x m with m even
    m = int(math.ceil(math.sqrt(resolution)))
    m += m % 2
    z, wz = np.polynomial.legendre.leggauss(m)
    pos = z > 0  # even m: no zero node, exactly m/2 positive
    z, wz = z[pos], wz[pos]
    phi = 2.0 * np.pi * np.arange(m) / m
    s = np.sqrt(1.0 - z**2)
    dirs = np.empty((z.size * m, 3))
    w = np.empty(z.size * m)
    for k in range(z.size):
        sl = slice(k * m, (k + 1) * m)
        dirs[sl, 0] = s[k] * np.cos(phi)
        dirs[sl, 1] = s[k] * np.sin(phi)
        dirs[sl, 2] = z[k]
        w[sl] = wz[k] * (2.0 * np.pi / m)
    return dirs, w


def _halfgrid_monte_carlo(n: int, resolution: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    half = resolution // 2
    x = rng.standard_normal((half, n))
    norms = np.linalg.norm(x, axis=1)
    while np.any(norms < 1e-12):  # essentially never, but keep the grid valid
        bad = norms < 1e-12
        x[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(x, axis=1)
    dirs = x / norms[:, None]
    w = np.full(half, sphere_surface_area(n) / resolution)
    return dirs, w


def build_sphere_grid(n: int, resolution: int, scheme: str, seed: int = 0) -> SphereGrid:
    """Build an antipodally symmetric quadrature grid on S^{n-1}.

    Parameters
    ----------
    n : dimension of the ambient space (>= 2).
    resolution : requested number of directions; must be even and >= 8.
        ``product-gauss`` rounds it up to the next even-by-even product.
    scheme : one of ``uniform-angle`` (n=2), ``product-gauss`` (n=3),
        ``monte-carlo`` (n>=2).
    seed : seed for stochastic schemes; recorded either way.

    Deterministic given (scheme, resolution, seed).
    """
    if n < 2:
        raise ConfigurationError(f"sphere dimension needs n >= 2, got n={n}")
    if resolution < 8 or resolution % 2 != 0:
        raise ConfigurationError(
            f"resolution must be even and >= 8, got {resolution}"
        )
    if scheme == "uniform-angle":
        if n != 2:
            raise ConfigurationError("uniform-angle scheme is only defined for n=2")
        hd, hw = _halfgrid_uniform_angle(resolution)
        tol = 1e-12
    elif scheme == "product-gauss":
        if n != 3:
            raise ConfigurationError("product-gauss scheme is only defined for n=3")
        hd, hw = _halfgrid_product_gauss(resolution)
        tol = 1e-10
    elif scheme == "monte-carlo":
        hd, hw = _halfgrid_monte_carlo(n, resolution, seed)
        tol = 12.0 * sphere_surface_area(n) / math.sqrt(resolution)
    else:
        raise ConfigurationError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")

    dirs = np.vstack([hd, -hd])
    w = np.concatenate([hw, hw])
    return SphereGrid(
        dimension=n,
        directions=dirs,
        weights=w,
        scheme=scheme,
        resolution=dirs.shape[0],
        seed=seed,
        poly2_tol=tol,
    )


def integrate_sphere(grid: SphereGrid, integrand) -> float:
    """Quadrature of ``integrand`` over S^{n-1}.

    ``integrand`` maps a unit vector to a real; a vectorized callable taking
    the full (m, n) direction array is used directly.  The weighted sum is a
    fixed-order pairwise reduction, so results are reproducible.
    """
    vals = None
    try:
        out = integrand(grid.directions)
        arr = np.asarray(out, dtype=float)
        if arr.shape == (grid.size,):
            vals = arr
    except Exception:
        vals = None
    if vals is None:
        vals = np.fromiter(
            (float(integrand(u)) for u in grid.directions), dtype=float, count=grid.size
        )
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericalDomainError(
            f"integrand is not finite at direction {grid.directions[i].tolist()}"
        )
    return float(grid.weights @ vals)
