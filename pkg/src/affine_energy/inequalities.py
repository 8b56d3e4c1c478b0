"""Sharp constants, extremal families, inequality verification, stability.

The verification entry point is :func:`verify`, which evaluates one
inequality on one function and returns a :class:`VerificationReport` whose
``deficit`` is normalized so that 0 is the equality case and negative values
beyond the tolerance mean failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, logm
from scipy.optimize import minimize

from .bodies import (
    Ball,
    Ellipsoid,
    banach_mazur_estimate,
    busemann_petty_deficit,
)
from .energy import EnergyContext, affine_energy, bv_energy_value
from .errors import DomainError
from .funcspace import (
    BVCharacteristic,
    GridFunction,
    entropy,
    lp_norm,
    normalized,
    support_volume,
)
from .spherequad import SphereGrid, unit_ball_volume
from .tolerances import tolerance_for

VERIFY_KINDS = (
    "affine_sobolev_p",
    "morrey",
    "gn_i",
    "gn_ii",
    "logsob",
    "affine_sobolev_bv",
)


def _lgamma(x: float) -> float:
    return math.lgamma(x)


def _pnorm(f: GridFunction, p: float) -> float:
    """Cell-sum Lebesgue functional (int |f|^p)^{1/p}; quasi-norm for p < 1.

    The Gagliardo-Nirenberg exponents alpha*p and alpha*(p-1)+1 can drop
    below 1, where the public lp_norm correctly refuses.
    """
    if p <= 0:
        raise DomainError("integrability exponent must be positive")
    return float(f.cell_volume * np.sum(np.abs(f.values) ** p)) ** (1.0 / p)


def sharp_constant(kind: str, n: int, p: float, alpha: float | None = None) -> float:
    """Sharp constant of the requested inequality from its Gamma formula.

    Kinds and domains: ``sobolev`` needs p in (1, n); ``morrey`` needs p > n;
    ``gn_i`` needs p in (1, n) and alpha in (1, n/(n-p)); ``gn_ii`` needs
    p in (1, n) and alpha in (0, 1); ``logsob`` needs p > 1.
    """
    n = int(n)
    if kind == "sobolev":
        if not 1 < p < n:
            raise DomainError(f"sobolev constant needs p in (1, n); got p={p}, n={n}")
        gamma_ratio = math.exp(
            _lgamma(1 + n / 2) + _lgamma(n) - _lgamma(n / p) - _lgamma(1 + n - n / p)
        )
        return (
            math.pi ** (-0.5)
            * n ** (-1.0 / p)
            * ((p - 1) / (n - p)) ** (1.0 - 1.0 / p)
            * gamma_ratio ** (1.0 / n)
        )
    if kind == "morrey":
        if not p > n:
            raise DomainError(f"morrey constant needs p > n; got p={p}, n={n}")
        return (
            n ** (-1.0 / p)
            * unit_ball_volume(n) ** (-1.0 / n)
            * ((p - 1) / (p - n)) ** ((p - 1) / p)
        )
    if kind == "gn_i":
        if not 1 < p < n:
            raise DomainError(f"gn constant needs p in (1, n); got p={p}, n={n}")
        if alpha is None or not 1 < alpha < n / (n - p):
            raise DomainError(
                f"gn_i needs alpha in (1, n/(n-p)) = (1, {n/(n-p):g}); got {alpha}"
            )
        q = p / (p - 1)
        y = (alpha * p - alpha + 1) / (alpha - 1)
        theta = gn_theta("gn_i", n, p, alpha)
        gamma_ratio = math.exp(
            _lgamma(y) + _lgamma(1 + n / 2) - _lgamma(y - n / q) - _lgamma(1 + n / q)
        )
        return (
            (y * (alpha - 1) ** p / (math.pi ** (p / 2) * q ** (p - 1) * n)) ** (theta / p)
            * ((q * y - n) / (q * y)) ** (1.0 / (alpha * p))
            * gamma_ratio ** (theta / n)
        )
    if kind == "gn_ii":
        if not 1 < p < n:
            raise DomainError(f"gn constant needs p in (1, n); got p={p}, n={n}")
        if alpha is None or not 0 < alpha < 1:
            raise DomainError(f"gn_ii needs alpha in (0, 1); got {alpha}")
        q = p / (p - 1)
        y = (alpha * p - alpha + 1) / (1 - alpha)
        theta = gn_theta("gn_ii", n, p, alpha)
        # the Gamma(1 + z) factor uses z = y; confirmed against high-precision
        # quadrature on the branch extremal (exact to working precision)
        gamma_ratio = math.exp(
            _lgamma(y + 1 + n / q) + _lgamma(1 + n / 2) - _lgamma(1 + y) - _lgamma(1 + n / q)
        )
        return (
            (y * (1 - alpha) ** p / (math.pi ** (p / 2) * q ** (p - 1) * n)) ** (theta / p)
            * ((q * y) / (q * y + n)) ** ((1.0 - theta) / (alpha * p))
            * gamma_ratio ** (theta / n)
        )
    if kind == "logsob":
        if not p > 1:
            raise DomainError(f"logsob constant needs p > 1; got p={p}")
        gamma_ratio = math.exp(_lgamma(1 + n / 2) - _lgamma(1 + n * (p - 1) / p))
        return (
            math.pi ** (-p / 2.0)
            * (p / n)
            * (((p - 1) / math.e) ** (p - 1))
            * gamma_ratio ** (p / n)
        )
    raise DomainError(f"unknown sharp constant kind {kind!r}")


def gn_theta(kind: str, n: int, p: float, alpha: float) -> float:
    """Interpolation exponent of the two Gagliardo-Nirenberg branches."""
    if kind == "gn_i":
        return n * (alpha - 1) / (alpha * (n * p - (alpha * p + 1 - alpha) * (n - p)))
    return n * (1 - alpha) / ((alpha * p + 1 - alpha) * (n - alpha * (n - p)))


# ---------------------------------------------------------------------------
# extremal families

_EXTREMAL_DEFAULTS = {
    "sobolev": (50.0, 383),
    "morrey": (1.25, 257),
    "gn_i": (14.0, 320),
    "gn_ii": (1.25, 257),
    "logsob": (5.0, 257),
}


def extremal(kind: str, n: int, p: float, alpha: float | None = None, a: float = 1.0,
             matrix=None, x0=None, sigma: float = 1.0, r: float = 1.0,
             extent: float | None = None, cells: int | None = None):
    """Grid-sampled extremal of the requested inequality (truncated where the
    family has unbounded support), or an exact scaled ellipsoid characteristic
    for ``kind='char'``.
    """
    mat = np.eye(n) if matrix is None else np.asarray(matrix, dtype=float)
    center = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    if kind == "char":
        return BVCharacteristic(a, Ellipsoid(mat * (a * r)), center)
    if kind not in _EXTREMAL_DEFAULTS:
        raise DomainError(f"unknown extremal kind {kind!r}")
    d_extent, d_cells = _EXTREMAL_DEFAULTS[kind]
    extent = d_extent if extent is None else extent
    cells = d_cells if cells is None else cells
    pprime = p / (p - 1.0)

    if kind == "sobolev":
        if not 1 < p < n:
            raise DomainError(f"sobolev extremal needs p in (1, n); got p={p}")
        expo = 1.0 - n / p

        def profile(t):
            return (a + t**pprime) ** expo

    elif kind == "morrey":
        if not p > n:
            raise DomainError(f"morrey extremal needs p > n; got p={p}")
        expo = (p - n) / (p - 1.0)

        def profile(t):
            return a * np.maximum(1.0 - t**expo, 0.0)

    elif kind == "gn_i":
        if alpha is None or alpha <= 1:
            raise DomainError("gn_i extremal needs alpha > 1")

        def profile(t):
            return (a + t**pprime) ** (-1.0 / (alpha - 1.0))

    elif kind == "gn_ii":
        if alpha is None or not 0 < alpha < 1:
            raise DomainError("gn_ii extremal needs alpha in (0, 1)")

        def profile(t):
            return np.maximum(a - t**pprime, 0.0) ** (1.0 / (1.0 - alpha))

    else:  # logsob, normalized to unit p-norm by its prefactor
        pref = (
            math.pi ** (-n / (2.0 * p))
            * (sigma * p ** ((p - 1.0) / p)) ** (n / p)
            * math.exp((_lgamma(1 + n / 2) - _lgamma(1 + n * (p - 1) / p)) / p)
        )

        def profile(t):
            return pref * np.exp(-((sigma * t) ** pprime))

    def fn(pts):
        t = np.linalg.norm((pts - center) @ mat.T, axis=1)
        return profile(t)

    return GridFunction.from_callable(fn, extent, cells, center=center)


# ---------------------------------------------------------------------------
# verification reports


@dataclass
class VerificationReport:
    """Outcome of one inequality check.

    ``deficit`` is normalized so the equality case is 0 and validity means
    deficit >= -tolerance.  ``wall_time`` is informational only and excluded
    from serialized output so reruns are byte-identical.
    """

    kind: str
    params: dict
    lhs: float
    rhs: float
    deficit: float
    tolerance: float
    grid_meta: dict
    seed: int
    passed: bool
    wall_time: float = 0.0
    notes: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
            "tolerance": self.tolerance,
            "grid": self.grid_meta,
            "seed": self.seed,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def _finish(kind, params, lhs, rhs, tol, grid, seed, notes, t0) -> VerificationReport:
    deficit = lhs / rhs - 1.0
    return VerificationReport(
        kind=kind,
        params=params,
        lhs=lhs,
        rhs=rhs,
        deficit=deficit,
        tolerance=tol,
        grid_meta=grid.config(),
        seed=seed,
        passed=bool(deficit >= -tol),
        wall_time=time.perf_counter() - t0,
        notes=notes,
    )


def verify(kind: str, f, lam: float, grid: SphereGrid, params: dict | None = None,
           tolerance: float | None = None, tolerance_scale: float = 1.0,
           seed: int = 0) -> VerificationReport:
    """Evaluate one inequality on one function.

    ``params`` supplies p (and alpha for the Gagliardo-Nirenberg kinds).  The
    report's lhs is the side that dominates at equality, so deficit =
    lhs/rhs - 1 >= -tolerance is the pass condition for every kind.
    """
    t0 = time.perf_counter()
    params = dict(params or {})
    notes = []
    tol = tolerance_for(kind, tolerance_scale, tolerance)
    n = grid.dimension

    if kind == "affine_sobolev_bv":
        e1 = bv_energy_value(f, grid)
        if isinstance(f, BVCharacteristic):
            nprime = n / (n - 1.0)
            fnorm = f.lp_norm(nprime, grid)
        else:
            fnorm = lp_norm(f, n / (n - 1.0))
        lhs = e1
        rhs = n * unit_ball_volume(n) ** (1.0 / n) * fnorm
        params.setdefault("n", n)
        return _finish(kind, params, lhs, rhs, tol, grid, seed, notes, t0)

    if kind not in VERIFY_KINDS:
        raise DomainError(f"unknown verification kind {kind!r}")
    p = float(params["p"])
    alpha = params.get("alpha")
    params.setdefault("n", n)
    params["lambda"] = lam

    # validate the parameter domain first so failures name the constraint
    const = sharp_constant(
        {"affine_sobolev_p": "sobolev"}.get(kind, kind), n, p, alpha
    )

    if kind == "logsob":
        f = normalized(f, p)
        ctx = EnergyContext(lam, p, grid, f)
        e = affine_energy(ctx)
        ent = entropy(f, p)
        # multiplicative deficit: L_p E^p >= exp(p Ent / n)
        lhs = const * e**p
        rhs = math.exp(p * ent / n)
        return _finish(kind, params, lhs, rhs, tol, grid, seed, notes, t0)

    ctx = EnergyContext(lam, p, grid, f)
    e = affine_energy(ctx)

    if kind == "affine_sobolev_p":
        pstar = n * p / (n - p)
        lhs = const * e
        rhs = _pnorm(f, pstar)
    elif kind == "morrey":
        vsupp = support_volume(f)
        lhs = const * vsupp ** ((p - n) / (n * p)) * e
        rhs = float(np.max(np.abs(f.values)))
    elif kind == "gn_i":
        theta = gn_theta("gn_i", n, p, alpha)
        lhs = const * e**theta * _pnorm(f, alpha * (p - 1) + 1) ** (1 - theta)
        rhs = _pnorm(f, alpha * p)
    elif kind == "gn_ii":
        theta = gn_theta("gn_ii", n, p, alpha)
        notes.append("gn_ii Gamma argument z substituted by y")
        lhs = const * e**theta * _pnorm(f, alpha * p) ** (1 - theta)
        rhs = _pnorm(f, alpha * (p - 1) + 1)
    else:  # pragma: no cover - guarded above
        raise DomainError(kind)
    return _finish(kind, params, lhs, rhs, tol, grid, seed, notes, t0)


# ---------------------------------------------------------------------------
# deficit and stability functionals


def affine_sobolev_deficit(f, grid: SphereGrid) -> float:
    """delta_a(f): normalized total-variation affine Sobolev deficit; 0 at 0."""
    n = grid.dimension
    if isinstance(f, GridFunction):
        if float(np.max(np.abs(f.values))) == 0.0:
            return 0.0
        fnorm = lp_norm(f, n / (n - 1.0))
    else:
        fnorm = f.lp_norm(n / (n - 1.0), grid)
    e1 = bv_energy_value(f, grid)
    return e1 / (n * unit_ball_volume(n) ** (1.0 / n) * fnorm) - 1.0


def _sym_traceless_basis(n):
    basis = []
    for i in range(n - 1):
        m = np.zeros((n, n))
        m[i, i] = 1.0
        m[i + 1, i + 1] = -1.0
        basis.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n))
            m[i, j] = m[j, i] = 1.0
            basis.append(m)
    return np.array(basis)


def distance_to_extremals(f: GridFunction, restarts: int = 8, seed: int = 0) -> float:
    """Upper bound on the normalized n'-distance from f to the scaled
    ellipsoid characteristics with matching n'-norm.

    Derivative-free search over (center, volume-preserving shape, radius);
    the amplitude is eliminated by the norm constraint.  Initialized at the
    second-moment ellipsoid of |f|^{n'}.
    """
    n = f.dimension
    nprime = n / (n - 1.0)
    om_n = unit_ball_volume(n)
    vals = f.values.ravel()
    weights = np.abs(vals) ** nprime
    total = float(weights.sum()) * f.cell_volume  # ||f||_{n'}^{n'}
    if total < 1e-300:
        return 0.0
    pts = f.cell_centers()
    sign = 1.0 if float(np.sum(np.sign(vals) * weights)) >= 0 else -1.0

    wsum = weights.sum()
    mean = weights @ pts / wsum
    centered = pts - mean
    cov = (centered * weights[:, None]).T @ centered / wsum
    cov += 1e-12 * np.trace(cov) * np.eye(n) / n + 1e-30 * np.eye(n)
    basis = _sym_traceless_basis(n)

    def project_sym(mat):
        return np.array(
            [np.tensordot(mat, b, axes=2) / np.tensordot(b, b, axes=2) for b in basis]
        )

    log_cov = np.real(logm(cov))
    s0 = project_sym(0.5 * (log_cov - np.trace(log_cov) / n * np.eye(n)))
    rho0 = math.sqrt((n + 2.0) * np.linalg.det(cov) ** (1.0 / n))
    x0 = np.concatenate([mean, s0, [math.log(rho0)]])

    absf = np.abs(vals)

    def objective(theta):
        center = theta[:n]
        smat = np.tensordot(theta[n:-1], basis, axes=1)
        rho = math.exp(theta[-1])
        psi_inv = expm(-smat)  # psi symmetric SL, inverse is exp(-S)
        z = (pts - center) @ psi_inv.T
        inside = np.einsum("ij,ij->i", z, z) <= rho * rho
        amp = (total / (rho**n * om_n)) ** (1.0 / nprime)
        err = np.where(inside, np.abs(vals - sign * amp) ** nprime, absf**nprime)
        return f.cell_volume * float(err.sum()) / total

    rng = np.random.default_rng(seed)
    starts = [x0]
    scale = np.concatenate(
        [np.full(n, 0.2 * rho0), np.full(len(basis), 0.25), [0.2]]
    )
    while len(starts) < max(restarts, 1):
        starts.append(x0 + rng.normal(0.0, 1.0, size=x0.size) * scale)

    best = math.inf
    for start in starts:
        best = min(best, objective(start))
        res = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-5, "fatol": 1e-9, "maxiter": 400 * x0.size},
        )
        best = min(best, float(res.fun))
    return max(best, 0.0)


@dataclass(frozen=True)
class StabilityRecord:
    delta_a: float
    d_a_upper: float
    exponent_witness: float  # log d_a / log delta_a where defined, else nan


def stability_check(f: GridFunction, grid: SphereGrid, restarts: int = 8,
                    seed: int = 0) -> StabilityRecord:
    """Deficit and distance-to-extremals side by side.

    Only the qualitative co-vanishing is meaningful at grid scale; the
    witness ratio is reported, never asserted against any specific exponent.
    """
    delta = affine_sobolev_deficit(f, grid)
    dist = distance_to_extremals(f, restarts=restarts, seed=seed)
    witness = math.nan
    if 0 < delta < 1 and 0 < dist < 1:
        witness = math.log(dist) / math.log(delta)
    return StabilityRecord(delta, dist, witness)


@dataclass(frozen=True)
class CentroidStabilityRecord:
    bp_deficit: float
    bm_distance_upper: float


def centroid_stability_check(body, grid: SphereGrid, restarts: int = 8, seed: int = 0,
                             mc_samples: int = 200_000) -> CentroidStabilityRecord:
    """Moment-body volume deficit paired with the distance to the ball.

    The deficit is nonnegative and vanishes together with the Banach-Mazur
    estimate on round bodies; no constant linking the two is asserted.
    """
    deficit = busemann_petty_deficit(body, 0.5, 1.0, grid,
                                     mc_samples=mc_samples, seed=seed)
    bm = banach_mazur_estimate(body, Ball(1.0, body.dimension),
                               restarts=restarts, seed=seed, grid=grid)
    return CentroidStabilityRecord(deficit, bm)


@dataclass(frozen=True)
class LogSobDeficits:
    delta_als: float
    delta_a: float


def logsob_deficit_bv(f, grid: SphereGrid) -> LogSobDeficits:
    """Total-variation log-Sobolev deficit against the affine Sobolev deficit.

    delta_aLS >= delta_a holds exactly at quadrature level (Jensen on cell
    sums); both are reported.
    """
    n = grid.dimension
    om_root = unit_ball_volume(n) ** (1.0 / n)
    if isinstance(f, BVCharacteristic):
        nprime = n / (n - 1.0)
        f1 = f.lp_norm(1.0, grid)
        fn = f.lp_norm(nprime, grid)
        vol = f.carrier_volume(grid)
        ent1 = -math.log(vol)  # single amplitude: |f|/||f||_1 = 1/V on the carrier
    else:
        f1 = lp_norm(f, 1.0)
        fn = lp_norm(f, n / (n - 1.0))
        g = np.abs(f.values.ravel()) / f1
        nz = g > 0
        ent1 = f.cell_volume * float(np.sum(g[nz] * np.log(g[nz])))
    e1 = bv_energy_value(f, grid)
    base = e1 / (n * om_root * fn)
    delta_a = base - 1.0
    delta_als = base - (f1 / fn) * math.exp(ent1 / n)
    return LogSobDeficits(delta_als, delta_a)


def classical_logsob_constant(n: int) -> float:
    """Euclidean p=2 log-Sobolev constant 2/(n pi e), for cross-checks."""
    return 2.0 / (n * math.pi * math.e)
