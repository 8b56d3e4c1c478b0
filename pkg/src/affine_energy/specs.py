"""JSON wire formats: body specs, function specs, grid specs, scenarios.

Body spec:      {"kind": "ball|ellipsoid|polytope|lq_ball|sampled", "params": {...}}
Function spec:  {"kind": "catalog", "name": ..., "params": {...},
                 "grid": {"extent": ..., "cells": ...}}
Sphere grid:    {"n": ..., "resolution": ..., "scheme": ..., "seed": ...}
Scenario:       {"jobs": [{"id", "kind", "lambda", "params", "function"/"body",
                 "sphere_grid", "tolerance", "expected"}, ...]}
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bodies import (
    Ball,
    Ellipsoid,
    LqBall,
    Polytope,
    SampledSupport,
    busemann_petty_deficit,
    body_volume,
    petty_product,
)
from .errors import ConfigurationError
from .funcspace import GridFunction, gaussian
from .inequalities import VERIFY_KINDS, VerificationReport, extremal, verify
from .spherequad import SphereGrid, build_sphere_grid, unit_ball_volume
from .tolerances import tolerance_for

BODY_KINDS = ("ball", "ellipsoid", "polytope", "lq_ball", "sampled")


def parse_body(spec: dict):
    kind = spec.get("kind")
    params = spec.get("params", {})
    if kind == "ball":
        return Ball(float(params.get("radius", 1.0)), int(params.get("n", 2)))
    if kind == "ellipsoid":
        return Ellipsoid(np.asarray(params["matrix"], dtype=float))
    if kind == "polytope":
        return Polytope(np.asarray(params["vertices"], dtype=float))
    if kind == "lq_ball":
        return LqBall(float(params["q"]), float(params.get("scale", 1.0)),
                      int(params.get("n", 2)))
    if kind == "sampled":
        grid = parse_sphere_grid(params["grid"])
        return SampledSupport(grid, np.asarray(params["values"], dtype=float))
    raise ConfigurationError(f"unknown body kind {kind!r}; choose from {BODY_KINDS}")


def parse_sphere_grid(spec: dict) -> SphereGrid:
    return build_sphere_grid(
        int(spec["n"]),
        int(spec["resolution"]),
        spec["scheme"],
        int(spec.get("seed", 0)),
    )


CATALOG_NAMES = (
    "gaussian",
    "two_bump",
    "sobolev_extremal",
    "morrey_extremal",
    "gn_extremal",
    "logsob_extremal",
    "char",
)


def catalog_function(name: str, params: dict, grid: dict | None = None):
    """Build a catalog function; extremal families go through
    :func:`affine_energy.inequalities.extremal`.
    """
    params = dict(params or {})
    grid = dict(grid or {})
    extent = grid.get("extent")
    cells = grid.get("cells")
    n = int(params.get("n", 2))
    if name == "gaussian":
        mat = np.asarray(params.get("matrix", np.eye(n)), dtype=float)
        center = np.asarray(params.get("center", np.zeros(n)), dtype=float)
        amp = float(params.get("amplitude", 1.0))

        def fn(pts):
            d = (pts - center) @ mat.T
            return amp * np.exp(-np.einsum("ij,ij->i", d, d))

        return GridFunction.from_callable(fn, extent or 4.0, cells or 257,
                                          center=center)
    if name == "two_bump":
        c = float(params.get("separation", 1.6))
        w2 = float(params.get("second_width", 1.8))
        a2 = float(params.get("second_amplitude", 0.7))
        g1 = gaussian(center=(-c, 0.0), inv_width=1.0)
        g2 = gaussian(center=(c, 0.4), inv_width=w2, amplitude=a2)

        def fn(pts):
            return g1(pts) + g2(pts)

        return GridFunction.from_callable(fn, extent or 6.0, cells or 257,
                                          center=np.zeros(2))
    if name in ("sobolev_extremal", "morrey_extremal", "gn_extremal",
                "logsob_extremal", "char"):
        kind = {"sobolev_extremal": "sobolev", "morrey_extremal": "morrey",
                "logsob_extremal": "logsob", "char": "char"}.get(name)
        if name == "gn_extremal":
            kind = "gn_i" if float(params["alpha"]) > 1 else "gn_ii"
        return extremal(
            kind,
            n,
            float(params.get("p", 2.0)),
            alpha=params.get("alpha"),
            a=float(params.get("a", 1.0)),
            matrix=params.get("matrix"),
            x0=params.get("x0"),
            sigma=float(params.get("sigma", 1.0)),
            r=float(params.get("r", 1.0)),
            extent=extent,
            cells=cells,
        )
    raise ConfigurationError(f"unknown catalog function {name!r}; choose from {CATALOG_NAMES}")


def parse_function(spec: dict):
    if spec.get("kind") != "catalog":
        raise ConfigurationError("function specs must have kind 'catalog'")
    return catalog_function(spec["name"], spec.get("params"), spec.get("grid"))


# ---------------------------------------------------------------------------
# scenario running

BODY_JOB_KINDS = ("petty_product", "busemann_petty")


def scenario_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _job_seed(global_seed: int, index: int) -> int:
    return (global_seed * 100_003 + index) % (2**31 - 1)


def run_job(job: dict, index: int, global_seed: int, tolerance_scale: float,
            provenance: str) -> dict:
    import time

    t0 = time.perf_counter()
    kind = job["kind"]
    seed = _job_seed(int(job.get("seed", global_seed)), index)
    grid = parse_sphere_grid(job["sphere_grid"])
    tol = job.get("tolerance")
    notes = []
    expected = job.get("expected")

    if kind in VERIFY_KINDS:
        f = parse_function(job["function"])
        report = verify(kind, f, float(job.get("lambda", 0.5)), grid,
                        params=job.get("params"), tolerance=tol,
                        tolerance_scale=tolerance_scale, seed=seed)
        value = report.deficit
    elif kind in BODY_JOB_KINDS:
        body = parse_body(job["body"])
        params = dict(job.get("params", {}))
        tol_val = tolerance_for(kind, tolerance_scale, tol)
        n = body.dimension
        if kind == "petty_product":
            prod = petty_product(body, grid)
            lhs, rhs = unit_ball_volume(n) ** n, prod * unit_ball_volume(n) ** n
            value = prod
        else:
            deficit = busemann_petty_deficit(
                body,
                float(params.get("lambda", 0.5)),
                float(params.get("p", 2.0)),
                grid,
                mc_samples=int(params.get("mc_samples", 200_000)),
                seed=seed,
            )
            vk = body_volume(body, grid)
            lhs, rhs = (1.0 + deficit) * vk, vk
            value = deficit
        deficit = lhs / rhs - 1.0
        report = VerificationReport(
            kind=kind, params=params, lhs=lhs, rhs=rhs, deficit=deficit,
            tolerance=tol_val, grid_meta=grid.config(), seed=seed,
            passed=bool(deficit >= -tol_val), wall_time=time.perf_counter() - t0,
            notes=notes,
        )
    else:
        raise ConfigurationError(f"unknown job kind {kind!r}")

    if expected is not None:
        ok = abs(value - float(expected)) <= report.tolerance
        report.notes.append(
            f"expected {expected:.6g}, got {value:.6g} "
            f"({'within' if ok else 'OUTSIDE'} tolerance)"
        )
        report.passed = bool(report.passed and ok)

    out = report.to_json_dict()
    out["id"] = job.get("id", f"job-{index}")
    out["scenario_hash"] = provenance
    return out


def run_scenario(scenario: dict, text: str, global_seed: int = 0, threads: int = 1,
                 tolerance_scale: float = 1.0) -> list[dict]:
    """Run all jobs; deterministic given (scenario, seed) whatever the thread count."""
    jobs = scenario.get("jobs")
    if not isinstance(jobs, list) or not jobs:
        raise ConfigurationError("scenario must contain a nonempty 'jobs' list")
    provenance = scenario_hash(text)

    def work(pair):
        idx, job = pair
        return run_job(job, idx, global_seed, tolerance_scale, provenance)

    if threads <= 1:
        return [work(p) for p in enumerate(jobs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, enumerate(jobs)))


def reports_to_json(reports: list[dict]) -> str:
    return json.dumps(reports, sort_keys=True, indent=2) + "\n"


CSV_COLUMNS = ("id", "kind", "lhs", "rhs", "deficit", "tolerance", "passed", "seed")


def reports_to_csv(reports: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS + ("params", "grid", "notes"))]
    for r in reports:
        cells = [str(r[c]) for c in CSV_COLUMNS]
        for extra in ("params", "grid", "notes"):
            cells.append('"' + json.dumps(r[extra], sort_keys=True).replace('"', '""') + '"')
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
