import math

import numpy as np
import pytest

from affine_energy.bodies import (
    Ball,
    Ellipsoid,
    Polytope,
    centroid_body,
    centroid_normalization,
)
from affine_energy.energy import (
    EnergyContext,
    affine_energy,
    affine_energy_forms,
    body_norm,
    bv_energy,
    bv_energy_value,
    bv_norm,
    bv_symmetrization_identity,
    crucial_bound_gap,
    energy_body,
    energy_constant,
    energy_identity_check,
    energy_profile,
    polya_szego_gap,
)
from affine_energy.errors import DegenerateInputError, DomainError
from affine_energy.funcspace import (
    BVCharacteristic,
    GridFunction,
    sobolev_grad_norm,
)
from affine_energy.specs import catalog_function

from .util import random_bumps

SQUARE = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]


def gauss(extent=4.0, cells=193, matrix=None):
    params = {"n": 2}
    if matrix is not None:
        params["matrix"] = matrix
    return catalog_function("gaussian", params, {"extent": extent, "cells": cells})


def test_energy_constant_values():
    # closed forms: c_{2,2} = sqrt(8 pi), c_{2,1} = pi sqrt(2 pi)
    assert energy_constant(2, 2.0) == pytest.approx(math.sqrt(8 * math.pi), rel=1e-14)
    assert energy_constant(2, 1.0) == pytest.approx(
        math.pi * math.sqrt(2 * math.pi), rel=1e-14
    )


def test_context_validation(circle256):
    f = gauss(cells=65)
    with pytest.raises(DomainError):
        EnergyContext(-0.1, 2.0, circle256, f)
    with pytest.raises(DomainError):
        EnergyContext(0.5, 1.0, circle256, f)
    with pytest.raises(DegenerateInputError):
        EnergyContext(0.5, 2.0, circle256, f.with_values(np.zeros_like(f.values)))


def test_body_norm_properties(circle256):
    f = gauss(cells=129)
    ctx = EnergyContext(0.3, 2.0, circle256, f)
    rng = np.random.default_rng(0)
    # rotational symmetry for a radial source
    vals = [body_norm(ctx, [math.cos(t), math.sin(t)]) for t in rng.uniform(0, 7, 6)]
    assert np.ptp(vals) <= 0.01 * vals[0]
    # lambda reflection is exact: ||x||_{lam} = ||-x||_{1-lam}
    ctx2 = EnergyContext(0.7, 2.0, circle256, f)
    for _ in range(5):
        x = rng.normal(size=2)
        assert body_norm(ctx, x) == pytest.approx(body_norm(ctx2, -x), rel=1e-14)
    # Lipschitz bound by the gradient norm
    gn = sobolev_grad_norm(f, 2.0)
    for _ in range(5):
        x = rng.normal(size=2)
        assert body_norm(ctx, x) <= gn * np.linalg.norm(x) * (1 + 1e-12)


def test_energy_forms_agree(circle512):
    rng = np.random.default_rng(1)
    f = random_bumps(rng, cells=97)
    ctx = EnergyContext(0.25, 1.7, circle512, f)
    direct, via_volume = affine_energy_forms(ctx)
    assert abs(direct - via_volume) <= 1e-10 * via_volume


def test_normalization_on_radial(circle512):
    f = gauss(cells=193)
    for p in (1.5, 2.0, 3.0):
        ctx = EnergyContext(0.0, p, circle512, f)
        assert affine_energy(ctx) == pytest.approx(sobolev_grad_norm(f, p), rel=0.02)


def test_minkowski_comparison_chain(circle512):
    # grad f* norm = E(f*) <= E(f) <= grad f norm
    rng = np.random.default_rng(2)
    for _ in range(5):
        f = random_bumps(rng, cells=129)
        ctx = EnergyContext(0.5, 2.0, circle512, f)
        e = affine_energy(ctx)
        assert e <= sobolev_grad_norm(f, 2.0) * (1 + 1e-9)
        gap = polya_szego_gap(ctx)
        assert gap.energy >= gap.rearranged_energy * (1 - 0.02)


def test_lambda_structure(circle512):
    f = catalog_function("two_bump", {}, {"extent": 6.0, "cells": 129})
    ctx = EnergyContext(0.0, 1.7, circle512, f)
    lams = [0.0, 0.25, 0.5, 0.75, 1.0]
    e = energy_profile(ctx, lams)
    assert abs(e[1] - e[3]) <= 1e-10 * e[1]
    assert abs(e[0] - e[4]) <= 1e-10 * e[0]
    assert e[0] <= e[2] + 1e-9 and e[1] <= e[2] + 1e-9
    assert e[1] >= 0.5 * (e[0] + e[2]) - 1e-9  # midpoint concavity


def test_polya_szego_gap_cases(circle512):
    f = gauss(cells=193)
    g = polya_szego_gap(EnergyContext(0.5, 2.0, circle512, f))
    assert abs(g.gap) <= 0.01 * g.rearranged_energy
    assert g.critical_set_measure == 0.0  # strictly decreasing profile
    two = catalog_function("two_bump", {}, {"extent": 6.0, "cells": 193})
    g = polya_szego_gap(EnergyContext(0.5, 2.0, circle512, two))
    assert g.gap > 0.05 * g.rearranged_energy


def test_critical_measure_reports_plateau():
    from affine_energy.energy import rearrangement_critical_measure
    from affine_energy.funcspace import symmetric_rearrangement

    def plateau(pts):
        r = np.linalg.norm(pts, axis=1)
        return np.clip(2.0 - r, 0.0, 1.0)  # flat at height 1 inside r <= 1

    f = GridFunction.from_callable(plateau, 3.0, 257)
    fstar = symmetric_rearrangement(f)
    # the rearranged plateau sits at the top of the range, so only interior
    # flat levels count; rebuild with a mid-range shelf instead
    def shelf(pts):
        r = np.linalg.norm(pts, axis=1)
        return np.where(r < 0.8, 1.0, np.clip(1.6 - r, 0.0, 0.5) + np.clip(1.0 - r, 0, 0.5))

    g = GridFunction.from_callable(shelf, 3.0, 257)
    gstar = symmetric_rearrangement(g)
    assert rearrangement_critical_measure(gstar) > 0.1
    assert rearrangement_critical_measure(fstar) >= 0.0


def test_energy_identity(circle512):
    rng = np.random.default_rng(3)
    f = random_bumps(rng, cells=97)
    for lam, p in ((0.3, 2.0), (0.0, 1.5)):
        chk = energy_identity_check(EnergyContext(lam, p, circle512, f))
        assert chk.rel_diff <= 1e-10  # discrete Fubini, exact to roundoff
    # scaling consistency: both sides scale together
    f2 = f.with_values(1.9 * f.values)
    a = energy_identity_check(EnergyContext(0.3, 2.0, circle512, f))
    b = energy_identity_check(EnergyContext(0.3, 2.0, circle512, f2))
    assert b.lhs / a.lhs == pytest.approx(b.rhs / a.rhs, rel=1e-10)


def test_moment_body_relation(circle512):
    # support of the companion equals ((n+p) alpha V(B))^{1/p} times the
    # support of the moment body of B, the moment body taken by sampling
    f = gauss(cells=129, matrix=[[1.0, 0.4], [0.0, 0.8]])
    n = 2
    for lam, p in ((0.3, 2.0), (0.5, 1.5)):
        ctx = EnergyContext(lam, p, circle512, f)
        eb = energy_body(ctx)
        gb = centroid_body(eb.star_body(), lam, p, circle512,
                           mc_samples=200_000, seed=3)
        pref = ((n + p) * centroid_normalization(n, p) * eb.volume) ** (1.0 / p)
        rel = np.max(np.abs(eb.companion_values - pref * gb.values))
        assert rel / eb.companion_values.max() <= 0.02


def test_crucial_bound(circle512):
    f = gauss(cells=193)
    ctx = EnergyContext(0.5, 2.0, circle512, f)
    e = affine_energy(ctx)
    assert abs(crucial_bound_gap(ctx)) <= 0.02 * e  # radial: ball case
    # unimodular image of a radial function: the norm body is an ellipsoid,
    # so the bound is attained (within quadrature budget)
    shear = np.array([[1.2, 0.5], [0.0, 1.0 / 1.2]])
    sheared = gauss(cells=193, matrix=(shear / math.sqrt(abs(np.linalg.det(shear)))).tolist())
    ctx = EnergyContext(0.5, 2.0, circle512, sheared)
    assert abs(crucial_bound_gap(ctx)) <= 0.03 * affine_energy(ctx)
    two = catalog_function("two_bump", {}, {"extent": 6.0, "cells": 193})
    ctx = EnergyContext(0.5, 2.0, circle512, two)
    assert crucial_bound_gap(ctx) > 0


def test_radial_source_gives_round_body(circle512):
    ctx = EnergyContext(0.25, 2.0, circle512, gauss(cells=129))
    eb = energy_body(ctx)
    rho = 1.0 / eb.norms
    assert np.ptp(rho) <= 0.01 * rho.mean()


def test_sl_covariance_of_norm_body(circle512):
    # composing with A in SL_2 maps the norm body by A^{-T} (change of
    # variables oracle on the defining integral): check via the energy value
    a = np.array([[1.25, 0.45], [0.2, 0.872]])
    a /= math.sqrt(abs(np.linalg.det(a)))
    f = gauss(cells=257, extent=6.0)
    fa = catalog_function(
        "gaussian", {"n": 2, "matrix": (np.eye(2) @ a).tolist()},
        {"extent": 6.0, "cells": 257},
    )
    e1 = affine_energy(EnergyContext(0.3, 2.0, circle512, f))
    e2 = affine_energy(EnergyContext(0.3, 2.0, circle512, fa))
    assert e2 == pytest.approx(e1, rel=0.03)


def test_norm_transform_under_composition(circle256):
    # ||x||_{p,lam,f o A} = ||A x||_{p,lam,f} up to re-gridding: the norm body
    # of the composition is the A-preimage of the original body (equivalently
    # its support composes with the inverse transpose)
    amat = np.array([[1.15, 0.4], [0.1, 0.93]])
    amat /= math.sqrt(abs(np.linalg.det(amat)))
    f = gauss(cells=257, extent=6.0, matrix=[[1.0, 0.3], [0.0, 0.9]])
    fa = catalog_function(
        "gaussian", {"n": 2, "matrix": (np.array([[1.0, 0.3], [0.0, 0.9]]) @ amat).tolist()},
        {"extent": 6.0, "cells": 257},
    )
    ctx = EnergyContext(0.3, 2.0, circle256, f)
    ctx_a = EnergyContext(0.3, 2.0, circle256, fa)
    rng = np.random.default_rng(17)
    for _ in range(8):
        u = rng.normal(size=2)
        assert body_norm(ctx_a, u) == pytest.approx(
            body_norm(ctx, amat @ u), rel=0.02
        )


def test_sign_splitting_identity(circle256):
    # ||u||_{p,lam,f}^p = ||u||_{p,lam,f+}^p + ||u||_{p,1-lam,f-}^p; exact at
    # cell level when the two parts have separated supports (the discrete
    # gradient mixes the parts across a shared interface otherwise)
    def fn(pts):
        d1 = pts - np.array([-2.0, 0.0])
        d2 = pts - np.array([2.0, 0.3])
        g1 = np.maximum(np.exp(-3 * np.einsum("ij,ij->i", d1, d1)) - 0.01, 0.0)
        g2 = np.maximum(np.exp(-3 * np.einsum("ij,ij->i", d2, d2)) - 0.01, 0.0)
        return g1 - 0.8 * g2

    base = GridFunction.from_callable(fn, 5.0, 129)
    vals = base.values
    f = base
    fp = base.with_values(np.maximum(vals, 0.0))
    fm = base.with_values(np.maximum(-vals, 0.0))
    lam, p = 0.3, 1.8
    ctx = EnergyContext(lam, p, circle256, f)
    ctxp = EnergyContext(lam, p, circle256, fp)
    ctxm = EnergyContext(1 - lam, p, circle256, fm)
    rng2 = np.random.default_rng(5)
    for _ in range(20):
        u = rng2.normal(size=2)
        lhs = body_norm(ctx, u) ** p
        rhs = body_norm(ctxp, u) ** p + body_norm(ctxm, u) ** p
        assert lhs == pytest.approx(rhs, rel=1e-10)


# -- total-variation layer -----------------------------------------------------


def test_bv_energy_ball_characteristic(circle512):
    for r in (1.0, 2.0):
        chi = BVCharacteristic(1.0, Ball(r, 2))
        assert bv_energy_value(chi, circle512) == pytest.approx(
            2 * math.pi * r, rel=0.01
        )


def test_bv_norm_even(circle512):
    chi = BVCharacteristic(1.5, Polytope(SQUARE))
    rng = np.random.default_rng(6)
    for _ in range(5):
        x = rng.normal(size=2)
        assert bv_norm(chi, x, circle512) == pytest.approx(
            bv_norm(chi, -x, circle512), rel=1e-12
        )


def test_bv_energy_report_identities(circle512):
    ball = Ball(1.0, 2)
    for carrier in (ball, Ellipsoid(np.array([[2.0, 0.3], [0.0, 0.6]])),
                    Polytope(SQUARE)):
        rep = bv_energy(BVCharacteristic(1.0, carrier), circle512,
                        symmetrization_body=ball)
        assert rep.moment_body_relation_rel <= 0.02
        assert rep.energy_identity.rel_diff <= 1e-10
        assert rep.crucial_gap >= -2e-3 * rep.e1
        assert rep.symmetrization_identity.rel_diff <= 1e-3
    # equality case of the crucial bound at the ball
    rep = bv_energy(BVCharacteristic(1.0, ball), circle512)
    assert abs(rep.crucial_gap) <= 1e-3 * rep.e1


def test_bv_energy_grid_proxy_matches_exact(circle512):
    # smooth grid function against nothing exact, but the chain must hold
    f = gauss(cells=193)
    rep = bv_energy(f, circle512)
    assert rep.energy_identity.rel_diff <= 1e-10
    assert rep.crucial_gap >= -2e-3 * rep.e1


def test_bv_symmetrization_identity_square_body(circle512):
    # origin-symmetric polytope of volume omega_n
    scale = math.sqrt(math.pi) / 2.0
    body = Polytope(np.array(SQUARE) * scale)
    assert body.exact_volume() == pytest.approx(math.pi, rel=1e-12)
    chi = BVCharacteristic(1.0, Ellipsoid(np.diag([1.4, 0.9])))
    chk = bv_symmetrization_identity(chi, body, circle512)
    assert chk.rel_diff <= 1e-3
    # for a symmetric body the two direction conventions coincide
    assert bv_symmetrization_identity(chi, body, circle512,
                                      outward=False).rel_diff <= 1e-3
    with pytest.raises(DomainError):
        bv_symmetrization_identity(chi, Polytope(SQUARE), circle512)  # wrong volume


def test_bv_symmetrization_identity_nonsymmetric_body(circle512):
    # the outward-direction convention extends the identity to bodies without
    # central symmetry; the gradient-direction convention does not
    tri = np.array([[1.8, -0.6], [-1.0, 1.5], [-0.8, -0.9]])
    tri -= tri.mean(axis=0)
    body = Polytope(tri)
    body = Polytope(tri * math.sqrt(math.pi / body.exact_volume()))
    chi = BVCharacteristic(1.0, Ellipsoid(np.diag([1.4, 0.9])))
    assert bv_symmetrization_identity(chi, body, circle512,
                                      outward=True).rel_diff <= 1e-3
    assert bv_symmetrization_identity(chi, body, circle512,
                                      outward=False).rel_diff > 0.1


def test_bv_affine_sobolev_equality_for_ellipses(circle512):
    chi = BVCharacteristic(1.0, Ellipsoid(np.array([[1.3, 0.5], [0.0, 0.77]])))
    e1 = bv_energy_value(chi, circle512)
    n = 2
    rhs = n * math.sqrt(math.pi) * chi.lp_norm(2.0, circle512)
    assert e1 == pytest.approx(rhs, rel=0.015)


def test_bv_degenerate_input(circle256):
    f = GridFunction(0.1, np.zeros(2), np.zeros((16, 16)))
    with pytest.raises(DegenerateInputError):
        bv_energy_value(f, circle256)
