import math

import numpy as np
import pytest

from affine_energy.bodies import Ball, Ellipsoid, Polytope, centroid_body, membership
from affine_energy.errors import DomainError

from .util import random_polygon
from affine_energy.funcspace import BVCharacteristic, lp_norm
from affine_energy.inequalities import (
    affine_sobolev_deficit,
    centroid_stability_check,
    classical_logsob_constant,
    distance_to_extremals,
    extremal,
    logsob_deficit_bv,
    sharp_constant,
    stability_check,
    verify,
)
SQUARE = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]

# frozen from 40-digit evaluations of the Gamma formulas
S_3_2 = 0.42726054286252666
B_2_3 = 0.7108343324432404
G_I_2_2_15 = 0.5766251154228313
G_II_2_05_15 = 0.5263126446130597
DELTA_A_SQUARE = math.pi / (2 * math.sqrt(2)) - 1  # = 0.110720734539...


def test_sharp_constants_frozen_values():
    assert sharp_constant("sobolev", 3, 2.0) == pytest.approx(S_3_2, rel=1e-12)
    assert sharp_constant("morrey", 2, 3.0) == pytest.approx(B_2_3, rel=1e-12)
    assert sharp_constant("gn_i", 2, 1.5, alpha=2.0) == pytest.approx(
        G_I_2_2_15, rel=1e-12
    )
    assert sharp_constant("gn_ii", 2, 1.5, alpha=0.5) == pytest.approx(
        G_II_2_05_15, rel=1e-12
    )
    # p=2, n=2 log-Sobolev equals the classical Euclidean constant 2/(n pi e)
    assert sharp_constant("logsob", 2, 2.0) == pytest.approx(
        1.0 / (math.pi * math.e), abs=1e-12
    )
    assert sharp_constant("logsob", 2, 2.0) == pytest.approx(
        classical_logsob_constant(2), abs=1e-12
    )


def test_gn_theta_in_unit_interval():
    from affine_energy.inequalities import gn_theta

    rng = np.random.default_rng(9)
    for _ in range(200):
        n = int(rng.choice([2, 3]))
        p = float(rng.uniform(1.01, n - 0.01))
        hi = n / (n - p)
        alpha = float(rng.uniform(1.0 + 1e-6, min(hi - 1e-6, 8.0)))
        assert 0.0 < gn_theta("gn_i", n, p, alpha) < 1.0
        alpha = float(rng.uniform(1e-6, 1.0 - 1e-6))
        assert 0.0 < gn_theta("gn_ii", n, p, alpha) < 1.0


def test_sharp_constant_domain_errors():
    with pytest.raises(DomainError, match=r"p in \(1, n\)"):
        sharp_constant("sobolev", 2, 0.5)
    with pytest.raises(DomainError, match=r"p in \(1, n\)"):
        sharp_constant("sobolev", 2, 2.0)
    with pytest.raises(DomainError, match="p > n"):
        sharp_constant("morrey", 2, 1.5)
    with pytest.raises(DomainError, match="alpha"):
        sharp_constant("gn_i", 2, 1.5, alpha=5.0)
    with pytest.raises(DomainError, match="alpha"):
        sharp_constant("gn_ii", 2, 1.5, alpha=1.5)
    with pytest.raises(DomainError, match="p > 1"):
        sharp_constant("logsob", 2, 1.0)


def test_extremal_profiles():
    f = extremal("sobolev", 2, 1.5, a=1.3, cells=129, extent=20.0)
    # value at the center: (a + 0)^{1 - n/p}
    assert np.max(f.values) == pytest.approx(1.3 ** (1 - 2 / 1.5), rel=1e-6)
    g = extremal("logsob", 2, 2.0, cells=193)
    assert lp_norm(g, 2.0) == pytest.approx(1.0, rel=0.01)
    m = extremal("morrey", 2, 3.0, a=0.7, cells=193)
    assert np.max(m.values) == pytest.approx(0.7, rel=1e-12)


def test_extremal_char_member_norm_constraint(circle512):
    # a chi_{x0 + a r psi(B)} with ||g||_{n'} = |a| (|a| r)^{n/n'} omega_n^{1/n'}
    a, r = 1.4, 0.8
    psi = np.array([[1.2, 0.3], [0.0, 1.0 / 1.2]])
    psi /= math.sqrt(abs(np.linalg.det(psi)))
    g = extremal("char", 2, 2.0, a=a, r=r, matrix=psi)
    expected = a * math.sqrt(math.pi * (a * r) ** 2)
    assert g.lp_norm(2.0, circle512) == pytest.approx(expected, rel=1e-12)


def test_verify_equality_cases(circle512):
    cases = [
        ("logsob", 0.25, {"p": 2.0}, extremal("logsob", 2, 2.0, cells=193)),
        ("morrey", 0.0, {"p": 3.0}, extremal("morrey", 2, 3.0, cells=193)),
        ("gn_i", 0.5, {"p": 1.5, "alpha": 2.0},
         extremal("gn_i", 2, 1.5, alpha=2.0, cells=193)),
        ("gn_ii", 1.0, {"p": 1.5, "alpha": 0.5},
         extremal("gn_ii", 2, 1.5, alpha=0.5, cells=193)),
    ]
    for kind, lam, params, f in cases:
        rep = verify(kind, f, lam, circle512, params=params)
        assert rep.passed, (kind, rep.deficit)
        assert abs(rep.deficit) <= rep.tolerance


def test_verify_nonnegative_deficit_on_random_inputs(circle256):
    # every kind holds with deficit >= -tolerance on 50 seeded random inputs
    from .util import random_bumps

    kinds = [
        ("affine_sobolev_p", {"p": 1.5}),
        ("morrey", {"p": 3.0}),
        ("gn_i", {"p": 1.5, "alpha": 2.0}),
        ("gn_ii", {"p": 1.5, "alpha": 0.5}),
        ("logsob", {"p": 2.0}),
        ("affine_sobolev_bv", {}),
    ]
    rng = np.random.default_rng(4242)
    for kind, params in kinds:
        worst = math.inf
        for _ in range(50):
            if kind == "affine_sobolev_bv":
                f = BVCharacteristic(float(rng.uniform(0.5, 2.0)), random_polygon(rng))
            else:
                # 97^2 keeps the entropy path inside the tolerance budget
                f = random_bumps(rng, cells=97)
            lam = float(rng.uniform(0.0, 1.0))
            rep = verify(kind, f, lam, circle256, params=params)
            worst = min(worst, rep.deficit + rep.tolerance)
        assert worst >= 0.0, (kind, worst)


def test_verify_strict_deficit_on_asymmetric(circle512):
    from affine_energy.specs import catalog_function

    f = catalog_function("two_bump", {}, {"extent": 6.0, "cells": 129})
    rep = verify("gn_i", f, 0.5, circle512, params={"p": 1.5, "alpha": 2.0})
    assert rep.deficit > 0.01


def test_verify_bv_kinds(circle512):
    chi = BVCharacteristic(1.0, Ellipsoid(np.array([[1.5, 0.4], [0.0, 0.7]])))
    rep = verify("affine_sobolev_bv", chi, 0.5, circle512)
    assert abs(rep.deficit) <= 0.015 and rep.passed
    sq = BVCharacteristic(1.0, Polytope(SQUARE))
    rep = verify("affine_sobolev_bv", sq, 0.5, circle512)
    assert rep.deficit == pytest.approx(DELTA_A_SQUARE, abs=2e-3)


def test_gn_ii_report_flags_substitution(circle512):
    f = extremal("gn_ii", 2, 1.5, alpha=0.5, cells=129)
    rep = verify("gn_ii", f, 0.5, circle512, params={"p": 1.5, "alpha": 0.5})
    assert any("z" in note for note in rep.notes)


def test_affine_sobolev_deficit_cases(circle512):
    assert affine_sobolev_deficit(
        BVCharacteristic(1.0, Ball(1.0, 2)), circle512
    ) == pytest.approx(0.0, abs=0.01)
    val = affine_sobolev_deficit(BVCharacteristic(2.0, Polytope(SQUARE)), circle512)
    assert val == pytest.approx(DELTA_A_SQUARE, abs=2e-3)
    # zero function convention
    from affine_energy.funcspace import GridFunction

    zero = GridFunction(0.1, np.zeros(2), np.zeros((16, 16)))
    assert affine_sobolev_deficit(zero, circle512) == 0.0


def test_affine_sobolev_deficit_grid_resolution_stability(circle512):
    vals = []
    for cells in (192, 256):
        f = BVCharacteristic(1.0, Polytope(SQUARE)).to_grid(1.6, cells, subsamples=4)
        vals.append(affine_sobolev_deficit(f, circle512))
    assert vals[0] > 0 and vals[1] > 0
    assert abs(vals[0] - vals[1]) <= 0.02


def test_affine_invariance_of_deficit(circle512):
    rng = np.random.default_rng(0)
    sq = np.asarray(SQUARE)
    for _ in range(3):
        a = rng.normal(size=(2, 2)) * 0.4 + np.eye(2)
        d1 = affine_sobolev_deficit(BVCharacteristic(1.0, Polytope(sq)), circle512)
        d2 = affine_sobolev_deficit(
            BVCharacteristic(1.0, Polytope(sq @ a.T)), circle512
        )
        assert d2 == pytest.approx(d1, rel=0.02)


def test_distance_to_extremals_member_is_floor():
    chi = BVCharacteristic(1.0, Ellipsoid(np.array([[1.2, 0.2], [0.0, 0.9]])))
    f = chi.to_grid(2.5, 192)
    assert distance_to_extremals(f, restarts=3, seed=0) <= 0.05


def test_distance_to_extremals_square_positive():
    f = BVCharacteristic(1.0, Polytope(SQUARE)).to_grid(1.6, 192, subsamples=4)
    val = distance_to_extremals(f, restarts=4, seed=0)
    assert val > 0.06


def test_distance_to_extremals_zero_function():
    from affine_energy.funcspace import GridFunction

    zero = GridFunction(0.1, np.zeros(2), np.zeros((16, 16)))
    assert distance_to_extremals(zero) == 0.0


def test_stability_check_affine_agreement(circle512):
    base = Ellipsoid(np.diag([1.3, 0.8]) * 1.1)
    a = np.array([[1.1, 0.35], [0.0, 1.0 / 1.1]])
    a /= math.sqrt(abs(np.linalg.det(a)))
    mapped = Ellipsoid(a @ base.matrix)
    recs = [
        stability_check(BVCharacteristic(1.0, body).to_grid(2.6, 192, subsamples=4),
                        circle512, restarts=3, seed=0)
        for body in (base, mapped)
    ]
    assert recs[0].delta_a == pytest.approx(recs[1].delta_a, abs=0.03)
    assert recs[0].d_a_upper == pytest.approx(recs[1].d_a_upper, abs=0.03)


def test_centroid_stability_check(circle512):
    rec = centroid_stability_check(Ball(1.0, 2), circle512, restarts=3)
    assert rec.bp_deficit <= 0.01 and rec.bm_distance_upper <= 0.01
    ell = Ellipsoid(np.diag([2.0, 0.5]))
    rec = centroid_stability_check(ell, circle512, restarts=3)
    assert rec.bp_deficit <= 0.015 and rec.bm_distance_upper <= 0.02
    sq = Polytope(SQUARE)
    rec = centroid_stability_check(sq, circle512, restarts=6)
    assert rec.bp_deficit > 0.02
    assert rec.bm_distance_upper == pytest.approx(math.log(math.sqrt(2)), rel=0.05)


def test_centroid_stability_square_mc_oracle(circle512):
    # cross-check the exact sweep path for the p=1 moment body of the square
    # with a plain Monte Carlo moment estimate
    sq = Polytope(SQUARE)
    gb = centroid_body(sq, 0.5, 1.0, circle512)
    rng = np.random.default_rng(123)
    pts = rng.uniform(-1.0, 1.0, size=(400_000, 2))
    dirs = circle512.directions[:16]
    mc = 4.0 * np.abs(pts @ dirs.T).mean(axis=0) / 2.0  # (1/2)|<u,y>| moments
    from affine_energy.bodies import centroid_normalization

    mc_h = mc / (centroid_normalization(2, 1.0) * 4.0)
    assert np.allclose(gb.values[:16], mc_h, rtol=0.02)


def test_logsob_deficit_bv(circle512):
    ball = BVCharacteristic(1.0, Ball(1.0, 2))
    rec = logsob_deficit_bv(ball, circle512)
    assert rec.delta_als >= rec.delta_a - 1e-9
    assert abs(rec.delta_als - rec.delta_a) <= 1e-12  # single amplitude: equality
    assert rec.delta_als >= -0.01
    sq = BVCharacteristic(1.0, Polytope(SQUARE))
    rec = logsob_deficit_bv(sq, circle512)
    assert rec.delta_als >= rec.delta_a > 0.05


def test_logsob_deficit_two_valued_strict(circle512):
    # f = chi_A + 2 chi_B with separated carriers: strict Jensen gap
    a = Ball(0.8, 2)
    b = Ball(0.5, 2)

    def fn(pts):
        left = membership(a, pts - np.array([-1.5, 0.0])).astype(float)
        right = membership(b, pts - np.array([1.5, 0.0])).astype(float)
        return left + 2.0 * right

    from affine_energy.funcspace import GridFunction

    f = GridFunction.from_callable(fn, 3.2, 384)
    rec = logsob_deficit_bv(f, circle512)
    assert rec.delta_als > rec.delta_a + 0.01


def test_verify_unknown_kind(circle256):
    with pytest.raises(DomainError):
        verify("isoperimetric", BVCharacteristic(1.0, Ball(1.0, 2)), 0.5, circle256)
