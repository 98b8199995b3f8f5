"""Profile family: closed-form oracles, half-widths, reapers, bowl."""

from __future__ import annotations

import math

import numpy as np
import pytest

from stripsoliton import (
    Alpha,
    DomainError,
    grim_reaper,
    halfwidth,
    integrate_bowl,
    integrate_profile,
    profile_covering,
    reaper_domain_halfwidth,
    reaper_eval,
)

from conftest import CLOSED_FORMS, rk4_fixed

# Frozen independent-oracle values (adaptive quadrature at 30 digits,
# cross-checked against a 10^6-point midpoint Riemann sum).
D_HALF = 1.1981402347355922
D_THREE_HALVES = 2.6220575542921192
REAPER_HW_05_QPI4 = 1.4248368919185966


def make_alpha(a):
    return Alpha(a, oracle_mode=True) if a == 0.0 else Alpha(a)


@pytest.mark.parametrize("a", [1.0, 2.0, 3.0, 0.0])
def test_profile_matches_closed_form(a):
    exact, d = CLOSED_FORMS[a]
    prof = integrate_profile(make_alpha(a))
    lim = 2.0 if math.isinf(d) else 0.9 * d
    ys = np.linspace(-lim, lim, 801)
    err = np.max(np.abs(prof.z(ys) - exact(ys)))
    assert err <= 1e-8


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
def test_profile_invariants(a):
    prof = integrate_profile(make_alpha(a))
    p0 = prof.points[0]
    assert (p0.s, p0.y, p0.z, p0.phi) == (0.0, 0.0, 0.0, 0.0)
    phis = np.array([p.phi for p in prof.points])
    assert np.all(np.diff(phis) > 0)
    assert np.all(np.abs(phis) < math.pi / 2.0)
    ys = np.array([p.y for p in prof.points])
    zs = np.array([p.z for p in prof.points])
    assert np.all(np.diff(ys) > 0)
    assert np.all(zs[1:] > zs[:-1] - 1e-15)
    # convexity: slope strictly increasing across the covered range
    q = np.linspace(0.0, prof.y_max, 200)
    assert np.all(np.diff(prof.dz(q)) > 0)


def test_profile_symmetry_is_exact():
    prof = integrate_profile(1.0)
    ys = np.linspace(0.0, prof.y_max, 57)
    assert np.array_equal(prof.z(ys), prof.z(-ys))
    assert np.array_equal(prof.dz(ys), -prof.dz(-ys))


def test_graph_residual_identity_small():
    for a in (0.5, 1.0, 1.7, 3.0):
        prof = integrate_profile(make_alpha(a), tol=1e-11)
        q = np.linspace(-0.95 * prof.y_max, 0.95 * prof.y_max, 301)
        assert np.max(np.abs(prof.graph_residual(q))) < 10.0 * prof.tolerance


def test_profile_rejects_beyond_range_without_tail():
    prof = integrate_profile(1.0)
    with pytest.raises(DomainError):
        prof.z(prof.y_max * 1.01)


def test_tail_extrapolation_is_a_lower_bound():
    prof = integrate_profile(1.0)
    ys = np.linspace(prof.y_max * 1.0001, 1.55, 50)
    tail = prof.z(ys, tail=True)
    exact = -np.log(np.cos(ys))
    assert np.all(tail <= exact + 1e-12)


def test_truncation_notice_for_extreme_phi_stop():
    prof = integrate_profile(3.0, phi_stop=math.pi / 2.0 - 1e-12)
    assert prof.truncated
    assert prof.notice is not None and "truncated at phi" in prof.notice
    assert prof.phi_max < math.pi / 2.0 - 1e-12
    # still usable on its covered range
    assert prof.z(0.5 * prof.y_max) > 0.0


def test_profile_covering_extends_range():
    prof = profile_covering(1.0, 1.5)
    assert prof.y_max >= 1.5


def test_alpha_validation():
    with pytest.raises(ValueError):
        Alpha(0.0)
    with pytest.raises(ValueError):
        Alpha(-1.0)
    assert Alpha(0.0, oracle_mode=True).value == 0.0


def test_halfwidth_values():
    assert abs(halfwidth(1.0) - math.pi / 2.0) <= 1e-10
    assert abs(halfwidth(Alpha(0.0, oracle_mode=True)) - 1.0) <= 1e-10
    assert abs(halfwidth(0.5) - D_HALF) <= 1e-10
    assert abs(halfwidth(1.5) - D_THREE_HALVES) <= 1e-10
    assert math.isinf(halfwidth(2.0))
    assert math.isinf(halfwidth(3.0))


def test_halfwidth_strictly_increasing():
    alphas = np.linspace(0.1, 1.9, 50)
    ds = [halfwidth(float(a)) for a in alphas]
    assert all(b > a for a, b in zip(ds, ds[1:]))


def test_reaper_eval_examples():
    base1 = integrate_profile(1.0)
    g0 = grim_reaper(1.0, theta=0.0, a=0.0, base=base1)
    assert reaper_eval(g0, 0.0, 0.0) == 0.0

    g45 = grim_reaper(1.0, theta=math.pi / 4.0, a=0.0, base=base1)
    assert abs(reaper_eval(g45, 1.0, 0.0) - 1.0) <= 1e-14
    # closed form: 2 * (-log cos(0.5/sqrt 2)) + x at y = 0.5
    want = -2.0 * math.log(math.cos(0.5 / math.sqrt(2.0)))
    for x in (0.0, 1.0, -2.5):
        assert abs(reaper_eval(g45, x, 0.5) - (want + x)) <= 1e-9


def test_reaper_untilted_reproduces_base():
    prof = integrate_profile(1.3)
    g = grim_reaper(1.3, base=prof)
    ys = np.linspace(-0.9 * prof.y_max, 0.9 * prof.y_max, 101)
    assert np.max(np.abs(g(np.zeros_like(ys), ys) - prof.z(ys))) == 0.0


def test_reaper_domain_halfwidth():
    assert abs(reaper_domain_halfwidth(1.0, 0.0) - math.pi / 2.0) <= 1e-12
    assert abs(reaper_domain_halfwidth(1.0, math.pi / 3.0) - math.pi) <= 1e-10
    assert abs(reaper_domain_halfwidth(0.5, math.pi / 4.0) - REAPER_HW_05_QPI4) <= 1e-10
    assert math.isinf(reaper_domain_halfwidth(2.0, 0.3))
    # monotone nondecreasing in |theta|
    thetas = np.linspace(0.0, 1.4, 29)
    hws = [reaper_domain_halfwidth(0.8, float(t)) for t in thetas]
    assert all(b >= a for a, b in zip(hws, hws[1:]))


def test_reaper_out_of_domain_names_halfwidth():
    g = grim_reaper(1.0)
    hw = g.domain_halfwidth
    with pytest.raises(DomainError) as err:
        g(0.0, hw * 1.01, tail=True)
    assert f"{hw:.12g}" in str(err.value)


def test_family_pde_residual(rng):
    for a in (0.5, 1.0, 1.5, 2.0, 3.0):
        base = integrate_profile(make_alpha(a))
        for _ in range(4):
            theta = float(rng.uniform(-1.2, 1.2))
            g = grim_reaper(make_alpha(a), theta=theta, a=float(rng.normal()), base=base)
            c = math.cos(theta)
            ylim = 0.9 * base.y_max / c ** a
            xs = rng.uniform(-3.0, 3.0, size=40)
            ys = rng.uniform(-ylim, ylim, size=40)
            res = g.pde_residual(xs, ys)
            assert np.max(np.abs(res)) <= 1e-6


def test_bowl_normalization_and_convexity():
    prof = integrate_bowl(1.0, 3.0)
    assert prof.b(0.0) == 0.0
    assert prof.db(0.0) == 0.0
    assert prof.b_min == 0.0
    # b''(0) = 1/2 by symmetry of the radial equation
    h = 1e-4
    assert abs(prof.db(h) / h - 0.5) <= 1e-6
    rs = np.linspace(0.0, 3.0, 400)
    assert np.all(np.diff(prof.db(rs)) > 0)
    assert np.all(prof.db(rs[1:]) > 0)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_bowl_seed_coefficient(a):
    prof = integrate_bowl(a, 1.0)
    assert abs(prof.c4 - (2.0 - a) / 128.0) <= 1e-4


def test_bowl_matches_fixed_step_rk4_oracle():
    prof = integrate_bowl(1.0, 2.0, tol=1e-12)
    r0 = 1e-3
    c4 = (2.0 - 1.0) / 128.0

    def rhs(r, state):
        p = state[1]
        w2 = 1.0 + p * p
        return np.array([p, w2 - (p / r) * w2])

    seed = np.array([r0 * r0 / 4.0 + c4 * r0 ** 4, r0 / 2.0 + 4.0 * c4 * r0 ** 3])
    oracle = rk4_fixed(rhs, r0, 2.0, seed, steps=int((2.0 - r0) / 1e-5))
    assert abs(prof.b(2.0) - oracle[0]) <= 1e-9


def test_bowl_equation_residual_small():
    prof = integrate_bowl(0.7, 2.0)
    rs = np.linspace(0.01, 1.95, 97)
    assert np.max(np.abs(prof.equation_residual(rs))) <= 1e-7


def test_profile_csv_roundtrip(tmp_path):
    prof = integrate_profile(1.0)
    path = tmp_path / "profile.csv"
    prof.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "s,y,z,phi"
    assert len(lines) == len(prof.points) + 1
    last = [float(v) for v in lines[-1].split(",")]
    assert last[3] == prof.points[-1].phi  # 17 significant digits round-trip


def test_bowl_csv(tmp_path):
    prof = integrate_bowl(1.0, 1.0)
    path = tmp_path / "bowl.csv"
    prof.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "r,b,bp"
    assert len(lines) == prof.samples.shape[0] + 1
