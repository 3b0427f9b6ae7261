import math

import mpmath as mp
import numpy as np
import pytest

from isosobolev.bliss import (FAMILIES, BracketResult, bracket_optimal_constant, compute_B_tilde,
                              family_members, measures_for_hardy, measures_for_sobolev)
from isosobolev.bliss import test_inequality as run_inequality
from isosobolev.constants import compute_B1, compute_B2
from isosobolev.errors import DomainError
from isosobolev.profile import (euclidean, euclidean_geometry, paraboloid, product, product_model,
                                profile_from_geometry)
from isosobolev.quad import WeightedMeasure
from isosobolev.rearrange import PiecewiseFunction
from isosobolev.specfn import k_qp, sobolev_best_constant, unit_ball_volume

mp.mp.dps = 30


def _cn(N):
    return N * unit_ball_volume(N) ** (1 / N)


def test_sobolev_measures_euclidean():
    N, p = 3, 2.0
    nu, mu, q = measures_for_sobolev(euclidean(N), p=p)
    assert q == 6.0
    y = np.geomspace(1e-4, 1e4, 9)
    expected = _cn(N) ** (-p / (p - 1)) * y ** (-(N - 1) * p / (N * (p - 1)))
    assert np.allclose(nu.density(y), expected, rtol=1e-13)
    assert np.allclose(mu.density(y), 1.0, rtol=1e-13)


def test_sobolev_mu_density_product_bounded():
    _, mu, _ = measures_for_sobolev(product(1, 3, 1.5, 0.7), p=2.0)
    x = np.geomspace(1e-8, 1e8, 200)
    d = mu.density(x)
    assert np.all(d <= 1.0 + 1e-14) and d[0] == pytest.approx(1.0) and d[-1] < 1e-3


def test_hardy_measures_euclidean():
    N, p = 3, 2.0
    _, mu, q = measures_for_hardy(euclidean(N), euclidean_geometry(N), p)
    assert q == p
    x = np.geomspace(1e-6, 1e6, 13)
    assert np.allclose(mu.density(x), (x / unit_ball_volume(N)) ** (-p / N), rtol=1e-12)
    assert mu.singularity_exponent == pytest.approx(-p / N)


@pytest.mark.parametrize("pr,p", [(euclidean(3), 2.0), (euclidean(4), 3.0), (product(1, 3), 2.0),
                                  (product(2, 3, 2.0, 0.5), 1.5), (paraboloid(4, 0.8), 2.0)],
                         ids=lambda x: getattr(x, "name", str(x)))
def test_b_tilde_equals_b1(pr, p):
    nu, mu, q = measures_for_sobolev(pr, p=p)
    assert compute_B_tilde(nu, mu, p, q)[0] == pytest.approx(compute_B1(pr, p=p)[0], rel=1e-8)


@pytest.mark.parametrize("geom,p", [(euclidean_geometry(3), 2.0), (euclidean_geometry(5), 3.0),
                                    (product_model(1, 3, 2 * math.pi), 2.0)],
                         ids=lambda x: getattr(x, "name", str(x)))
def test_b_tilde_equals_b2(geom, p):
    pr = profile_from_geometry(geom)
    nu, mu, q = measures_for_hardy(pr, geom, p)
    assert compute_B_tilde(nu, mu, p, q)[0] == pytest.approx(compute_B2(pr, geom, p)[0], rel=1e-8)


def test_b_tilde_zero_measure():
    _, mu, q = measures_for_sobolev(euclidean(3), p=2.0)
    assert compute_B_tilde(WeightedMeasure.zero(), mu, 2.0, q)[0] == 0.0


def test_inequality_indicator_oracle():
    # nu = C**-2 y**(-4/3) dy, mu = dx, q = 6, f = 1 on [1, 2]
    N, p, q = 3, 2.0, 6.0
    nu, mu, _ = measures_for_sobolev(euclidean(N), p=p)
    f = PiecewiseFunction.step([1.0, 2.0], [1.0])
    lhs, rhs, ratio = run_inequality(nu, mu, p, q, f)
    C = mp.mpf(_cn(N))

    def F(x):
        return mp.quad(lambda y: y ** mp.mpf(-4 / 3) / C**2, [max(x, 1), 2])

    ref_lhs = (F(1) ** 6 + mp.quad(lambda x: F(x) ** 6, [1, 2])) ** (mp.mpf(1) / 6)
    ref_rhs = mp.sqrt(F(1))
    assert lhs == pytest.approx(float(ref_lhs), rel=1e-10)
    assert rhs == pytest.approx(float(ref_rhs), rel=1e-12)
    assert ratio == pytest.approx(float(ref_lhs / ref_rhs), rel=1e-10)


def test_inequality_linear_oracle():
    # Hardy measures on R^3, f(y) = y on [0.5, 3]
    N, p = 3, 2.0
    nu, mu, q = measures_for_hardy(euclidean(N), euclidean_geometry(N), p)
    f = PiecewiseFunction.linear([0.5, 3.0], [0.5, 3.0])
    lhs, rhs, _ = run_inequality(nu, mu, p, q, f)
    C, om = mp.mpf(_cn(N)), mp.mpf(unit_ball_volume(N))

    def dnu(y):
        return y ** mp.mpf(-4 / 3) / C**2

    def F(x):
        return mp.quad(lambda y: y * dnu(y), [max(x, mp.mpf(0.5)), 3])

    def dmu(x):
        return (x / om) ** mp.mpf(-2 / 3)

    head = F(mp.mpf(0.5)) ** 2 * mp.quad(dmu, [0, 0.5])
    ref_lhs = mp.sqrt(head + mp.quad(lambda x: F(x) ** 2 * dmu(x), [0.5, 3]))
    ref_rhs = mp.sqrt(mp.quad(lambda y: y**2 * dnu(y), [0.5, 3]))
    assert lhs == pytest.approx(float(ref_lhs), rel=1e-10)
    assert rhs == pytest.approx(float(ref_rhs), rel=1e-12)


@pytest.mark.parametrize("x0", [1e-3, 0.7, 50.0])
def test_indicator_ratio_beats_product_at_x0(x0):
    p = 2.0
    nu, mu, q = measures_for_sobolev(euclidean(4), p=p)
    R = 1e8
    f = PiecewiseFunction.step([x0, x0 * R], [1.0])
    _, _, ratio = run_inequality(nu, mu, p, q, f)
    nu_mass = nu.tails(np.array([x0]))[0] - nu.tails(np.array([x0 * R]))[0]
    witness = nu_mass ** ((p - 1) / p) * mu.masses(np.array([x0]))[0] ** (1 / q)
    assert ratio >= witness * (1 - 1e-10)


@pytest.mark.parametrize("c", [1e-3, 1.0, 1e3])
def test_homogeneity(c):
    nu, mu, q = measures_for_sobolev(product(1, 3), p=2.0)
    y = np.geomspace(0.1, 100.0, 50)
    base = run_inequality(nu, mu, 2.0, q, PiecewiseFunction.linear(y, np.exp(-y / 10)))[2]
    scaled = run_inequality(nu, mu, 2.0, q, PiecewiseFunction.linear(y, c * np.exp(-y / 10)))[2]
    assert scaled == pytest.approx(base, rel=1e-12)


def test_sobolev_substitution_gives_sobolev_quotient():
    # u = (1 - |x|)_+ on R^3; f = -u*'(s) h(s)**2 makes F = u* and the ratio ||u||_6 / ||grad u||_2
    N, p = 3, 2.0
    om, C = unit_ball_volume(N), _cn(N)
    nu, mu, q = measures_for_sobolev(euclidean(N), p=p)
    s = np.geomspace(om * 1e-12, om, 6000)
    f = (1 / 3) * om ** (-1 / 3) * C**2 * s ** (2 / 3)
    ratio = run_inequality(nu, mu, p, q, PiecewiseFunction.linear(s, f))[2]
    exact = (4 * math.pi / 252) ** (1 / 6) / math.sqrt(4 * math.pi / 3)
    assert ratio == pytest.approx(exact, rel=1e-5)
    assert ratio <= sobolev_best_constant(N, p)


def test_inequality_errors():
    nu, mu, q = measures_for_sobolev(euclidean(3), p=2.0)
    with pytest.raises(DomainError):
        run_inequality(nu, mu, 2.0, q, PiecewiseFunction.step([1.0, 2.0], [0.0]))
    with pytest.raises(DomainError):
        run_inequality(nu, mu, 2.0, q, PiecewiseFunction.step([0.0, 2.0], [1.0]))
    with pytest.raises(DomainError):
        run_inequality(nu, mu, 2.0, q, PiecewiseFunction.step([1.0, 2.0], [-1.0]))
    with pytest.raises(DomainError):
        run_inequality(nu, mu, 2.0, 1.5, PiecewiseFunction.step([1.0, 2.0], [1.0]))


def test_bracket_euclidean_sobolev():
    nu, mu, q = measures_for_sobolev(euclidean(4), p=2.0)
    res = bracket_optimal_constant(nu, mu, 2.0, q, "indicators", budget=200)
    obs, B, upper = res
    assert isinstance(res, BracketResult)
    assert 0.99 <= obs / B <= k_qp(q, 2.0)
    assert res.within_bracket and upper == pytest.approx(k_qp(4.0, 2.0) * B)


def test_bracket_hardy_upper_is_kpp():
    p = 2.5
    nu, mu, q = measures_for_hardy(euclidean(4), euclidean_geometry(4), p)
    res = bracket_optimal_constant(nu, mu, p, q, "exponential", budget=60)
    assert res.upper == pytest.approx(p / (p - 1) ** ((p - 1) / p) * res.B_tilde, rel=1e-14)
    assert res.within_bracket


@pytest.mark.parametrize("family", FAMILIES)
def test_bracket_families_within_upper(family):
    nu, mu, q = measures_for_sobolev(product(1, 3), p=2.0)
    res = bracket_optimal_constant(nu, mu, 2.0, q, family, budget=80, seed=3)
    assert res.members > 0
    assert max(res.ratios) <= res.upper * (1 + 1e-6)
    d = res.as_dict()
    assert d["family"] == family and d["within_bracket"]


def test_single_indicator_at_argmax():
    nu, mu, q = measures_for_sobolev(euclidean(3), p=2.0)
    B, where = compute_B_tilde(nu, mu, 2.0, q)
    x0 = where.location
    f = PiecewiseFunction.step([x0, x0 * 1e12], [1.0])
    assert run_inequality(nu, mu, 2.0, q, f)[2] >= 0.99 * B


def test_family_seeding_deterministic():
    nu, mu, _ = measures_for_sobolev(euclidean(3), p=2.0)
    a = [d for _, d in family_members(nu, mu, "random_steps", 5, seed=9)]
    b = [d for _, d in family_members(nu, mu, "random_steps", 5, seed=9)]
    c = [d for _, d in family_members(nu, mu, "random_steps", 5, seed=10)]
    assert a == b and a != c
    with pytest.raises(DomainError):
        list(family_members(nu, mu, "gaussians", 5))
