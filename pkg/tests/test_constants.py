import json
import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from isosobolev.constants import (ConstantsReport, GeometryMismatchWarning, b1_bound_power_like,
                                  c2_bound_general, compute_B1, compute_B2, compute_constants,
                                  euclidean_b1, euclidean_b2, hardy_sobolev_constant,
                                  product_b1_closed_form, product_b_coefficient, theorem_constants)
from isosobolev.errors import DivergenceError, DomainError
from isosobolev.profile import (IsoperimetricProfile, alpha_exponent, bounded_geometry, euclidean,
                                euclidean_geometry, is_p_hyperbolic, paraboloid, product,
                                product_model, profile_from_geometry)
from isosobolev.quad import Attainment
from isosobolev.specfn import k_qp, sobolev_best_constant, unit_ball_volume

mp.mp.dps = 40

EUCLID = [(3, 2.0), (4, 2.0), (4, 3.0), (5, 2.0), (6, 4.0)]

# closed form for product(1, 3, 1, 1), p = 2, evaluated in 40-digit arithmetic
PRODUCT_132 = 1.9168293127388174276


def _mp_product_closed(m, k, p, a):
    N = m + k
    return (mp.mpf(N - p) / N) ** (mp.mpf(N - p) / (N * p)) * (mp.mpf(k) / (k - p)) ** (
        mp.mpf(N - 1) / N) * mp.mpf(p - 1) ** (mp.mpf(p - 1) / p) / a


def test_frozen_product_value():
    assert float(_mp_product_closed(1, 3, 2, 1)) == pytest.approx(PRODUCT_132, rel=1e-15)
    assert product_b1_closed_form(1, 3, 2.0, 1.0) == pytest.approx(PRODUCT_132, rel=1e-14)
    B1, where = compute_B1(product(1, 3), p=2.0)
    assert B1 == pytest.approx(PRODUCT_132, rel=1e-7)
    assert where.attained is Attainment.LIMIT_AT_INFINITY


@pytest.mark.parametrize("N,p", EUCLID)
def test_euclidean_b1(N, p):
    B1, where = compute_B1(euclidean(N), p=p)
    assert B1 == pytest.approx(euclidean_b1(N, p), rel=1e-8)


@pytest.mark.parametrize("N,p", EUCLID)
def test_euclidean_b2_and_c2(N, p):
    B2, _ = compute_B2(euclidean(N), euclidean_geometry(N), p)
    assert B2 == pytest.approx(euclidean_b2(N, p), rel=1e-8)
    _, C2 = theorem_constants(None, B2, N, p)
    assert C2 == pytest.approx((p / (N - p)) ** p, rel=1e-8)


def test_euclidean_3_2_is_exactly_one_and_four():
    assert euclidean_b2(3, 2.0) == 1.0
    B2, _ = compute_B2(euclidean(3), euclidean_geometry(3), 2.0)
    C1, C2 = theorem_constants(euclidean_b1(3, 2.0), B2, 3, 2.0)
    assert B2 == pytest.approx(1.0, rel=1e-10)
    assert C2 == pytest.approx(4.0, rel=1e-10)


@pytest.mark.parametrize("N,p", EUCLID)
def test_c1_is_sobolev_constant(N, p):
    B1, _ = compute_B1(euclidean(N), p=p)
    C1, C2 = theorem_constants(B1, None, N, p)
    assert C2 is None
    assert C1 == pytest.approx(sobolev_best_constant(N, p), rel=1e-8)


def test_theorem_constants_zero():
    assert theorem_constants(0.0, 0.0, 3, 2.0) == (0.0, 0.0)


@pytest.mark.parametrize("m,k,p", [(1, 3, 2.0), (2, 3, 2.0), (1, 4, 3.0), (2, 5, 3.5)])
@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.0, 2.0), (2.0, 1.0), (2.0, 0.5)])
def test_product_closed_form(m, k, p, a, b):
    B1, where = compute_B1(product(m, k, a, b), p=p)
    ref = float(_mp_product_closed(m, k, p, a))
    assert product_b1_closed_form(m, k, p, a) == pytest.approx(ref, rel=1e-13)
    assert B1 == pytest.approx(ref, rel=1e-7)
    assert where.attained is Attainment.LIMIT_AT_INFINITY


def _dense_b2_oracle(geom, p, n=10**6):
    """Trapezoid in log r of the B2 objective, written with r = V^{-1}(s).

    int_0^s V^{-1}(t)^-p dt = int_0^r rho^-p A(rho) drho and, for the induced
    profile h(V(r)) = A(r), int_s^inf h^-p' dt = int_r^inf A^(1-p') drho.
    """
    pc = p / (p - 1)
    N, k = geom.N, geom.large_exponent
    r = np.geomspace(1e-6, 1e8, n)
    x = np.log(r)
    f1 = r ** (1 - p) * geom.A(r)
    f2 = r * geom.A(r) ** (1 - pc)
    seg1 = 0.5 * (f1[1:] + f1[:-1]) * np.diff(x)
    seg2 = 0.5 * (f2[1:] + f2[:-1]) * np.diff(x)
    # exact power-law end pieces
    omN = unit_ball_volume(N)
    head = N * omN * r[0] ** (N - p) / (N - p)
    ck = geom.large_coeff * k
    e = (k - 1) * (1 - pc) + 1
    tail = -(ck ** (1 - pc)) * r[-1] ** e / e
    J1 = head + np.concatenate([[0.0], np.cumsum(seg1)])
    J2 = tail + np.concatenate([np.cumsum(seg2[::-1])[::-1], [0.0]])
    return float(np.max(J1 ** (1 / p) * J2 ** (1 / pc)))


def test_product_model_b2_against_dense_oracle():
    g = product_model(1, 3, 2 * math.pi)
    B2, where = compute_B2(profile_from_geometry(g), g, 2.0)
    assert B2 == pytest.approx(_dense_b2_oracle(g, 2.0), rel=1e-5)
    # the objective tends to (p-1)**((p-1)/p) / (k-p) = 1 at infinity
    assert B2 == pytest.approx(1.0, rel=1e-6)


def test_b2_geometry_mismatch_warns():
    with pytest.warns(GeometryMismatchWarning):
        compute_B2(euclidean(4), product_model(1, 3, 1.0), 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        compute_B2(euclidean(3), euclidean_geometry(3), 2.0)


def test_non_hyperbolic_raises():
    with pytest.raises(DivergenceError):
        compute_B1(product(1, 2), p=2.0)
    with pytest.raises(DivergenceError):
        compute_B2(product(1, 2), product_model(1, 2, 1.0), 2.0)


def test_inner_divergence_at_zero():
    # h ~ s**0.2 near 0 makes (h / s**(2/3))**6 non-integrable; the tail is hyperbolic
    low = IsoperimetricProfile(lambda s: np.minimum(s**0.2, s**0.75), 3, 1.0, 0.2, 0.75, 1.0, 1.0,
                               "low", breakpoints=(1.0,), power_until=1.0, power_from=1.0)
    assert is_p_hyperbolic(low, 2.0).hyperbolic
    with pytest.raises(DivergenceError):
        compute_B1(low, p=2.0)


def test_p_out_of_range():
    with pytest.raises(DomainError):
        compute_B1(euclidean(3), p=3.0)
    with pytest.raises(DomainError):
        compute_B1(euclidean(3), p=1.0)


@pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
@pytest.mark.parametrize("pr", [euclidean(3), product(1, 3), paraboloid(4, 0.8)], ids=lambda p: p.name)
def test_scaling_law(pr, c):
    B, _ = compute_B1(pr, p=2.0)
    Bc, _ = compute_B1(pr.scaled(c), p=2.0)
    assert Bc == pytest.approx(B / c, rel=1e-8)


HYPERBOLIC_PRESETS = [
    (euclidean(3), 2.0),
    (euclidean(5), 3.0),
    (product(1, 3), 2.0),
    (product(2, 4, 0.7, 1.3), 2.5),
    (paraboloid(4, 0.8), 2.0),
    (bounded_geometry(4, 3.0, 1.0, 1.0), 2.0),
]


@pytest.mark.parametrize("pr,p", HYPERBOLIC_PRESETS, ids=lambda x: getattr(x, "name", str(x)))
def test_power_like_bound_dominates(pr, p):
    alpha = alpha_exponent(pr, p)
    assert alpha is not None
    B1, _ = compute_B1(pr, p=p)
    assert B1 <= b1_bound_power_like(pr.N, p, alpha, pr.C_N) * (1 + 1e-8)


@pytest.mark.parametrize("N,p", EUCLID)
def test_power_like_bound_equality_euclidean(N, p):
    C = N * unit_ball_volume(N) ** (1 / N)
    bound = b1_bound_power_like(N, p, (N - 1) / N, C)
    assert bound == pytest.approx(euclidean_b1(N, p), rel=1e-12)
    assert compute_B1(euclidean(N), p=p)[0] == pytest.approx(bound, rel=1e-8)


def test_power_like_bound_blows_up():
    vals = [b1_bound_power_like(3, 2.0, 0.5 + d, 1.0) for d in (1e-1, 1e-3, 1e-6)]
    assert vals[0] < vals[1] < vals[2] and vals[2] > 1e3
    with pytest.raises(DomainError):
        b1_bound_power_like(3, 2.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        b1_bound_power_like(3, 2.0, 0.7, 1.0)


@pytest.mark.parametrize("delta", [0.1, 0.01, 0.3])
def test_c2_bound_substitution(delta):
    assert c2_bound_general(2.0, 0.5 + delta, 1.0, 1.0) == pytest.approx(1 / delta**2, rel=1e-12)


def test_c2_bound_max_symmetry():
    a = c2_bound_general(2.5, 0.8, 0.3, 2.0)
    b = c2_bound_general(2.5, 0.8, 1 / 2.0, 1 / 0.3)
    assert a == pytest.approx(b, rel=1e-15)


def test_c2_bound_dominates_euclidean():
    bound = c2_bound_general(2.0, 0.75, 1.0, 1.0, N=4)
    assert bound == pytest.approx(16.0)
    B2, _ = compute_B2(euclidean(4), euclidean_geometry(4), 2.0)
    assert bound >= theorem_constants(None, B2, 4, 2.0)[1]
    with pytest.raises(DomainError):
        c2_bound_general(2.0, 0.75, 0.0, 1.0)


def test_product_b_coefficient():
    assert product_b_coefficient(1, 1.5) == pytest.approx(3.0, rel=1e-15)
    H = 2 * math.pi * 0.7
    assert product_b_coefficient(2, H) == pytest.approx(2 * math.sqrt(math.pi * H), rel=1e-15)
    assert product_b_coefficient(3, 1.0) == pytest.approx(3 * (4 * math.pi / 3) ** (1 / 3))
    with pytest.raises(DomainError):
        product_b_coefficient(0, 1.0)


def test_hardy_sobolev_constant():
    C1, C2 = 0.7, 3.0
    assert hardy_sobolev_constant(C1, C2, 4, 2.0, 0.0) == pytest.approx(C1**4, rel=1e-15)
    assert hardy_sobolev_constant(C1, C2, 4, 2.0, 1.0) == pytest.approx(C1**2 * math.sqrt(C2))
    near = hardy_sobolev_constant(C1, C2, 4, 2.0, 2.0 - 1e-6)
    assert near == pytest.approx(C2, rel=1e-4)
    with pytest.raises(DomainError):
        hardy_sobolev_constant(C1, C2, 4, 2.0, 2.0)


def test_monotone_in_p_euclidean():
    ps = np.arange(1.2, 3.9, 0.1)
    vals = [compute_B1(euclidean(4), p=p)[0] for p in ps]
    assert np.all(np.diff(vals) > 0)


def test_monotone_in_p_product():
    ps = np.arange(1.2, 2.95, 0.1)
    vals = [compute_B1(product(1, 3), p=p)[0] for p in ps]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("pr", [euclidean(3), product(1, 3), paraboloid(4, 0.8),
                                profile_from_geometry(product_model(1, 3, 2.0))],
                         ids=lambda p: p.name)
def test_grid_doubling_stable(pr):
    a, _ = compute_B1(pr, p=2.0)
    b, _ = compute_B1(pr, p=2.0, points_per_decade=50)
    assert b == pytest.approx(a, rel=1e-8)


def test_b2_grid_doubling_stable():
    g = product_model(1, 3, 2 * math.pi)
    pr = profile_from_geometry(g)
    a, _ = compute_B2(pr, g, 2.0)
    b, _ = compute_B2(pr, g, 2.0, points_per_decade=50)
    assert b == pytest.approx(a, rel=1e-8)


def test_deterministic():
    assert compute_B1(paraboloid(4, 0.8), p=2.0)[0] == compute_B1(paraboloid(4, 0.8), p=2.0)[0]


def test_compute_constants_report():
    rep = compute_constants(euclidean(4), 2.0, geometry=euclidean_geometry(4), q=1.0)
    assert isinstance(rep, ConstantsReport)
    assert rep.C1 == pytest.approx(rep.B1 * k_qp(4.0, 2.0), rel=1e-15)
    assert rep.C2 == pytest.approx(rep.B2**2 * 4.0, rel=1e-15)
    assert rep.hardy_sobolev_constant == pytest.approx(rep.C1**2 * math.sqrt(rep.C2))
    d = json.loads(json.dumps(rep.as_dict()))
    assert d["hyperbolic"] is True and d["B1_attained_at"]["attained"] == "interior"
    assert d["tolerances"]["rel_tol"] == 1e-8


def test_compute_constants_non_hyperbolic():
    rep = compute_constants(product(1, 2), 2.0)
    assert not rep.hyperbolic
    assert rep.B1 is None and rep.C1 is None and rep.C2 is None
    json.dumps(rep.as_dict())
