"""B1, B2 and the Sobolev/Hardy/Hardy-Sobolev constants they control.

Both suprema have the shape

    sup_s  (integral_0^s  m(t) dt)**(1/a) * (integral_s^inf h(t)**(-p') dt)**(1/p')

with ``p' = p/(p-1)``.  They are evaluated on a log grid of cumulative and
tail integrals (each piece resolved to relative accuracy) and handed to
``sup_scan``; boundary-attained suprema come back as extrapolated limits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, DomainError
from .profile import (IsoperimetricProfile, ModelGeometry, default_grid, is_p_hyperbolic,
                      profile_from_geometry)
from .quad import SupremumResult, cumulative_integrals, scan_range, sup_scan, tail_integrals
from .specfn import k_qp, unit_ball_volume

__all__ = [
    "SCHEMA_VERSION",
    "ConstantsReport",
    "GeometryMismatchWarning",
    "compute_B1",
    "compute_B2",
    "theorem_constants",
    "hardy_sobolev_constant",
    "b1_bound_power_like",
    "c2_bound_general",
    "product_b_coefficient",
    "product_b1_closed_form",
    "euclidean_b1",
    "euclidean_b2",
    "compute_constants",
]

SCHEMA_VERSION = "isosobolev.report/1"
DEFAULT_REL_TOL = 1e-8
QUAD_TOL = 1e-12
_EXP_TOL = 1e-12


class GeometryMismatchWarning(UserWarning):
    """The geometry's induced profile differs from the profile passed with it."""


def _check_p(N, p):
    if not 1.0 < p < N:
        raise DomainError(f"need 1 < p < N, got p={p}, N={N}")


def _limit_flag(exponent):
    """Finite boundary limit iff the objective's power there is <= 0."""
    if exponent > _EXP_TOL:
        return False
    return True


def _sup_of_product(mass_density, mass_sigma, mass_power, tail_density, tail_tau, p,
                    breakpoints, lower, upper, rel_tol, finite_zero, finite_inf,
                    points_per_decade=25):
    pc = p / (p - 1.0)

    def objective(s):
        J1 = cumulative_integrals(mass_density, s, singularity_exponent=mass_sigma,
                                  breakpoints=breakpoints, rel_tol=QUAD_TOL)
        J2 = tail_integrals(tail_density, s, tail_exponent=tail_tau,
                            breakpoints=breakpoints, rel_tol=QUAD_TOL)
        return J1 ** (1.0 / mass_power) * J2 ** (1.0 / pc)

    return sup_scan(objective, rel_tol, lower=lower, upper=upper, vectorized=True,
                    points_per_decade=points_per_decade,
                    finite_at_zero=finite_zero, finite_at_infinity=finite_inf)


def _require_hyperbolic(profile, p):
    hyp = is_p_hyperbolic(profile, p)
    if not hyp.hyperbolic:
        raise DivergenceError(
            f"profile {profile.name!r} is not {p}-hyperbolic "
            f"(tail exponent {hyp.tail_exponent:.6g} <= 1)"
        )
    return hyp


def compute_B1(profile: IsoperimetricProfile, N: int | None = None, p: float = 2.0,
               rel_tol: float = DEFAULT_REL_TOL, points_per_decade: int = 25,
               ) -> tuple[float, SupremumResult]:
    """Supremum B1 for the Sobolev inequality; returns ``(B1, SupremumResult)``."""
    N = profile.N if N is None else N
    _check_p(N, p)
    _require_hyperbolic(profile, p)
    ps = N * p / (N - p)
    pc = p / (p - 1.0)
    lam = (N - 1.0) / N
    C = profile.C_N
    h = profile.h
    sigma = (profile.exponent_at_zero - lam) * ps
    if not sigma > -1.0:
        raise DivergenceError(f"inner B1 integral diverges at 0 (exponent {sigma:.6g})")
    tau = profile.exponent_at_infinity * pc

    def mass(t):
        return (h(t) / (C * t**lam)) ** ps

    def tail(t):
        return h(t) ** -pc

    # objective ~ s**e near each end
    gamma_inf = 1.0 + (profile.exponent_at_infinity - lam) * ps
    e_inf = max(gamma_inf, 0.0) / ps + (1.0 - tau) / pc
    tau0 = profile.exponent_at_zero * pc
    e_zero = (1.0 + sigma) / ps + min(0.0, 1.0 - tau0) / pc
    finite_inf = None if profile.log_exponent_at_infinity else _limit_flag(e_inf)
    finite_zero = e_zero >= -_EXP_TOL
    if finite_inf is False:
        raise DivergenceError("B1 objective grows without bound as s -> inf")
    if not finite_zero:
        raise DivergenceError("B1 objective grows without bound as s -> 0")
    lower, upper = scan_range(profile.power_until, profile.power_from)
    res = _sup_of_product(mass, None if sigma == 0 else sigma, ps, tail, tau, p,
                          profile.breakpoints, lower, upper, rel_tol, finite_zero, finite_inf,
                          points_per_decade)
    return res.value, res


def _consistency_warning(profile, geometry, rel=1e-2):
    induced = profile_from_geometry(geometry)
    s = default_grid()
    dev = np.max(np.abs(induced.h(s) / profile.h(s) - 1.0))
    if dev > rel:
        warnings.warn(
            f"geometry {geometry.name!r} induces a profile differing from {profile.name!r} "
            f"by up to {dev:.3g} (relative)",
            GeometryMismatchWarning,
            stacklevel=3,
        )
    return float(dev)


def compute_B2(profile: IsoperimetricProfile, geometry: ModelGeometry, p: float = 2.0,
               rel_tol: float = DEFAULT_REL_TOL, points_per_decade: int = 25,
               ) -> tuple[float, SupremumResult]:
    """Supremum B2 for the Hardy inequality; returns ``(B2, SupremumResult)``."""
    N = geometry.N
    _check_p(N, p)
    _require_hyperbolic(profile, p)
    _consistency_warning(profile, geometry)
    pc = p / (p - 1.0)
    Vinv = geometry.V_inverse
    h = profile.h
    sigma = -p / N
    K = geometry.large_exponent
    tau = profile.exponent_at_infinity * pc

    def mass(t):
        return Vinv(t) ** -p

    def tail(t):
        return h(t) ** -pc

    e_inf = max(1.0 - p / K, 0.0) / p + (1.0 - tau) / pc
    finite_inf = None if profile.log_exponent_at_infinity else _limit_flag(e_inf)
    if finite_inf is False:
        raise DivergenceError("B2 objective grows without bound as s -> inf")
    tau0 = profile.exponent_at_zero * pc
    finite_zero = (1.0 + sigma) / p + min(0.0, 1.0 - tau0) / pc >= -_EXP_TOL
    if not finite_zero:
        raise DivergenceError("B2 objective grows without bound as s -> 0")
    bps = tuple(sorted(set(profile.breakpoints) | set(geometry.volume_breakpoints)))
    vb = geometry.volume_breakpoints
    lower, upper = scan_range(
        min([profile.power_until or math.inf] + list(vb)),
        max([profile.power_from or 0.0] + list(vb)),
    )
    res = _sup_of_product(mass, sigma, p, tail, tau, p, bps, lower, upper, rel_tol,
                          finite_zero, finite_inf, points_per_decade)
    return res.value, res


def theorem_constants(B1, B2, N, p):
    """``C1 = B1 k(p*, p)`` and ``C2 = B2**p p**p / (p-1)**(p-1)``; None passes through."""
    _check_p(N, p)
    ps = N * p / (N - p)
    C1 = None if B1 is None else B1 * k_qp(ps, p)
    C2 = None if B2 is None else B2**p * p**p / (p - 1.0) ** (p - 1.0)
    return C1, C2


def hardy_sobolev_constant(C1, C2, N, p, q):
    """``C1**(N(p-q)/(N-p)) * C2**(q/p)`` for ``q < p``."""
    _check_p(N, p)
    if not q < p:
        raise DomainError(f"Hardy-Sobolev needs q < p, got q={q}, p={p}")
    return C1 ** (N * (p - q) / (N - p)) * C2 ** (q / p)


def _check_alpha(p, alpha, N=None):
    if not alpha > (p - 1.0) / p:
        raise DomainError(f"alpha must exceed (p-1)/p = {(p - 1.0) / p}, got {alpha}")
    if N is not None and alpha > (N - 1.0) / N + 1e-15:
        raise DomainError(f"alpha must not exceed (N-1)/N = {(N - 1.0) / N}, got {alpha}")


def b1_bound_power_like(N, p, alpha, C_N):
    """Upper bound for B1 when ``t**alpha / h(t)`` is nonincreasing."""
    _check_p(N, p)
    _check_alpha(p, alpha, N)
    ps = N * p / (N - p)
    return ((N - p) / N) ** (1.0 / ps) * (p - 1.0) ** ((p - 1.0) / p) / (
        C_N * (alpha * p - p + 1.0) ** ((N - 1.0) / N))


def c2_bound_general(p, alpha, c0, c1, N=None):
    """``[p max(c1, 1/c0) / (alpha p - p + 1)]**p`` bounding C2."""
    if not p > 1.0:
        raise DomainError(f"need p > 1, got {p}")
    _check_alpha(p, alpha, N)
    if not (c0 > 0 and c1 > 0):
        raise DomainError("c0 and c1 must be positive")
    return (p * max(c1, 1.0 / c0) / (alpha * p - p + 1.0)) ** p


def product_b_coefficient(k, cross_volume):
    """Large-volume coefficient ``k (omega_k H)**(1/k)`` of a product profile."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if not cross_volume > 0:
        raise DomainError("cross_volume must be positive")
    return k * (unit_ball_volume(k) * cross_volume) ** (1.0 / k)


def product_b1_closed_form(m, k, p, C_N):
    """Closed-form B1 of ``min(a s**((N-1)/N), b s**((k-1)/k))`` with ``C_N = a``."""
    N = m + k
    _check_p(N, p)
    if not p < k:
        raise DomainError(f"need p < k, got p={p}, k={k}")
    return (((N - p) / N) ** ((N - p) / (N * p)) * (k / (k - p)) ** ((N - 1.0) / N)
            * (p - 1.0) ** ((p - 1.0) / p) / C_N)


def euclidean_b1(N, p, C_N=None):
    """``C_N**-1 [N(p-1)/(N-p)]**((p-1)/p)``."""
    _check_p(N, p)
    if C_N is None:
        C_N = N * unit_ball_volume(N) ** (1.0 / N)
    return (N * (p - 1.0) / (N - p)) ** ((p - 1.0) / p) / C_N


def euclidean_b2(N, p):
    """``(p-1)**((p-1)/p) / (N-p)``."""
    _check_p(N, p)
    return (p - 1.0) ** ((p - 1.0) / p) / (N - p)


@dataclass
class ConstantsReport:
    profile: dict
    N: int
    p: float
    hyperbolic: bool
    hyperbolicity_integral: float | None
    B1: float | None = None
    B1_where: SupremumResult | None = None
    B2: float | None = None
    B2_where: SupremumResult | None = None
    C1: float | None = None
    C2: float | None = None
    k_pstar_p: float | None = None
    q: float | None = None
    hardy_sobolev_constant: float | None = None
    geometry: dict | None = None
    tolerances: dict = field(default_factory=dict)

    def as_dict(self):
        d = {
            "schema": SCHEMA_VERSION,
            "profile": self.profile,
            "geometry": self.geometry,
            "N": self.N,
            "p": self.p,
            "hyperbolic": self.hyperbolic,
            "hyperbolicity_integral": self.hyperbolicity_integral,
            "B1": self.B1,
            "B1_attained_at": self.B1_where.as_dict() if self.B1_where else None,
            "B2": self.B2,
            "B2_attained_at": self.B2_where.as_dict() if self.B2_where else None,
            "C1": self.C1,
            "C2": self.C2,
            "k_pstar_p": self.k_pstar_p,
            "tolerances": self.tolerances,
        }
        if self.q is not None:
            d["q"] = self.q
            d["hardy_sobolev_constant"] = self.hardy_sobolev_constant
        return d


def compute_constants(profile: IsoperimetricProfile, p: float, geometry: ModelGeometry | None = None,
                      q: float | None = None, rel_tol: float = DEFAULT_REL_TOL) -> ConstantsReport:
    """All constants for ``profile`` (and ``geometry`` when B2 is wanted).

    A non-hyperbolic profile yields a report with ``hyperbolic=False`` and
    no constants.
    """
    N = profile.N
    _check_p(N, p)
    if q is not None and not q < p:
        raise DomainError(f"Hardy-Sobolev needs q < p, got q={q}, p={p}")
    hyp = is_p_hyperbolic(profile, p)
    rep = ConstantsReport(
        profile=profile.describe(), N=N, p=p, hyperbolic=hyp.hyperbolic,
        hyperbolicity_integral=hyp.integral if hyp.hyperbolic else None,
        q=q, geometry=geometry.describe() if geometry else None,
        tolerances={"rel_tol": rel_tol, "quadrature_rel_tol": QUAD_TOL},
    )
    if not hyp.hyperbolic:
        return rep
    ps = N * p / (N - p)
    rep.k_pstar_p = k_qp(ps, p)
    rep.B1, rep.B1_where = compute_B1(profile, N, p, rel_tol)
    if geometry is not None:
        rep.B2, rep.B2_where = compute_B2(profile, geometry, p, rel_tol)
    rep.C1, rep.C2 = theorem_constants(rep.B1, rep.B2, N, p)
    if q is not None and rep.C2 is not None:
        rep.hardy_sobolev_constant = hardy_sobolev_constant(rep.C1, rep.C2, N, p, q)
    return rep
