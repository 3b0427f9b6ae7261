"""One-dimensional weighted Hardy (Bliss) inequality on the half line.

For measures nu, mu on [0, inf) and exponents ``1 < p <= q`` the best ``A`` in

    (integral |integral_x^inf f dnu|**q dmu(x))**(1/q) <= A (integral |f|**p dnu)**(1/p)

satisfies ``B <= A <= k(q, p) B`` with

    B = sup_x nu([x, inf))**((p-1)/p) * mu([0, x])**(1/q).

This module builds the measure pairs that reduce the Sobolev and Hardy
inequalities to that form, computes ``B``, and probes ``A`` from below with
families of test functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, DomainError
from .profile import IsoperimetricProfile, ModelGeometry
from .quad import (Attainment, SupremumResult, WeightedMeasure, scan_range, sup_scan)
from .rearrange import PiecewiseFunction
from .specfn import k_qp

__all__ = [
    "WeightedMeasure",
    "BracketResult",
    "FAMILIES",
    "DEFAULT_SEED",
    "measures_for_sobolev",
    "measures_for_hardy",
    "compute_B_tilde",
    "test_inequality",
    "family_members",
    "bracket_optimal_constant",
]

FAMILIES = ("indicators", "exponential", "powers", "random_steps")
DEFAULT_SEED = 20240611
QUAD_TOL = 1e-12
# log-width of the cells on which the nested rule is applied
_CELL_DECADES = 0.05
_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)


def _h_density(profile, pc):
    h = profile.h

    def dnu(t):
        return h(t) ** -pc

    return dnu


def _nu_measure(profile: IsoperimetricProfile, p: float) -> WeightedMeasure:
    pc = p / (p - 1.0)
    exact_from = None
    if not profile.log_exponent_at_infinity and math.isfinite(profile.power_from):
        exact_from = profile.power_from if profile.power_from > 0 else None
    return WeightedMeasure(
        _h_density(profile, pc),
        singularity_exponent=-profile.exponent_at_zero * pc,
        tail_exponent=profile.exponent_at_infinity * pc,
        name=f"nu[{profile.name}]",
        breakpoints=tuple(profile.breakpoints),
        power_tail_from=exact_from,
    )


def measures_for_sobolev(profile: IsoperimetricProfile, N: int | None = None, p: float = 2.0):
    """``(nu, mu, p*)`` with ``dnu = h**(-p') dy`` and ``dmu = (h/(C_N x**((N-1)/N)))**p* dx``.

    ``mu``'s tail is not needed (only masses ``mu([0, x])`` enter) and is
    left undeclared.
    """
    N = profile.N if N is None else N
    if not 1.0 < p < N:
        raise DomainError(f"need 1 < p < N, got p={p}, N={N}")
    ps = N * p / (N - p)
    lam = (N - 1.0) / N
    C, h = profile.C_N, profile.h

    def dmu(x):
        return (h(x) / (C * x**lam)) ** ps

    sigma = (profile.exponent_at_zero - lam) * ps
    mu = WeightedMeasure(dmu, singularity_exponent=None if sigma == 0 else sigma,
                         name=f"mu_sobolev[{profile.name}]",
                         breakpoints=tuple(profile.breakpoints))
    return _nu_measure(profile, p), mu, ps


def measures_for_hardy(profile: IsoperimetricProfile, geometry: ModelGeometry, p: float = 2.0):
    """``(nu, mu, p)`` with ``dmu = V_inverse(x)**(-p) dx``."""
    N = geometry.N
    if not 1.0 < p < N:
        raise DomainError(f"need 1 < p < N, got p={p}, N={N}")
    Vinv = geometry.V_inverse

    def dmu(x):
        return Vinv(x) ** -p

    bps = tuple(sorted(set(profile.breakpoints) | set(geometry.volume_breakpoints)))
    mu = WeightedMeasure(dmu, singularity_exponent=-p / N, name=f"mu_hardy[{geometry.name}]",
                         breakpoints=bps)
    nu = _nu_measure(profile, p)
    nu = WeightedMeasure(nu.density, nu.singularity_exponent, nu.tail_exponent, nu.name, bps,
                         nu.power_tail_from)
    return nu, mu, float(p)


def _window(nu, mu):
    marks = [t for t in tuple(nu.breakpoints) + tuple(mu.breakpoints) if 0 < t < math.inf]
    if not marks:
        return scan_range()
    return scan_range(min(marks), max(marks))


def compute_B_tilde(nu: WeightedMeasure, mu: WeightedMeasure, p: float, q: float,
                    rel_tol: float = 1e-8) -> tuple[float, SupremumResult]:
    """``sup_x nu([x, inf))**((p-1)/p) * mu([0, x])**(1/q)`` and where it is attained."""
    if not 1.0 < p <= q:
        raise DomainError(f"need 1 < p <= q, got p={p}, q={q}")
    lower, upper = _window(nu, mu)
    if nu.is_zero or mu.is_zero:
        return 0.0, SupremumResult(lower, 0.0, Attainment.INTERIOR, 0, 0, 0.0)
    if nu.tail_exponent is not None and not nu.tail_exponent > 1.0:
        raise DivergenceError(f"{nu.name} has infinite tail mass")
    pc = p / (p - 1.0)

    def objective(x):
        return nu.tails(x, QUAD_TOL) ** (1.0 / pc) * mu.masses(x, QUAD_TOL) ** (1.0 / q)

    res = sup_scan(objective, rel_tol, lower=lower, upper=upper, vectorized=True)
    return res.value, res


def _cells(lo, hi, inner):
    """Log-spaced subdivision of ``[lo, hi]`` through the points ``inner``."""
    pts = {lo, hi}
    pts.update(t for t in inner if lo < t < hi)
    if lo > 0:
        n = max(1, int(math.ceil(math.log10(hi / lo) / _CELL_DECADES)))
        pts.update(np.geomspace(lo, hi, n + 1)[1:-1].tolist())
    else:
        pts.update(np.linspace(lo, hi, 65)[1:-1].tolist())
    return np.array(sorted(pts))


def test_inequality(nu: WeightedMeasure, mu: WeightedMeasure, p: float, q: float,
                    f: PiecewiseFunction):
    """``(lhs, rhs, lhs/rhs)`` for a nonnegative ``f`` supported on its breakpoint span.

    ``F(x) = integral_x^inf f dnu`` is built from suffix sums over a fine log
    subdivision, with a nested 15-point rule inside each cell; ``F`` is
    constant to the left of the support, which contributes
    ``F(b0)**q mu([0, b0])`` in closed form.
    """
    if not 1.0 < p <= q:
        raise DomainError(f"need 1 < p <= q, got p={p}, q={q}")
    if min(f.values) < 0:
        raise DomainError("f must be nonnegative")
    b0, b1 = float(f.breakpoints[0]), float(f.breakpoints[-1])
    if b0 == 0.0 and nu.singularity_exponent is not None and nu.singularity_exponent <= -1.0:
        raise DomainError("rhs is infinite: f does not vanish near 0 where nu is not integrable")
    inner = tuple(f.x) + tuple(nu.breakpoints) + tuple(mu.breakpoints)
    c = _cells(b0, b1, inner)
    a, b = c[:-1], c[1:]
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    X = mid[:, None] + half[:, None] * _GL_X                  # (cells, 15)
    fX = _f_inside(f, X, a, b)
    dnuX = nu.density(X)
    cell_F = half * ((fX * dnuX) @ _GL_W)
    cell_P = half * ((fX**p * dnuX) @ _GL_W)
    rhs_p = float(np.sum(cell_P))
    if not math.isfinite(rhs_p):
        raise DomainError("rhs is infinite")
    if rhs_p <= 0.0:
        raise DomainError("rhs is zero: the ratio is undefined")
    right = np.concatenate([np.cumsum(cell_F[::-1])[::-1][1:], [0.0]])   # F at cell right ends

    # F at each outer node: F(b_i) + integral over [x, b_i] by a mapped rule
    hl = 0.5 * (b[:, None] - X)                               # (cells, 15)
    Y = (0.5 * (b[:, None] + X))[..., None] + hl[..., None] * _GL_X     # (cells, 15, 15)
    fY = _f_inside(f, Y, a[:, None, None], b[:, None, None])
    partial = hl * ((fY * nu.density(Y)) @ _GL_W)
    FX = right[:, None] + partial
    F0 = float(np.sum(cell_F))
    lhs_q = F0**q * float(mu.masses(np.array([b0]), QUAD_TOL)[0]) if b0 > 0 else 0.0
    lhs_q += float(np.sum(half * ((np.maximum(FX, 0.0) ** q * mu.density(X)) @ _GL_W)))
    lhs, rhs = lhs_q ** (1.0 / q), rhs_p ** (1.0 / p)
    return lhs, rhs, lhs / rhs


test_inequality.__test__ = False


def _f_inside(f, X, a, b):
    """``f`` at points of cell ``[a, b]``; step values taken from the cell midpoint."""
    if f.kind == "linear":
        return f(X)
    m = np.asarray(0.5 * (a + b), dtype=float)
    m = m.reshape(m.shape + (1,) * (np.ndim(X) - m.ndim))
    return np.broadcast_to(f(m), np.shape(X))


@dataclass
class BracketResult:
    observed_sup: float
    B_tilde: float
    upper: float
    family: str
    budget: int
    seed: int | None
    members: int
    best_member: dict
    within_bracket: bool
    ratios: list = field(default_factory=list, repr=False)

    def __iter__(self):
        return iter((self.observed_sup, self.B_tilde, self.upper))

    def as_dict(self):
        return {
            "family": self.family,
            "budget": self.budget,
            "seed": self.seed,
            "members": self.members,
            "observed_sup": self.observed_sup,
            "B_tilde": self.B_tilde,
            "upper": self.upper,
            "observed_over_B_tilde": self.observed_sup / self.B_tilde if self.B_tilde else None,
            "within_bracket": self.within_bracket,
            "best_member": self.best_member,
        }


def _indicator_ratio(nu, mu, x0):
    tau = nu.tail_exponent
    R = 1e8 if tau is None else max(1e8, 10.0 ** (4.0 / (tau - 1.0)))
    return PiecewiseFunction.step([x0, x0 * R], [1.0]), {"x0": x0, "stop": x0 * R}


def family_members(nu: WeightedMeasure, mu: WeightedMeasure, family: str, budget: int,
                   seed: int | None = None):
    """Yield ``(f, description)`` for ``budget`` members of ``family``."""
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; choose from {FAMILIES}")
    if budget < 1:
        raise DomainError("budget must be positive")
    lower, upper = _window(nu, mu)
    if family == "indicators":
        for x0 in np.geomspace(lower, upper, budget):
            yield _indicator_ratio(nu, mu, float(x0))
    elif family == "exponential":
        n_gamma = max(1, int(round(math.sqrt(budget / 4))))
        gammas = np.linspace(0.0, 5.0, n_gamma)
        scales = np.geomspace(lower, upper, max(1, budget // n_gamma + 1))
        count = 0
        for lam in scales:
            for g in gammas:
                if count == budget:
                    return
                y = lam * np.geomspace(1e-6, 60.0, 241)
                yield (PiecewiseFunction.linear(y, (y / lam) ** g * np.exp(-y / lam)),
                       {"scale": float(lam), "gamma": float(g)})
                count += 1
    elif family == "powers":
        rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
        for _ in range(budget):
            x0 = float(np.exp(rng.uniform(math.log(lower), math.log(upper))))
            span = 10.0 ** rng.uniform(0.5, 8.0)
            beta = float(rng.uniform(-1.0, 2.0))
            y = x0 * np.geomspace(1.0, span, 161)
            yield (PiecewiseFunction.linear(y, (y / x0) ** -beta),
                   {"x0": x0, "span": float(span), "beta": beta})
    else:
        rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
        for _ in range(budget):
            x0 = float(np.exp(rng.uniform(math.log(lower), math.log(upper))))
            cells = int(rng.integers(1, 21))
            span = 10.0 ** rng.uniform(0.5, 10.0)
            edges = x0 * np.geomspace(1.0, span, cells + 1)
            vals = np.exp(rng.normal(0.0, 1.5, cells))
            yield (PiecewiseFunction.step(edges.tolist(), vals.tolist()),
                   {"x0": x0, "span": float(span), "cells": cells})


def bracket_optimal_constant(nu: WeightedMeasure, mu: WeightedMeasure, p: float, q: float,
                             family: str = "indicators", budget: int = 200,
                             seed: int | None = None, rel_tol: float = 1e-8) -> BracketResult:
    """Largest observed ratio over a test family next to ``B~`` and ``k(q, p) B~``.

    Unpacks as ``(observed_sup, B_tilde, upper)``.  ``within_bracket`` records
    ``observed_sup <= upper * (1 + 1e-6)``.
    """
    B, _ = compute_B_tilde(nu, mu, p, q, rel_tol)
    if not math.isfinite(B):
        raise DivergenceError("B~ is infinite")
    upper = k_qp(q, p) * B
    ratios, best, best_desc = [], -math.inf, {}
    for f, desc in family_members(nu, mu, family, budget, seed):
        try:
            _, _, r = test_inequality(nu, mu, p, q, f)
        except DomainError:
            continue
        if not math.isfinite(r):
            continue
        ratios.append(r)
        if r > best:
            best, best_desc = r, desc
    if not ratios:
        raise DomainError(f"family {family!r} produced no admissible test function for these measures")
    used_seed = None if family in ("indicators", "exponential") else (DEFAULT_SEED if seed is None else seed)
    return BracketResult(best, B, upper, family, budget, used_seed, len(ratios), best_desc,
                         best <= upper * (1.0 + 1e-6), ratios)
