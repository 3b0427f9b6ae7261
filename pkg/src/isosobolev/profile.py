"""Isoperimetric profiles, the weight ``w`` and radial model geometries.

A profile ``h`` bounds the boundary area of any region of volume ``s`` from
below.  Presets carry their small- and large-volume power laws so that the
quadrature can treat endpoints analytically:

    h(s) ~ coeff_at_zero * s**exponent_at_zero          (s -> 0)
    h(s) ~ coeff_at_infinity * s**exponent_at_infinity  (s -> inf)

``power_until`` / ``power_from`` mark where those laws become exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError
from .quad import quad
from .specfn import unit_ball_volume

__all__ = [
    "IsoperimetricProfile",
    "ModelGeometry",
    "ValidityReport",
    "HyperbolicityResult",
    "weight_w",
    "check_valid",
    "is_p_hyperbolic",
    "alpha_exponent",
    "preset",
    "euclidean",
    "product",
    "paraboloid",
    "bounded_geometry",
    "power_log",
    "geometry_preset",
    "euclidean_geometry",
    "product_model",
    "profile_from_geometry",
    "default_grid",
]

PRESETS = ("euclidean", "product", "paraboloid", "bounded_geometry", "power_log")
GEOMETRIES = ("euclidean", "product_model")

# exponent comparisons against the p-hyperbolicity threshold 1
_THRESHOLD_TOL = 1e-12


def default_grid(n=400, lower=1e-8, upper=1e8):
    return np.geomspace(lower, upper, n)


@dataclass(frozen=True)
class IsoperimetricProfile:
    h: Callable
    N: int
    C_N: float
    exponent_at_zero: float
    exponent_at_infinity: float
    coeff_at_zero: float
    coeff_at_infinity: float
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    breakpoints: tuple = ()
    power_until: float | None = None
    power_from: float | None = None
    log_exponent_at_infinity: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N}")
        if not self.C_N > 0:
            raise DomainError(f"C_N must be positive, got {self.C_N}")

    def __call__(self, s):
        return self.h(np.asarray(s, dtype=float))

    def w(self, s):
        s = np.asarray(s, dtype=float)
        return self.C_N * s ** ((self.N - 1.0) / self.N) / self.h(s)

    def with_normalization(self, C_N):
        """Same ``h`` with a user-chosen ``C_N``."""
        return replace(self, C_N=float(C_N), params={**self.params, "C_N": float(C_N)})

    def scaled(self, c):
        """Profile ``c*h`` with ``C_N`` scaled alike (``w`` is unchanged)."""
        h = self.h
        return replace(
            self,
            h=lambda s: c * h(s),
            C_N=c * self.C_N,
            coeff_at_zero=c * self.coeff_at_zero,
            coeff_at_infinity=c * self.coeff_at_infinity,
            name=f"{self.name}*{c:g}",
        )

    def describe(self):
        return {"family": self.name, "N": self.N, "C_N": self.C_N, **self.params}


def weight_w(profile: IsoperimetricProfile, N: int, s):
    """``C_N s**((N-1)/N) / h(s)``."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise DomainError("w is defined for s > 0 only")
    out = profile.C_N * s_arr ** ((N - 1.0) / N) / profile.h(s_arr)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class ValidityReport:
    passed: bool
    h_violations: list
    w_violations: list
    grid_size: int

    def as_dict(self):
        return {
            "passed": self.passed,
            "h_violations": [list(map(float, v)) for v in self.h_violations],
            "w_violations": [list(map(float, v)) for v in self.w_violations],
            "grid_size": self.grid_size,
        }


def check_valid(profile: IsoperimetricProfile, N: int | None = None, grid=None,
                rel_tol=1e-12) -> ValidityReport:
    """Grid check that ``h`` is increasing and ``w`` nondecreasing."""
    N = profile.N if N is None else N
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    h = profile.h(grid)
    w = profile.C_N * grid ** ((N - 1.0) / N) / h
    bad_h = np.flatnonzero(h[1:] < h[:-1] * (1 - rel_tol))
    bad_w = np.flatnonzero(w[1:] < w[:-1] * (1 - rel_tol))
    hv = [(grid[i], grid[i + 1]) for i in bad_h]
    wv = [(grid[i], grid[i + 1]) for i in bad_w]
    return ValidityReport(not hv and not wv, hv, wv, grid.size)


@dataclass(frozen=True)
class HyperbolicityResult:
    hyperbolic: bool
    integral: float
    tail_exponent: float

    def as_dict(self):
        return {
            "hyperbolic": self.hyperbolic,
            "integral": self.integral if math.isfinite(self.integral) else "divergent",
            "tail_exponent": self.tail_exponent,
        }


def is_p_hyperbolic(profile: IsoperimetricProfile, p: float, rel_tol=1e-10) -> HyperbolicityResult:
    """Whether ``integral_1^inf h(t)**(-p/(p-1)) dt`` converges, and its value."""
    if not p > 1.0:
        raise DomainError(f"need p > 1, got {p}")
    pc = p / (p - 1.0)
    tau = profile.exponent_at_infinity * pc
    log_tau = profile.log_exponent_at_infinity * pc

    def dens(t):
        return profile.h(t) ** -pc

    if tau > 1.0 + _THRESHOLD_TOL:
        val = quad(dens, 1.0, math.inf, tail_exponent=tau, rel_tol=rel_tol,
                   breakpoints=profile.breakpoints)
        return HyperbolicityResult(True, val, tau)
    if abs(tau - 1.0) <= _THRESHOLD_TOL and log_tau > 1.0 + _THRESHOLD_TOL:
        # 1/(t log^z t): integrate in u = log t, where the tail is a power
        # past u = 600 exp overflows; continue with the declared u**(-log_tau) law
        u_cap = 600.0
        g_cap = float(dens(math.exp(u_cap)) * math.exp(u_cap))

        def g(u):
            u = np.asarray(u, dtype=float)
            near = np.minimum(u, u_cap)
            t = np.exp(near)
            out = dens(t) * t
            with np.errstate(over="ignore", divide="ignore"):
                far = g_cap * (u_cap / np.maximum(u, u_cap)) ** log_tau
            return np.where(u > u_cap, far, out)

        val = quad(g, 0.0, math.inf, tail_exponent=log_tau, rel_tol=rel_tol)
        return HyperbolicityResult(True, val, tau)
    return HyperbolicityResult(False, math.inf, tau)


def alpha_exponent(profile: IsoperimetricProfile, p: float, grid=None, N: int | None = None):
    """Largest admissible alpha with ``t**alpha / h(t)`` nonincreasing on ``grid``.

    The admissible range is ``((p-1)/p, (N-1)/N]``.  The largest exponent
    that works on the grid is the smallest log-slope of ``h``; if it falls
    outside the range, ``None`` is returned.
    """
    N = profile.N if N is None else N
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    lo, cap = (p - 1.0) / p, (N - 1.0) / N
    logh = np.log(profile.h(grid))
    slopes = np.diff(logh) / np.diff(np.log(grid))
    best = float(slopes.min())
    # snap rounding noise onto the exponents the profile declares
    for exact in (cap, profile.exponent_at_zero, profile.exponent_at_infinity):
        if abs(best - exact) < 1e-9:
            best = exact
            break
    if lo < best <= cap + 1e-12:
        return min(best, cap)
    return None


def _crossover(a, lam, b, mu):
    return (b / a) ** (1.0 / (lam - mu))


def euclidean(N: int, C_N=None) -> IsoperimetricProfile:
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")
    c = N * unit_ball_volume(N) ** (1.0 / N)
    lam = (N - 1.0) / N

    def h(s):
        return c * s**lam

    prof = IsoperimetricProfile(h, N, c, lam, lam, c, c, "euclidean", {},
                                power_until=math.inf, power_from=0.0)
    return prof if C_N is None else prof.with_normalization(C_N)


def _min_power(N, a, lam, b, mu, name, params, C_N):
    sc = _crossover(a, lam, b, mu)

    def h(s):
        return np.minimum(a * s**lam, b * s**mu)

    return IsoperimetricProfile(h, N, a if C_N is None else float(C_N), lam, mu, a, b, name,
                                params, breakpoints=(sc,), power_until=sc, power_from=sc)


def product(m: int, k: int, a: float = 1.0, b: float = 1.0, C_N=None) -> IsoperimetricProfile:
    """``min(a s**((N-1)/N), b s**((k-1)/k))`` for ``M_m x R^k``, ``N = m + k``."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be an integer >= 1, got {m}")
    if int(k) != k or k < 2:
        raise DomainError(f"k must be an integer >= 2 so that mu > 0, got {k}")
    if not (a > 0 and b > 0):
        raise DomainError("a and b must be positive")
    N = m + k
    return _min_power(N, a, (N - 1.0) / N, b, (k - 1.0) / k, "product",
                      {"m": m, "k": k, "a": a, "b": b}, C_N)


def paraboloid(N: int, beta: float, a=None, b=None, C_N=None) -> IsoperimetricProfile:
    """Profile of the paraboloid ``|x'| < x_N**beta``; ``a, b`` default to the Euclidean constant."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")
    c = N * unit_ball_volume(N) ** (1.0 / N)
    a = c if a is None else a
    b = a if b is None else b
    if not (a > 0 and b > 0):
        raise DomainError("a and b must be positive")
    mu = beta * (N - 1.0) / (1.0 + beta * (N - 1.0))
    return _min_power(N, a, (N - 1.0) / N, b, mu, "paraboloid",
                      {"beta": beta, "a": a, "b": b}, C_N)


def bounded_geometry(N: int, nu: float, theta: float, v0: float, C_N=None) -> IsoperimetricProfile:
    """Two-regime bound ``theta V**(1-1/N)`` (small) / ``theta V**(1-1/nu)`` (large).

    Implemented as ``theta * min(s**(1-1/N), s**(1-1/nu))``, which equals
    the two-branch bound at ``v0 = 1`` and is the largest minorant with
    increasing ``h`` and nondecreasing ``w`` for ``v0 <= 1``; for
    ``v0 > 1`` it is a valid (smaller) minorant.
    """
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")
    if not 1.0 < nu <= N:
        raise DomainError(f"nu must lie in (1, N], got {nu}")
    if not (theta > 0 and v0 > 0):
        raise DomainError("theta and v0 must be positive")
    lam, mu = 1.0 - 1.0 / N, 1.0 - 1.0 / nu
    if nu == N:
        def h(s):
            return theta * s**lam

        return IsoperimetricProfile(h, N, theta if C_N is None else C_N, lam, lam, theta, theta,
                                    "bounded_geometry",
                                    {"nu": nu, "theta": theta, "v0": v0},
                                    power_until=math.inf, power_from=0.0)
    return _min_power(N, theta, lam, theta, mu, "bounded_geometry",
                      {"nu": nu, "theta": theta, "v0": v0}, C_N)


def power_log(gamma: float, k: float, z: float, N: int, C_N=None) -> IsoperimetricProfile:
    """``gamma s**k log(e + s)**z``; ``C_N`` defaults to ``gamma``."""
    if not (gamma > 0 and k > 0):
        raise DomainError("gamma and k must be positive")
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")

    def h(s):
        return gamma * s**k * np.log(math.e + s) ** z

    return IsoperimetricProfile(h, N, gamma if C_N is None else float(C_N), k, k, gamma, gamma,
                                "power_log", {"gamma": gamma, "k": k, "z": z},
                                log_exponent_at_infinity=z)


def preset(name: str, **params) -> IsoperimetricProfile:
    """Build a preset profile by family name."""
    builders = {
        "euclidean": euclidean,
        "product": product,
        "paraboloid": paraboloid,
        "bounded_geometry": bounded_geometry,
        "power_log": power_log,
    }
    if name not in builders:
        raise DomainError(f"unknown profile family {name!r}; choose from {PRESETS}")
    try:
        return builders[name](**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {name}: {exc}") from None


@dataclass(frozen=True)
class ModelGeometry:
    """Spherically symmetric volume growth ``V(r)`` with ``A = V'``.

    ``V`` is exactly ``small_coeff * r**N`` for ``r <= exact_small_until``
    and ``large_coeff * r**large_exponent`` for ``r >= exact_large_from``.
    """

    V: Callable
    A: Callable
    V_inverse: Callable
    N: int
    large_exponent: float
    small_coeff: float
    large_coeff: float
    exact_small_until: float
    exact_large_from: float
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def volume_breakpoints(self):
        pts = []
        for r in (self.exact_small_until, self.exact_large_from):
            if 0 < r < math.inf:
                pts.append(float(self.V(np.array(r))))
        return tuple(sorted(set(pts)))

    @property
    def radius_breakpoints(self):
        return tuple(r for r in (self.exact_small_until, self.exact_large_from)
                     if 0 < r < math.inf)

    def describe(self):
        return {"family": self.name, "N": self.N, **self.params}


def euclidean_geometry(N: int) -> ModelGeometry:
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    om = unit_ball_volume(N)

    def V(r):
        return om * np.asarray(r, dtype=float) ** N

    def A(r):
        return N * om * np.asarray(r, dtype=float) ** (N - 1)

    def V_inverse(v):
        return (np.asarray(v, dtype=float) / om) ** (1.0 / N)

    return ModelGeometry(V, A, V_inverse, N, float(N), om, om, math.inf, 0.0, "euclidean", {})


def product_model(m: int, k: int, cross_volume: float, matching_ratio: float = 0.5) -> ModelGeometry:
    """Model of ``M_m x R^k``: Euclidean ``omega_N r**N`` below ``r0``,
    cylinder-like ``omega_k H r**k`` above ``r1``.

    In between, ``log V`` is the quadratic in ``log r`` that matches values
    and slopes at both ends (a C1 Hermite cubic whose cubic term vanishes).
    ``r0 = matching_ratio * r_c`` and ``r1 = r_c / matching_ratio`` where
    ``r_c`` is where the two power laws cross; the log-slope then falls
    linearly from N to k, so V, A and the induced profile are monotone.
    """
    if int(m) != m or m < 1 or int(k) != k or k < 1:
        raise DomainError("m and k must be positive integers")
    if not cross_volume > 0:
        raise DomainError("cross_volume must be positive")
    if not 0.0 < matching_ratio < 1.0:
        raise DomainError("matching_ratio must lie in (0, 1)")
    N = m + k
    om_n = unit_ball_volume(N)
    c_large = unit_ball_volume(k) * cross_volume
    ln_small, ln_large = math.log(om_n), math.log(c_large)
    x_c = (ln_large - ln_small) / (N - k)
    x0 = x_c + math.log(matching_ratio)
    x1 = 2.0 * x_c - x0
    span = x1 - x0
    L0 = ln_small + N * x0
    L1 = ln_large + k * x1
    curv = (N - k) / (2.0 * span)

    def logV(x):
        d = x - x0
        return np.where(x <= x0, ln_small + N * x,
                        np.where(x >= x1, ln_large + k * x, L0 + N * d - curv * d * d))

    def slope(x):
        return np.clip(N - (N - k) * (x - x0) / span, k, N)

    def V(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r > 0, np.exp(logV(np.log(np.where(r > 0, r, 1.0)))), 0.0)

    def A(r):
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0, r, 1.0)
        x = np.log(safe)
        return np.where(r > 0, np.exp(logV(x) - x) * slope(x), 0.0 if N > 1 else N * om_n)

    def V_inverse(v):
        v = np.asarray(v, dtype=float)
        y = np.log(np.where(v > 0, v, 1.0))
        c = y - L0
        disc = np.sqrt(np.maximum(N * N - 4.0 * curv * c, 0.0))
        x_mid = x0 + 2.0 * c / (N + disc)
        x = np.where(y <= L0, (y - ln_small) / N, np.where(y >= L1, (y - ln_large) / k, x_mid))
        return np.where(v > 0, np.exp(x), 0.0)

    return ModelGeometry(V, A, V_inverse, N, float(k), om_n, c_large,
                         math.exp(x0), math.exp(x1), "product_model",
                         {"m": m, "k": k, "cross_volume": cross_volume,
                          "matching_ratio": matching_ratio})


def geometry_preset(name: str, **params) -> ModelGeometry:
    if name == "euclidean":
        return euclidean_geometry(**params)
    if name == "product_model":
        return product_model(**params)
    raise DomainError(f"unknown geometry {name!r}; choose from {GEOMETRIES}")


def profile_from_geometry(g: ModelGeometry, C_N=None) -> IsoperimetricProfile:
    """Profile induced by geodesic balls: ``h(v) = A(V^{-1}(v))``.

    ``C_N`` defaults to the Euclidean ``N omega_N**(1/N)``, matching the
    small-scale behaviour of both geometry presets.
    """
    N = g.N
    c_small = N * g.small_coeff ** (1.0 / N)
    K = g.large_exponent
    c_large = K * g.large_coeff ** (1.0 / K)
    A, Vinv = g.A, g.V_inverse

    def h(v):
        return A(Vinv(v))

    vb = g.volume_breakpoints
    power_until = float(g.V(np.array(g.exact_small_until))) if math.isfinite(g.exact_small_until) else math.inf
    power_from = float(g.V(np.array(g.exact_large_from))) if g.exact_large_from > 0 else 0.0
    return IsoperimetricProfile(
        h, N, c_small if C_N is None else float(C_N),
        (N - 1.0) / N, (K - 1.0) / K, c_small, c_large,
        f"induced[{g.name}]", dict(g.params), breakpoints=vb,
        power_until=power_until, power_from=power_from,
    )
