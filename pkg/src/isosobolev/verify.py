"""Radial checks of the weighted Sobolev, Hardy and Hardy-Sobolev inequalities.

A radial test function is a nonnegative piecewise-linear ``phi(r)`` that
vanishes at its last node.  On a model geometry every integral reduces to
``integral ... A(r) dr``; the Dirichlet energy ``integral |phi'|**p A dr`` is
exact cell by cell as ``|slope|**p (V(b) - V(a))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import compute_constants, hardy_sobolev_constant
from .errors import DomainError
from .profile import IsoperimetricProfile, ModelGeometry
from .quad import quad, segment_integrals
from .rearrange import PiecewiseFunction
from .specfn import sobolev_best_constant

__all__ = [
    "RadialTestFunction",
    "InequalityCheck",
    "VERIFY_FAMILIES",
    "DEFAULT_SEED",
    "tent",
    "bump",
    "talenti",
    "hardy_probe",
    "random_monotone",
    "random_radial",
    "family_functions",
    "dirichlet_energy",
    "verify_sobolev",
    "verify_hardy",
    "verify_hardy_sobolev",
    "sobolev_quotient_sweep",
]

VERIFY_FAMILIES = ("tent", "bump", "talenti", "power_cutoff", "random_monotone", "random")
DEFAULT_SEED = 20240611
MAX_NODES = 10_000
QUAD_TOL = 1e-12


@dataclass(frozen=True)
class RadialTestFunction:
    r: np.ndarray
    phi: np.ndarray
    geometry: ModelGeometry
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi", phi)
        if r.ndim != 1 or r.size < 2 or r.size != phi.size:
            raise DomainError("r and phi must be 1-d arrays of equal length >= 2")
        if r.size > MAX_NODES:
            raise DomainError(f"at most {MAX_NODES} nodes, got {r.size}")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise DomainError("radii must be nonnegative and strictly increasing")
        if np.any(phi < 0) or not np.all(np.isfinite(phi)):
            raise DomainError("phi must be finite and nonnegative")
        if phi[-1] != 0.0:
            raise DomainError("phi must vanish at its last node (compact support)")

    @property
    def slopes(self):
        return np.diff(self.phi) / np.diff(self.r)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= self.r[-1], np.interp(t, self.r, self.phi), 0.0)

    def scaled(self, c):
        return RadialTestFunction(self.r, c * self.phi, self.geometry, self.name, dict(self.params))

    def dilated(self, lam):
        """``phi(lam * r)``."""
        return RadialTestFunction(self.r / lam, self.phi, self.geometry, self.name, dict(self.params))

    def as_piecewise(self):
        return PiecewiseFunction.linear(self.r, self.phi, self.geometry)

    def describe(self):
        return {"family": self.name, **self.params}


@dataclass
class InequalityCheck:
    lhs: float
    rhs: float
    passed: bool
    ratio: float | None = None
    function: dict = field(default_factory=dict)

    def __iter__(self):
        if self.ratio is None:
            return iter((self.lhs, self.rhs, self.passed))
        return iter((self.lhs, self.rhs, self.ratio, self.passed))

    def as_row(self):
        return {"function": self.function, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": self.ratio, "pass": self.passed}


def dirichlet_energy(phi: RadialTestFunction, p: float) -> float:
    """``integral |phi'|**p A dr``, exact per cell."""
    V = phi.geometry.V
    return float(np.sum(np.abs(phi.slopes) ** p * (V(phi.r[1:]) - V(phi.r[:-1]))))


def _edges(phi):
    inner = [t for t in phi.geometry.radius_breakpoints if phi.r[0] < t < phi.r[-1]]
    return np.unique(np.concatenate([phi.r, inner]))


def _radial_integral(phi, g, sigma_at_zero=None):
    """``integral g(r) dr`` over the support, cell by cell.

    With ``sigma_at_zero`` the first cell (if it starts at 0) goes through
    the singular-endpoint substitution.
    """
    edges = _edges(phi)
    total = 0.0
    if sigma_at_zero is not None and edges[0] == 0.0:
        total += quad(g, 0.0, float(edges[1]), singularity_exponent=sigma_at_zero, rel_tol=QUAD_TOL)
        edges = edges[1:]
    if edges.size > 1:
        vals, _ = segment_integrals(g, edges, rel_tol=QUAD_TOL)
        total += float(vals.sum())
    return total


def _w_factor(profile, N, V):
    """``w(V)**-1 = h(V) / (C_N V**((N-1)/N))``."""
    return profile.h(V) / (profile.C_N * V ** ((N - 1.0) / N))


def _constants(profile, geometry, p, q=None, constants=None):
    if constants is None:
        constants = compute_constants(profile, p, geometry)
    if not constants.hyperbolic:
        raise DomainError(f"profile {profile.name!r} is not {p}-hyperbolic")
    return constants


def verify_sobolev(profile: IsoperimetricProfile, geometry: ModelGeometry, p: float,
                   phi: RadialTestFunction, rel_tol: float = 1e-6, constants=None) -> InequalityCheck:
    """``lhs = (integral phi**p* w(V)**-p* A dr)**(1/p*)`` against ``C1 * energy**(1/p)``.

    ``ratio`` is the Sobolev quotient ``lhs / energy**(1/p)``.
    """
    N = geometry.N
    c = _constants(profile, geometry, p, constants=constants)
    ps = N * p / (N - p)
    V, A = geometry.V, geometry.A

    def g(r):
        v = V(r)
        return phi(r) ** ps * _w_factor(profile, N, v) ** ps * A(r)

    lhs = _radial_integral(phi, g) ** (1.0 / ps)
    D = dirichlet_energy(phi, p) ** (1.0 / p)
    rhs = c.C1 * D
    ratio = lhs / D if D > 0 else 0.0
    return InequalityCheck(lhs, rhs, lhs <= rhs * (1.0 + rel_tol), ratio, phi.describe())


def verify_hardy(profile: IsoperimetricProfile, geometry: ModelGeometry, p: float,
                 phi: RadialTestFunction, rel_tol: float = 1e-6, constants=None) -> InequalityCheck:
    """``integral (phi/r)**p A dr`` against ``C2 * energy``; ``ratio`` is their quotient over energy."""
    N = geometry.N
    if phi.r[0] == 0.0 and phi.phi[0] != 0.0 and p >= N:
        raise DomainError("(phi/r)**p is not integrable at 0 when phi(0) != 0 and p >= N")
    c = _constants(profile, geometry, p, constants=constants)
    A = geometry.A

    def g(r):
        return (phi(r) / r) ** p * A(r)

    sigma = (N - 1.0 - p) if phi.phi[0] != 0.0 else None
    lhs = _radial_integral(phi, g, sigma)
    E = dirichlet_energy(phi, p)
    rhs = c.C2 * E
    ratio = lhs / E if E > 0 else 0.0
    return InequalityCheck(lhs, rhs, lhs <= rhs * (1.0 + rel_tol), ratio, phi.describe())


def verify_hardy_sobolev(profile: IsoperimetricProfile, geometry: ModelGeometry, p: float, q: float,
                         phi: RadialTestFunction, rel_tol: float = 1e-6,
                         constants=None) -> InequalityCheck:
    """``integral phi**p*(q) r**-q w(V)**-(p*(q)-q) A dr`` against
    ``K * energy**((N-q)/(N-p))`` with ``p*(q) = p(N-q)/(N-p)``."""
    N = geometry.N
    if not q < p:
        raise DomainError(f"need q < p, got q={q}, p={p}")
    c = _constants(profile, geometry, p, constants=constants)
    K = hardy_sobolev_constant(c.C1, c.C2, N, p, q)
    pq = p * (N - q) / (N - p)
    V, A = geometry.V, geometry.A

    def g(r):
        return (phi(r) ** pq * r ** -q * _w_factor(profile, N, V(r)) ** (pq - q) * A(r))

    sigma = (N - 1.0 - q) if (phi.phi[0] != 0.0 and q > 0) else None
    lhs = _radial_integral(phi, g, sigma)
    E = dirichlet_energy(phi, p)
    rhs = K * E ** ((N - q) / (N - p))
    ratio = lhs / E ** ((N - q) / (N - p)) if E > 0 else 0.0
    return InequalityCheck(lhs, rhs, lhs <= rhs * (1.0 + rel_tol), ratio, phi.describe())


# ---------------------------------------------------------------- families

def _scale(geometry):
    rb = geometry.radius_breakpoints
    return float(math.sqrt(rb[0] * rb[-1])) if rb else 1.0


def tent(geometry, R=1.0):
    return RadialTestFunction([0.0, R], [1.0, 0.0], geometry, "tent", {"R": R})


def bump(geometry, R=1.0, nodes=400):
    r = R * np.linspace(0.0, 5.0, nodes)
    phi = np.exp(-(r / R) ** 2) - math.exp(-25.0)
    phi[-1] = 0.0
    return RadialTestFunction(r, np.maximum(phi, 0.0), geometry, "bump", {"R": R})


def talenti(geometry, p, eps=1.0, cutoff=1e-10, nodes=4000):
    """``(eps + r**p')**(-(N-p)/p)`` minus its value where it drops to ``cutoff`` of the peak."""
    N = geometry.N
    pc = p / (p - 1.0)
    a = (N - p) / p
    peak = eps**-a
    # (eps + R**p') / eps = cutoff**(-1/a)
    R = (eps * (cutoff ** (-1.0 / a) - 1.0)) ** (1.0 / pc)
    r0 = eps ** (1.0 / pc) * 1e-4
    r = np.concatenate([[0.0], np.geomspace(r0, R, nodes - 1)])
    phi = (eps + r**pc) ** -a - (eps + R**pc) ** -a
    phi[-1] = 0.0
    return RadialTestFunction(r, np.maximum(phi, 0.0) / peak, geometry, "talenti",
                              {"eps": eps, "cutoff": cutoff, "R": float(R)})


def hardy_probe(geometry, p, delta, r1=1e-10, r2=1e10, ramp=10.0, per_decade=100):
    """``r**(-(N-p)/p + delta)`` on ``[r1, r2]`` with ramps linear in ``log r``
    down to 0 at ``r1/ramp`` and ``r2*ramp``."""
    N = geometry.N
    e = -(N - p) / p + delta
    lo, hi = r1 / ramp, r2 * ramp
    n = min(MAX_NODES - 1, int(math.log10(hi / lo) * per_decade) + 1)
    r = np.geomspace(lo, hi, n)
    core = np.clip(r, r1, r2) ** e
    up = np.clip(np.log(r / lo) / math.log(ramp), 0.0, 1.0)
    down = np.clip(np.log(hi / r) / math.log(ramp), 0.0, 1.0)
    phi = core * np.minimum(up, down)
    phi[0] = phi[-1] = 0.0
    phi = phi / phi.max()
    return RadialTestFunction(r, phi, geometry, "power_cutoff",
                              {"delta": delta, "r1": r1, "r2": r2, "ramp": ramp})


def random_monotone(geometry, rng, scale=1.0, nodes=None):
    n = int(nodes or rng.integers(3, 60))
    r = np.sort(scale * 10.0 ** rng.uniform(-2.0, 2.0, n))
    r = np.unique(np.concatenate([[0.0], r]))
    phi = np.sort(rng.random(r.size))[::-1]
    phi[-1] = 0.0
    return RadialTestFunction(r, phi, geometry, "random_monotone", {"nodes": int(r.size)})


def random_radial(geometry, rng, scale=1.0, nodes=None):
    n = int(nodes or rng.integers(3, 60))
    r = np.sort(scale * 10.0 ** rng.uniform(-2.0, 2.0, n))
    r = np.unique(np.concatenate([[0.0], r]))
    phi = rng.random(r.size)
    phi[0] = phi[0] * float(rng.integers(0, 2))
    phi[-1] = 0.0
    return RadialTestFunction(r, phi, geometry, "random", {"nodes": int(r.size)})


def family_functions(geometry: ModelGeometry, p: float, family: str, budget: int,
                     seed: int | None = None):
    """Yield ``budget`` radial test functions from ``family``."""
    if family not in VERIFY_FAMILIES:
        raise DomainError(f"unknown family {family!r}; choose from {VERIFY_FAMILIES}")
    if budget < 1:
        raise DomainError("budget must be positive")
    s = _scale(geometry)
    scales = s * np.geomspace(1e-2, 1e2, budget) if budget > 1 else np.array([s])
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    for i in range(budget):
        if family == "tent":
            yield tent(geometry, float(scales[i]))
        elif family == "bump":
            yield bump(geometry, float(scales[i]))
        elif family == "talenti":
            eps = float(scales[i]) ** (p / (p - 1.0))
            yield talenti(geometry, p, eps)
        elif family == "power_cutoff":
            deltas = (0.2, 0.1, 0.05)
            yield hardy_probe(geometry, p, deltas[i % 3] / (2 ** (i // 3)))
        elif family == "random_monotone":
            yield random_monotone(geometry, rng, s)
        else:
            yield random_radial(geometry, rng, s)


def sobolev_quotient_sweep(profile: IsoperimetricProfile, geometry: ModelGeometry, p: float,
                           family: str = "talenti", budget: int = 20, seed: int | None = None,
                           rel_tol: float = 1e-6, constants=None):
    """``(max_quotient, report)`` over ``budget`` members of ``family``."""
    c = _constants(profile, geometry, p, constants=constants)
    rows = []
    best = 0.0
    for phi in family_functions(geometry, p, family, budget, seed):
        chk = verify_sobolev(profile, geometry, p, phi, rel_tol, constants=c)
        rows.append(chk.as_row())
        best = max(best, chk.ratio)
    report = {
        "family": family,
        "budget": budget,
        "seed": seed if seed is not None else DEFAULT_SEED,
        "C1": c.C1,
        "max_quotient": best,
        "max_over_C1": best / c.C1,
        "all_pass": all(r["pass"] for r in rows),
        "rows": rows,
    }
    if geometry.name == "euclidean":
        report["S_N_p"] = sobolev_best_constant(geometry.N, p)
    return best, report
