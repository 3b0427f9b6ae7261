"""Distribution functions, decreasing rearrangement and the classical
rearrangement inequalities, checked numerically.

Step functions built from ``Fraction`` data stay exact end to end: the
rearrangement is a sort, and every integral is a finite rational sum.
Piecewise-linear functions are handled cell by cell; on a radial model
geometry the measure of ``[a, b]`` is ``V(b) - V(a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError
from .quad import segment_integrals

__all__ = [
    "PiecewiseFunction",
    "distribution_function",
    "decreasing_rearrangement",
    "check_cavalieri",
    "check_hardy_littlewood",
    "check_polya_szego",
    "DEFAULT_LEVELS",
]

DEFAULT_LEVELS = 10_000


def _exact(seq):
    return all(isinstance(v, Rational) for v in seq)


@dataclass(frozen=True)
class PiecewiseFunction:
    """Step (``values`` per cell) or linear (``values`` per node) function.

    ``geometry`` switches the measure from ``dx`` to ``A(x) dx``.
    """

    breakpoints: tuple
    values: tuple
    kind: str = "step"
    geometry: object = None

    def __post_init__(self):
        bp, vals = tuple(self.breakpoints), tuple(self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if self.kind not in ("step", "linear"):
            raise DomainError(f"kind must be 'step' or 'linear', got {self.kind!r}")
        if len(bp) < 2:
            raise DomainError("need at least two breakpoints")
        if any(not b > a for a, b in zip(bp, bp[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if bp[0] < 0:
            raise DomainError("breakpoints must be nonnegative")
        want = len(bp) - 1 if self.kind == "step" else len(bp)
        if len(vals) != want:
            raise DomainError(f"{self.kind} function on {len(bp)} breakpoints needs {want} values")
        if not all(math.isfinite(float(v)) for v in vals):
            raise DomainError("values must be finite")

    @classmethod
    def step(cls, breakpoints, values, geometry=None):
        return cls(tuple(breakpoints), tuple(values), "step", geometry)

    @classmethod
    def linear(cls, breakpoints, values, geometry=None):
        return cls(tuple(float(b) for b in breakpoints), tuple(float(v) for v in values),
                   "linear", geometry)

    @classmethod
    def unit_cells(cls, values):
        """Step function with value ``values[i]`` on ``[i, i+1]``."""
        return cls.step(range(len(values) + 1), values)

    @property
    def exact(self):
        return self.kind == "step" and self.geometry is None and _exact(self.breakpoints + self.values)

    @property
    def x(self):
        return np.asarray(self.breakpoints, dtype=float)

    @property
    def y(self):
        return np.asarray(self.values, dtype=float)

    def measure(self, a, b):
        """Measure of ``[a, b]`` (vectorized); exact for rational Lebesgue data."""
        if self.geometry is None:
            return b - a
        V = self.geometry.V
        return V(np.asarray(b, dtype=float)) - V(np.asarray(a, dtype=float))

    def cell_measures(self):
        bp = self.breakpoints
        if self.exact:
            return [b - a for a, b in zip(bp, bp[1:])]
        return self.measure(self.x[:-1], self.x[1:])

    def total_measure(self):
        m = self.cell_measures()
        return sum(m) if self.exact else float(np.sum(m))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x, y = self.x, self.y
        inside = (t >= x[0]) & (t <= x[-1])
        if self.kind == "linear":
            out = np.interp(t, x, y)
        else:
            idx = np.clip(np.searchsorted(x, t, side="right") - 1, 0, y.size - 1)
            out = y[idx]
        return np.where(inside, out, 0.0)

    def sup_abs(self):
        return max(abs(v) for v in self.values)

    def abs_pieces(self):
        """Linear only: cells split at sign changes, as ``(a, b, |u(a)|, |u(b)|)`` arrays."""
        if self.kind != "linear":
            raise DomainError("abs_pieces is defined for linear functions")
        x, y = self.x, self.y
        a, b, ya, yb = [], [], [], []
        for i in range(x.size - 1):
            if y[i] * y[i + 1] < 0:
                z = x[i] + (x[i + 1] - x[i]) * y[i] / (y[i] - y[i + 1])
                a += [x[i], z]
                b += [z, x[i + 1]]
                ya += [abs(y[i]), 0.0]
                yb += [0.0, abs(y[i + 1])]
            else:
                a.append(x[i])
                b.append(x[i + 1])
                ya.append(abs(y[i]))
                yb.append(abs(y[i + 1]))
        return np.array(a), np.array(b), np.array(ya), np.array(yb)

    def describe(self):
        return {"kind": self.kind, "cells": len(self.breakpoints) - 1,
                "geometry": None if self.geometry is None else self.geometry.name}


def _linear_superlevel(u, t, strict=True):
    """Measure of ``{|u| > t}`` for scalar or array ``t`` (linear ``u``)."""
    a, b, ya, yb = u.abs_pieces()
    tt = np.asarray(t, dtype=float)
    col = tt.reshape(-1, 1)
    above = (ya > col) if strict else (ya >= col)
    above_b = (yb > col) if strict else (yb >= col)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = a + (b - a) * (col - ya) / (yb - ya)
    lo = np.where(above, a, np.where(above_b, z, b))
    hi = np.where(above_b, b, np.where(above, z, a))
    lo = np.where(np.isfinite(lo), lo, a)
    hi = np.where(np.isfinite(hi), hi, a)
    hi = np.maximum(hi, lo)
    out = np.sum(u.measure(lo, hi), axis=1)
    return float(out[0]) if tt.ndim == 0 else out.reshape(tt.shape)


def distribution_function(u: PiecewiseFunction, t, strict: bool = True):
    """Measure of ``{|u| > t}`` (``{|u| >= t}`` with ``strict=False``).

    Exact (a ``Fraction``) for rational step data.
    """
    if u.kind == "step":
        ms = u.cell_measures()
        if strict:
            picks = [m for m, v in zip(ms, u.values) if abs(v) > t]
        else:
            picks = [m for m, v in zip(ms, u.values) if abs(v) >= t]
        if u.exact:
            return sum(picks, Fraction(0))
        return float(np.sum(picks)) if picks else 0.0
    return _linear_superlevel(u, t, strict)


def decreasing_rearrangement(u: PiecewiseFunction, levels: int = DEFAULT_LEVELS) -> PiecewiseFunction:
    """Nonincreasing function on ``[0, |supp|]`` equimeasurable with ``|u|``.

    Step input: cells sorted by ``|value|`` (stable, exact).  Linear input:
    knots ``(nu(t), t)`` at every node level, plus ``levels`` uniform levels
    when the measure is weighted (for Lebesgue measure nu is linear between
    node levels, so the node levels alone are exact).
    """
    if u.kind == "step":
        ms = u.cell_measures()
        order = sorted(range(len(u.values)), key=lambda i: -abs(u.values[i]))
        zero = Fraction(0) if u.exact else 0.0
        bp = [zero]
        for i in order:
            bp.append(bp[-1] + ms[i])
        vals = [abs(u.values[i]) for i in order]
        if not u.exact:
            bp = [float(b) for b in bp]
        # zero-measure cells (possible under a weighted measure) are dropped
        keep_bp, keep_vals = [bp[0]], []
        for b, v in zip(bp[1:], vals):
            if b > keep_bp[-1]:
                keep_bp.append(b)
                keep_vals.append(v)
        return PiecewiseFunction.step(keep_bp, keep_vals)

    ts = set(np.abs(u.y).tolist())
    if u.geometry is not None and levels:
        ts.update(np.linspace(0.0, u.sup_abs(), levels + 1).tolist())
    ts = np.array(sorted(ts, reverse=True))
    # both one-sided limits, so plateaus of |u| become flat pieces of u*
    s_strict = _linear_superlevel(u, ts, strict=True)
    s_weak = _linear_superlevel(u, ts, strict=False)
    s_all = np.column_stack([s_strict, s_weak]).ravel()
    t_all = np.repeat(ts, 2)
    s_pts, t_pts = [], []
    for s, t in zip(s_all.tolist(), t_all.tolist()):
        if not s_pts or s > s_pts[-1]:
            s_pts.append(s)
            t_pts.append(t)
    if s_pts[0] > 0.0:
        s_pts.insert(0, 0.0)
        t_pts.insert(0, t_pts[0])
    total = u.total_measure()
    if total > s_pts[-1]:
        s_pts.append(total)
        t_pts.append(0.0)
    return PiecewiseFunction.linear(s_pts, t_pts)


def _gl_cells(f, x):
    vals, _ = segment_integrals(f, x, rel_tol=1e-13)
    return float(vals.sum())


def _integral_abs_pow(u: PiecewiseFunction, p):
    if u.kind == "step":
        ms = u.cell_measures()
        if u.exact and isinstance(p, int):
            return sum((abs(v) ** p * m for v, m in zip(u.values, ms)), Fraction(0))
        return float(np.sum(np.abs(u.y) ** p * np.asarray(ms, dtype=float)))
    a, b, _, _ = u.abs_pieces()
    edges = np.unique(np.concatenate([a, b]))
    if u.geometry is None:
        return _gl_cells(lambda t: np.abs(u(t)) ** p, edges)
    A = u.geometry.A
    return _gl_cells(lambda t: np.abs(u(t)) ** p * A(t), edges)


def check_cavalieri(u: PiecewiseFunction, p=2):
    """``(integral |u|**p, integral u***p, |difference|)``."""
    if not p >= 1:
        raise DomainError(f"need p >= 1, got {p}")
    lhs = _integral_abs_pow(u, p)
    rhs = _integral_abs_pow(decreasing_rearrangement(u), p)
    return lhs, rhs, abs(lhs - rhs)


def _product_integral(u: PiecewiseFunction, v: PiecewiseFunction):
    if u.kind == "step" and v.kind == "step" and u.geometry is None and v.geometry is None:
        exact = u.exact and v.exact
        edges = sorted(set(u.breakpoints) | set(v.breakpoints))
        total = Fraction(0) if exact else 0.0
        for a, b in zip(edges, edges[1:]):
            mid = (a + b) / 2
            total += _value_at(u, mid) * _value_at(v, mid) * (b - a)
        return total
    geom = u.geometry if u.geometry is not None else v.geometry
    edges = np.unique(np.concatenate([u.x, v.x]))
    if geom is None:
        return _gl_cells(lambda t: u(t) * v(t), edges)
    return _gl_cells(lambda t: u(t) * v(t) * geom.A(t), edges)


def _value_at(u, t):
    bp = u.breakpoints
    if t < bp[0] or t > bp[-1]:
        return 0
    for i in range(len(bp) - 1):
        if bp[i] <= t < bp[i + 1]:
            return u.values[i]
    return u.values[-1]


def check_hardy_littlewood(u: PiecewiseFunction, v: PiecewiseFunction):
    """``(integral u v, integral u* v*)``; the first never exceeds the second."""
    if (u.geometry is None) != (v.geometry is None) or (
            u.geometry is not None and u.geometry is not v.geometry):
        raise DomainError("u and v must live on the same measure")
    lhs = _product_integral(u, v)
    rhs = _product_integral(decreasing_rearrangement(u), decreasing_rearrangement(v))
    return lhs, rhs


def check_polya_szego(phi: PiecewiseFunction, profile, p: float):
    """Profile-weighted Dirichlet integral of ``phi*`` against that of ``phi``.

    ``phi`` is a radial, nonnegative, linear function on its geometry with
    ``phi(R_max) = 0``.  The left side is evaluated in the level variable,

        integral_0^max h(nu(t))**p |nu'(t)|**(1-p) dt,
        nu'(t) = -sum_k A(r_k(t)) / |phi'(r_k)|,

    which equals ``integral h(s)**p (-du*/ds)**p ds`` and is exact per band
    between node values.  The right side is ``sum |phi'|**p (V(b) - V(a))``.
    """
    if phi.kind != "linear" or phi.geometry is None:
        raise DomainError("phi must be a linear function on a geometry")
    if phi.values[-1] != 0.0:
        raise DomainError("phi must vanish at its last breakpoint (compact support)")
    if min(phi.values) < 0:
        raise DomainError("phi must be nonnegative")
    if not p > 1.0:
        raise DomainError(f"need p > 1, got {p}")
    g = phi.geometry
    x, y = phi.x, phi.y
    slope = np.diff(y) / np.diff(x)
    rhs = float(np.sum(np.abs(slope) ** p * (g.V(x[1:]) - g.V(x[:-1]))))
    if phi.sup_abs() == 0.0:
        return 0.0, 0.0

    moving = slope != 0.0
    ca, cb = x[:-1][moving], x[1:][moving]
    ya, yb, sl = y[:-1][moving], y[1:][moving], slope[moving]
    lo_v, hi_v = np.minimum(ya, yb), np.maximum(ya, yb)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        shape = t.shape
        tt = t.ravel()[:, None]
        active = (tt > lo_v) & (tt < hi_v)
        r = ca + (tt - ya) / sl
        r = np.clip(r, ca, cb)
        dnu = np.sum(np.where(active, g.A(r) / np.abs(sl), 0.0), axis=1)
        nu = _linear_superlevel(phi, tt[:, 0])
        hv = profile.h(np.maximum(nu, 1e-300))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(dnu > 0, hv**p * dnu ** (1.0 - p), 0.0)
        return out.reshape(shape)

    levels = np.unique(y)
    vals, _ = segment_integrals(integrand, levels, rel_tol=1e-12)
    return float(vals.sum()), rhs
