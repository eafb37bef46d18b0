"""Rotational catenoid profiles in R^n and the half-catenoid barrier.

The profile ``f`` solves ``f f'' = (n - 2) (1 + f'^2)`` with ``f(0) = a``,
``f'(0) = 0``.  Writing ``m = n - 2``, ``f^m / sqrt(1 + f'^2)`` is a first
integral, so in terms of the tangent angle ``theta`` one has
``f = a cos(theta)^(-1/m)`` and ``dx/dtheta = f / m``.  For ``n >= 4`` the
last integral converges at ``theta = pi/2`` and the profile reaches a
vertical tangent at finite ``x = w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq


class CatenoidError(ValueError):
    pass


@dataclass(frozen=True)
class Profile:
    n: int
    x: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    a: float
    w: float  # slab half-width, inf for n = 3
    drift: float = 0.0
    step: float = 0.0
    tail: tuple | None = field(default=None, repr=False)  # (x_s, theta_s, C)

    @property
    def m(self) -> int:
        return self.n - 2

    def first_integral(self) -> np.ndarray:
        return self.f ** self.m / np.sqrt(1.0 + self.fp ** 2)

    def _spline(self) -> CubicHermiteSpline:
        sp = getattr(self, "_sp", None)
        if sp is None:
            sp = CubicHermiteSpline(self.x, self.f, self.fp)
            object.__setattr__(self, "_sp", sp)
        return sp

    def value(self, t) -> np.ndarray:
        """``f(|t|)``; +inf at or beyond the slab boundary."""
        t = np.abs(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        inside = t <= self.x[-1]
        out[inside] = self._spline()(t[inside])
        rest = ~inside
        if np.any(rest):
            if self.tail is None:
                raise CatenoidError(f"profile only sampled up to x = {self.x[-1]:.6g}")
            out[rest] = [self._tail_value(s) for s in t[rest]]
        return out

    def _tail_value(self, t: float) -> float:
        xs, ths, c = self.tail
        if t >= self.w:
            return math.inf
        m = self.m

        def xrel(th):
            return _angle_integral(ths, th, m) * c / m - (t - xs)

        th = brentq(xrel, ths, math.pi / 2 - 1e-300, xtol=1e-15, rtol=1e-14)
        return c * math.cos(th) ** (-1.0 / m)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.x, self.f, self.fp])
        np.savetxt(path, data, delimiter=",", header="x1,f,fprime", comments="")


def _angle_integral(th0: float, th1: float, m: int) -> float:
    """``int_{th0}^{th1} cos(t)^(-1/m) dt`` with the endpoint singularity weighted out."""
    p0, p1 = math.pi / 2 - th1, math.pi / 2 - th0
    if p1 <= 0:
        return 0.0
    # integrand (sin p)^(-1/m) = (sin p / p)^(-1/m) * p^(-1/m)
    val, _ = quad(lambda p: (math.sin(p) / p) ** (-1.0 / m) if p > 0 else 1.0,
                  p0, p1, weight="alg", wvar=(-1.0 / m, 0.0), epsabs=1e-15, epsrel=1e-13) \
        if p0 == 0 else quad(lambda p: math.sin(p) ** (-1.0 / m), p0, p1,
                             epsabs=1e-15, epsrel=1e-13)
    return val


def _rk4_x(n: int, a0: float, step: float, x_stop: float | None, p_stop: float | None):
    m = n - 2

    def rhs(y):
        f, p = y
        return np.array([p, m * (1.0 + p * p) / f])

    xs, ys = [0.0], [np.array([a0, 0.0])]
    x, y = 0.0, ys[0]
    while True:
        if x_stop is not None and x >= x_stop - 1e-15:
            break
        if p_stop is not None and y[1] >= p_stop:
            break
        hstep = step if x_stop is None else min(step, x_stop - x)
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * hstep * k1)
        k3 = rhs(y + 0.5 * hstep * k2)
        k4 = rhs(y + hstep * k3)
        y = y + hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        x += hstep
        if not np.all(np.isfinite(y)):
            raise CatenoidError("integration diverged")
        xs.append(x)
        ys.append(y)
    ys = np.array(ys)
    return np.array(xs), ys[:, 0], ys[:, 1]


def _rk4_arclength(n: int, x0: float, f0: float, p0: float, step: float, p_stop: float):
    m = n - 2

    def rhs(y):
        _, f, th = y
        return np.array([math.cos(th), math.sin(th), m * math.cos(th) / f])

    y = np.array([x0, f0, math.atan(p0)])
    th_stop = math.atan(p_stop)
    out = [y]
    while y[2] < th_stop:
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * step * k1)
        k3 = rhs(y + 0.5 * step * k2)
        k4 = rhs(y + step * k3)
        y = y + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y)
    out = np.array(out)
    return out[1:, 0], out[1:, 1], np.tan(out[1:, 2])


def _integrate_once(n: int, a0: float, step: float, cap: float, slope_switch: float) -> Profile:
    m = n - 2
    if n == 3:
        x, f, fp = _rk4_x(n, a0, step, cap, None)
        prof = Profile(n, x, f, fp, a0, math.inf, step=step)
    else:
        x, f, fp = _rk4_x(n, a0, step, None, 1.0)
        xa, fa, pa = _rk4_arclength(n, x[-1], f[-1], fp[-1], step, slope_switch)
        x, f, fp = np.concatenate([x, xa]), np.concatenate([f, fa]), np.concatenate([fp, pa])
        th_s = math.atan(fp[-1])
        c = f[-1] * math.cos(th_s) ** (1.0 / m)
        w = x[-1] + c / m * _angle_integral(th_s, math.pi / 2, m)
        prof = Profile(n, x, f, fp, a0, w, step=step, tail=(x[-1], th_s, c))
    fi = prof.first_integral()
    drift = float(np.max(np.abs(fi / fi[0] - 1.0)))
    return replace(prof, drift=drift)


def integrate_profile(n: int, a0: float = 1.0, step: float = 1e-3, cap: float = 3.0,
                      slope_switch: float = 1e3, settle: float = 1e-10,
                      max_halvings: int = 6) -> Profile:
    """Integrate the profile for ``x_1 >= 0`` (classical RK4, step halving).

    For ``n = 3`` integration stops at ``x_1 = cap``; for ``n >= 4`` it switches
    to arclength once ``f' > 1`` and stops at ``f' = slope_switch``; the rest
    of the slab width comes from the first integral.
    """
    if n < 3:
        raise CatenoidError("n must be >= 3")
    if not (a0 > 0 and step > 0):
        raise CatenoidError("a0 and step must be positive")
    prof = _integrate_once(n, a0, step, cap, slope_switch)
    for _ in range(max_halvings):
        finer = _integrate_once(n, a0, prof.step / 2, cap, slope_switch)
        probe = np.linspace(0.0, 0.5 * min(prof.x[-1], finer.x[-1]), 65)
        change = float(np.max(np.abs(prof.value(probe) - finer.value(probe))))
        prof = finer
        if change < settle:
            break
    if prof.drift > 1e-6:
        raise CatenoidError(f"step too large: first-integral drift {prof.drift:.3e}")
    return prof


def slab_width_closed_form(n: int, a: float = 1.0) -> float:
    """Half-width from the first integral, via the Beta function."""
    from scipy.special import beta

    if n < 4:
        return math.inf
    m = n - 2
    return a / m * 0.5 * beta(0.5 * (1.0 - 1.0 / m), 0.5)


def normalize_to_unit_slab(p: Profile) -> Profile:
    """Homothety taking the slab half-width to 1."""
    if not math.isfinite(p.w):
        raise CatenoidError("n = 3 profile has no finite slab")
    s = 1.0 / p.w
    tail = None
    if p.tail is not None:
        xs, ths, c = p.tail
        tail = (xs * s, ths, c * s)
    return replace(p, x=p.x * s, f=p.f * s, a=p.a * s, w=1.0, step=p.step * s, tail=tail)


def half_catenoid_g(p: Profile, q) -> np.ndarray:
    """Height of the upper half catenoid over points ``q = (x_1, ..., x_{n-1})``.

    ``q`` may be one point or an array of shape ``(k, n-1)``.  Raises when a
    point lies outside the projected catenoid; returns +inf on the slab
    boundary.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if q.shape[1] != p.n - 1:
        raise CatenoidError(f"points must have {p.n - 1} coordinates")
    r2 = np.sum(q[:, 1:] ** 2, axis=1)
    f = p.value(q[:, 0])
    out = np.full(len(q), np.inf)
    fin = np.isfinite(f)
    slack = f[fin] ** 2 - r2[fin]
    if np.any(slack < -1e-12):
        raise CatenoidError("point outside the projected catenoid")
    out[fin] = np.sqrt(np.maximum(slack, 0.0))
    return out


@dataclass
class WaistVerdict:
    holds: bool
    bound: float
    sides: list
    n: int

    def to_dict(self) -> dict:
        return {"claim": "a_i < a/sqrt(n-2)", "n": self.n, "holds": self.holds,
                "bound": self.bound, "sides": list(self.sides)}


def waist_condition(a: float, sides, n: int) -> WaistVerdict:
    bound = a / math.sqrt(n - 2)
    return WaistVerdict(all(s < bound for s in sides), bound, list(sides), n)


def barrier_profile(n: int) -> Profile:
    """Profile used as the Scherk barrier: unit slab for n >= 4, a = 1 for n = 3."""
    prof = integrate_profile(n)
    return normalize_to_unit_slab(prof) if n >= 4 else prof
