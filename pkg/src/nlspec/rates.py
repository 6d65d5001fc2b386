"""Closed-form eigenvalue bounds from the rate-function pipeline.

The lower-bound machinery inverts the criterion

    g(s) = s^{d / a(PhiInv(2/s) + 1)} * phi(kappa + PhiInv(2/s))^2

to a rate Gamma(r) = inf{s > 0 : g(s) >= 1/r}, integrates Gamma(r)/r to
lam(t), and turns that into the bound delta1 / lam(delta2 n).  The
remaining bounds are direct power laws, the variable-order correction
with its exp(delta sqrt(log n)) factor, and a heat-trace lower bound.

The multiplicative constants (delta1, delta2, delta, c_delta) are
calibration inputs throughout; only exponents and orderings are
intrinsic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (DivergentRate, EmptyCriterion, InadmissibleDelta,
                     WindowTooNarrow)
from .operators import (JumpKernel, Potential, ReferenceFunction, Symbol,
                        growth_phi_inverse, sphere_surface)

__all__ = [
    "RateProfile",
    "BoundCurve",
    "gamma_rate",
    "lambda_integral",
    "lambda_integral_from",
    "thm23_lower",
    "thm24_power",
    "ex21_lower",
    "ex21_delta_max",
    "trace_lower",
    "heat_trace_factors",
    "curve_thm23",
    "curve_thm24",
    "curve_ex21",
    "curve_trace",
    "profile_from_parts",
]

_S_LO = 1e-12
_S_HI = 1e6


@dataclass
class RateProfile:
    """Inputs of the rate criterion: a(r), PhiInv, phi, kappa, d."""

    order: Callable[[float], float]
    phi_inv: Callable[[float], float]
    phi_ref: ReferenceFunction
    kappa: float
    d: int
    _monotone: bool | None = field(default=None, repr=False, compare=False)

    def criterion(self, s: float) -> float:
        rad = self.phi_inv(2.0 / s)
        a = self.order(rad + 1.0)
        phi = float(self.phi_ref.profile(self.kappa + rad))
        return s ** (self.d / a) * phi * phi

    def criterion_monotone(self) -> bool:
        """One-off scan for monotonicity of g on the search window."""
        if self._monotone is None:
            ss = np.logspace(math.log10(_S_LO), math.log10(_S_HI), 400)
            gs = np.array([self.criterion(s) for s in ss])
            self._monotone = bool(np.all(np.diff(gs) >= -1e-12 * gs[1:]))
        return self._monotone


def profile_from_parts(kernel: JumpKernel | float, V: Potential,
                       phi_ref: ReferenceFunction, d: int,
                       kappa: float | None = None) -> RateProfile:
    """Assemble a RateProfile from a kernel (or constant order) and a potential."""
    if isinstance(kernel, (int, float)):
        alpha = float(kernel)
        order = lambda r: alpha
        kap = 1.0 if kappa is None else kappa
    else:
        order = kernel.order_inf
        kap = kernel.kappa if kappa is None else kappa
        if not math.isfinite(kap):
            kap = 1.0
    return RateProfile(order=order,
                       phi_inv=lambda r: growth_phi_inverse(V, r),
                       phi_ref=phi_ref, kappa=kap, d=d)


def gamma_rate(profile: RateProfile, r: float, rtol: float = 1e-10) -> float:
    """Gamma(r) = inf{s > 0 : g(s) >= 1/r}, nonincreasing in r."""
    if r <= 0:
        raise ValueError("r must be positive")
    target = 1.0 / r
    g = profile.criterion
    if g(_S_LO) >= target:
        return _S_LO
    if profile.criterion_monotone():
        if g(_S_HI) < target:
            raise EmptyCriterion(
                f"criterion stays below 1/r = {target:g} on the search window")
        lo, hi = _S_LO, _S_HI
        # bisection in log s
        while hi / lo - 1.0 > rtol:
            mid = math.sqrt(lo * hi)
            if g(mid) >= target:
                hi = mid
            else:
                lo = mid
        return hi
    # non-monotone fallback: grid scan for the first crossing, then refine
    ss = np.logspace(math.log10(_S_LO), math.log10(_S_HI), 4000)
    for i, s in enumerate(ss):
        if g(s) >= target:
            lo = ss[i - 1] if i else _S_LO
            hi = s
            while hi / lo - 1.0 > rtol:
                mid = math.sqrt(lo * hi)
                if g(mid) >= target:
                    hi = mid
                else:
                    lo = mid
            return hi
    raise EmptyCriterion(f"criterion stays below 1/r = {target:g} on the search window")


def lambda_integral_from(gamma: Callable[[float], float], t: float,
                         T: float | None = None) -> float:
    """lam(t) = int_t^inf Gamma(r)/r dr for an arbitrary rate Gamma.

    Quadrature on [t, T] in log coordinates plus an analytically
    integrated power-law tail fitted on the last decade.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if T is None:
        T = max(1e6, 1e4 * t)
    body, _ = integrate.quad(lambda u: gamma(math.exp(u)),
                             math.log(t), math.log(T), limit=400)
    rr = np.logspace(math.log10(T / 10.0), math.log10(T), 10)
    gg = np.array([gamma(r) for r in rr])
    slope, logc = np.polyfit(np.log(rr), np.log(gg), 1)
    if slope >= -1e-6:
        raise DivergentRate(f"fitted tail exponent of Gamma is {slope:.3g} >= 0")
    tail = math.exp(logc) * T**slope / (-slope)
    return body + tail


def lambda_integral(profile: RateProfile, t: float) -> float:
    """lam(t) for the profile's own Gamma; decreasing in t."""
    return lambda_integral_from(lambda r: gamma_rate(profile, r), t)


def thm23_lower(profile: RateProfile, delta1: float, delta2: float, n: float) -> float:
    """Lower bound delta1 / lam(delta2 * n); nondecreasing in n."""
    if delta1 <= 0 or delta2 <= 0:
        raise ValueError("delta1 and delta2 must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    return delta1 / lambda_integral(profile, delta2 * n)


def weyl_exponent(d: int, theta: float, alpha: float) -> float:
    """The two-sided growth exponent theta*alpha / (d*(theta+alpha))."""
    return theta * alpha / (d * (theta + alpha))


def thm24_power(d: int, theta: float, alpha: float, delta: float, n: float,
                direction: str = "lower") -> float:
    """delta * n^{theta*alpha/(d(theta+alpha))}; direction is a provenance tag."""
    if direction not in ("lower", "upper"):
        raise ValueError("direction must be 'lower' or 'upper'")
    if not (d >= 1 and theta > 0 and 0 < alpha < 2 and delta > 0):
        raise ValueError("invalid parameters")
    return delta * n ** weyl_exponent(d, theta, alpha)


def ex21_delta_max(d: int, theta: float, alpha0: float, beta1: float) -> float:
    """Upper edge of the admissible delta window of the variable-order bound."""
    return (d * beta1 * math.sqrt(theta) / alpha0**2
            * (d * (alpha0 + theta) / (alpha0 * theta)) ** 1.5)


def ex21_lower(d: int, theta: float, alpha0: float, beta1: float,
               delta: float, c_delta: float, n: float) -> float:
    """c(delta) n^{theta*alpha0/(d(theta+alpha0))} exp(delta sqrt(log n))."""
    dmax = ex21_delta_max(d, theta, alpha0, beta1)
    if not 0 < delta < dmax:
        raise InadmissibleDelta(f"delta must lie in (0, {dmax:g}), got {delta}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return (c_delta * n ** weyl_exponent(d, theta, alpha0)
            * math.exp(delta * math.sqrt(math.log(n))))


# ---------------------------------------------------------------------------
# heat-trace lower bound


def _rho1(sym: Symbol, d: int, t: float) -> float:
    """(2 pi)^{-d} int exp(-t psi(xi)) d xi."""
    from .operators import IsotropicStable

    if isinstance(sym, IsotropicStable):
        val, _ = integrate.quad(
            lambda s: s ** (d - 1) * math.exp(-t * s**sym.alpha),
            0.0, np.inf, limit=200)
        return sphere_surface(d) * val / (2.0 * math.pi) ** d
    if d != 2:
        raise ValueError("anisotropic symbols are two-dimensional here")

    # quadrant integral, psi even in each coordinate
    def radial(angle: float) -> float:
        u = np.array([math.cos(angle), math.sin(angle)])
        val, _ = integrate.quad(
            lambda s: s * math.exp(-t * float(np.asarray(sym.evaluate(s * u)).ravel()[0])),
            0.0, np.inf, limit=200)
        return val

    val, _ = integrate.quad(radial, 0.0, math.pi / 2.0, limit=100)
    return 4.0 * val / (2.0 * math.pi) ** 2


def _rho2(V: Potential, d: int, t: float) -> float:
    """int exp(-2 t V(x)) dx for a radial potential."""
    val, _ = integrate.quad(
        lambda s: s ** (d - 1) * math.exp(-2.0 * t * float(V.radial(s))),
        0.0, np.inf, limit=200)
    return sphere_surface(d) * val


def heat_trace_factors(sym: Symbol, V: Potential, d: int,
                       t_grid: np.ndarray) -> np.ndarray:
    """rho1(t) * rho2(t) on a grid of times."""
    return np.array([_rho1(sym, d, t) * _rho2(V, d, t) for t in t_grid])


def trace_lower(sym: Symbol, V: Potential, n: int, t_window=(1e-4, 10.0),
                d: int = 1, grid_points: int = 80) -> float:
    """Heat-trace lower bound, maximized over a log-spaced t grid.

    Every fixed t > 0 yields a valid lower bound (1/2t) log((n+1)/(rho1 rho2)),
    so the supremum over the window is one too; clamped at 0.
    Raises WindowTooNarrow when the maximizer sits on the window boundary.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = t_window
    if not 0 < lo < hi:
        raise ValueError("invalid t window")
    tt = np.logspace(math.log10(lo), math.log10(hi), grid_points)
    rho = heat_trace_factors(sym, V, d, tt)
    vals = np.log((n + 1) / rho) / (2.0 * tt)
    i = int(np.argmax(vals))
    if i in (0, grid_points - 1):
        raise WindowTooNarrow(
            f"trace bound maximizer at t = {tt[i]:g} on the window boundary")
    return max(0.0, float(vals[i]))


# ---------------------------------------------------------------------------
# bound curves


@dataclass(frozen=True)
class BoundCurve:
    """n -> bound value with provenance and calibrated constants."""

    source: str
    constants: dict
    evaluator: Callable[[float], float]
    n_min: int = 1
    side: str = "lower"

    def __call__(self, n: float) -> float:
        if n < self.n_min:
            raise ValueError(f"curve {self.source} valid only for n >= {self.n_min}")
        return self.evaluator(n)


def curve_thm23(profile: RateProfile, delta1: float, delta2: float) -> BoundCurve:
    return BoundCurve(source="thm2.3",
                      constants={"delta1": delta1, "delta2": delta2},
                      evaluator=lambda n: thm23_lower(profile, delta1, delta2, n))


def curve_thm24(d: int, theta: float, alpha: float, delta: float,
                direction: str) -> BoundCurve:
    return BoundCurve(source=f"thm2.4-{direction}",
                      constants={"delta": delta, "d": d, "theta": theta, "alpha": alpha},
                      evaluator=lambda n: thm24_power(d, theta, alpha, delta, n, direction),
                      side=direction)


def curve_ex21(d: int, theta: float, alpha0: float, beta1: float,
               delta: float, c_delta: float) -> BoundCurve:
    return BoundCurve(source="ex2.1",
                      constants={"delta": delta, "c_delta": c_delta,
                                 "alpha0": alpha0, "beta1": beta1,
                                 "d": d, "theta": theta},
                      evaluator=lambda n: ex21_lower(d, theta, alpha0, beta1,
                                                     delta, c_delta, n))


def curve_trace(sym: Symbol, V: Potential, d: int,
                t_window=(1e-4, 10.0), grid_points: int = 80) -> BoundCurve:
    """Heat-trace curve; rho1*rho2 is precomputed once on the t grid."""
    lo, hi = t_window
    tt = np.logspace(math.log10(lo), math.log10(hi), grid_points)
    rho = heat_trace_factors(sym, V, d, tt)

    def evaluator(n: float) -> float:
        vals = np.log((n + 1) / rho) / (2.0 * tt)
        i = int(np.argmax(vals))
        if i in (0, grid_points - 1):
            raise WindowTooNarrow(
                f"trace bound maximizer at t = {tt[i]:g} on the window boundary")
        return max(0.0, float(vals[i]))

    return BoundCurve(source="prop4.1",
                      constants={"t_lo": lo, "t_hi": hi, "grid_points": grid_points},
                      evaluator=evaluator)
