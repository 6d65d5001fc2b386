"""Symbols, jump kernels, potentials and reference functions.

Everything here is a pure function of immutable parameter records, so
all operations are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .errors import CoincidentPoints, DivergentTail, NonConvexSymbol

__all__ = [
    "IsotropicStable",
    "AnisotropicSum",
    "LevyStable",
    "VariableOrder",
    "GeneralKernel",
    "PowerPotential",
    "TwoSidedPowerPotential",
    "SimplePower",
    "LogCorrected",
    "ClassSReport",
    "eval_symbol",
    "legendre",
    "eval_kernel",
    "growth_phi",
    "growth_phi_inverse",
    "tail_mass",
    "check_class_S",
    "stable_symbol_constant",
    "sphere_surface",
]


def sphere_surface(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} (2 for d=1, 2*pi for d=2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def stable_symbol_constant(d: int, alpha: float) -> float:
    """Constant c with  integral (1 - cos z.xi) |z|^{-(d+alpha)} dz = |xi|^alpha / c.

    c is the usual fractional-Laplacian normalization
    2^alpha Gamma((d+alpha)/2) / (pi^{d/2} |Gamma(-alpha/2)|).
    """
    num = 2.0**alpha * math.gamma((d + alpha) / 2.0)
    den = math.pi ** (d / 2.0) * abs(special.gamma(-alpha / 2.0))
    return num / den


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class IsotropicStable:
    """psi(xi) = |xi|^alpha, alpha in (0, 2)."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")

    def evaluate(self, xi) -> np.ndarray | float:
        xi = np.asarray(xi, dtype=float)
        r = np.abs(xi) if xi.ndim == 0 else np.linalg.norm(np.atleast_1d(xi), axis=-1)
        return r**self.alpha


@dataclass(frozen=True)
class AnisotropicSum:
    """psi(xi) = sum_i c_i (sum_j |xi_j|^{a_ij})^{b_i}.

    Each term is (c_i, (a_i1, ..., a_id), b_i) with b_i * max_j a_ij < 2.
    """

    terms: tuple[tuple[float, tuple[float, ...], float], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("at least one term required")
        dims = {len(t[1]) for t in self.terms}
        if len(dims) != 1:
            raise ValueError("all terms must share the axis count")
        for c, inner, b in self.terms:
            if c <= 0 or b <= 0 or any(a <= 0 for a in inner):
                raise ValueError("all term parameters must be positive")
            if b * max(inner) >= 2.0:
                raise ValueError(
                    f"term (c={c}, inner={inner}, outer={b}) violates outer*max(inner) < 2"
                )

    @property
    def dimension(self) -> int:
        return len(self.terms[0][1])

    def evaluate(self, xi) -> np.ndarray | float:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape[-1] != self.dimension:
            raise ValueError(f"expected last axis of size {self.dimension}")
        out = 0.0
        for c, inner, b in self.terms:
            s = np.sum(np.abs(xi) ** np.asarray(inner), axis=-1)
            out = out + c * s**b
        return out


Symbol = IsotropicStable | AnisotropicSum


def eval_symbol(sym: Symbol, xi) -> np.ndarray | float:
    """Evaluate psi(xi); total, even in xi, psi(0) = 0."""
    return sym.evaluate(xi)


def check_midpoint_convexity(sym: Symbol, d: int, samples: int = 64,
                             seed: int = 7, tol: float = 1e-9) -> bool:
    """Spot-check psi((x+y)/2) <= (psi(x)+psi(y))/2 on random pairs."""
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=5.0, size=(samples, d))
    y = rng.normal(scale=5.0, size=(samples, d))
    mid = sym.evaluate((x + y) / 2.0)
    avg = (np.asarray(sym.evaluate(x)) + np.asarray(sym.evaluate(y))) / 2.0
    return bool(np.all(mid <= avg + tol * (1.0 + np.abs(avg))))


def ray_log_slope(sym: Symbol, direction, radii=None) -> float:
    """Fitted slope of log psi vs log |xi| along a ray, for large |xi|."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    if radii is None:
        radii = np.logspace(3, 6, 16)
    vals = np.array([float(np.asarray(sym.evaluate(r * u)).ravel()[0]) for r in radii])
    slope, _ = np.polyfit(np.log(radii), np.log(vals), 1)
    return float(slope)


def legendre(sym: Symbol, x, freq_cap: float = 1e6, xtol: float = 1e-12) -> float:
    """Legendre transform psi*(x) = sup_xi (<x, xi> - psi(xi)).

    The supremum is taken along the ray xi = t * x/|x| (the supported
    symbol variants are radially monotone along rays).  Returns
    math.inf when the bracketing search escapes past freq_cap.

    Raises NonConvexSymbol when the midpoint convexity spot-check fails.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size
    if not check_midpoint_convexity(sym, d):
        raise NonConvexSymbol(f"{sym!r} fails the midpoint convexity check")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return 0.0
    u = x / r

    def g(t: float) -> float:
        return t * r - float(np.asarray(sym.evaluate(t * u)).ravel()[0])

    # expand a bracket [0, hi]; escape past the cap signals psi*(x) = +inf
    hi = 1.0
    while g(2.0 * hi) > g(hi):
        hi *= 2.0
        if hi > freq_cap:
            return math.inf
    res = optimize.minimize_scalar(lambda t: -g(t), bounds=(0.0, 2.0 * hi),
                                   method="bounded", options={"xatol": xtol})
    return max(0.0, float(-res.fun))


# ---------------------------------------------------------------------------
# jump kernels


@dataclass(frozen=True)
class LevyStable:
    """J(x, y) = |x-y|^{-(d+alpha)} 1{|x-y| <= kappa}."""

    d: int
    alpha: float
    kappa: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    def order(self, x, y) -> float:
        return self.alpha

    def amplitude(self, x, y) -> float:
        return 1.0

    def order_inf(self, r: float) -> float:
        """a(r) = inf over |x| v |y| <= r of the jump order."""
        return self.alpha

    @property
    def order_sup(self) -> float:
        return self.alpha


@dataclass(frozen=True)
class VariableOrder:
    """Variable order alpha(x, y) = alpha0 + beta1 / sqrt(log(beta2 + |x| + |y|))."""

    d: int
    alpha0: float
    beta1: float
    beta2: float
    kappa: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.alpha0 < 2.0:
            raise ValueError("alpha0 must lie in (0, 2)")
        if self.beta1 <= 0 or self.beta2 <= 1.0:
            raise ValueError("need beta1 > 0 and beta2 > 1")
        if self.alpha0 + self.beta1 / math.sqrt(math.log(self.beta2)) >= 2.0:
            raise ValueError("alpha0 + beta1/sqrt(log beta2) must stay below 2")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    def order(self, x, y) -> float:
        s = float(np.linalg.norm(np.atleast_1d(x))) + float(np.linalg.norm(np.atleast_1d(y)))
        return self.alpha0 + self.beta1 / math.sqrt(math.log(self.beta2 + s))

    def amplitude(self, x, y) -> float:
        return 1.0

    def order_inf(self, r: float) -> float:
        return self.alpha0 + self.beta1 / math.sqrt(math.log(self.beta2 + 2.0 * r))

    @property
    def order_sup(self) -> float:
        return self.alpha0 + self.beta1 / math.sqrt(math.log(self.beta2))


@dataclass(frozen=True)
class GeneralKernel:
    """J(x, y) = n(x, y) |x-y|^{-(d+alpha(x, y))} 1{|x-y| <= kappa}.

    order_fn and amplitude_fn take two point arrays; eps bounds the
    amplitude (eps <= n <= 1/eps) and alpha2 < 2 bounds the order.
    """

    d: int
    order_fn: Callable
    amplitude_fn: Callable
    eps: float
    alpha2: float
    kappa: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not 0.0 < self.alpha2 < 2.0:
            raise ValueError("alpha2 must lie in (0, 2)")

    def order(self, x, y) -> float:
        return float(self.order_fn(np.atleast_1d(x), np.atleast_1d(y)))

    def amplitude(self, x, y) -> float:
        return float(self.amplitude_fn(np.atleast_1d(x), np.atleast_1d(y)))

    def order_inf(self, r: float, samples: int = 64) -> float:
        grid = np.linspace(-r, r, samples)
        best = math.inf
        for xs in grid:
            for ys in grid:
                x = np.zeros(self.d); x[0] = xs
                y = np.zeros(self.d); y[0] = ys
                best = min(best, self.order(x, y))
        return best

    @property
    def order_sup(self) -> float:
        return self.alpha2


JumpKernel = LevyStable | VariableOrder | GeneralKernel


def eval_kernel(J: JumpKernel, x, y) -> float:
    """J(x, y); zero beyond the truncation radius, symmetric in (x, y)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        raise CoincidentPoints("jump kernel is singular on the diagonal")
    if r > J.kappa:
        return 0.0
    return J.amplitude(x, y) * r ** -(J.d + J.order(x, y))


def _sup_kernel_radial(J: JumpKernel, s: float) -> float:
    """sup_x J(x, x + z) at |z| = s (radial for the supported variants)."""
    if isinstance(J, LevyStable):
        return s ** -(J.d + J.alpha)
    if isinstance(J, VariableOrder):
        # |x| + |x+z| >= |z|, so the order ranges over
        # [alpha0, alpha0 + beta1/sqrt(log(beta2 + s))]
        a_hi = J.alpha0 + J.beta1 / math.sqrt(math.log(J.beta2 + s))
        a = a_hi if s < 1.0 else J.alpha0
        return s ** -(J.d + a)
    # general kernel: sample collinear configurations
    z = np.zeros(J.d)
    z[0] = s
    best = 0.0
    for xr in np.concatenate(([0.0], np.logspace(-2, 4, 25))):
        for sgn in (-1.0, 1.0):
            x = np.zeros(J.d)
            x[0] = sgn * xr
            best = max(best, J.amplitude(x, x + z) * s ** -(J.d + J.order(x, x + z)))
    return best


def tail_mass(J: JumpKernel, r: float) -> float:
    """integral over {|z| > r} of sup_x J(x, x + z) dz.

    Closed form for the power-law pieces; quadrature elsewhere.
    Raises DivergentTail when the infinite-range tail is not integrable.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if r >= J.kappa:
        return 0.0
    surf = sphere_surface(J.d)

    def power_tail(a: float, lo: float, hi: float) -> float:
        # surf * int_lo^hi s^{d-1} s^{-(d+a)} ds
        if math.isinf(hi):
            return surf / a * lo**-a
        return surf / a * (lo**-a - hi**-a)

    if isinstance(J, LevyStable):
        return power_tail(J.alpha, r, J.kappa)

    if isinstance(J, VariableOrder):
        total = 0.0
        near_hi = min(1.0, J.kappa)
        if r < near_hi:
            val, _ = integrate.quad(
                lambda s: s ** (J.d - 1) * _sup_kernel_radial(J, s), r, near_hi)
            total += surf * val
        lo = max(r, 1.0)
        if lo < J.kappa:
            total += power_tail(J.alpha0, lo, J.kappa)
        return total

    # general kernel: quadrature on [r, kappa] or [r, R] plus a fitted power tail
    hi = J.kappa if math.isfinite(J.kappa) else max(1e4, 100.0 * r)
    val, _ = integrate.quad(lambda s: s ** (J.d - 1) * _sup_kernel_radial(J, s),
                            r, hi, limit=200)
    total = surf * val
    if math.isinf(J.kappa):
        ss = np.logspace(math.log10(hi / 10.0), math.log10(hi), 12)
        ys = np.array([s ** (J.d - 1) * _sup_kernel_radial(J, s) for s in ss])
        slope, logc = np.polyfit(np.log(ss), np.log(ys), 1)
        if slope >= -1.0 - 1e-6:
            raise DivergentTail(f"fitted tail exponent {slope:.3f} >= -1")
        total += surf * math.exp(logc) * hi ** (slope + 1.0) / (-(slope + 1.0))
    return total


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class PowerPotential:
    """V(x) = c |x|^theta."""

    c: float
    theta: float

    def __post_init__(self):
        if self.c <= 0 or self.theta <= 0:
            raise ValueError("c and theta must be positive")

    def radial(self, r):
        return self.c * np.asarray(r, dtype=float) ** self.theta

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim == 0 else np.linalg.norm(np.atleast_1d(x), axis=-1)
        return self.radial(r)

    def radial_inverse(self, v: float) -> float:
        return (v / self.c) ** (1.0 / self.theta)


@dataclass(frozen=True)
class TwoSidedPowerPotential:
    """Piecewise power: c3 |x|^theta1 below the crossover, matched c|x|^theta2 above.

    Realizes c3 |x|^theta1 <= V(x) <= c4 |x|^theta2 for large |x|.
    """

    c3: float
    theta1: float
    c4: float
    theta2: float
    crossover: float

    def __post_init__(self):
        if min(self.c3, self.c4, self.theta1, self.crossover) <= 0:
            raise ValueError("parameters must be positive")
        if self.theta2 < self.theta1:
            raise ValueError("need theta2 >= theta1")
        if self.c3 * self.crossover ** (self.theta1 - self.theta2) > self.c4:
            raise ValueError("upper envelope c4 |x|^theta2 violated beyond the crossover")

    @property
    def _c_outer(self) -> float:
        return self.c3 * self.crossover ** (self.theta1 - self.theta2)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        inner = self.c3 * r**self.theta1
        outer = self._c_outer * r**self.theta2
        return np.where(r <= self.crossover, inner, outer)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim == 0 else np.linalg.norm(np.atleast_1d(x), axis=-1)
        return self.radial(r)

    def radial_inverse(self, v: float) -> float:
        v_cross = self.c3 * self.crossover**self.theta1
        if v <= v_cross:
            return (v / self.c3) ** (1.0 / self.theta1)
        return (v / self._c_outer) ** (1.0 / self.theta2)


Potential = PowerPotential | TwoSidedPowerPotential


def growth_phi(V: Potential, R: float) -> float:
    """Phi(R) = inf over |x| >= R of V(x) (the radial value for these variants)."""
    if R < 0:
        raise ValueError("R must be nonnegative")
    return float(V.radial(R))


def growth_phi_inverse(V: Potential, r: float) -> float:
    """Right-continuous generalized inverse inf{s >= 0 : Phi(s) >= r}."""
    if r <= 0:
        return 0.0
    return float(V.radial_inverse(r))


# ---------------------------------------------------------------------------
# reference functions


@dataclass(frozen=True)
class SimplePower:
    """phi(s) = (1 + s^2)^{-p}; square integrable against s^{d-1} iff p > d/4."""

    p: float

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return (1.0 + s**2) ** -self.p


def _iterated_log(i: int, x):
    out = np.log(x)
    for _ in range(i - 1):
        out = np.log(out)
    return out


@dataclass(frozen=True)
class LogCorrected:
    """The log-corrected family phi_k at the critical power d/4.

    phi_k(s) = (1+s^2)^{-d/4} (log^{(k+1)}(e^{k+1}+s^2))^{-p/2}
               * prod_{i=1..k} (log^{(i)}(e^i+s^2))^{-1/2},  p > 1.
    """

    d: int
    k: int = 0
    p: float = 2.0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.p <= 1.0:
            raise ValueError("need p > 1")

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        s2 = s**2
        out = (1.0 + s2) ** (-self.d / 4.0)
        out = out * _iterated_log(self.k + 1, math.e ** (self.k + 1) + s2) ** (-self.p / 2.0)
        for i in range(1, self.k + 1):
            out = out * _iterated_log(i, math.e**i + s2) ** -0.5
        return out


ReferenceFunction = SimplePower | LogCorrected


def _sliding_max(r: np.ndarray, w: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Max of w over r in [lo_i, hi_i], both window edges nondecreasing."""
    from collections import deque

    i_lo = np.searchsorted(r, lo, side="left")
    i_hi = np.searchsorted(r, hi, side="right")
    out = np.empty(lo.size)
    dq: deque[int] = deque()
    head = 0
    for j in range(lo.size):
        while head < i_hi[j]:
            while dq and w[dq[-1]] <= w[head]:
                dq.pop()
            dq.append(head)
            head += 1
        while dq and dq[0] < i_lo[j]:
            dq.popleft()
        out[j] = w[dq[0]] if dq else 0.0
    return out


@dataclass(frozen=True)
class ClassSReport:
    passed: bool
    square_integrable: bool
    regularity_ok: bool
    constant: float


def _profile_derivs(phi: ReferenceFunction, r: np.ndarray):
    """Central finite differences of the radial profile."""
    h = 1e-6 * (1.0 + r)
    f0 = phi.profile(r)
    fp = phi.profile(r + h)
    fm = phi.profile(np.maximum(r - h, 0.0))
    d1 = (fp - fm) / (2.0 * h)
    d2 = (fp - 2.0 * f0 + fm) / h**2
    return d1, d2


def check_class_S(phi: ReferenceFunction, d: int,
                  grid_lo: float = 1e-3, grid_hi: float = 1e6,
                  grid_n: int = 10_000) -> ClassSReport:
    """Numerically verify membership in the reference class.

    (i) square integrability of s^{d-1} phi(s)^2 via quadrature with tail
    extrapolation; (ii) the derivative/doubling bound via a grid supremum,
    with the derivative supremum taken over a unit window around s (the
    global-in-r reading is vacuous for any decaying profile).  The
    empirical constant must be stable across two grid refinements.
    """
    # (i) finite quadrature on [0, 1e6] plus a tail-slope test: the
    # integrand s^{d-1} phi^2 must decay strictly faster than 1/s
    near, _ = integrate.quad(
        lambda s: s ** (d - 1) * float(phi.profile(s)) ** 2, 0.0, 1.0, limit=400)
    far, _ = integrate.quad(  # log substitution keeps quad happy over 6 decades
        lambda u: math.exp(u) ** d * float(phi.profile(math.exp(u))) ** 2,
        0.0, math.log(1e6), limit=400)
    finite_part = near + far
    ss = np.logspace(6, 9, 24)
    g = ss ** (d - 1) * np.asarray(phi.profile(ss)) ** 2
    with np.errstate(divide="ignore"):
        logg = np.log(g)
    if not np.all(np.isfinite(logg)):
        square_integrable = False
    else:
        tail_slope, _ = np.polyfit(np.log(ss), logg, 1)
        square_integrable = bool(math.isfinite(finite_part) and tail_slope < -1.02)

    def empirical_constant(n: int) -> float:
        s = np.logspace(math.log10(grid_lo), math.log10(grid_hi), n)
        rgrid = np.unique(np.concatenate((s, s + 1.0, np.maximum(s - 1.0, grid_lo / 2))))
        d1, d2 = _profile_derivs(phi, rgrid)
        w = np.abs(d1) * (rgrid + 1.0 / rgrid) + np.abs(d2)
        local = _sliding_max(rgrid, w, np.maximum(s - 1.0, 0.0), s + 1.0)
        ratios = (local + np.asarray(phi.profile(s / 2.0))) / np.asarray(phi.profile(s))
        return float(ratios.max())

    c0 = empirical_constant(grid_n)
    c1 = empirical_constant(2 * grid_n)
    regularity_ok = (math.isfinite(c1)
                     and abs(c1 - c0) <= 0.01 * max(abs(c0), 1.0))
    return ClassSReport(passed=square_integrable and regularity_ok,
                        square_integrable=square_integrable,
                        regularity_ok=regularity_ok,
                        constant=c1)
