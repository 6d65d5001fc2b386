"""Growth-exponent extraction and bound-versus-spectrum comparison.

Eigenvalues of the operators treated here grow like a power of the index,
lambda_n ~ n^{theta alpha / (d (theta + alpha))}.  This module fits that
exponent from a computed spectrum, calibrates the undetermined envelope
constants, and checks every closed-form bound curve against every
computed eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolve import Spectrum
from .errors import WindowTooSmall
from .rates import BoundCurve

__all__ = [
    "FitResult",
    "BoundViolation",
    "fit_exponent",
    "calibrate_constants",
    "compare_bounds",
    "default_window",
]


@dataclass(frozen=True)
class FitResult:
    """Least-squares power-law fit lambda_n ~ exp(intercept) n^slope."""

    slope: float
    intercept: float
    stderr: float
    window: tuple[int, int]
    points: int

    def __post_init__(self):
        if self.window[1] <= self.window[0] or self.window[0] < 1:
            raise ValueError("window must satisfy 1 <= n0 < n1")
        if self.stderr < 0:
            raise ValueError("standard error must be nonnegative")


@dataclass(frozen=True)
class BoundViolation:
    """A single (curve, n) ordering failure."""

    source: str
    side: str
    n: int
    bound: float
    eigenvalue: float


def fit_exponent(spectrum: Spectrum, window: tuple[int, int]) -> FitResult:
    """OLS fit of log lambda_n against log n over n in [n0, n1]."""
    n0, n1 = int(window[0]), int(window[1])
    n1 = min(n1, len(spectrum))
    if n1 - n0 + 1 < 10:
        raise WindowTooSmall(
            f"fit window [{n0}, {n1}] holds fewer than 10 points")
    lam = spectrum.eigenvalues[n0 - 1: n1]
    if np.any(lam <= 0):
        raise ValueError("all eigenvalues in the fit window must be positive")
    logn = np.log(np.arange(n0, n1 + 1, dtype=float))
    loglam = np.log(lam)
    (slope, intercept), res, *_ = np.polyfit(logn, loglam, 1, full=True)
    m = logn.size
    if res.size and m > 2:
        s2 = float(res[0]) / (m - 2)
        sxx = float(((logn - logn.mean()) ** 2).sum())
        stderr = float(np.sqrt(s2 / sxx))
    else:
        stderr = 0.0
    return FitResult(slope=float(slope), intercept=float(intercept),
                     stderr=stderr, window=(n0, n1), points=m)


def calibrate_constants(spectrum: Spectrum, exponent: float,
                        window: tuple[int, int] | None = None) -> tuple[float, float]:
    """Envelope constants (min, max) of lambda_n / n^exponent over the window."""
    if len(spectrum) == 0:
        raise ValueError("spectrum is empty")
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    if window is None:
        n0, n1 = 1, len(spectrum)
    else:
        n0, n1 = int(window[0]), min(int(window[1]), len(spectrum))
    n = np.arange(n0, n1 + 1, dtype=float)
    ratio = spectrum.eigenvalues[n0 - 1: n1] / n**exponent
    return float(ratio.min()), float(ratio.max())


def compare_bounds(spectrum: Spectrum, curves: list[BoundCurve],
                   window: tuple[int, int] | None = None) -> list[BoundViolation]:
    """Flag every (curve, n) where a lower curve exceeds lambda_n or an
    upper curve falls below it.  An empty list means all orderings hold."""
    if window is None:
        n0, n1 = 1, len(spectrum)
    else:
        n0, n1 = int(window[0]), min(int(window[1]), len(spectrum))
    out: list[BoundViolation] = []
    for curve in curves:
        for n in range(max(n0, curve.n_min), n1 + 1):
            lam = float(spectrum.eigenvalues[n - 1])
            val = float(curve(n))
            if curve.side == "lower" and val > lam:
                out.append(BoundViolation(curve.source, "lower", n, val, lam))
            elif curve.side == "upper" and val < lam:
                out.append(BoundViolation(curve.source, "upper", n, val, lam))
    return out


def default_window(spectrum: Spectrum, spectral_ceiling: float | None = None,
                   ceiling_margin: float = 0.10) -> tuple[int, int]:
    """Fit window dropping small-n preasymptotics and ceiling-polluted tail.

    The first 15% of indices are discarded; so is any n whose eigenvalue
    comes within ``ceiling_margin`` of the discretization's spectral
    ceiling, where grid truncation distorts the spectrum.
    """
    k = len(spectrum)
    n0 = max(1, int(np.ceil(0.15 * k)))
    n1 = k
    if spectral_ceiling is not None:
        ok = spectrum.eigenvalues <= (1.0 - ceiling_margin) * spectral_ceiling
        n1 = int(np.sum(ok))
    if n1 <= n0:
        raise WindowTooSmall("no usable indices between preasymptotic cut and ceiling")
    return n0, n1
