"""Lowest eigenvalues of the discretized operator, matrix-free or dense."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg as sla

from .errors import BreakdownDetected, DimensionTooLarge

__all__ = ["Spectrum", "lanczos_lowest", "dense_lowest", "DENSE_LIMIT"]

DENSE_LIMIT = 4096


@dataclass
class Spectrum:
    """Sorted computed eigenvalues with convergence metadata."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    iterations: int
    solver: str
    seed: int | None = None
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        self.residuals = np.asarray(self.residuals, dtype=float)

    def __len__(self) -> int:
        return self.eigenvalues.size

    def to_rows(self):
        return [(n + 1, lam, res) for n, (lam, res)
                in enumerate(zip(self.eigenvalues, self.residuals))]

    def to_json(self) -> str:
        return json.dumps({
            "eigenvalues": self.eigenvalues.tolist(),
            "residuals": self.residuals.tolist(),
            "iterations": self.iterations,
            "solver": self.solver,
            "seed": self.seed,
            "converged": self.converged,
            "meta": self.meta,
        }, indent=2, sort_keys=True)


def lanczos_lowest(apply: Callable[[np.ndarray], np.ndarray], dim: int, k: int,
                   tol: float = 1e-8, seed: int = 0, max_iter: int | None = None,
                   check_every: int = 25) -> Spectrum:
    """Lowest k eigenvalues by Lanczos with full reorthogonalization.

    The Krylov subspace is enlarged until the lowest k Ritz values have
    residual estimates beta_m |s_mj| <= tol * max(1, |theta_j|), or the
    iteration budget is exhausted (then a partial spectrum is returned
    with converged=False).  Breakdown triggers a reseeded continuation
    vector; after three breakdown reseeds BreakdownDetected is raised.
    Deterministic for fixed (seed, tol, problem).

    A residual test alone cannot see a missed copy of a degenerate
    eigenvalue (the second copy enters the Krylov space only through
    rounding), so first convergence starts a confirmation phase: the
    subspace grows by a further ~20% and the lowest k Ritz values must
    hold still before the result is accepted.
    """
    if k >= dim:
        raise ValueError("k must be smaller than the problem dimension")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = min(dim, max(20 * k, 600))
    max_iter = min(max_iter, dim)

    rng = np.random.default_rng(seed)
    Q = np.empty((max_iter, dim))
    alphas = np.empty(max_iter)
    betas = np.empty(max_iter)

    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    Q[0] = v
    m = 0
    last_beta = 0.0
    reseeds = 0
    theta = None
    resid = None
    breakdown_tol = 1e-13
    pending: tuple[int, np.ndarray] | None = None

    while m < max_iter:
        w = apply(Q[m])
        alphas[m] = Q[m] @ w
        w = w - alphas[m] * Q[m]
        if m > 0:
            w -= betas[m - 1] * Q[m - 1]
        # full reorthogonalization, twice for safety
        for _ in range(2):
            w -= Q[: m + 1].T @ (Q[: m + 1] @ w)
        beta = np.linalg.norm(w)
        last_beta = beta
        m += 1
        if m == max_iter:
            break
        if beta < breakdown_tol * max(1.0, abs(alphas[: m]).max()):
            theta, resid, n_conv = _ritz_state(alphas, betas, m, 0.0, k, tol)
            if n_conv >= k:
                break
            reseeds += 1
            if reseeds > 3:
                raise BreakdownDetected("Lanczos breakdown persisted after 3 reseeds")
            w = rng.standard_normal(dim)
            for _ in range(2):
                w -= Q[:m].T @ (Q[:m] @ w)
            beta = np.linalg.norm(w)
            last_beta = 0.0
            betas[m - 1] = 0.0
        else:
            betas[m - 1] = beta
        Q[m] = w / beta
        if m % check_every == 0 and m > k:
            theta, resid, n_conv = _ritz_state(alphas, betas, m, betas[m - 1], k, tol)
            if n_conv >= k:
                snapshot = theta[:k].copy()
                if pending is None:
                    pending = (m + max(30, m // 5), snapshot)
                elif m >= pending[0]:
                    drift = np.abs(snapshot - pending[1]).max()
                    if drift <= tol * max(1.0, float(np.abs(snapshot).max())):
                        break
                    pending = (m + max(30, m // 5), snapshot)
            else:
                pending = None

    theta, resid, n_conv = _ritz_state(alphas, betas, m, last_beta, k, tol)
    kk = min(k, theta.size)
    return Spectrum(eigenvalues=theta[:kk], residuals=resid[:kk], iterations=m,
                    solver="lanczos", seed=seed, converged=bool(n_conv >= k),
                    meta={"tol": tol, "subspace": m})


def _ritz_state(alphas, betas, m, beta_last, k, tol):
    """Ritz values of the current tridiagonal and their residual estimates."""
    theta, S = sla.eigh_tridiagonal(alphas[:m], betas[: m - 1])
    resid = np.abs(beta_last * S[-1, :])
    kk = min(k, m)
    ok = resid[:kk] <= tol * np.maximum(1.0, np.abs(theta[:kk]))
    n_conv = int(np.argmin(ok)) if not ok.all() else kk
    return theta, resid, n_conv


def dense_lowest(matrix: np.ndarray, k: int) -> Spectrum:
    """Lowest k eigenvalues by full symmetric eigendecomposition."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    if n > DENSE_LIMIT:
        raise DimensionTooLarge(f"dense solver limited to {DENSE_LIMIT} rows, got {n}")
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    vals = np.linalg.eigvalsh(matrix)
    vals = vals[:k]
    return Spectrum(eigenvalues=vals, residuals=np.zeros(vals.size),
                    iterations=1, solver="dense", converged=True)
