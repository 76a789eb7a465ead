"""Comparison depths: Tukey halfspace, Mahalanobis, kernelized spatial.

The halfspace depth is minimized with derivative-free Nelder-Mead simplex
search (the objective is piecewise constant, so gradients do not exist);
multiple restarts work around plateau stalls.  Mahalanobis depth is the
classical ``1 / (1 + (z-mu)' S^{-1} (z-mu))``.  The kernelized spatial
depth is the spatial depth computed in the RKHS of a Gaussian kernel,
expanded through the kernel trick so only pairwise distances are needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import SampleSet, _as_vector
from .optim import DepthResult

__all__ = [
    "HalfspaceConfig",
    "MahalanobisModel",
    "KernelConfig",
    "halfspace_depth",
    "fit_mahalanobis",
    "mahalanobis_depth",
    "kernelized_spatial_depth",
]


@dataclass(frozen=True)
class HalfspaceConfig:
    """Nelder-Mead controls for the halfspace-depth minimization.

    ``initial_simplex_scale`` sets the vertex offsets around each start;
    offsets of order 1 (comparable to the unit direction itself) are needed
    because tiny simplices stall immediately on the objective's plateaus.
    """

    restarts: int = 10
    seed: int = 0
    simplex_tolerance: float = 1e-4
    max_evals: int = 400
    initial_simplex_scale: float = 1.0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.simplex_tolerance <= 0:
            raise ValueError("simplex_tolerance must be > 0")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.initial_simplex_scale <= 0:
            raise ValueError("initial_simplex_scale must be > 0")


@dataclass(frozen=True, eq=False)
class MahalanobisModel:
    """Fitted location/scatter pair with a precomputed precision matrix."""

    mean: np.ndarray
    covariance_inverse: np.ndarray
    regularization: float = 0.0

    def __post_init__(self):
        mean = _as_vector(self.mean, name="mean")
        inv = np.asarray(self.covariance_inverse, dtype=np.float64)
        if inv.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance_inverse shape {inv.shape} does not match dimension {mean.size}"
            )
        if not np.allclose(inv, inv.T, atol=1e-10):
            raise ValueError("covariance_inverse must be symmetric")
        try:
            np.linalg.cholesky(inv)
        except np.linalg.LinAlgError:
            raise ValueError("covariance_inverse must be positive-definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance_inverse", inv)

    @property
    def d(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel ``exp(-||x - y||**2 / h**2)`` with bandwidth ``h``."""

    bandwidth_h: float = 1.0

    def __post_init__(self):
        if self.bandwidth_h <= 0:
            raise ValueError(f"bandwidth_h must be > 0, got {self.bandwidth_h}")


def halfspace_depth(z, X: SampleSet, cfg: HalfspaceConfig | None = None) -> DepthResult:
    """Tukey halfspace depth via Nelder-Mead over directions.

    Minimizes ``u -> (1/n) #{<u, x_i - z> >= 0}`` with in-objective
    normalization of ``u``, taking the best of ``cfg.restarts`` starts:
    the normalized sample mean first, then seeded random unit vectors.
    The result is an upper approximation of the true infimum.
    """
    if cfg is None:
        cfg = HalfspaceConfig()
    z = _as_vector(z, X.d, name="query point")
    data = X.data
    n = X.n

    def objective(u: np.ndarray) -> float:
        norm = np.linalg.norm(u)
        if norm < 1e-12:
            return 1.0
        uu = u / norm
        return float(np.count_nonzero(data @ uu >= z @ uu)) / n

    rng = np.random.default_rng(cfg.seed)
    starts = []
    mean = data.mean(axis=0)
    if np.linalg.norm(mean) < 1e-12:
        mean = np.zeros(X.d)
        mean[0] = 1.0
    starts.append(mean / np.linalg.norm(mean))
    for _ in range(cfg.restarts - 1):
        g = rng.standard_normal(X.d)
        starts.append(g / np.linalg.norm(g))

    best_val = np.inf
    best_u = starts[0]
    total_evals = 0
    eye = np.eye(X.d)
    for x0 in starts:
        simplex = np.vstack([x0] + [x0 + cfg.initial_simplex_scale * e for e in eye])
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "xatol": cfg.simplex_tolerance,
                "fatol": cfg.simplex_tolerance,
                "maxfev": cfg.max_evals,
                "initial_simplex": simplex,
            },
        )
        total_evals += int(res.nfev)
        if res.fun < best_val:
            best_val = float(res.fun)
            norm = np.linalg.norm(res.x)
            best_u = res.x / norm if norm >= 1e-12 else x0
    return DepthResult(
        value=best_val,
        direction=best_u,
        iterations=total_evals,
        converged=True,
        init="nelder-mead",
    )


def fit_mahalanobis(X: SampleSet, regularization: float = 0.0) -> MahalanobisModel:
    """Fit mean and (regularized, unbiased) covariance, then invert it."""
    if X.n < 2:
        raise ValueError(f"fitting a covariance requires n >= 2, got n={X.n}")
    if regularization < 0:
        raise ValueError("regularization must be >= 0")
    mean = X.data.mean(axis=0)
    cov = np.cov(X.data, rowvar=False, ddof=1).reshape(X.d, X.d)
    cov = cov + regularization * np.eye(X.d)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError(
            "covariance is singular; set regularization > 0 to make it invertible"
        ) from None
    ident = np.eye(X.d)
    inv = np.linalg.solve(chol.T, np.linalg.solve(chol, ident))
    inv = (inv + inv.T) / 2.0
    return MahalanobisModel(mean=mean, covariance_inverse=inv, regularization=regularization)


def mahalanobis_depth(z, model: MahalanobisModel) -> float:
    """``1 / (1 + (z - mean)' S^{-1} (z - mean))``; equals 1 iff z is the mean."""
    z = _as_vector(z, model.d, name="query point")
    delta = z - model.mean
    q = float(delta @ model.covariance_inverse @ delta)
    return 1.0 / (1.0 + max(q, 0.0))


def kernelized_spatial_depth(z, X: SampleSet, kernel: KernelConfig | None = None) -> float:
    """Spatial depth in the RKHS of a Gaussian kernel.

    ``1 - || (1/n) sum_i (phi(z) - phi(x_i)) / ||phi(z) - phi(x_i)|| ||``
    expanded via the kernel trick.  Samples coinciding with ``z`` have a
    zero displacement in the RKHS and are dropped from the average; if all
    samples coincide with ``z`` the depth is 1.
    """
    if kernel is None:
        kernel = KernelConfig()
    z = _as_vector(z, X.d, name="query point")
    h2 = kernel.bandwidth_h**2

    diff = X.data - z
    dz2 = np.einsum("ij,ij->i", diff, diff)
    # eta_i = 1 - k(z, x_i) = ||phi(z) - phi(x_i)||**2 / 2, via expm1 for
    # full precision near coincidence.
    eta = -np.expm1(-dz2 / h2)
    keep = eta > 0.0
    if not np.any(keep):
        return 1.0
    kept = X.data[keep]
    eta = eta[keep]
    kz = 1.0 - eta  # k(z, x_i)

    sq = np.einsum("ij,ij->i", kept, kept)
    cross = kept @ kept.T
    dxx2 = sq[:, None] + sq[None, :] - 2.0 * cross
    kxx = np.exp(-np.maximum(dxx2, 0.0) / h2)

    # <delta_i, delta_j> = 1 - k(z,x_i) - k(z,x_j) + k(x_i,x_j),
    # ||delta_i|| = sqrt(2 * eta_i)
    inner = 1.0 - kz[:, None] - kz[None, :] + kxx
    scale = np.sqrt(2.0 * eta)
    norm2 = float(np.sum(inner / (scale[:, None] * scale[None, :]))) / eta.size**2
    return float(np.clip(1.0 - np.sqrt(max(norm2, 0.0)), 0.0, 1.0))
