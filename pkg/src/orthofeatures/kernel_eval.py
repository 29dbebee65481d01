"""Exact and approximate Gaussian kernels, error measurement, closed forms."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigurationError, DimensionError, InputError, NumericalError
from .feature_maps import Kind, build, features
from .seeding import STREAM_MSE, STREAM_SIGMA, child_rng, child_seed


def exact_kernel(x, y, sigma):
    """``exp(-||x - y||^2 / (2 sigma^2))``; rows of 2-D inputs are paired up."""
    sigma = float(sigma)
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    sq = np.sum((x - y) ** 2, axis=-1)
    out = np.exp(-sq / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


def approx_kernel(fx, fy):
    """Inner product of feature vectors (row-wise for 2-D inputs)."""
    fx = np.asarray(fx, dtype=np.float64)
    fy = np.asarray(fy, dtype=np.float64)
    if fx.shape != fy.shape:
        raise DimensionError(f"feature shape mismatch {fx.shape} vs {fy.shape}")
    out = np.einsum("...i,...i->...", fx, fy)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PairSample:
    x: np.ndarray
    y: np.ndarray
    z: float
    k_exact: float


def make_pairs(xs, ys, sigma):
    """Pair up rows of ``xs`` and ``ys`` and precompute z and the exact kernel."""
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
    if xs.shape != ys.shape:
        raise DimensionError(f"shape mismatch {xs.shape} vs {ys.shape}")
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    z = np.linalg.norm(xs - ys, axis=1) / sigma
    k = np.exp(-0.5 * z * z)
    return [PairSample(xs[i], ys[i], float(z[i]), float(k[i])) for i in range(len(xs))]


@dataclass(frozen=True)
class MseReport:
    kind: Kind
    D: int
    mse: float
    n_pairs: int
    n_seeds: int
    stderr: float
    per_seed: tuple = ()


def _seed_mse(spec, xs, ys, exact, s):
    fmap = build(spec.replace(seed=child_seed(spec.seed, STREAM_MSE, s)))
    approx = approx_kernel(features(fmap, xs), features(fmap, ys))
    return float(np.mean((approx - exact) ** 2))


def mse_estimate(spec, pairs, n_seeds, workers=1):
    """Mean of (approx - exact)^2 over all pairs and ``n_seeds`` independent maps.

    Seed ``s`` builds its map from ``child_seed(spec.seed, STREAM_MSE, s)``;
    ``stderr`` is the standard error of the per-seed MSE values, which are the
    independent replicates here. ``spec.sigma`` must be the bandwidth the
    pairs' exact kernel values were computed with.
    """
    pairs = list(pairs)
    if not pairs:
        raise InputError("mse_estimate needs at least one pair")
    n_seeds = int(n_seeds)
    if n_seeds < 1:
        raise ConfigurationError(f"n_seeds must be >= 1, got {n_seeds}")
    xs = np.stack([p.x for p in pairs])
    ys = np.stack([p.y for p in pairs])
    exact = np.array([p.k_exact for p in pairs])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(lambda s: _seed_mse(spec, xs, ys, exact, s), range(n_seeds)))
    else:
        per_seed = [_seed_mse(spec, xs, ys, exact, s) for s in range(n_seeds)]
    per_seed = np.array(per_seed)
    stderr = float(np.std(per_seed, ddof=1) / math.sqrt(n_seeds)) if n_seeds > 1 else 0.0
    return MseReport(kind=spec.kind, D=spec.D, mse=float(per_seed.mean()), n_pairs=len(pairs),
                     n_seeds=n_seeds, stderr=stderr, per_seed=tuple(per_seed.tolist()))


def var_rff_closed(z, D):
    """Variance of the RFF estimate: ``(1 - exp(-z^2))^2 / (2D)``."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(z < 0):
        raise ConfigurationError("z must be non-negative")
    if D < 1:
        raise ConfigurationError(f"D must be >= 1, got {D}")
    out = (-np.expm1(-z * z)) ** 2 / (2.0 * D)
    return float(out) if out.ndim == 0 else out


def var_ratio_closed(z, d, D):
    """Large-d ratio Var(ORF) / Var(RFF) = 1 - (D-1) e^{-z^2} z^4 / (d (1 - e^{-z^2})^2)."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= 0):
        raise NumericalError("variance ratio is undefined at z = 0")
    if not 1 <= D <= d:
        raise ConfigurationError(f"variance ratio needs 1 <= D <= d, got D={D}, d={d}")
    z2 = z * z
    out = 1.0 - (D - 1) * np.exp(-z2) * z2 * z2 / (d * np.expm1(-z2) ** 2)
    return float(out) if out.ndim == 0 else out


def sorf_bias_bound(z, d):
    """Upper bound ``6 z / sqrt(d)`` on the SORF bias."""
    if d < 1:
        raise ConfigurationError(f"d must be >= 1, got {d}")
    z = np.asarray(z, dtype=np.float64)
    if np.any(z < 0):
        raise ConfigurationError("z must be non-negative")
    out = 6.0 * z / math.sqrt(d)
    return float(out) if out.ndim == 0 else out


def select_sigma(points, k=50, n_sample=1000, seed=0, chunk=512):
    """Mean distance from sampled points to their k-th nearest neighbour.

    ``min(n_sample, n)`` query points are drawn without replacement (all points,
    in order, when ``n_sample >= n``); neighbours are searched over the whole
    set with the query itself excluded by index, so duplicates count as
    neighbours at distance 0.
    """
    pts = getattr(points, "points", points)
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionError(f"points must be an (n, d) matrix, got shape {pts.shape}")
    n = pts.shape[0]
    k = int(k)
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if n <= k:
        raise InputError(f"need more than k={k} points, got {n}")
    if n_sample >= n:
        idx = np.arange(n)
    else:
        idx = np.sort(child_rng(seed, STREAM_SIGMA).choice(n, size=int(n_sample), replace=False))

    kth = np.empty(len(idx))
    for start in range(0, len(idx), chunk):
        rows = idx[start:start + chunk]
        d2 = cdist(pts[rows], pts, "sqeuclidean")
        d2[np.arange(len(rows)), rows] = np.inf
        kth[start:start + len(rows)] = np.partition(d2, k - 1, axis=1)[:, k - 1]
    return float(np.mean(np.sqrt(kth)))
