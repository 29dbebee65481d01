"""Monte-Carlo oracles for the bias and variance of the kernel estimators.

Also two diagnostics for the HD structure: the distribution of a Gaussian
projection ``G z``, and the near-orthogonality of the rows of
``R = sqrt(d) H diag(H D2 H D3 z)``, the matrix for which
``sqrt(d) H D1 H D2 H D3 z = R @ vec(D1)``.

Trials are processed in fixed-size chunks. Chunk ``c`` of grid point ``i``
draws from ``child_rng(seed, STREAM_MC, kind_index, i, c)``, so results do
not depend on how many worker threads run the chunks.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import transforms
from .errors import ConfigurationError, DimensionError, InputError
from .feature_maps import Kind, draw_arrays, project_arrays
from .kernel_eval import var_rff_closed
from .seeding import STREAM_MC, STREAM_ORTHO, child_rng

DEFAULT_TRIALS = 20_000
N_BATCHES = 20
_CHUNK_ELEMENTS = 2_000_000
_KIND_INDEX = {kind: i for i, kind in enumerate(Kind)}


def _run_chunks(fn, n_chunks, workers):
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, range(n_chunks)))
    return [fn(c) for c in range(n_chunks)]


def _chunk_bounds(total, size):
    return [(start, min(total, start + size)) for start in range(0, total, size)]


def batch_stderr(samples, stat=np.mean, n_batches=N_BATCHES):
    """Standard error of ``stat`` from ``n_batches`` contiguous batches."""
    samples = np.asarray(samples)
    if len(samples) < 2 * n_batches:
        return float("nan")
    values = np.array([stat(b) for b in np.array_split(samples, n_batches)])
    return float(np.std(values, ddof=1) / math.sqrt(n_batches))


@dataclass(frozen=True)
class SimulationReport:
    kind: Kind
    d: int
    D: int
    z_grid: np.ndarray
    bias: np.ndarray
    var_ratio: np.ndarray
    trials: int
    seed: int
    mean: np.ndarray
    variance: np.ndarray
    bias_stderr: np.ndarray
    var_ratio_stderr: np.ndarray
    fixed_direction: bool = False


def kernel_estimates(kind, d, D, z, trials, seed, *, z_index=0, fixed_direction=False, workers=1):
    """``trials`` independent draws of the estimate for a pair at distance ``z`` (sigma = 1).

    The estimate only depends on ``x - y``, so each trial projects the
    difference vector ``z * u`` directly: ``K = mean(cos(W z u))``. ``u`` is
    ``e_1`` when ``fixed_direction`` is set, otherwise a fresh uniformly random
    unit vector per trial (the structured kinds are not rotation invariant).
    """
    kind = Kind.parse(kind)
    d, D, trials = int(d), int(D), int(trials)
    if d < 1 or D < 1 or trials < 1:
        raise ConfigurationError(f"need d, D, trials >= 1, got {d}, {D}, {trials}")
    d_pad = transforms.next_power_of_two(d) if kind.structured else d
    m = -(-D // d_pad)
    per_trial = m * d_pad * (d_pad if not kind.structured else kind.n_diagonals)
    chunk = max(1, min(1000, _CHUNK_ELEMENTS // per_trial))
    bounds = _chunk_bounds(trials, chunk)
    kind_index = _KIND_INDEX[kind]

    def run(c):
        lo, hi = bounds[c]
        n = hi - lo
        rng = child_rng(seed, STREAM_MC, kind_index, z_index, c)
        if fixed_direction:
            u = np.zeros((n, d))
            u[:, 0] = 1.0
        else:
            u = rng.standard_normal((n, d))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
        arrays = draw_arrays(kind, d_pad, rng, size=(n, m))
        proj = project_arrays(kind, arrays, (z * u)[:, None, :], d=d_pad, D=D, sigma=1.0)
        return np.cos(proj[:, 0, :]).mean(axis=-1)

    return np.concatenate(_run_chunks(run, len(bounds), workers))


def mc_bias_variance(kind, d, D, z_grid, trials=DEFAULT_TRIALS, seed=0, *,
                     fixed_direction=False, workers=1):
    """Empirical bias and variance ratio (to the RFF closed form) over a z grid."""
    kind = Kind.parse(kind)
    z_grid = np.asarray(z_grid, dtype=np.float64).ravel()
    if z_grid.size == 0:
        raise ConfigurationError("z grid is empty")
    if np.any(z_grid < 0):
        raise ConfigurationError("z values must be non-negative")
    cols = {key: np.empty(z_grid.size) for key in
            ("mean", "variance", "bias", "var_ratio", "bias_se", "ratio_se")}
    for i, z in enumerate(z_grid):
        k = kernel_estimates(kind, d, D, z, trials, seed, z_index=i,
                             fixed_direction=fixed_direction, workers=workers)
        target = math.exp(-0.5 * z * z)
        rff_var = var_rff_closed(z, D)
        variance = float(np.var(k, ddof=1)) if trials > 1 else float("nan")
        cols["mean"][i] = k.mean()
        cols["variance"][i] = variance
        cols["bias"][i] = k.mean() - target
        cols["bias_se"][i] = batch_stderr(k)
        with np.errstate(divide="ignore", invalid="ignore"):
            cols["var_ratio"][i] = variance / rff_var if rff_var > 0 else float("nan")
            cols["ratio_se"][i] = (batch_stderr(k, lambda b: np.var(b, ddof=1)) / rff_var
                                   if rff_var > 0 else float("nan"))
    return SimulationReport(kind=kind, d=int(d), D=int(D), z_grid=z_grid, bias=cols["bias"],
                            var_ratio=cols["var_ratio"], trials=int(trials), seed=int(seed),
                            mean=cols["mean"], variance=cols["variance"],
                            bias_stderr=cols["bias_se"], var_ratio_stderr=cols["ratio_se"],
                            fixed_direction=fixed_direction)


@dataclass(frozen=True)
class ProjectionSummary:
    mean: np.ndarray
    variance: np.ndarray
    max_abs_correlation: float
    expected_variance: float
    trials: int


def gaussian_projection_check(d, z_vec, trials=10_000, seed=0):
    """Per-coordinate moments of ``G z`` over ``trials`` Gaussian ``d x len(z)`` matrices."""
    z_vec = np.asarray(z_vec, dtype=np.float64).ravel()
    d, trials = int(d), int(trials)
    if d < 1 or trials < 2:
        raise ConfigurationError(f"need d >= 1 and trials >= 2, got {d}, {trials}")
    chunk = max(1, _CHUNK_ELEMENTS // (d * z_vec.size))
    bounds = _chunk_bounds(trials, chunk)
    samples = np.empty((trials, d))
    for c, (lo, hi) in enumerate(bounds):
        g = child_rng(seed, STREAM_MC, len(Kind), 0, c).standard_normal((hi - lo, d, z_vec.size))
        samples[lo:hi] = g @ z_vec
    variance = samples.var(axis=0, ddof=1)
    if d > 1 and np.all(variance > 0):
        corr = np.corrcoef(samples, rowvar=False)
        np.fill_diagonal(corr, 0.0)
        max_corr = float(np.max(np.abs(corr)))
    else:
        max_corr = 0.0
    return ProjectionSummary(mean=samples.mean(axis=0), variance=variance,
                             max_abs_correlation=max_corr,
                             expected_variance=float(z_vec @ z_vec), trials=trials)


def near_orthogonal_matrix(z, d2, d3):
    """``sqrt(d) H diag(H D2 H D3 z)`` for sign vectors ``d2``, ``d3`` (batched over leading axes)."""
    z = np.asarray(z, dtype=np.float64)
    d = z.shape[-1]
    u = transforms.apply_hd_chain(z, [d3, d2])
    return math.sqrt(d) * transforms.hadamard_matrix(d) * u[..., None, :]


def max_row_inner(u):
    """Largest ``|<r_i, r_j>|`` over ``i != j`` for ``R = sqrt(d) H diag(u)``.

    Uses ``(R R^T)_ij = sqrt(d) (H u^2)_{i xor j}``, which holds for the
    Sylvester ordering, so the whole Gram matrix is one transform of ``u^2``.
    """
    u = np.asarray(u, dtype=np.float64)
    d = u.shape[-1]
    g = math.sqrt(d) * transforms.fwht(u * u)
    return np.max(np.abs(g[..., 1:]), axis=-1) if d > 1 else np.zeros(u.shape[:-1])


@dataclass(frozen=True)
class NearOrthogonalityReport:
    d: int
    trials: int
    t_grid: np.ndarray
    exceed_fraction: np.ndarray
    max_inner: np.ndarray
    median_max_inner: float
    max_row_norm_deviation: float
    max_reconstruction_error: float
    seed: int


def near_orthogonality_stats(d, z, trials, t_grid, seed=0, *, workers=1):
    """Row-norm, reconstruction and row-inner-product statistics of ``R``.

    Per trial, draws ``D1, D2, D3``, builds ``R`` densely, checks that every row
    has norm ``||z||`` and that ``R vec(D1)`` reproduces the HD chain, and
    records the largest off-diagonal ``|<r_i, r_j>| / ||z||^2``.
    """
    d, trials = int(d), int(trials)
    if not transforms.is_power_of_two(d):
        raise DimensionError(f"d must be a power of two, got {d}")
    z = np.asarray(z, dtype=np.float64).ravel()
    if z.size != d:
        raise DimensionError(f"z has length {z.size}, expected {d}")
    znorm2 = float(z @ z)
    if znorm2 == 0.0:
        raise InputError("z must be nonzero")
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    t_grid = np.asarray(t_grid, dtype=np.float64).ravel()
    znorm = math.sqrt(znorm2)
    hs = math.sqrt(d) * transforms.hadamard_matrix(d)
    bounds = _chunk_bounds(trials, max(1, _CHUNK_ELEMENTS // (d * d)))

    def run(c):
        lo, hi = bounds[c]
        n = hi - lo
        signs = transforms.sign_diagonal_draw(child_rng(seed, STREAM_ORTHO, c), d, (n, 3))
        d1, d2, d3 = signs[:, 0], signs[:, 1], signs[:, 2]
        u = transforms.apply_hd_chain(z, [d3, d2])
        r = hs[None, :, :] * u[:, None, :]
        norm_dev = np.max(np.abs(np.linalg.norm(r, axis=2) - znorm))
        recon = np.einsum("nij,nj->ni", r, d1)
        chain = transforms.apply_hd_chain(z, [d3, d2, d1], math.sqrt(d))
        recon_err = np.max(np.abs(recon - chain))
        return norm_dev, recon_err, max_row_inner(u) / znorm2

    results = _run_chunks(run, len(bounds), workers)
    max_inner = np.concatenate([r[2] for r in results])
    exceed = np.array([np.mean(max_inner > t) for t in t_grid])
    return NearOrthogonalityReport(
        d=d, trials=trials, t_grid=t_grid, exceed_fraction=exceed, max_inner=max_inner,
        median_max_inner=float(np.median(max_inner)),
        max_row_norm_deviation=float(max(r[0] for r in results)),
        max_reconstruction_error=float(max(r[1] for r in results)),
        seed=int(seed))
