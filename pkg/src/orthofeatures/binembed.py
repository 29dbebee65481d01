"""Sign-based binary embedding: angle estimation and Hamming retrieval.

A code is ``sign(W x)`` with entries in {+1, -1} (zero projections map to +1).
Two codes agree on each bit with probability ``1 - theta/pi`` for Gaussian
``W``, so the normalised inner product estimates ``1 - 2 theta / pi`` and

    theta_hat = (pi / 2) * (1 - bx . by / D).
"""

import math

import numpy as np

from .errors import ConfigurationError, DimensionError, InputError
from .feature_maps import Kind, TransformSpec, build, project
from .seeding import STREAM_ANGLE, STREAM_RECALL, child_rng, child_seed


def sign_features(fmap, x):
    """Sign code(s) of ``x``; int8 array of length D (or shape (n, D))."""
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(np.atleast_2d(x), axis=1)
    if np.any(norms == 0):
        raise InputError("angle is undefined for the zero vector")
    u = project(fmap, x)
    return np.where(u >= 0, 1, -1).astype(np.int8)


def angle_estimate(bx, by):
    """Estimated angle in radians, in [0, pi]; row-wise for 2-D codes."""
    bx = np.asarray(bx)
    by = np.asarray(by)
    if bx.shape != by.shape:
        raise DimensionError(f"code shape mismatch {bx.shape} vs {by.shape}")
    D = bx.shape[-1]
    dot = np.einsum("...i,...i->...", bx.astype(np.float64), by.astype(np.float64))
    theta = np.clip(0.5 * math.pi * (1.0 - dot / D), 0.0, math.pi)
    return float(theta) if theta.ndim == 0 else theta


def exact_angle(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c = np.einsum("...i,...i->...", x, y) / (np.linalg.norm(x, axis=-1) * np.linalg.norm(y, axis=-1))
    theta = np.arccos(np.clip(c, -1.0, 1.0))
    return float(theta) if theta.ndim == 0 else theta


def pair_at_angle(rng, d, theta):
    """Two unit vectors at angle ``theta`` in a uniformly random 2-D plane."""
    g = rng.standard_normal((2, d))
    u = g[0] / np.linalg.norm(g[0])
    v = g[1] - (g[1] @ u) * u
    v /= np.linalg.norm(v)
    return u, math.cos(theta) * u + math.sin(theta) * v


def angle_trials(kind, d, D, theta, trials, seed):
    """Angle estimates over ``trials`` independent maps and random pairs at ``theta``.

    Trial ``t`` uses the pair stream ``(seed, STREAM_ANGLE, 0, t)`` and builds
    its map from ``child_seed(seed, STREAM_ANGLE, 1, t)``.
    """
    kind = Kind.parse(kind)
    if not 0 <= theta <= math.pi:
        raise ConfigurationError(f"theta must lie in [0, pi], got {theta}")
    out = np.empty(int(trials))
    for t in range(int(trials)):
        x, y = pair_at_angle(child_rng(seed, STREAM_ANGLE, 0, t), d, theta)
        fmap = build(TransformSpec(kind, d, D, 1.0, child_seed(seed, STREAM_ANGLE, 1, t)))
        codes = sign_features(fmap, np.stack([x, y]))
        out[t] = angle_estimate(codes[0], codes[1])
    return out


def _points(data):
    return np.asarray(getattr(data, "points", data), dtype=np.float64)


def _topk_stable(scores, k):
    """Indices of the k smallest scores per row, ties broken by index."""
    order = np.argsort(scores, axis=1, kind="stable")
    return order[:, :k]


def recall_at_k(base, queries, fmap, k, shortlist):
    """Mean fraction of each query's true k angular neighbours found in its Hamming shortlist.

    ``fmap=None`` ranks the shortlist by exact angle instead of by codes.
    """
    base = _points(base)
    queries = _points(queries)
    k, shortlist = int(k), int(shortlist)
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if shortlist < k:
        raise ConfigurationError(f"shortlist ({shortlist}) must be >= k ({k})")
    if shortlist > base.shape[0]:
        raise ConfigurationError(f"shortlist ({shortlist}) exceeds base size ({base.shape[0]})")
    if base.shape[1] != queries.shape[1]:
        raise DimensionError(f"base has d={base.shape[1]}, queries have d={queries.shape[1]}")

    bn = base / np.linalg.norm(base, axis=1, keepdims=True)
    qn = queries / np.linalg.norm(queries, axis=1, keepdims=True)
    neg_cos = -(qn @ bn.T)
    truth = _topk_stable(neg_cos, k)
    if fmap is None:
        candidates = _topk_stable(neg_cos, shortlist)
    else:
        cb = sign_features(fmap, base).astype(np.float64)
        cq = sign_features(fmap, queries).astype(np.float64)
        hamming = 0.5 * (cb.shape[1] - cq @ cb.T)
        candidates = _topk_stable(hamming, shortlist)
    hits = [len(np.intersect1d(t, c, assume_unique=True)) for t, c in zip(truth, candidates)]
    return float(np.mean(hits) / k)


def recall_maps(kind, d, D, seed):
    """Map used by the recall harness for ``kind`` (sigma is irrelevant to signs)."""
    return build(TransformSpec(kind, d, D, 1.0, child_seed(seed, STREAM_RECALL)))
