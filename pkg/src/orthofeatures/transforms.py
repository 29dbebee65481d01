"""Randomized linear-algebra kernels.

Fast Walsh-Hadamard transform, Haar-orthogonal sampling, chi and Rademacher
diagonals, and the Hadamard-diagonal (HD) chain built from them.

All public samplers come in two flavours: ``sample_*(d, seed)`` draws a single
object from an integer seed, and the lower-level ``*_draw(rng, d, size=())``
draws a batch of shape ``size`` from an existing generator. Every array returned
is float64.
"""

import math

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, DimensionError
from .seeding import child_rng

MAX_HD_BLOCKS = 3


def is_power_of_two(n):
    n = int(n)
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n):
    n = int(n)
    if n < 1:
        raise DimensionError(f"dimension must be positive, got {n}")
    return 1 << (n - 1).bit_length()


def _check_dim(d):
    d = int(d)
    if d <= 0:
        raise DimensionError(f"dimension must be positive, got {d}")
    return d


def fwht(v, *, inplace=False):
    """Orthonormal fast Walsh-Hadamard transform along the last axis.

    Computes ``H @ v`` where ``H`` is the Sylvester-ordered Hadamard matrix
    scaled by ``1/sqrt(d)``, so the transform is orthogonal and its own
    inverse. Leading axes are treated as a batch. Cost is O(d log d) per
    vector using a radix-2 butterfly.

    Parameters
    ----------
    v : array_like, shape (..., d)
        Input; ``d`` must be a power of two.
    inplace : bool
        Overwrite ``v`` (must then be a C-contiguous float64 ndarray).

    Returns
    -------
    numpy.ndarray
        The transformed array (``v`` itself when ``inplace``).
    """
    if inplace:
        if not (isinstance(v, np.ndarray) and v.dtype == np.float64 and v.flags.c_contiguous
                and v.flags.writeable):
            raise ValueError("inplace fwht needs a writeable C-contiguous float64 array")
        out = v
    else:
        out = np.array(v, dtype=np.float64, copy=True, order="C")
    if out.ndim == 0:
        raise DimensionError("fwht needs at least one axis")
    d = out.shape[-1]
    if not is_power_of_two(d):
        raise DimensionError(f"fwht length must be a power of two, got {d}")

    flat = out.reshape(-1, d)
    h = 1
    while h < d:
        pairs = flat.reshape(flat.shape[0], d // (2 * h), 2, h)
        top = pairs[:, :, 0, :]
        bottom = pairs[:, :, 1, :]
        saved = top.copy()
        top += bottom
        np.subtract(saved, bottom, out=bottom)
        h *= 2
    flat *= 1.0 / math.sqrt(d)
    return out


def hadamard_matrix(d):
    """Dense orthonormal Walsh-Hadamard matrix (same ordering as :func:`fwht`)."""
    d = _check_dim(d)
    if not is_power_of_two(d):
        raise DimensionError(f"Hadamard dimension must be a power of two, got {d}")
    return scipy.linalg.hadamard(d).astype(np.float64) / math.sqrt(d)


def haar_orthogonal_draw(rng, d, size=()):
    """Haar-distributed orthogonal matrices, shape ``size + (d, d)``.

    QR of a standard Gaussian matrix with every column of Q multiplied by the
    sign of the matching diagonal entry of R. Without that correction the
    LAPACK sign convention biases the distribution away from Haar measure.
    """
    d = _check_dim(d)
    size = _as_shape(size)
    g = rng.standard_normal(size + (d, d))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    q *= signs[..., None, :]
    return q


def chi_diagonal_draw(rng, d, size=(), dof=None):
    """Entries distributed as chi with ``dof`` (default ``d``) degrees of freedom.

    Each entry is the Euclidean norm of ``dof`` independent standard normals.
    Shape ``size + (d,)``.
    """
    d = _check_dim(d)
    dof = d if dof is None else _check_dim(dof)
    size = _as_shape(size)
    g = rng.standard_normal(size + (d, dof))
    return np.sqrt(np.einsum("...j,...j->...", g, g))


def sign_diagonal_draw(rng, d, size=()):
    """Rademacher (uniform +-1) entries, shape ``size + (d,)``."""
    d = _check_dim(d)
    size = _as_shape(size)
    bits = rng.integers(0, 2, size=size + (d,), dtype=np.int8)
    return (2.0 * bits - 1.0).astype(np.float64)


def _as_shape(size):
    if isinstance(size, (int, np.integer)):
        return (int(size),)
    return tuple(int(s) for s in size)


def _frozen(a):
    a.setflags(write=False)
    return a


def sample_haar_orthogonal(d, seed):
    """Uniformly random ``d x d`` orthogonal matrix, deterministic in ``seed``."""
    return _frozen(haar_orthogonal_draw(child_rng(seed), d))


def sample_chi_diagonal(d, seed):
    """``d`` i.i.d. chi(d) draws, deterministic in ``seed``."""
    return _frozen(chi_diagonal_draw(child_rng(seed), d))


def sample_sign_diagonal(d, seed):
    """``d`` i.i.d. Rademacher signs, deterministic in ``seed``."""
    return _frozen(sign_diagonal_draw(child_rng(seed), d))


def apply_hd_chain(x, diagonals, scale=1.0):
    """Apply ``scale * H D_k ... H D_1`` to ``x`` along its last axis.

    ``diagonals[0]`` is applied first. Each diagonal may carry leading batch
    axes as long as it broadcasts against ``x``. With three diagonals and
    ``scale = sqrt(d)/sigma`` this is the SORF projection; one or two give the
    HD and HDHD ablations.
    """
    diagonals = list(diagonals)
    if not 1 <= len(diagonals) <= MAX_HD_BLOCKS:
        raise ConfigurationError(
            f"HD chain takes 1 to {MAX_HD_BLOCKS} diagonals, got {len(diagonals)}")
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[-1]
    if not is_power_of_two(d):
        raise DimensionError(f"HD chain input length must be a power of two, got {d}")
    y = x
    for diag in diagonals:
        diag = np.asarray(diag, dtype=np.float64)
        if diag.shape[-1] != d:
            raise DimensionError(f"diagonal length {diag.shape[-1]} does not match input length {d}")
        y = np.ascontiguousarray(y * diag)
        fwht(y, inplace=True)
    if scale != 1.0:
        y *= scale
    return y


def hd_chain_matrix(diagonals, scale=1.0):
    """Dense ``scale * H D_k ... H D_1`` built by explicit matrix products."""
    diagonals = [np.asarray(s, dtype=np.float64) for s in diagonals]
    if not 1 <= len(diagonals) <= MAX_HD_BLOCKS:
        raise ConfigurationError(
            f"HD chain takes 1 to {MAX_HD_BLOCKS} diagonals, got {len(diagonals)}")
    d = diagonals[0].shape[-1]
    h = hadamard_matrix(d)
    m = np.eye(d)
    for diag in diagonals:
        m = h @ (diag[:, None] * m)
    return scale * m
