"""Random feature maps for the Gaussian kernel.

Six linear transforms ``W`` (rows ``w_i``) are supported:

========  ===========================================  ===================
kind      one d x d block                              apply cost
========  ===========================================  ===================
RFF       ``G / sigma``, G i.i.d. N(0, 1)               O(d^2)
ORF       ``S Q / sigma``, Q Haar, S diag chi(d)        O(d^2)
ORFPrime  ``sqrt(d) Q / sigma``                         O(d^2)
SORF      ``sqrt(d) H D1 H D2 H D3 / sigma``            O(d log d)
HDHD      ``sqrt(d) H D1 H D2 / sigma``                 O(d log d)
HD        ``sqrt(d) H D1 / sigma``                      O(d log d)
========  ===========================================  ===================

``D`` output rows are produced by stacking ``ceil(D / d)`` independent blocks
and keeping the first ``D`` rows. Structured kinds zero-pad the input to the
next power of two; dense kinds use the input dimension as is.

The feature vector is ``sqrt(1/D) [sin(Wx), cos(Wx)]`` (all sines first), so
``features(x) @ features(y) = mean(cos(W (x - y)))``.
"""

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import transforms
from .errors import ConfigurationError, DimensionError
from .seeding import STREAM_MAP, child_rng

SPEC_FORMAT_VERSION = 1


class Kind(str, enum.Enum):
    RFF = "RFF"
    ORF = "ORF"
    ORF_PRIME = "ORFPrime"
    SORF = "SORF"
    HDHD = "HDHD"
    HD = "HD"

    @property
    def structured(self):
        return self in (Kind.SORF, Kind.HDHD, Kind.HD)

    @property
    def n_diagonals(self):
        return {Kind.SORF: 3, Kind.HDHD: 2, Kind.HD: 1}.get(self, 0)

    @property
    def cli_name(self):
        return _CLI_NAMES[self]

    @classmethod
    def parse(cls, name):
        if isinstance(name, Kind):
            return name
        key = str(name).strip().lower().replace("_", "-").replace("'", "-prime").replace("′", "-prime")
        try:
            return _ALIASES[key]
        except KeyError:
            valid = ", ".join(k.cli_name for k in cls)
            raise ConfigurationError(f"unknown transform kind {name!r} (expected one of {valid})") from None


_CLI_NAMES = {
    Kind.RFF: "rff",
    Kind.ORF: "orf",
    Kind.ORF_PRIME: "orf-prime",
    Kind.SORF: "sorf",
    Kind.HDHD: "hdhd",
    Kind.HD: "hd",
}
_ALIASES = {name: kind for kind, name in _CLI_NAMES.items()}
_ALIASES.update({
    "orfprime": Kind.ORF_PRIME,
    "orf-prime": Kind.ORF_PRIME,
    "hdhdhd": Kind.SORF,
    "gaussian": Kind.RFF,
})


@dataclass(frozen=True)
class TransformSpec:
    """Declarative description of a feature map; enough to rebuild it exactly."""

    kind: Kind
    d_input: int
    D: int
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        for name in ("d_input", "D"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        sigma = float(self.sigma)
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ConfigurationError(f"sigma must be positive and finite, got {self.sigma!r}")
        object.__setattr__(self, "sigma", sigma)
        if int(self.seed) < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def d_padded(self):
        if self.kind.structured:
            return transforms.next_power_of_two(self.d_input)
        return self.d_input

    @property
    def n_blocks(self):
        return -(-self.D // self.d_padded)

    def replace(self, **changes):
        values = {"kind": self.kind, "d_input": self.d_input, "D": self.D,
                  "sigma": self.sigma, "seed": self.seed}
        values.update(changes)
        return TransformSpec(**values)

    def to_dict(self):
        return {
            "format_version": SPEC_FORMAT_VERSION,
            "kind": self.kind.value,
            "d_input": self.d_input,
            "D": self.D,
            "sigma": self.sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data):
        version = data.get("format_version")
        if version != SPEC_FORMAT_VERSION:
            raise ConfigurationError(f"unsupported feature map format version {version!r}")
        return cls(kind=data["kind"], d_input=data["d_input"], D=data["D"],
                   sigma=data["sigma"], seed=data["seed"])

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DenseBlock:
    """An RFF block: the raw Gaussian matrix (before division by sigma)."""

    gaussian: np.ndarray


@dataclass(frozen=True)
class OrthogonalBlock:
    """An ORF block (``chi`` set) or an ORF' block (``chi`` is None)."""

    rotation: np.ndarray
    chi: np.ndarray | None = None


@dataclass(frozen=True)
class HadamardBlock:
    """A structured block; ``signs[0]`` is applied to the input first."""

    signs: tuple


def draw_arrays(kind, d, rng, size=()):
    """Random state for ``size`` blocks of ``kind`` at (padded) dimension ``d``.

    Returns a dict of stacked arrays with leading shape ``size``:
    ``gaussian`` (RFF), ``rotation`` and ``chi`` (ORF), ``rotation`` (ORF'),
    ``signs`` with shape ``size + (k, d)`` (structured kinds).
    """
    kind = Kind.parse(kind)
    size = transforms._as_shape(size)
    if kind is Kind.RFF:
        return {"gaussian": rng.standard_normal(size + (d, d))}
    if kind is Kind.ORF:
        rotation = transforms.haar_orthogonal_draw(rng, d, size)
        chi = transforms.chi_diagonal_draw(rng, d, size)
        return {"rotation": rotation, "chi": chi}
    if kind is Kind.ORF_PRIME:
        return {"rotation": transforms.haar_orthogonal_draw(rng, d, size)}
    return {"signs": transforms.sign_diagonal_draw(rng, d, size + (kind.n_diagonals,))}


def dense_weights(kind, arrays, d):
    """Unscaled ``d x d`` block matrices (sigma = 1) for the dense kinds."""
    kind = Kind.parse(kind)
    if kind is Kind.RFF:
        return arrays["gaussian"]
    if kind is Kind.ORF:
        return arrays["chi"][..., :, None] * arrays["rotation"]
    if kind is Kind.ORF_PRIME:
        return math.sqrt(d) * arrays["rotation"]
    raise ConfigurationError(f"{kind.value} has no dense weights; use materialize()")


def project_arrays(kind, arrays, x, *, d, D, sigma, weights=None):
    """Compute ``W x`` for stacked block state.

    ``arrays`` carries leading batch shape ``B + (m,)`` (m blocks); ``x`` has
    shape ``B + (p, d_in)`` with ``d_in <= d``. Returns ``B + (p, D)``.
    """
    kind = Kind.parse(kind)
    x = np.asarray(x, dtype=np.float64)
    d_in = x.shape[-1]
    if d_in < d:
        pad = [(0, 0)] * (x.ndim - 1) + [(0, d - d_in)]
        x = np.pad(x, pad)
    elif d_in > d:
        raise DimensionError(f"input length {d_in} exceeds transform dimension {d}")

    if kind.structured:
        signs = arrays["signs"]  # B + (m, k, d)
        xe = x[..., :, None, :]  # B + (p, 1, d)
        diagonals = [signs[..., None, :, j, :] for j in range(signs.shape[-2])]
        u = transforms.apply_hd_chain(xe, diagonals, math.sqrt(d) / sigma)
    else:
        if weights is None:
            weights = dense_weights(kind, arrays, d)  # B + (m, d, d)
        # B + (m, p, d) -> B + (p, m, d)
        u = np.matmul(x[..., None, :, :], np.swapaxes(weights, -1, -2))
        u = np.swapaxes(u, -3, -2)
        u = u / sigma
    u = u.reshape(u.shape[:-2] + (u.shape[-2] * u.shape[-1],))
    return u[..., :D]


def _freeze(arrays):
    for a in arrays.values():
        a.setflags(write=False)
    return arrays


@dataclass(frozen=True)
class FeatureMap:
    """A built, immutable feature map. Create with :func:`build`."""

    spec: TransformSpec
    d_padded: int
    arrays: dict = field(repr=False)
    _weights: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def kind(self):
        return self.spec.kind

    @property
    def D(self):
        return self.spec.D

    @property
    def d_input(self):
        return self.spec.d_input

    @property
    def sigma(self):
        return self.spec.sigma

    @property
    def n_blocks(self):
        return self.spec.n_blocks

    @property
    def blocks(self):
        kind = self.kind
        m = self.n_blocks
        if kind is Kind.RFF:
            return tuple(DenseBlock(self.arrays["gaussian"][b]) for b in range(m))
        if kind is Kind.ORF:
            return tuple(OrthogonalBlock(self.arrays["rotation"][b], self.arrays["chi"][b])
                         for b in range(m))
        if kind is Kind.ORF_PRIME:
            return tuple(OrthogonalBlock(self.arrays["rotation"][b]) for b in range(m))
        signs = self.arrays["signs"]
        return tuple(HadamardBlock(tuple(signs[b, j] for j in range(signs.shape[1])))
                     for b in range(m))

    def to_json(self):
        return self.spec.to_json()

    @classmethod
    def from_json(cls, text):
        return build(TransformSpec.from_json(text))


def build(spec):
    """Draw the random state for ``spec``.

    Block ``b`` is drawn from the stream ``(spec.seed, STREAM_MAP, b)`` so maps
    with a larger ``D`` share their leading blocks with smaller ones.
    """
    if not isinstance(spec, TransformSpec):
        raise ConfigurationError(f"expected a TransformSpec, got {type(spec).__name__}")
    d = spec.d_padded
    per_block = [draw_arrays(spec.kind, d, child_rng(spec.seed, STREAM_MAP, b))
                 for b in range(spec.n_blocks)]
    arrays = {key: np.stack([blk[key] for blk in per_block]) for key in per_block[0]}
    weights = None
    if not spec.kind.structured:
        weights = np.ascontiguousarray(dense_weights(spec.kind, arrays, d))
        weights.setflags(write=False)
    return FeatureMap(spec=spec, d_padded=d, arrays=_freeze(arrays), _weights=weights)


def _check_input(fmap, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise DimensionError(f"expected a vector or an (n, d) matrix, got shape {x.shape}")
    if x.shape[-1] != fmap.d_input:
        raise DimensionError(f"input has length {x.shape[-1]}, map expects {fmap.d_input}")
    return x


def project(fmap, x):
    """``W x`` for a vector (returns length D) or each row of an (n, d) matrix."""
    x = _check_input(fmap, x)
    u = project_arrays(fmap.kind, fmap.arrays, np.atleast_2d(x), d=fmap.d_padded,
                       D=fmap.D, sigma=fmap.sigma, weights=fmap._weights)
    return u[0] if x.ndim == 1 else u


def features_from_projection(u):
    D = u.shape[-1]
    return np.concatenate([np.sin(u), np.cos(u)], axis=-1) / math.sqrt(D)


def features(fmap, x):
    """The 2D-dimensional feature vector(s) ``sqrt(1/D) [sin(Wx), cos(Wx)]``."""
    return features_from_projection(project(fmap, x))


def materialize(fmap):
    """Explicit ``D x d_padded`` matrix of the map.

    Structured maps are expanded by dense products with the explicit Hadamard
    matrix, which makes this an independent check on :func:`project`.
    """
    d = fmap.d_padded
    if fmap.kind.structured:
        scale = math.sqrt(d) / fmap.sigma
        rows = [transforms.hd_chain_matrix(blk.signs, scale) for blk in fmap.blocks]
        w = np.vstack(rows)
    else:
        w = fmap._weights.reshape(-1, d) / fmap.sigma
    return w[:fmap.D]
