"""Point sets: loading, saving and synthetic generation."""

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, InputError, ParseError
from .seeding import STREAM_DATA, child_rng


class Format(str, enum.Enum):
    DENSE_CSV = "dense-csv"
    WHITESPACE = "whitespace"


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    source: str
    d_original: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InputError(f"dataset must be a non-empty (n, d) matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("dataset contains non-finite values")
        if self.d_original > pts.shape[1]:
            raise InputError(f"d_original={self.d_original} exceeds stored width {pts.shape[1]}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


def _split_line(line, fmt):
    if fmt is Format.WHITESPACE:
        return line.split()
    return next(csv.reader([line]))


def parse_dataset(text, fmt=Format.DENSE_CSV, source="<string>"):
    """Parse dense numeric rows; blank lines and lines starting with '#' are skipped."""
    fmt = Format(fmt)
    rows = []
    width = None
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = _split_line(stripped, fmt)
        try:
            values = [float(f) for f in fields]
        except ValueError:
            bad = next(f for f in fields if not _is_float(f))
            raise ParseError(f"non-numeric field {bad!r}", line=lineno, path=source) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError("non-finite value", line=lineno, path=source)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"expected {width} fields, found {len(values)}", line=lineno,
                             path=source)
        rows.append(values)
    if not rows:
        raise ParseError("no data rows", path=source)
    pts = np.array(rows, dtype=np.float64)
    return Dataset(points=pts, source=str(source), d_original=pts.shape[1])


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_dataset(path, fmt=Format.DENSE_CSV):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_dataset(text, fmt, source=str(path))


def format_dataset(points, fmt=Format.DENSE_CSV):
    """Text with 17 significant digits per value, so parsing it back is exact."""
    fmt = Format(fmt)
    sep = "," if fmt is Format.DENSE_CSV else " "
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return "".join(sep.join(f"{v:.17g}" for v in row) + "\n" for row in points)


def save_dataset(dataset, path, fmt=Format.DENSE_CSV):
    pts = getattr(dataset, "points", dataset)
    Path(path).write_text(format_dataset(pts, fmt))


class SynthKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SPHERE = "sphere"


def synth_dataset(kind, n, d, seed):
    """``n`` i.i.d. rows from N(0, I_d) or uniform on the unit sphere."""
    try:
        kind = SynthKind(kind)
    except ValueError:
        raise ConfigurationError(f"unknown synthetic dataset kind {kind!r}") from None
    n, d = int(n), int(d)
    if n < 1 or d < 1:
        raise ConfigurationError(f"n and d must be >= 1, got n={n}, d={d}")
    pts = child_rng(seed, STREAM_DATA).standard_normal((n, d))
    if kind is SynthKind.SPHERE:
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return Dataset(points=pts, source=f"synth:{kind.value}:n={n}:d={d}:seed={seed}", d_original=d)
