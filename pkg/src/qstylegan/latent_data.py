"""Latent datasets: CSV/binary I/O, synthetic target distributions, batching and seeded streams."""
from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ConfigurationError, ParseError

RNG_ALGORITHM = "PCG64"

LOGNORMAL_SIGMA = 0.558
LOGNORMAL_SHIFT = -2.0
SIN_RANGE = 3.0

_MAGIC = b"QSGLATNT"
_VERSION = 1


def make_rng(seed: int, label: str = "") -> np.random.Generator:
    """Independent, reproducible stream for ``(seed, label)``.

    The label is hashed into the SeedSequence entropy so distinct labels give
    distinct streams under the same master seed.
    """
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    if label:
        digest = hashlib.sha256(label.encode()).digest()
        words += list(struct.unpack("<4Q", digest))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


@dataclass(frozen=True)
class LatentDataset:
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise ArgumentError(f"dataset rows must be a 2-D matrix with >= 1 column, got {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ArgumentError("dataset contains non-finite values")
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]


# ---------------------------------------------------------------------------
# CSV / binary


def _format(v: float) -> str:
    return repr(float(v))


def save_csv(dataset, path, header=None) -> None:
    rows = dataset.rows if isinstance(dataset, LatentDataset) else np.asarray(dataset, dtype=float)
    with open(path, "w", newline="\n") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format(v) for v in row) + "\n")


def _is_numeric_row(cells) -> bool:
    try:
        [float(c) for c in cells]
    except ValueError:
        return False
    return True


def load_csv(path) -> LatentDataset:
    """Read a rectangular numeric CSV; a non-numeric first line is treated as a header."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    values = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        if lineno == 1 and not _is_numeric_row(cells):
            continue
        try:
            row = [float(c) for c in cells]
        except ValueError:
            bad = next(c for c in cells if not _is_numeric_row([c]))
            raise ParseError(f"non-numeric cell {bad!r}", line=lineno) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"expected {width} columns, got {len(row)}", line=lineno)
        values.append(row)
    if not values:
        raise ParseError(f"{Path(path).name}: no data rows")
    return LatentDataset(np.array(values))


def save_binary(dataset: LatentDataset, path) -> None:
    """16-byte header (8-byte magic, u32 version, u32 reserved), u64 rows, u64 dim, LE float64 data."""
    rows = dataset.rows
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<II", _VERSION, 0))
        fh.write(struct.pack("<QQ", rows.shape[0], rows.shape[1]))
        fh.write(rows.astype("<f8").tobytes())


def load_binary(path) -> LatentDataset:
    data = Path(path).read_bytes()
    if len(data) < 32 or data[:8] != _MAGIC:
        raise ParseError("not a latent binary file")
    version, _ = struct.unpack("<II", data[8:16])
    if version != _VERSION:
        raise ParseError(f"unsupported binary version {version}")
    n, dim = struct.unpack("<QQ", data[16:32])
    body = data[32:]
    if len(body) != 8 * n * dim:
        raise ParseError(f"expected {n}x{dim} values, file holds {len(body) // 8}")
    return LatentDataset(np.frombuffer(body, dtype="<f8").reshape(n, dim))


# ---------------------------------------------------------------------------
# synthetic targets


class DistributionKind(str, enum.Enum):
    UNIFORM01 = "uniform"
    STANDARD_NORMAL = "normal"
    SHIFTED_LOGNORMAL = "lognormal"
    SIN_THREE_PEAK = "sin3"


@dataclass(frozen=True)
class DistributionSpec:
    kind: DistributionKind
    dim: int
    sigma: float = LOGNORMAL_SIGMA
    shift: float = LOGNORMAL_SHIFT

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", DistributionKind(str(getattr(self.kind, "value", self.kind)).lower()))
        except ValueError:
            choices = ", ".join(k.value for k in DistributionKind)
            raise ConfigurationError(f"unknown distribution {self.kind!r}; choose from {choices}") from None
        if int(self.dim) < 1:
            raise ConfigurationError(f"dim must be >= 1, got {self.dim}")
        if self.sigma <= 0:
            raise ConfigurationError("sigma must be positive")


def sin_three_peak_density(x):
    """Unnormalized density ``cos(pi x / 2)**2`` on [-3, 3]: peaks at -2, 0, 2."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= SIN_RANGE, np.cos(0.5 * np.pi * x) ** 2, 0.0)


def _sample_sin_three_peak(rng, size):
    out = np.empty(size)
    flat = out.reshape(-1)
    filled = 0
    while filled < flat.size:
        need = flat.size - filled
        x = rng.uniform(-SIN_RANGE, SIN_RANGE, size=2 * need + 16)
        u = rng.uniform(0.0, 1.0, size=x.size)
        accepted = x[u < sin_three_peak_density(x)][:need]
        flat[filled:filled + accepted.size] = accepted
        filled += accepted.size
    return out


def sample_synthetic(spec: DistributionSpec, n: int, seed: int) -> LatentDataset:
    if int(n) < 1:
        raise ArgumentError(f"n must be >= 1, got {n}")
    rng = make_rng(seed, f"synthetic/{spec.kind.value}")
    size = (int(n), int(spec.dim))
    if spec.kind is DistributionKind.UNIFORM01:
        rows = rng.uniform(0.0, 1.0, size=size)
    elif spec.kind is DistributionKind.STANDARD_NORMAL:
        rows = rng.standard_normal(size=size)
    elif spec.kind is DistributionKind.SHIFTED_LOGNORMAL:
        rows = rng.lognormal(0.0, spec.sigma, size=size) + spec.shift
    else:
        rows = _sample_sin_three_peak(rng, size)
    return LatentDataset(rows)


# ---------------------------------------------------------------------------
# batching


def batches(dataset: LatentDataset, batch_size: int, seed=None, shuffle: bool = True,
            drop_last: bool = True, rng: np.random.Generator | None = None):
    """Split into batches; permutation drawn from ``rng`` (or a stream of ``seed``) when shuffling."""
    n = len(dataset)
    if int(batch_size) < 1:
        raise ArgumentError(f"batch_size must be >= 1, got {batch_size}")
    if batch_size > n:
        raise ArgumentError(f"batch_size {batch_size} exceeds dataset size {n}")
    if shuffle:
        if rng is None:
            rng = make_rng(0 if seed is None else seed, "batches")
        order = rng.permutation(n)
    else:
        order = np.arange(n)
    stop = n - n % batch_size if drop_last else n
    return [dataset.rows[order[i:i + batch_size]] for i in range(0, stop, batch_size)]
