"""Grid domains, scalar-field time series, and file ingestion.

A domain is a regular 2D or 3D lattice with per-axis spacing and optional
per-axis wrap-around (e.g. a longitude axis). Vertices are addressed by a
single linear index in C order (last axis fastest). Adjacency follows the
Freudenthal triangulation of the lattice: in 2D the four axis neighbors
plus the (+1,+1)/(-1,-1) diagonal, in 3D the 14-neighbor stencil given by
all offsets in {0,1}^3 and their negatives.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

RAW_MAGIC = b"XTRK"
RAW_VERSION_SERIES = 1
RAW_VERSION_LABELS = 2

# dtype codes in the raw header
_DTYPE_F32 = 0
_DTYPE_F64 = 1
_DTYPE_U32 = 2
_DTYPES = {_DTYPE_F32: np.dtype("<f4"), _DTYPE_F64: np.dtype("<f8"), _DTYPE_U32: np.dtype("<u4")}

SeriesFormat = Literal["raw-f32", "raw-f64", "csv"]


class SeriesFormatError(ValueError):
    """A series file violates the on-disk contract.

    ``offset`` is the byte offset of the offending datum when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class GridDomain:
    """Regular 2D/3D vertex lattice with spacing and per-axis periodicity."""

    dims: tuple[int, ...]
    spacing: tuple[float, ...]
    periodic: tuple[bool, ...]

    def __init__(self, dims, spacing=None, periodic=None):
        dims = tuple(int(d) for d in dims)
        rank = len(dims)
        if spacing is None:
            spacing = (1.0,) * rank
        if periodic is None:
            periodic = (False,) * rank
        spacing = tuple(float(s) for s in spacing)
        periodic = tuple(bool(p) for p in periodic)
        if rank not in (2, 3):
            raise ValueError(f"domain rank must be 2 or 3, got {rank}")
        if any(d < 2 for d in dims):
            raise ValueError(f"every axis needs at least 2 vertices, got dims={dims}")
        if len(spacing) != rank or len(periodic) != rank:
            raise ValueError("dims, spacing and periodic must have equal length")
        if any(not (s > 0.0) or not math.isfinite(s) for s in spacing):
            raise ValueError(f"spacing must be strictly positive, got {spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "periodic", periodic)

    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def vertex_count(self) -> int:
        return int(np.prod(self.dims))

    def coords_of(self, v: int) -> tuple[int, ...]:
        """Lattice coordinate of a linear vertex index (C order)."""
        self._check_vertex(v)
        return tuple(int(c) for c in np.unravel_index(v, self.dims))

    def vertex_at(self, coords: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(int(c) for c in coords), self.dims))

    def position(self, v: int) -> tuple[float, ...]:
        """World position of a vertex (coordinate times spacing, per axis)."""
        return tuple(c * s for c, s in zip(self.coords_of(v), self.spacing))

    def positions(self) -> np.ndarray:
        """World positions of all vertices, shape (vertex_count, rank)."""
        return _positions(self)

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise IndexError(f"vertex {v} out of range for {self.vertex_count} vertices")


def _freudenthal_offsets(rank: int) -> tuple[tuple[int, ...], ...]:
    # All nonzero offsets in {0,1}^rank plus their negatives: 6 in 2D, 14 in 3D.
    ups = [o for o in product((0, 1), repeat=rank) if any(o)]
    return tuple(ups + [tuple(-x for x in o) for o in ups])


@lru_cache(maxsize=16)
def _positions(domain: GridDomain) -> np.ndarray:
    coords = np.indices(domain.dims).reshape(domain.rank, -1).T
    pos = coords * np.asarray(domain.spacing)
    pos.flags.writeable = False
    return pos


@lru_cache(maxsize=16)
def neighbor_table(domain: GridDomain) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex Freudenthal neighbors as a padded (V, K) table.

    Returns ``(nbr, valid)`` where invalid slots (clipped at a non-periodic
    boundary) hold the vertex's own index. Rows may contain duplicates on
    tiny periodic axes. Both arrays are read-only and shared via a cache.
    """
    dims = np.asarray(domain.dims)
    v_ids = np.arange(domain.vertex_count)
    coords = np.indices(domain.dims).reshape(domain.rank, -1)
    offsets = _freudenthal_offsets(domain.rank)
    nbr = np.empty((domain.vertex_count, len(offsets)), dtype=np.int64)
    valid = np.ones_like(nbr, dtype=bool)
    for k, off in enumerate(offsets):
        nc = coords + np.asarray(off)[:, None]
        ok = np.ones(domain.vertex_count, dtype=bool)
        for a in range(domain.rank):
            if domain.periodic[a]:
                nc[a] %= dims[a]
            else:
                ok &= (nc[a] >= 0) & (nc[a] < dims[a])
                np.clip(nc[a], 0, dims[a] - 1, out=nc[a])
        ids = np.ravel_multi_index(tuple(nc), domain.dims)
        nbr[:, k] = np.where(ok, ids, v_ids)
        valid[:, k] = ok
    nbr.flags.writeable = False
    valid.flags.writeable = False
    return nbr, valid


def vertex_neighbors(domain: GridDomain, v: int) -> list[int]:
    """Sorted 1-ring of a vertex under the fixed lattice triangulation."""
    domain._check_vertex(v)
    nbr, valid = neighbor_table(domain)
    ids = np.unique(nbr[v][valid[v]])
    return [int(u) for u in ids if u != v]


def euclidean_ball(domain: GridDomain, center: int, d: float) -> np.ndarray:
    """Vertices within world distance ``d`` of ``center`` (minimum image).

    Always contains the center; returned sorted by vertex id.
    """
    if d < 0:
        raise ValueError(f"d must be non-negative, got {d}")
    cc = domain.coords_of(center)
    # Per-axis candidate coordinates and their squared axis distance.
    axis_coords = []
    axis_d2 = []
    for a, (n, sp, per) in enumerate(zip(domain.dims, domain.spacing, domain.periodic)):
        cs = np.arange(n)
        delta = np.abs(cs - cc[a])
        if per:
            delta = np.minimum(delta, n - delta)
        da = delta * sp
        keep = da <= d
        axis_coords.append(cs[keep])
        axis_d2.append((da[keep]) ** 2)
    grids = np.meshgrid(*axis_d2, indexing="ij")
    total = sum(grids)
    mask = total <= d * d
    coord_grids = np.meshgrid(*axis_coords, indexing="ij")
    ids = np.ravel_multi_index(tuple(g[mask] for g in coord_grids), domain.dims)
    return np.sort(ids)


def minimum_image_distance(domain: GridDomain, pa: Sequence[float], pb: Sequence[float]) -> float:
    """World distance between two positions, wrapping periodic axes."""
    total = 0.0
    for a in range(domain.rank):
        delta = abs(float(pa[a]) - float(pb[a]))
        if domain.periodic[a]:
            period = domain.dims[a] * domain.spacing[a]
            delta %= period
            delta = min(delta, period - delta)
        total += delta * delta
    return math.sqrt(total)


@dataclass(frozen=True, eq=False)
class ScalarFieldSeries:
    """Time-ordered stack of scalar fields sharing one grid domain."""

    domain: GridDomain
    steps: tuple[np.ndarray, ...]
    timestamps: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a series needs at least one time step")
        steps = []
        for t, s in enumerate(self.steps):
            arr = np.asarray(s)
            if arr.dtype not in (np.float32, np.float64):
                arr = arr.astype(np.float64)
            arr = arr.reshape(-1)
            if arr.size != self.domain.vertex_count:
                raise ValueError(
                    f"step {t} has {arr.size} values, domain has {self.domain.vertex_count} vertices"
                )
            if not np.isfinite(arr).all():
                bad = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise ValueError(f"step {t} contains a non-finite value at vertex {bad}")
            arr = arr.copy()
            arr.flags.writeable = False
            steps.append(arr)
        object.__setattr__(self, "steps", tuple(steps))
        if self.timestamps is not None:
            ts = tuple(str(x) for x in self.timestamps)
            if len(ts) != len(steps):
                raise ValueError("timestamps must match the number of steps")
            object.__setattr__(self, "timestamps", ts)

    @property
    def n_steps(self) -> int:
        return len(self.steps)


def _read_exact(fh, n: int, what: str, offset: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise SeriesFormatError(f"truncated file while reading {what}", offset=offset)
    return buf


def _parse_raw_header(fh):
    off = 0
    magic = _read_exact(fh, 4, "magic", off)
    if magic != RAW_MAGIC:
        raise SeriesFormatError(f"bad magic {magic!r}, expected {RAW_MAGIC!r}", offset=0)
    off = 4
    version, rank = struct.unpack("<II", _read_exact(fh, 8, "version/rank", off))
    off += 8
    if rank not in (2, 3):
        raise SeriesFormatError(f"rank must be 2 or 3, got {rank}", offset=8)
    dims = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank, "dims", off))
    off += 4 * rank
    (n_steps,) = struct.unpack("<I", _read_exact(fh, 4, "step count", off))
    off += 4
    dtype_code, periodic_mask = struct.unpack("<BB", _read_exact(fh, 2, "dtype/periodic", off))
    off += 2
    _read_exact(fh, 2, "reserved bytes", off)
    off += 2
    spacing = struct.unpack(f"<{rank}d", _read_exact(fh, 8 * rank, "spacing", off))
    off += 8 * rank
    if dtype_code not in _DTYPES:
        raise SeriesFormatError(f"unknown dtype code {dtype_code}", offset=16 + 4 * rank)
    periodic = tuple(bool(periodic_mask >> a & 1) for a in range(rank))
    return version, dims, n_steps, dtype_code, periodic, spacing, off


def _load_raw(path: Path, expect_code: int) -> ScalarFieldSeries:
    with open(path, "rb") as fh:
        version, dims, n_steps, code, periodic, spacing, payload_off = _parse_raw_header(fh)
        if version != RAW_VERSION_SERIES:
            raise SeriesFormatError(f"unsupported series version {version}", offset=4)
        if code != expect_code:
            raise SeriesFormatError(
                f"dtype code {code} does not match the declared format (expected {expect_code})"
            )
        if n_steps < 1:
            raise SeriesFormatError("series declares zero time steps")
        try:
            domain = GridDomain(dims, spacing, periodic)
        except ValueError as e:
            raise SeriesFormatError(f"invalid domain in header: {e}") from e
        dtype = _DTYPES[code]
        n_values = domain.vertex_count * n_steps
        payload = fh.read()
    expected = n_values * dtype.itemsize
    if len(payload) != expected:
        raise SeriesFormatError(
            f"payload holds {len(payload)} bytes, header declares {expected} "
            f"({n_steps} steps x {domain.vertex_count} vertices)",
            offset=payload_off,
        )
    values = np.frombuffer(payload, dtype=dtype)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        idx = int(bad[0])
        raise SeriesFormatError(
            f"non-finite value at step {idx // domain.vertex_count}, "
            f"vertex {idx % domain.vertex_count}",
            offset=payload_off + idx * dtype.itemsize,
        )
    steps = values.reshape(n_steps, domain.vertex_count)
    return ScalarFieldSeries(domain, tuple(steps[t] for t in range(n_steps)))


def _load_csv(path: Path) -> ScalarFieldSeries:
    """One 2D step per file; each text row spans the last axis."""
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError as e:
                raise SeriesFormatError(f"line {lineno}: {e}") from e
            if rows and len(row) != len(rows[0]):
                raise SeriesFormatError(
                    f"line {lineno} has {len(row)} values, expected {len(rows[0])}"
                )
            rows.append(row)
    if len(rows) < 2 or len(rows[0]) < 2:
        raise SeriesFormatError(f"csv grid must be at least 2x2, got {len(rows)} rows")
    arr = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(arr).all():
        r, c = [int(x[0]) for x in np.nonzero(~np.isfinite(arr))]
        raise SeriesFormatError(f"non-finite value at row {r}, column {c}")
    domain = GridDomain(arr.shape)
    return ScalarFieldSeries(domain, (arr.reshape(-1),))


def load_series(path: str | Path, format: SeriesFormat) -> ScalarFieldSeries:
    """Load a series file in the declared format, validating the layout."""
    path = Path(path)
    if format == "raw-f32":
        return _load_raw(path, _DTYPE_F32)
    if format == "raw-f64":
        return _load_raw(path, _DTYPE_F64)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown series format {format!r}")


def _write_raw_header(fh, domain: GridDomain, n_steps: int, dtype_code: int, version: int):
    rank = domain.rank
    mask = sum(1 << a for a, p in enumerate(domain.periodic) if p)
    fh.write(RAW_MAGIC)
    fh.write(struct.pack("<II", version, rank))
    fh.write(struct.pack(f"<{rank}I", *domain.dims))
    fh.write(struct.pack("<I", n_steps))
    fh.write(struct.pack("<BBxx", dtype_code, mask))
    fh.write(struct.pack(f"<{rank}d", *domain.spacing))


def save_series(series: ScalarFieldSeries, path: str | Path) -> None:
    """Write a series in the raw layout, keeping its value dtype."""
    code = _DTYPE_F32 if series.steps[0].dtype == np.float32 else _DTYPE_F64
    dtype = _DTYPES[code]
    with open(path, "wb") as fh:
        _write_raw_header(fh, series.domain, series.n_steps, code, RAW_VERSION_SERIES)
        for step in series.steps:
            fh.write(step.astype(dtype, copy=False).tobytes())


def save_labels(labels: np.ndarray, domain: GridDomain, path: str | Path) -> None:
    """Debug dump of a per-vertex label array (u32 payload variant)."""
    arr = np.asarray(labels)
    if arr.size != domain.vertex_count:
        raise ValueError("label array does not match the domain")
    with open(path, "wb") as fh:
        _write_raw_header(fh, domain, 1, _DTYPE_U32, RAW_VERSION_LABELS)
        fh.write(arr.astype("<u4").tobytes())


def load_labels(path: str | Path) -> tuple[np.ndarray, GridDomain]:
    with open(path, "rb") as fh:
        version, dims, n_steps, code, periodic, spacing, payload_off = _parse_raw_header(fh)
        if version != RAW_VERSION_LABELS or code != _DTYPE_U32 or n_steps != 1:
            raise SeriesFormatError("not a label dump")
        domain = GridDomain(dims, spacing, periodic)
        payload = fh.read()
    expected = domain.vertex_count * 4
    if len(payload) != expected:
        raise SeriesFormatError(
            f"payload holds {len(payload)} bytes, expected {expected}", offset=payload_off
        )
    return np.frombuffer(payload, dtype="<u4").astype(np.int32), domain


def stack_series(parts: Sequence[ScalarFieldSeries]) -> ScalarFieldSeries:
    """Concatenate single-file series (e.g. per-step CSV files) in time order."""
    if not parts:
        raise ValueError("no series to stack")
    domain = parts[0].domain
    for p in parts[1:]:
        if p.domain != domain:
            raise ValueError("all parts must share one domain")
    steps = tuple(s for p in parts for s in p.steps)
    stamps = None
    if all(p.timestamps is not None for p in parts):
        stamps = tuple(t for p in parts for t in p.timestamps)
    return ScalarFieldSeries(domain, steps, stamps)
