"""Index lattice and neighborhood weighting.

The lattice is a finite box in Z^e enumerated in lexicographic order;
the neighborhood function assigns a weight in [0, 1] to every offset
between two lattice sites. Weights are symmetric and equal 1 at offset
zero. Both objects are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidKernelError, InvalidLatticeError, ValidationError

KERNEL_KINDS = ("kronecker", "gaussian", "rectangular", "table")


@dataclass(frozen=True)
class Lattice:
    """Finite box {0..m_1-1} x ... x {0..m_e-1} in Z^e.

    Sites are enumerated lexicographically; the enumeration order is the
    tie-break order for assignment and the row order for serialization.
    """

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.dims) == 0:
            raise InvalidLatticeError("lattice dims must be nonempty")
        for m in self.dims:
            if not isinstance(m, (int, np.integer)) or m < 1:
                raise InvalidLatticeError(f"lattice dims must be positive integers, got {self.dims}")
        object.__setattr__(self, "dims", tuple(int(m) for m in self.dims))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def indices(self) -> np.ndarray:
        """All sites as an int array of shape (size, ndim), lexicographic order."""
        grids = np.indices(self.dims).reshape(self.ndim, -1).T
        arr = np.ascontiguousarray(grids, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def site(self, rank: int) -> tuple[int, ...]:
        """Lattice index of the site at position ``rank`` in lexicographic order."""
        return tuple(int(v) for v in self.indices[rank])

    def rank(self, index: Sequence[int] | int) -> int:
        """Lexicographic position of a lattice index."""
        idx = self._as_tuple(index)
        r = 0
        for v, m in zip(idx, self.dims):
            if not 0 <= v < m:
                raise ValidationError(f"index {idx} outside lattice with dims {self.dims}")
            r = r * m + v
        return r

    def _as_tuple(self, index: Sequence[int] | int) -> tuple[int, ...]:
        if isinstance(index, (int, np.integer)):
            index = (int(index),)
        idx = tuple(int(v) for v in index)
        if len(idx) != self.ndim:
            raise ValidationError(f"index {idx} has {len(idx)} axes, lattice has {self.ndim}")
        return idx

    def contains_offset(self, offset: tuple[int, ...]) -> bool:
        """True when ``offset`` lies in the difference set of the lattice."""
        return all(abs(k) <= m - 1 for k, m in zip(offset, self.dims))

    def offsets(self) -> Iterable[tuple[int, ...]]:
        """All offsets of the difference set, lexicographic order."""
        ranges = [range(-(m - 1), m) for m in self.dims]
        grids = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, self.ndim)
        for row in grids:
            yield tuple(int(v) for v in row)


def build_lattice(dims: Sequence[int]) -> Lattice:
    """Construct the lattice for the given per-axis sizes."""
    return Lattice(tuple(dims))


@dataclass(frozen=True, eq=False)
class NeighborhoodKernel:
    """Neighborhood weights resolved on the difference set of a lattice.

    Values are materialized once into a dense table so the symmetry,
    range, and center invariants are checked a single time and lookups
    in inner loops are branch free.
    """

    lattice: Lattice
    kind: str
    params: tuple[tuple[str, float], ...] = ()
    table: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        shape = tuple(2 * m - 1 for m in self.lattice.dims)
        if self.table is None or self.table.shape != shape:
            raise InvalidKernelError("kernel table shape does not match the lattice difference set")
        self._validate_table()
        self.table.setflags(write=False)

    def _validate_table(self) -> None:
        t = self.table
        if not np.all(np.isfinite(t)):
            raise InvalidKernelError("kernel values must be finite")
        if t.min() < 0.0 or t.max() > 1.0:
            raise InvalidKernelError("kernel values must lie in [0, 1]")
        center = tuple(m - 1 for m in self.lattice.dims)
        if t[center] != 1.0:
            raise InvalidKernelError("kernel value at offset 0 must be 1")
        flipped = t[tuple(slice(None, None, -1) for _ in self.lattice.dims)]
        if not np.array_equal(t, flipped):
            raise InvalidKernelError("kernel values must be symmetric under offset negation")

    def value(self, offset: Sequence[int] | int) -> float:
        """Weight at a lattice offset; the offset must lie in the difference set."""
        if isinstance(offset, (int, np.integer)):
            offset = (int(offset),)
        off = tuple(int(v) for v in offset)
        if len(off) != self.lattice.ndim:
            raise ValidationError(f"offset {off} has {len(off)} axes, lattice has {self.lattice.ndim}")
        if not self.lattice.contains_offset(off):
            raise ValidationError(f"offset {off} outside the difference set of dims {self.lattice.dims}")
        pos = tuple(k + m - 1 for k, m in zip(off, self.lattice.dims))
        return float(self.table[pos])

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense (size, size) weight matrix over pairs of sites."""
        idx = self.lattice.indices
        diff = idx[:, None, :] - idx[None, :, :]
        pos = diff + (np.asarray(self.lattice.dims, dtype=np.int64) - 1)
        flat = np.ravel_multi_index(tuple(np.moveaxis(pos, -1, 0)), self.table.shape)
        mat = self.table.reshape(-1)[flat]
        out = np.ascontiguousarray(mat, dtype=np.float64)
        out.setflags(write=False)
        return out


def _offset_norms_sq(lattice: Lattice) -> np.ndarray:
    ranges = [np.arange(-(m - 1), m, dtype=np.float64) for m in lattice.dims]
    grids = np.meshgrid(*[r**2 for r in ranges], indexing="ij")
    return sum(grids)


def kronecker_kernel(lattice: Lattice) -> NeighborhoodKernel:
    """Weight 1 at offset 0 and 0 elsewhere. Recovers the plain K-means criterion."""
    table = np.zeros(tuple(2 * m - 1 for m in lattice.dims))
    table[tuple(m - 1 for m in lattice.dims)] = 1.0
    return NeighborhoodKernel(lattice, "kronecker", (), table)


def gaussian_kernel(lattice: Lattice, sigma: float) -> NeighborhoodKernel:
    """exp(-|k|^2 / (2 sigma^2)) on the difference set."""
    if not sigma > 0:
        raise InvalidKernelError(f"gaussian kernel needs sigma > 0, got {sigma}")
    table = np.exp(-_offset_norms_sq(lattice) / (2.0 * float(sigma) ** 2))
    return NeighborhoodKernel(lattice, "gaussian", (("sigma", float(sigma)),), table)


def rectangular_kernel(lattice: Lattice, radius: int) -> NeighborhoodKernel:
    """1 on offsets with sup-norm at most ``radius``, 0 beyond."""
    if not isinstance(radius, (int, np.integer)) or radius < 0:
        raise InvalidKernelError(f"rectangular kernel needs integer radius >= 0, got {radius}")
    ranges = [np.abs(np.arange(-(m - 1), m)) for m in lattice.dims]
    sup = np.maximum.reduce(np.meshgrid(*ranges, indexing="ij"))
    table = (sup <= int(radius)).astype(np.float64)
    return NeighborhoodKernel(lattice, "rectangular", (("radius", float(radius)),), table)


def table_kernel(lattice: Lattice, values: Mapping) -> NeighborhoodKernel:
    """Explicit offset-to-weight mapping; must cover the whole difference set."""
    shape = tuple(2 * m - 1 for m in lattice.dims)
    table = np.full(shape, np.nan)
    for key, val in values.items():
        if isinstance(key, (int, np.integer)):
            key = (int(key),)
        off = tuple(int(v) for v in key)
        if len(off) != lattice.ndim or not lattice.contains_offset(off):
            raise InvalidKernelError(f"table offset {off} outside the difference set of dims {lattice.dims}")
        pos = tuple(k + m - 1 for k, m in zip(off, lattice.dims))
        table[pos] = float(val)
    if np.isnan(table).any():
        missing = int(np.isnan(table).sum())
        raise InvalidKernelError(f"table kernel missing {missing} offsets of the difference set")
    return NeighborhoodKernel(lattice, "table", (), table)


def kernel_from_spec(lattice: Lattice, spec: Mapping) -> NeighborhoodKernel:
    """Build a kernel from a configuration mapping.

    Expected shapes: {"kind": "kronecker"}, {"kind": "gaussian", "sigma": s},
    {"kind": "rectangular", "radius": r}, or {"kind": "table", "values":
    {"0": 1.0, "1": 0.5, ...}} with offsets keyed by comma-separated integers.
    """
    if not isinstance(spec, Mapping) or "kind" not in spec:
        raise InvalidKernelError("kernel spec must be a mapping with a 'kind' key")
    kind = spec["kind"]
    extra = set(spec) - {"kind", "sigma", "radius", "values"}
    if extra:
        raise InvalidKernelError(f"unknown kernel spec keys: {sorted(extra)}")
    if kind == "kronecker":
        _require_keys(spec, set())
        return kronecker_kernel(lattice)
    if kind == "gaussian":
        _require_keys(spec, {"sigma"})
        return gaussian_kernel(lattice, _as_float(spec["sigma"], "kernel.sigma"))
    if kind == "rectangular":
        _require_keys(spec, {"radius"})
        radius = spec["radius"]
        if not isinstance(radius, (int, np.integer)):
            raise InvalidKernelError(f"kernel.radius must be an integer, got {radius!r}")
        return rectangular_kernel(lattice, int(radius))
    if kind == "table":
        _require_keys(spec, {"values"})
        values = spec["values"]
        if not isinstance(values, Mapping):
            raise InvalidKernelError("kernel.values must be a mapping of offsets to weights")
        parsed = {}
        for key, val in values.items():
            offset = _parse_offset_key(key)
            parsed[offset] = _as_float(val, f"kernel.values[{key!r}]")
        return table_kernel(lattice, parsed)
    raise InvalidKernelError(f"unknown kernel kind {kind!r}, expected one of {KERNEL_KINDS}")


def _require_keys(spec: Mapping, allowed: set) -> None:
    present = set(spec) - {"kind"}
    if present != allowed:
        raise InvalidKernelError(
            f"kernel kind {spec['kind']!r} takes keys {sorted(allowed)}, got {sorted(present)}"
        )


def _as_float(value, label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
        raise InvalidKernelError(f"{label} must be a number, got {value!r}")
    return float(value)


def _parse_offset_key(key) -> tuple[int, ...]:
    if isinstance(key, (int, np.integer)):
        return (int(key),)
    if isinstance(key, str):
        try:
            return tuple(int(part.strip()) for part in key.split(","))
        except ValueError:
            pass
    raise InvalidKernelError(f"cannot parse table offset key {key!r}")


def neighborhood_value(kernel: NeighborhoodKernel, offset: Sequence[int] | int) -> float:
    """Functional form of :meth:`NeighborhoodKernel.value`."""
    return kernel.value(offset)
