"""Voronoi assignment and the neighborhood-weighted variance criterion.

The criterion charges each observation the squared distances to every
centroid, weighted by the neighborhood value between the observation's
cell and the centroid's site, and halves the mean:

    cost(w) = sum_j L(cell(w) - j) |x_j - w|^2
    Vn(x)   = (1 / 2n) sum_k cost(w_k)

Ties in the nearest-centroid assignment are broken by lexicographic
order on the lattice, comparing squared distances exactly as computed,
with no tolerance window. All accumulations over observations use
exact (Shewchuk) summation, so results are independent of chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ValidationError
from .lattice import Lattice, NeighborhoodKernel
from .parallel import run_chunked


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Observations in the unit cube, one row per observation."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValidationError(f"samples must be a 2-d array, got shape {self.points.shape}")
        if pts.shape[0] < 1:
            raise ValidationError("sample set must contain at least one observation")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("samples must be finite")
        if pts.min(initial=0.0) < 0.0 or pts.max(initial=0.0) > 1.0:
            raise ValidationError("sample coordinates must lie in [0, 1]")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class CentroidConfiguration:
    """One centroid per lattice site, rows in lexicographic site order."""

    lattice: Lattice
    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] != self.lattice.size:
            raise ValidationError(
                f"centroid array shape {self.points.shape} does not match lattice size {self.lattice.size}"
            )
        if self.lattice.ndim > pts.shape[1]:
            raise ValidationError(
                f"lattice dimension {self.lattice.ndim} exceeds data dimension {pts.shape[1]}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValidationError("centroid coordinates must be finite")
        if pts.min(initial=0.0) < 0.0 or pts.max(initial=0.0) > 1.0:
            raise ValidationError("centroid coordinates must lie in [0, 1]")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def point_for(self, index: Sequence[int] | int) -> np.ndarray:
        """Centroid attached to a lattice index."""
        return self.points[self.lattice.rank(index)]

    def separation(self) -> float:
        """Minimum pairwise distance between centroids; inf for a single site."""
        return separation(self.points)


def separation(points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=np.float64)
    k = pts.shape[0]
    if k < 2:
        return math.inf
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = (diff * diff).sum(axis=-1)
    d2[np.arange(k), np.arange(k)] = np.inf
    return float(np.sqrt(d2.min()))


@dataclass(frozen=True, eq=False)
class Assignment:
    """Cell labels (lexicographic site ranks) with per-cell counts and sums."""

    labels: np.ndarray
    counts: np.ndarray
    sums: np.ndarray

    @property
    def n(self) -> int:
        return self.labels.shape[0]


def _check_dims(samples_d: int, config: CentroidConfiguration, kernel: NeighborhoodKernel | None = None) -> None:
    if samples_d != config.d:
        raise ValidationError(f"data dimension {samples_d} does not match centroid dimension {config.d}")
    if kernel is not None and kernel.lattice.dims != config.lattice.dims:
        raise ValidationError(
            f"kernel lattice {kernel.lattice.dims} does not match configuration lattice {config.lattice.dims}"
        )


def sq_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (n, size).

    Computed as an elementwise square followed by a sum over the
    coordinate axis. This is the single distance kernel used everywhere,
    so assignment decisions agree bitwise across batch sizes.
    """
    diff = points[:, None, :] - centroids[None, :, :]
    return (diff * diff).sum(axis=-1)


def _labels_chunk(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # np.argmin returns the first minimizer, which is the lexicographically
    # smallest site since centroid rows follow lattice order.
    return np.argmin(sq_distances(points, centroids), axis=1)


def assign_batch(samples: SampleSet, config: CentroidConfiguration, workers: int = 1) -> np.ndarray:
    """Cell ranks for every observation."""
    _check_dims(samples.d, config)
    pts = samples.points
    out = np.empty(samples.n, dtype=np.int64)

    def work(s: int, e: int) -> None:
        out[s:e] = _labels_chunk(pts[s:e], config.points)

    run_chunked(work, samples.n, workers)
    return out


def assign(omega: Sequence[float], config: CentroidConfiguration) -> tuple[int, ...]:
    """Lattice index of the cell containing one observation.

    Among centroids at exactly minimal computed squared distance, the
    lexicographically smallest site wins.
    """
    w = np.atleast_2d(np.asarray(omega, dtype=np.float64))
    if w.shape[1] != config.d:
        raise ValidationError(f"observation dimension {w.shape[1]} does not match centroid dimension {config.d}")
    rank = int(_labels_chunk(w, config.points)[0])
    return config.lattice.site(rank)


def partition(samples: SampleSet, config: CentroidConfiguration, workers: int = 1) -> Assignment:
    """Assign every observation and accumulate per-cell counts and coordinate sums."""
    labels = assign_batch(samples, config, workers)
    k = config.lattice.size
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    sums = np.empty((k, config.d), dtype=np.float64)
    for c in range(config.d):
        # bincount accumulates in observation order, one sequential pass
        sums[:, c] = np.bincount(labels, weights=samples.points[:, c], minlength=k)
    return Assignment(labels=labels, counts=counts, sums=sums)


def point_costs(
    samples: SampleSet,
    config: CentroidConfiguration,
    kernel: NeighborhoodKernel,
    labels: np.ndarray | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Per-observation neighborhood-weighted cost, shape (n,).

    With ``labels`` given, cells are taken as supplied instead of being
    recomputed; this is the frozen-partition evaluation used by the
    optimizer checks.
    """
    _check_dims(samples.d, config, kernel)
    pts = samples.points
    weights = kernel.matrix
    out = np.empty(samples.n, dtype=np.float64)

    def work(s: int, e: int) -> None:
        d2 = sq_distances(pts[s:e], config.points)
        lab = labels[s:e] if labels is not None else np.argmin(d2, axis=1)
        out[s:e] = np.einsum("nk,nk->n", weights[lab], d2)

    run_chunked(work, samples.n, workers)
    return out


def point_cost(
    omega: Sequence[float], config: CentroidConfiguration, kernel: NeighborhoodKernel
) -> float:
    """Neighborhood-weighted cost of a single observation.

    Bounded by size * d on the unit cube.
    """
    w = np.atleast_2d(np.asarray(omega, dtype=np.float64))
    if w.shape[1] != config.d:
        raise ValidationError(f"observation dimension {w.shape[1]} does not match centroid dimension {config.d}")
    return float(point_costs(SampleSet(w), config, kernel)[0])


def exact_sum(values: np.ndarray) -> float:
    """Exactly rounded sum of a float array (Shewchuk algorithm).

    Order independent, hence bitwise reproducible under any chunking.
    """
    return math.fsum(values.tolist())


def empirical_variance(
    samples: SampleSet,
    config: CentroidConfiguration,
    kernel: NeighborhoodKernel,
    workers: int = 1,
) -> float:
    """Neighborhood-weighted empirical variance, half the mean point cost."""
    g = point_costs(samples, config, kernel, workers=workers)
    return exact_sum(g) / (2.0 * samples.n)


def empirical_variance_grouped(
    samples: SampleSet,
    config: CentroidConfiguration,
    kernel: NeighborhoodKernel,
) -> float:
    """Same criterion accumulated cell by cell.

    Sums squared distances per (cell, centroid) pair, then combines the
    weighted pair totals, everything with exact summation. Agrees with
    :func:`empirical_variance` to accumulation-order effects below 1e-12.
    """
    _check_dims(samples.d, config, kernel)
    labels = assign_batch(samples, config)
    d2 = sq_distances(samples.points, config.points)
    weights = kernel.matrix
    k = config.lattice.size
    terms = []
    for i in range(k):
        member = labels == i
        for j in range(k):
            w = weights[i, j]
            if member.any():
                terms.append(w * math.fsum(d2[member, j].tolist()))
            else:
                terms.append(0.0)
    return math.fsum(terms) / (2.0 * samples.n)


class McEstimate(NamedTuple):
    estimate: float
    stderr: float


def mc_variance(
    config: CentroidConfiguration,
    kernel: NeighborhoodKernel,
    sampler,
    count: int,
    seed: int,
    workers: int = 1,
) -> McEstimate:
    """Monte Carlo estimate of the theoretical neighborhood-weighted variance.

    Draws ``count`` observations from the sampler, averages half the
    point cost, and reports the standard error of that mean. The result
    is deterministic given the seed and independent of ``workers``.
    """
    if count < 2:
        raise ValidationError(f"mc_variance needs at least 2 draws, got {count}")
    draws = sampler.sample(count, seed, workers=workers)
    samples = SampleSet(draws)
    half = point_costs(samples, config, kernel, workers=workers) * 0.5
    mean = exact_sum(half) / count
    dev = half - mean
    ss = exact_sum(dev * dev)
    stderr = math.sqrt(ss / (count - 1)) / math.sqrt(count)
    return McEstimate(estimate=mean, stderr=stderr)
