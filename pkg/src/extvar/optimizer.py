"""Batch fixed-point minimization of the neighborhood-weighted variance.

The update alternates Voronoi partitioning with the closed-form
frozen-partition minimizer (a generalized Lloyd step: each centroid
moves to a kernel-weighted mean of cell sums). For a kronecker kernel
this is exactly the classical K-means iteration. The alternation is not
guaranteed monotone for wider kernels, because Voronoi reassignment is
not the greedy assignment for the weighted cost, so the search keeps the
best configuration seen anywhere rather than trusting the last iterate.

Multi-start search draws per-restart substreams from (seed, restart
index), which makes results independent of scheduling and worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import FitError, ValidationError
from .lattice import NeighborhoodKernel
from .parallel import run_indexed
from .quantizer import (
    Assignment,
    CentroidConfiguration,
    SampleSet,
    empirical_variance,
    exact_sum,
    partition,
    point_costs,
    separation,
)

SEED_MASK = 0xFFFFFFFFFFFFFFFF
REPAIR_PASS_FACTOR = 10

_INIT_SCHEMES = ("subsample", "plusplus")
_QUASI_KINDS = ("sqrt", "linear", "constant")


@dataclass(frozen=True)
class FitParams:
    """Search budget and constraint settings for `fit`."""

    restarts: int = 20
    max_iter: int = 200
    rel_tol: float = 1e-10
    delta: float = 0.0
    init: str = "subsample"
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.restarts, (int, np.integer)) or self.restarts < 1:
            raise ValidationError(f"restarts must be a positive integer, got {self.restarts}")
        # max_iter 0 is a legal degenerate budget: evaluate initial configurations only
        if not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 0:
            raise ValidationError(f"max_iter must be a nonnegative integer, got {self.max_iter}")
        if not self.rel_tol > 0 or not math.isfinite(self.rel_tol):
            raise ValidationError(f"rel_tol must be a positive real, got {self.rel_tol}")
        if not self.delta >= 0 or not math.isfinite(self.delta):
            raise ValidationError(f"delta must be a nonnegative real, got {self.delta}")
        if self.init not in _INIT_SCHEMES:
            raise ValidationError(f"init must be one of {_INIT_SCHEMES}, got {self.init!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise ValidationError(f"seed must be an integer, got {self.seed!r}")


@dataclass(frozen=True)
class QuasiMinimizerSpec:
    """Slack schedule 1/beta(n) for the quasi-minimizer membership test.

    kind 'sqrt' uses beta(n) = sqrt(n) (the default), 'linear' uses
    beta(n) = c*n, 'constant' uses beta(n) = c. All choices keep beta
    strictly positive; sqrt and linear grow without bound.
    """

    kind: str = "sqrt"
    c: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in _QUASI_KINDS:
            raise ValidationError(f"quasi-minimizer kind must be one of {_QUASI_KINDS}, got {self.kind!r}")
        if not self.c > 0 or not math.isfinite(self.c):
            raise ValidationError(f"quasi-minimizer coefficient must be a positive real, got {self.c}")

    def beta(self, n: int) -> float:
        if n < 1:
            raise ValidationError(f"sample count must be positive, got {n}")
        if self.kind == "sqrt":
            return math.sqrt(n)
        if self.kind == "linear":
            return self.c * n
        return self.c

    def radius(self, n: int) -> float:
        return 1.0 / self.beta(n)


class StepState(NamedTuple):
    """One evaluated configuration along a restart trajectory."""

    points: np.ndarray
    labels: np.ndarray
    vn: float


@dataclass(frozen=True)
class RestartRecord:
    restart: int
    final_vn: float
    iterations: int
    separation: float
    repairs: int


@dataclass(frozen=True)
class FitResult:
    best_config: CentroidConfiguration
    best_vn: float
    per_restart: tuple[RestartRecord, ...]
    quasi_radius: float
    histories: tuple[tuple[StepState, ...], ...] | None = None


def batch_update(
    assignment: Assignment,
    kernel: NeighborhoodKernel,
    previous: CentroidConfiguration,
) -> CentroidConfiguration:
    """Frozen-partition minimizer: kernel-weighted means of cell sums.

    A site whose weighted count is zero keeps its previous centroid.
    Coordinates are convex combinations of sample coordinates; the clip
    only absorbs last-ulp rounding past the box faces.
    """
    weights = kernel.matrix
    denom = weights @ assignment.counts.astype(np.float64)
    numer = weights @ assignment.sums
    pts = previous.points.copy()
    live = denom > 0
    pts[live] = numer[live] / denom[live, None]
    np.clip(pts, 0.0, 1.0, out=pts)
    return CentroidConfiguration(previous.lattice, pts)


def frozen_cost(
    samples: SampleSet,
    config: CentroidConfiguration,
    kernel: NeighborhoodKernel,
    labels: np.ndarray,
    workers: int = 1,
) -> float:
    """Objective value with the cell labels held fixed (not recomputed)."""
    g = point_costs(samples, config, kernel, labels=labels, workers=workers)
    return exact_sum(g) / (2.0 * samples.n)


def frozen_gradient(
    assignment: Assignment,
    kernel: NeighborhoodKernel,
    config: CentroidConfiguration,
) -> np.ndarray:
    """Gradient of the frozen-partition objective, shape (size, d).

    Row j is (1/n) * (weighted count * x_j - weighted sum); it vanishes
    exactly at the batch_update output for sites with positive weight.
    """
    weights = kernel.matrix
    denom = weights @ assignment.counts.astype(np.float64)
    numer = weights @ assignment.sums
    return (denom[:, None] * config.points - numer) / assignment.n


def _closest_pair(pts: np.ndarray) -> tuple[int, int, float]:
    k = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = (diff * diff).sum(axis=-1)
    d2[np.tril_indices(k)] = np.inf
    flat = int(np.argmin(d2))
    i, j = divmod(flat, k)
    return i, j, float(math.sqrt(d2[i, j]))


def _push_apart(points: np.ndarray, delta: float, max_passes: int) -> tuple[np.ndarray, int]:
    """Repair separation by moving closest pairs to distance exactly delta.

    Returns (repaired points, number of pushes). Raises when the pass
    budget runs out, which for tight packings is the infeasibility signal.
    """
    pts = points.copy()
    k = pts.shape[0]
    if k < 2 or delta <= 0:
        return pts, 0
    pushes = 0
    pad = 2.0**-48
    for _ in range(max_passes):
        if separation(pts) >= delta:
            return pts, pushes
        i, j, _ = _closest_pair(pts)
        gap = pts[j] - pts[i]
        norm = math.sqrt(float((gap * gap).sum()))
        if norm == 0.0:
            direction = np.zeros(pts.shape[1])
            direction[0] = 1.0
        else:
            direction = gap / norm
        mid = (pts[i] + pts[j]) / 2.0
        offset = (delta / 2.0) * direction
        cand_i = np.clip(mid - offset, 0.0, 1.0)
        cand_j = np.clip(mid + offset, 0.0, 1.0)
        if np.array_equal(cand_i, pts[i]) and np.array_equal(cand_j, pts[j]):
            # rounding stall: the exact-delta push reproduced the current
            # positions while the measured distance is still short, so
            # grow the push by a few ulps until something moves
            offset = (delta / 2.0) * (1.0 + pad) * direction
            pad *= 2.0
            cand_i = np.clip(mid - offset, 0.0, 1.0)
            cand_j = np.clip(mid + offset, 0.0, 1.0)
        pts[i] = cand_i
        pts[j] = cand_j
        pushes += 1
    raise FitError(
        f"could not reach pairwise separation {delta} for {k} centroids "
        f"within {max_passes} repair passes"
    )


def enforce_separation(config: CentroidConfiguration, delta: float) -> CentroidConfiguration:
    """Return a configuration with pairwise separation >= delta.

    Already-separated input is returned unchanged. Otherwise closest
    pairs are pushed apart symmetrically (coincident pairs split along
    the first coordinate axis) and clamped into the unit cube.
    """
    if delta < 0 or not math.isfinite(delta):
        raise ValidationError(f"delta must be a nonnegative real, got {delta}")
    if separation(config.points) >= delta:
        return config
    budget = REPAIR_PASS_FACTOR * config.lattice.size**2
    pts, _ = _push_apart(config.points, delta, budget)
    return CentroidConfiguration(config.lattice, pts)


def is_quasi_minimizer(
    config: CentroidConfiguration,
    samples: SampleSet,
    kernel: NeighborhoodKernel,
    best_known_vn: float,
    spec: QuasiMinimizerSpec | None = None,
) -> bool:
    """Whether the configuration's value is within 1/beta(n) of the best
    known value. The true infimum over separated configurations is not
    computable, so membership is relative to the caller's best proxy."""
    spec = spec if spec is not None else QuasiMinimizerSpec()
    vn = empirical_variance(samples, config, kernel)
    return vn < best_known_vn + spec.radius(samples.n)


def _init_points(samples: SampleSet, size: int, scheme: str, rng: np.random.Generator) -> np.ndarray:
    pts = samples.points
    n = samples.n
    if scheme == "subsample":
        chosen = rng.choice(n, size=size, replace=False)
        return pts[chosen].copy()
    # distance-squared-proportional seeding
    out = np.empty((size, samples.d), dtype=np.float64)
    out[0] = pts[int(rng.integers(n))]
    d2 = ((pts - out[0]) ** 2).sum(axis=1)
    for j in range(1, size):
        total = d2.sum()
        if total > 0:
            pick = int(rng.choice(n, p=d2 / total))
        else:
            pick = int(rng.integers(n))
        out[j] = pts[pick]
        d2 = np.minimum(d2, ((pts - out[j]) ** 2).sum(axis=1))
    return out


@dataclass
class _StartOutcome:
    best_points: np.ndarray | None
    best_vn: float
    iterations: int
    separation: float
    repairs: int
    history: tuple[StepState, ...] | None
    failure: str | None


def _run_start(
    samples: SampleSet,
    kernel: NeighborhoodKernel,
    init: np.ndarray,
    params: FitParams,
    keep_history: bool,
) -> _StartOutcome:
    lattice = kernel.lattice
    budget = REPAIR_PASS_FACTOR * lattice.size**2
    repairs = 0
    history: list[StepState] = []

    points = init
    if params.delta > 0:
        try:
            points, pushes = _push_apart(points, params.delta, budget)
            repairs += pushes
        except FitError as exc:
            return _StartOutcome(None, math.inf, 0, separation(points), repairs + budget, None, str(exc))

    config = CentroidConfiguration(lattice, points)
    best_points: np.ndarray | None = None
    best_vn = math.inf
    iterations = 0
    prev_labels: np.ndarray | None = None
    step = 0
    while True:
        asg = partition(samples, config)
        vn = exact_sum(point_costs(samples, config, kernel, labels=asg.labels)) / (2.0 * samples.n)
        if keep_history:
            history.append(StepState(config.points.copy(), asg.labels.copy(), vn))
        prev_best = best_vn
        if vn < best_vn:
            best_vn = vn
            best_points = config.points
        if prev_labels is not None and np.array_equal(asg.labels, prev_labels):
            break
        if step >= 1 and (prev_best - best_vn) < params.rel_tol * prev_best:
            break
        if iterations >= params.max_iter:
            break
        updated = batch_update(asg, kernel, config)
        new_points = updated.points
        if params.delta > 0:
            try:
                new_points, pushes = _push_apart(new_points, params.delta, budget)
                repairs += pushes
            except FitError as exc:
                return _StartOutcome(
                    best_points, best_vn, iterations, separation(new_points), repairs + budget, tuple(history) if keep_history else None, str(exc)
                )
        config = CentroidConfiguration(lattice, new_points)
        prev_labels = asg.labels
        iterations += 1
        step += 1

    assert best_points is not None
    return _StartOutcome(
        best_points,
        best_vn,
        iterations,
        separation(best_points),
        repairs,
        tuple(history) if keep_history else None,
        None,
    )


def fit(
    samples: SampleSet,
    kernel: NeighborhoodKernel,
    params: FitParams | None = None,
    quasi: QuasiMinimizerSpec | None = None,
    workers: int = 1,
    keep_history: bool = False,
) -> FitResult:
    """Multi-start search for a low-variance separated configuration.

    Each restart r draws its own substream from (seed, r), initializes
    from the data, repairs separation when delta > 0, and alternates
    partitioning with the frozen-partition minimizer until the partition
    stabilizes, the restart's running best stops improving relative to
    rel_tol, or the iteration budget runs out. The result is the best
    configuration visited anywhere, with ties between restarts resolved
    toward the lowest restart index.
    """
    params = params if params is not None else FitParams()
    quasi = quasi if quasi is not None else QuasiMinimizerSpec()
    lattice = kernel.lattice
    size = lattice.size
    if lattice.ndim > samples.d:
        raise ValidationError(
            f"lattice dimension {lattice.ndim} exceeds data dimension {samples.d}"
        )
    if size >= 2 and params.delta >= math.sqrt(samples.d):
        raise ValidationError(
            f"separation {params.delta} is not below the unit-cube diameter "
            f"{math.sqrt(samples.d):.6g}; no {size}-point configuration can satisfy it in general"
        )
    if params.init == "subsample" and samples.n < size:
        raise FitError(
            f"subsample initialization needs at least {size} observations, got {samples.n}"
        )

    def one(r: int) -> _StartOutcome:
        rng = np.random.default_rng(np.random.SeedSequence([params.seed & SEED_MASK, r]))
        init = _init_points(samples, size, params.init, rng)
        return _run_start(samples, kernel, init, params, keep_history)

    outcomes = run_indexed(one, params.restarts, workers)

    best_idx = -1
    best_vn = math.inf
    for r, out in enumerate(outcomes):
        if out.best_points is not None and out.best_vn < best_vn:
            best_vn = out.best_vn
            best_idx = r
    if best_idx < 0:
        first = next(o.failure for o in outcomes if o.failure is not None)
        raise FitError(f"separation repair failed in all {params.restarts} restarts: {first}")

    records = tuple(
        RestartRecord(
            restart=r,
            final_vn=out.best_vn,
            iterations=out.iterations,
            separation=out.separation,
            repairs=out.repairs,
        )
        for r, out in enumerate(outcomes)
    )
    chosen = outcomes[best_idx]
    assert chosen.best_points is not None
    best_config = CentroidConfiguration(lattice, chosen.best_points)
    histories = tuple(o.history or () for o in outcomes) if keep_history else None
    return FitResult(
        best_config=best_config,
        best_vn=best_vn,
        per_restart=records,
        quasi_radius=quasi.radius(samples.n),
        histories=histories,
    )
