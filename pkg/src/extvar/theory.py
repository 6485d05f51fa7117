"""Numerical experiments for the theoretical guarantees.

Three study areas, matching the limit statements the package is built to
probe at desk scale:

* cell-change measure: how much probability mass can switch Voronoi
  cells when one centroid moves by at most alpha, against the closed
  form bound (card-1)(2*alpha/delta + alpha)(sqrt 2)^(d-1);
* uniform convergence: the sup over a net of separated configurations
  of |empirical variance - true variance|, which should shrink with n;
* consistency: the excess true variance of fitted configurations
  against a large-sample reference minimum, which should shrink with n.

Almost-sure limit statements are only spot-checked statistically, via
medians over seeds and three-standard-error windows; the experiments
report data, the test suite applies the thresholds.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .datagen import UniformSampler, random_separated_config
from .errors import HypothesisError, ValidationError
from .lattice import Lattice, NeighborhoodKernel
from .optimizer import FitParams, QuasiMinimizerSpec, fit, is_quasi_minimizer
from .parallel import derived_seed, run_chunked, run_indexed
from .quantizer import (
    CentroidConfiguration,
    McEstimate,
    SampleSet,
    empirical_variance,
    mc_variance,
    separation,
    sq_distances,
)

# purpose tags for derived substreams, so no two uses share a stream
_TAG_NET = 11
_TAG_CELL = 12
_TAG_REF_DATA = 13
_TAG_REF_EVAL = 14
_TAG_FIT = 15

VACUOUS_BOUND = 1.0


def cell_change_bound(
    alpha: float, delta: float, dim: int, card: int, halved: bool = False
) -> float:
    """Upper bound on the mass that can change cells under an alpha-move.

    With ``halved`` the configuration is only assumed separated at
    delta/2, which doubles the first term (the variant used for
    intermediate configurations mid-argument).
    """
    if not delta > 0 or not math.isfinite(delta):
        raise ValidationError(f"delta must be a positive real, got {delta}")
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ValidationError(f"dimension must be a positive integer, got {dim}")
    if not isinstance(card, (int, np.integer)) or card < 1:
        raise ValidationError(f"configuration size must be an integer >= 1, got {card}")
    sep = delta / 2.0 if halved else delta
    if not alpha > 0 or not alpha < sep / 2.0:
        raise HypothesisError(
            f"displacement alpha must satisfy 0 < alpha < {sep / 2.0:.6g} "
            f"(half the guaranteed separation), got {alpha}"
        )
    return (card - 1) * (2.0 * alpha / sep + alpha) * math.sqrt(2.0) ** (dim - 1)


def cell_change_indicator(
    points: np.ndarray, config: CentroidConfiguration, cell: int, alpha: float
) -> np.ndarray:
    """Conservative membership test for the set of points that could
    change cells when centroid ``cell`` moves by at most alpha.

    A point counts iff it lies in the cell AND some other centroid is
    within alpha of being closest. This ignores the box and separation
    constraints on the displaced centroid, so it covers a superset of
    the true cell-change set; estimates built on it are upper biased,
    which keeps bound certification conservative.
    """
    d2 = sq_distances(points, config.points)
    labels = np.argmin(d2, axis=1)
    own = np.sqrt(d2[:, cell])
    others = d2.copy()
    others[:, cell] = np.inf
    runner_up = np.sqrt(others.min(axis=1))
    return (labels == cell) & (runner_up < own + alpha)


def estimate_cell_change_measure(
    config: CentroidConfiguration,
    cell,
    alpha: float,
    count: int,
    seed: int,
    delta: float,
    workers: int = 1,
) -> McEstimate:
    """Monte Carlo volume of the conservative cell-change set.

    ``cell`` may be a lattice index tuple or a lexicographic rank.
    The configuration must actually be delta-separated, and alpha must
    satisfy the hypothesis 0 < alpha < delta/2.
    """
    rank = cell if isinstance(cell, (int, np.integer)) else config.lattice.rank(cell)
    if not 0 <= rank < config.lattice.size:
        raise ValidationError(f"cell rank {rank} outside the lattice of size {config.lattice.size}")
    if not delta > 0 or not math.isfinite(delta):
        raise ValidationError(f"delta must be a positive real, got {delta}")
    if separation(config.points) < delta:
        raise ValidationError(
            f"configuration separation {separation(config.points):.6g} is below the "
            f"declared delta {delta}"
        )
    if not alpha > 0 or not alpha < delta / 2.0:
        raise HypothesisError(
            f"displacement alpha must satisfy 0 < alpha < {delta / 2.0:.6g}, got {alpha}"
        )
    if count < 2:
        raise ValidationError(f"sample count must be at least 2, got {count}")
    draws = UniformSampler(config.d).sample(count, seed, workers=workers)
    flags = np.empty(count, dtype=bool)

    def work(s: int, e: int) -> None:
        flags[s:e] = cell_change_indicator(draws[s:e], config, int(rank), alpha)

    run_chunked(work, count, workers)
    hits = int(flags.sum())
    p = hits / count
    stderr = math.sqrt(p * (1.0 - p) / (count - 1))
    return McEstimate(estimate=p, stderr=stderr)


def sup_discrepancy(
    net: Sequence[CentroidConfiguration],
    samples: SampleSet,
    kernel: NeighborhoodKernel,
    reference,
    delta: float | None = None,
    workers: int = 1,
) -> float:
    """Largest |empirical variance - reference variance| over the net.

    ``reference`` is either a sequence of per-configuration values or a
    (sampler, count, seed) triple evaluated by Monte Carlo with a seed
    common to the whole net.
    """
    if len(net) == 0:
        raise ValidationError("net must contain at least one configuration")
    if delta is not None:
        for t, cfg in enumerate(net):
            if separation(cfg.points) < delta:
                raise ValidationError(
                    f"net member {t} has separation {separation(cfg.points):.6g} < {delta}"
                )
    if isinstance(reference, tuple) and len(reference) == 3 and hasattr(reference[0], "sample"):
        sampler, count, seed = reference
        values = [
            mc_variance(cfg, kernel, sampler, count, seed, workers=workers).estimate
            for cfg in net
        ]
    else:
        values = [float(v) for v in reference]
        if len(values) != len(net):
            raise ValidationError(
                f"got {len(values)} reference values for a net of {len(net)} configurations"
            )
    gaps = [
        abs(empirical_variance(samples, cfg, kernel, workers=workers) - v)
        for cfg, v in zip(net, values)
    ]
    return max(gaps)


@dataclass(frozen=True)
class CellChangeRecord:
    config_id: int
    cell: int
    alpha: float
    delta: float
    estimate: float
    stderr: float
    bound: float
    passed: bool
    vacuous: bool


@dataclass(frozen=True)
class CellChangeReport:
    records: tuple[CellChangeRecord, ...]
    configs: tuple[CentroidConfiguration, ...]
    alpha: float
    delta: float
    count: int
    seed: int

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.records)


def cell_change_experiment(
    lattice: Lattice,
    d: int,
    delta: float,
    alpha: float,
    count: int,
    seed: int,
    n_configs: int = 20,
    max_tries: int = 1000,
    workers: int = 1,
) -> CellChangeReport:
    """Estimate the cell-change measure for every cell of several random
    separated configurations and compare against the closed-form bound.

    The pass flag per record is estimate - 3*stderr <= bound; records
    whose bound is >= 1 certify nothing (any measure satisfies them) and
    carry the vacuous flag.
    """
    if n_configs < 1:
        raise ValidationError(f"need at least one configuration, got {n_configs}")
    configs = tuple(
        random_separated_config(lattice, d, delta, derived_seed(_TAG_NET, seed, t), max_tries)
        for t in range(n_configs)
    )
    cells = [(t, rank) for t in range(len(configs)) for rank in range(lattice.size)]
    bound = cell_change_bound(alpha, delta, d, lattice.size)

    def one(k: int) -> CellChangeRecord:
        t, rank = cells[k]
        est = estimate_cell_change_measure(
            configs[t], rank, alpha, count, derived_seed(_TAG_CELL, seed, t, rank), delta
        )
        return CellChangeRecord(
            config_id=t,
            cell=rank,
            alpha=alpha,
            delta=delta,
            estimate=est.estimate,
            stderr=est.stderr,
            bound=bound,
            passed=est.estimate - 3.0 * est.stderr <= bound,
            vacuous=bound >= VACUOUS_BOUND,
        )

    records = tuple(run_indexed(one, len(cells), workers))
    return CellChangeReport(
        records=records, configs=configs, alpha=alpha, delta=delta, count=count, seed=seed
    )


@dataclass(frozen=True)
class DiscrepancyRow:
    n: int
    seed: int
    sup_discrepancy: float


@dataclass(frozen=True)
class DiscrepancyReport:
    rows: tuple[DiscrepancyRow, ...]
    net: tuple[CentroidConfiguration, ...]
    reference_values: tuple[float, ...]
    delta: float

    def median_by_n(self) -> dict[int, float]:
        grouped: dict[int, list[float]] = {}
        for row in self.rows:
            grouped.setdefault(row.n, []).append(row.sup_discrepancy)
        return {n: float(np.median(v)) for n, v in grouped.items()}


def _check_schedule(n_schedule: Sequence[int]) -> tuple[int, ...]:
    sched = tuple(int(n) for n in n_schedule)
    if len(sched) == 0:
        raise ValidationError("sample-size schedule must be nonempty")
    if any(n < 1 for n in sched):
        raise ValidationError(f"sample sizes must be positive, got {sched}")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValidationError(f"sample-size schedule must be strictly increasing, got {sched}")
    return sched


def ulln_experiment(
    sampler,
    lattice: Lattice,
    kernel: NeighborhoodKernel,
    delta: float,
    n_schedule: Sequence[int],
    net_size: int,
    m_ref: int,
    seed: int,
    reps: int = 5,
    d: int | None = None,
    max_tries: int = 1000,
    workers: int = 1,
) -> DiscrepancyReport:
    """Uniform-convergence experiment over a random separated net.

    Builds a net of ``net_size`` delta-separated configurations, tags
    each with a large-sample Monte Carlo reference value (common seed
    across the net), then for each (n, rep) grid cell draws n samples
    with seed ``seed + rep`` and records the sup over the net of the
    empirical-to-reference gap.
    """
    sched = _check_schedule(n_schedule)
    if net_size < 1:
        raise ValidationError(f"net size must be positive, got {net_size}")
    if reps < 1:
        raise ValidationError(f"rep count must be positive, got {reps}")
    dim = d if d is not None else sampler.d
    net = tuple(
        random_separated_config(lattice, dim, delta, derived_seed(_TAG_NET, seed, t), max_tries)
        for t in range(net_size)
    )
    ref_seed = derived_seed(_TAG_REF_EVAL, seed)
    reference = tuple(
        mc_variance(cfg, kernel, sampler, m_ref, ref_seed, workers=workers).estimate
        for cfg in net
    )
    cells = [(n, rep) for n in sched for rep in range(reps)]

    def one(k: int) -> DiscrepancyRow:
        n, rep = cells[k]
        row_seed = seed + rep
        samples = SampleSet(sampler.sample(n, row_seed))
        disc = sup_discrepancy(net, samples, kernel, reference, delta=delta)
        return DiscrepancyRow(n=n, seed=row_seed, sup_discrepancy=disc)

    rows = tuple(run_indexed(one, len(cells), workers))
    return DiscrepancyReport(rows=rows, net=net, reference_values=reference, delta=delta)


@dataclass(frozen=True)
class ConsistencyRow:
    n: int
    seed: int
    vn_best: float
    v_of_fit: float
    v_ref: float
    gap: float
    v_of_fit_stderr: float
    quasi_ok: bool
    config: CentroidConfiguration


@dataclass(frozen=True)
class ConsistencyReport:
    rows: tuple[ConsistencyRow, ...]
    reference: McEstimate
    reference_config: CentroidConfiguration

    def median_gap_by_n(self) -> dict[int, float]:
        grouped: dict[int, list[float]] = {}
        for row in self.rows:
            grouped.setdefault(row.n, []).append(row.gap)
        return {n: float(np.median(v)) for n, v in grouped.items()}


def consistency_experiment(
    sampler,
    lattice: Lattice,
    kernel: NeighborhoodKernel,
    delta: float,
    n_schedule: Sequence[int],
    fit_params: FitParams,
    m_ref: int,
    seed: int,
    reps: int = 5,
    quasi: QuasiMinimizerSpec | None = None,
    ref_fit_params: FitParams | None = None,
    workers: int = 1,
) -> ConsistencyReport:
    """Excess-variance experiment along a sample-size schedule.

    A reference minimum is estimated once by fitting a size-m_ref sample
    and re-evaluating the winner by Monte Carlo. Every fitted
    configuration is then evaluated with the same Monte Carlo seed, so
    each gap is a difference of estimates sharing their random numbers.
    """
    sched = _check_schedule(n_schedule)
    if reps < 1:
        raise ValidationError(f"rep count must be positive, got {reps}")
    quasi = quasi if quasi is not None else QuasiMinimizerSpec()
    base = dataclasses.replace(fit_params, delta=delta)
    ref_params = ref_fit_params if ref_fit_params is not None else base
    ref_params = dataclasses.replace(
        ref_params, delta=delta, seed=derived_seed(_TAG_FIT, seed)
    )
    eval_seed = derived_seed(_TAG_REF_EVAL, seed)

    ref_samples = SampleSet(sampler.sample(m_ref, derived_seed(_TAG_REF_DATA, seed), workers=workers))
    ref_fit = fit(ref_samples, kernel, ref_params, quasi=quasi, workers=workers)
    reference = mc_variance(ref_fit.best_config, kernel, sampler, m_ref, eval_seed, workers=workers)

    cells = [(n, rep) for n in sched for rep in range(reps)]

    def one(k: int) -> ConsistencyRow:
        n, rep = cells[k]
        row_seed = seed + rep
        samples = SampleSet(sampler.sample(n, row_seed))
        params = dataclasses.replace(base, seed=derived_seed(_TAG_FIT, seed, n, rep))
        result = fit(samples, kernel, params, quasi=quasi)
        value = mc_variance(result.best_config, kernel, sampler, m_ref, eval_seed)
        return ConsistencyRow(
            n=n,
            seed=row_seed,
            vn_best=result.best_vn,
            v_of_fit=value.estimate,
            v_ref=reference.estimate,
            gap=value.estimate - reference.estimate,
            v_of_fit_stderr=value.stderr,
            quasi_ok=is_quasi_minimizer(
                result.best_config, samples, kernel, result.best_vn, quasi
            ),
            config=result.best_config,
        )

    rows = tuple(run_indexed(one, len(cells), workers))
    return ConsistencyReport(rows=rows, reference=reference, reference_config=ref_fit.best_config)
