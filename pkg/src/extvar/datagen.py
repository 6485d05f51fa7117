"""Seeded samplers on the unit cube and random separated configurations.

Two distribution families are shipped: the uniform distribution, whose
optimal configurations have closed forms usable as test anchors, and
truncated Gaussian mixtures for non-trivial geometry. Both report an
upper bound on their density, and both draw in fixed-size chunks with
per-chunk substreams so generation is deterministic for any worker
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InfeasibleError, SamplerConfigError, ValidationError
from .lattice import Lattice
from .parallel import CHUNK, run_chunked
from .quantizer import CentroidConfiguration, SampleSet, separation

WEIGHT_TOL = 1e-12
MIN_ACCEPTANCE = 1e-3


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    entropy = [seed & 0xFFFFFFFFFFFFFFFF, chunk_index]
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class UniformSampler:
    """Uniform distribution on [0, 1]^d; density bound 1."""

    d: int

    def __post_init__(self) -> None:
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise SamplerConfigError(f"sampler dimension must be a positive integer, got {self.d}")

    @property
    def density_bound(self) -> float:
        return 1.0

    def sample(self, count: int, seed: int, workers: int = 1) -> np.ndarray:
        if count < 1:
            raise ValidationError(f"sample count must be positive, got {count}")
        out = np.empty((count, self.d), dtype=np.float64)

        def work(s: int, e: int) -> None:
            rng = _chunk_rng(seed, s // CHUNK)
            out[s:e] = rng.random((e - s, self.d))

        run_chunked(work, count, workers)
        return out


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: tuple[float, ...]
    sigma: float


def _normal_cdf(t: float) -> float:
    return 0.5 * (1.0 + math.erf(t / math.sqrt(2.0)))


@dataclass(frozen=True, eq=False)
class GaussianMixtureSampler:
    """Mixture of isotropic Gaussians truncated to the unit cube.

    Truncation is by rejection, which is exact in any dimension. Each
    component must keep at least MIN_ACCEPTANCE of its mass inside the
    cube, otherwise the configuration is rejected up front.
    """

    d: int
    components: tuple[MixtureComponent, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise SamplerConfigError(f"sampler dimension must be a positive integer, got {self.d}")
        if len(self.components) == 0:
            raise SamplerConfigError("mixture needs at least one component")
        total = math.fsum(c.weight for c in self.components)
        if any(c.weight <= 0 for c in self.components):
            raise SamplerConfigError("mixture weights must be positive")
        if abs(total - 1.0) > WEIGHT_TOL:
            raise SamplerConfigError(f"mixture weights must sum to 1, got {total}")
        for c in self.components:
            if len(c.mean) != self.d:
                raise SamplerConfigError(f"component mean {c.mean} does not have dimension {self.d}")
            if any(not 0.0 <= m <= 1.0 for m in c.mean):
                raise SamplerConfigError(f"component mean {c.mean} must lie in [0, 1]^d")
            if not c.sigma > 0:
                raise SamplerConfigError(f"component sigma must be positive, got {c.sigma}")
        for k, z in enumerate(self.cube_masses):
            if z < MIN_ACCEPTANCE:
                raise SamplerConfigError(
                    f"component {k} keeps only {z:.3g} of its mass in the unit cube "
                    f"(below {MIN_ACCEPTANCE}); rejection sampling would stall"
                )

    @property
    def cube_masses(self) -> tuple[float, ...]:
        """Per-component Gaussian mass inside the cube, via error-function products."""
        masses = []
        for c in self.components:
            z = 1.0
            for m in c.mean:
                z *= _normal_cdf((1.0 - m) / c.sigma) - _normal_cdf((0.0 - m) / c.sigma)
            masses.append(z)
        return tuple(masses)

    @property
    def density_bound(self) -> float:
        bound = 0.0
        for c, z in zip(self.components, self.cube_masses):
            peak = 1.0 / (z * (2.0 * math.pi * c.sigma**2) ** (self.d / 2.0))
            bound += c.weight * peak
        return bound

    def sample(self, count: int, seed: int, workers: int = 1) -> np.ndarray:
        if count < 1:
            raise ValidationError(f"sample count must be positive, got {count}")
        weights = np.array([c.weight for c in self.components])
        weights = weights / weights.sum()
        out = np.empty((count, self.d), dtype=np.float64)

        def work(s: int, e: int) -> None:
            rng = _chunk_rng(seed, s // CHUNK)
            m = e - s
            comp = rng.choice(len(self.components), size=m, p=weights)
            block = np.empty((m, self.d), dtype=np.float64)
            for k, c in enumerate(self.components):
                pos = np.flatnonzero(comp == k)
                need = pos.size
                if need == 0:
                    continue
                accepted = np.empty((need, self.d), dtype=np.float64)
                filled = 0
                while filled < need:
                    draw = rng.normal(loc=c.mean, scale=c.sigma, size=(need - filled, self.d))
                    ok = draw[((draw >= 0.0) & (draw <= 1.0)).all(axis=1)]
                    take = min(ok.shape[0], need - filled)
                    accepted[filled : filled + take] = ok[:take]
                    filled += take
                block[pos] = accepted
            out[s:e] = block

        run_chunked(work, count, workers)
        return out


def make_sampler(spec: Mapping, d: int):
    """Build a sampler from a configuration mapping.

    Shapes: {"kind": "uniform"} or {"kind": "gaussian-mixture",
    "components": [{"weight": w, "mean": [...], "sigma": s}, ...]}.
    """
    if not isinstance(spec, Mapping) or "kind" not in spec:
        raise SamplerConfigError("sampler spec must be a mapping with a 'kind' key")
    kind = spec["kind"]
    if kind == "uniform":
        extra = set(spec) - {"kind"}
        if extra:
            raise SamplerConfigError(f"uniform sampler takes no extra keys, got {sorted(extra)}")
        return UniformSampler(d)
    if kind == "gaussian-mixture":
        extra = set(spec) - {"kind", "components"}
        if extra:
            raise SamplerConfigError(f"unknown sampler keys: {sorted(extra)}")
        raw = spec.get("components")
        if not isinstance(raw, Sequence) or isinstance(raw, (str, bytes)) or len(raw) == 0:
            raise SamplerConfigError("sampler.components must be a nonempty list")
        comps = []
        for k, item in enumerate(raw):
            if not isinstance(item, Mapping) or set(item) != {"weight", "mean", "sigma"}:
                raise SamplerConfigError(
                    f"sampler.components[{k}] must have exactly the keys weight, mean, sigma"
                )
            mean = item["mean"]
            if not isinstance(mean, Sequence) or isinstance(mean, (str, bytes)):
                raise SamplerConfigError(f"sampler.components[{k}].mean must be a list of coordinates")
            comps.append(
                MixtureComponent(
                    weight=float(item["weight"]),
                    mean=tuple(float(v) for v in mean),
                    sigma=float(item["sigma"]),
                )
            )
        return GaussianMixtureSampler(d, tuple(comps))
    raise SamplerConfigError(f"unknown sampler kind {kind!r}")


def draw_samples(sampler, count: int, seed: int, workers: int = 1) -> SampleSet:
    """Draw a SampleSet from any sampler object."""
    return SampleSet(sampler.sample(count, seed, workers=workers))


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def packing_infeasible(card: int, d: int, delta: float) -> bool:
    """True when ``card`` points at pairwise distance >= delta provably
    cannot fit in the unit cube: disjoint balls of radius delta/2 centered
    at the points would exceed the delta/2-inflated cube volume."""
    if card < 2 or delta <= 0:
        return False
    balls = card * _unit_ball_volume(d) * (delta / 2.0) ** d
    return balls > (1.0 + delta) ** d


def random_separated_config(
    lattice: Lattice,
    d: int,
    delta: float,
    seed: int,
    max_tries: int = 1000,
) -> CentroidConfiguration:
    """Rejection-sample a configuration with pairwise separation >= delta.

    Draws uniform centroid sets until one is separated. Exhausting the
    budget raises, with the message distinguishing provable infeasibility
    (packing bound) from plain bad luck.
    """
    if delta < 0:
        raise ValidationError(f"separation delta must be nonnegative, got {delta}")
    if max_tries < 1:
        raise ValidationError(f"max_tries must be positive, got {max_tries}")
    k = lattice.size
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF]))
    for _ in range(max_tries):
        pts = rng.random((k, d))
        if separation(pts) >= delta:
            return CentroidConfiguration(lattice, pts)
    if packing_infeasible(k, d, delta):
        raise InfeasibleError(
            f"{k} points with pairwise separation {delta} provably cannot fit in the "
            f"{d}-dimensional unit cube (ball packing bound)"
        )
    raise InfeasibleError(
        f"no {delta}-separated configuration of {k} points found in {max_tries} tries; "
        f"the constraint may be feasible but tight, retry with a larger budget"
    )
