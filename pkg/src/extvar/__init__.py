"""Neighborhood-weighted vector quantization on the unit cube.

The criterion generalizes K-means distortion: each Voronoi cell charges
squared distances to every centroid, weighted by a symmetric kernel on
lattice offsets. A kronecker kernel recovers classical K-means exactly;
wider kernels produce the coupling used by self-organizing maps. The
package fits configurations by a batch fixed-point iteration, and ships
experiments probing the theory around the criterion: a closed-form
bound on cell-change mass under small centroid moves, uniform
convergence of the empirical criterion, and consistency of fitted
configurations.
"""

from .errors import (
    ExtvarError,
    FitError,
    HypothesisError,
    InfeasibleError,
    InvalidKernelError,
    InvalidLatticeError,
    SamplerConfigError,
    ValidationError,
)
from .lattice import (
    Lattice,
    NeighborhoodKernel,
    build_lattice,
    gaussian_kernel,
    kernel_from_spec,
    kronecker_kernel,
    neighborhood_value,
    rectangular_kernel,
    table_kernel,
)
from .quantizer import (
    Assignment,
    CentroidConfiguration,
    McEstimate,
    SampleSet,
    assign,
    assign_batch,
    empirical_variance,
    empirical_variance_grouped,
    exact_sum,
    mc_variance,
    partition,
    point_cost,
    point_costs,
    separation,
    sq_distances,
)
from .optimizer import (
    FitParams,
    FitResult,
    QuasiMinimizerSpec,
    RestartRecord,
    batch_update,
    enforce_separation,
    fit,
    frozen_cost,
    frozen_gradient,
    is_quasi_minimizer,
)
from .datagen import (
    GaussianMixtureSampler,
    MixtureComponent,
    UniformSampler,
    draw_samples,
    make_sampler,
    packing_infeasible,
    random_separated_config,
)
from .theory import (
    CellChangeReport,
    ConsistencyReport,
    DiscrepancyReport,
    cell_change_bound,
    cell_change_experiment,
    cell_change_indicator,
    consistency_experiment,
    estimate_cell_change_measure,
    sup_discrepancy,
    ulln_experiment,
)
from .runconfig import ExperimentParams, RunConfig, load_run_config, parse_run_config
from .storage import read_centroids, read_samples, write_centroids, write_samples

__all__ = [
    "Assignment",
    "CellChangeReport",
    "CentroidConfiguration",
    "ConsistencyReport",
    "DiscrepancyReport",
    "ExperimentParams",
    "ExtvarError",
    "FitError",
    "FitParams",
    "FitResult",
    "GaussianMixtureSampler",
    "HypothesisError",
    "InfeasibleError",
    "InvalidKernelError",
    "InvalidLatticeError",
    "Lattice",
    "McEstimate",
    "MixtureComponent",
    "NeighborhoodKernel",
    "QuasiMinimizerSpec",
    "RestartRecord",
    "RunConfig",
    "SampleSet",
    "SamplerConfigError",
    "UniformSampler",
    "ValidationError",
    "assign",
    "assign_batch",
    "batch_update",
    "build_lattice",
    "cell_change_bound",
    "cell_change_experiment",
    "cell_change_indicator",
    "consistency_experiment",
    "draw_samples",
    "empirical_variance",
    "empirical_variance_grouped",
    "enforce_separation",
    "estimate_cell_change_measure",
    "exact_sum",
    "fit",
    "frozen_cost",
    "frozen_gradient",
    "gaussian_kernel",
    "is_quasi_minimizer",
    "kernel_from_spec",
    "kronecker_kernel",
    "load_run_config",
    "make_sampler",
    "mc_variance",
    "neighborhood_value",
    "packing_infeasible",
    "parse_run_config",
    "partition",
    "point_cost",
    "point_costs",
    "random_separated_config",
    "read_centroids",
    "read_samples",
    "rectangular_kernel",
    "separation",
    "sq_distances",
    "sup_discrepancy",
    "table_kernel",
    "ulln_experiment",
    "write_centroids",
    "write_samples",
]
