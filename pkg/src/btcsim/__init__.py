"""btcsim: monitored collective-spin dynamics in the Dicke sector.

Deterministic Lindblad evolution, stochastic quantum-trajectory unravelings
(photodetection, shifted local oscillator, heterodyne diffusion), polynomial
-cost stabilizer 2-Renyi entropy and half-cut entanglement for permutationally
invariant states, and the mean-field limit of the driven superradiant decay
model, including fixed points, orbit averages and the saturation fit.
"""

from .core import (
    CollectiveOps,
    ModelParams,
    StateError,
    build_collective_ops,
    check_density_matrix,
    check_dicke_vector,
    fully_polarized,
    magnetization,
    pure_to_density,
    purity,
)
from .entanglement import entanglement_entropy, entanglement_entropy_many, reduced_half
from .lindblad import (
    LindbladRun,
    SteadyStateResult,
    StepSizeError,
    evolve_lindblad,
    lindblad_rhs,
    steady_state,
    trace_distance,
)
from .magic import (
    MagicValue,
    PauliClass,
    class_expectation,
    class_expectation_bruteforce,
    enumerate_pauli_classes,
    n_pauli_classes,
    sre,
    sre_bruteforce,
    sre_many,
)
from .meanfield import (
    FitResult,
    evolve_mf,
    fit_saturation,
    mf_fixed_point,
    mf_fixed_point_magic,
    mf_magic_density,
    mf_rhs,
    orbit_average_magic,
    orbit_average_sweep,
    sample_initial_bloch,
    saturation_law,
    solid_angle_limit,
)
from .stats import HistogramResult, ensemble_statistics, histogram_density
from .trajectories import (
    ImpossibleEventError,
    TrajectoryRecord,
    UnravelingSpec,
    ensemble_mean_projector,
    general_mu_step,
    qj_step,
    qsd_step,
    resolve_workers,
    run_ensemble,
)

__version__ = "0.1.0"
