"""sicspin: spin physics of the S = 3/2 silicon-vacancy center in 4H-SiC
hyperfine-coupled to spin-1/2 lattice nuclei.

The package covers the hyperfine-resolved level structure and transition
spectrum, moment enhancement near the ground-state level anticrossing,
rate-equation modeling of optically pumped nuclear polarization,
synthetic ODMR/ODNMR spectra and coherent-control traces, least-squares
Hamiltonian estimation with uncertainties, and lattice-shell assignment
of measured hyperfine splittings.  Units throughout: MHz, gauss,
microseconds.
"""

from .constants import (
    DEFAULT_ZFS_MHZ,
    DIMENSION_CAP,
    GAMMA_E_MHZ_PER_G,
    GAMMA_N_MHZ_PER_G,
    Constants,
    gamma_n_for,
    load_constants,
)
from .enhancement import (
    EnhancementCurve,
    enhancement_analytic,
    enhancement_curve,
    enhancement_exact,
    mixing_angle,
    rabi_frequency,
)
from .errors import (
    HybridizedStateError,
    LabelingError,
    MatchingError,
    NonIdentifiableError,
    NumericalError,
    PeakExtractionError,
    SicspinError,
    ValidationError,
)
from .fitting import (
    FitProblem,
    FitResult,
    Measurement,
    TensorDecomposition,
    decompose_tensor,
    fit_hamiltonian,
    residuals,
)
from .polarization import (
    PolarizationCurve,
    RateModel,
    build_rate_model,
    evolve_populations,
    flip_flop_rate,
    nuclear_polarization,
    polarization_curve,
    steady_state,
)
from .shells import (
    Assignment,
    OccupancyResult,
    ShellCatalog,
    ShellEntry,
    assign,
    bundled_catalog,
    occupancy_statistics,
    predicted_splitting,
)
from .spectra import (
    Spectrum,
    SplittingResult,
    Trace,
    gaussian_peak,
    lorentzian_peak,
    odmr_spectrum,
    odnmr_spectrum,
    rabi_trace,
    ramsey_trace,
    splitting_extract,
)
from .system import (
    ELECTRON_SPIN,
    EigenSolution,
    HyperfineTensor,
    Nucleus,
    SpinSystem,
    StateLabel,
    basis_labels,
    build_hamiltonian,
    diagonalize,
    spin_operators,
)
from .transitions import (
    Transition,
    TransitionTable,
    all_transitions,
    electron_transitions,
    nuclear_transitions,
    perturbative_L_frequency,
    transition_moment,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # constants
    "DEFAULT_ZFS_MHZ",
    "DIMENSION_CAP",
    "GAMMA_E_MHZ_PER_G",
    "GAMMA_N_MHZ_PER_G",
    "Constants",
    "gamma_n_for",
    "load_constants",
    # errors
    "SicspinError",
    "ValidationError",
    "NumericalError",
    "LabelingError",
    "HybridizedStateError",
    "PeakExtractionError",
    "NonIdentifiableError",
    "MatchingError",
    # system
    "ELECTRON_SPIN",
    "SpinSystem",
    "Nucleus",
    "HyperfineTensor",
    "StateLabel",
    "EigenSolution",
    "spin_operators",
    "basis_labels",
    "build_hamiltonian",
    "diagonalize",
    # transitions
    "Transition",
    "TransitionTable",
    "electron_transitions",
    "nuclear_transitions",
    "all_transitions",
    "transition_moment",
    "perturbative_L_frequency",
    # enhancement
    "mixing_angle",
    "enhancement_analytic",
    "enhancement_exact",
    "enhancement_curve",
    "EnhancementCurve",
    "rabi_frequency",
    # polarization
    "flip_flop_rate",
    "RateModel",
    "build_rate_model",
    "evolve_populations",
    "steady_state",
    "nuclear_polarization",
    "PolarizationCurve",
    "polarization_curve",
    # spectra
    "lorentzian_peak",
    "gaussian_peak",
    "Spectrum",
    "odmr_spectrum",
    "odnmr_spectrum",
    "SplittingResult",
    "splitting_extract",
    "Trace",
    "rabi_trace",
    "ramsey_trace",
    # fitting
    "Measurement",
    "FitProblem",
    "FitResult",
    "residuals",
    "fit_hamiltonian",
    "TensorDecomposition",
    "decompose_tensor",
    # shells
    "ShellEntry",
    "ShellCatalog",
    "bundled_catalog",
    "predicted_splitting",
    "Assignment",
    "assign",
    "OccupancyResult",
    "occupancy_statistics",
]
