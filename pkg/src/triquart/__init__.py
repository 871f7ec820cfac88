"""Multiphoton interference in symmetric three- and four-port interferometers.

Simulates Fock-state and coherent-state inputs through balanced multiport
splitters with an internal phase, extracts detection fringes and their
N-fold visibilities, computes Fisher information for phase estimation,
runs an adaptive three-step Bayesian estimation protocol, and evaluates
two-phase (multiparameter) sensitivity bounds.
"""

from .fock import (
    CoherentState,
    FockBasis,
    FockState,
    ModeUnitary,
    StateVector,
    basis_state_vector,
    coherent_output_probabilities,
    enumerate_basis,
    evolve,
    permanent,
    transition_amplitude,
)
from .devices import (
    InterferometerSpec,
    build_interferometer,
    compose,
    mz_unitary,
    phase_shifter,
    quarter,
    quarter_mz,
    splitter,
    tritter,
    tritter_mz,
)
from .fringes import (
    BoundResult,
    FringePattern,
    VisibilityReport,
    classical_visibility_bound,
    closed_form,
    closed_form_check,
    coherent_nfold_visibility,
    fringe_probabilities,
    fringe_scan,
    n_fold_visibility,
    outcome_classes,
    reference_classical_bounds,
    tabulated_outcomes,
    visibility_survey,
)
from .fisher import (
    FourierTable,
    ProbeSpec,
    cfi_from_table,
    cfi_photon_counting,
    fourier_table,
    number_moments,
    probe_state,
    qfi_coherent,
    qfi_fock,
)
from .protocol import (
    MonteCarloResult,
    Posterior,
    ProtocolConfig,
    TrialResult,
    acceptance_phases,
    bayes_update,
    estimate,
    likelihood,
    monte_carlo,
    nonadaptive_protocol,
    run_protocol,
)
from .multiparam import (
    BoundReport,
    QfiMatrix,
    SldOperator,
    bounds,
    qfim_coherent,
    qfim_pure,
    sld_pure,
    weak_commutativity,
)

__version__ = "1.0.0"

__all__ = [
    "__version__",
    "CoherentState",
    "FockBasis",
    "FockState",
    "ModeUnitary",
    "StateVector",
    "basis_state_vector",
    "coherent_output_probabilities",
    "enumerate_basis",
    "evolve",
    "permanent",
    "transition_amplitude",
    "InterferometerSpec",
    "build_interferometer",
    "compose",
    "mz_unitary",
    "phase_shifter",
    "quarter",
    "quarter_mz",
    "splitter",
    "tritter",
    "tritter_mz",
    "BoundResult",
    "FringePattern",
    "VisibilityReport",
    "classical_visibility_bound",
    "closed_form",
    "closed_form_check",
    "coherent_nfold_visibility",
    "fringe_probabilities",
    "fringe_scan",
    "n_fold_visibility",
    "outcome_classes",
    "reference_classical_bounds",
    "tabulated_outcomes",
    "visibility_survey",
    "FourierTable",
    "ProbeSpec",
    "cfi_from_table",
    "cfi_photon_counting",
    "fourier_table",
    "number_moments",
    "probe_state",
    "qfi_coherent",
    "qfi_fock",
    "MonteCarloResult",
    "Posterior",
    "ProtocolConfig",
    "TrialResult",
    "acceptance_phases",
    "bayes_update",
    "estimate",
    "likelihood",
    "monte_carlo",
    "nonadaptive_protocol",
    "run_protocol",
    "BoundReport",
    "QfiMatrix",
    "SldOperator",
    "bounds",
    "qfim_coherent",
    "qfim_pure",
    "sld_pure",
    "weak_commutativity",
]
