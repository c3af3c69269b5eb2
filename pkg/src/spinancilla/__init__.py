"""Entanglement dynamics of a quenched Ising chain coupled to a bosonic ancilla."""

__version__ = "0.1.0"

from .hilbert import (  # noqa: F401
    ConfigurationError,
    ModelParams,
    SmallAncillaWarning,
    SubsystemSpec,
    composite_dim,
    compose_index,
    decompose_index,
    embed_boson_operator,
    embed_site_operator,
)
from .hamiltonian import (  # noqa: F401
    build_dicke,
    build_displaced,
    build_hamiltonian,
    build_ising,
    collective_spin,
    collective_spin_chain,
)
from .dynamics import (  # noqa: F401
    PureState,
    TimeGrid,
    evolve,
    prepare_polarized,
    prepare_polarized_x,
    prepare_spin_ground_state,
)
from .entanglement import (  # noqa: F401
    MetricCalculator,
    MetricSample,
    ReducedDensityMatrix,
    cramer_rao_bound,
    fisher_density,
    mel,
    mutual_information_half,
    partial_trace,
    qfi,
    variance,
    vn_entropy,
)
from .oracles import (  # noqa: F401
    dispersion,
    displaced_occupation,
    max_group_velocity,
    tfic_ground_energy,
)
from .experiments import (  # noqa: F401
    MELFit,
    QuenchRecord,
    SweepSpec,
    fit_mel_entropy,
    finite_size_scan,
    lambda_from_knob,
    q_convergence,
    run_quench,
    run_sweep,
    time_average,
)
