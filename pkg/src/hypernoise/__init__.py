"""Path-conditioned noise on path-polarization hyperentangled photon pairs."""

__version__ = "0.1.0"

from .channels import (  # noqa: E402
    KrausSet,
    apply_channel,
    compose_two_photon,
    controlled_kraus,
    kraus_bit_flip,
    kraus_depolarizing,
    kraus_phase_damping,
    kraus_set,
    noisy_state,
    path_projectors,
    verify_cptp,
)
from .matcore import (  # noqa: E402
    DensityMatrix,
    SubsystemLayout,
    hermitian_eigenvalues,
    kron,
    make_state,
    partial_trace,
    partial_transpose,
    trace_norm,
)
from .measures import (  # noqa: E402
    AngleSettings,
    chsh_S,
    chsh_global_max,
    chsh_grid,
    chsh_max,
    correlation_E,
    negativity,
    rotation,
    simulate_coincidences,
    witness_expectation,
    witness_operator,
)
