"""Maximum-likelihood estimation and Cramer-Rao bounds for quantum-optical measurements."""

__version__ = "0.1.0"

from .core_model import (  # noqa: E402
    Convention,
    DetectorEfficiency,
    GaussianState,
    homodyne_moments,
    homodyne_pdf,
    photon_budget,
    photon_number_distribution,
    photon_number_prob,
    state_overlap,
    wigner,
)
from .measurement_sim import (  # noqa: E402
    ClickRecord,
    HeterodyneRecords,
    HomodyneRecords,
    RngSeed,
    sample_heterodyne,
    sample_homodyne,
    sample_onoff,
)
from .estimators import (  # noqa: E402
    EstimationError,
    EstimationResult,
    SqueezedProbe,
    eta_mle_linear,
    eta_mle_onoff,
    eta_naive,
    fit_gaussian_state,
    maximize,
    phase_mle_heterodyne,
    phase_mle_homodyne_random,
    phase_mle_squeezed,
)
from .hamiltonian_id import (  # noqa: E402
    BogoliubovMap,
    QuadraticHamiltonian,
    UnidentifiableError,
    forward_map,
    identify_hamiltonian,
    invert_map,
)
