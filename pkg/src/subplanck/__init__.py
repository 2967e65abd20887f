"""Cavity-QED displacement metrology with an entangled atom-field cat state.

Simulates the preparation of an atom-field mesoscopic superposition by
resonant Jaynes-Cummings evolution, its use as a resource to sense a small
real field displacement, and the Fisher-information bookkeeping of the
resulting precision, including Monte Carlo checks of the Cramer-Rao bound.
"""

__version__ = "0.1.0"

from .errors import ConfigError, GuardError
from .fockspace import (
    FieldVector,
    coherent_state,
    displacement_operator,
    expectation_and_variance,
    quadrature_generator,
)
from .dynamics import (
    AtomFieldState,
    CavityMode,
    atomic_phase_flip,
    effective_time,
    jc_propagate,
)
from .protocol import (
    ImperfectionModel,
    ProtocolParams,
    apply_detection_error,
    contrast,
    pg_analytic,
    pg_with_imperfections,
    prepare_resource,
    run_protocol_numeric,
)
from .fisher import (
    FisherReport,
    FringeDataset,
    fi_analytic,
    fi_binary,
    fi_from_fringes,
    optimal_T2,
    precision_report,
    qfi_analytic,
    qfi_numeric,
)
from .montecarlo import (
    TrialConfig,
    cramer_rao_trial,
    estimate_beta_mle,
    sample_outcomes,
)
