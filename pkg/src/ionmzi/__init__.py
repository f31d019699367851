"""Linear-optical protocols on trapped ions: a sparse state simulator and a dense cross-check."""

__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    BasisLabel,
    Factor,
    HybridState,
    IonLabel,
    IonLevel,
    Path,
    Photon,
    Pol,
    compose,
    fidelity_mod_phase,
    label,
    norm_sq,
    project,
)
from .ion_photon import scatter_arm  # noqa: E402
from .measurement import (  # noqa: E402
    PLUS_MINUS,
    IonBasis,
    OutcomeRecord,
    apply_pauli,
    detect_output_ports,
    measure_ion_pair,
)
from .optics import beam_splitter, inject_photon  # noqa: E402
from .protocols import (  # noqa: E402
    ConsistencyError,
    NormalizationError,
    ProtocolReport,
    check_report,
    concentrate_via_swapping,
    remote_prepare,
    run_mzi,
    teleport,
)
