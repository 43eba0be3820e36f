"""H-infinity analysis and edge-weight allocation for linear diffusion networks."""

from .graph import (
    DisconnectedPort,
    GraphError,
    PortSet,
    SignedGraph,
    Spectrum,
    WeightedGraph,
    algebraic_connectivity,
    effective_resistance,
    incidence,
    laplacian,
    pseudo_inverse,
    signed_laplacian,
    spectrum,
)
from .analysis import (
    BoundReport,
    HinfCertificate,
    connectivity_bound,
    hinf_norm,
    lmi_feasible,
    riccati_residual,
    schur_feasible,
    signed_psd_check,
    siso_gain_via_resistance,
)
from .allocator import (
    AllocationProblem,
    AllocationResult,
    AllocatorOptions,
    InfeasibleProblem,
    grid_oracle,
    maximize_connectivity,
    optimize_weights,
)
from .simulator import PiecewiseConstantSignal, SimulationTrace, gain_check, l2_norm, simulate

__version__ = "0.1.0"
