"""Classical simulation of three-stage Pauli shadow tomography from Bell samples.

Stage 1 estimates all Pauli magnitudes from Bell samples of rho ⊗ rho,
Stage 2 builds a mimicking Gibbs state, Stage 3 reads off signs from Bell
samples of rho ⊗ sigma.
"""
from .pauli import (
    DensityOperator,
    PauliLabel,
    PauliVector,
    ValidationError,
    dense_pauli,
    from_pauli_vector,
    pauli_weight,
    symplectic_product,
    symplectic_walsh,
    to_pauli_vector,
    transpose_sign,
    y_count,
)
from .states import (
    PauliHamiltonian,
    TestStateSpec,
    generate_state,
    gibbs_state,
    k_grid,
    make_stabilizer_state,
    sample_pauli_hamiltonian,
)
from .bell import (
    BellDistribution,
    BellSampleCounts,
    SampleCapError,
    bell_distribution,
    bell_pair_eigenvalue,
    draw_samples,
    estimate_products,
    magnitudes_from_products,
)
from .support import MU_GRID, BlockSchedule, MagnitudeTable, SupportSet, jaccard, run_stage1, threshold_support
from .mimic import MimicResult, SolverConfig, find_violation, solve_mimicking
from .signs import Reconstruction, mse, run_stage3, sign_agreement

__version__ = "0.1.0"
