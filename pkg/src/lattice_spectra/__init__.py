"""Spectra of discrete Schrödinger chains with even potentials.

Construction of the even/odd half-chain Hamiltonians, verification of the
cross-gap product and trace identities, inverse recovery of the potential
from the two spectra, half-line Jost scattering, and the continuum integral
constraint on the scattering phase with its finite-size convergence.
"""

from .constraints import (
    SignedLogProduct,
    coulomb_energy_discrete,
    expected_sign,
    product_identity_residual,
    recover_potential,
    recover_potential_mp,
    signed_log_product,
    trace_identity_residuals,
)
from .continuum import (
    ConvergenceStudy,
    FiniteMSpectrum,
    QuadratureGrid,
    constraint_residual_jost,
    constraint_residual_phase,
    convergence_study,
    coulomb_energy_continuum,
    limit_s0,
    limit_s1,
    pv_integral_I,
    pv_resolvent_epsilon,
    quantization_asymptotic,
    s_m_exact,
    s_m_leading,
    s_m_subleading,
    solve_quantization,
    subleading_integral,
)
from .errors import (
    DegenerateInputError,
    GridTooCoarseError,
    InconsistentSpectraError,
    NumericalError,
)
from .freecase import (
    FreeSpectrum,
    appendix_g,
    appendix_pro,
    cos_product,
    free_product_identity,
    free_spectrum,
    sine_product_residual,
)
from .hamiltonian import (
    EvenChainPotential,
    HalfChainDiagonal,
    SpectrumPair,
    TridiagonalSymmetric,
    build_full_hamiltonian,
    build_half_hamiltonians,
    char_poly_eval,
    eigenvalues_complex,
    eigenvalues_real,
    eigenvalues_real_mp,
    spectrum_pair,
    spectrum_pair_mp,
    sturm_count_below,
)
from .scattering import (
    CompactPotential,
    ConditionReport,
    JostPolynomial,
    PhaseTable,
    check_conditions,
    jost_polynomial,
    jost_solution,
    regular_solution,
    scattering_phase,
    wronskian,
)

__version__ = "0.1.0"
