"""Equivariant Dirac operator and real structure on the equatorial quantum
sphere S^2_q, built on finite truncations and checked by verification suites."""

__version__ = "0.1.0"

from .qcore import HalfInt, half_int, q_number  # noqa: E402
from .hilbert import BasisIndex, HilbertSpec, grading, level_projector, Lq_operator  # noqa: E402
from .operators import (  # noqa: E402
    AntilinearOperator,
    DecayFit,
    LinearOperator,
    anticommutator,
    block_norms,
    commutator,
    conjugate_by,
    decay_fit,
    eig_hermitian,
    op_norm,
)
from .algebra import AlgebraElement, classical_point_eval, module_action, multiply, normal_form, star  # noqa: E402
from .spectral import (  # noqa: E402
    SpectralData,
    build_D,
    build_J,
    build_pi,
    build_rho,
    build_spectral_data,
    calibrate_conventions,
)

__all__ = [
    "__version__",
    "HalfInt", "half_int", "q_number",
    "BasisIndex", "HilbertSpec", "grading", "level_projector", "Lq_operator",
    "AntilinearOperator", "DecayFit", "LinearOperator", "anticommutator", "block_norms",
    "commutator", "conjugate_by", "decay_fit", "eig_hermitian", "op_norm",
    "AlgebraElement", "classical_point_eval", "module_action", "multiply", "normal_form", "star",
    "SpectralData", "build_D", "build_J", "build_pi", "build_rho", "build_spectral_data",
    "calibrate_conventions",
]
