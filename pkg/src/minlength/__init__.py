"""Lorentz-covariant minimal-length algebra and the deformed Dirac oscillator.

Exact symbolic checks of the deformed commutators and Poincare generators,
plus numerics for the (1+1)-dimensional Dirac oscillator: spectrum,
Gegenbauer wavefunctions, normalization and uncertainty relations.
"""

from .algebra import (
    DeformationParams,
    VerificationReport,
    build_covariant_operators,
    build_dimensionless_operators,
    build_kempf_operators,
    discrete_symmetry_check,
    physical_state_check,
    verify_deformed_algebra,
    weight_exponent,
)
from .errors import (
    BadIndices,
    DegenerateWeight,
    NoConvergence,
    NoGroundNegative,
    NonPhysical,
    NonPhysicalConfig,
    NonZeroResidual,
)
from .oscillator import (
    OscillatorConfig,
    SpectrumPoint,
    WavefunctionPair,
    dirac_residual,
    energy,
    energy_expansions,
    quantize_p0,
    recursion_check,
    shape_invariance_residual,
    spectrum,
    susy_sequence,
    wavefunctions,
)
from .poincare import (
    build_lorentz,
    build_translation,
    verify_generator_action,
    verify_lorentz_form_invariance,
    verify_poincare_closure,
)
from .special import DualNumber, QuadratureSpec, gegenbauer, gegenbauer_norm, integrate_weighted, z_map
from .symbolic import DiffOp, GaussianRational, MultiPoly, PolyRing, RationalFn

__version__ = "0.1.0"
