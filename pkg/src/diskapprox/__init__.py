"""Certificates, sampled checks and approximation experiments for the algebra [z^2, w^2; D]."""
from .symbolic import (
    BiPoly,
    HomogeneousSymbol,
    MixedPoly,
    d_zeta2,
    difference_quotient,
    eval_bipoly,
    eval_mixed,
    eval_symbol,
    homogeneous_parts,
    is_complex_symmetric,
    odd_part,
)
from .condition import (
    build_certificate,
    check_condition_A,
    check_condition_B,
    check_condition_C,
    check_strict_positivity,
    classify,
    combine_certificates,
    margin_trace,
    symbol_from_certificate,
    verify_polynomial_condition,
)
from .geometry import GeneratorSpec

__version__ = "0.1.0"
