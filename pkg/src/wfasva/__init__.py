"""Weighted finite automata: l2 membership, Gramians and singular value automata."""

from .analysis import (
    check_l2,
    distance_l2,
    distance_sq_l2,
    exact_truncation_error_sq,
    hankel_block,
    hankel_svd,
    norm_l2,
    norm_sq_l2,
)
from .errors import DivergenceError, ModelError, NumericalError, WfaError
from .gramian import build_sdp, gramians, gramians_fixed_point, gramians_linear
from .io import parse, serialize
from .minimize import minimize
from .sva import compute_sva, pad_truncation, sva_diagnostics, truncate
from .wfa import (
    Wfa,
    conjugate,
    difference,
    evaluate,
    is_det_free,
    kron_square,
    validate_pdpa,
    validate_pgpa,
)

__all__ = [
    "DivergenceError",
    "ModelError",
    "NumericalError",
    "Wfa",
    "WfaError",
    "build_sdp",
    "check_l2",
    "compute_sva",
    "conjugate",
    "difference",
    "distance_l2",
    "distance_sq_l2",
    "evaluate",
    "exact_truncation_error_sq",
    "gramians",
    "gramians_fixed_point",
    "gramians_linear",
    "hankel_block",
    "hankel_svd",
    "is_det_free",
    "kron_square",
    "minimize",
    "norm_l2",
    "norm_sq_l2",
    "pad_truncation",
    "parse",
    "serialize",
    "sva_diagnostics",
    "truncate",
    "validate_pdpa",
    "validate_pgpa",
]
