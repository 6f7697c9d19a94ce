"""Balance-based classification of multi-qudit pure states."""

from .balance import (
    BALANCED_REDUCIBLE,
    IRREDUCIBLY_BALANCED,
    PARTLY_BALANCED,
    PRODUCT,
    UNBALANCED,
    AlternatingMatrix,
    BalanceCertificate,
    BMatrix,
    Classification,
    alternating_matrix,
    b_matrix,
    balanced_part,
    classify,
    compose_alternating,
    construct_max_entangled,
    decompose_balanced,
    find_certificate,
    is_irreducible,
    verify_roots_of_unity,
)
from .catalog import CatalogEntry, canonicalize, enumerate_b_matrices, enumerate_irreducible, verify_length_bound
from .filtering import LocalFilter, equalize_amplitudes, normal_form
from .measures import concurrence2, three_tangle, two_qudit_det
from .state import PureState, QuditSystem, from_terms, parse_state, reduced_density_matrix

__all__ = [name for name in dir() if not name.startswith("_")]
