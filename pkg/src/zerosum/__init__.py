"""Zero-sum invariants of finite abelian groups.

Exhaustive computation of the Davenport constant, the EGZ constant and its
squarefree variant, verification of the inverse-structure properties behind
them, affine cap search in ternary space, and an exact big-integer engine
deriving bounds from the known results.
"""

from ._kernel import BACKEND as kernel_backend
from .errors import *  # noqa: F401,F403
from .groups import (
    GroupElement,
    GroupSpec,
    elem_add,
    elem_neg,
    elem_scale,
    group_from_key,
    homocyclic_group,
    make_group,
)
from .sequences import (
    GroupSequence,
    Homomorphism,
    canonical_form,
    find_zero_sum_fixed_length,
    format_sequence,
    has_nonempty_zero_sum,
    has_zero_sum_fixed_length,
    parse_sequence,
    seq_map,
    seq_shift,
)

__version__ = "0.1.0"
