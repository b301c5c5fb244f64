"""2-domination numbers of cylinders C_n x P_m by (min, +) transfer matrices."""

from .engine import (
    ClosedForm,
    ConjectureReport,
    Recurrence,
    TransferSystem,
    build_initial_vector,
    build_system,
    build_transition_matrix,
    conjecture_check,
    find_recurrence,
    gamma2_fixed,
    iterate,
    solve_closed_form,
)
from .errors import ResourceLimitError
from .oracle import (
    CylinderGraph,
    brute_gamma2,
    build_cylinder,
    is_2_dominating,
    is_quasi_2_dominating,
    word_list_decode,
    word_list_validate,
)
from .tropical import INF, TropicalMatrix, matvec, scalar_shift, shifted_equal
from .words import (
    CyclicWord,
    WordTable,
    can_follow,
    enumerate_words,
    is_final,
    is_initial,
    is_suitable,
    weight,
)

__version__ = "0.1.0"
