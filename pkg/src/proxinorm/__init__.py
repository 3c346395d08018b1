"""Exact-arithmetic renorming of the space of null sequences, with
certified Gateaux derivatives and machine-checkable descent certificates
showing non-attainment of best approximations from finite-codimension
subspaces."""

from .approxlin import (
    LinearityReport,
    build_report,
    coherence_margin,
    sign_coherence,
    span_match_feasible,
    verify_linearity_bound,
)
from .config import Config, load_config
from .construction import ConstructionTable, TableParams, canonical_table
from .demo import SignMatrix, independence_check, run_demo, sign_table, theta_values
from .descent import (
    DescentCertificate,
    DescentChain,
    SearchParams,
    Subspace,
    certify_descent,
    find_descent_direction,
    minimizing_sequence,
    verify_certificate,
    verify_chain,
)
from .errors import (
    BudgetError,
    DepthBudgetError,
    EliminationBudgetError,
    HypothesisError,
    InputFormatError,
    PrecisionBudgetError,
    PreconditionError,
    ProxinormError,
    SearchBudgetError,
)
from .gateaux import (
    DerivativeEnclosure,
    dminus_norm,
    dplus_abs_pairing,
    dplus_norm,
    dplus_sup,
    term_lipschitz,
)
from .linalg import ConstraintRow, LinearSystem, feasible, kernel_directions
from .norms import Enclosure, equivalence_check, norm_difference_sign, norm_enclosure
from .vectors import SparseVec, l1_norm, pair, sgn, sup_norm

__version__ = "0.1.0"
