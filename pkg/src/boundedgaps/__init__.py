"""Length spectra of closed geodesics and their gap statistics.

Covers the modular group, its congruence subgroups, quaternion unit
progressions, finite metric graphs and the two-loop bouquet.
"""

from .errors import (
    BudgetExceededError,
    CertificationError,
    MalformedInputError,
    PreconditionError,
    VerificationError,
)
from .quadratic import (
    QuadraticInteger,
    class_number,
    count_units_below,
    fundamental_decompose,
    fundamental_unit,
    unit_from_trace,
)
from .modular import count_geodesics, gap_scan, limit_gap_estimate, spectrum, subgroup_monotonicity_check
from .arithmetic import congruence_gap_scan, gamma_n_witness, quaternion_gap_scan, quaternion_witness
from .graphs import (
    Graph,
    MetricGraph,
    degenerate,
    enumerate_geodesics,
    rational_gap_check,
    trace_identity_residual,
    transfer_matrix,
    zeta_det,
    zeta_product,
)
from .bouquet import DigitReal, density_demo, liouville_construct, min_gap_scan, verify_small_gaps
from .sequences import AscendingSequence, limit_gap_report, merge

__version__ = "0.1.0"
