"""Dense complex linear algebra and the small convex subproblem solvers."""

from ._backend import BACKEND
from .errors import DomainError, InfeasibleError, IterationError, NumericsError
from .linalg import (check_hermitian, fix_phase, hermitian_eig,
                     max_generalized_eigvec, pseudo_inverse)
from .solvers import (ConvexQcqpProblem, DiagSdpLogProblem, LmiQpProblem,
                      audit_diag_sdp, audit_lmi_qp, audit_qcqp,
                      gaussian_randomize, solve_convex_qcqp,
                      solve_diag_sdp_log, solve_lmi_qp)

__all__ = [
    "BACKEND",
    "ConvexQcqpProblem",
    "DiagSdpLogProblem",
    "DomainError",
    "InfeasibleError",
    "IterationError",
    "LmiQpProblem",
    "NumericsError",
    "audit_diag_sdp",
    "audit_lmi_qp",
    "audit_qcqp",
    "check_hermitian",
    "fix_phase",
    "gaussian_randomize",
    "hermitian_eig",
    "max_generalized_eigvec",
    "pseudo_inverse",
    "solve_convex_qcqp",
    "solve_diag_sdp_log",
    "solve_lmi_qp",
]
