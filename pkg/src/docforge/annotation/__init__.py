from .core import (
    REASONS,
    VERDICTS,
    QUALIFICATION_THRESHOLD,
    AgreementMatrix,
    AnnotationError,
    Decision,
    Session,
    apply_review,
    assign_samples,
    fleiss_kappa,
    matrix_from_decisions,
    qualification_score,
)
from .store import DecisionStore

__all__ = [
    "REASONS",
    "VERDICTS",
    "QUALIFICATION_THRESHOLD",
    "AgreementMatrix",
    "AnnotationError",
    "Decision",
    "DecisionStore",
    "Session",
    "apply_review",
    "assign_samples",
    "fleiss_kappa",
    "matrix_from_decisions",
    "qualification_score",
]
