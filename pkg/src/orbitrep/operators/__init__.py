"""Orbit representation operators and their verification."""

from orbitrep.operators.build import (
    WordCache,
    branch_words,
    build_Mk,
    build_T,
    build_U,
    build_V,
    generator_map,
    smallest_index,
    word_operator,
)
from orbitrep.operators.certify import (
    CertificateReport,
    EquivalenceReport,
    MkReport,
    commutant_certificate,
    default_test_vectors,
    equivalence_report,
    mk_convergence,
)
from orbitrep.operators.sparse import ONE_PHASE, ZERO_PHASE, PartialMap, SparseOperator, UnitComplex, diagonal, op_adjoint
from orbitrep.operators.verify import (
    KINDS,
    RemarkReport,
    VerificationReport,
    extend_basis,
    remark_checks,
    verify_relations,
)

__all__ = [
    "KINDS", "ONE_PHASE", "ZERO_PHASE", "CertificateReport", "EquivalenceReport", "MkReport", "PartialMap",
    "RemarkReport", "SparseOperator", "UnitComplex", "VerificationReport", "WordCache", "branch_words",
    "build_Mk", "build_T", "build_U", "build_V", "commutant_certificate", "default_test_vectors", "diagonal",
    "equivalence_report", "extend_basis", "generator_map", "mk_convergence", "op_adjoint", "remark_checks",
    "smallest_index", "verify_relations", "word_operator",
]
