"""Exact substochastic matrices, partitioned state spaces and entropy accounting
for generalised reversible computing."""

from .cdu import (
    PartialIsoWitness,
    associator,
    copy_matrix,
    discard_matrix,
    dom_matrix,
    is_deterministic,
    is_quasi_total,
    is_subpermutation,
    is_total,
    left_unitor,
    partial_inverse,
    right_unitor,
    verify_partial_iso,
)
from .circuit import (
    Analysis,
    CircuitSpec,
    StepReport,
    aggregate_cmd,
    analyze,
    builtin_gate,
    elaborate,
    lift_cmd,
    parse_circuit,
    serialize,
)
from .entropy import (
    CompContext,
    EntropyLedger,
    FundamentalCheck,
    PhysContext,
    check_fundamental,
    entropy,
    is_comp_transformation,
    is_conditionally_reversible,
    is_free_comp,
    is_free_phy,
    is_non_entropy_ejecting,
    is_phys_transformation,
    ledger,
    restrict,
)
from .errors import *  # noqa: F401,F403
from .laws import LawConfig, LawReport, run_laws
from .partitioned import (
    PMatrix,
    PSet,
    aggregate,
    aggregate_dist,
    aggregate_pset,
    aggregate_set,
    discrete_pset,
    dist_equiv,
    indiscrete_pset,
    is_partitioned,
    lift,
    lift_dist,
    make_pmatrix,
    make_pset,
    pcompose,
    pkron,
    product_pset,
)
from .subdist import (
    ONE,
    Matrix,
    Subdist,
    apply,
    compose,
    from_function,
    identity,
    kron,
    make_matrix,
    make_subdist,
    mass,
    support_dist,
    support_matrix,
    tensor_dist,
    transpose,
    uniform,
    unit,
    zero,
    zero_matrix,
)

__version__ = "0.1.0"
