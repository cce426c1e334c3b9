"""Sparse/dense quantum state engine used by every protocol in the package."""

from .dense import (
    DensityMatrix,
    dense_hadamard_register,
    dense_project,
    dense_register_distribution,
    dense_single_qubit,
    from_vector,
    pure_density,
    to_density_matrix,
    to_vector,
    trace_distance,
)
from .layout import RegisterLayout
from .sparse import (
    Basis,
    MeasurementRecord,
    SparseState,
    add_register,
    apply_classical_oracle,
    apply_h,
    apply_x,
    apply_z,
    bell_distribution,
    bell_measure,
    bell_pair,
    computational_distribution,
    equal_up_to_phase,
    hadamard_distribution,
    hadamard_outcome_probability,
    hadamard_pattern_table,
    measure_computational,
    measure_hadamard_register,
    remove_register,
    rename,
    reorder,
    tensor,
)

__all__ = [
    "Basis",
    "DensityMatrix",
    "MeasurementRecord",
    "RegisterLayout",
    "SparseState",
    "add_register",
    "apply_classical_oracle",
    "apply_h",
    "apply_x",
    "apply_z",
    "bell_distribution",
    "bell_measure",
    "bell_pair",
    "computational_distribution",
    "dense_hadamard_register",
    "dense_project",
    "dense_register_distribution",
    "dense_single_qubit",
    "equal_up_to_phase",
    "from_vector",
    "hadamard_distribution",
    "hadamard_outcome_probability",
    "hadamard_pattern_table",
    "measure_computational",
    "measure_hadamard_register",
    "pure_density",
    "remove_register",
    "rename",
    "reorder",
    "tensor",
    "to_density_matrix",
    "to_vector",
    "trace_distance",
]
