//! Truncated Fock-space machinery: displacement-operator matrix elements,
//! normal modes of the linear circuit, tensor-product operators and the
//! lowest-eigenvalue solvers.

mod eigen;
mod elements;
mod modes;
mod tensor;

pub use eigen::{lowest_eigs, LanczosOptions, LinearOperator, SolverMode, Spectrum, DENSE_LIMIT};
pub use elements::{exp_factor_matrix, ho_exp_matrix_element, position_matrix};
pub use modes::{normal_modes, CircuitSpec, CosineTerm, NormalModeSystem};
pub use tensor::{assemble_tensor_operator, TensorOperator, TensorTerm, DEFAULT_MEMORY_BUDGET};
