use thiserror::Error;

/// Errors raised by the simulator, the Hamiltonian tools and the VQE driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("qubit count {n} outside 1..={cap}")]
    QubitCount { n: usize, cap: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("two-qubit gate applied to the same qubit {0} twice")]
    DuplicateQubit(usize),

    #[error("basis index {bits} out of range for {n_qubits} qubits")]
    BasisOutOfRange { bits: usize, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("normalized variance undefined: |<H>| = {0:e} is below the guard threshold")]
    UndefinedNormalization(f64),

    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    LanczosNotConverged { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice has an odd dimension; antipodal pairing needs every extent even")]
    OddDimension,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("parameter vector has length {actual}, circuit expects {expected}")]
    ParameterLength { expected: usize, actual: usize },

    #[error("all {0} restarts failed")]
    AllRestartsFailed(usize),

    #[error("energy {energy} lies below the exact ground energy {exact}")]
    VariationalBound { energy: f64, exact: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
