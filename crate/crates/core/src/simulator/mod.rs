//! Statevector simulation of the multi-key circuit and the classical
//! probabilistic oracle.

mod circuit;
mod classical;
mod sampling;
mod state;

pub use circuit::{
    apply_controlled_key_unitary, apply_gate, build_circuit, control_width, controlled_key_gates,
    fast_oracle_state, prepare_uniform, run_circuit, run_circuit_with, run_oracle_gates,
    CircuitOutput, CircuitSpec, Gate, OraclePath, RegisterLayout,
};
pub use classical::ClassicalOracle;
pub use sampling::{
    chi_square, exact_distribution, measure_data_register, ChiSquareTest, DataSampler,
    ExactDistribution, Histogram, HistogramRecord, SUPPORT_EPSILON,
};
pub use state::{StateVector, ABSOLUTE_MAX_QUBITS, DEFAULT_MAX_QUBITS};
