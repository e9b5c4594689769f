//! Exact statevector simulation of variational circuits over a QUBO diagonal.

pub mod cobyla;
mod qaoa;
mod statevector;

pub use qaoa::{one_hot_orders, solve_qaoa, solve_qaoansatz, QaoaParams, QaoaRun};
pub use statevector::{Mixer, StateVector};
