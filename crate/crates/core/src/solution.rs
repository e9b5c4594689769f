use std::time::Duration;

use crate::error::Result;
use crate::model::Assignment;
use crate::num::Real;
use crate::qubo::{decode, VarLayout};

/// Raw solver output, before repair.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<T: Real> {
    /// Full variable vector. Assignment-only solvers return just the `m·n` block.
    pub bits: Vec<bool>,
    /// Model energy of `bits`, for solvers that minimize one.
    pub energy: Option<T>,
    pub elapsed: Duration,
}

impl<T: Real> SolveResult<T> {
    pub fn from_assignment(x: &Assignment, elapsed: Duration) -> Self {
        Self {
            bits: x.as_flat().to_vec(),
            energy: None,
            elapsed,
        }
    }

    /// Assignment block of a QUBO-layout bitstring.
    pub fn assignment(&self, layout: &VarLayout) -> Result<Assignment> {
        if self.bits.len() == layout.assignment_bits() {
            return Assignment::from_flat(layout.riders, layout.orders, &self.bits);
        }
        decode(&self.bits, layout)
    }
}
