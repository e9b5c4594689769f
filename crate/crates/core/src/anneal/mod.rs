//! Single-spin-flip Monte Carlo over an [`IsingModel`]: classical simulated
//! annealing and path-integral simulated quantum annealing.
//!
//! Both keep per-spin local fields `f_v = h_v + Σ_u J_uv·s_u` up to date, so a
//! flip proposal costs O(1) and an accepted flip O(degree).

mod sa;
mod sqa;

use crate::num::Real;
use crate::qubo::IsingModel;
use crate::solution::SolveResult;

pub use sa::{solve_sa, SaSchedule};
pub use sqa::{solve_sqa, solve_sqa_qubo, transverse_coupling, SqaParams};

/// Proposal bookkeeping for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub proposals: u64,
    pub accepted: u64,
    /// Proposals whose replica-coupling energy change was non-zero.
    pub transverse_nonzero: u64,
}

#[derive(Clone, Debug)]
pub struct AnnealRun<T: Real> {
    pub result: SolveResult<T>,
    /// Best classical energy seen, recorded after every sweep.
    pub best_trace: Vec<T>,
    pub stats: MoveStats,
}

/// Metropolis rule: downhill always, uphill with probability `exp(−ΔE/T)`.
/// `u` is a uniform draw in `[0, 1)`.
#[inline]
pub fn metropolis_accept<T: Real>(delta: T, temperature: T, u: T) -> bool {
    if delta <= T::zero() {
        return true;
    }
    let x = delta / temperature;
    // exp(-40) is below any f64 draw that matters.
    x < T::lit(40.0) && u < (-x).exp()
}

/// Compressed adjacency of an Ising model.
pub(crate) struct Couplings<T: Real> {
    pub fields: Vec<T>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<T>,
}

impl<T: Real> Couplings<T> {
    pub fn new(model: &IsingModel<T>) -> Self {
        let adj = model.neighbors();
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for list in &adj {
            for &(u, c) in list {
                targets.push(u);
                weights.push(c);
            }
            offsets.push(targets.len());
        }
        Self {
            fields: model.fields(),
            offsets,
            targets,
            weights,
        }
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn local_fields(&self, spins: &[i8]) -> Vec<T> {
        (0..spins.len())
            .map(|v| {
                self.fields[v]
                    + self
                        .neighbors(v)
                        .map(|(u, c)| c * T::lit(f64::from(spins[u])))
                        .sum::<T>()
            })
            .collect()
    }
}

/// Spin configuration with cached local fields and energy.
pub(crate) struct Replica<T: Real> {
    pub spins: Vec<i8>,
    pub local: Vec<T>,
    pub energy: T,
}

impl<T: Real> Replica<T> {
    pub fn new(model: &IsingModel<T>, couplings: &Couplings<T>, spins: Vec<i8>) -> Self {
        let local = couplings.local_fields(&spins);
        let energy = model.energy(&spins).expect("length matches model");
        Self { spins, local, energy }
    }

    /// Classical energy change of flipping `v`.
    #[inline]
    pub fn flip_delta(&self, v: usize) -> T {
        T::lit(-2.0 * f64::from(self.spins[v])) * self.local[v]
    }

    #[inline]
    pub fn flip(&mut self, couplings: &Couplings<T>, v: usize, delta: T) {
        let new = -self.spins[v];
        self.spins[v] = new;
        self.energy += delta;
        let step = T::lit(2.0 * f64::from(new));
        for (u, c) in couplings.neighbors(v) {
            self.local[u] += c * step;
        }
    }
}

fn geometric(start: f64, end: f64, step: usize, steps: usize) -> f64 {
    if steps <= 1 {
        return start;
    }
    start * (end / start).powf(step as f64 / (steps - 1) as f64)
}
