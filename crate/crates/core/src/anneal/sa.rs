use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{geometric, metropolis_accept, AnnealRun, Couplings, MoveStats, Replica};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::qubo::{bits_from_spins, IsingModel};
use crate::solution::SolveResult;

/// Geometric cooling from `t_initial` to `t_final` over `sweeps` sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SaSchedule<T: Real> {
    pub t_initial: T,
    pub t_final: T,
    pub sweeps: usize,
    pub seed: u64,
}

impl<T: Real> SaSchedule<T> {
    /// Starts at the coefficient scale and cools by four decades, 200 sweeps per spin.
    pub fn for_model(model: &IsingModel<T>, seed: u64) -> Self {
        let mut t = model.coefficient_scale();
        if !(t > T::zero()) {
            t = T::one();
        }
        Self {
            t_initial: t,
            t_final: t * T::lit(1e-4),
            sweeps: 200 * model.n_spins.max(1),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t_initial > T::zero() && self.t_final > T::zero() && self.t_final <= self.t_initial;
        if !ok || self.sweeps == 0 {
            return Err(Error::InvalidConfig(format!(
                "annealing schedule needs t_initial >= t_final > 0 and sweeps > 0, got {:?}",
                self
            )));
        }
        Ok(())
    }
}

pub fn solve_sa<T: Real>(model: &IsingModel<T>, schedule: &SaSchedule<T>) -> Result<AnnealRun<T>> {
    schedule.validate()?;
    let start = Instant::now();
    let n = model.n_spins;
    let couplings = Couplings::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let spins: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut rep = Replica::new(model, &couplings, spins);
    let mut best = (rep.energy, rep.spins.clone());
    let mut trace = Vec::with_capacity(schedule.sweeps);
    let mut stats = MoveStats::default();
    let (t0, t1) = (schedule.t_initial.to_f64_lossy(), schedule.t_final.to_f64_lossy());

    for sweep in 0..schedule.sweeps {
        let t = T::lit(geometric(t0, t1, sweep, schedule.sweeps));
        for v in 0..n {
            let delta = rep.flip_delta(v);
            stats.proposals += 1;
            let u = if delta > T::zero() { T::lit(rng.gen::<f64>()) } else { T::zero() };
            if metropolis_accept(delta, t, u) {
                rep.flip(&couplings, v, delta);
                stats.accepted += 1;
                if rep.energy < best.0 {
                    best = (rep.energy, rep.spins.clone());
                }
            }
        }
        trace.push(best.0);
    }

    let energy = model.energy(&best.1)?;
    Ok(AnnealRun {
        result: SolveResult {
            bits: bits_from_spins(&best.1),
            energy: Some(energy),
            elapsed: start.elapsed(),
        },
        best_trace: trace,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ferromagnetic_pair_aligns() {
        let mut m = IsingModel::<f64>::new(2);
        m.add_coupling(0, 1, -1.0);
        let aligned = (0..100)
            .filter(|&seed| {
                let run = solve_sa(&m, &SaSchedule::for_model(&m, seed)).unwrap();
                run.result.bits[0] == run.result.bits[1]
            })
            .count();
        assert!(aligned >= 99, "{aligned}");
    }

    #[test]
    fn frustrated_triangle_reaches_ground_energy() {
        let mut m = IsingModel::<f64>::new(3);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            m.add_coupling(u, v, 1.0);
        }
        let run = solve_sa(&m, &SaSchedule::for_model(&m, 1)).unwrap();
        assert_eq!(run.result.energy, Some(-1.0));
        assert!(run.best_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn seeded_runs_repeat() {
        let mut m = IsingModel::<f64>::new(6);
        for v in 0..5 {
            m.add_coupling(v, v + 1, if v % 2 == 0 { 1.0 } else { -0.5 });
            m.add_field(v, 0.1 * v as f64);
        }
        let s = SaSchedule::for_model(&m, 7);
        let (a, b) = (solve_sa(&m, &s).unwrap(), solve_sa(&m, &s).unwrap());
        assert_eq!(a.result.bits, b.result.bits);
        assert_eq!(a.best_trace, b.best_trace);
    }

    #[test]
    fn bad_schedule_rejected() {
        let m = IsingModel::<f64>::new(2);
        let mut s = SaSchedule::for_model(&m, 0);
        s.sweeps = 0;
        assert!(solve_sa(&m, &s).is_err());
        s.sweeps = 5;
        s.t_final = 2.0 * s.t_initial;
        assert!(solve_sa(&m, &s).is_err());
    }
}
