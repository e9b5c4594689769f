use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{geometric, metropolis_accept, AnnealRun, Couplings, MoveStats, Replica};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::qubo::{bits_from_spins, to_ising, IsingModel, QuboModel};
use crate::solution::SolveResult;

/// Path-integral annealing parameters. `gamma` is the transverse field,
/// lowered geometrically from `gamma_initial` to `gamma_final`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SqaParams<T: Real> {
    pub replicas: usize,
    pub temperature: T,
    pub gamma_initial: T,
    pub gamma_final: T,
    pub sweeps: usize,
    pub seed: u64,
}

impl<T: Real> SqaParams<T> {
    /// P = 20, T = 0.05·(max|h| + max|J|), Γ from 2·P·T down to 1% of that,
    /// 200 sweeps per spin.
    pub fn for_model(model: &IsingModel<T>, seed: u64) -> Self {
        let mut scale = model.coefficient_scale();
        if !(scale > T::zero()) {
            scale = T::one();
        }
        let replicas = 20;
        let temperature = T::lit(0.05) * scale;
        let gamma_initial = T::lit(2.0) * T::from_usize_lossy(replicas) * temperature;
        Self {
            replicas,
            temperature,
            gamma_initial,
            gamma_final: gamma_initial * T::lit(0.01),
            sweeps: 200 * model.n_spins.max(1),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.replicas >= 1
            && self.temperature > T::zero()
            && self.gamma_final > T::zero()
            && self.gamma_final <= self.gamma_initial
            && self.sweeps >= 1;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "quantum annealing needs P >= 1, T > 0, gamma_initial >= gamma_final > 0 and sweeps > 0, got {:?}",
                self
            )));
        }
        Ok(())
    }
}

/// Coupling between neighbouring Trotter slices: `−(P·T/2)·ln tanh(Γ/(P·T))`.
pub fn transverse_coupling(gamma: f64, replicas: usize, temperature: f64) -> f64 {
    let pt = replicas as f64 * temperature;
    -0.5 * pt * (gamma / pt).tanh().ln()
}

/// Change of `−J⊥ Σ_k s^k_v s^{k+1}_v` when spin `v` of slice `k` flips.
/// Bonds are evaluated before and after the flip, so with a single slice
/// (which couples to itself) the change vanishes identically.
#[inline]
fn slice_delta<T: Real>(replicas: &[Replica<T>], k: usize, v: usize, jperp: T) -> T {
    let p = replicas.len();
    let (up, down) = ((k + 1) % p, (k + p - 1) % p);
    let old = replicas[k].spins[v];
    let new = -old;
    let at = |slice: usize, mine: i8| if slice == k { mine } else { replicas[slice].spins[v] };
    let before = old * at(up, old) + at(down, old) * old;
    let after = new * at(up, new) + at(down, new) * new;
    -jperp * T::lit(f64::from(after - before))
}

pub fn solve_sqa<T: Real>(model: &IsingModel<T>, params: &SqaParams<T>) -> Result<AnnealRun<T>> {
    params.validate()?;
    let start = Instant::now();
    let n = model.n_spins;
    let p = params.replicas;
    let couplings = Couplings::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut slices: Vec<Replica<T>> = (0..p)
        .map(|_| {
            let spins = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            Replica::new(model, &couplings, spins)
        })
        .collect();

    let lowest = |slices: &[Replica<T>]| {
        (0..slices.len())
            .reduce(|a, b| if slices[b].energy < slices[a].energy { b } else { a })
            .expect("at least one slice")
    };
    let k0 = lowest(&slices);
    let mut best = (slices[k0].energy, slices[k0].spins.clone());
    let mut trace = Vec::with_capacity(params.sweeps);
    let mut stats = MoveStats::default();
    let temperature = params.temperature;
    let inv_p = T::one() / T::from_usize_lossy(p);
    let (g0, g1, t) = (
        params.gamma_initial.to_f64_lossy(),
        params.gamma_final.to_f64_lossy(),
        temperature.to_f64_lossy(),
    );

    for sweep in 0..params.sweeps {
        let gamma = geometric(g0, g1, sweep, params.sweeps);
        let jperp = T::lit(transverse_coupling(gamma, p, t));
        for k in 0..p {
            for v in 0..n {
                let d_cl = slices[k].flip_delta(v);
                let d_perp = slice_delta(&slices, k, v, jperp);
                stats.proposals += 1;
                if d_perp != T::zero() {
                    stats.transverse_nonzero += 1;
                }
                let delta = d_cl * inv_p + d_perp;
                let u = if delta > T::zero() { T::lit(rng.gen::<f64>()) } else { T::zero() };
                if metropolis_accept(delta, temperature, u) {
                    slices[k].flip(&couplings, v, d_cl);
                    stats.accepted += 1;
                }
            }
        }
        let k = lowest(&slices);
        if slices[k].energy < best.0 {
            best = (slices[k].energy, slices[k].spins.clone());
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

/// Anneals a QUBO through its Ising form; bit `v` is spin `v` (1 ↔ +1).
pub fn solve_sqa_qubo<T: Real>(qubo: &QuboModel<T>, params: &SqaParams<T>) -> Result<AnnealRun<T>> {
    let ising = to_ising(qubo);
    let mut run = solve_sqa(&ising, params)?;
    run.result.energy = Some(qubo.energy(&run.result.bits)?);
    Ok(run)
}
