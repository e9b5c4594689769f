use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::cobyla::{minimize, CobylaOptions};
use super::statevector::{Mixer, StateVector};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::num::Real;
use crate::qubo::{build_qubo, PenaltyWeights, QuboModel, VarLayout};
use crate::solution::SolveResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub layers: usize,
    pub shots: usize,
    pub max_evals: usize,
    pub seed: u64,
    pub qubit_limit: usize,
}

impl Default for QaoaParams {
    fn default() -> Self {
        Self {
            layers: 3,
            shots: 4096,
            max_evals: 150,
            seed: 0,
            qubit_limit: 24,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QaoaRun<T: Real> {
    /// Lowest-energy sample.
    pub result: SolveResult<T>,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Energy expectation with all angles zero, i.e. of the initial state.
    pub initial_expectation: T,
    pub expectation: T,
    pub evaluations: usize,
    /// Largest `|‖ψ‖² − 1|` over every simulated circuit.
    pub norm_drift: T,
    /// Final-state probability outside every order having exactly one rider.
    pub leakage: T,
    pub samples: Vec<usize>,
}

/// Each order register holds exactly one set bit.
pub fn one_hot_orders(layout: &VarLayout, basis: usize) -> bool {
    (0..layout.orders).all(|j| {
        layout
            .order_register(j)
            .iter()
            .filter(|&&v| basis >> v & 1 == 1)
            .count()
            == 1
    })
}

fn index_bits(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|v| index >> v & 1 == 1).collect()
}

struct Circuit<'a, T: Real> {
    diag: &'a [T],
    init: &'a StateVector<T>,
    mixer: &'a Mixer,
    /// Angles handed to the optimizer are `γ·scale`, which keeps both angle
    /// families on a comparable footing whatever the energy units.
    scale: f64,
}

impl<T: Real> Circuit<'_, T> {
    fn state(&self, angles: &[f64]) -> StateVector<T> {
        let p = angles.len() / 2;
        let mut s = self.init.clone();
        for l in 0..p {
            s.apply_phase(self.diag, T::lit(angles[l] / self.scale)).expect("diagonal matches state");
            self.mixer.apply(&mut s, T::lit(angles[p + l]));
        }
        s
    }
}

fn run<T: Real>(
    qubo: &QuboModel<T>,
    init: StateVector<T>,
    mixer: Mixer,
    params: &QaoaParams,
) -> Result<QaoaRun<T>> {
    if params.layers == 0 || params.shots == 0 {
        return Err(Error::InvalidConfig("QAOA needs at least one layer and one shot".into()));
    }
    let start = Instant::now();
    let layout = &qubo.layout;
    let diag = qubo.diagonal(params.qubit_limit)?;
    let probs = init.probabilities();
    let mean: f64 = probs.iter().zip(&diag).map(|(p, e)| p.to_f64_lossy() * e.to_f64_lossy()).sum();
    let var: f64 = probs
        .iter()
        .zip(&diag)
        .map(|(p, e)| p.to_f64_lossy() * (e.to_f64_lossy() - mean).powi(2))
        .sum();
    let scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let circuit = Circuit {
        diag: &diag,
        init: &init,
        mixer: &mixer,
        scale,
    };

    // Linear ramp: phase angles grow, mixing angles shrink, layer by layer.
    let p = params.layers;
    let mut x0 = vec![0.0; 2 * p];
    for l in 0..p {
        let t = (l as f64 + 0.5) / p as f64;
        x0[l] = t;
        x0[p + l] = (1.0 - t) * std::f64::consts::FRAC_PI_4;
    }

    let one = T::one();
    let mut drift = (init.norm_sqr() - one).abs();
    let minimum = minimize(
        |angles| {
            let s = circuit.state(angles);
            drift = drift.max((s.norm_sqr() - one).abs());
            s.expectation(&diag).expect("diagonal matches state").to_f64_lossy()
        },
        &x0,
        CobylaOptions {
            max_evals: params.max_evals,
            ..CobylaOptions::default()
        },
    );

    let state = circuit.state(&minimum.x);
    drift = drift.max((state.norm_sqr() - one).abs());
    let samples = state.sample(params.shots, params.seed);
    let best = samples
        .iter()
        .copied()
        .reduce(|a, b| if diag[b] < diag[a] || (diag[b] == diag[a] && b < a) { b } else { a })
        .expect("at least one shot");

    Ok(QaoaRun {
        result: SolveResult {
            bits: index_bits(best, qubo.n_vars),
            energy: Some(diag[best]),
            elapsed: start.elapsed(),
        },
        gammas: minimum.x[..p].iter().map(|g| g / scale).collect(),
        betas: minimum.x[p..].to_vec(),
        initial_expectation: init.expectation(&diag)?,
        expectation: state.expectation(&diag)?,
        evaluations: minimum.evals,
        norm_drift: drift,
        leakage: state.leakage(|b| one_hot_orders(layout, b)),
        samples,
    })
}

/// Standard QAOA on the full penalized QUBO: `|+>^N` start, `X` mixer.
pub fn solve_qaoa<T: Real>(inst: &Instance<T>, pen: &PenaltyWeights<T>, params: &QaoaParams) -> Result<QaoaRun<T>> {
    let qubo = build_qubo(inst, pen, false)?;
    if qubo.n_vars > params.qubit_limit {
        return Err(Error::QubitLimit {
            qubits: qubo.n_vars,
            limit: params.qubit_limit,
        });
    }
    run(&qubo, StateVector::uniform(qubo.n_vars), Mixer::Transverse, params)
}

/// Alternating-operator ansatz: the order-assignment constraint is built into
/// the circuit instead of the energy. Each order's rider register starts in a
/// uniform one-hot superposition and mixes under XY rings, which never leave
/// that subspace; slack qubits start in `|+>` and mix under `X`.
pub fn solve_qaoansatz<T: Real>(
    inst: &Instance<T>,
    pen: &PenaltyWeights<T>,
    params: &QaoaParams,
) -> Result<QaoaRun<T>> {
    let qubo = build_qubo(inst, pen, true)?;
    let n = qubo.n_vars;
    if n > params.qubit_limit {
        return Err(Error::QubitLimit {
            qubits: n,
            limit: params.qubit_limit,
        });
    }
    let layout = &qubo.layout;
    let registers = (0..layout.orders).map(|j| layout.order_register(j)).collect();
    let mixer = Mixer::xy(registers, layout.slack_vars().collect())?;
    let init = StateVector::uniform_over(n, |b| one_hot_orders(layout, b))?;
    run(&qubo, init, mixer, params)
}
