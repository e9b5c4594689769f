use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::Real;

/// Dense `2^n` amplitude vector. Qubit `v` is bit `v` of the basis index,
/// matching variable `v` of a QUBO.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Self { n_qubits, amps }
    }

    /// `|+>^n`.
    pub fn uniform(n_qubits: usize) -> Self {
        let a = T::one() / T::from_usize_lossy(1 << n_qubits).sqrt();
        Self {
            n_qubits,
            amps: vec![Complex::new(a, T::zero()); 1 << n_qubits],
        }
    }

    /// Uniform superposition over the basis states accepted by `keep`.
    pub fn uniform_over(n_qubits: usize, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let support: Vec<usize> = (0..1usize << n_qubits).filter(|&b| keep(b)).collect();
        if support.is_empty() {
            return Err(Error::InvalidInput("empty initial-state support".into()));
        }
        let a = T::one() / T::from_usize_lossy(support.len()).sqrt();
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        for b in support {
            amps[b] = Complex::new(a, T::zero());
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidInput(format!("{len} amplitudes is not a power of two")));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_len(&self, diag: &[T]) -> Result<()> {
        if diag.len() != self.amps.len() {
            return Err(Error::dim(self.amps.len(), diag.len()));
        }
        Ok(())
    }

    /// `exp(−i·γ·E)` with `E` diagonal in the computational basis.
    pub fn apply_phase(&mut self, diag: &[T], gamma: T) -> Result<()> {
        self.check_len(diag)?;
        for (a, &e) in self.amps.iter_mut().zip(diag) {
            let (s, c) = (gamma * e).sin_cos();
            *a = *a * Complex::new(c, -s);
        }
        Ok(())
    }

    /// `exp(−i·β·X)` on one qubit.
    pub fn apply_rx(&mut self, qubit: usize, beta: T) {
        let (s, c) = beta.sin_cos();
        let mis = Complex::new(T::zero(), -s);
        let bit = 1usize << qubit;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                self.amps[b] = a0.scale(c) + a1 * mis;
                self.amps[b | bit] = a1.scale(c) + a0 * mis;
            }
        }
    }

    /// `exp(−i·β·(XX + YY)/2)` on a qubit pair: rotates within
    /// `span{|01>, |10>}` and leaves `|00>`, `|11>` alone, so Hamming weight
    /// is preserved.
    pub fn apply_xy(&mut self, p: usize, q: usize, beta: T) {
        let (s, c) = beta.sin_cos();
        let mis = Complex::new(T::zero(), -s);
        let (bp, bq) = (1usize << p, 1usize << q);
        for b in 0..self.amps.len() {
            if b & bp != 0 && b & bq == 0 {
                let other = b ^ bp ^ bq;
                let (a0, a1) = (self.amps[b], self.amps[other]);
                self.amps[b] = a0.scale(c) + a1 * mis;
                self.amps[other] = a1.scale(c) + a0 * mis;
            }
        }
    }

    /// `Σ_b |ψ_b|²·E_b`.
    pub fn expectation(&self, diag: &[T]) -> Result<T> {
        self.check_len(diag)?;
        Ok(self.amps.iter().zip(diag).map(|(a, &e)| a.norm_sqr() * e).sum())
    }

    /// Probability mass on basis states rejected by `keep`.
    pub fn leakage(&self, keep: impl Fn(usize) -> bool) -> T {
        self.amps
            .iter()
            .enumerate()
            .filter(|&(b, _)| !keep(b))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Basis indices drawn from `|ψ|²` by inverse CDF.
    pub fn sample(&self, shots: usize, seed: u64) -> Vec<usize> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for a in &self.amps {
            acc += a.norm_sqr().to_f64_lossy();
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..shots)
            .map(|_| {
                let u = rng.gen::<f64>() * acc;
                cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
            })
            .collect()
    }
}

/// Mixer applied after each phase layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mixer {
    /// `X` rotation on every qubit.
    Transverse,
    /// XY rings on each register, `X` rotations on the listed free qubits.
    Xy { registers: Vec<Vec<usize>>, free: Vec<usize> },
}

impl Mixer {
    pub fn xy(registers: Vec<Vec<usize>>, free: Vec<usize>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &q in registers.iter().flatten().chain(&free) {
            if !seen.insert(q) {
                return Err(Error::OverlappingRegisters(q));
            }
        }
        Ok(Mixer::Xy { registers, free })
    }

    pub fn apply<T: Real>(&self, state: &mut StateVector<T>, beta: T) {
        match self {
            Mixer::Transverse => {
                for q in 0..state.n_qubits() {
                    state.apply_rx(q, beta);
                }
            }
            Mixer::Xy { registers, free } => {
                for reg in registers {
                    for (p, q) in ring_pairs(reg) {
                        state.apply_xy(p, q, beta);
                    }
                }
                for &q in free {
                    state.apply_rx(q, beta);
                }
            }
        }
    }
}

/// Neighbouring pairs around a ring; two qubits form a single pair.
fn ring_pairs(reg: &[usize]) -> Vec<(usize, usize)> {
    match reg.len() {
        0 | 1 => Vec::new(),
        2 => vec![(reg[0], reg[1])],
        m => (0..m).map(|t| (reg[t], reg[(t + 1) % m])).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn close(a: C, b: C) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn rx_on_zero() {
        let mut s = StateVector::<f64>::zero(2);
        s.apply_rx(1, 0.3);
        let a = s.amplitudes();
        assert!(close(a[0], C::new(0.3f64.cos(), 0.0)));
        assert!(close(a[2], C::new(0.0, -(0.3f64).sin())));
        assert!(close(a[1], C::new(0.0, 0.0)));
    }

    #[test]
    fn rx_against_dense_matrix() {
        let amps: Vec<C> = (0..8).map(|k| C::new(k as f64 * 0.1 + 0.2, 0.05 * k as f64)).collect();
        let mut s = StateVector::from_amplitudes(amps.clone()).unwrap();
        let beta = 0.77f64;
        s.apply_rx(1, beta);
        let (c, sn) = (beta.cos(), beta.sin());
        for b in 0..8 {
            let want = amps[b] * c + amps[b ^ 2] * C::new(0.0, -sn);
            assert!(close(s.amplitudes()[b], want));
        }
    }

    #[test]
    fn xy_swaps_single_excitation() {
        let mut s = StateVector::<f64>::from_amplitudes(vec![
            C::new(0.0, 0.0),
            C::new(1.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
        ])
        .unwrap();
        s.apply_xy(0, 1, std::f64::consts::FRAC_PI_2);
        assert!(close(s.amplitudes()[2], C::new(0.0, -1.0)));
        assert!(s.amplitudes()[1].norm() < 1e-12);
    }

    #[test]
    fn xy_fixes_00_and_11() {
        let mut s = StateVector::<f64>::from_amplitudes(vec![
            C::new(0.6, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.8),
        ])
        .unwrap();
        let before = s.clone();
        s.apply_xy(0, 1, 1.234);
        assert_eq!(s, before);
    }

    #[test]
    fn phase_and_expectation() {
        let diag = vec![0.0, 1.0, 2.0, 3.0];
        let mut s = StateVector::<f64>::uniform(2);
        assert!((s.expectation(&diag).unwrap() - 1.5).abs() < 1e-12);
        s.apply_phase(&diag, 0.4).unwrap();
        assert!(close(s.amplitudes()[3], C::from_polar(0.5, -1.2)));
        assert!((s.expectation(&diag).unwrap() - 1.5).abs() < 1e-12);
        assert!(s.apply_phase(&[1.0], 0.1).is_err());
    }

    #[test]
    fn sampling_follows_probabilities() {
        let s = StateVector::<f64>::from_amplitudes(vec![
            C::new(0.5f64.sqrt(), 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.25f64.sqrt()),
            C::new(0.25f64.sqrt(), 0.0),
        ])
        .unwrap();
        let draws = s.sample(40_000, 3);
        assert!(!draws.contains(&1));
        let frac = draws.iter().filter(|&&b| b == 0).count() as f64 / 40_000.0;
        assert!((frac - 0.5).abs() < 0.015);
        assert_eq!(draws, s.sample(40_000, 3));
    }

    #[test]
    fn ring_shapes() {
        assert!(ring_pairs(&[4]).is_empty());
        assert_eq!(ring_pairs(&[4, 7]), vec![(4, 7)]);
        assert_eq!(ring_pairs(&[0, 1, 2]), vec![(0, 1), (1, 2), (2, 0)]);
    }

    #[test]
    fn overlapping_registers_rejected() {
        assert!(matches!(
            Mixer::xy(vec![vec![0, 1], vec![1, 2]], vec![]),
            Err(Error::OverlappingRegisters(1))
        ));
        assert!(Mixer::xy(vec![vec![0, 1]], vec![1]).is_err());
    }

    #[test]
    fn xy_ring_preserves_one_hot_subspace() {
        let regs = vec![vec![0, 1, 2], vec![3, 4]];
        let one_hot = |b: usize| (b & 0b111).count_ones() == 1 && (b >> 3 & 0b11).count_ones() == 1;
        let mut s = StateVector::<f64>::uniform_over(6, one_hot).unwrap();
        let mixer = Mixer::xy(regs, vec![5]).unwrap();
        let diag: Vec<f64> = (0..64).map(|b| (b as f64 * 0.37).sin()).collect();
        for t in 0..5 {
            s.apply_phase(&diag, 0.3 + 0.1 * t as f64).unwrap();
            mixer.apply(&mut s, 0.9 - 0.1 * t as f64);
        }
        assert!(s.leakage(one_hot) < 1e-12);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
