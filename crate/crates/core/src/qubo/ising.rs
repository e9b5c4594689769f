use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::num::Real;

/// `offset + Σ_v h_v·s_v + Σ_{u<v} J_uv·s_u·s_v` over spins `s ∈ {−1, +1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel<T: Real> {
    pub n_spins: usize,
    pub h: BTreeMap<usize, T>,
    /// Keys satisfy `u < v`.
    pub j: BTreeMap<(usize, usize), T>,
    pub offset: T,
}

impl<T: Real> IsingModel<T> {
    pub fn new(n_spins: usize) -> Self {
        Self {
            n_spins,
            h: BTreeMap::new(),
            j: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    pub fn add_field(&mut self, v: usize, c: T) {
        *self.h.entry(v).or_insert_with(T::zero) += c;
    }

    pub fn add_coupling(&mut self, u: usize, v: usize, c: T) {
        assert_ne!(u, v, "self-coupling is a constant for spins");
        let key = if u < v { (u, v) } else { (v, u) };
        *self.j.entry(key).or_insert_with(T::zero) += c;
    }

    pub(crate) fn prune(&mut self) {
        self.h.retain(|_, c| *c != T::zero());
        self.j.retain(|_, c| *c != T::zero());
    }

    pub fn energy(&self, spins: &[i8]) -> Result<T> {
        if spins.len() != self.n_spins {
            return Err(Error::dim(self.n_spins, spins.len()));
        }
        let s = |v: usize| T::lit(f64::from(spins[v]));
        let mut e = self.offset;
        for (&v, &c) in &self.h {
            e += c * s(v);
        }
        for (&(u, v), &c) in &self.j {
            e += c * s(u) * s(v);
        }
        Ok(e)
    }

    /// `max |h| + max |J|`, the natural energy scale of one spin flip.
    pub fn coefficient_scale(&self) -> T {
        let mh = self.h.values().map(|c| c.abs()).fold(T::zero(), T::max);
        let mj = self.j.values().map(|c| c.abs()).fold(T::zero(), T::max);
        mh + mj
    }

    /// Adjacency lists: for each spin, its `(neighbor, J)` pairs.
    pub fn neighbors(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.n_spins];
        for (&(u, v), &c) in &self.j {
            adj[u].push((v, c));
            adj[v].push((u, c));
        }
        adj
    }

    /// Dense field vector.
    pub fn fields(&self) -> Vec<T> {
        let mut f = vec![T::zero(); self.n_spins];
        for (&v, &c) in &self.h {
            f[v] = c;
        }
        f
    }
}

/// Bit 1 is spin +1, bit 0 is spin −1.
pub fn spins_from_bits(bits: &[bool]) -> Vec<i8> {
    bits.iter().map(|&b| if b { 1 } else { -1 }).collect()
}

pub fn bits_from_spins(spins: &[i8]) -> Vec<bool> {
    spins.iter().map(|&s| s > 0).collect()
}
