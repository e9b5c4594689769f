//! Penalty reduction of the constrained problem to a QUBO, and its Ising form.
//!
//! Energy of a bitstring `b` over `N` variables:
//!
//! ```text
//! offset + Σ_v linear[v]·b_v + Σ_{u<v} quadratic[(u,v)]·b_u·b_v
//! ```
//!
//! The objective terms enter as written. Order assignment is penalized as
//! `λ_A·(Σ_i x_ij − 1)²`, load and capacity inequalities through bounded
//! slack integers as `λ·(g(x) + s)²`, and the two soft constraints as linear
//! `λ·excess·x` terms.

mod ising;
mod slack;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ising::{bits_from_spins, spins_from_bits, IsingModel};
pub use slack::{bounded_place_values, SlackGroup, VarLayout};

use crate::error::{Error, Result};
use crate::model::{check_hard, soft_excess, Assignment, Instance, PenalizedCosts, SoftWeights};
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PenaltyWeights<T: Real> {
    /// Order assignment.
    pub lambda_a: T,
    /// Rider load.
    pub lambda_l: T,
    /// Rider capacity.
    pub lambda_cap: T,
    /// Geofence excess.
    pub lambda_gf: T,
    /// SLA excess.
    pub lambda_p: T,
}

impl<T: Real> PenaltyWeights<T> {
    pub fn soft(&self) -> SoftWeights<T> {
        SoftWeights {
            geofence: self.lambda_gf,
            sla: self.lambda_p,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [self.lambda_a, self.lambda_l, self.lambda_cap, self.lambda_gf, self.lambda_p];
        if all.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidInput("penalty weights must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Sum over orders of the worst penalized pair cost plus the largest
/// fairness term a load-feasible assignment can reach.
pub fn objective_spread_bound<T: Real>(inst: &Instance<T>, soft: SoftWeights<T>) -> T {
    let costs = PenalizedCosts::new(inst, soft);
    let per_order: T = (0..inst.num_orders())
        .map(|j| {
            (0..inst.num_riders())
                .map(|i| costs.get(i, j))
                .fold(T::zero(), T::max)
        })
        .sum();
    let top_load = T::from_usize_lossy((inst.max_load as usize).min(inst.num_orders()));
    let fairness: T = inst
        .riders
        .iter()
        .map(|r| {
            let c = T::lit(f64::from(r.completed_orders)) + top_load;
            c * c
        })
        .sum();
    per_order + inst.weights.delta * fairness
}

/// Hard multipliers at twice the objective spread bound, soft multipliers at 1.
pub fn default_penalties<T: Real>(inst: &Instance<T>) -> PenaltyWeights<T> {
    let soft = SoftWeights::default();
    let bound = objective_spread_bound(inst, soft);
    let bound = if bound > T::zero() { bound } else { T::one() };
    let hard = T::lit(2.0) * bound;
    PenaltyWeights {
        lambda_a: hard,
        lambda_l: hard,
        lambda_cap: hard,
        lambda_gf: soft.geofence,
        lambda_p: soft.sla,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuboModel<T: Real> {
    pub n_vars: usize,
    pub linear: BTreeMap<usize, T>,
    /// Keys satisfy `u < v`.
    pub quadratic: BTreeMap<(usize, usize), T>,
    pub offset: T,
    pub layout: VarLayout,
}

impl<T: Real> QuboModel<T> {
    /// A model with no terms over the given layout.
    pub fn empty(layout: VarLayout) -> Self {
        Self {
            n_vars: layout.total_bits,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: T::zero(),
            layout,
        }
    }

    pub fn add_offset(&mut self, c: T) {
        self.offset += c;
    }

    pub fn add_linear(&mut self, v: usize, c: T) {
        *self.linear.entry(v).or_insert_with(T::zero) += c;
    }

    /// Adds `c·b_u·b_v`; `u == v` folds into the linear term since `b² = b`.
    pub fn add_quadratic(&mut self, u: usize, v: usize, c: T) {
        match u.cmp(&v) {
            std::cmp::Ordering::Equal => self.add_linear(u, c),
            std::cmp::Ordering::Less => *self.quadratic.entry((u, v)).or_insert_with(T::zero) += c,
            std::cmp::Ordering::Greater => *self.quadratic.entry((v, u)).or_insert_with(T::zero) += c,
        }
    }

    /// Adds `weight·(Σ a_v·b_v + constant)²`, expanded with `b² = b`.
    pub fn add_squared(&mut self, terms: &[(usize, T)], constant: T, weight: T) {
        if weight == T::zero() {
            return;
        }
        let two = T::lit(2.0);
        self.add_offset(weight * constant * constant);
        for (k, &(u, a)) in terms.iter().enumerate() {
            self.add_linear(u, weight * (a * a + two * a * constant));
            for &(v, b) in &terms[k + 1..] {
                self.add_quadratic(u, v, weight * two * a * b);
            }
        }
    }

    fn prune(&mut self) {
        self.linear.retain(|_, c| *c != T::zero());
        self.quadratic.retain(|_, c| *c != T::zero());
    }

    pub fn energy(&self, bits: &[bool]) -> Result<T> {
        if bits.len() != self.n_vars {
            return Err(Error::dim(self.n_vars, bits.len()));
        }
        Ok(self.energy_unchecked(|v| bits[v]))
    }

    /// Energy of basis state `index`, variable `v` being bit `v` of the index.
    pub fn energy_of_index(&self, index: u64) -> T {
        self.energy_unchecked(|v| (index >> v) & 1 == 1)
    }

    fn energy_unchecked(&self, bit: impl Fn(usize) -> bool) -> T {
        let mut e = self.offset;
        for (&v, &c) in &self.linear {
            if bit(v) {
                e += c;
            }
        }
        for (&(u, v), &c) in &self.quadratic {
            if bit(u) && bit(v) {
                e += c;
            }
        }
        e
    }

    /// Energies of all `2^N` basis states, indexed as in [`Self::energy_of_index`].
    pub fn diagonal(&self, qubit_limit: usize) -> Result<Vec<T>> {
        if self.n_vars > qubit_limit || self.n_vars >= 63 {
            return Err(Error::QubitLimit {
                qubits: self.n_vars,
                limit: qubit_limit,
            });
        }
        Ok((0..1u64 << self.n_vars).map(|b| self.energy_of_index(b)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&QuboDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: QuboDoc<T> = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Interchange form: `{n_vars, linear: [[i, c]], quadratic: [[i, j, c]], offset, layout}`.
#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct QuboDoc<T: Real> {
    n_vars: usize,
    linear: Vec<(usize, T)>,
    quadratic: Vec<(usize, usize, T)>,
    offset: T,
    layout: VarLayout,
}

impl<T: Real> From<&QuboModel<T>> for QuboDoc<T> {
    fn from(q: &QuboModel<T>) -> Self {
        Self {
            n_vars: q.n_vars,
            linear: q.linear.iter().map(|(&v, &c)| (v, c)).collect(),
            quadratic: q.quadratic.iter().map(|(&(u, v), &c)| (u, v, c)).collect(),
            offset: q.offset,
            layout: q.layout.clone(),
        }
    }
}

impl<T: Real> TryFrom<QuboDoc<T>> for QuboModel<T> {
    type Error = Error;

    fn try_from(doc: QuboDoc<T>) -> Result<Self> {
        doc.layout.validate()?;
        if doc.layout.total_bits != doc.n_vars {
            return Err(Error::dim(doc.layout.total_bits, doc.n_vars));
        }
        let mut q = QuboModel::empty(doc.layout);
        q.offset = doc.offset;
        for (v, c) in doc.linear {
            if v >= q.n_vars {
                return Err(Error::InvalidInput(format!("linear index {v} out of range")));
            }
            q.add_linear(v, c);
        }
        for (u, v, c) in doc.quadratic {
            if u >= v || v >= q.n_vars {
                return Err(Error::InvalidInput(format!("quadratic key ({u}, {v}) is not u < v < n_vars")));
            }
            q.add_quadratic(u, v, c);
        }
        q.prune();
        Ok(q)
    }
}

/// Compiles the penalized energy. With `drop_assignment_penalty` the order
/// assignment term is left out, for ansätze that enforce it structurally.
pub fn build_qubo<T: Real>(
    inst: &Instance<T>,
    pen: &PenaltyWeights<T>,
    drop_assignment_penalty: bool,
) -> Result<QuboModel<T>> {
    pen.validate()?;
    let layout = VarLayout::new(inst);
    let (m, n) = (inst.num_riders(), inst.num_orders());
    let mut q = QuboModel::empty(layout.clone());
    let ex = soft_excess(inst);
    let one = T::one();

    for i in 0..m {
        for j in 0..n {
            let c = inst.pair_cost(i, j) + pen.lambda_gf * ex.geofence.get(i, j) + pen.lambda_p * ex.sla.get(i, j);
            q.add_linear(layout.x(i, j), c);
        }
    }

    // δ·(CO_i + Σ_j x_ij)²
    for (i, rider) in inst.riders.iter().enumerate() {
        let row: Vec<(usize, T)> = (0..n).map(|j| (layout.x(i, j), one)).collect();
        q.add_squared(&row, T::lit(f64::from(rider.completed_orders)), inst.weights.delta);
    }

    if !drop_assignment_penalty {
        for j in 0..n {
            let col: Vec<(usize, T)> = (0..m).map(|i| (layout.x(i, j), one)).collect();
            q.add_squared(&col, -one, pen.lambda_a);
        }
    }

    for i in 0..m {
        let mut load: Vec<(usize, T)> = (0..n).map(|j| (layout.x(i, j), one)).collect();
        load.extend(layout.load_slack[i].vars().map(|(v, p)| (v, T::lit(f64::from(p)))));
        q.add_squared(&load, -T::lit(f64::from(inst.max_load)), pen.lambda_l);

        let mut cap: Vec<(usize, T)> = (0..n)
            .map(|j| (layout.x(i, j), T::lit(f64::from(inst.orders[j].size))))
            .collect();
        cap.extend(layout.capacity_slack[i].vars().map(|(v, p)| (v, T::lit(f64::from(p)))));
        q.add_squared(&cap, -T::lit(f64::from(inst.riders[i].capacity)), pen.lambda_cap);
    }

    q.prune();
    Ok(q)
}

/// Full bitstring for a hard-feasible `x`, with every slack set so its
/// squared residual is zero.
pub fn complete_slacks<T: Real>(inst: &Instance<T>, x: &Assignment, layout: &VarLayout) -> Result<Vec<bool>> {
    let rep = check_hard(inst, x)?;
    if let Some(constraint) = rep.first_hard_violation() {
        return Err(Error::HardViolation { constraint });
    }
    if layout.riders != x.num_riders() || layout.orders != x.num_orders() {
        return Err(Error::dim(
            format!("{}x{}", layout.riders, layout.orders),
            format!("{}x{}", x.num_riders(), x.num_orders()),
        ));
    }
    let mut bits = vec![false; layout.total_bits];
    bits[..layout.assignment_bits()].copy_from_slice(x.as_flat());
    for i in 0..layout.riders {
        let load = x.load(i) as u32;
        let used: u32 = (0..layout.orders).filter(|&j| x.get(i, j)).map(|j| inst.orders[j].size).sum();
        for (group, value) in [
            (&layout.load_slack[i], inst.max_load - load),
            (&layout.capacity_slack[i], inst.riders[i].capacity - used),
        ] {
            for (b, bit) in group.encode(value)?.into_iter().enumerate() {
                bits[group.start + b] = bit;
            }
        }
    }
    Ok(bits)
}

/// The assignment block of a bitstring; slack bits are ignored.
pub fn decode(bits: &[bool], layout: &VarLayout) -> Result<Assignment> {
    if bits.len() != layout.total_bits {
        return Err(Error::dim(layout.total_bits, bits.len()));
    }
    Assignment::from_flat(layout.riders, layout.orders, &bits[..layout.assignment_bits()])
}

/// Converts with `b = (1 + s) / 2`; bit 1 is spin +1.
pub fn to_ising<T: Real>(q: &QuboModel<T>) -> IsingModel<T> {
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let mut ising = IsingModel::new(q.n_vars);
    ising.offset = q.offset;
    for (&v, &c) in &q.linear {
        ising.offset += c * half;
        ising.add_field(v, c * half);
    }
    for (&(u, v), &c) in &q.quadratic {
        let k = c * quarter;
        ising.offset += k;
        ising.add_field(u, k);
        ising.add_field(v, k);
        ising.add_coupling(u, v, k);
    }
    ising.prune();
    ising
}
