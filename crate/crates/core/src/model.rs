//! Domain types for one dispatch batch and the evaluation of the assignment
//! objective and its hard and soft constraints.
//!
//! Notation used in comments: rider `i` in `0..m`, order `j` in `0..n`,
//! `x[i][j] = 1` when rider `i` carries order `j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Dense row-major matrix. Serialized as an array of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
#[serde(bound = "")]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::dim(format!("{c} columns"), format!("row of {}", bad.len())));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn max(&self) -> Option<T> {
        crate::num::max_of(self.data.iter().copied())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn permute_rows(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(perm[i], j))
    }
}

impl<T: Real> TryFrom<Vec<Vec<T>>> for Matrix<T> {
    type Error = Error;

    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl<T: Real> From<Matrix<T>> for Vec<Vec<T>> {
    fn from(m: Matrix<T>) -> Self {
        if m.cols == 0 {
            return vec![Vec::new(); m.rows];
        }
        m.data.chunks(m.cols).map(<[T]>::to_vec).collect()
    }
}

/// Latitude/longitude in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rider {
    pub id: usize,
    #[serde(flatten)]
    pub location: GeoPoint,
    /// Size capacity in size units.
    pub capacity: u32,
    /// Orders delivered before the current batch.
    pub completed_orders: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Order<T: Real> {
    pub id: usize,
    pub pickup: GeoPoint,
    pub dropoff: GeoPoint,
    pub size: u32,
    pub prepare_time: T,
    /// Delivery promise, measured from order placement.
    pub promised_time: T,
}

/// Per rider-order pair data, each matrix `m x n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PairCosts<T: Real> {
    /// Rider to pickup distance.
    pub pickup_dist: Matrix<T>,
    /// Rider to pickup travel time.
    pub pickup_time: Matrix<T>,
    /// Pickup to dropoff travel time. Also serves as the delivery-time cost term.
    pub deliver_time: Matrix<T>,
    /// Gap between rider arrival and food readiness, in either direction.
    pub wait_time: Matrix<T>,
}

impl<T: Real> PairCosts<T> {
    fn matrices(&self) -> [&Matrix<T>; 4] {
        [&self.pickup_dist, &self.pickup_time, &self.deliver_time, &self.wait_time]
    }
}

/// Objective weights: distance, delivery time, wait time, fairness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Weights<T: Real> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Real> Default for Weights<T> {
    fn default() -> Self {
        Self {
            alpha: T::one(),
            beta: T::one(),
            gamma: T::one(),
            delta: T::lit(0.1),
        }
    }
}

/// Multipliers applied to geofence and SLA excess wherever soft constraints
/// are priced into a cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SoftWeights<T: Real> {
    pub geofence: T,
    pub sla: T,
}

impl<T: Real> Default for SoftWeights<T> {
    fn default() -> Self {
        Self {
            geofence: T::one(),
            sla: T::one(),
        }
    }
}

/// One batch: `m` riders, `n` orders and everything needed to price an assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Instance<T: Real> {
    pub riders: Vec<Rider>,
    pub orders: Vec<Order<T>>,
    pub costs: PairCosts<T>,
    /// Preferred maximum pickup distance.
    pub geofence: T,
    /// Maximum number of orders per rider.
    pub max_load: u32,
    pub weights: Weights<T>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub size: usize,
}

impl<T: Real> Instance<T> {
    #[inline]
    pub fn num_riders(&self) -> usize {
        self.riders.len()
    }

    #[inline]
    pub fn num_orders(&self) -> usize {
        self.orders.len()
    }

    /// `max{RT^p, PT} + RT^d`: time from placement until delivery if rider `i` takes order `j`.
    #[inline]
    pub fn delivery_eta(&self, i: usize, j: usize) -> T {
        self.costs.pickup_time.get(i, j).max(self.orders[j].prepare_time)
            + self.costs.deliver_time.get(i, j)
    }

    /// Unpenalized per-pair cost `α·RD + β·RT^d + γ·WT`.
    #[inline]
    pub fn pair_cost(&self, i: usize, j: usize) -> T {
        let w = &self.weights;
        w.alpha * self.costs.pickup_dist.get(i, j)
            + w.beta * self.costs.deliver_time.get(i, j)
            + w.gamma * self.costs.wait_time.get(i, j)
    }

    /// Checks every structural invariant of the batch.
    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.num_riders(), self.num_orders());
        if m != n {
            return Err(Error::InvalidInput(format!(
                "batches must have as many riders as orders ({m} riders, {n} orders)"
            )));
        }
        for (name, mat) in ["pickup_dist", "pickup_time", "deliver_time", "wait_time"]
            .iter()
            .zip(self.costs.matrices())
        {
            if mat.rows() != m || mat.cols() != n {
                return Err(Error::dim(
                    format!("{name} {m}x{n}"),
                    format!("{}x{}", mat.rows(), mat.cols()),
                ));
            }
            if mat.as_slice().iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} has negative or non-finite entries")));
            }
        }
        if self.max_load < 1 {
            return Err(Error::InvalidInput("max_load must be at least 1".into()));
        }
        if !(self.geofence >= T::zero()) {
            return Err(Error::InvalidInput("geofence must be non-negative".into()));
        }
        let w = &self.weights;
        if [w.alpha, w.beta, w.gamma, w.delta].iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::InvalidInput("objective weights must be non-negative".into()));
        }
        if let Some(r) = self.riders.iter().find(|r| r.capacity < 1) {
            return Err(Error::InvalidInput(format!("rider {} has zero capacity", r.id)));
        }
        let max_cap = self.riders.iter().map(|r| r.capacity).max().unwrap_or(0);
        for o in &self.orders {
            if o.size < 1 {
                return Err(Error::InvalidInput(format!("order {} has zero size", o.id)));
            }
            if !(o.prepare_time >= T::zero()) || !(o.promised_time > o.prepare_time) {
                return Err(Error::InvalidInput(format!(
                    "order {} needs 0 <= prepare_time < promised_time",
                    o.id
                )));
            }
            if o.size > max_cap {
                return Err(Error::InvalidInput(format!("order {} fits no rider", o.id)));
            }
        }
        Ok(())
    }

    /// Parses and validates an instance document.
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Relabels riders so that new rider `i` is old rider `perm[i]`.
    pub fn permute_riders(&self, perm: &[usize]) -> Self {
        let c = &self.costs;
        Self {
            riders: perm.iter().map(|&p| self.riders[p].clone()).collect(),
            orders: self.orders.clone(),
            costs: PairCosts {
                pickup_dist: c.pickup_dist.permute_rows(perm),
                pickup_time: c.pickup_time.permute_rows(perm),
                deliver_time: c.deliver_time.permute_rows(perm),
                wait_time: c.wait_time.permute_rows(perm),
            },
            ..self.clone()
        }
    }
}

/// Binary `m x n` decision matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct Assignment {
    riders: usize,
    orders: usize,
    bits: Vec<bool>,
}

impl Assignment {
    pub fn empty(riders: usize, orders: usize) -> Self {
        Self {
            riders,
            orders,
            bits: vec![false; riders * orders],
        }
    }

    pub fn for_instance<T: Real>(inst: &Instance<T>) -> Self {
        Self::empty(inst.num_riders(), inst.num_orders())
    }

    /// Builds from a flat row-major block (`i * orders + j`).
    pub fn from_flat(riders: usize, orders: usize, bits: &[bool]) -> Result<Self> {
        if bits.len() != riders * orders {
            return Err(Error::dim(riders * orders, bits.len()));
        }
        Ok(Self {
            riders,
            orders,
            bits: bits.to_vec(),
        })
    }

    /// Assignment from `rider_of[j]` (the rider serving order `j`).
    pub fn from_rider_of(riders: usize, rider_of: &[usize]) -> Self {
        let mut x = Self::empty(riders, rider_of.len());
        for (j, &i) in rider_of.iter().enumerate() {
            x.set(i, j, true);
        }
        x
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rider_of(n, &(0..n).collect::<Vec<_>>())
    }

    #[inline]
    pub fn num_riders(&self) -> usize {
        self.riders
    }

    #[inline]
    pub fn num_orders(&self) -> usize {
        self.orders
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.orders + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.orders + j] = v;
    }

    pub fn as_flat(&self) -> &[bool] {
        &self.bits
    }

    /// Number of orders carried by rider `i`.
    pub fn load(&self, i: usize) -> usize {
        self.bits[i * self.orders..(i + 1) * self.orders]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    /// Number of riders carrying order `j`.
    pub fn order_count(&self, j: usize) -> usize {
        (0..self.riders).filter(|&i| self.get(i, j)).count()
    }

    /// Set pairs `(i, j)` in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| (k / self.orders, k % self.orders))
    }

    pub fn permute_riders(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.riders, self.orders);
        for (new_i, &old_i) in perm.iter().enumerate() {
            for j in 0..self.orders {
                out.set(new_i, j, self.get(old_i, j));
            }
        }
        out
    }

    fn check_dims<T: Real>(&self, inst: &Instance<T>) -> Result<()> {
        let (m, n) = (inst.num_riders(), inst.num_orders());
        if self.riders != m || self.orders != n {
            return Err(Error::dim(
                format!("{m}x{n} assignment"),
                format!("{}x{}", self.riders, self.orders),
            ));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<u8>>> for Assignment {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        let riders = rows.len();
        let orders = rows.first().map_or(0, Vec::len);
        let mut bits = Vec::with_capacity(riders * orders);
        for row in &rows {
            if row.len() != orders {
                return Err(Error::dim(orders, row.len()));
            }
            for &v in row {
                match v {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    _ => return Err(Error::InvalidInput(format!("assignment entry {v} is not 0/1"))),
                }
            }
        }
        Ok(Self { riders, orders, bits })
    }
}

impl From<Assignment> for Vec<Vec<u8>> {
    fn from(x: Assignment) -> Self {
        (0..x.riders)
            .map(|i| (0..x.orders).map(|j| u8::from(x.get(i, j))).collect())
            .collect()
    }
}

/// Everything wrong with an assignment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub unassigned_orders: Vec<usize>,
    /// `(order, number of riders carrying it)` for orders carried more than once.
    pub multi_assigned_orders: Vec<(usize, usize)>,
    pub overloaded_riders: Vec<usize>,
    pub overcapacity_riders: Vec<usize>,
    pub gf_violations: usize,
    pub sla_violations: usize,
}

impl ViolationReport {
    pub fn is_hard_feasible(&self) -> bool {
        self.unassigned_orders.is_empty()
            && self.multi_assigned_orders.is_empty()
            && self.overloaded_riders.is_empty()
            && self.overcapacity_riders.is_empty()
    }

    /// Number of violated hard constraints.
    pub fn hard_count(&self) -> usize {
        self.unassigned_orders.len()
            + self.multi_assigned_orders.len()
            + self.overloaded_riders.len()
            + self.overcapacity_riders.len()
    }

    /// Human-readable name of the first violated hard constraint.
    pub fn first_hard_violation(&self) -> Option<String> {
        if let Some(j) = self.unassigned_orders.first() {
            return Some(format!("order assignment (order {j} unassigned)"));
        }
        if let Some((j, c)) = self.multi_assigned_orders.first() {
            return Some(format!("order assignment (order {j} carried by {c} riders)"));
        }
        if let Some(i) = self.overloaded_riders.first() {
            return Some(format!("rider load (rider {i})"));
        }
        self.overcapacity_riders
            .first()
            .map(|i| format!("rider capacity (rider {i})"))
    }
}

/// Four-term objective: distance, delivery time, wait time and fairness. No constraint terms.
pub fn evaluate_objective<T: Real>(inst: &Instance<T>, x: &Assignment) -> Result<T> {
    x.check_dims(inst)?;
    let w = &inst.weights;
    let (mut dist, mut deliver, mut wait) = (T::zero(), T::zero(), T::zero());
    for (i, j) in x.pairs() {
        dist += inst.costs.pickup_dist.get(i, j);
        deliver += inst.costs.deliver_time.get(i, j);
        wait += inst.costs.wait_time.get(i, j);
    }
    let fairness: T = inst
        .riders
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let c = T::lit(f64::from(r.completed_orders)) + T::from_usize_lossy(x.load(i));
            c * c
        })
        .sum();
    Ok(w.alpha * dist + w.beta * deliver + w.gamma * wait + w.delta * fairness)
}

/// Order-assignment, load and capacity violations. Soft counts are left at zero.
pub fn check_hard<T: Real>(inst: &Instance<T>, x: &Assignment) -> Result<ViolationReport> {
    x.check_dims(inst)?;
    let mut rep = ViolationReport::default();
    for j in 0..inst.num_orders() {
        match x.order_count(j) {
            0 => rep.unassigned_orders.push(j),
            1 => {}
            c => rep.multi_assigned_orders.push((j, c)),
        }
    }
    for (i, rider) in inst.riders.iter().enumerate() {
        if x.load(i) > inst.max_load as usize {
            rep.overloaded_riders.push(i);
        }
        let used: u64 = (0..inst.num_orders())
            .filter(|&j| x.get(i, j))
            .map(|j| u64::from(inst.orders[j].size))
            .sum();
        if used > u64::from(rider.capacity) {
            rep.overcapacity_riders.push(i);
        }
    }
    Ok(rep)
}

/// Hard violations plus soft violation counts.
pub fn check_all<T: Real>(inst: &Instance<T>, x: &Assignment) -> Result<ViolationReport> {
    let mut rep = check_hard(inst, x)?;
    let (gf, sla) = count_soft_violations(inst, x)?;
    rep.gf_violations = gf;
    rep.sla_violations = sla;
    Ok(rep)
}

/// Amount by which each pair would exceed its soft bound, zero where it holds.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftExcess<T: Real> {
    /// `max{RD^p - GF, 0}`
    pub geofence: Matrix<T>,
    /// `max{max{RT^p, PT} + RT^d - PR, 0}`
    pub sla: Matrix<T>,
}

pub fn soft_excess<T: Real>(inst: &Instance<T>) -> SoftExcess<T> {
    let (m, n) = (inst.num_riders(), inst.num_orders());
    let zero = T::zero();
    SoftExcess {
        geofence: Matrix::from_fn(m, n, |i, j| (inst.costs.pickup_dist.get(i, j) - inst.geofence).max(zero)),
        sla: Matrix::from_fn(m, n, |i, j| (inst.delivery_eta(i, j) - inst.orders[j].promised_time).max(zero)),
    }
}

/// `(geofence, sla)` violation counts among the assigned pairs.
pub fn count_soft_violations<T: Real>(inst: &Instance<T>, x: &Assignment) -> Result<(usize, usize)> {
    x.check_dims(inst)?;
    let ex = soft_excess(inst);
    let mut counts = (0, 0);
    for (i, j) in x.pairs() {
        if ex.geofence.get(i, j) > T::zero() {
            counts.0 += 1;
        }
        if ex.sla.get(i, j) > T::zero() {
            counts.1 += 1;
        }
    }
    Ok(counts)
}

/// `λ_GF·Σ gf_excess·x + λ_P·Σ sla_excess·x`.
pub fn soft_penalty<T: Real>(inst: &Instance<T>, x: &Assignment, soft: SoftWeights<T>) -> Result<T> {
    x.check_dims(inst)?;
    let ex = soft_excess(inst);
    Ok(x.pairs()
        .map(|(i, j)| soft.geofence * ex.geofence.get(i, j) + soft.sla * ex.sla.get(i, j))
        .sum())
}

/// The common yardstick every solver is compared on: objective plus priced soft excess.
pub fn penalized_objective<T: Real>(inst: &Instance<T>, x: &Assignment, soft: SoftWeights<T>) -> Result<T> {
    Ok(evaluate_objective(inst, x)? + soft_penalty(inst, x, soft)?)
}

/// Per-pair cost with soft excess priced in, `m x n`. Shared by the exact solver and repair.
#[derive(Clone, Debug)]
pub struct PenalizedCosts<T: Real> {
    costs: Matrix<T>,
}

impl<T: Real> PenalizedCosts<T> {
    pub fn new(inst: &Instance<T>, soft: SoftWeights<T>) -> Self {
        let ex = soft_excess(inst);
        let costs = Matrix::from_fn(inst.num_riders(), inst.num_orders(), |i, j| {
            inst.pair_cost(i, j) + soft.geofence * ex.geofence.get(i, j) + soft.sla * ex.sla.get(i, j)
        });
        Self { costs }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.costs.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.costs
    }
}
