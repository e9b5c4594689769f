//! Depth-first branch and bound over order-to-rider choices.
//!
//! Each level fixes one order. A node is pruned when the cost so far plus,
//! for every unfixed order, its cheapest admissible incremental cost exceeds
//! the incumbent. The fairness term is exact: moving rider `i` from load `l`
//! to `l + 1` adds `δ·(2·(CO_i + l) + 1)`, and that increment only grows with
//! load, so the current increment is a valid lower bound for later ones.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{penalized_objective, Assignment, Instance, PenalizedCosts, SoftWeights};
use crate::num::Real;
use crate::solution::SolveResult;

#[derive(Clone, Debug)]
pub struct ExactSolution<T: Real> {
    pub result: SolveResult<T>,
    pub assignment: Assignment,
    /// Penalized objective of `assignment`.
    pub objective: T,
    /// Valid lower bound on the optimum; equals `objective` when `optimal`.
    pub lower_bound: T,
    pub optimal: bool,
    pub nodes: u64,
    /// Incumbent objective each time it improved.
    pub incumbent_trace: Vec<T>,
}

impl<T: Real> ExactSolution<T> {
    /// `(objective − lower_bound) / |objective|`.
    pub fn gap(&self) -> T {
        let denom = self.objective.abs().max(T::min_positive_value());
        (self.objective - self.lower_bound).max(T::zero()) / denom
    }
}

struct Search<'a, T: Real> {
    inst: &'a Instance<T>,
    soft: SoftWeights<T>,
    costs: PenalizedCosts<T>,
    /// Branching order over orders.
    seq: Vec<usize>,
    load: Vec<u32>,
    room: Vec<u32>,
    rider_of: Vec<usize>,
    best: Option<(T, Vec<usize>)>,
    trace: Vec<T>,
    open_bound: T,
    deadline: Instant,
    aborted: bool,
    nodes: u64,
}

impl<T: Real> Search<'_, T> {
    fn admissible(&self, i: usize, j: usize) -> bool {
        self.load[i] < self.inst.max_load && self.room[i] >= self.inst.orders[j].size
    }

    /// Incremental cost of giving order `j` to rider `i` now.
    fn increment(&self, i: usize, j: usize) -> T {
        let co = f64::from(self.inst.riders[i].completed_orders + self.load[i]);
        self.costs.get(i, j) + self.inst.weights.delta * T::lit(2.0 * co + 1.0)
    }

    fn bound(&self, depth: usize, cost: T) -> T {
        let mut b = cost;
        for &j in &self.seq[depth..] {
            let cheapest = (0..self.inst.num_riders())
                .filter(|&i| self.admissible(i, j))
                .map(|i| self.increment(i, j))
                .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))));
            match cheapest {
                Some(c) => b += c,
                None => return T::infinity(),
            }
        }
        b
    }

    fn incumbent(&self) -> T {
        self.best.as_ref().map_or(T::infinity(), |(v, _)| *v)
    }

    /// Pruning threshold. Near-ties are still explored so the final pick is
    /// made on recomputed objectives, not on accumulated increments.
    fn threshold(&self) -> T {
        let inc = self.incumbent();
        inc + T::lit(1e-9) * inc.abs().max(T::one())
    }

    fn place(&mut self, i: usize, j: usize) {
        self.load[i] += 1;
        self.room[i] -= self.inst.orders[j].size;
        self.rider_of[j] = i;
    }

    fn unplace(&mut self, i: usize, j: usize) {
        self.load[i] -= 1;
        self.room[i] += self.inst.orders[j].size;
    }

    fn leaf(&mut self) {
        let x = Assignment::from_rider_of(self.inst.num_riders(), &self.rider_of);
        let value = penalized_objective(self.inst, &x, self.soft).expect("dimensions fixed by construction");
        if value < self.incumbent() {
            self.trace.push(value);
            self.best = Some((value, self.rider_of.clone()));
        }
    }

    fn dfs(&mut self, depth: usize, cost: T) {
        self.nodes += 1;
        if self.nodes % 256 == 0 && self.best.is_some() && Instant::now() >= self.deadline {
            self.aborted = true;
        }
        if self.aborted {
            self.open_bound = self.open_bound.min(self.bound(depth, cost));
            return;
        }
        if depth == self.seq.len() {
            self.leaf();
            return;
        }
        let j = self.seq[depth];
        let mut children: Vec<(usize, T)> = (0..self.inst.num_riders())
            .filter(|&i| self.admissible(i, j))
            .map(|i| (i, self.increment(i, j)))
            .collect();
        children.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
        for (i, inc) in children {
            self.place(i, j);
            let child_cost = cost + inc;
            let b = self.bound(depth + 1, child_cost);
            if self.aborted {
                self.open_bound = self.open_bound.min(b);
            } else if b <= self.threshold() {
                self.dfs(depth + 1, child_cost);
            }
            self.unplace(i, j);
        }
    }
}

/// Branch order: largest gap between the two cheapest riders first.
fn branching_order<T: Real>(costs: &PenalizedCosts<T>, m: usize, n: usize) -> Vec<usize> {
    let spread = |j: usize| {
        let mut col: Vec<T> = (0..m).map(|i| costs.get(i, j)).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        if col.len() < 2 {
            T::zero()
        } else {
            col[1] - col[0]
        }
    };
    let mut seq: Vec<(usize, T)> = (0..n).map(|j| (j, spread(j))).collect();
    seq.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    seq.into_iter().map(|(j, _)| j).collect()
}

/// Minimizes the penalized objective subject to the hard constraints.
///
/// Stops at `time_limit` once an incumbent exists; the result then carries
/// the best assignment found, a lower bound and `optimal == false`.
pub fn solve_exact<T: Real>(
    inst: &Instance<T>,
    soft: SoftWeights<T>,
    time_limit: Duration,
) -> Result<ExactSolution<T>> {
    let start = Instant::now();
    let (m, n) = (inst.num_riders(), inst.num_orders());
    let costs = PenalizedCosts::new(inst, soft);
    let seq = branching_order(&costs, m, n);
    let mut search = Search {
        inst,
        soft,
        costs,
        seq,
        load: vec![0; m],
        room: inst.riders.iter().map(|r| r.capacity).collect(),
        rider_of: vec![0; n],
        best: None,
        trace: Vec::new(),
        open_bound: T::infinity(),
        deadline: start + time_limit,
        aborted: false,
        nodes: 0,
    };
    search.dfs(0, T::zero());

    let (objective, rider_of) = search.best.take().ok_or(Error::NoFeasibleAssignment)?;
    let assignment = Assignment::from_rider_of(m, &rider_of);
    let optimal = !search.aborted;
    let lower_bound = if optimal { objective } else { objective.min(search.open_bound) };
    Ok(ExactSolution {
        result: SolveResult::from_assignment(&assignment, start.elapsed()),
        assignment,
        objective,
        lower_bound,
        optimal,
        nodes: search.nodes,
        incumbent_trace: search.trace,
    })
}
