//! Turns any solver output into a hard-feasible assignment.
//!
//! 1. Orders carried by several riders keep only their cheapest rider.
//! 2. Riders over load or capacity drop their most expensive orders.
//! 3. Unassigned ("hanging") orders are matched to riders with room left:
//!    first every mutually cheapest pair, then greedily by ascending cost.
//!
//! Costs are penalized pair costs, so soft constraints steer the repair too.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_hard, Assignment, Instance, PenalizedCosts, SoftWeights};
use crate::num::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairStats {
    pub multi_trims: usize,
    pub load_trims: usize,
    pub capacity_trims: usize,
    pub mutual_fixes: usize,
    pub greedy_fixes: usize,
    pub changed: bool,
}

struct Residual {
    load: Vec<u32>,
    room: Vec<i64>,
}

impl Residual {
    fn admissible<T: Real>(&self, inst: &Instance<T>, i: usize, j: usize) -> bool {
        self.load[i] > 0 && self.room[i] >= i64::from(inst.orders[j].size)
    }

    fn take<T: Real>(&mut self, inst: &Instance<T>, i: usize, j: usize) {
        self.load[i] -= 1;
        self.room[i] -= i64::from(inst.orders[j].size);
    }
}

/// Cheapest `key` among `candidates`, first index on ties.
fn argmin<T: Real>(candidates: impl Iterator<Item = usize>, key: impl Fn(usize) -> T) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for c in candidates {
        let k = key(c);
        if best.map_or(true, |(_, bk)| k < bk) {
            best = Some((c, k));
        }
    }
    best.map(|(c, _)| c)
}

pub fn repair<T: Real>(inst: &Instance<T>, x: &Assignment, soft: SoftWeights<T>) -> Result<(Assignment, RepairStats)> {
    if check_hard(inst, x)?.is_hard_feasible() {
        return Ok((x.clone(), RepairStats::default()));
    }
    let (m, n) = (inst.num_riders(), inst.num_orders());
    let cost = PenalizedCosts::new(inst, soft);
    let mut x = x.clone();
    let mut stats = RepairStats {
        changed: true,
        ..RepairStats::default()
    };

    for j in 0..n {
        if x.order_count(j) <= 1 {
            continue;
        }
        let keep = argmin((0..m).filter(|&i| x.get(i, j)), |i| cost.get(i, j)).expect("order has riders");
        for i in 0..m {
            if i != keep && x.get(i, j) {
                x.set(i, j, false);
                stats.multi_trims += 1;
            }
        }
    }

    for (i, rider) in inst.riders.iter().enumerate() {
        loop {
            let orders: Vec<usize> = (0..n).filter(|&j| x.get(i, j)).collect();
            let used: u32 = orders.iter().map(|&j| inst.orders[j].size).sum();
            let overloaded = orders.len() > inst.max_load as usize;
            if !overloaded && used <= rider.capacity {
                break;
            }
            // Most expensive, highest index on ties.
            let drop = orders
                .iter()
                .copied()
                .rev()
                .reduce(|a, b| if cost.get(i, b) > cost.get(i, a) { b } else { a })
                .expect("violating rider has orders");
            x.set(i, drop, false);
            if overloaded {
                stats.load_trims += 1;
            } else {
                stats.capacity_trims += 1;
            }
        }
    }

    let mut res = Residual {
        load: (0..m).map(|i| inst.max_load - x.load(i) as u32).collect(),
        room: (0..m)
            .map(|i| {
                let used: u32 = (0..n).filter(|&j| x.get(i, j)).map(|j| inst.orders[j].size).sum();
                i64::from(inst.riders[i].capacity) - i64::from(used)
            })
            .collect(),
    };
    let mut hanging: Vec<usize> = (0..n).filter(|&j| x.order_count(j) == 0).collect();

    'mutual: loop {
        for (pos, &j) in hanging.iter().enumerate() {
            let Some(i) = argmin((0..m).filter(|&i| res.admissible(inst, i, j)), |i| cost.get(i, j)) else {
                continue;
            };
            let favourite = argmin(
                hanging.iter().copied().filter(|&o| res.admissible(inst, i, o)),
                |o| cost.get(i, o),
            );
            if favourite == Some(j) {
                x.set(i, j, true);
                res.take(inst, i, j);
                hanging.remove(pos);
                stats.mutual_fixes += 1;
                continue 'mutual;
            }
        }
        break;
    }

    while !hanging.is_empty() {
        let mut best: Option<(T, usize, usize, usize)> = None;
        for (pos, &j) in hanging.iter().enumerate() {
            for i in 0..m {
                if !res.admissible(inst, i, j) {
                    continue;
                }
                let c = cost.get(i, j);
                let better = match best {
                    None => true,
                    Some((bc, bi, bj, _)) => c < bc || (c == bc && (i, j) < (bi, bj)),
                };
                if better {
                    best = Some((c, i, j, pos));
                }
            }
        }
        let Some((_, i, j, pos)) = best else {
            return Err(Error::Infeasible { order: hanging[0] });
        };
        x.set(i, j, true);
        res.take(inst, i, j);
        hanging.remove(pos);
        stats.greedy_fixes += 1;
    }

    Ok((x, stats))
}
