//! Sequential nearest-rider baseline.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{Assignment, Instance};
use crate::num::Real;
use crate::solution::SolveResult;

/// Orders in index order, each to the closest rider (by pickup distance) that
/// still has load and capacity room. Ties go to the lowest rider index.
pub fn greedy_assignment<T: Real>(inst: &Instance<T>) -> Result<Assignment> {
    let m = inst.num_riders();
    let mut load = vec![0u32; m];
    let mut room: Vec<u32> = inst.riders.iter().map(|r| r.capacity).collect();
    let mut x = Assignment::for_instance(inst);
    for (j, order) in inst.orders.iter().enumerate() {
        let mut best: Option<(usize, T)> = None;
        for i in 0..m {
            if load[i] >= inst.max_load || room[i] < order.size {
                continue;
            }
            let d = inst.costs.pickup_dist.get(i, j);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.ok_or(Error::Infeasible { order: j })?;
        load[i] += 1;
        room[i] -= order.size;
        x.set(i, j, true);
    }
    Ok(x)
}

pub fn solve_greedy<T: Real>(inst: &Instance<T>) -> Result<SolveResult<T>> {
    let start = Instant::now();
    let x = greedy_assignment(inst)?;
    Ok(SolveResult::from_assignment(&x, start.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instgen::{generate, GenConfig};
    use crate::model::check_hard;
    use crate::model::tests::blank;

    fn with_dist(rows: &[[f64; 2]; 2]) -> Instance<f64> {
        let mut inst = blank(2);
        for i in 0..2 {
            for j in 0..2 {
                inst.costs.pickup_dist.set(i, j, rows[i][j]);
            }
        }
        inst
    }

    #[test]
    fn nearest_rider_wins() {
        let inst = with_dist(&[[1.0, 5.0], [4.0, 2.0]]);
        assert_eq!(greedy_assignment(&inst).unwrap(), Assignment::identity(2));
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let inst = with_dist(&[[3.0, 3.0], [3.0, 3.0]]);
        assert_eq!(greedy_assignment(&inst).unwrap(), Assignment::from_rider_of(2, &[0, 0]));
    }

    #[test]
    fn full_rider_is_skipped() {
        let mut inst = blank(3);
        inst.max_load = 1;
        for j in 0..3 {
            inst.costs.pickup_dist.set(0, j, 1.0);
            inst.costs.pickup_dist.set(1, j, 2.0);
            inst.costs.pickup_dist.set(2, j, 3.0);
        }
        assert_eq!(greedy_assignment(&inst).unwrap(), Assignment::from_rider_of(3, &[0, 1, 2]));
    }

    #[test]
    fn capacity_filter() {
        let mut inst = with_dist(&[[1.0, 1.0], [2.0, 2.0]]);
        inst.riders[0].capacity = 2;
        inst.orders[0].size = 2;
        inst.orders[1].size = 1;
        assert_eq!(greedy_assignment(&inst).unwrap(), Assignment::from_rider_of(2, &[0, 1]));
    }

    #[test]
    fn no_room_is_an_error() {
        let mut inst = blank(2);
        inst.max_load = 1;
        inst.riders[1].capacity = 1;
        inst.orders[0].size = 1;
        inst.orders[1].size = 3;
        inst.riders[0].capacity = 3;
        // Order 0 takes rider 0 (tie), order 1 then fits nobody.
        assert!(matches!(greedy_assignment(&inst), Err(Error::Infeasible { order: 1 })));
    }

    #[test]
    fn generated_instances_are_always_feasible() {
        for size in [1, 2, 3, 4, 10, 20] {
            for seed in 0..40 {
                let inst = generate::<f64>(&GenConfig::new(size, seed)).unwrap();
                let x = greedy_assignment(&inst).unwrap();
                assert!(check_hard(&inst, &x).unwrap().is_hard_feasible());
            }
        }
    }

    #[test]
    fn relabeling_riders_relabels_solution() {
        for seed in 0..10 {
            let inst = generate::<f64>(&GenConfig::new(6, seed)).unwrap();
            let perm = [3, 5, 0, 1, 4, 2];
            let x = greedy_assignment(&inst).unwrap();
            let y = greedy_assignment(&inst.permute_riders(&perm)).unwrap();
            assert_eq!(y, x.permute_riders(&perm));
        }
    }
}
