//! Derivative-free minimization by linear interpolation on a simplex, in the
//! manner of COBYLA without constraints.
//!
//! The `n + 1` simplex vertices define a linear model of `f`. Each iteration
//! steps a distance `rho` from the best vertex down the model gradient. A
//! successful step replaces the vertex farthest from the best one; a failed
//! step first repairs poorly placed vertices and otherwise halves `rho`.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CobylaOptions {
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evals: usize,
}

impl Default for CobylaOptions {
    fn default() -> Self {
        Self {
            rho_begin: 0.5,
            rho_end: 1e-4,
            max_evals: 150,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting, together
/// with `|det a|`. `None` when a pivot falls below `tiny`.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tiny: f64) -> Option<(Vec<f64>, f64)> {
    let n = b.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < tiny {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        det *= a[col][col].abs();
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some((x, det))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Simplex<'f, F> {
    f: &'f mut F,
    pts: Vec<Vec<f64>>,
    vals: Vec<f64>,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Simplex<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn best(&self) -> usize {
        (0..self.vals.len())
            .reduce(|a, b| if self.vals[b] < self.vals[a] { b } else { a })
            .expect("simplex is non-empty")
    }

    fn offsets(&self, best: usize, skip: usize) -> Vec<Vec<f64>> {
        (0..self.pts.len())
            .filter(|&k| k != best && k != skip)
            .map(|k| self.pts[k].iter().zip(&self.pts[best]).map(|(a, b)| a - b).collect())
            .collect()
    }

    fn gradient(&self, best: usize, rho: f64) -> Option<Vec<f64>> {
        let a = self.offsets(best, usize::MAX);
        let b = (0..self.pts.len())
            .filter(|&k| k != best)
            .map(|k| self.vals[k] - self.vals[best])
            .collect();
        solve(a, b, 1e-12 * rho).map(|(g, _)| g)
    }

    fn farthest(&self, best: usize) -> (usize, f64) {
        (0..self.pts.len())
            .filter(|&k| k != best)
            .map(|k| (k, dist(&self.pts[k], &self.pts[best])))
            .fold((best, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc })
    }

    /// Moves vertex `k` to `best ± rho·e_i`, picking the direction that keeps
    /// the simplex volume largest.
    fn reposition(&mut self, best: usize, k: usize, rho: f64) {
        let n = self.pts[best].len();
        let mut rows = self.offsets(best, k);
        let slot = rows.len();
        rows.push(vec![0.0; n]);
        let mut choice = (0, 1.0, -1.0);
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut r = rows.clone();
                r[slot][i] = sign * rho;
                let det = solve(r, vec![0.0; n], 0.0).map_or(0.0, |(_, d)| d);
                if det > choice.2 {
                    choice = (i, sign, det);
                }
            }
        }
        let mut x = self.pts[best].clone();
        x[choice.0] += choice.1 * rho;
        self.vals[k] = self.eval(&x);
        self.pts[k] = x;
    }
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: CobylaOptions) -> Minimum {
    let n = x0.len();
    let mut s = Simplex {
        f: &mut f,
        pts: Vec::with_capacity(n + 1),
        vals: Vec::with_capacity(n + 1),
        evals: 0,
    };
    let mut rho = opts.rho_begin;
    let v0 = s.eval(x0);
    s.pts.push(x0.to_vec());
    s.vals.push(v0);
    for i in 0..n {
        if s.evals >= opts.max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += rho;
        let v = s.eval(&x);
        s.pts.push(x);
        s.vals.push(v);
    }

    while s.pts.len() == n + 1 && s.evals < opts.max_evals && rho >= opts.rho_end {
        let best = s.best();
        let (far, far_dist) = s.farthest(best);
        let Some(g) = s.gradient(best, rho) else {
            s.reposition(best, far, rho);
            continue;
        };
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            rho *= 0.5;
            continue;
        }
        let trial: Vec<f64> = s.pts[best].iter().zip(&g).map(|(x, gi)| x - rho * gi / norm).collect();
        let v = s.eval(&trial);
        if v < s.vals[best] {
            s.pts[far] = trial;
            s.vals[far] = v;
        } else if far_dist > 2.0 * rho && s.evals < opts.max_evals {
            s.reposition(best, far, rho);
        } else {
            rho *= 0.5;
        }
    }

    let best = s.best();
    Minimum {
        x: s.pts[best].clone(),
        value: s.vals[best],
        evals: s.evals,
    }
}
