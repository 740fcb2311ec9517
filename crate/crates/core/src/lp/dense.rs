//! Dense two-phase bounded-variable simplex. Intended for small programs and
//! as an independent cross-check of the production backend.

use super::{LinearProgram, LpSolution, LpSolver, LpStatus, Relation, FEAS_TOL};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
/// Consecutive non-improving pivots before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    pub max_iterations: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        DenseSimplex {
            max_iterations: 100_000,
        }
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn run(&mut self, cost: &[f64], max_iter: usize) -> Outcome {
        let total = self.x.len();
        let mut d = self.reduced_costs(cost);
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        for _ in 0..max_iter {
            let bland = stall >= STALL_LIMIT;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..total {
                if self.is_basic[j] {
                    continue;
                }
                let improves = (d[j] < -COST_TOL && self.x[j] < self.hi[j])
                    || (d[j] > COST_TOL && self.x[j] > self.lo[j]);
                if !improves {
                    continue;
                }
                if bland {
                    entering = Some((j, d[j]));
                    break;
                }
                if entering.is_none_or(|(_, best)| d[j].abs() > best.abs()) {
                    entering = Some((j, d[j]));
                }
            }
            let Some((q, dq)) = entering else {
                return Outcome::Optimal;
            };
            let sigma = if dq < 0.0 { 1.0 } else { -1.0 };

            let mut step = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let rate = sigma * row[q];
                let b = self.basis[i];
                let limit = if rate > PIVOT_TOL {
                    (self.x[b] - self.lo[b]) / rate
                } else if rate < -PIVOT_TOL {
                    (self.hi[b] - self.x[b]) / -rate
                } else {
                    continue;
                };
                if !limit.is_finite() {
                    continue;
                }
                let limit = limit.max(0.0);
                let better = match leave {
                    _ if limit < step - 1e-12 => true,
                    Some((li, _)) if limit <= step + 1e-12 => {
                        if bland {
                            b < self.basis[li]
                        } else {
                            row[q].abs() > self.rows[li][q].abs()
                        }
                    }
                    None if limit <= step => true,
                    _ => false,
                };
                if better {
                    step = limit.min(step);
                    leave = Some((i, rate));
                }
            }
            if !step.is_finite() {
                return Outcome::Unbounded;
            }

            self.x[q] += sigma * step;
            for (i, row) in self.rows.iter().enumerate() {
                self.x[self.basis[i]] -= sigma * row[q] * step;
            }
            if let Some((r, rate)) = leave {
                let out = self.basis[r];
                self.x[out] = if rate > 0.0 {
                    self.lo[out]
                } else {
                    self.hi[out]
                };
                self.pivot(r, q, &mut d);
            } else {
                self.x[q] = if sigma > 0.0 { self.hi[q] } else { self.lo[q] };
            }

            let obj: f64 = cost.iter().zip(&self.x).map(|(c, v)| c * v).sum();
            if obj < last_obj - 1e-12 * (1.0 + obj.abs()) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        }
        Outcome::IterationLimit
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let p = self.rows[r][q];
        for a in self.rows[r].iter_mut() {
            *a /= p;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (a, pr) in row.iter_mut().zip(&pivot_row) {
                    *a -= f * pr;
                }
            }
        }
        let f = d[q];
        if f != 0.0 {
            for (dj, pr) in d.iter_mut().zip(&pivot_row) {
                *dj -= f * pr;
            }
        }
        self.rows[r] = pivot_row;
        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, p: &LinearProgram) -> LpSolution {
        if p.validate().is_err() {
            return LpSolution::failed(LpStatus::NumericalFailure);
        }
        let nv = p.num_variables();
        let m = p.num_constraints();
        let total = nv + 2 * m;
        let mut lo = Vec::with_capacity(total);
        let mut hi = Vec::with_capacity(total);
        lo.extend_from_slice(p.lower());
        hi.extend_from_slice(p.upper());
        for c in p.constraints() {
            let (l, h) = match c.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
        }
        lo.extend(std::iter::repeat_n(0.0, m));
        hi.extend(std::iter::repeat_n(f64::INFINITY, m));

        let mut x: Vec<f64> = (0..total)
            .map(|j| {
                if lo[j].is_finite() {
                    lo[j]
                } else if hi[j].is_finite() {
                    hi[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut rows = vec![vec![0.0; total]; m];
        for (i, c) in p.constraints().iter().enumerate() {
            let mut resid = c.rhs - x[nv + i];
            for &(v, a) in &c.coeffs {
                rows[i][v] = a;
                resid -= a * x[v];
            }
            rows[i][nv + i] = 1.0;
            let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
            for a in rows[i].iter_mut() {
                *a *= sign;
            }
            rows[i][nv + m + i] = 1.0;
            x[nv + m + i] = resid.abs();
        }
        let basis: Vec<usize> = (0..m).map(|i| nv + m + i).collect();
        let mut is_basic = vec![false; total];
        for &b in &basis {
            is_basic[b] = true;
        }
        let mut t = Tableau {
            rows,
            basis,
            is_basic,
            x,
            lo,
            hi,
        };

        let mut phase1 = vec![0.0; total];
        for c in phase1.iter_mut().skip(nv + m) {
            *c = 1.0;
        }
        match t.run(&phase1, self.max_iterations) {
            Outcome::Optimal => {}
            _ => return LpSolution::failed(LpStatus::NumericalFailure),
        }
        let infeas: f64 = t.x[nv + m..].iter().sum();
        let scale = 1.0
            + p.constraints()
                .iter()
                .map(|c| c.rhs.abs())
                .fold(0.0, f64::max);
        if infeas > 1e-9 * scale {
            return LpSolution::failed(LpStatus::Infeasible);
        }
        for j in nv + m..total {
            t.hi[j] = 0.0;
            if !t.is_basic[j] {
                t.x[j] = 0.0;
            }
        }

        let mut cost = vec![0.0; total];
        cost[..nv].copy_from_slice(p.objective());
        match t.run(&cost, self.max_iterations) {
            Outcome::Optimal => {}
            Outcome::Unbounded => return LpSolution::failed(LpStatus::Unbounded),
            Outcome::IterationLimit => return LpSolution::failed(LpStatus::NumericalFailure),
        }
        let values = t.x[..nv].to_vec();
        if p.max_violation(&values) > FEAS_TOL {
            return LpSolution::failed(LpStatus::NumericalFailure);
        }
        LpSolution {
            status: LpStatus::Optimal,
            objective: p.objective_value(&values),
            values,
        }
    }
}
