//! Solver-agnostic linear programs (minimization) and solver backends.

mod dense;
mod highs;
mod mps;

pub use dense::DenseSimplex;
pub use highs::{HighsAlgorithm, HighsSolver, IPM_ROWS};

/// Constraint and bound violations up to this size count as satisfied.
pub const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("constraint references undeclared variable {0}")]
    UnknownVariable(usize),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("variable {name} has empty bounds [{lower}, {upper}]")]
    EmptyBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable with bounds (use infinities for none) and
    /// returns its index.
    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(0.0);
        self.names.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Adds a row; repeated variables are merged and zero coefficients dropped.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (v, c) in coeffs {
            match merged.iter_mut().find(|(u, _)| *u == v) {
                Some((_, acc)) => *acc += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        self.constraints.push(Constraint {
            coeffs: merged,
            relation,
            rhs,
        });
    }

    pub fn num_variables(&self) -> usize {
        self.names.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let nv = self.num_variables();
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("rhs of row {i}")));
            }
            for &(v, a) in &c.coeffs {
                if v >= nv {
                    return Err(LpError::UnknownVariable(v));
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite(format!("row {i}, {}", self.names[v])));
                }
            }
        }
        for v in 0..nv {
            if !self.objective[v].is_finite() {
                return Err(LpError::NonFinite(format!("objective, {}", self.names[v])));
            }
            if self.lower[v] > self.upper[v] || self.lower[v] == f64::INFINITY {
                return Err(LpError::EmptyBounds {
                    name: self.names[v].clone(),
                    lower: self.lower[v],
                    upper: self.upper[v],
                });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for v in 0..self.num_variables() {
            worst = worst.max(self.lower[v] - x[v]).max(x[v] - self.upper[v]);
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(v, a)| a * x[v]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Free-format MPS text.
    pub fn to_mps(&self, name: &str) -> String {
        mps::write(self, name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable assignment; meaningful only when `status` is optimal.
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn failed(status: LpStatus) -> Self {
        LpSolution {
            status,
            values: Vec::new(),
            objective: f64::NAN,
        }
    }
}

pub trait LpSolver {
    fn solve(&self, p: &LinearProgram) -> LpSolution;
}

/// Default backend.
pub fn solve_lp(p: &LinearProgram) -> LpSolution {
    HighsSolver::default().solve(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn solvers() -> Vec<(&'static str, Box<dyn LpSolver>)> {
        vec![
            ("dense", Box::new(DenseSimplex::default())),
            ("highs", Box::new(HighsSolver::default())),
            (
                "highs-ipm",
                Box::new(HighsSolver {
                    algorithm: HighsAlgorithm::Ipm,
                    ..Default::default()
                }),
            ),
        ]
    }

    #[test]
    fn lower_bound_is_attained() {
        for (name, s) in solvers() {
            let mut p = LinearProgram::new();
            let x = p.add_variable("x", f64::NEG_INFINITY, f64::INFINITY);
            p.set_objective(x, 1.0);
            p.add_constraint(vec![(x, 1.0)], Relation::Ge, 3.0);
            let sol = s.solve(&p);
            assert_eq!(sol.status, LpStatus::Optimal, "{name}");
            assert!((sol.values[x] - 3.0).abs() < 1e-9, "{name}");
        }
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        for (name, s) in solvers() {
            let mut p = LinearProgram::new();
            let x = p.add_variable("x", 0.0, f64::INFINITY);
            p.add_constraint(vec![(x, 1.0)], Relation::Le, -1.0);
            assert_eq!(s.solve(&p).status, LpStatus::Infeasible, "{name}");
        }
    }

    #[test]
    fn unbounded_objective() {
        for (name, s) in solvers() {
            let mut p = LinearProgram::new();
            let x = p.add_variable("x", f64::NEG_INFINITY, f64::INFINITY);
            let y = p.add_variable("y", 0.0, f64::INFINITY);
            p.set_objective(x, 1.0);
            p.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Le, 0.0);
            assert_eq!(s.solve(&p).status, LpStatus::Unbounded, "{name}");
        }
    }

    #[test]
    fn small_mixed_program() {
        // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3, y >= 0
        for (name, s) in solvers() {
            let mut p = LinearProgram::new();
            let x = p.add_variable("x", 0.0, 3.0);
            let y = p.add_variable("y", 0.0, f64::INFINITY);
            p.set_objective(x, -3.0);
            p.set_objective(y, -2.0);
            p.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0);
            p.add_constraint(vec![(x, 1.0), (y, 3.0)], Relation::Le, 6.0);
            p.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Eq, 2.0);
            let sol = s.solve(&p);
            assert_eq!(sol.status, LpStatus::Optimal, "{name}");
            assert!(
                (sol.values[x] - 3.0).abs() < 1e-9 && (sol.values[y] - 1.0).abs() < 1e-9,
                "{name}"
            );
            assert!((sol.objective + 11.0).abs() < 1e-9, "{name}");
            assert!(p.max_violation(&sol.values) <= FEAS_TOL);
        }
    }

    #[test]
    fn validation_catches_bad_programs() {
        let mut p = LinearProgram::new();
        let x = p.add_variable("x", 1.0, 0.0);
        assert!(matches!(p.validate(), Err(LpError::EmptyBounds { .. })));
        p.set_bounds(x, 0.0, 1.0);
        p.add_constraint(vec![(5, 1.0)], Relation::Le, 0.0);
        assert_eq!(p.validate(), Err(LpError::UnknownVariable(5)));
    }

    #[test]
    fn duplicate_coefficients_merge() {
        let mut p = LinearProgram::new();
        let x = p.add_variable("x", 0.0, 1.0);
        p.add_constraint(vec![(x, 1.0), (x, 2.0)], Relation::Le, 1.0);
        p.add_constraint(vec![(x, 1.0), (x, -1.0)], Relation::Le, 1.0);
        assert_eq!(p.constraints()[0].coeffs, vec![(x, 3.0)]);
        assert!(p.constraints()[1].coeffs.is_empty());
    }
}
