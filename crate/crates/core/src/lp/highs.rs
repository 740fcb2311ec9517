use highs::{Col, HighsModelStatus, RowProblem, Sense};

use super::{LinearProgram, LpSolution, LpSolver, LpStatus, Relation, FEAS_TOL};

/// Programs with at least this many rows go to the interior point method
/// under [`HighsAlgorithm::Auto`].
pub const IPM_ROWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HighsAlgorithm {
    Simplex,
    /// Interior point followed by crossover to a basic solution.
    Ipm,
    Auto,
}

/// HiGHS, single-threaded with a fixed seed so repeated solves of the same
/// program follow the same path.
#[derive(Debug, Clone)]
pub struct HighsSolver {
    pub algorithm: HighsAlgorithm,
    pub presolve: bool,
    pub time_limit: Option<f64>,
}

impl Default for HighsSolver {
    fn default() -> Self {
        HighsSolver {
            algorithm: HighsAlgorithm::Auto,
            presolve: true,
            time_limit: None,
        }
    }
}

impl HighsSolver {
    fn run(&self, p: &LinearProgram, presolve: bool) -> (HighsModelStatus, Vec<f64>) {
        let mut pb = RowProblem::new();
        let cols: Vec<Col> = (0..p.num_variables())
            .map(|v| pb.add_column(p.objective()[v], p.lower()[v]..=p.upper()[v]))
            .collect();
        for c in p.constraints() {
            let row = c.coeffs.iter().map(|&(v, a)| (cols[v], a));
            match c.relation {
                Relation::Le => pb.add_row(..=c.rhs, row),
                Relation::Ge => pb.add_row(c.rhs.., row),
                Relation::Eq => pb.add_row(c.rhs..=c.rhs, row),
            }
        }
        let mut model = pb.optimise(Sense::Minimise);
        model.make_quiet();
        model.set_option("threads", 1);
        model.set_option("random_seed", 0);
        let ipm = match self.algorithm {
            HighsAlgorithm::Simplex => false,
            HighsAlgorithm::Ipm => true,
            HighsAlgorithm::Auto => p.num_constraints() >= IPM_ROWS,
        };
        model.set_option("solver", if ipm { "ipm" } else { "simplex" });
        model.set_option("run_crossover", "on");
        model.set_option("presolve", if presolve { "on" } else { "off" });
        model.set_option("primal_feasibility_tolerance", 1e-9);
        model.set_option("dual_feasibility_tolerance", 1e-9);
        if let Some(t) = self.time_limit {
            model.set_option("time_limit", t);
        }
        let solved = model.solve();
        let status = solved.status();
        let values = if status == HighsModelStatus::Optimal {
            solved.get_solution().columns().to_vec()
        } else {
            Vec::new()
        };
        (status, values)
    }
}

impl LpSolver for HighsSolver {
    fn solve(&self, p: &LinearProgram) -> LpSolution {
        if p.validate().is_err() {
            return LpSolution::failed(LpStatus::NumericalFailure);
        }
        if p.num_variables() == 0 {
            let status = if p.max_violation(&[]) <= FEAS_TOL {
                LpStatus::Optimal
            } else {
                LpStatus::Infeasible
            };
            return LpSolution {
                status,
                values: Vec::new(),
                objective: 0.0,
            };
        }
        let (mut status, mut values) = self.run(p, self.presolve);
        if status == HighsModelStatus::UnboundedOrInfeasible && self.presolve {
            (status, values) = self.run(p, false);
        }
        match status {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {}
            HighsModelStatus::Infeasible => return LpSolution::failed(LpStatus::Infeasible),
            HighsModelStatus::Unbounded => return LpSolution::failed(LpStatus::Unbounded),
            HighsModelStatus::UnboundedOrInfeasible => {
                return LpSolution::failed(LpStatus::Infeasible)
            }
            _ => return LpSolution::failed(LpStatus::NumericalFailure),
        }
        if values.len() != p.num_variables() || p.max_violation(&values) > FEAS_TOL {
            return LpSolution::failed(LpStatus::NumericalFailure);
        }
        LpSolution {
            status: LpStatus::Optimal,
            objective: p.objective_value(&values),
            values,
        }
    }
}
