//! Mesh synthesis: uniform grids, adaptive refinement (Method 1),
//! model-informed vertices (Method 2) and their composition (Method 3).

mod method2;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::cert::{
    assemble_slack_lp, compute_beta, verify_certificate, CertError, CertificateReport,
    CpaCandidate, CERT_TOL,
};
use crate::expr::{ExprError, SystemModel};
use crate::lp::{HighsSolver, LpSolver, LpStatus};
use crate::mesh::{build_delaunay_mesh, build_grid_mesh, MeshError, Triangulation};

pub use method2::{method2_axes, method2_vertices};

/// Refinement stops before creating an edge shorter than this.
pub const MIN_EDGE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Grid,
    Method1,
    Method2,
    Method3,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Grid,
        Method::Method1,
        Method::Method2,
        Method::Method3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Grid => "grid",
            Method::Method1 => "m1",
            Method::Method2 => "m2",
            Method::Method3 => "m3",
        }
    }

    fn refines(self) -> bool {
        matches!(self, Method::Method1 | Method::Method3)
    }

    fn uses_grid(self) -> bool {
        matches!(self, Method::Grid | Method::Method1)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "grid" => Ok(Method::Grid),
            "m1" | "method1" => Ok(Method::Method1),
            "m2" | "method2" => Ok(Method::Method2),
            "m3" | "method3" => Ok(Method::Method3),
            _ => Err(SynthError::Config(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub method: Method,
    pub grid_spacing: Vec<f64>,
    pub points_per_segment: usize,
    pub alpha: f64,
    pub max_iterations: usize,
    pub prune_radius: f64,
    /// Uniform spacing for axes without a nonlinear factor, keyed by 1-based axis.
    pub linear_axis_spacing: BTreeMap<usize, f64>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            method: Method::Method1,
            grid_spacing: Vec::new(),
            points_per_segment: 2,
            alpha: 1.0,
            max_iterations: 1000,
            prune_radius: 0.05,
            linear_axis_spacing: BTreeMap::new(),
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self, dim: usize) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::Config(msg));
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.prune_radius > 0.0 && self.prune_radius.is_finite()) {
            return bad(format!(
                "prune_radius must be positive, got {}",
                self.prune_radius
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.method.uses_grid() {
            if self.grid_spacing.len() != dim {
                return bad(format!(
                    "grid_spacing has {} entries for dimension {dim}",
                    self.grid_spacing.len()
                ));
            }
        } else if self.points_per_segment < 2 {
            return bad("points_per_segment must be at least 2".into());
        }
        if let Some((&k, _)) = self
            .linear_axis_spacing
            .iter()
            .find(|(&k, _)| k == 0 || k > dim)
        {
            return bad(format!("linear_axis_spacing axis {k} outside 1..={dim}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub vertices: usize,
    pub simplices: usize,
    pub max_slack: f64,
    /// Simplex with the largest score; `None` when the iteration was final.
    pub refined: Option<usize>,
    pub score: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Viable,
    /// Single-solve methods whose LP left positive slack.
    NotViable,
    BudgetExhausted,
    /// The next bisection would have produced an edge below [`MIN_EDGE`].
    EdgeCollapse,
    LpFailure(LpStatus),
}

impl Verdict {
    pub fn is_viable(self) -> bool {
        self == Verdict::Viable
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Viable => f.write_str("viable"),
            Verdict::NotViable => f.write_str("not viable"),
            Verdict::BudgetExhausted => f.write_str("budget exhausted"),
            Verdict::EdgeCollapse => f.write_str("edge collapse"),
            Verdict::LpFailure(s) => write!(f, "LP failure ({s:?})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub records: Vec<IterationRecord>,
    pub verdict: Verdict,
    pub mesh: Triangulation,
    /// Candidate from the last successful solve.
    pub candidate: Option<CpaCandidate>,
    pub certificate: Option<CertificateReport>,
    pub initial_simplices: usize,
}

impl SynthesisReport {
    /// Number of slack LPs solved.
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn delta_simplices(&self) -> isize {
        self.mesh.num_simplices() as isize - self.initial_simplices as isize
    }

    pub fn wall_ms(&self) -> f64 {
        self.records.iter().map(|r| r.wall_ms).sum()
    }
}

/// Per-simplex score: the sum of its vertex slacks.
pub fn simplex_scores(t: &Triangulation, slacks: &[f64]) -> Vec<f64> {
    t.simplices()
        .map(|s| s.iter().map(|&v| slacks[v]).sum())
        .collect()
}

/// Index of the largest score, lowest index on ties.
pub fn argmax_lowest(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Adaptive refinement with the default LP backend.
pub fn adapt(
    m: &SystemModel,
    t0: Triangulation,
    cfg: &SynthesisConfig,
) -> Result<SynthesisReport, SynthError> {
    adapt_with(m, t0, cfg, &HighsSolver::default())
}

/// Solve the slack program; stop when every slack is within tolerance and the
/// certificate rechecks, otherwise bisect the worst-scoring simplex and repeat.
pub fn adapt_with(
    m: &SystemModel,
    t0: Triangulation,
    cfg: &SynthesisConfig,
    solver: &dyn LpSolver,
) -> Result<SynthesisReport, SynthError> {
    if cfg.max_iterations < 1 {
        return Err(SynthError::Config(
            "max_iterations must be at least 1".into(),
        ));
    }
    if m.dim() != t0.dim() {
        return Err(CertError::DimensionMismatch {
            model: m.dim(),
            mesh: t0.dim(),
        }
        .into());
    }
    let mut report = SynthesisReport {
        records: Vec::new(),
        verdict: Verdict::BudgetExhausted,
        initial_simplices: t0.num_simplices(),
        mesh: t0,
        candidate: None,
        certificate: None,
    };
    for iteration in 1..=cfg.max_iterations {
        let start = Instant::now();
        let t = &mut report.mesh;
        let beta = compute_beta(m, t)?;
        let (lp, layout) = assemble_slack_lp(m, t, &beta, cfg.alpha)?;
        let sol = solver.solve(&lp);
        let mut record = IterationRecord {
            iteration,
            vertices: t.num_vertices(),
            simplices: t.num_simplices(),
            max_slack: f64::NAN,
            refined: None,
            score: None,
            wall_ms: 0.0,
        };
        if sol.status != LpStatus::Optimal {
            record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            report.records.push(record);
            report.verdict = Verdict::LpFailure(sol.status);
            return Ok(report);
        }
        let cand = CpaCandidate::from_solution(&layout, &sol);
        let slacks = cand.slacks.clone().unwrap_or_default();
        record.max_slack = cand.max_slack().unwrap_or(f64::NEG_INFINITY);

        let mut done = None;
        if record.max_slack <= CERT_TOL {
            let cert = verify_certificate(m, t, &cand);
            if cert.valid {
                done = Some(Verdict::Viable);
            }
            report.certificate = Some(cert);
        }
        if done.is_none() && iteration == cfg.max_iterations {
            done = Some(Verdict::BudgetExhausted);
        }
        if done.is_none() {
            let scores = simplex_scores(t, &slacks);
            let worst = argmax_lowest(&scores).expect("mesh has simplices");
            let (a, b) = t.longest_edge(worst);
            let half = 0.5 * distance(t.vertex(a), t.vertex(b));
            if half < MIN_EDGE {
                done = Some(Verdict::EdgeCollapse);
            } else {
                record.refined = Some(worst);
                record.score = Some(scores[worst]);
                t.refine_leb_in_place(worst)?;
            }
        }
        record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        report.records.push(record);
        report.candidate = Some(cand);
        if let Some(v) = done {
            report.verdict = v;
            return Ok(report);
        }
    }
    unreachable!("loop returns on the last iteration")
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Initial mesh for a method: a uniform grid or the Delaunay mesh of the
/// model-informed vertex set.
pub fn initial_mesh(m: &SystemModel, cfg: &SynthesisConfig) -> Result<Triangulation, SynthError> {
    cfg.validate(m.dim())?;
    if cfg.method.uses_grid() {
        Ok(build_grid_mesh(m.domain(), &cfg.grid_spacing)?)
    } else {
        let pts = method2_vertices(m, cfg.points_per_segment, cfg)?;
        Ok(build_delaunay_mesh(&pts)?)
    }
}

pub fn run_method(m: &SystemModel, cfg: &SynthesisConfig) -> Result<SynthesisReport, SynthError> {
    run_method_with(m, cfg, &HighsSolver::default())
}

pub fn run_method_with(
    m: &SystemModel,
    cfg: &SynthesisConfig,
    solver: &dyn LpSolver,
) -> Result<SynthesisReport, SynthError> {
    let t0 = initial_mesh(m, cfg)?;
    if cfg.method.refines() {
        adapt_with(m, t0, cfg, solver)
    } else {
        let single = SynthesisConfig {
            max_iterations: 1,
            ..cfg.clone()
        };
        let mut r = adapt_with(m, t0, &single, solver)?;
        if r.verdict == Verdict::BudgetExhausted {
            r.verdict = Verdict::NotViable;
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Interval;
    use crate::lp::DenseSimplex;

    fn linear() -> SystemModel {
        SystemModel::new("lin", &["-x1", "-x2"], vec![Interval::new(-1.0, 1.0); 2]).unwrap()
    }

    fn pendulum() -> SystemModel {
        let d = std::f64::consts::FRAC_PI_2;
        SystemModel::new("A", &["x2", "-sin(x1)-x2"], vec![Interval::new(-d, d); 2]).unwrap()
    }

    #[test]
    fn linear_system_is_viable_immediately() {
        let m = linear();
        let t = build_grid_mesh(m.domain(), &[1.0, 1.0]).unwrap();
        let r = adapt(&m, t, &SynthesisConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Viable);
        assert_eq!(r.iterations(), 1);
        assert_eq!(r.delta_simplices(), 0);
        assert!(r.certificate.unwrap().valid);
        assert!(r
            .candidate
            .unwrap()
            .slacks
            .unwrap()
            .iter()
            .all(|&u| u <= 0.0));
    }

    #[test]
    fn single_iteration_budget() {
        let m = pendulum();
        let t = build_grid_mesh(m.domain(), &[std::f64::consts::FRAC_PI_2; 2]).unwrap();
        let cfg = SynthesisConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let r = adapt(&m, t, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::BudgetExhausted);
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].refined, None);
        assert_eq!(r.delta_simplices(), 0);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let m = linear();
        let t = build_grid_mesh(m.domain(), &[1.0, 1.0]).unwrap();
        let cfg = SynthesisConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(matches!(adapt(&m, t, &cfg), Err(SynthError::Config(_))));
    }

    #[test]
    fn refinement_follows_scores() {
        let m = pendulum();
        let t = build_grid_mesh(m.domain(), &[std::f64::consts::FRAC_PI_4; 2]).unwrap();
        let cfg = SynthesisConfig {
            max_iterations: 6,
            ..Default::default()
        };
        let r = adapt(&m, t.clone(), &cfg).unwrap();
        let mut mesh = t;
        let mut total = 0isize;
        for rec in &r.records {
            assert_eq!(rec.simplices, mesh.num_simplices());
            let Some(i) = rec.refined else { break };
            let beta = compute_beta(&m, &mesh).unwrap();
            let (lp, layout) = assemble_slack_lp(&m, &mesh, &beta, 1.0).unwrap();
            let cand = CpaCandidate::from_solution(&layout, &HighsSolver::default().solve(&lp));
            let scores = simplex_scores(&mesh, cand.slacks.as_ref().unwrap());
            assert_eq!(argmax_lowest(&scores), Some(i));
            let before = mesh.num_simplices() as isize;
            mesh.refine_leb_in_place(i).unwrap();
            total += mesh.num_simplices() as isize - before;
        }
        assert_eq!(total, r.delta_simplices());
    }

    #[test]
    fn ties_pick_lowest_index() {
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_lowest(&[]), None);
    }

    #[test]
    fn grid_method_is_single_solve() {
        let m = pendulum();
        let cfg = SynthesisConfig {
            method: Method::Grid,
            grid_spacing: vec![std::f64::consts::FRAC_PI_2; 2],
            ..Default::default()
        };
        let r = run_method_with(&m, &cfg, &DenseSimplex::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotViable);
        assert_eq!(r.iterations(), 1);
        assert_eq!(r.mesh.num_simplices(), 8);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("m4".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SynthesisConfig {
            grid_spacing: vec![0.5, 0.5],
            ..Default::default()
        };
        assert!(c.validate(2).is_ok());
        assert!(c.validate(3).is_err());
        c.prune_radius = 0.0;
        assert!(c.validate(2).is_err());
        c.prune_radius = 0.05;
        c.linear_axis_spacing.insert(3, 0.1);
        assert!(c.validate(2).is_err());
    }
}
