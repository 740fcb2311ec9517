//! Lyapunov linear programs on a triangulation and independent checking of
//! their solutions.

mod verify;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::expr::{Expr, ExprError, Interval, SystemModel};
use crate::lp::{LinearProgram, LpSolution, Relation};
use crate::mesh::{simplex_geometry, MeshError, Triangulation};

pub use verify::{verify_certificate, CertificateReport, SAMPLE_COUNT};

/// Margins up to this size are accepted as satisfied.
pub const CERT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("model has dimension {model} but mesh has dimension {mesh}")]
    DimensionMismatch { model: usize, mesh: usize },
    #[error("candidate does not match the mesh: {0}")]
    CandidateMismatch(String),
    #[error("alpha must be positive, got {0}")]
    InvalidAlpha(f64),
}

/// Per-simplex bound on the magnitude of every second partial of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable {
    pub beta: Vec<f64>,
    pub boxes: Vec<Vec<Interval>>,
}

pub fn compute_beta(m: &SystemModel, t: &Triangulation) -> Result<BetaTable, CertError> {
    check_dims(m, t)?;
    let partials: Vec<Expr> = m.second_partials().into_iter().map(|(.., e)| e).collect();
    let mut beta = Vec::with_capacity(t.num_simplices());
    let mut boxes = Vec::with_capacity(t.num_simplices());
    for i in 0..t.num_simplices() {
        let bx: Vec<Interval> = t
            .bounding_box(i)
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect();
        let mut b = 0.0f64;
        for p in &partials {
            b = b.max(p.interval_evaluate(&bx)?.mag());
        }
        beta.push(b);
        boxes.push(bx);
    }
    Ok(BetaTable { beta, boxes })
}

fn check_dims(m: &SystemModel, t: &Triangulation) -> Result<(), CertError> {
    if m.dim() != t.dim() {
        return Err(CertError::DimensionMismatch {
            model: m.dim(),
            mesh: t.dim(),
        });
    }
    Ok(())
}

/// Where each unknown lives in an assembled program.
#[derive(Debug, Clone, PartialEq)]
pub struct LpLayout {
    pub values: Vec<usize>,
    /// `bounds[i][k]` is the variable `l_{i,k}`.
    pub bounds: Vec<Vec<usize>>,
    pub slacks: Option<Vec<usize>>,
}

/// Per-vertex data reused by assembly and verification.
pub(crate) struct VertexData {
    pub f: Vec<Vec<f64>>,
    pub norm: Vec<f64>,
}

impl VertexData {
    pub fn new(m: &SystemModel, t: &Triangulation) -> Result<Self, CertError> {
        let mut f = Vec::with_capacity(t.num_vertices());
        let mut norm = Vec::with_capacity(t.num_vertices());
        for x in t.vertices() {
            f.push(m.eval(x)?);
            norm.push(x.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        Ok(VertexData { f, norm })
    }
}

/// Coefficients of `∇V_i` on the vertex values of simplex `i`: entry
/// `[k][j]` multiplies `V` at local vertex `j`.
pub(crate) fn gradient_coefficients(x_inv: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = x_inv.nrows();
    (0..n)
        .map(|k| {
            let mut row = vec![0.0; n + 1];
            for j in 1..=n {
                row[j] = x_inv[(k, j - 1)];
                row[0] -= x_inv[(k, j - 1)];
            }
            row
        })
        .collect()
}

fn assemble(
    m: &SystemModel,
    t: &Triangulation,
    beta: &BetaTable,
    alpha: Option<f64>,
) -> Result<(LinearProgram, LpLayout), CertError> {
    check_dims(m, t)?;
    if beta.beta.len() != t.num_simplices() {
        return Err(CertError::CandidateMismatch(format!(
            "beta table has {} entries for {} simplices",
            beta.beta.len(),
            t.num_simplices()
        )));
    }
    let n = t.dim();
    let data = VertexData::new(m, t)?;
    let mut lp = LinearProgram::new();

    let values: Vec<usize> = (0..t.num_vertices())
        .map(|v| {
            let fixed = t.origin_vertex() == Some(v);
            let lo = if fixed { 0.0 } else { data.norm[v] };
            let hi = if fixed { 0.0 } else { f64::INFINITY };
            lp.add_variable(format!("V[{v}]"), lo, hi)
        })
        .collect();
    let bounds: Vec<Vec<usize>> = (0..t.num_simplices())
        .map(|i| {
            (0..n)
                .map(|k| lp.add_variable(format!("l[{i},{k}]"), 0.0, f64::INFINITY))
                .collect()
        })
        .collect();
    let slacks = alpha.map(|a| {
        (0..t.num_vertices())
            .map(|v| {
                let u = lp.add_variable(format!("u[{v}]"), -a, f64::INFINITY);
                lp.set_objective(u, 1.0);
                u
            })
            .collect::<Vec<_>>()
    });

    for i in 0..t.num_simplices() {
        let g = simplex_geometry(t, i)?;
        let s = t.simplex(i);
        let coef = gradient_coefficients(&g.x_inv);
        for k in 0..n {
            for sign in [1.0, -1.0] {
                let mut row: Vec<(usize, f64)> =
                    (0..=n).map(|j| (values[s[j]], sign * coef[k][j])).collect();
                row.push((bounds[i][k], -1.0));
                lp.add_constraint(row, Relation::Le, 0.0);
            }
        }
        let curvature = 0.5 * beta.beta[i];
        for j in 0..=n {
            let fx = &data.f[s[j]];
            let mut row: Vec<(usize, f64)> = (0..=n)
                .map(|jj| {
                    let c: f64 = (0..n).map(|k| fx[k] * coef[k][jj]).sum();
                    (values[s[jj]], c)
                })
                .collect();
            let w = curvature * g.c[j];
            if w != 0.0 {
                row.extend(bounds[i].iter().map(|&l| (l, w)));
            }
            if let Some(u) = &slacks {
                row.push((u[s[j]], -1.0));
            }
            lp.add_constraint(row, Relation::Le, -data.norm[s[j]]);
        }
    }
    Ok((
        lp,
        LpLayout {
            values,
            bounds,
            slacks,
        },
    ))
}

/// The strict feasibility program: positivity (as variable bounds, with `V`
/// fixed to zero at the origin), gradient bounds and vertex decrease rows.
pub fn assemble_feasibility_lp(
    m: &SystemModel,
    t: &Triangulation,
    beta: &BetaTable,
) -> Result<(LinearProgram, LpLayout), CertError> {
    assemble(m, t, beta, None)
}

/// The always-feasible relaxation: each decrease row gets the slack of its
/// vertex, bounded below by `-alpha`, and the slack sum is minimized.
pub fn assemble_slack_lp(
    m: &SystemModel,
    t: &Triangulation,
    beta: &BetaTable,
    alpha: f64,
) -> Result<(LinearProgram, LpLayout), CertError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CertError::InvalidAlpha(alpha));
    }
    assemble(m, t, beta, Some(alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpaCandidate {
    pub values: Vec<f64>,
    pub gradient_bounds: Vec<Vec<f64>>,
    pub slacks: Option<Vec<f64>>,
}

impl CpaCandidate {
    pub fn from_solution(layout: &LpLayout, sol: &LpSolution) -> Self {
        let x = &sol.values;
        CpaCandidate {
            values: layout.values.iter().map(|&v| x[v]).collect(),
            gradient_bounds: layout
                .bounds
                .iter()
                .map(|b| b.iter().map(|&v| x[v]).collect())
                .collect(),
            slacks: layout
                .slacks
                .as_ref()
                .map(|s| s.iter().map(|&v| x[v]).collect()),
        }
    }

    pub fn max_slack(&self) -> Option<f64> {
        self.slacks
            .as_ref()
            .map(|s| s.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn to_json(&self) -> String {
        let file = CandidateFile {
            values: self.values.iter().copied().enumerate().collect(),
            gradient_bounds: self.gradient_bounds.clone(),
        };
        serde_json::to_string(&file).expect("candidate serializes")
    }

    /// Reads `{"values": {index: V}, "gradient_bounds": [[...]]}`; every
    /// index from 0 to the largest must be present.
    pub fn from_json(text: &str) -> Result<Self, CertError> {
        let file: CandidateFile =
            serde_json::from_str(text).map_err(|e| CertError::CandidateMismatch(e.to_string()))?;
        let count = file.values.len();
        let values = (0..count)
            .map(|i| {
                file.values.get(&i).copied().ok_or_else(|| {
                    CertError::CandidateMismatch(format!("missing value for vertex {i}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CpaCandidate {
            values,
            gradient_bounds: file.gradient_bounds,
            slacks: None,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CandidateFile {
    values: BTreeMap<usize, f64>,
    gradient_bounds: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, DenseSimplex, LpSolver, LpStatus};
    use crate::mesh::{build_grid_mesh, cpa_gradient};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn square(h: f64) -> Vec<Interval> {
        vec![Interval::new(-h, h); 2]
    }

    fn linear() -> SystemModel {
        SystemModel::new("lin", &["-x1", "-x2"], square(1.0)).unwrap()
    }

    #[test]
    fn beta_examples() {
        let a = SystemModel::new("A", &["x2", "-sin(x1)-x2"], square(FRAC_PI_2)).unwrap();
        let t = Triangulation::new(
            2,
            &[vec![0.0, 0.0], vec![PI / 6.0, 0.0], vec![PI / 6.0, 0.5]],
            &[vec![0, 1, 2]],
        )
        .unwrap();
        let b = compute_beta(&a, &t).unwrap();
        assert!((b.beta[0] - 0.5).abs() < 1e-12);

        let t = build_grid_mesh(&square(1.0), &[0.5, 0.5]).unwrap();
        assert!(compute_beta(&linear(), &t)
            .unwrap()
            .beta
            .iter()
            .all(|&b| b == 0.0));

        let sys_b = SystemModel::new(
            "B",
            &["0.3*x1^5-0.5*x2^4-0.5*x1", "-0.5*x1^6-0.1*x2"],
            square(0.75),
        )
        .unwrap();
        let t = Triangulation::new(
            2,
            &[vec![0.5, 0.0], vec![0.75, 0.0], vec![0.75, 0.25]],
            &[vec![0, 1, 2]],
        )
        .unwrap();
        let b = compute_beta(&sys_b, &t).unwrap();
        assert!(b.beta[0] >= 15.0 * 0.75f64.powi(4));
        assert!(b.beta[0] < 15.0 * 0.75f64.powi(4) + 1e-9);
    }

    #[test]
    fn feasibility_lp_counts() {
        let t = build_grid_mesh(&square(FRAC_PI_2), &[FRAC_PI_2; 2]).unwrap();
        let a = SystemModel::new("A", &["x2", "-sin(x1)-x2"], square(FRAC_PI_2)).unwrap();
        let beta = compute_beta(&a, &t).unwrap();
        let (lp, layout) = assemble_feasibility_lp(&a, &t, &beta).unwrap();
        assert_eq!(lp.num_variables(), 9 + 16);
        assert_eq!(lp.num_constraints(), 8 * (3 * 2 + 1));
        assert!(layout.slacks.is_none());
        let o = t.origin_vertex().unwrap();
        assert_eq!((lp.lower()[o], lp.upper()[o]), (0.0, 0.0));
    }

    #[test]
    fn linear_system_is_feasible() {
        let m = linear();
        let t = build_grid_mesh(&square(1.0), &[1.0, 1.0]).unwrap();
        let beta = compute_beta(&m, &t).unwrap();
        let (lp, layout) = assemble_feasibility_lp(&m, &t, &beta).unwrap();
        let sol = DenseSimplex::default().solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        let cand = CpaCandidate::from_solution(&layout, &sol);
        assert!(verify_certificate(&m, &t, &cand).valid);
    }

    #[test]
    fn linear_slack_hits_lower_bound() {
        let m = linear();
        let t = build_grid_mesh(&square(1.0), &[0.5, 0.5]).unwrap();
        let beta = compute_beta(&m, &t).unwrap();
        let (lp, layout) = assemble_slack_lp(&m, &t, &beta, 1.0).unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        let cand = CpaCandidate::from_solution(&layout, &sol);
        let o = t.origin_vertex().unwrap();
        for (v, &u) in cand.slacks.as_ref().unwrap().iter().enumerate() {
            let expected = if v == o { 0.0 } else { -1.0 };
            assert!((u - expected).abs() < 1e-7, "vertex {v}: {u}");
        }
    }

    #[test]
    fn pendulum_coarse_grid_has_positive_slack() {
        let a = SystemModel::new("A", &["x2", "-sin(x1)-x2"], square(FRAC_PI_2)).unwrap();
        let t = build_grid_mesh(&square(FRAC_PI_2), &[FRAC_PI_2; 2]).unwrap();
        let beta = compute_beta(&a, &t).unwrap();
        let (lp, layout) = assemble_slack_lp(&a, &t, &beta, 1.0).unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        let dense = DenseSimplex::default().solve(&lp);
        assert_eq!(dense.status, LpStatus::Optimal);
        assert!((sol.objective - dense.objective).abs() < 1e-6);
        let cand = CpaCandidate::from_solution(&layout, &sol);
        assert!(cand.max_slack().unwrap() > CERT_TOL);
    }

    #[test]
    fn gradient_rows_bound_the_interpolant() {
        let m = linear();
        let t = build_grid_mesh(&square(1.0), &[0.5, 0.5]).unwrap();
        let beta = compute_beta(&m, &t).unwrap();
        let (lp, layout) = assemble_slack_lp(&m, &t, &beta, 1.0).unwrap();
        let cand = CpaCandidate::from_solution(&layout, &solve_lp(&lp));
        for i in 0..t.num_simplices() {
            let g = cpa_gradient(&t, i, &cand.values).unwrap();
            for k in 0..2 {
                assert!(g[k].abs() <= cand.gradient_bounds[i][k] + CERT_TOL);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = linear();
        let t = build_grid_mesh(&square(1.0), &[1.0, 1.0]).unwrap();
        let beta = compute_beta(&m, &t).unwrap();
        assert!(matches!(
            assemble_slack_lp(&m, &t, &beta, 0.0),
            Err(CertError::InvalidAlpha(_))
        ));
        let t3 = build_grid_mesh(&[Interval::new(-1.0, 1.0); 3], &[1.0; 3]).unwrap();
        assert!(matches!(
            compute_beta(&m, &t3),
            Err(CertError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn candidate_json_round_trip() {
        let c = CpaCandidate {
            values: vec![0.0, 1.5, 2.25],
            gradient_bounds: vec![vec![1.0, 2.0]],
            slacks: None,
        };
        let back = CpaCandidate::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_json().contains("\"1\":1.5"));
        assert!(CpaCandidate::from_json(r#"{"values":{"1":2.0},"gradient_bounds":[]}"#).is_err());
    }
}
