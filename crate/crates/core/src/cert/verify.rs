use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compute_beta, gradient_coefficients, CpaCandidate, VertexData, CERT_TOL};
use crate::expr::SystemModel;
use crate::mesh::{simplex_geometry, Locator, Triangulation};

pub const SAMPLE_COUNT: usize = 10_000;
const SAMPLE_SEED: u64 = 0x5EED;

/// Outcome of an independent recheck. Margins are the smallest amount by
/// which each family of conditions holds; negative means violated.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub valid: bool,
    /// `min_x V_x - ‖x‖`, and `-|V(0)|` at the origin.
    pub positivity_margin: f64,
    /// `min_{i,k} l_{i,k} - |(∇V_i)_k|`.
    pub gradient_margin: f64,
    /// Smallest slack of the vertex decrease rows.
    pub decrease_margin: f64,
    /// `min -‖x‖ - ∇V(x)·f(x)` over uniform samples.
    pub sample_margin: f64,
    pub samples: usize,
    pub sample_violations: usize,
    /// Set when the candidate could not be checked at all.
    pub problem: Option<String>,
}

impl CertificateReport {
    fn rejected(problem: String) -> Self {
        CertificateReport {
            valid: false,
            positivity_margin: f64::NAN,
            gradient_margin: f64::NAN,
            decrease_margin: f64::NAN,
            sample_margin: f64::NAN,
            samples: 0,
            sample_violations: 0,
            problem: Some(problem),
        }
    }
}

/// Rechecks a candidate from scratch: fresh β and geometry, every positivity,
/// gradient and decrease condition, then a seeded sample of the domain.
pub fn verify_certificate(
    m: &SystemModel,
    t: &Triangulation,
    cand: &CpaCandidate,
) -> CertificateReport {
    match check(m, t, cand) {
        Ok(r) => r,
        Err(e) => CertificateReport::rejected(e),
    }
}

fn check(
    m: &SystemModel,
    t: &Triangulation,
    cand: &CpaCandidate,
) -> Result<CertificateReport, String> {
    let n = t.dim();
    if cand.values.len() != t.num_vertices() {
        return Err(format!(
            "{} values for {} vertices",
            cand.values.len(),
            t.num_vertices()
        ));
    }
    if cand.gradient_bounds.len() != t.num_simplices()
        || cand.gradient_bounds.iter().any(|l| l.len() != n)
    {
        return Err("gradient bounds do not match the simplices".into());
    }
    let beta = compute_beta(m, t).map_err(|e| e.to_string())?;
    let data = VertexData::new(m, t).map_err(|e| e.to_string())?;

    let mut positivity = f64::INFINITY;
    for v in 0..t.num_vertices() {
        let margin = if t.origin_vertex() == Some(v) {
            -cand.values[v].abs()
        } else {
            cand.values[v] - data.norm[v]
        };
        positivity = positivity.min(margin);
    }

    let mut gradient_margin = f64::INFINITY;
    let mut decrease = f64::INFINITY;
    let mut gradients = Vec::with_capacity(t.num_simplices());
    for i in 0..t.num_simplices() {
        let g = simplex_geometry(t, i).map_err(|e| e.to_string())?;
        let s = t.simplex(i);
        let coef = gradient_coefficients(&g.x_inv);
        let grad: Vec<f64> = (0..n)
            .map(|k| (0..=n).map(|j| coef[k][j] * cand.values[s[j]]).sum())
            .collect();
        let l = &cand.gradient_bounds[i];
        for k in 0..n {
            gradient_margin = gradient_margin.min(l[k] - grad[k].abs());
        }
        let l_sum: f64 = l.iter().sum();
        for j in 0..=n {
            let fx = &data.f[s[j]];
            let lie: f64 = (0..n).map(|k| grad[k] * fx[k]).sum();
            let lhs = lie + 0.5 * g.c[j] * beta.beta[i] * l_sum;
            decrease = decrease.min(-data.norm[s[j]] - lhs);
        }
        gradients.push(grad);
    }

    let locator = Locator::new(t);
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut sample_margin = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..SAMPLE_COUNT {
        let x: Vec<f64> = m
            .domain()
            .iter()
            .map(|iv| rng.gen_range(iv.lo..=iv.hi))
            .collect();
        let (i, _) = locator.locate(&x).map_err(|e| e.to_string())?;
        let fx = m.eval(&x).map_err(|e| e.to_string())?;
        let lie: f64 = gradients[i].iter().zip(&fx).map(|(g, f)| g * f).sum();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let margin = -norm - lie;
        if margin < -CERT_TOL {
            violations += 1;
        }
        sample_margin = sample_margin.min(margin);
    }

    let valid = positivity >= -CERT_TOL
        && gradient_margin >= -CERT_TOL
        && decrease >= -CERT_TOL
        && violations == 0;
    Ok(CertificateReport {
        valid,
        positivity_margin: positivity,
        gradient_margin,
        decrease_margin: decrease,
        sample_margin,
        samples: SAMPLE_COUNT,
        sample_violations: violations,
        problem: None,
    })
}
