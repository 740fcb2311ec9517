use super::{parse, Expr, ExprError, Interval};

/// Autonomous dynamics `ẋ = f(x)` on an axis-aligned box containing the
/// origin, with an equilibrium at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    name: String,
    components: Vec<Expr>,
    domain: Vec<Interval>,
}

const EQUILIBRIUM_TOL: f64 = 1e-9;

impl SystemModel {
    /// Parses and validates a model from dynamics strings.
    pub fn new(
        name: impl Into<String>,
        dynamics: &[impl AsRef<str>],
        domain: Vec<Interval>,
    ) -> Result<Self, ExprError> {
        let n = dynamics.len();
        let components = dynamics
            .iter()
            .map(|s| parse(s.as_ref(), n))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_exprs(name, components, domain)
    }

    pub fn from_exprs(
        name: impl Into<String>,
        components: Vec<Expr>,
        domain: Vec<Interval>,
    ) -> Result<Self, ExprError> {
        let n = components.len();
        if n == 0 {
            return Err(ExprError::InvalidModel("no dynamics components".into()));
        }
        if domain.len() != n {
            return Err(ExprError::DimensionMismatch {
                expected: n,
                got: domain.len(),
            });
        }
        for (q, c) in components.iter().enumerate() {
            if c.max_var() > n {
                return Err(ExprError::VariableOutOfRange {
                    index: c.max_var(),
                    dim: n,
                });
            }
            let range = c.interval_evaluate(&domain)?;
            if !range.lo.is_finite() || !range.hi.is_finite() {
                return Err(ExprError::InvalidModel(format!(
                    "component f{} is not bounded on the domain",
                    q + 1
                )));
            }
        }
        for (k, iv) in domain.iter().enumerate() {
            if !(iv.lo < 0.0 && 0.0 < iv.hi) {
                return Err(ExprError::InvalidModel(format!(
                    "origin is not interior to the domain along x{}: [{}, {}]",
                    k + 1,
                    iv.lo,
                    iv.hi
                )));
            }
        }
        let model = SystemModel {
            name: name.into(),
            components,
            domain,
        };
        let f0 = model.eval(&vec![0.0; n])?;
        if let Some((q, v)) = f0
            .iter()
            .enumerate()
            .find(|(_, v)| v.abs() > EQUILIBRIUM_TOL)
        {
            return Err(ExprError::InvalidModel(format!(
                "origin is not an equilibrium: f{}(0) = {v}",
                q + 1
            )));
        }
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    /// Evaluates `f(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, ExprError> {
        if x.len() != self.dim() {
            return Err(ExprError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        self.components.iter().map(|c| c.evaluate(x)).collect()
    }

    pub fn domain_volume(&self) -> f64 {
        self.domain.iter().map(Interval::width).product()
    }

    /// All second partials `∂²f_q/∂x_r∂x_s` for `r ≤ s` that are not
    /// identically zero, as `(q, r, s, expr)` with 1-based indices.
    pub fn second_partials(&self) -> Vec<(usize, usize, usize, Expr)> {
        let n = self.dim();
        let mut out = Vec::new();
        for (q, f) in self.components.iter().enumerate() {
            for r in 1..=n {
                let d = f.differentiate(r);
                if d.is_zero() {
                    continue;
                }
                for s in r..=n {
                    let dd = d.differentiate(s);
                    if !dd.is_zero() {
                        out.push((q + 1, r, s, dd));
                    }
                }
            }
        }
        out
    }
}
