//! Splitting dynamics into univariate factors for model-informed meshing.

use super::{Expr, ExprError, SystemModel};

/// A non-affine univariate factor `g(xk)` found in dynamics component `source`.
///
/// Both `variable` and `source` are 1-based (`xk`, `fq`).
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateComponent {
    pub variable: usize,
    pub expr: Expr,
    pub source: usize,
}

/// Collects every distinct non-affine univariate factor of the model.
///
/// Each component must be a sum of terms, each term a product of a constant
/// and univariate factors; factors of the same variable within one term are
/// multiplied together before the affinity check.
pub fn decompose_univariate(model: &SystemModel) -> Result<Vec<UnivariateComponent>, ExprError> {
    let mut out: Vec<UnivariateComponent> = Vec::new();
    for (q, f) in model.components().iter().enumerate() {
        for c in decompose_component(f, q + 1)? {
            if !out
                .iter()
                .any(|o| o.variable == c.variable && o.expr == c.expr)
            {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Decomposition of a single dynamics component (`source` is 1-based).
pub fn decompose_component(f: &Expr, source: usize) -> Result<Vec<UnivariateComponent>, ExprError> {
    let mut terms = Vec::new();
    collect_terms(f, &mut terms);
    let mut out: Vec<UnivariateComponent> = Vec::new();
    for term in terms {
        if term.variables().is_empty() || is_affine(term) {
            continue;
        }
        let mut factors = Vec::new();
        collect_factors(term, &mut factors);
        let mut grouped: Vec<(usize, Expr)> = Vec::new();
        for factor in factors {
            let vars = factor.variables();
            match vars.as_slice() {
                [] => {}
                [k] => match grouped.iter_mut().find(|(v, _)| v == k) {
                    Some((_, g)) => {
                        *g = Expr::Mul(Box::new(g.clone()), Box::new(factor));
                    }
                    None => grouped.push((*k, factor)),
                },
                _ => {
                    return Err(ExprError::UnsupportedDecomposition {
                        component: source,
                        term: term.to_string(),
                    })
                }
            }
        }
        for (k, g) in grouped {
            let curvature = g.differentiate(k).differentiate(k);
            if curvature.is_zero() {
                continue;
            }
            if !out.iter().any(|o| o.variable == k && o.expr == g) {
                out.push(UnivariateComponent {
                    variable: k,
                    expr: g,
                    source,
                });
            }
        }
    }
    Ok(out)
}

fn collect_terms<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            collect_terms(a, out);
            collect_terms(b, out);
        }
        Expr::Neg(a) => collect_terms(a, out),
        _ => out.push(e),
    }
}

fn collect_factors(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Mul(a, b) => {
            collect_factors(a, out);
            collect_factors(b, out);
        }
        Expr::Neg(a) => collect_factors(a, out),
        Expr::Div(a, b) => {
            collect_factors(a, out);
            if !b.variables().is_empty() {
                out.push(Expr::Div(Box::new(Expr::Num(1.0)), b.clone()));
            }
        }
        _ => out.push(e.clone()),
    }
}

fn is_affine(term: &Expr) -> bool {
    let vars = term.variables();
    vars.iter().all(|&r| {
        let d = term.differentiate(r);
        vars.iter().all(|&s| d.differentiate(s).is_zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Interval};

    fn model(dynamics: &[&str], half_width: f64) -> SystemModel {
        let n = dynamics.len();
        SystemModel::new(
            "test",
            dynamics,
            vec![Interval::new(-half_width, half_width); n],
        )
        .unwrap()
    }

    #[test]
    fn pendulum_isolates_sine() {
        let m = model(&["x2", "-sin(x1)-x2"], 1.5);
        let comps = decompose_univariate(&m).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].variable, 1);
        assert_eq!(comps[0].expr, parse("sin(x1)", 2).unwrap());
        assert_eq!(comps[0].source, 2);
    }

    #[test]
    fn polynomial_first_component() {
        let f1 = parse("0.3*x1^5-0.5*x2^4-0.5*x1", 2).unwrap();
        let comps = decompose_component(&f1, 1).unwrap();
        let got: Vec<(usize, String)> = comps
            .iter()
            .map(|c| (c.variable, c.expr.to_string()))
            .collect();
        assert_eq!(got, vec![(1, "x1^5".to_string()), (2, "x2^4".to_string())]);
    }

    #[test]
    fn linear_system_has_no_components() {
        let m = model(&["-x1"], 1.0);
        assert!(decompose_univariate(&m).unwrap().is_empty());
    }

    #[test]
    fn mixed_products_split_per_variable() {
        let f = parse("-0.5*x1-1.25*x2-x2^3*x1", 2).unwrap();
        let comps = decompose_component(&f, 2).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(
            (comps[0].variable, comps[0].expr.to_string()),
            (2, "x2^3".into())
        );

        let f = parse("0.5*x1^4*sin(x2)+0.3*x2", 2).unwrap();
        let comps = decompose_component(&f, 1).unwrap();
        let vars: Vec<usize> = comps.iter().map(|c| c.variable).collect();
        assert_eq!(vars, vec![1, 2]);
    }

    #[test]
    fn repeated_variable_factors_are_grouped() {
        let f = parse("x1*x1*x2", 2).unwrap();
        let comps = decompose_component(&f, 1).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].variable, 1);
    }

    #[test]
    fn multivariate_subexpression_is_unsupported() {
        let f = parse("sin(x1+x2)", 2).unwrap();
        assert!(matches!(
            decompose_component(&f, 1),
            Err(ExprError::UnsupportedDecomposition { component: 1, .. })
        ));
    }

    #[test]
    fn affine_multivariate_terms_are_skipped() {
        let f = parse("0.5*(x1+x2)-x1^2", 2).unwrap();
        let comps = decompose_component(&f, 1).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].expr.to_string(), "x1^2");
    }
}
