use std::fmt::Write;

use super::{LinearProgram, Relation};

pub(super) fn write(p: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let col = |v: usize| sanitize(p.name(v));
    writeln!(out, "NAME {}", sanitize(name)).unwrap();
    out.push_str("ROWS\n N obj\n");
    for (i, c) in p.constraints().iter().enumerate() {
        let kind = match c.relation {
            Relation::Le => 'L',
            Relation::Ge => 'G',
            Relation::Eq => 'E',
        };
        writeln!(out, " {kind} r{i}").unwrap();
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.num_variables()];
    for (i, c) in p.constraints().iter().enumerate() {
        for &(v, a) in &c.coeffs {
            by_col[v].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    for (v, entries) in by_col.iter().enumerate() {
        let cost = p.objective()[v];
        if cost != 0.0 || entries.is_empty() {
            writeln!(out, " {} obj {:e}", col(v), cost).unwrap();
        }
        for &(i, a) in entries {
            writeln!(out, " {} r{i} {:e}", col(v), a).unwrap();
        }
    }
    out.push_str("RHS\n");
    for (i, c) in p.constraints().iter().enumerate() {
        if c.rhs != 0.0 {
            writeln!(out, " rhs r{i} {:e}", c.rhs).unwrap();
        }
    }
    out.push_str("BOUNDS\n");
    for v in 0..p.num_variables() {
        let (lo, hi) = (p.lower()[v], p.upper()[v]);
        let name = col(v);
        match (lo.is_finite(), hi.is_finite()) {
            _ if lo == hi => writeln!(out, " FX bnd {name} {lo:e}").unwrap(),
            (false, false) => writeln!(out, " FR bnd {name}").unwrap(),
            (false, true) => {
                writeln!(out, " MI bnd {name}").unwrap();
                writeln!(out, " UP bnd {name} {hi:e}").unwrap();
            }
            (true, fin_hi) => {
                if lo != 0.0 {
                    writeln!(out, " LO bnd {name} {lo:e}").unwrap();
                }
                if fin_hi {
                    writeln!(out, " UP bnd {name} {hi:e}").unwrap();
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn sections_and_bounds() {
        let mut p = LinearProgram::new();
        let x = p.add_variable("V[0]", 0.0, 0.0);
        let y = p.add_variable("u 1", -1.0, f64::INFINITY);
        let z = p.add_variable("l[0,1]", f64::NEG_INFINITY, f64::INFINITY);
        p.set_objective(y, 1.0);
        p.add_constraint(vec![(x, 1.0), (z, -2.5)], Relation::Le, 3.0);
        p.add_constraint(vec![(y, 1.0)], Relation::Ge, 0.0);
        let text = p.to_mps("demo");
        for needle in [
            "NAME demo",
            " L r0",
            " G r1",
            " u_1 obj 1e0",
            " l[0,1] r0 -2.5e0",
            " rhs r0 3e0",
            " FX bnd V[0] 0e0",
            " LO bnd u_1 -1e0",
            " FR bnd l[0,1]",
            "ENDATA",
        ] {
            assert!(text.contains(needle), "missing {needle:?} in\n{text}");
        }
    }
}
