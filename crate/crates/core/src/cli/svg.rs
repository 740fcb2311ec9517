use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use super::CliError;
use crate::cert::CpaCandidate;
use crate::expr::SystemModel;
use crate::mesh::Triangulation;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const QUIVER: usize = 20;
const LEVELS: usize = 8;

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(m: &SystemModel) -> Self {
        let d = m.domain();
        let scale = (SIZE - 2.0 * MARGIN) / d[0].width().max(d[1].width());
        Frame {
            x0: d[0].lo,
            y0: d[1].lo,
            scale,
            height: d[1].width() * scale + 2.0 * MARGIN,
        }
    }

    fn px(&self, p: &[f64]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.x0) * self.scale,
            self.height - MARGIN - (p[1] - self.y0) * self.scale,
        )
    }
}

/// Planar mesh over a quiver plot of the dynamics, with level curves of the
/// candidate when one is supplied.
pub fn render_svg(
    t: &Triangulation,
    m: &SystemModel,
    candidate: Option<&CpaCandidate>,
) -> Result<String, CliError> {
    if t.dim() != 2 || m.dim() != 2 {
        return Err(CliError::Unsupported(format!(
            "SVG export needs a planar mesh, got dimension {}",
            t.dim()
        )));
    }
    let fr = Frame::new(m);
    let d = m.domain();
    let width = d[0].width() * fr.scale + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{:.1}" viewBox="0 0 {width:.1} {:.1}">"#,
        fr.height, fr.height
    );
    s.push_str(
        "<style>.edge{stroke:#555;stroke-width:0.6}.arrow{stroke:#3a6fb0;stroke-width:1}\
         .level{stroke:#c0392b;stroke-width:1;fill:none}.domain{stroke:#000;fill:none}</style>\n",
    );

    let (ax, ay) = fr.px(&[d[0].lo, d[1].hi]);
    let _ = writeln!(
        s,
        r#"<rect class="domain" x="{ax:.2}" y="{ay:.2}" width="{:.2}" height="{:.2}"/>"#,
        d[0].width() * fr.scale,
        d[1].width() * fr.scale
    );

    let mut edges = BTreeSet::new();
    for simplex in t.simplices() {
        for a in 0..3 {
            for b in a + 1..3 {
                edges.insert((simplex[a].min(simplex[b]), simplex[a].max(simplex[b])));
            }
        }
    }
    for (a, b) in edges {
        let (x1, y1) = fr.px(t.vertex(a));
        let (x2, y2) = fr.px(t.vertex(b));
        let _ = writeln!(
            s,
            r#"<line class="edge" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        );
    }

    let mut field = Vec::with_capacity(QUIVER * QUIVER);
    for i in 0..QUIVER {
        for j in 0..QUIVER {
            let p = [
                d[0].lo + d[0].width() * (i as f64 + 0.5) / QUIVER as f64,
                d[1].lo + d[1].width() * (j as f64 + 0.5) / QUIVER as f64,
            ];
            field.push((
                p,
                m.eval(&p)
                    .map_err(|e| CliError::Unsupported(e.to_string()))?,
            ));
        }
    }
    let fmax = field
        .iter()
        .map(|(_, f)| f[0].hypot(f[1]))
        .fold(0.0, f64::max);
    let cell = (SIZE - 2.0 * MARGIN) / QUIVER as f64 * 0.8;
    for (p, f) in &field {
        let (x1, y1) = fr.px(p);
        let k = if fmax > 0.0 { cell / fmax } else { 0.0 };
        let (x2, y2) = (x1 + f[0] * k, y1 - f[1] * k);
        let _ = writeln!(
            s,
            r#"<line class="arrow" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        );
    }

    if let Some(c) = candidate {
        if c.values.len() != t.num_vertices() {
            return Err(CliError::Unsupported(
                "candidate does not match the mesh".into(),
            ));
        }
        let vmax = c.values.iter().copied().fold(0.0, f64::max);
        for l in 1..=LEVELS {
            let level = vmax * l as f64 / (LEVELS + 1) as f64;
            for simplex in t.simplices() {
                let pts = crossing(t, &c.values, simplex, level);
                if pts.len() == 2 {
                    let (x1, y1) = fr.px(&pts[0]);
                    let (x2, y2) = fr.px(&pts[1]);
                    let _ = writeln!(
                        s,
                        r#"<line class="level" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Points where the affine interpolant of a triangle crosses `level`.
fn crossing(t: &Triangulation, v: &[f64], s: &[usize], level: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        let (va, vb) = (v[s[a]] - level, v[s[b]] - level);
        if (va < 0.0) != (vb < 0.0) {
            let r = va / (va - vb);
            let (pa, pb) = (t.vertex(s[a]), t.vertex(s[b]));
            out.push([pa[0] + r * (pb[0] - pa[0]), pa[1] + r * (pb[1] - pa[1])]);
        }
    }
    out
}

pub fn emit_svg(
    t: &Triangulation,
    m: &SystemModel,
    candidate: Option<&CpaCandidate>,
    path: &Path,
) -> Result<(), CliError> {
    let text = render_svg(t, m, candidate)?;
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::bench::{system_a, system_d};
    use crate::expr::Interval;
    use crate::mesh::build_grid_mesh;

    #[test]
    fn grid_mesh_edges() {
        let m = system_a();
        let t = build_grid_mesh(m.domain(), &[std::f64::consts::FRAC_PI_2; 2]).unwrap();
        let svg = render_svg(&t, &m, None).unwrap();
        assert_eq!(svg.matches(r#"class="edge""#).count(), 16);
        assert_eq!(svg.matches(r#"class="arrow""#).count(), 400);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn zero_field_draws_points() {
        let m =
            SystemModel::new("z", &["0*x1", "0*x2"], vec![Interval::new(-1.0, 1.0); 2]).unwrap();
        let t = build_grid_mesh(m.domain(), &[1.0, 1.0]).unwrap();
        let svg = render_svg(&t, &m, None).unwrap();
        for line in svg.lines().filter(|l| l.contains("arrow\" x1")) {
            let nums: Vec<&str> = line.split('"').collect();
            assert_eq!(nums[3], nums[7]);
            assert_eq!(nums[5], nums[9]);
        }
    }

    #[test]
    fn level_curves_for_norm_like_values() {
        let m = system_a();
        let t = build_grid_mesh(m.domain(), &[std::f64::consts::FRAC_PI_4; 2]).unwrap();
        let values = t.vertices().map(|x| x[0].abs() + x[1].abs()).collect();
        let c = CpaCandidate {
            values,
            gradient_bounds: vec![vec![1.0; 2]; t.num_simplices()],
            slacks: None,
        };
        let svg = render_svg(&t, &m, Some(&c)).unwrap();
        assert!(svg.matches(r#"class="level""#).count() > 0);
    }

    #[test]
    fn three_dimensions_are_rejected() {
        let m = system_d();
        let t = build_grid_mesh(m.domain(), &[1.0; 3]).unwrap();
        assert!(matches!(
            render_svg(&t, &m, None),
            Err(CliError::Unsupported(_))
        ));
    }
}
