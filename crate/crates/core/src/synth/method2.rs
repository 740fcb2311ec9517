//! Model-informed vertex placement: axis coordinates follow the convexity
//! segments of each univariate factor of the dynamics.

use super::{SynthError, SynthesisConfig};
use crate::expr::{decompose_univariate, Expr, Interval, SystemModel};

const SCAN_INTERVALS: usize = 512;
const ROOT_TOL: f64 = 1e-9;

/// Candidate vertex set: the Cartesian product of per-axis coordinates.
pub fn method2_vertices(
    m: &SystemModel,
    points_per_segment: usize,
    cfg: &SynthesisConfig,
) -> Result<Vec<Vec<f64>>, SynthError> {
    if points_per_segment < 2 {
        return Err(SynthError::Config(
            "points_per_segment must be at least 2".into(),
        ));
    }
    let axes = method2_axes(m, points_per_segment, cfg)?;
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

/// Sorted coordinate set for every axis.
pub fn method2_axes(
    m: &SystemModel,
    points_per_segment: usize,
    cfg: &SynthesisConfig,
) -> Result<Vec<Vec<f64>>, SynthError> {
    let n = m.dim();
    let comps = decompose_univariate(m)?;
    let mut axes = Vec::with_capacity(n);
    for k in 1..=n {
        let dom = m.domain()[k - 1];
        let mine: Vec<&Expr> = comps
            .iter()
            .filter(|c| c.variable == k)
            .map(|c| &c.expr)
            .collect();
        let mut coords = Vec::new();
        if mine.is_empty() {
            match cfg.linear_axis_spacing.get(&k) {
                Some(&h) => coords.extend(uniform_axis(dom, h)?),
                None => {
                    coords.extend(segment_points(dom.lo, 0.0, points_per_segment));
                    coords.extend(segment_points(0.0, dom.hi, points_per_segment));
                }
            }
        } else {
            for g in mine {
                let curvature = g.differentiate(k).differentiate(k);
                let mut breaks = vec![dom.lo];
                breaks.extend(roots(&curvature, k, n, dom)?);
                breaks.push(dom.hi);
                for w in breaks.windows(2) {
                    coords.extend(segment_points(w[0], w[1], points_per_segment));
                }
            }
        }
        let tol = 1e-9 * dom.width();
        coords.retain(|c| c.abs() >= cfg.prune_radius);
        coords.push(0.0);
        coords.sort_by(f64::total_cmp);
        coords.dedup_by(|a, b| (*a - *b).abs() <= tol);
        axes.push(coords);
    }
    Ok(axes)
}

fn segment_points(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| {
        if i + 1 == count {
            b
        } else {
            a + (b - a) * i as f64 / (count - 1) as f64
        }
    })
}

/// Multiples of `h` inside the interval, plus both endpoints.
fn uniform_axis(dom: Interval, h: f64) -> Result<Vec<f64>, SynthError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SynthError::Config(format!(
            "invalid linear axis spacing {h}"
        )));
    }
    let tol = 1e-9 * dom.width();
    let mut out = vec![dom.lo, dom.hi];
    let lo = (dom.lo / h).ceil() as i64;
    let hi = (dom.hi / h).floor() as i64;
    for i in lo..=hi {
        let c = i as f64 * h;
        if c > dom.lo + tol && c < dom.hi - tol {
            out.push(c);
        }
    }
    Ok(out)
}

/// Interior roots of a univariate expression in `x_k`: sign changes on a
/// uniform scan refined by bisection, and touching roots found as local
/// minima of `|g|` that fall below the tolerance.
pub(crate) fn roots(g: &Expr, k: usize, n: usize, dom: Interval) -> Result<Vec<f64>, SynthError> {
    let eval = |x: f64| -> Result<f64, SynthError> {
        let mut p = vec![0.0; n];
        p[k - 1] = x;
        let v = g.evaluate(&p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SynthError::RootFinding(format!(
                "{g} is not finite at x{k} = {x}"
            )))
        }
    };
    let xs: Vec<f64> = (0..=SCAN_INTERVALS)
        .map(|i| dom.lo + dom.width() * i as f64 / SCAN_INTERVALS as f64)
        .collect();
    let vs = xs.iter().map(|&x| eval(x)).collect::<Result<Vec<_>, _>>()?;

    let mut found = Vec::new();
    for i in 0..SCAN_INTERVALS {
        if vs[i] == 0.0 {
            found.push(xs[i]);
        } else if vs[i] * vs[i + 1] < 0.0 {
            let (mut a, mut b, mut fa) = (xs[i], xs[i + 1], vs[i]);
            for _ in 0..200 {
                if b - a <= ROOT_TOL {
                    break;
                }
                let mid = 0.5 * (a + b);
                let fm = eval(mid)?;
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fa * fm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            if b - a > ROOT_TOL {
                return Err(SynthError::RootFinding(format!(
                    "bisection stalled for {g}"
                )));
            }
            found.push(0.5 * (a + b));
        }
    }
    for i in 1..SCAN_INTERVALS {
        let (l, c, r) = (vs[i - 1].abs(), vs[i].abs(), vs[i + 1].abs());
        if c <= l && c <= r && c != 0.0 && vs[i - 1] * vs[i + 1] > 0.0 {
            let (x, v) = golden_min(&|x| eval(x).map(f64::abs), xs[i - 1], xs[i + 1])?;
            if v < ROOT_TOL {
                found.push(x);
            }
        }
    }
    found.sort_by(f64::total_cmp);
    let merge = 1e-6 * dom.width().max(1.0);
    found.dedup_by(|a, b| (*a - *b).abs() <= merge);
    let edge = 1e-9 * dom.width();
    found.retain(|&x| x > dom.lo + edge && x < dom.hi - edge);
    Ok(found)
}

fn golden_min(
    f: &dyn Fn(f64) -> Result<f64, SynthError>,
    mut a: f64,
    mut b: f64,
) -> Result<(f64, f64), SynthError> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > ROOT_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}
