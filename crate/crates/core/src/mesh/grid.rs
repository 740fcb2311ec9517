use super::{MeshError, Triangulation};
use crate::expr::Interval;

const LATTICE_TOL: f64 = 1e-9;

/// Uniform lattice on a box with each cell split into `n!` simplices by the
/// standard triangulation reflected about the origin: the cell corner
/// closest to the origin is shared by all of the cell's simplices.
///
/// Every simplex of a cell touching the origin therefore has the origin as a
/// vertex.
pub fn build_grid_mesh(domain: &[Interval], spacing: &[f64]) -> Result<Triangulation, MeshError> {
    let n = domain.len();
    if n == 0 {
        return Err(MeshError::UnsupportedDimension(0));
    }
    if spacing.len() != n {
        return Err(MeshError::DimensionMismatch {
            expected: n,
            got: spacing.len(),
        });
    }
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut origin_idx = Vec::with_capacity(n);
    for (k, (iv, &h)) in domain.iter().zip(spacing).enumerate() {
        if !(h.is_finite() && h > 0.0) {
            return Err(MeshError::InvalidSpacing {
                axis: k,
                spacing: h,
            });
        }
        let cells = lattice_count(iv.width() / h).ok_or(MeshError::SpacingDoesNotDivide {
            axis: k,
            spacing: h,
            length: iv.width(),
        })?;
        let below = lattice_count(-iv.lo / h).ok_or(MeshError::OriginNotOnLattice { axis: k })?;
        if below == 0 || below >= cells {
            return Err(MeshError::OriginNotOnLattice { axis: k });
        }
        let mut coords: Vec<f64> = (0..=cells).map(|i| (i as f64 - below as f64) * h).collect();
        coords[0] = iv.lo;
        coords[cells] = iv.hi;
        coords[below] = 0.0;
        axes.push(coords);
        origin_idx.push(below);
    }

    let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
    let num_vertices: usize = sizes.iter().product();
    let mut coords = Vec::with_capacity(num_vertices * n);
    for v in 0..num_vertices {
        let idx = unflatten(v, &sizes);
        coords.extend(idx.iter().zip(&axes).map(|(&i, a)| a[i]));
    }

    let perms = permutations(n);
    let cell_sizes: Vec<usize> = sizes.iter().map(|s| s - 1).collect();
    let num_cells: usize = cell_sizes.iter().product();
    let mut simplices = Vec::with_capacity(num_cells * perms.len() * (n + 1));
    let mut corner = vec![0usize; n];
    for c in 0..num_cells {
        let cell = unflatten(c, &cell_sizes);
        let mut step = vec![0isize; n];
        for k in 0..n {
            if cell[k] >= origin_idx[k] {
                corner[k] = cell[k];
                step[k] = 1;
            } else {
                corner[k] = cell[k] + 1;
                step[k] = -1;
            }
        }
        for p in &perms {
            let mut cur = corner.clone();
            simplices.push(flatten(&cur, &sizes));
            for &axis in p {
                cur[axis] = (cur[axis] as isize + step[axis]) as usize;
                simplices.push(flatten(&cur, &sizes));
            }
        }
    }
    Ok(Triangulation::from_flat(n, coords, simplices))
}

fn lattice_count(ratio: f64) -> Option<usize> {
    let r = ratio.round();
    ((ratio - r).abs() <= LATTICE_TOL * ratio.abs().max(1.0) && r >= 0.0).then_some(r as usize)
}

fn unflatten(mut v: usize, sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .map(|&s| {
            let i = v % s;
            v /= s;
            i
        })
        .collect()
}

fn flatten(idx: &[usize], sizes: &[usize]) -> usize {
    idx.iter()
        .zip(sizes)
        .rev()
        .fold(0, |acc, (&i, &s)| acc * s + i)
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| cur[i] < cur[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sym(h: f64, n: usize) -> Vec<Interval> {
        vec![Interval::new(-h, h); n]
    }

    #[test]
    fn counts_match_lattice_formula() {
        let t = build_grid_mesh(&sym(1.0, 2), &[1.0, 1.0]).unwrap();
        assert_eq!((t.num_vertices(), t.num_simplices()), (9, 8));
        let t = build_grid_mesh(&sym(1.0, 3), &[0.5; 3]).unwrap();
        assert_eq!((t.num_vertices(), t.num_simplices()), (125, 384));
        let t = build_grid_mesh(&sym(1.0, 1), &[1.0]).unwrap();
        assert_eq!((t.num_vertices(), t.num_simplices()), (3, 2));
        let t = build_grid_mesh(&sym(PI / 2.0, 2), &[PI / 8.0; 2]).unwrap();
        assert_eq!((t.num_vertices(), t.num_simplices()), (81, 128));
    }

    #[test]
    fn rejects_non_dividing_spacing_and_off_lattice_origin() {
        assert!(matches!(
            build_grid_mesh(&sym(1.0, 2), &[0.3, 0.3]),
            Err(MeshError::SpacingDoesNotDivide { axis: 0, .. })
        ));
        let dom = vec![Interval::new(-0.5, 1.5); 2];
        assert!(matches!(
            build_grid_mesh(&dom, &[1.0, 1.0]),
            Err(MeshError::OriginNotOnLattice { axis: 0 })
        ));
        assert!(matches!(
            build_grid_mesh(&sym(1.0, 2), &[0.0, 1.0]),
            Err(MeshError::InvalidSpacing { .. })
        ));
    }

    #[test]
    fn origin_cells_share_the_origin() {
        let t = build_grid_mesh(&sym(1.0, 2), &[0.5, 0.5]).unwrap();
        let o = t.origin_vertex().unwrap();
        let touching = (0..t.num_simplices())
            .filter(|&i| {
                t.bounding_box(i)
                    .iter()
                    .all(|&(lo, hi)| lo <= 0.0 && 0.0 <= hi)
            })
            .count();
        let with_origin = (0..t.num_simplices())
            .filter(|&i| t.simplex(i).contains(&o))
            .count();
        assert_eq!(touching, 8);
        assert_eq!(with_origin, 8);
        for i in 0..t.num_simplices() {
            if t.simplex(i).contains(&o) {
                assert_eq!(t.simplex(i)[0], o);
            }
        }
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(1).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn grid_is_conforming_and_covers_box(
            n in 1usize..=3,
            below in proptest::collection::vec(1usize..4, 3),
            above in proptest::collection::vec(1usize..4, 3),
            h in 0.1f64..1.0,
        ) {
            let domain: Vec<Interval> = (0..n)
                .map(|k| Interval::new(-(below[k] as f64) * h, above[k] as f64 * h))
                .collect();
            let t = build_grid_mesh(&domain, &vec![h; n]).unwrap();
            let cells: usize = (0..n).map(|k| below[k] + above[k]).product();
            let fact: usize = (1..=n).product();
            prop_assert_eq!(t.num_simplices(), cells * fact);
            let vol: f64 = domain.iter().map(|i| i.width()).product();
            prop_assert!((t.total_volume() - vol).abs() <= 1e-9 * vol);
            let bounds: Vec<(f64, f64)> = domain.iter().map(|i| (i.lo, i.hi)).collect();
            prop_assert!(t.check_conformity(&bounds).is_ok());
            for i in 0..t.num_simplices() {
                prop_assert!(t.is_nondegenerate(i));
            }
        }
    }
}
