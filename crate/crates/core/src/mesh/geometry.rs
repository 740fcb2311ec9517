use nalgebra::{DMatrix, DVector};

use super::{MeshError, Triangulation};

#[derive(Debug, Clone)]
pub struct SimplexGeometry {
    /// Rows `x_{i,j} - x_{i,0}`, `j = 1..=n`.
    pub x: DMatrix<f64>,
    pub x_inv: DMatrix<f64>,
    /// Interpolation-error weights, one per local vertex.
    pub c: Vec<f64>,
    /// Local vertex indices of the longest edge and its length.
    pub longest_edge: (usize, usize, f64),
}

pub fn simplex_geometry(t: &Triangulation, i: usize) -> Result<SimplexGeometry, MeshError> {
    if i >= t.num_simplices() {
        return Err(MeshError::SimplexOutOfRange(i));
    }
    if !t.is_nondegenerate(i) {
        return Err(MeshError::DegenerateSimplex(i));
    }
    let x = t.edge_matrix(i);
    let x_inv = x
        .clone()
        .try_inverse()
        .ok_or(MeshError::DegenerateSimplex(i))?;

    let n = t.dim();
    let s = t.simplex(i);
    let mut dist = vec![vec![0.0; n + 1]; n + 1];
    for a in 0..=n {
        for b in a + 1..=n {
            let d = t.distance(s[a], s[b]);
            dist[a][b] = d;
            dist[b][a] = d;
        }
    }
    let nf = n as f64;
    let c = if t.is_origin_simplex(i) {
        let reach = (1..=n).map(|k| dist[0][k]).fold(0.0, f64::max);
        (0..=n)
            .map(|j| nf * dist[j][0] * (reach + dist[j][0]))
            .collect()
    } else {
        (0..=n)
            .map(|j| nf * dist[j].iter().map(|d| d * d).fold(0.0, f64::max))
            .collect()
    };

    let (ga, gb) = t.longest_edge(i);
    let la = s.iter().position(|&v| v == ga).unwrap();
    let lb = s.iter().position(|&v| v == gb).unwrap();
    Ok(SimplexGeometry {
        x,
        x_inv,
        c,
        longest_edge: (la, lb, dist[la][lb]),
    })
}

/// Gradient of the affine interpolant of vertex values `w` on simplex `i`.
pub fn cpa_gradient(t: &Triangulation, i: usize, w: &[f64]) -> Result<Vec<f64>, MeshError> {
    if w.len() != t.num_vertices() {
        return Err(MeshError::DimensionMismatch {
            expected: t.num_vertices(),
            got: w.len(),
        });
    }
    let g = simplex_geometry(t, i)?;
    let s = t.simplex(i);
    let wbar = DVector::from_fn(t.dim(), |j, _| w[s[j + 1]] - w[s[0]]);
    Ok((g.x_inv * wbar).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn single(v: &[[f64; 2]; 3]) -> Triangulation {
        let verts: Vec<Vec<f64>> = v.iter().map(|p| p.to_vec()).collect();
        Triangulation::new(2, &verts, &[vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn origin_simplex_weights() {
        let h = 0.3;
        let t = single(&[[0.0, 0.0], [h, 0.0], [h, h]]);
        let g = simplex_geometry(&t, 0).unwrap();
        assert_eq!(g.c[0], 0.0);
        assert_relative_eq!(g.c[1], 2.0 * h * h * (1.0 + 2f64.sqrt()), epsilon = 1e-14);
        assert_relative_eq!(
            g.c[2],
            2.0 * h * 2f64.sqrt() * (h * 2f64.sqrt() + h * 2f64.sqrt()),
            epsilon = 1e-14
        );
        assert_relative_eq!(g.longest_edge.2, h * 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn general_simplex_weights() {
        let t = single(&[[1.0, 0.0], [2.0, 0.0], [2.0, 1.0]]);
        let g = simplex_geometry(&t, 0).unwrap();
        assert_relative_eq!(g.c[0], 4.0, epsilon = 1e-14);
        assert!(g.c.iter().all(|&c| c >= 0.0));
        let prod = &g.x * &g.x_inv;
        assert!((prod - DMatrix::identity(2, 2)).abs().max() < 1e-9);
    }

    #[test]
    fn gradient_examples() {
        let t = single(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(
            cpa_gradient(&t, 0, &[0.0, 1.0, 2.0]).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            cpa_gradient(&t, 0, &[3.0, 3.0, 3.0]).unwrap(),
            vec![0.0, 0.0]
        );
        let t = single(&[[1.0, 1.0], [2.0, 1.0], [1.0, 3.0]]);
        let g = cpa_gradient(&t, 0, &[0.0, 2.0, 4.0]).unwrap();
        assert_relative_eq!(g[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_simplex_is_rejected() {
        let t = Triangulation::from_flat(2, vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0], vec![0, 1, 2]);
        assert!(matches!(
            simplex_geometry(&t, 0),
            Err(MeshError::DegenerateSimplex(0))
        ));
    }

    proptest! {
        #[test]
        fn gradient_reproduces_affine_function(
            pts in proptest::collection::vec(-2.0f64..2.0, 6),
            a in -3.0f64..3.0, b in -3.0f64..3.0, c0 in -1.0f64..1.0,
        ) {
            let verts: Vec<Vec<f64>> = pts.chunks(2).map(|p| p.to_vec()).collect();
            let Ok(t) = Triangulation::new(2, &verts, &[vec![0, 1, 2]]) else { return Ok(()) };
            let area = t.volume(0);
            prop_assume!(area > 1e-3);
            let w: Vec<f64> = verts.iter().map(|p| a * p[0] + b * p[1] + c0).collect();
            let g = cpa_gradient(&t, 0, &w).unwrap();
            let scale = 1.0 / area;
            prop_assert!((g[0] - a).abs() < 1e-9 * scale);
            prop_assert!((g[1] - b).abs() < 1e-9 * scale);
        }
    }
}
