//! Conforming simplicial triangulations of box domains.
//!
//! A [`Triangulation`] stores vertex coordinates and simplices as flat
//! arrays. Whenever a simplex has the origin as a vertex, that vertex is
//! kept at local position 0.

mod delaunay;
mod geometry;
mod grid;
mod io;
mod locate;
mod refine;

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;

pub use delaunay::build_delaunay_mesh;
pub use geometry::{cpa_gradient, simplex_geometry, SimplexGeometry};
pub use grid::build_grid_mesh;
pub use io::MeshFile;
pub use locate::Locator;

/// Coordinates within this distance of zero are treated as the origin.
pub const ORIGIN_TOL: f64 = 1e-12;
/// Edge lengths closer than this are compared by vertex indices instead.
pub const EDGE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("spacing {spacing} does not divide axis {axis} of length {length}")]
    SpacingDoesNotDivide {
        axis: usize,
        spacing: f64,
        length: f64,
    },
    #[error("origin is not a lattice point along axis {axis}")]
    OriginNotOnLattice { axis: usize },
    #[error("invalid spacing {spacing} on axis {axis}")]
    InvalidSpacing { axis: usize, spacing: f64 },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("simplex {simplex} references vertex {vertex}, but the mesh has {count} vertices")]
    VertexOutOfRange {
        simplex: usize,
        vertex: usize,
        count: usize,
    },
    #[error("simplex index {0} out of range")]
    SimplexOutOfRange(usize),
    #[error("simplex {0} is degenerate")]
    DegenerateSimplex(usize),
    #[error("point {0:?} lies outside every simplex")]
    PointOutside(Vec<f64>),
    #[error("Delaunay triangulation failed: {0}")]
    Delaunay(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("mesh file error: {0}")]
    Format(String),
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    dim: usize,
    coords: Vec<f64>,
    simplices: Vec<usize>,
    origin: Option<usize>,
    adjacency: OnceLock<Vec<Option<usize>>>,
}

impl PartialEq for Triangulation {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.coords == other.coords && self.simplices == other.simplices
    }
}

impl Triangulation {
    /// Builds a triangulation from explicit vertices and simplices,
    /// validating indices and affine independence. Simplices touching the
    /// origin are reordered so the origin is local vertex 0.
    pub fn new(
        dim: usize,
        vertices: &[Vec<f64>],
        simplices: &[Vec<usize>],
    ) -> Result<Self, MeshError> {
        if dim == 0 {
            return Err(MeshError::UnsupportedDimension(0));
        }
        let mut coords = Vec::with_capacity(vertices.len() * dim);
        for v in vertices {
            if v.len() != dim {
                return Err(MeshError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            coords.extend_from_slice(v);
        }
        let mut flat = Vec::with_capacity(simplices.len() * (dim + 1));
        for (i, s) in simplices.iter().enumerate() {
            if s.len() != dim + 1 {
                return Err(MeshError::DimensionMismatch {
                    expected: dim + 1,
                    got: s.len(),
                });
            }
            if let Some(&bad) = s.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange {
                    simplex: i,
                    vertex: bad,
                    count: vertices.len(),
                });
            }
            flat.extend_from_slice(s);
        }
        let t = Self::from_flat(dim, coords, flat);
        for i in 0..t.num_simplices() {
            if !t.is_nondegenerate(i) {
                return Err(MeshError::DegenerateSimplex(i));
            }
        }
        Ok(t)
    }

    /// Trusted constructor used by the mesh builders.
    pub(crate) fn from_flat(dim: usize, coords: Vec<f64>, simplices: Vec<usize>) -> Self {
        let mut t = Triangulation {
            dim,
            coords,
            simplices,
            origin: None,
            adjacency: OnceLock::new(),
        };
        t.origin =
            (0..t.num_vertices()).find(|&v| t.vertex(v).iter().all(|c| c.abs() <= ORIGIN_TOL));
        t.normalize_origin_order();
        t
    }

    pub(crate) fn normalize_origin_order(&mut self) {
        let Some(o) = self.origin else { return };
        let stride = self.dim + 1;
        for s in self.simplices.chunks_mut(stride) {
            if let Some(pos) = s.iter().position(|&v| v == o) {
                s.swap(0, pos);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len() / (self.dim + 1)
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    pub fn simplex(&self, i: usize) -> &[usize] {
        let stride = self.dim + 1;
        &self.simplices[i * stride..(i + 1) * stride]
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.simplices.chunks(self.dim + 1)
    }

    /// Index of the vertex at the origin, if any.
    pub fn origin_vertex(&self) -> Option<usize> {
        self.origin
    }

    /// Whether simplex `i` has the origin as a vertex.
    pub fn is_origin_simplex(&self, i: usize) -> bool {
        self.origin.is_some_and(|o| self.simplex(i)[0] == o)
    }

    /// `X_i`: rows `x_{i,j} - x_{i,0}` for `j = 1..=n`.
    pub fn edge_matrix(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim;
        let s = self.simplex(i);
        let x0 = self.vertex(s[0]);
        DMatrix::from_fn(n, n, |r, c| self.vertex(s[r + 1])[c] - x0[c])
    }

    pub fn volume(&self, i: usize) -> f64 {
        let fact: f64 = (1..=self.dim).map(|k| k as f64).product();
        self.edge_matrix(i).determinant().abs() / fact
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.num_simplices()).map(|i| self.volume(i)).sum()
    }

    pub fn max_edge_length(&self, i: usize) -> f64 {
        let s = self.simplex(i);
        let mut best = 0.0f64;
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                best = best.max(self.distance(s[a], s[b]));
            }
        }
        best
    }

    pub(crate) fn distance(&self, a: usize, b: usize) -> f64 {
        self.vertex(a)
            .iter()
            .zip(self.vertex(b))
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    }

    /// `|det X_i| > 1e-12 · (max edge)^n`.
    pub fn is_nondegenerate(&self, i: usize) -> bool {
        let scale = self.max_edge_length(i).powi(self.dim as i32);
        self.edge_matrix(i).determinant().abs() > 1e-12 * scale
    }

    /// Per-axis min/max over the vertices of simplex `i`.
    pub fn bounding_box(&self, i: usize) -> Vec<(f64, f64)> {
        let mut bb = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for &v in self.simplex(i) {
            for (k, &c) in self.vertex(v).iter().enumerate() {
                bb[k].0 = bb[k].0.min(c);
                bb[k].1 = bb[k].1.max(c);
            }
        }
        bb
    }

    /// Facet neighbours: entry `j` of simplex `i` is the simplex sharing the
    /// facet opposite local vertex `j`, or `None` on the boundary.
    pub fn neighbors(&self, i: usize) -> &[Option<usize>] {
        let stride = self.dim + 1;
        let adj = self.adjacency.get_or_init(|| self.compute_adjacency());
        &adj[i * stride..(i + 1) * stride]
    }

    fn compute_adjacency(&self) -> Vec<Option<usize>> {
        let stride = self.dim + 1;
        let mut adj = vec![None; self.simplices.len()];
        let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for (i, s) in self.simplices().enumerate() {
            for j in 0..stride {
                let key = facet_key(s, j);
                if let Some((other, oj)) = open.remove(&key) {
                    adj[i * stride + j] = Some(other);
                    adj[other * stride + oj] = Some(i);
                } else {
                    open.insert(key, (i, j));
                }
            }
        }
        adj
    }

    /// Combinatorial conformity check: every facet is shared by at most two
    /// simplices lying on opposite sides of it, and every unshared facet lies
    /// on the boundary of `domain`. Together with matching total volume this
    /// certifies a face-to-face tiling.
    pub fn check_conformity(&self, domain: &[(f64, f64)]) -> Result<(), String> {
        let stride = self.dim + 1;
        let mut seen: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (i, s) in self.simplices().enumerate() {
            for j in 0..stride {
                seen.entry(facet_key(s, j)).or_default().push((i, j));
            }
        }
        for (facet, owners) in &seen {
            match owners.as_slice() {
                [(i, _)] => {
                    let on_boundary = (0..self.dim).any(|k| {
                        let (lo, hi) = domain[k];
                        let tol = 1e-9 * (hi - lo).abs().max(1.0);
                        facet.iter().all(|&v| (self.vertex(v)[k] - lo).abs() <= tol)
                            || facet.iter().all(|&v| (self.vertex(v)[k] - hi).abs() <= tol)
                    });
                    if !on_boundary {
                        return Err(format!(
                            "facet {facet:?} of simplex {i} is unshared but interior"
                        ));
                    }
                }
                [(a, ja), (b, jb)] => {
                    let sa = self.side(*a, *ja, facet);
                    let sb = self.side(*b, *jb, facet);
                    if sa * sb >= 0.0 {
                        return Err(format!(
                            "simplices {a} and {b} overlap across facet {facet:?}"
                        ));
                    }
                }
                many => {
                    return Err(format!(
                        "facet {facet:?} shared by {} simplices",
                        many.len()
                    ))
                }
            }
        }
        Ok(())
    }

    /// Signed side of the opposite vertex relative to the facet hyperplane.
    fn side(&self, i: usize, j: usize, facet: &[usize]) -> f64 {
        let n = self.dim;
        let apex = self.vertex(self.simplex(i)[j]);
        let base = self.vertex(facet[0]);
        let m = DMatrix::from_fn(n, n, |r, c| {
            if r + 1 < n {
                self.vertex(facet[r + 1])[c] - base[c]
            } else {
                apex[c] - base[c]
            }
        });
        m.determinant()
    }

    /// Finds a simplex containing `x` and its barycentric coordinates.
    ///
    /// Brute-force scan below 10⁴ simplices; larger meshes go through a
    /// bucket [`Locator`].
    pub fn locate(&self, x: &[f64]) -> Result<(usize, Vec<f64>), MeshError> {
        if self.num_simplices() < 10_000 {
            locate::brute_force(self, x)
        } else {
            Locator::new(self).locate(x)
        }
    }

    /// Longest-edge bisection of simplex `i` with conformity propagation.
    pub fn refine_leb(&self, i: usize) -> Result<Triangulation, MeshError> {
        let mut t = self.clone();
        t.refine_leb_in_place(i)?;
        Ok(t)
    }

    pub fn refine_leb_in_place(&mut self, i: usize) -> Result<(), MeshError> {
        if i >= self.num_simplices() {
            return Err(MeshError::SimplexOutOfRange(i));
        }
        refine::bisect(self, i);
        self.adjacency = OnceLock::new();
        Ok(())
    }

    /// Global vertex pair of the longest edge of simplex `i`, using the
    /// deterministic tie-break.
    pub fn longest_edge(&self, i: usize) -> (usize, usize) {
        refine::longest_edge(self, self.simplex(i))
    }

    pub(crate) fn push_vertex(&mut self, x: &[f64]) -> usize {
        self.coords.extend_from_slice(x);
        self.num_vertices() - 1
    }

    pub(crate) fn simplices_mut(&mut self) -> &mut Vec<usize> {
        &mut self.simplices
    }
}

/// Sorted vertex list of the facet opposite local vertex `j`.
pub(crate) fn facet_key(s: &[usize], j: usize) -> Vec<usize> {
    let mut f: Vec<usize> = s
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &v)| v)
        .collect();
    f.sort_unstable();
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Triangulation {
        Triangulation::new(
            2,
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
            &[vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn origin_moves_to_local_zero() {
        let t = Triangulation::new(
            2,
            &[vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]],
            &[vec![0, 1, 2]],
        )
        .unwrap();
        assert_eq!(t.origin_vertex(), Some(1));
        assert_eq!(t.simplex(0)[0], 1);
        assert!(t.is_origin_simplex(0));
    }

    #[test]
    fn rejects_degenerate_and_bad_indices() {
        let err = Triangulation::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]],
            &[vec![0, 1, 2]],
        );
        assert_eq!(err.unwrap_err(), MeshError::DegenerateSimplex(0));
        let err = Triangulation::new(2, &[vec![0.0, 0.0]], &[vec![0, 1, 2]]);
        assert!(matches!(err, Err(MeshError::VertexOutOfRange { .. })));
    }

    #[test]
    fn adjacency_and_volume() {
        let t = unit_square();
        assert!((t.total_volume() - 1.0).abs() < 1e-15);
        let n0 = t.neighbors(0);
        assert_eq!(n0.iter().flatten().count(), 1);
        assert!(n0.contains(&Some(1)));
        assert!(t.check_conformity(&[(0.0, 1.0), (0.0, 1.0)]).is_ok());
    }

    #[test]
    fn conformity_detects_hanging_node() {
        // big triangle next to two small ones splitting the shared edge
        let t = Triangulation::new(
            2,
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
                vec![0.5, 0.5],
            ],
            &[vec![0, 1, 2], vec![0, 4, 3], vec![4, 2, 3]],
        )
        .unwrap();
        assert!(t.check_conformity(&[(0.0, 1.0), (0.0, 1.0)]).is_err());
    }
}
