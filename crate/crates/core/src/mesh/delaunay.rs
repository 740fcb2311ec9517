//! Incremental Bowyer-Watson triangulation for n = 2, 3.
//!
//! Each point carries a tiny deterministic weight, so the result is the
//! regular triangulation of a generic perturbation of the lifted points.
//! Cospherical configurations such as tensor-product grids then triangulate
//! without flat simplices. The hull is closed by simplices through a
//! symbolic vertex at infinity.

use std::collections::HashMap;

use super::{MeshError, Triangulation};

const NONE: usize = usize::MAX;
const WEIGHT_SCALE: f64 = 1e-10;

type P = [f64; 3];

fn sub(a: &P, b: &P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &P, b: &P) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det(rows: &[P], n: usize) -> f64 {
    match n {
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => {
            let [a, b, c] = [rows[0], rows[1], rows[2]];
            a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0])
        }
        _ => unreachable!(),
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Solves the small dense system `a · x = b` (rows of `a` augmented by `b`).
fn solve(a: &mut [[f64; 4]; 3], m: usize) -> Option<P> {
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..=m {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x = [0.0; 3];
    for k in 0..m {
        x[k] = a[k][m] / a[k][k];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

struct Builder {
    n: usize,
    /// Index of the symbolic vertex at infinity.
    inf: usize,
    pts: Vec<P>,
    weights: Vec<f64>,
    simp: Vec<[usize; 4]>,
    nbr: Vec<[usize; 4]>,
    alive: Vec<bool>,
    /// Orthocenter relative to local vertex 0 (finite simplices only).
    center: Vec<P>,
    free: Vec<usize>,
    allowed: Vec<bool>,
    in_cavity: Vec<bool>,
}

impl Builder {
    fn verts(&self, s: usize) -> &[usize] {
        &self.simp[s][..=self.n]
    }

    fn inf_pos(&self, s: usize) -> Option<usize> {
        self.verts(s).iter().position(|&v| v == self.inf)
    }

    fn orient(&self, v: &[usize]) -> f64 {
        let p0 = self.pts[v[0]];
        let rows: Vec<P> = v[1..].iter().map(|&u| sub(&self.pts[u], &p0)).collect();
        det(&rows, self.n)
    }

    fn max_edge(&self, v: &[usize]) -> f64 {
        let mut m = 0.0f64;
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                let d = sub(&self.pts[v[a]], &self.pts[v[b]]);
                m = m.max(dot(&d, &d));
            }
        }
        m.sqrt()
    }

    fn nondegenerate(&self, v: &[usize], o: f64) -> bool {
        o.abs() > 1e-12 * self.max_edge(v).powi(self.n as i32)
    }

    /// Orthocenter of the finite vertices `v`, relative to `v[0]`, within
    /// their affine hull.
    fn orthocenter(&self, v: &[usize]) -> Option<P> {
        let n = self.n;
        let m = v.len() - 1;
        let p0 = self.pts[v[0]];
        let d: Vec<P> = v[1..].iter().map(|&u| sub(&self.pts[u], &p0)).collect();
        let mut a = [[0.0; 4]; 3];
        for i in 0..m {
            for k in 0..m {
                a[i][k] = 2.0 * if m == n { d[i][k] } else { dot(&d[i], &d[k]) };
            }
            a[i][m] = dot(&d[i], &d[i]) - (self.weights[v[i + 1]] - self.weights[v[0]]);
        }
        let t = solve(&mut a, m)?;
        if m == n {
            return Some(t);
        }
        let mut c = [0.0; 3];
        for i in 0..m {
            for k in 0..n {
                c[k] += t[i] * d[i][k];
            }
        }
        Some(c)
    }

    fn power(&self, v0: usize, c: &P, q: usize) -> f64 {
        let d = sub(&self.pts[q], &self.pts[v0]);
        dot(&d, &d) - 2.0 * dot(&d, c) - self.weights[q] + self.weights[v0]
    }

    /// Whether `q` conflicts with simplex `s`. For a hull simplex this means
    /// `q` lies beyond its finite facet, or on that facet's hyperplane and
    /// inside its orthosphere.
    fn conflicts(&self, s: usize, q: usize) -> bool {
        let Some(pi) = self.inf_pos(s) else {
            return self.power(self.simp[s][0], &self.center[s], q) < 0.0;
        };
        let facet: Vec<usize> = (0..=self.n)
            .filter(|&k| k != pi)
            .map(|k| self.simp[s][k])
            .collect();
        let inner = self.inner_apex(s, pi);
        let mut w = facet.clone();
        w.push(q);
        let oq = self.orient(&w);
        *w.last_mut().unwrap() = inner;
        let oi = self.orient(&w);
        if oq != 0.0 && !(oq.abs() <= 1e-14 * self.max_edge(&w).powi(self.n as i32)) {
            return oq * oi < 0.0;
        }
        match self.orthocenter(&facet) {
            Some(c) => self.power(facet[0], &c, q) < 0.0,
            None => false,
        }
    }

    /// Vertex of the finite neighbour across the finite facet of hull
    /// simplex `s`.
    fn inner_apex(&self, s: usize, pi: usize) -> usize {
        let nb = self.nbr[s][pi];
        let own = self.verts(s);
        *self
            .verts(nb)
            .iter()
            .find(|v| !own.contains(v))
            .expect("finite neighbour has an apex")
    }

    fn min_barycentric(&self, s: usize, q: usize) -> f64 {
        let v = self.verts(s).to_vec();
        let total = self.orient(&v);
        let mut best = f64::INFINITY;
        for j in 0..=self.n {
            let mut w = v.clone();
            w[j] = q;
            best = best.min(self.orient(&w) / total);
        }
        best
    }

    fn alloc(&mut self, v: [usize; 4]) -> usize {
        let verts = &v[..=self.n];
        let c = if verts.contains(&self.inf) {
            [0.0; 3]
        } else {
            self.orthocenter(verts).unwrap_or([f64::NAN; 3])
        };
        if let Some(i) = self.free.pop() {
            self.simp[i] = v;
            self.nbr[i] = [NONE; 4];
            self.alive[i] = true;
            self.center[i] = c;
            i
        } else {
            self.simp.push(v);
            self.nbr.push([NONE; 4]);
            self.alive.push(true);
            self.center.push(c);
            self.allowed.push(false);
            self.in_cavity.push(false);
            self.simp.len() - 1
        }
    }

    fn init(&mut self, first: &[usize]) {
        let n = self.n;
        let mut root = [0usize; 4];
        root[..=n].copy_from_slice(first);
        let t = self.alloc(root);
        let hull: Vec<usize> = (0..=n)
            .map(|j| {
                let mut v = root;
                v[j] = self.inf;
                self.alloc(v)
            })
            .collect();
        for j in 0..=n {
            self.nbr[t][j] = hull[j];
            self.nbr[hull[j]][j] = t;
            for k in 0..=n {
                if k != j {
                    self.nbr[hull[j]][k] = hull[k];
                }
            }
        }
    }

    fn insert(&mut self, q: usize) -> Result<(), MeshError> {
        let n = self.n;
        let conflicts: Vec<usize> = (0..self.simp.len())
            .filter(|&s| self.alive[s] && self.conflicts(s, q))
            .collect();
        let inside = conflicts
            .iter()
            .filter(|&&s| self.inf_pos(s).is_none())
            .map(|&s| (s, self.min_barycentric(s, q)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .filter(|&(_, l)| l >= -1e-12);
        let seed = match inside {
            Some((s, _)) => s,
            None => *conflicts
                .iter()
                .find(|&&s| self.inf_pos(s).is_some())
                .ok_or_else(|| MeshError::Delaunay("point conflicts with no simplex".into()))?,
        };

        let mut touched = conflicts.clone();
        for &s in &conflicts {
            self.allowed[s] = true;
        }
        self.allowed[seed] = true;
        let mut protected = vec![seed];
        let result = loop {
            let cavity = self.flood(seed);
            let mut bad = None;
            'scan: for &s in &cavity {
                for j in 0..=n {
                    let nb = self.nbr[s][j];
                    if self.in_cavity[nb] {
                        continue;
                    }
                    if !self.visible(s, j, q) {
                        bad = Some((s, nb));
                        break 'scan;
                    }
                }
            }
            for &c in &cavity {
                self.in_cavity[c] = false;
            }
            match bad {
                None => break Ok(cavity),
                Some((s, nb)) if protected.contains(&s) => {
                    if protected.len() > 64 {
                        break Err(MeshError::Delaunay(
                            "cannot form a star-shaped cavity".into(),
                        ));
                    }
                    protected.push(nb);
                    self.allowed[nb] = true;
                    touched.push(nb);
                }
                Some((s, _)) => self.allowed[s] = false,
            }
        };
        for &s in &touched {
            self.allowed[s] = false;
        }
        let cavity = result?;
        for &c in &cavity {
            self.in_cavity[c] = true;
        }
        self.replace(&cavity, q)
    }

    /// Simplices reachable from `seed` through allowed neighbours; marks
    /// them in `in_cavity`.
    fn flood(&mut self, seed: usize) -> Vec<usize> {
        let mut out = vec![seed];
        self.in_cavity[seed] = true;
        let mut head = 0;
        while head < out.len() {
            let s = out[head];
            head += 1;
            for j in 0..=self.n {
                let nb = self.nbr[s][j];
                if self.allowed[nb] && !self.in_cavity[nb] {
                    self.in_cavity[nb] = true;
                    out.push(nb);
                }
            }
        }
        out
    }

    /// Whether the simplex formed by replacing local vertex `j` of `s` with
    /// `q` is a valid, non-flat member of the star of `q`.
    fn visible(&self, s: usize, j: usize, q: usize) -> bool {
        let v = self.verts(s).to_vec();
        let mut w = v.clone();
        w[j] = q;
        match self.inf_pos(s) {
            None => {
                let o = self.orient(&v);
                let r = self.orient(&w);
                o * r > 0.0 && self.nondegenerate(&w, r)
            }
            Some(pi) if pi == j => {
                let r = self.orient(&w);
                w[j] = self.inner_apex(s, pi);
                let o = self.orient(&w);
                w[j] = q;
                o * r < 0.0 && self.nondegenerate(&w, r)
            }
            Some(_) => true,
        }
    }

    fn replace(&mut self, cavity: &[usize], q: usize) -> Result<(), MeshError> {
        let n = self.n;
        let mut boundary = Vec::new();
        for &s in cavity {
            for j in 0..=n {
                let nb = self.nbr[s][j];
                if !self.in_cavity[nb] {
                    let mut v = self.simp[s];
                    v[j] = q;
                    boundary.push((v, j, nb));
                }
            }
        }
        for &s in cavity {
            self.in_cavity[s] = false;
            self.alive[s] = false;
            self.free.push(s);
        }
        let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for (v, j, nb) in boundary {
            let id = self.alloc(v);
            if self.center[id][0].is_nan() {
                return Err(MeshError::Delaunay("flat simplex in cavity".into()));
            }
            self.nbr[id][j] = nb;
            let facet: Vec<usize> = (0..=n).filter(|&k| k != j).map(|k| v[k]).collect();
            let k = (0..=n)
                .find(|&k| !facet.contains(&self.simp[nb][k]))
                .expect("neighbour shares the facet");
            self.nbr[nb][k] = id;
            for k in (0..=n).filter(|&k| k != j) {
                let mut key: Vec<usize> = (0..=n).filter(|&i| i != k).map(|i| v[i]).collect();
                key.sort_unstable();
                if let Some((other, ok)) = open.remove(&key) {
                    self.nbr[id][k] = other;
                    self.nbr[other][ok] = id;
                } else {
                    open.insert(key, (id, k));
                }
            }
        }
        if !open.is_empty() {
            return Err(MeshError::Delaunay("cavity boundary is not closed".into()));
        }
        Ok(())
    }
}

/// Delaunay triangulation of `points` (n = 2 or 3). Exact duplicates are
/// dropped; the remaining points keep their input order as vertex indices.
pub fn build_delaunay_mesh(points: &[Vec<f64>]) -> Result<Triangulation, MeshError> {
    let n = points.first().map_or(0, Vec::len);
    if !(2..=3).contains(&n) {
        return Err(MeshError::UnsupportedDimension(n));
    }
    let mut seen = HashMap::new();
    let mut pts: Vec<P> = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != n {
            return Err(MeshError::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(MeshError::Delaunay(format!("non-finite point {p:?}")));
        }
        let mut a = [0.0; 3];
        for k in 0..n {
            a[k] = p[k] + 0.0;
        }
        let key: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
        if seen.insert(key, ()).is_none() {
            pts.push(a);
        }
    }
    let count = pts.len();

    let mut diag2 = 0.0;
    for k in 0..n {
        let lo = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        diag2 += (hi - lo) * (hi - lo);
    }
    let first = initial_simplex(&pts, n, diag2.sqrt())
        .ok_or_else(|| MeshError::Delaunay("points do not span the space".into()))?;

    let eps = WEIGHT_SCALE * diag2;
    let weights: Vec<f64> = (0..count)
        .map(|i| eps * (splitmix(i as u64) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    let mut b = Builder {
        n,
        inf: count,
        pts,
        weights,
        simp: Vec::new(),
        nbr: Vec::new(),
        alive: Vec::new(),
        center: Vec::new(),
        free: Vec::new(),
        allowed: Vec::new(),
        in_cavity: Vec::new(),
    };
    b.init(&first);
    for q in (0..count).filter(|q| !first.contains(q)) {
        b.insert(q)?;
    }

    let mut coords = Vec::with_capacity(count * n);
    for p in &b.pts {
        coords.extend_from_slice(&p[..n]);
    }
    let mut simplices = Vec::new();
    for s in 0..b.simp.len() {
        if b.alive[s] && b.inf_pos(s).is_none() {
            simplices.extend_from_slice(b.verts(s));
        }
    }
    let t = Triangulation::from_flat(n, coords, simplices);
    if let Some(i) = (0..t.num_simplices()).find(|&i| !t.is_nondegenerate(i)) {
        return Err(MeshError::DegenerateSimplex(i));
    }
    Ok(t)
}

/// Greedy choice of `n + 1` well-spread, affinely independent points.
fn initial_simplex(pts: &[P], n: usize, scale: f64) -> Option<Vec<usize>> {
    if !(scale > 0.0) {
        return None;
    }
    let far = |from: &P| {
        (0..pts.len()).max_by(|&a, &b| {
            let da = sub(&pts[a], from);
            let db = sub(&pts[b], from);
            dot(&da, &da).total_cmp(&dot(&db, &db))
        })
    };
    let a = far(&pts[0])?;
    let mut chosen = vec![a];
    let mut basis: Vec<P> = Vec::new();
    for _ in 0..n {
        let residual = |i: usize| {
            let mut v = sub(&pts[i], &pts[a]);
            for b in &basis {
                let c = dot(&v, b);
                for k in 0..n {
                    v[k] -= c * b[k];
                }
            }
            v
        };
        let best = (0..pts.len()).max_by(|&x, &y| {
            let (vx, vy) = (residual(x), residual(y));
            dot(&vx, &vx).total_cmp(&dot(&vy, &vy))
        })?;
        let mut v = residual(best);
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-9 * scale {
            return None;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
        chosen.push(best);
    }
    Some(chosen)
}
