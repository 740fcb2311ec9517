//! Rivara longest-edge bisection in arbitrary dimension.
//!
//! An edge is split only once it is the longest edge of every simplex that
//! contains it; otherwise the offending simplex's own longest edge is split
//! first. Edge lengths strictly decrease along the chain, so it terminates.

use std::collections::HashMap;

use super::{Triangulation, EDGE_TIE_TOL};

type Edge = (usize, usize);

fn edge(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

pub(super) fn longest_edge(t: &Triangulation, s: &[usize]) -> Edge {
    let mut best: Option<(f64, Edge)> = None;
    for a in 0..s.len() {
        for b in a + 1..s.len() {
            let e = edge(s[a], s[b]);
            let len = t.distance(e.0, e.1);
            let better = match best {
                None => true,
                Some((bl, be)) => {
                    len > bl + EDGE_TIE_TOL || ((len - bl).abs() <= EDGE_TIE_TOL && e < be)
                }
            };
            if better {
                best = Some((len, e));
            }
        }
    }
    best.expect("simplex has at least one edge").1
}

struct EdgeIndex {
    stride: usize,
    map: HashMap<Edge, Vec<usize>>,
}

impl EdgeIndex {
    fn build(t: &Triangulation) -> Self {
        let mut idx = EdgeIndex {
            stride: t.dim() + 1,
            map: HashMap::new(),
        };
        for (i, s) in t.simplices().enumerate() {
            idx.add(i, s);
        }
        idx
    }

    fn add(&mut self, i: usize, s: &[usize]) {
        for a in 0..self.stride {
            for b in a + 1..self.stride {
                self.map.entry(edge(s[a], s[b])).or_default().push(i);
            }
        }
    }

    fn remove(&mut self, i: usize, s: &[usize]) {
        for a in 0..self.stride {
            for b in a + 1..self.stride {
                let e = edge(s[a], s[b]);
                if let Some(v) = self.map.get_mut(&e) {
                    v.retain(|&x| x != i);
                    if v.is_empty() {
                        self.map.remove(&e);
                    }
                }
            }
        }
    }
}

pub(super) fn bisect(t: &mut Triangulation, target: usize) {
    let stride = t.dim() + 1;
    let mut index = EdgeIndex::build(t);
    let mut stack = vec![longest_edge(t, t.simplex(target))];
    while let Some(&e) = stack.last() {
        let Some(star) = index.map.get(&e).cloned() else {
            stack.pop();
            continue;
        };
        let blocker = star
            .iter()
            .map(|&i| longest_edge(t, t.simplex(i)))
            .find(|&le| le != e);
        if let Some(le) = blocker {
            stack.push(le);
            continue;
        }
        stack.pop();
        let mid: Vec<f64> = t
            .vertex(e.0)
            .iter()
            .zip(t.vertex(e.1))
            .map(|(p, q)| 0.5 * (p + q))
            .collect();
        let m = t.push_vertex(&mid);
        for i in star {
            let old = t.simplex(i).to_vec();
            index.remove(i, &old);
            let mut first = old.clone();
            let mut second = old;
            for v in first.iter_mut() {
                if *v == e.0 {
                    *v = m;
                }
            }
            for v in second.iter_mut() {
                if *v == e.1 {
                    *v = m;
                }
            }
            t.simplices_mut()[i * stride..(i + 1) * stride].copy_from_slice(&first);
            index.add(i, &first);
            let j = t.num_simplices();
            t.simplices_mut().extend_from_slice(&second);
            index.add(j, &second);
        }
    }
    t.normalize_origin_order();
}
