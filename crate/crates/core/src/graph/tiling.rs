//! Breadth-first construction of `{p,q}` tessellation vertex graphs.
//!
//! Vertices are placed in the Poincaré disk: the neighbours of a vertex `z`
//! are the images under the disk isometry taking 0 to `z` of `q` equally
//! spaced points at the edge length, rotated so that one of them is the
//! vertex we arrived from. Duplicates reached along different paths are
//! merged by position.

use crate::error::{invalid, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

pub(super) struct Tiling {
    pub adjacency: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    pub positions: Vec<[f64; 2]>,
}

const CELL: f64 = 1e-6;

struct Index {
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl Index {
    fn key(z: Complex64) -> (i64, i64) {
        ((z.re / CELL).round() as i64, (z.im / CELL).round() as i64)
    }

    fn find(&self, z: Complex64, positions: &[Complex64]) -> Option<usize> {
        let (kx, ky) = Self::key(z);
        let tol = 1e-6 * (1.0 - z.norm_sqr()).max(0.0);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        if (positions[i] - z).norm() <= tol {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    fn add(&mut self, z: Complex64, id: usize) {
        self.cells.entry(Self::key(z)).or_default().push(id);
    }
}

/// Disk isometry sending 0 to `z`.
fn lift(z: Complex64, w: Complex64) -> Complex64 {
    (w + z) / (Complex64::new(1.0, 0.0) + z.conj() * w)
}

fn lower(z: Complex64, w: Complex64) -> Complex64 {
    (w - z) / (Complex64::new(1.0, 0.0) - z.conj() * w)
}

pub(super) fn generate(p: usize, q: usize, radius: usize) -> Result<Tiling> {
    let half_edge = ((PI / p as f64).cos() / (PI / q as f64).sin()).acosh();
    let r0 = half_edge.tanh();
    let step = Complex64::from_polar(1.0, 2.0 * PI / q as f64);

    let mut pos = vec![Complex64::new(0.0, 0.0)];
    let mut depth = vec![0usize];
    let mut parent = vec![usize::MAX];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new()];
    let mut index = Index { cells: HashMap::new() };
    index.add(pos[0], 0);

    let mut head = 0;
    while head < pos.len() {
        let u = head;
        head += 1;
        let z = pos[u];
        let mut w = if parent[u] == usize::MAX {
            Complex64::new(r0, 0.0)
        } else {
            let local = lower(z, pos[parent[u]]);
            local * (r0 / local.norm())
        };
        for _ in 0..q {
            let y = lift(z, w);
            w *= step;
            if 1.0 - y.norm_sqr() < 1e-9 {
                return Err(invalid(format!(
                    "tiling radius {radius} exceeds the floating point resolution of the construction"
                )));
            }
            let v = match index.find(y, &pos) {
                Some(v) => v,
                None if depth[u] < radius => {
                    let v = pos.len();
                    pos.push(y);
                    depth.push(depth[u] + 1);
                    parent.push(u);
                    adjacency.push(Vec::new());
                    index.add(y, v);
                    v
                }
                None => continue,
            };
            if v != u && !adjacency[u].contains(&v) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
    }
    Ok(Tiling { adjacency, depth, positions: pos.iter().map(|z| [z.re, z.im]).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sizes_37() {
        // every neighbour ring vertex of the base sees four new vertices,
        // consecutive ones share one
        let t = generate(3, 7, 3).unwrap();
        let mut counts = [0usize; 4];
        for &d in &t.depth {
            counts[d] += 1;
        }
        assert_eq!(&counts[..3], &[1, 7, 21]);
    }

    #[test]
    fn triangles_around_interior_edges() {
        let t = generate(3, 7, 3).unwrap();
        for u in 0..t.adjacency.len() {
            if t.depth[u] >= 2 {
                continue;
            }
            for &w in &t.adjacency[u] {
                if t.depth[w] >= 2 {
                    continue;
                }
                let common = t.adjacency[u].iter().filter(|x| t.adjacency[w].contains(x)).count();
                assert_eq!(common, 2, "edge {u}-{w}");
            }
        }
    }

    #[test]
    fn positions_inside_disk() {
        let t = generate(4, 5, 4).unwrap();
        assert!(t.positions.iter().all(|p| p[0] * p[0] + p[1] * p[1] < 1.0));
    }
}
