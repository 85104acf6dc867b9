//! Planar layout in the unit disk.

use acgraph::graph::Graph;

/// Per-vertex coordinates strictly inside the unit disk with the base vertex
/// at the origin.
///
/// Graphs built with Poincaré coordinates keep them. Otherwise a
/// breadth-first tree is laid out with radius `tanh(depth / 2)` and each
/// child taking an equal share of its parent's angular sector, so sectors
/// shrink exponentially with depth.
pub fn embedding(g: &Graph) -> Vec<[f64; 2]> {
    if let Some(xy) = g.coordinates() {
        return xy.to_vec();
    }
    let n = g.vertex_count();
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 1..n {
        let p = *g
            .neighbors(u)
            .iter()
            .filter(|&&w| g.depth(w) + 1 == g.depth(u))
            .min()
            .expect("non-base vertices have a parent");
        parent[u] = p;
        children[p].push(u);
    }
    let mut sector = vec![(0.0, std::f64::consts::TAU); n];
    let mut out = vec![[0.0, 0.0]; n];
    for u in 0..n {
        let (lo, hi) = sector[u];
        if u != 0 {
            let r = (g.depth(u) as f64 / 2.0).tanh();
            let a = (lo + hi) / 2.0;
            out[u] = [r * a.cos(), r * a.sin()];
        }
        let k = children[u].len() as f64;
        for (i, &c) in children[u].iter().enumerate() {
            let w = (hi - lo) / k;
            sector[c] = (lo + w * i as f64, lo + w * (i + 1) as f64);
        }
    }
    out
}
