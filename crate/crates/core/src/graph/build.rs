use super::{tiling, GeneratorSpec, Graph};
use crate::error::{invalid, Result};

/// Regular tree of the given degree truncated at `radius` around its root.
pub fn build_tree(degree: usize, radius: usize) -> Result<Graph> {
    if degree < 3 {
        return Err(invalid(format!(
            "tree degree must be at least 3, got {degree}; use the control line for degree 2"
        )));
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new()];
    let mut depth = vec![0usize];
    let mut frontier = vec![0usize];
    for level in 1..=radius {
        let mut next = Vec::new();
        for &u in &frontier {
            let children = if u == 0 { degree } else { degree - 1 };
            for _ in 0..children {
                let w = adjacency.len();
                adjacency.push(vec![u]);
                adjacency[u].push(w);
                depth.push(level);
                next.push(w);
            }
        }
        frontier = next;
    }
    let rim = depth.iter().map(|&d| d == radius).collect();
    Graph::assemble(adjacency, 0, GeneratorSpec::Tree { degree, radius }, rim, None, Some(radius))
}

/// Vertex graph of the `{p,q}` tessellation of the hyperbolic plane,
/// truncated at combinatorial radius `radius` around a vertex.
pub fn build_tiling(p: usize, q: usize, radius: usize) -> Result<Graph> {
    if p < 3 || q < 3 || (p - 2) * (q - 2) <= 4 {
        return Err(invalid(format!(
            "{{{p},{q}}} is not a hyperbolic tessellation (need 1/p + 1/q < 1/2)"
        )));
    }
    let t = tiling::generate(p, q, radius)?;
    let rim = t.depth.iter().map(|&d| d == radius).collect();
    Graph::assemble(
        t.adjacency,
        0,
        GeneratorSpec::Tiling { p, q, radius },
        rim,
        Some(t.positions),
        Some(radius),
    )
}

/// Path with `extent` edges, based at its middle vertex.
pub fn build_control_line(extent: usize) -> Result<Graph> {
    if extent < 2 {
        return Err(invalid("line extent must be at least 2"));
    }
    let n = extent + 1;
    let adjacency = (0..n)
        .map(|i| {
            let mut a = Vec::new();
            if i > 0 {
                a.push(i - 1);
            }
            if i + 1 < n {
                a.push(i + 1);
            }
            a
        })
        .collect();
    let rim = (0..n).map(|i| i == 0 || i + 1 == n).collect();
    Graph::assemble(adjacency, extent / 2, GeneratorSpec::Line { extent }, rim, None, None)
}

/// `side × side` square grid, based at its middle vertex.
pub fn build_control_grid(side: usize) -> Result<Graph> {
    if side < 2 {
        return Err(invalid("grid side must be at least 2"));
    }
    let idx = |r: usize, c: usize| r * side + c;
    let mut adjacency = vec![Vec::new(); side * side];
    let mut rim = vec![false; side * side];
    for r in 0..side {
        for c in 0..side {
            let u = idx(r, c);
            if r + 1 < side {
                adjacency[u].push(idx(r + 1, c));
                adjacency[idx(r + 1, c)].push(u);
            }
            if c + 1 < side {
                adjacency[u].push(idx(r, c + 1));
                adjacency[idx(r, c + 1)].push(u);
            }
            rim[u] = r == 0 || c == 0 || r + 1 == side || c + 1 == side;
        }
    }
    let base = idx(side / 2, side / 2);
    Graph::assemble(adjacency, base, GeneratorSpec::Grid { side }, rim, None, None)
}
