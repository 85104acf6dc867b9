//! Finite truncations of hyperbolic and control graphs, metric primitives
//! and boundary operators on vertex sets.

mod build;
mod sets;
mod tiling;

pub use build::{build_control_grid, build_control_line, build_tiling, build_tree};
pub use sets::{IdSet, ProxySet, VertexSet};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::hash::{DefaultHasher, Hash, Hasher};

pub const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Tree { degree: usize, radius: usize },
    Tiling { p: usize, q: usize, radius: usize },
    Line { extent: usize },
    Grid { side: usize },
}

/// Immutable finite graph with vertex ids in breadth-first order from the
/// base vertex. Vertices marked as rim may be missing neighbours that the
/// untruncated graph has.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    base: usize,
    max_degree: usize,
    spec: GeneratorSpec,
    r_max: usize,
    depth: Vec<u32>,
    rim: VertexSet,
    coordinates: Option<Vec<[f64; 2]>>,
    id: u64,
}

/// A result that may differ from the untruncated graph because it reached
/// the truncation rim.
#[derive(Clone, Debug, PartialEq)]
pub struct Clipped<T> {
    pub value: T,
    pub clipped: bool,
}

impl<T> Clipped<T> {
    pub fn into_inner(self) -> T {
        self.value
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceField {
    pub source: usize,
    pub dist: Vec<u32>,
}

impl DistanceField {
    pub fn get(&self, u: usize) -> u32 {
        self.dist[u]
    }

    pub fn max(&self) -> u32 {
        self.dist.iter().copied().filter(|&d| d != UNREACHED).max().unwrap_or(0)
    }
}

impl Graph {
    /// Relabels `adjacency` in breadth-first order from `base` (neighbours
    /// visited by increasing old id) and validates the graph invariants.
    pub(crate) fn assemble(
        adjacency: Vec<Vec<usize>>,
        base: usize,
        spec: GeneratorSpec,
        rim: Vec<bool>,
        coordinates: Option<Vec<[f64; 2]>>,
        r_max: Option<usize>,
    ) -> Result<Self> {
        let n = adjacency.len();
        if base >= n {
            return Err(Error::InvalidVertex(base));
        }
        let mut order = Vec::with_capacity(n);
        let mut new_id = vec![usize::MAX; n];
        new_id[base] = 0;
        order.push(base);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            let mut nbrs = adjacency[u].clone();
            nbrs.sort_unstable();
            for w in nbrs {
                if new_id[w] == usize::MAX {
                    new_id[w] = order.len();
                    order.push(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvalidParameter("graph is not connected".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for (old, nbrs) in adjacency.iter().enumerate() {
            let u = new_id[old];
            let mut list: Vec<usize> = nbrs.iter().map(|&w| new_id[w]).collect();
            list.sort_unstable();
            list.dedup();
            if list.contains(&u) {
                return Err(Error::InvalidParameter(format!("self loop at {u}")));
            }
            adj[u] = list;
        }
        for u in 0..n {
            for &w in &adj[u] {
                if adj[w].binary_search(&u).is_err() {
                    return Err(Error::InvalidParameter("adjacency is not symmetric".into()));
                }
            }
        }
        let rim = VertexSet::from_ids(n, (0..n).filter(|&old| rim[old]).map(|old| new_id[old]));
        let coordinates = coordinates.map(|c| {
            let mut out = vec![[0.0; 2]; n];
            for (old, p) in c.into_iter().enumerate() {
                out[new_id[old]] = p;
            }
            out
        });
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut hasher = DefaultHasher::new();
        adj.hash(&mut hasher);
        let mut g = Graph {
            adjacency: adj,
            base: 0,
            max_degree,
            spec,
            r_max: 0,
            depth: Vec::new(),
            rim,
            coordinates,
            id: hasher.finish(),
        };
        g.depth = g.distances_from(0).dist;
        g.r_max = r_max.unwrap_or_else(|| g.depth.iter().copied().max().unwrap_or(0) as usize);
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn base_vertex(&self) -> usize {
        self.base
    }

    /// Largest vertex degree (the bound `S`).
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    /// Truncation radius around the base vertex.
    pub fn r_max(&self) -> usize {
        self.r_max
    }

    /// Distance `|u|` from the base vertex.
    pub fn depth(&self, u: usize) -> usize {
        self.depth[u] as usize
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    pub fn is_rim(&self, u: usize) -> bool {
        self.rim.contains(u)
    }

    pub fn rim(&self) -> &VertexSet {
        &self.rim
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        self.coordinates.as_deref()
    }

    /// Fingerprint of the adjacency structure, used to bind fields.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&w| u < w).map(move |&w| (u, w)))
    }

    pub fn check_vertex(&self, u: usize) -> Result<()> {
        if u < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(u))
        }
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::empty(self.vertex_count())
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::full(self.vertex_count())
    }

    pub fn distances_from(&self, source: usize) -> DistanceField {
        DistanceField { source, dist: self.multi_source_bfs([source], u32::MAX) }
    }

    /// Breadth-first distances from a set of sources, stopping at `limit`.
    /// Vertices farther than `limit` get [`UNREACHED`].
    pub fn multi_source_bfs<I: IntoIterator<Item = usize>>(&self, sources: I, limit: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.vertex_count()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du >= limit {
                continue;
            }
            for &w in &self.adjacency[u] {
                if dist[w] == UNREACHED {
                    dist[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Distance from every vertex to the set `s` (unreached when empty).
    pub fn distance_to_set(&self, s: &VertexSet) -> Vec<u32> {
        self.multi_source_bfs(s.iter(), u32::MAX)
    }

    pub fn ball(&self, center: usize, n: usize) -> Clipped<VertexSet> {
        let dist = self.multi_source_bfs([center], n as u32);
        let set = VertexSet::from_predicate(self.vertex_count(), |u| dist[u] <= n as u32);
        let clipped = self.rim.iter().any(|u| (dist[u] as usize) < n);
        Clipped { value: set, clipped }
    }

    pub fn sphere(&self, center: usize, n: usize) -> Clipped<VertexSet> {
        let dist = self.multi_source_bfs([center], n as u32);
        let set = VertexSet::from_predicate(self.vertex_count(), |u| dist[u] == n as u32);
        let clipped = self.rim.iter().any(|u| (dist[u] as usize) < n);
        Clipped { value: set, clipped }
    }

    /// Ball of radius `n` around the base vertex.
    pub fn base_ball(&self, n: usize) -> VertexSet {
        VertexSet::from_predicate(self.vertex_count(), |u| self.depth[u] as usize <= n)
    }

    pub fn base_sphere(&self, n: usize) -> VertexSet {
        VertexSet::from_predicate(self.vertex_count(), |u| self.depth[u] as usize == n)
    }

    /// `B^out = {u : d(u, B) <= 1}`.
    pub fn outer_set(&self, b: &VertexSet) -> VertexSet {
        let mut out = b.clone();
        for u in b.iter() {
            for &w in &self.adjacency[u] {
                out.insert(w);
            }
        }
        out
    }

    /// Erosion `{u in B : ball(u, 1) ⊆ B}`.
    pub fn inner_set(&self, b: &VertexSet) -> VertexSet {
        let mut inn = self.empty_set();
        for u in b.iter() {
            if self.adjacency[u].iter().all(|&w| b.contains(w)) {
                inn.insert(u);
            }
        }
        inn
    }

    pub fn boundary_out(&self, b: &VertexSet) -> VertexSet {
        self.outer_set(b).difference(b)
    }

    pub fn boundary_inn(&self, b: &VertexSet) -> VertexSet {
        b.difference(&self.inner_set(b))
    }

    pub fn boundary_full(&self, b: &VertexSet) -> VertexSet {
        self.boundary_out(b).union(&self.boundary_inn(b))
    }

    pub fn iterate_out(&self, b: &VertexSet, n: usize) -> VertexSet {
        if n == 0 || b.is_empty() {
            return b.clone();
        }
        let dist = self.multi_source_bfs(b.iter(), n as u32);
        VertexSet::from_predicate(self.vertex_count(), |u| dist[u] <= n as u32)
    }

    pub fn iterate_inn(&self, b: &VertexSet, n: usize) -> VertexSet {
        if n == 0 {
            return b.clone();
        }
        let complement = b.complement();
        if complement.is_empty() {
            return b.clone();
        }
        let dist = self.multi_source_bfs(complement.iter(), n as u32);
        VertexSet::from_predicate(self.vertex_count(), |u| dist[u] > n as u32)
    }

    /// Components of the subgraph induced by `d`, ordered by smallest id.
    pub fn connected_components(&self, d: &VertexSet) -> Vec<VertexSet> {
        let mut seen = self.empty_set();
        let mut comps = Vec::new();
        for s in d.iter() {
            if seen.contains(s) {
                continue;
            }
            let mut comp = self.empty_set();
            let mut stack = vec![s];
            seen.insert(s);
            while let Some(u) = stack.pop() {
                comp.insert(u);
                for &w in &self.adjacency[u] {
                    if d.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        stack.push(w);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    /// True when some vertex of `b` lies within distance `k` of the rim.
    pub fn near_rim(&self, b: &VertexSet, k: usize) -> bool {
        !self.iterate_out(b, k).is_disjoint(&self.rim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        build_control_line(n - 1).unwrap()
    }

    #[test]
    fn tree_layers() {
        let g = build_tree(3, 2).unwrap();
        let d = g.distances_from(g.base_vertex());
        let mut layers = [0usize; 3];
        for &x in &d.dist {
            layers[x as usize] += 1;
        }
        assert_eq!(layers, [1, 3, 6]);
        assert_eq!(d.get(g.base_vertex()), 0);
    }

    #[test]
    fn line_center_max_distance() {
        let g = path(5);
        assert_eq!(g.distances_from(g.base_vertex()).max(), 2);
    }

    #[test]
    fn distance_field_is_lipschitz() {
        let g = build_tiling(3, 7, 3).unwrap();
        let d = g.distances_from(17);
        for (u, w) in g.edges() {
            assert!((d.get(u) as i64 - d.get(w) as i64).abs() <= 1);
        }
    }

    #[test]
    fn balls_and_spheres() {
        let g = build_tree(3, 5).unwrap();
        assert_eq!(g.ball(0, 2).value.len(), 10);
        assert_eq!(g.ball(7, 0).value.to_vec(), vec![7]);
        let s = g.sphere(0, 9);
        assert!(s.value.is_empty() && s.clipped);
        assert!(!g.ball(0, 5).clipped);
        assert!(g.ball(0, 6).clipped);
        let mut union = g.empty_set();
        for k in 0..=3 {
            union.union_with(&g.sphere(0, k).value);
        }
        assert_eq!(union, g.ball(0, 3).value);
    }

    #[test]
    fn boundary_operator_examples() {
        let g = path(5);
        let mid = VertexSet::from_ids(5, [0, 1, 2]);
        let out = g.boundary_out(&mid);
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|u| g.degree(u) == 1));
        assert!(g.boundary_out(&g.all_vertices()).is_empty());
        let t = build_tree(3, 5).unwrap();
        assert_eq!(t.boundary_out(&t.ball(0, 2).value).len(), 12);
    }

    #[test]
    fn inner_set_is_erosion() {
        let t = build_tree(3, 4).unwrap();
        let b = t.ball(0, 3).value;
        assert_eq!(t.inner_set(&b), t.ball(0, 2).value);
        assert_eq!(t.iterate_inn(&b, 2), t.ball(0, 1).value);
        assert_eq!(t.iterate_out(&t.ball(0, 1).value, 2), t.ball(0, 3).value);
        assert!(t.outer_set(&t.inner_set(&b)).is_subset(&b));
    }

    #[test]
    fn components() {
        let g = path(5);
        let ends = VertexSet::from_predicate(5, |u| g.degree(u) == 1);
        assert_eq!(g.connected_components(&ends).len(), 2);
        assert_eq!(g.connected_components(&g.all_vertices()).len(), 1);
        let t = build_tree(3, 3).unwrap();
        let subtree = |c: usize| {
            let d = t.distances_from(c);
            VertexSet::from_predicate(t.vertex_count(), |u| {
                t.depth(u) >= t.depth(c) && d.get(u) as usize == t.depth(u) - t.depth(c)
            })
        };
        let two = subtree(1).union(&subtree(2));
        let comps = t.connected_components(&two);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], subtree(1));
    }
}
