//! Finite model of the boundary at infinity: horizon proxies, rays, shadows,
//! cones, visual balls and annuli, separating sets and the shadow
//! constants.
//!
//! Each proxy stands for the boundary points whose rays pass through it, so
//! its ray is continued beyond the horizon by every vertex reached through
//! it along a geodesic. Shadows and `U_ξ` sets use this continued ray; the
//! public [`ray_set`] is the geodesic segment only.

use crate::error::{invalid, Error, Result};
use crate::geometry::{geodesic_membership, VisualMetric};
use crate::graph::{Graph, ProxySet, VertexSet};
use crate::rng;
use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

/// Relative slack when comparing visual distances with radii.
pub const RADIUS_TOL: f64 = 1e-12;

fn within(d: f64, r: f64) -> bool {
    d <= r + RADIUS_TOL * r.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryProxy {
    pub horizon_vertex: usize,
    pub horizon_radius: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Horizon {
    pub radius: usize,
    pub proxies: Vec<BoundaryProxy>,
    /// Whether `R <= R_max - δ - 1`, keeping shadows clear of the rim.
    pub rim_margin_ok: bool,
}

impl Horizon {
    pub fn vertices(&self) -> Vec<usize> {
        self.proxies.iter().map(|p| p.horizon_vertex).collect()
    }

    pub fn len(&self) -> usize {
        self.proxies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proxies.is_empty()
    }
}

/// The sphere of radius `R` around the base vertex, one proxy per vertex.
pub fn horizon(g: &Graph, radius: usize, delta_used: f64) -> Result<Horizon> {
    if radius == 0 {
        return Err(invalid("horizon radius must be at least 1"));
    }
    if radius > g.r_max() {
        return Err(Error::Clipped(format!("horizon radius {radius} exceeds truncation radius {}", g.r_max())));
    }
    let proxies: Vec<BoundaryProxy> = g
        .base_sphere(radius)
        .iter()
        .map(|u| BoundaryProxy { horizon_vertex: u, horizon_radius: radius })
        .collect();
    if proxies.is_empty() {
        return Err(Error::Empty(format!("sphere of radius {radius}")));
    }
    Ok(Horizon {
        radius,
        rim_margin_ok: radius as f64 <= g.r_max() as f64 - delta_used - 1.0,
        proxies,
    })
}

/// Union of the geodesics from the base vertex to the proxy.
pub fn ray_set(g: &Graph, xi: BoundaryProxy) -> VertexSet {
    geodesic_membership(g, xi.horizon_vertex)
}

/// `δ`-neighbourhood of a ray.
pub fn u_set(g: &Graph, ray: &VertexSet, delta: f64) -> VertexSet {
    g.iterate_out(ray, hops(delta))
}

fn hops(delta: f64) -> usize {
    (delta + 1e-9).floor().max(0.0) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shadow {
    pub owner: usize,
    pub proxies: ProxySet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShadowConstants {
    pub c1: f64,
    pub c2: f64,
    pub sampled_pairs: usize,
    pub vacuous: bool,
}

/// Horizon proxies with their continued rays, `U_ξ` sets, the transposed
/// shadow table and the proxy distance matrix.
pub struct BoundaryModel<'g> {
    graph: &'g Graph,
    horizon: Horizon,
    metric: VisualMetric,
    delta: f64,
    index: Vec<Option<usize>>,
    rays: Vec<VertexSet>,
    u_sets: Vec<VertexSet>,
    shadows: Vec<ProxySet>,
    resolved: VertexSet,
    dist: Vec<u16>,
}

impl<'g> BoundaryModel<'g> {
    /// `delta` is the shadow radius (the `δ` used throughout).
    pub fn build(g: &'g Graph, horizon: Horizon, metric: VisualMetric, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(invalid("shadow radius must be non-negative"));
        }
        if metric.horizon_radius != horizon.radius {
            return Err(invalid("visual metric and horizon disagree on the radius"));
        }
        let n = g.vertex_count();
        let r = horizon.radius as u32;
        let verts = horizon.vertices();
        let h = verts.len();
        let mut index = vec![None; n];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = Some(i);
        }
        let k = hops(delta);
        let per: Vec<(VertexSet, VertexSet, Vec<u16>)> = verts
            .par_iter()
            .map(|&xi| {
                let d = g.distances_from(xi).dist;
                let depth = g.depths();
                let ray = VertexSet::from_predicate(n, |u| depth[u] + d[u] == r || r + d[u] == depth[u]);
                let us = g.iterate_out(&ray, k);
                let row = verts.iter().map(|&w| d[w] as u16).collect();
                (ray, us, row)
            })
            .collect();
        let mut rays = Vec::with_capacity(h);
        let mut u_sets = Vec::with_capacity(h);
        let mut dist = Vec::with_capacity(h * h);
        for (ray, us, row) in per {
            rays.push(ray);
            u_sets.push(us);
            dist.extend(row);
        }
        let mut shadows = vec![ProxySet::empty(h); n];
        for (i, us) in u_sets.iter().enumerate() {
            for u in us.iter() {
                shadows[u].insert(i);
            }
        }
        let resolved = VertexSet::from_predicate(n, |u| !shadows[u].is_empty());
        Ok(Self { graph: g, horizon, metric, delta, index, rays, u_sets, shadows, resolved, dist })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn horizon(&self) -> &Horizon {
        &self.horizon
    }

    pub fn metric(&self) -> &VisualMetric {
        &self.metric
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn radius(&self) -> usize {
        self.horizon.radius
    }

    pub fn proxy_count(&self) -> usize {
        self.horizon.len()
    }

    pub fn vertex_of(&self, i: usize) -> usize {
        self.horizon.proxies[i].horizon_vertex
    }

    pub fn proxy_index(&self, vertex: usize) -> Option<usize> {
        self.index.get(vertex).copied().flatten()
    }

    pub fn empty_proxies(&self) -> ProxySet {
        ProxySet::empty(self.proxy_count())
    }

    pub fn all_proxies(&self) -> ProxySet {
        ProxySet::full(self.proxy_count())
    }

    /// Ray of proxy `i` continued through the proxy.
    pub fn continued_ray(&self, i: usize) -> &VertexSet {
        &self.rays[i]
    }

    /// `U_ξ`: vertices within `δ` of the continued ray of proxy `i`.
    pub fn u_set(&self, i: usize) -> &VertexSet {
        &self.u_sets[i]
    }

    /// Shadow at the model's `δ`.
    pub fn shadow(&self, u: usize) -> &ProxySet {
        &self.shadows[u]
    }

    /// Shadow at an arbitrary radius.
    pub fn shadow_with(&self, u: usize, delta: f64) -> Shadow {
        let near = self.graph.ball(u, hops(delta)).value;
        let proxies = ProxySet::from_predicate(self.proxy_count(), |i| !near.is_disjoint(&self.rays[i]));
        Shadow { owner: u, proxies }
    }

    /// Vertices with a nonempty shadow; only these can belong to cones.
    pub fn resolved(&self) -> &VertexSet {
        &self.resolved
    }

    pub fn graph_distance(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.proxy_count() + j] as u32
    }

    /// `(ξ_i | ξ_j)_v`.
    pub fn product(&self, i: usize, j: usize) -> f64 {
        self.horizon.radius as f64 - self.graph_distance(i, j) as f64 / 2.0
    }

    /// Visual distance on the boundary, with `d(ξ, ξ) = 0`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.metric.from_product(self.product(i, j))
        }
    }

    pub fn distance_row(&self, i: usize) -> Vec<f64> {
        (0..self.proxy_count()).map(|j| self.distance(i, j)).collect()
    }

    pub fn diameter(&self) -> f64 {
        let h = self.proxy_count();
        (0..h)
            .into_par_iter()
            .map(|i| (0..h).map(|j| self.distance(i, j)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// Smallest distance between distinct proxies.
    pub fn resolution(&self) -> f64 {
        let h = self.proxy_count();
        if h < 2 {
            return f64::INFINITY;
        }
        (0..h)
            .into_par_iter()
            .map(|i| (0..h).filter(|&j| j != i).map(|j| self.distance(i, j)).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Pairs of distinct proxies closer than `e^{-ε (R - 2δ)}`.
    pub fn unresolved_pairs(&self) -> usize {
        let h = self.proxy_count();
        let cut = self.metric.from_product(self.horizon.radius as f64 - 2.0 * self.delta);
        (0..h)
            .into_par_iter()
            .map(|i| (i + 1..h).filter(|&j| self.distance(i, j) < cut).count())
            .sum()
    }

    /// `B_r(ξ_i)`, always containing the centre.
    pub fn ball(&self, i: usize, r: f64) -> ProxySet {
        ProxySet::from_predicate(self.proxy_count(), |j| within(self.distance(i, j), r))
    }

    /// `{ξ : r - t <= d(ξ_i, ξ) <= r + t}`.
    pub fn annulus(&self, i: usize, r: f64, t: f64) -> ProxySet {
        let lo = r - t;
        ProxySet::from_predicate(self.proxy_count(), |j| {
            let d = self.distance(i, j);
            within(d, r + t) && (lo <= 0.0 || d >= lo - RADIUS_TOL * lo)
        })
    }

    /// `{u : S(u) ⊆ U}` over resolved vertices.
    pub fn cone(&self, set: &ProxySet) -> VertexSet {
        let n = self.graph.vertex_count();
        VertexSet::from_predicate(n, |u| self.resolved.contains(u) && self.shadows[u].is_subset(set))
    }

    /// Visual distance from a vertex to a proxy, `e^{-ε (u|ξ)_v}`.
    pub fn vertex_distances(&self, i: usize) -> Vec<f64> {
        let d = self.graph.distances_from(self.vertex_of(i)).dist;
        let r = self.horizon.radius as f64;
        (0..self.graph.vertex_count())
            .map(|u| self.metric.from_product((self.graph.depth(u) as f64 + r - d[u] as f64) / 2.0))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparatingSet {
    pub set: VertexSet,
    pub t_n: f64,
    /// `t_n` lies below the smallest distance between distinct proxies.
    pub under_resolved: bool,
}

/// `t_n = max{4 ε⁻¹ e^{4ε}, C2} e^{-εn}`.
pub fn t_n(epsilon: f64, c2: f64, n: usize) -> f64 {
    (4.0 / epsilon * (4.0 * epsilon).exp()).max(c2) * (-epsilon * n as f64).exp()
}

/// `𝒜_{r,t_n} = {u ∈ U_ξ \ B_n : ξ ∈ A^{t_n}_{r+2t_n}(ξ0)}`.
pub fn separating_set(model: &BoundaryModel, k: &ShadowConstants, xi0: usize, r: f64, n: usize) -> SeparatingSet {
    let t = t_n(model.metric.epsilon, k.c2, n);
    separating_set_at(model, xi0, r, n, t)
}

fn separating_set_at(model: &BoundaryModel, xi0: usize, r: f64, n: usize, t: f64) -> SeparatingSet {
    let ann = model.annulus(xi0, r + 2.0 * t, t);
    let mut set = model.graph.empty_set();
    for i in ann.iter() {
        set.union_with(model.u_set(i));
    }
    set.difference_with(&model.graph.base_ball(n));
    SeparatingSet { set, t_n: t, under_resolved: t < model.resolution() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparatingCheck {
    pub xi0: usize,
    pub r: f64,
    pub n: usize,
    pub t_n: f64,
    /// `∂^f (C^(3out)) ⊆ 𝒜 ∪ B_n` for `C = cone(B_{r+2t_n}(ξ0))`.
    pub full_boundary_contained: bool,
    /// `∂^out C ⊆ 𝒜 ∪ B_n`.
    pub outer_boundary_contained: bool,
    /// `(𝒜_{r,t_n} ∩ 𝒜_{r+4t_n,t_n}) \ B_n = ∅`.
    pub disjoint: bool,
    /// The cone boundary outside `B_n` is empty, so the containments hold
    /// without using the separating set.
    pub vacuous: bool,
    pub separating_size: usize,
}

impl SeparatingCheck {
    pub fn holds(&self) -> bool {
        self.full_boundary_contained && self.outer_boundary_contained && self.disjoint
    }
}

/// Both containments and the disjointness of the separating-set lemma as
/// exact set computations.
pub fn separating_lemma_check(model: &BoundaryModel, k: &ShadowConstants, xi0: usize, r: f64, n: usize) -> SeparatingCheck {
    let g = model.graph;
    let sep = separating_set(model, k, xi0, r, n);
    let t = sep.t_n;
    let bn = g.base_ball(n);
    let cover = sep.set.union(&bn);
    let cone = model.cone(&model.ball(xi0, r + 2.0 * t));
    let fat = g.iterate_out(&cone, 3);
    let full = g.boundary_full(&fat);
    let outer = g.boundary_out(&cone);
    let far = sep_far(model, xi0, r + 4.0 * t, n, t);
    let vacuous = full.difference(&bn).is_empty() && outer.difference(&bn).is_empty();
    SeparatingCheck {
        xi0,
        r,
        n,
        t_n: t,
        full_boundary_contained: full.is_subset(&cover),
        outer_boundary_contained: outer.is_subset(&cover),
        disjoint: sep.set.is_disjoint(&far),
        vacuous,
        separating_size: sep.set.len(),
    }
}

fn sep_far(model: &BoundaryModel, xi0: usize, r: f64, n: usize, t: f64) -> VertexSet {
    separating_set_at(model, xi0, r, n, t).set
}

/// Cone membership: if `u ∈ U_ξ` and `d(ξ, ξ0) < r - C e^{-ε|u|}` then
/// `u ∈ cone(B_r(ξ0))`. `None` when the hypothesis fails.
pub fn cone_membership(model: &BoundaryModel, c: f64, u: usize, xi: usize, xi0: usize, r: f64) -> Option<bool> {
    if !model.u_set(xi).contains(u) {
        return None;
    }
    let slack = c * (-model.metric.epsilon * model.graph.depth(u) as f64).exp();
    if !(model.distance(xi, xi0) < r - slack) {
        return None;
    }
    Some(model.cone(&model.ball(xi0, r)).contains(u))
}

/// The three inclusions for one sampled pair `(ξ, g)`, reduced to the
/// nearest outsider and farthest member of `S(g)` seen from `ξ`.
struct PairExtent {
    on_ray: bool,
    scale: f64,
    nearest_outside: f64,
    farthest_inside: f64,
}

fn pair_extent(model: &BoundaryModel, xi: usize, g: usize) -> PairExtent {
    let s = model.shadow(g);
    let mut nearest_outside = f64::INFINITY;
    let mut farthest_inside: f64 = 0.0;
    for j in 0..model.proxy_count() {
        let d = model.distance(xi, j);
        if s.contains(j) {
            farthest_inside = farthest_inside.max(d);
        } else {
            nearest_outside = nearest_outside.min(d);
        }
    }
    let depth = model.graph.depth(g);
    PairExtent {
        on_ray: depth <= model.radius() && model.continued_ray(xi).contains(g),
        scale: (-model.metric.epsilon * depth as f64).exp(),
        nearest_outside,
        farthest_inside,
    }
}

fn inclusions_hold_c1(pairs: &[PairExtent], c1: f64) -> bool {
    pairs.iter().filter(|p| p.on_ray).all(|p| {
        // B_{C1 e^{-ε|g|}}(ξ) ⊆ S(g) and S(g) ⊆ B_{C1⁻¹ e^{-ε|g|}}(ξ)
        !within(p.nearest_outside, c1 * p.scale) && within(p.farthest_inside, p.scale / c1)
    })
}

fn inclusion_holds_c2(pairs: &[PairExtent], c2: f64) -> bool {
    pairs.iter().all(|p| within(p.farthest_inside, c2 * p.scale))
}

/// Fits the almost-round shadow constants on `sample` random pairs `(ξ, g)`
/// with `g ∈ U_ξ`.
///
/// `C1` is the largest value `λ 2^k` for which both two-sided inclusions
/// hold on the pairs with `g` on the ray of `ξ`; `C2` is the smallest
/// `λ 2^k` with `S(g) ⊆ B_{C2 e^{-ε|g|}}(ξ)` on all pairs.
pub fn fit_shadow_constants(model: &BoundaryModel, sample: usize, seed: u64) -> Result<ShadowConstants> {
    if sample == 0 {
        return Ok(ShadowConstants { c1: 1.0, c2: 1.0, sampled_pairs: 0, vacuous: true });
    }
    let mut r = rng::stream(seed, 5);
    let h = model.proxy_count();
    let picks: Vec<(usize, usize)> = (0..sample)
        .map(|_| {
            let xi = r.random_range(0..h);
            let members = model.u_set(xi);
            let k = r.random_range(0..members.len());
            (xi, members.iter().nth(k).expect("U_ξ contains the proxy"))
        })
        .collect();
    let pairs: Vec<PairExtent> = picks.par_iter().map(|&(xi, g)| pair_extent(model, xi, g)).collect();
    let lambda = model.metric.lambda;
    let c1 = (-60..=20)
        .rev()
        .map(|k| lambda * f64::powi(2.0, k))
        .find(|&c| inclusions_hold_c1(&pairs, c))
        .ok_or_else(|| Error::Unsatisfiable("no C1 in the search grid satisfies the sampled inclusions".into()))?;
    let c2 = (-20..=60)
        .map(|k| lambda * f64::powi(2.0, k))
        .find(|&c| inclusion_holds_c2(&pairs, c))
        .ok_or_else(|| Error::Unsatisfiable("no C2 in the search grid satisfies the sampled inclusions".into()))?;
    Ok(ShadowConstants { c1, c2, sampled_pairs: sample, vacuous: false })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeTopology {
    /// `(n, r')` with `cone(B_{r'}(ξ)) \ B_n ⊆ {u : d(u, ξ) <= r}`.
    pub cone_inside_ball: Option<(usize, f64)>,
    /// `(n, r'')` with `{u : d(u, ξ) <= r''} \ B_n ⊆ cone(B_r(ξ))`.
    pub ball_inside_cone: Option<(usize, f64)>,
}

/// Searches witnesses for the comparison between cone neighbourhoods and
/// vertex balls around proxy `i`.
pub fn cone_topology_check(model: &BoundaryModel, i: usize, r: f64) -> ConeTopology {
    let g = model.graph;
    let vd = model.vertex_distances(i);
    let mut levels: Vec<f64> = model.distance_row(i);
    levels.extend(vd.iter().copied());
    levels.push(r);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let vball = |rad: f64| VertexSet::from_predicate(g.vertex_count(), |u| within(vd[u], rad));
    let target = vball(r);
    let cone_r = model.cone(&model.ball(i, r));
    let mut cone_inside_ball = None;
    let mut ball_inside_cone = None;
    for n in 0..=g.r_max() {
        let bn = g.base_ball(n);
        if cone_inside_ball.is_none() {
            cone_inside_ball = levels
                .iter()
                .rev()
                .find(|&&rp| model.cone(&model.ball(i, rp)).difference(&bn).is_subset(&target))
                .map(|&rp| (n, rp));
        }
        if ball_inside_cone.is_none() {
            ball_inside_cone =
                levels.iter().rev().find(|&&rp| vball(rp).difference(&bn).is_subset(&cone_r)).map(|&rp| (n, rp));
        }
        if cone_inside_ball.is_some() && ball_inside_cone.is_some() {
            break;
        }
    }
    ConeTopology { cone_inside_ball, ball_inside_cone }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_control_line, build_tiling, build_tree};

    fn tree_model(g: &Graph, radius: usize, eps: f64) -> BoundaryModel<'_> {
        let h = horizon(g, radius, 0.0).unwrap();
        BoundaryModel::build(g, h, VisualMetric { epsilon: eps, lambda: 1.0, horizon_radius: radius }, 0.0).unwrap()
    }

    /// Leaves of the subtree under `a`, as proxy indices.
    fn leaves_under(m: &BoundaryModel, a: usize) -> ProxySet {
        let g = m.graph();
        let d = g.distances_from(a);
        ProxySet::from_predicate(m.proxy_count(), |i| {
            let v = m.vertex_of(i);
            d.get(v) as usize + g.depth(a) == g.depth(v)
        })
    }

    #[test]
    fn horizon_examples() {
        let g = build_tree(3, 6).unwrap();
        assert_eq!(horizon(&g, 5, 0.0).unwrap().len(), 48);
        assert!(horizon(&g, 0, 0.0).is_err());
        assert!(horizon(&g, 7, 0.0).is_err());
        let line = build_control_line(6).unwrap();
        let h = horizon(&line, 3, 0.0).unwrap();
        assert_eq!(h.len(), 2);
        assert!(!h.rim_margin_ok);
    }

    #[test]
    fn rays_and_u_sets() {
        let g = build_tree(3, 6).unwrap();
        let h = horizon(&g, 5, 0.0).unwrap();
        let xi = h.proxies[7];
        let ray = ray_set(&g, xi);
        assert_eq!(ray.len(), 6);
        assert_eq!(u_set(&g, &ray, 0.0), ray);
        let fat = u_set(&g, &ray, 1.0);
        assert_eq!(fat, g.outer_set(&ray));
        assert!(fat.len() <= 6 * g.max_degree());
    }

    #[test]
    fn tree_shadows() {
        let g = build_tree(3, 6).unwrap();
        let m = tree_model(&g, 5, 0.3);
        assert_eq!(m.shadow(0).len(), 48);
        for u in 1..g.vertex_count() {
            if g.depth(u) <= 5 {
                assert_eq!(m.shadow(u), &leaves_under(&m, u), "vertex {u}");
            }
            assert_eq!(m.shadow(u), &m.shadow_with(u, 0.0).proxies);
        }
        // beyond the horizon the shadow is the proxy the vertex hangs from
        let deep = g.base_sphere(6).first().unwrap();
        assert_eq!(m.shadow(deep).len(), 1);
        assert_eq!(m.resolved().len(), g.vertex_count());
    }

    #[test]
    fn tiling_shadows_nonempty() {
        let g = build_tiling(3, 7, 5).unwrap();
        let h = horizon(&g, 4, 1.0).unwrap();
        let m = BoundaryModel::build(&g, h, VisualMetric { epsilon: 0.3, lambda: 1.0, horizon_radius: 4 }, 1.0).unwrap();
        assert!((0..g.vertex_count()).filter(|&u| g.depth(u) <= 4).all(|u| !m.shadow(u).is_empty()));
    }

    #[test]
    fn cone_examples() {
        let g = build_tree(3, 6).unwrap();
        let m = tree_model(&g, 5, 0.3);
        assert_eq!(m.cone(&m.all_proxies()), g.all_vertices());
        assert!(m.cone(&m.empty_proxies()).is_empty());
        // U = leaves under the first child gives the subtree of that child
        let d = g.distances_from(1);
        let subtree = VertexSet::from_predicate(g.vertex_count(), |u| d.get(u) as usize + 1 == g.depth(u));
        assert_eq!(m.cone(&leaves_under(&m, 1)), subtree);
        let mut almost = m.all_proxies();
        almost.remove(0);
        assert!(!m.cone(&almost).contains(0));
    }

    #[test]
    fn boundary_balls_on_tree() {
        let g = build_tree(3, 6).unwrap();
        let eps = 0.4;
        let m = tree_model(&g, 5, eps);
        assert_eq!(m.distance(3, 3), 0.0);
        assert!((m.diameter() - 1.0).abs() < 1e-15);
        assert_eq!(m.ball(0, 1.0), m.all_proxies());
        // leaves branching from ξ0 at depth >= 2: the subtree of its depth-2 ancestor
        let b = m.ball(0, (-eps * 2.0).exp());
        let anc = (0..g.vertex_count()).find(|&u| g.depth(u) == 2 && m.shadow(u).contains(0)).unwrap();
        assert_eq!(b, leaves_under(&m, anc));
        let anc3 = (0..g.vertex_count()).find(|&u| g.depth(u) == 3 && m.shadow(u).contains(0)).unwrap();
        let sphere = m.annulus(0, (-eps * 2.0).exp(), 0.0);
        assert_eq!(sphere, b.difference(&leaves_under(&m, anc3)));
    }

    #[test]
    fn separating_examples() {
        let g = build_tree(3, 8).unwrap();
        let m = tree_model(&g, 7, 1.0);
        let k = ShadowConstants { c1: 1.0, c2: 1.0, sampled_pairs: 0, vacuous: true };
        // annulus beyond the diameter
        let s = separating_set(&m, &k, 0, 1.0, 2);
        assert!(s.set.is_empty());
        for xi0 in [0, 17, 100] {
            for n in 4..=7 {
                for r in [0.01, 0.05, 0.1, 0.3] {
                    let c = separating_lemma_check(&m, &k, xi0, r, n);
                    assert!(c.holds(), "{c:?}");
                }
            }
        }
    }

    #[test]
    fn separating_set_cuts_cones() {
        // no edge joins cone(B_r) to cone(complement of B_{r+4t_n}) outside B_n
        // without passing through the separating set
        let g = build_tree(3, 8).unwrap();
        let m = tree_model(&g, 7, 1.0);
        let k = ShadowConstants { c1: 1.0, c2: 1.0, sampled_pairs: 0, vacuous: true };
        for (xi0, r, n) in [(0, 0.02, 6), (40, 0.05, 5), (90, 0.01, 7)] {
            let s = separating_set(&m, &k, xi0, r, n);
            let inner = m.cone(&m.ball(xi0, r));
            let outer = m.cone(&m.ball(xi0, r + 4.0 * s.t_n).complement());
            let bn = g.base_ball(n);
            let blocked = s.set.union(&bn);
            let reach = flood(&g, &inner.difference(&blocked), &blocked);
            assert!(reach.is_disjoint(&outer.difference(&blocked)));
        }
    }

    fn flood(g: &Graph, seeds: &VertexSet, blocked: &VertexSet) -> VertexSet {
        let mut seen = seeds.clone();
        let mut stack = seeds.to_vec();
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !blocked.contains(w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    #[test]
    fn shadow_constants_on_trees() {
        for eps in [0.0866, 0.5, 1.0] {
            let g = build_tree(3, 7).unwrap();
            let m = tree_model(&g, 6, eps);
            let k = fit_shadow_constants(&m, 300, 1).unwrap();
            assert_eq!((k.c1, k.c2), (1.0, 1.0), "eps {eps}");
        }
        let g = build_tree(3, 4).unwrap();
        let m = tree_model(&g, 3, 0.2);
        let k = fit_shadow_constants(&m, 0, 1).unwrap();
        assert!(k.vacuous);
        assert_eq!((k.c1, k.c2), (1.0, 1.0));
    }

    #[test]
    fn cone_membership_on_tree() {
        let g = build_tree(3, 7).unwrap();
        let m = tree_model(&g, 6, 0.7);
        let mut r = rng::stream(3, 77);
        let mut checked = 0;
        for _ in 0..3000 {
            let xi = r.random_range(0..m.proxy_count());
            let xi0 = r.random_range(0..m.proxy_count());
            let us = m.u_set(xi);
            let u = us.iter().nth(r.random_range(0..us.len())).unwrap();
            let rad = r.random_range(0.0..1.2);
            if let Some(ok) = cone_membership(&m, 1.0, u, xi, xi0, rad) {
                assert!(ok);
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn cone_monotone() {
        let g = build_tree(3, 6).unwrap();
        let m = tree_model(&g, 5, 0.5);
        let mut r = rng::stream(4, 77);
        for _ in 0..50 {
            let a = ProxySet::from_predicate(m.proxy_count(), |_| r.random_bool(0.6));
            let b = a.union(&ProxySet::from_predicate(m.proxy_count(), |_| r.random_bool(0.3)));
            assert!(m.cone(&a).is_subset(&m.cone(&b)));
        }
    }

    #[test]
    fn cone_topology_on_tree() {
        let g = build_tree(3, 7).unwrap();
        let m = tree_model(&g, 6, 0.8);
        for (i, r) in [(0, 0.3), (20, 0.1), (50, 0.5)] {
            let t = cone_topology_check(&m, i, r);
            assert!(t.cone_inside_ball.is_some() && t.ball_inside_cone.is_some(), "{t:?}");
        }
    }
}
