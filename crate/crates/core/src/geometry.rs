//! Hyperbolicity estimates, visuality, and the visual metric on horizon
//! proxies through Gromov products based at the base vertex.

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, VertexSet, UNREACHED};
use crate::rng;
use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryReport {
    pub delta_four_point: f64,
    pub delta_slim_sampled: f64,
    pub visuality_constant: f64,
    pub delta_used: f64,
    pub sample_size: usize,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VisualMetric {
    pub epsilon: f64,
    pub lambda: f64,
    pub horizon_radius: usize,
}

impl VisualMetric {
    /// `e^{-ε p}` for a Gromov product `p`.
    pub fn from_product(&self, product: f64) -> f64 {
        (-self.epsilon * product).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadrupleMode {
    Exhaustive,
    Sampled { quadruples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourPointEstimate {
    pub delta: f64,
    pub quadruples: usize,
    pub exact: bool,
}

/// Graphs up to this size are always treated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 64;
const POOL_SIZE: usize = 64;

fn product_from(da: u32, db: u32, dab: u32) -> f64 {
    (da as f64 + db as f64 - dab as f64) / 2.0
}

/// `(a|b)_v = (|a| + |b| - d(a,b)) / 2` at the base vertex.
pub fn gromov_product(g: &Graph, a: usize, b: usize) -> f64 {
    let da = g.distances_from(a);
    product_from(g.depth(a) as u32, g.depth(b) as u32, da.get(b))
}

fn four_point_value(d: &dyn Fn(usize, usize) -> u32, x: usize, y: usize, z: usize, w: usize) -> f64 {
    let xz = product_from(d(x, w), d(z, w), d(x, z));
    let yz = product_from(d(y, w), d(z, w), d(y, z));
    let xy = product_from(d(x, w), d(y, w), d(x, y));
    xz.min(yz) - xy
}

/// Four-point hyperbolicity constant. Graphs with at most
/// [`EXHAUSTIVE_LIMIT`] vertices are always scanned exhaustively.
///
/// Sampled mode draws corners from a fixed seeded pool of vertices that
/// always contains the base vertex, which is used as the basepoint `w` in
/// every other quadruple. Samples form a prefix stream, so asking for more
/// quadruples never lowers the estimate.
pub fn estimate_delta_four_point(g: &Graph, mode: QuadrupleMode) -> FourPointEstimate {
    let n = g.vertex_count();
    if n <= EXHAUSTIVE_LIMIT || mode == QuadrupleMode::Exhaustive {
        let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| g.distances_from(s).dist).collect();
        let d = |a: usize, b: usize| rows[a][b];
        let delta = (0..n)
            .into_par_iter()
            .map(|w| {
                let mut best = 0.0f64;
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            best = best.max(four_point_value(&d, x, y, z, w));
                        }
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max);
        return FourPointEstimate { delta, quadruples: n.pow(4), exact: true };
    }
    let QuadrupleMode::Sampled { quadruples, seed } = mode else { unreachable!() };
    let mut r = rng::stream(seed, 1);
    let mut pool = vec![g.base_vertex()];
    while pool.len() < POOL_SIZE.min(n) {
        let u = r.random_range(0..n);
        if !pool.contains(&u) {
            pool.push(u);
        }
    }
    let rows: Vec<Vec<u32>> = pool.par_iter().map(|&s| g.distances_from(s).dist).collect();
    let k = pool.len();
    let d = |a: usize, b: usize| rows[a][pool[b]];
    let samples: Vec<[usize; 4]> = (0..quadruples)
        .map(|i| {
            let w = if i % 2 == 0 { 0 } else { r.random_range(0..k) };
            [r.random_range(0..k), r.random_range(0..k), r.random_range(0..k), w]
        })
        .collect();
    let delta = samples
        .par_iter()
        .map(|&[x, y, z, w]| four_point_value(&d, x, y, z, w))
        .reduce(|| 0.0, f64::max)
        .max(0.0);
    FourPointEstimate { delta, quadruples, exact: false }
}

/// Geodesic from `from` to the source of `to_field`, stepping to the
/// lowest-id neighbour that is one closer.
pub fn bfs_geodesic(g: &Graph, from: usize, to_field: &[u32]) -> Vec<usize> {
    let mut path = vec![from];
    let mut u = from;
    while to_field[u] > 0 {
        u = *g
            .neighbors(u)
            .iter()
            .find(|&&w| to_field[w] + 1 == to_field[u])
            .expect("distance field has a descending neighbour");
        path.push(u);
    }
    path
}

/// Slimness defect of the triangle `(a, b, c)` with deterministic sides.
pub fn triangle_slimness(g: &Graph, a: usize, b: usize, c: usize) -> f64 {
    let fa = g.distances_from(a).dist;
    let fb = g.distances_from(b).dist;
    let fc = g.distances_from(c).dist;
    let sides = [bfs_geodesic(g, a, &fb), bfs_geodesic(g, b, &fc), bfs_geodesic(g, c, &fa)];
    let mut worst = 0u32;
    for i in 0..3 {
        let others = sides[(i + 1) % 3].iter().chain(sides[(i + 2) % 3].iter()).copied();
        let dist = g.multi_source_bfs(others, u32::MAX);
        for &u in &sides[i] {
            worst = worst.max(dist[u]);
        }
    }
    worst as f64
}

/// Largest slimness defect over seeded random triangles.
pub fn estimate_delta_slim(g: &Graph, sample_triangles: usize, seed: u64) -> f64 {
    let n = g.vertex_count();
    let mut r = rng::stream(seed, 2);
    let triangles: Vec<[usize; 3]> = (0..sample_triangles)
        .map(|_| [r.random_range(0..n), r.random_range(0..n), r.random_range(0..n)])
        .collect();
    triangles
        .par_iter()
        .map(|&[a, b, c]| triangle_slimness(g, a, b, c))
        .reduce(|| 0.0, f64::max)
}

/// `{u : |u| + d(u, target) = |target|}`, the union of geodesics from the
/// base vertex to `target`.
pub fn geodesic_membership(g: &Graph, target: usize) -> VertexSet {
    let d = g.distances_from(target);
    let t = g.depth(target) as u32;
    VertexSet::from_predicate(g.vertex_count(), |u| g.depths()[u] + d.dist[u] == t)
}

/// Largest distance from a vertex with `|u| <= R - margin` to the nearest
/// geodesic from the base vertex to the sphere of radius `R`.
pub fn visuality_constant(g: &Graph, horizon_radius: usize, margin: f64) -> Result<f64> {
    if horizon_radius > g.r_max() {
        return Err(Error::Clipped(format!(
            "horizon radius {horizon_radius} exceeds truncation radius {}",
            g.r_max()
        )));
    }
    let proxies = g.base_sphere(horizon_radius).to_vec();
    if proxies.is_empty() {
        return Err(Error::Empty(format!("sphere of radius {horizon_radius}")));
    }
    let n = g.vertex_count();
    let nearest = proxies
        .par_iter()
        .map(|&p| g.distance_to_set(&geodesic_membership(g, p)))
        .reduce(|| vec![UNREACHED; n], |a, b| a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect());
    let limit = horizon_radius as f64 - margin;
    Ok((0..n)
        .filter(|&u| g.depth(u) as f64 <= limit)
        .map(|u| nearest[u] as f64)
        .fold(0.0, f64::max))
}

/// Default `ε = ln 2 / (8 (δ + 1))`, or a validated override.
pub fn choose_epsilon(delta_used: f64, epsilon_override: Option<f64>) -> Result<f64> {
    if delta_used < 0.0 || !delta_used.is_finite() {
        return Err(invalid(format!("delta must be a finite non-negative number, got {delta_used}")));
    }
    match epsilon_override {
        Some(e) if e > 0.0 && e.is_finite() => Ok(e),
        Some(e) => Err(invalid(format!("epsilon override must be positive, got {e}"))),
        None => Ok(std::f64::consts::LN_2 / (8.0 * (delta_used + 1.0))),
    }
}

/// `e^{-ε (a|b)_v}` between two vertices.
pub fn visual_distance(vm: &VisualMetric, g: &Graph, a: usize, b: usize) -> f64 {
    vm.from_product(gromov_product(g, a, b))
}

/// Distance from the base vertex to the union of geodesics between `a`
/// and `b`, together with `d(a, b)`.
pub fn distance_to_geodesics(g: &Graph, a: usize, b: usize) -> (u32, u32) {
    let da = g.distances_from(a).dist;
    let db = g.distances_from(b).dist;
    let dab = da[b];
    let closest = (0..g.vertex_count())
        .filter(|&u| da[u] + db[u] == dab)
        .map(|u| g.depths()[u])
        .min()
        .expect("endpoints lie on their geodesics");
    (closest, dab)
}

/// Smallest `λ >= 1` comparing `e^{-ε (a|b)}` with `e^{-ε d(v, γ_ab)}` over
/// seeded random pairs of horizon vertices.
pub fn fit_lambda(vm: &VisualMetric, g: &Graph, horizon: &[usize], sample: usize, seed: u64) -> f64 {
    if horizon.is_empty() {
        return 1.0;
    }
    let mut r = rng::stream(seed, 3);
    let pairs: Vec<(usize, usize)> = (0..sample)
        .map(|_| (horizon[r.random_range(0..horizon.len())], horizon[r.random_range(0..horizon.len())]))
        .collect();
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let (closest, dab) = distance_to_geodesics(g, a, b);
            let p = product_from(g.depth(a) as u32, g.depth(b) as u32, dab);
            (vm.epsilon * (p - closest as f64).abs()).exp()
        })
        .reduce(|| 1.0, f64::max)
}

#[derive(Clone, Copy, Debug)]
pub struct GeometrySampling {
    pub quadruples: usize,
    pub triangles: usize,
    pub seed: u64,
}

impl Default for GeometrySampling {
    fn default() -> Self {
        Self { quadruples: 20_000, triangles: 200, seed: 0 }
    }
}

/// All three hyperbolicity estimates and their maximum.
pub fn geometry_report(g: &Graph, horizon_radius: usize, s: GeometrySampling) -> Result<GeometryReport> {
    let four = estimate_delta_four_point(g, QuadrupleMode::Sampled { quadruples: s.quadruples, seed: s.seed });
    let slim = estimate_delta_slim(g, s.triangles, s.seed);
    let vis = visuality_constant(g, horizon_radius, four.delta + 1.0)?;
    Ok(GeometryReport {
        delta_four_point: four.delta,
        delta_slim_sampled: slim,
        visuality_constant: vis,
        delta_used: four.delta.max(slim).max(vis),
        sample_size: four.quadruples,
        exact: four.exact,
    })
}
