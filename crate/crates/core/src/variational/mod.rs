//! Energy, Laplacian, the Dirichlet solver and executable forms of the
//! minimiser lemmas.

mod solver;

pub use solver::{
    solve_dirichlet, SolveTelemetry, Solution, SolverConfig, Start, StartOutcome, SweepMode, TieBreak, VertexMinimizer,
    SCAN_POINTS,
};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::potential::{potential_excess, Potential, PotentialConstants};
use crate::rng;
use rand::seq::index;
use rand::RngExt;
use serde::Serialize;

/// Slack for pointwise ordering of solutions.
pub const ORDER_TOL: f64 = 1e-9;
/// Slack for energy inequalities.
pub const ENERGY_TOL: f64 = 1e-12;
/// Slack for the box `[c0, c1]`.
pub const TRAP_TOL: f64 = 1e-12;

/// A value per vertex, bound to the graph it was created for.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldState {
    pub values: Vec<f64>,
    pub graph_id: u64,
}

impl FieldState {
    pub fn constant(g: &Graph, c: f64) -> Self {
        Self { values: vec![c; g.vertex_count()], graph_id: g.id() }
    }

    pub fn from_values(g: &Graph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.vertex_count() {
            return Err(invalid(format!("expected {} values, got {}", g.vertex_count(), values.len())));
        }
        if let Some(u) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at vertex {u}")));
        }
        Ok(Self { values, graph_id: g.id() })
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.graph_id != g.id() || self.values.len() != g.vertex_count() {
            return Err(Error::GraphMismatch);
        }
        Ok(())
    }

    pub fn get(&self, u: usize) -> f64 {
        self.values[u]
    }

    /// `sup_{u ∈ s} |self_u - other_u|`.
    pub fn max_abs_diff(&self, other: &Self, s: &VertexSet) -> f64 {
        s.iter().map(|u| (self.values[u] - other.values[u]).abs()).fold(0.0, f64::max)
    }

    /// Pointwise `min` and `max`.
    pub fn min_max(&self, other: &Self) -> (Self, Self) {
        let lo = self.values.iter().zip(&other.values).map(|(a, b)| a.min(*b)).collect();
        let hi = self.values.iter().zip(&other.values).map(|(a, b)| a.max(*b)).collect();
        (Self { values: lo, graph_id: self.graph_id }, Self { values: hi, graph_id: self.graph_id })
    }
}

pub(crate) fn check_region(g: &Graph, b: &VertexSet) -> Result<()> {
    if b.universe() != g.vertex_count() {
        return Err(Error::GraphMismatch);
    }
    if let Some(u) = b.intersection(g.rim()).first() {
        return Err(Error::Clipped(format!("vertex {u} lies on the truncation rim")));
    }
    Ok(())
}

/// `Δ_u x = Σ_{w ~ u} (x_w - x_u)`.
pub fn laplacian(g: &Graph, x: &FieldState, u: usize) -> Result<f64> {
    x.check_graph(g)?;
    g.check_vertex(u)?;
    if g.is_rim(u) {
        return Err(Error::Clipped(format!("vertex {u} lies on the truncation rim")));
    }
    Ok(lap(g, &x.values, u))
}

fn lap(g: &Graph, x: &[f64], u: usize) -> f64 {
    g.neighbors(u).iter().map(|&w| x[w] - x[u]).sum()
}

fn site_energy(g: &Graph, p: &Potential, x: &[f64], u: usize) -> f64 {
    let grad: f64 = g.neighbors(u).iter().map(|&w| (x[w] - x[u]).powi(2)).sum();
    0.25 * grad + p.value(x[u])
}

/// Truncated action `W_B(x) = Σ_{g∈B} (¼ |∇_g x|² + V(x_g))`.
pub fn energy(g: &Graph, p: &Potential, x: &FieldState, b: &VertexSet) -> Result<f64> {
    x.check_graph(g)?;
    check_region(g, b)?;
    Ok(b.iter().map(|u| site_energy(g, p, &x.values, u)).sum())
}

/// The part of `W_{B^out}` that depends on values inside `b`: every edge
/// meeting `b` with weight ½ plus `V` on `b`.
pub fn dirichlet_energy(g: &Graph, p: &Potential, x: &FieldState, b: &VertexSet) -> Result<f64> {
    x.check_graph(g)?;
    check_region(g, b)?;
    let v = &x.values;
    let mut e = 0.0;
    for u in b.iter() {
        e += p.value(v[u]);
        for &w in g.neighbors(u) {
            let d2 = (v[w] - v[u]).powi(2);
            // inner edges are visited from both ends
            e += if b.contains(w) { 0.25 * d2 } else { 0.5 * d2 };
        }
    }
    Ok(e)
}

/// `sup_{u∈B} |Δ_u x - V'(x_u)|`.
pub fn el_residual(g: &Graph, p: &Potential, x: &FieldState, b: &VertexSet) -> Result<f64> {
    x.check_graph(g)?;
    check_region(g, b)?;
    Ok(b.iter().map(|u| (lap(g, &x.values, u) - p.derivative(x.values[u])).abs()).fold(0.0, f64::max))
}

/// `W(x + y) - W(x)` for a finitely supported `y` given as `(vertex, value)`
/// pairs, evaluated on the outer set of the support.
pub fn perturbation_gap(g: &Graph, p: &Potential, x: &FieldState, y: &[(usize, f64)]) -> Result<f64> {
    x.check_graph(g)?;
    let support = VertexSet::from_ids(g.vertex_count(), y.iter().map(|&(u, _)| u));
    check_region(g, &support)?;
    let region = g.outer_set(&support);
    let mut moved = x.values.clone();
    for &(u, dy) in y {
        moved[u] += dy;
    }
    Ok(region.iter().map(|u| site_energy(g, p, &moved, u) - site_energy(g, p, &x.values, u)).sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityReport {
    pub trials: usize,
    pub min_gap: f64,
    pub passed: bool,
}

/// Random perturbations supported in `b` with amplitudes uniform in
/// `[-scale, scale]`; passes when no gap falls below `-1e-9`.
pub fn verify_local_minimality(
    g: &Graph,
    p: &Potential,
    x: &FieldState,
    b: &VertexSet,
    trials: usize,
    scale: f64,
    seed: u64,
) -> Result<MinimalityReport> {
    x.check_graph(g)?;
    check_region(g, b)?;
    let ids = b.to_vec();
    let mut min_gap = f64::INFINITY;
    if ids.is_empty() || trials == 0 {
        return Ok(MinimalityReport { trials: 0, min_gap: 0.0, passed: true });
    }
    let mut r = rng::stream(seed, 4);
    for _ in 0..trials {
        let k = r.random_range(1..=ids.len());
        let y: Vec<(usize, f64)> = index::sample(&mut r, ids.len(), k)
            .into_iter()
            .map(|i| (ids[i], r.random_range(-scale..=scale)))
            .collect();
        min_gap = min_gap.min(perturbation_gap(g, p, x, &y)?);
    }
    Ok(MinimalityReport { trials, min_gap, passed: min_gap >= -ORDER_TOL })
}

/// `(W_B(x) + W_B(y), W_B(max) + W_B(min))`.
pub fn minmax_check(g: &Graph, p: &Potential, x: &FieldState, y: &FieldState, b: &VertexSet) -> Result<(f64, f64)> {
    y.check_graph(g)?;
    let (lo, hi) = x.min_max(y);
    let lhs = energy(g, p, x, b)? + energy(g, p, y, b)?;
    let rhs = energy(g, p, &hi, b)? + energy(g, p, &lo, b)?;
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Strict,
    Identical,
    /// Ordered but touching somewhere without being identical; excluded for
    /// exact minimisers.
    Mixed,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// `max_{u∈B} (x_low - x_high)`.
    pub max_violation: f64,
    pub ordered: bool,
    pub outcome: Ordering,
    pub low: Solution,
    pub high: Solution,
}

/// Solves with ordered data `f_low <= f_high` and compares the solutions.
pub fn comparison_check(
    g: &Graph,
    p: &Potential,
    b: &VertexSet,
    f_low: &FieldState,
    f_high: &FieldState,
    cfg: &SolverConfig,
) -> Result<ComparisonReport> {
    let ring = g.iterate_out(b, 2).difference(b);
    f_low.check_graph(g)?;
    f_high.check_graph(g)?;
    if let Some(u) = ring.iter().find(|&u| f_low.values[u] > f_high.values[u]) {
        return Err(invalid(format!("boundary data not ordered at vertex {u}")));
    }
    let low = solve_dirichlet(g, p, b, f_low, cfg)?;
    let high = solve_dirichlet(g, p, b, f_high, cfg)?;
    let diffs: Vec<f64> = b.iter().map(|u| high.field.values[u] - low.field.values[u]).collect();
    let max_violation = diffs.iter().map(|d| -d).fold(f64::NEG_INFINITY, f64::max);
    let max_violation = if diffs.is_empty() { 0.0 } else { max_violation };
    let outcome = if diffs.iter().all(|d| d.abs() <= ORDER_TOL) {
        Ordering::Identical
    } else if diffs.iter().all(|&d| d > 0.0) {
        Ordering::Strict
    } else {
        Ordering::Mixed
    };
    Ok(ComparisonReport { max_violation, ordered: max_violation <= ORDER_TOL, outcome, low, high })
}

/// `c0 <= x <= c1` on `(B^out)^out`, up to `1e-12`.
pub fn trapping_check(g: &Graph, p: &Potential, x: &FieldState, b: &VertexSet) -> Result<bool> {
    x.check_graph(g)?;
    Ok(g.iterate_out(b, 2).iter().all(|u| {
        let v = x.values[u];
        v >= p.c0() - TRAP_TOL && v <= p.c1() + TRAP_TOL
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionSets {
    /// `x ∈ [c0, c1 - 2bρ)`.
    pub low: VertexSet,
    /// `x ∈ [c1 - 2bρ, c1 - ρ)`.
    pub high: VertexSet,
}

pub fn transition_sets(x: &FieldState, b: &VertexSet, rho: f64, k: &PotentialConstants) -> TransitionSets {
    let p = k.potential();
    let split = p.c1() - 2.0 * k.b * rho;
    let top = p.c1() - rho;
    let n = b.universe();
    let low = VertexSet::from_predicate(n, |u| b.contains(u) && x.values[u] >= p.c0() && x.values[u] < split);
    let high = VertexSet::from_predicate(n, |u| b.contains(u) && x.values[u] >= split && x.values[u] < top);
    TransitionSets { low, high }
}

/// `k0 = S max{1, k̃2} / k̃1` with `k̃1 = min{1, β(ρ), ((c1-c0-4bρ)² - ρ²)/4}`
/// and `k̃2 = max{S (c1-c0)², 2S/m1}`.
pub fn derived_k0(k: &PotentialConstants, rho: f64, max_degree: usize) -> f64 {
    let s = max_degree as f64;
    let w = k.potential().width();
    let k1 = 1f64.min(k.beta(rho)).min(((w - 4.0 * k.b * rho).powi(2) - rho * rho) / 4.0);
    let k2 = (s * w * w).max(2.0 * s / k.m1);
    s * k2.max(1.0) / k1
}

#[derive(Clone, Debug, Serialize)]
pub struct TsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub k0: f64,
    pub holds: bool,
    /// Smallest constant for which this instance satisfies the inequality.
    pub k0_needed: f64,
}

/// `#(∂^out B^l ∩ D^(2inn)) + P_{B^h ∩ D^inn}(x, c1-ρ)` against
/// `k0 (#(B^l ∩ ∂^f D) + P_{B^h ∩ ∂^out D}(x, c1-ρ))`.
pub fn ts_inequality_check(
    g: &Graph,
    x: &FieldState,
    b: &VertexSet,
    d: &VertexSet,
    rho: f64,
    k: &PotentialConstants,
) -> Result<TsReport> {
    x.check_graph(g)?;
    let p = k.potential();
    let ts = transition_sets(x, b, rho, k);
    let c = p.c1() - rho;
    let d_inn = g.inner_set(d);
    let d_inn2 = g.iterate_inn(d, 2);
    let lhs = g.boundary_out(&ts.low).intersection_count(&d_inn2) as f64
        + potential_excess(p, &x.values, &ts.high.intersection(&d_inn), c);
    let rhs = ts.low.intersection_count(&g.boundary_full(d)) as f64
        + potential_excess(p, &x.values, &ts.high.intersection(&g.boundary_out(d)), c);
    let k0 = derived_k0(k, rho, g.max_degree());
    let k0_needed = if lhs <= 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    };
    Ok(TsReport { lhs, rhs, k0, holds: lhs <= k0 * rhs + ENERGY_TOL, k0_needed })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub components: usize,
    /// Smallest vertex id of each component that fails to reach `∂^out B`.
    pub failing: Vec<usize>,
    pub passed: bool,
}

/// Every component of `B^l` must have a neighbour outside `b`.
pub fn component_boundary_check(
    g: &Graph,
    x: &FieldState,
    b: &VertexSet,
    rho: f64,
    k: &PotentialConstants,
) -> Result<ComponentReport> {
    x.check_graph(g)?;
    let ts = transition_sets(x, b, rho, k);
    let outside = g.boundary_out(b);
    let comps = g.connected_components(&ts.low);
    let failing: Vec<usize> = comps
        .iter()
        .filter(|c| g.outer_set(c).is_disjoint(&outside))
        .filter_map(|c| c.first())
        .collect();
    Ok(ComponentReport { components: comps.len(), passed: failing.is_empty(), failing })
}
