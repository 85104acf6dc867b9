//! The construction behind the existence theorem: a split of the horizon
//! into `D0` and `D1`, the datum `x̃`, minimisers on an exhaustion by balls,
//! the quantitative constants and the checks that watch the mechanism at
//! feasible scale.

use crate::boundary::BoundaryModel;
use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, ProxySet, VertexSet};
use crate::potential::{potential_excess, Potential, PotentialConstants};
use crate::variational::{solve_dirichlet, transition_sets, FieldState, Solution, SolverConfig, Start, TieBreak};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

/// Cap on monitor rows when `n_i` grows slowly.
pub const MAX_MONITOR_ROWS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitSpec {
    /// `D1 = B_r(ξ)` for the proxy at horizon vertex `center`.
    Ball { center: usize, radius: f64 },
    /// `D1` is the union of the shadows of the listed vertices.
    Shadows { vertices: Vec<usize> },
    /// `D1` given by horizon vertex ids.
    Proxies { vertices: Vec<usize> },
    /// First half of the horizon in angular order when the graph carries
    /// coordinates, in vertex order otherwise.
    Half,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundarySplit {
    pub d0: ProxySet,
    pub d1: ProxySet,
    /// Proxies shared by both sides.
    pub frontier: ProxySet,
    pub spec: String,
    pub r_min: f64,
}

impl BoundarySplit {
    pub fn side(&self, j: usize) -> &ProxySet {
        if j == 0 {
            &self.d0
        } else {
            &self.d1
        }
    }

    pub fn interior(&self, j: usize) -> ProxySet {
        self.side(j).difference(&self.frontier)
    }

    /// `D0 ↔ D1`.
    pub fn swapped(&self) -> Self {
        Self {
            d0: self.d1.clone(),
            d1: self.d0.clone(),
            frontier: self.frontier.clone(),
            spec: format!("swapped({})", self.spec),
            r_min: self.r_min,
        }
    }
}

fn proxy_of(model: &BoundaryModel, vertex: usize) -> Result<usize> {
    model
        .proxy_index(vertex)
        .ok_or_else(|| invalid(format!("vertex {vertex} is not on the horizon")))
}

/// Largest distance from a proxy to its nearest other proxy: every ball of
/// this radius holds at least two proxies.
pub fn default_r_min(model: &BoundaryModel) -> f64 {
    let h = model.proxy_count();
    (0..h)
        .into_par_iter()
        .map(|i| (0..h).filter(|&j| j != i).map(|j| model.distance(i, j)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

fn contains_ball(model: &BoundaryModel, side: &ProxySet, r: f64) -> bool {
    side.iter().any(|i| model.ball(i, r).is_subset(side))
}

pub fn make_split(model: &BoundaryModel, spec: &SplitSpec, r_min: Option<f64>) -> Result<BoundarySplit> {
    let h = model.proxy_count();
    let d1 = match spec {
        SplitSpec::Ball { center, radius } => {
            if !(*radius > 0.0) {
                return Err(invalid("split radius must be positive"));
            }
            model.ball(proxy_of(model, *center)?, *radius)
        }
        SplitSpec::Shadows { vertices } => {
            let mut s = model.empty_proxies();
            for &u in vertices {
                model.graph().check_vertex(u)?;
                s.union_with(model.shadow(u));
            }
            s
        }
        SplitSpec::Proxies { vertices } => {
            let ids = vertices.iter().map(|&u| proxy_of(model, u)).collect::<Result<Vec<_>>>()?;
            ProxySet::from_ids(h, ids)
        }
        SplitSpec::Half => {
            let mut order: Vec<usize> = (0..h).collect();
            if let Some(xy) = model.graph().coordinates() {
                let angle = |i: usize| {
                    let [x, y] = xy[model.vertex_of(i)];
                    y.atan2(x).rem_euclid(2.0 * PI)
                };
                order.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
            }
            ProxySet::from_ids(h, order[..h / 2].iter().copied())
        }
    };
    let complement = d1.complement();
    if d1.is_empty() || complement.is_empty() {
        return Err(invalid("split must leave both sides nonempty"));
    }
    let res = model.resolution();
    let frontier =
        ProxySet::from_predicate(h, |i| d1.contains(i) && complement.iter().any(|j| model.distance(i, j) <= res));
    let d0 = complement.union(&frontier);
    let r_min = r_min.unwrap_or_else(|| default_r_min(model));
    for (name, side) in [("D0", &d0), ("D1", &d1)] {
        if !contains_ball(model, side, r_min) {
            return Err(invalid(format!("{name} contains no visual ball of radius {r_min}")));
        }
    }
    Ok(BoundarySplit { d0, d1, frontier, spec: format!("{spec:?}"), r_min })
}

/// `c1` on the cone over the interior of `D1`, `c0` elsewhere.
pub fn tilde_x(model: &BoundaryModel, split: &BoundarySplit, p: &Potential) -> FieldState {
    let cone = model.cone(&split.interior(1));
    let g = model.graph();
    let values = (0..g.vertex_count()).map(|u| if cone.contains(u) { p.c1() } else { p.c0() }).collect();
    FieldState::from_values(g, values).expect("one value per vertex")
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveRow {
    pub n: usize,
    pub region_size: usize,
    pub sweeps: usize,
    pub residual: f64,
    pub energy: f64,
    pub converged: bool,
    pub winner: Start,
    pub clamped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExhaustionReport {
    pub rows: Vec<SolveRow>,
    pub window_radius: usize,
    /// `sup |x^{N_{k+1}} - x^{N_k}|` over the window.
    pub deltas: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Some delta increased.
    pub non_monotone: bool,
    /// Some delta more than doubled.
    pub hard_failure: bool,
}

pub struct Exhaustion {
    pub n_list: Vec<usize>,
    pub solutions: Vec<Solution>,
    pub report: ExhaustionReport,
}

impl Exhaustion {
    pub fn field(&self, k: usize) -> &FieldState {
        &self.solutions[k].field
    }

    pub fn last(&self) -> &FieldState {
        self.field(self.solutions.len() - 1)
    }
}

/// Minimisers on `B_N` with data `x̃` for each `N` of `n_list`.
pub fn exhaustion_solve(
    model: &BoundaryModel,
    split: &BoundarySplit,
    p: &Potential,
    n_list: &[usize],
    cfg: &SolverConfig,
) -> Result<Exhaustion> {
    exhaustion_solve_datum(model, &tilde_x(model, split, p), p, n_list, cfg)
}

/// [`exhaustion_solve`] with an explicit datum outside the balls.
pub fn exhaustion_solve_datum(
    model: &BoundaryModel,
    f: &FieldState,
    p: &Potential,
    n_list: &[usize],
    cfg: &SolverConfig,
) -> Result<Exhaustion> {
    let g = model.graph();
    f.check_graph(g)?;
    if n_list.is_empty() {
        return Err(invalid("N list is empty"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N list must be strictly increasing"));
    }
    let top = *n_list.last().unwrap();
    if top + 1 > model.radius() {
        return Err(invalid(format!("N = {top} must stay below the horizon radius {}", model.radius())));
    }
    if !g.base_ball(top + 1).is_disjoint(g.rim()) {
        return Err(Error::Clipped(format!("ball of radius {} meets the truncation rim", top + 1)));
    }
    let solutions = n_list
        .par_iter()
        .map(|&n| solve_dirichlet(g, p, &g.base_ball(n), f, cfg))
        .collect::<Result<Vec<_>>>()?;
    let window_radius = n_list[0];
    let window = g.base_ball(window_radius);
    let deltas: Vec<f64> = solutions.windows(2).map(|w| w[1].field.max_abs_diff(&w[0].field, &window)).collect();
    let ratios: Vec<f64> = deltas
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (a, b) if a > 0.0 => b / a,
            (_, b) if b > 0.0 => f64::INFINITY,
            _ => 0.0,
        })
        .collect();
    let rows = n_list
        .iter()
        .zip(&solutions)
        .map(|(&n, s)| SolveRow {
            n,
            region_size: g.base_ball(n).len(),
            sweeps: s.sweeps,
            residual: s.residual,
            energy: s.energy,
            converged: s.converged,
            winner: s.winner,
            clamped: s.clamped,
        })
        .collect();
    Ok(Exhaustion {
        n_list: n_list.to_vec(),
        report: ExhaustionReport {
            rows,
            window_radius,
            non_monotone: ratios.iter().any(|&r| r > 1.0),
            hard_failure: ratios.iter().any(|&r| r > 2.0),
            deltas,
            ratios,
        },
        solutions,
    })
}

/// Fitted quantities feeding the constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UpstreamFits {
    pub epsilon: f64,
    pub lambda: f64,
    pub d: f64,
    pub c_d: f64,
    pub c0_ip: f64,
    pub k0: f64,
    pub c1_shadow: f64,
    pub c2_shadow: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConstants {
    pub fits: UpstreamFits,
    pub r: f64,
    pub rho: f64,
    pub r1: f64,
    pub r0: f64,
    pub n_ratio: f64,
    /// `4 / max{4ε⁻¹e^{4ε}, C2}`, matching `t_n` of the separating sets.
    pub k1: f64,
    /// `(4 min{C2, 4ε⁻¹e^{4ε}})⁻¹`, the variant written with a minimum.
    pub k1_min_form: f64,
    pub k2: f64,
    pub k3: f64,
    pub n_bar: f64,
    pub log10_n_bar: f64,
    pub n0: f64,
    /// `n̄` exceeds the truncation radius.
    pub theoretical_only: bool,
    pub provenance: BTreeMap<String, String>,
}

impl PipelineConstants {
    pub fn r_i(&self, i: usize) -> f64 {
        6.0 * self.r / (PI * PI) * (1..=i).map(|j| 1.0 / (j * j) as f64).sum::<f64>()
    }

    pub fn d_i(&self, i: usize) -> f64 {
        6.0 * self.r / (PI * PI * ((i + 1) * (i + 1)) as f64)
    }

    pub fn n_i(&self, n1: f64, i: usize) -> f64 {
        n1 * self.n_ratio.powi(i as i32 - 1)
    }

    pub fn t_n(&self, n: usize) -> f64 {
        crate::boundary::t_n(self.fits.epsilon, self.fits.c2_shadow, n)
    }
}

pub fn derive_pipeline_constants(fits: UpstreamFits, r: f64, rho: f64, graph_radius: usize) -> Result<PipelineConstants> {
    let UpstreamFits { epsilon: e, d, c_d, c0_ip, k0, c2_shadow: c2, .. } = fits;
    for (name, v) in [("epsilon", e), ("D", d), ("C_D", c_d), ("C0", c0_ip), ("k0", k0), ("C2", c2), ("r", r), ("rho", rho)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let lead = 4.0 / e * (4.0 * e).exp();
    let k1 = 4.0 / lead.max(c2);
    let k1_min_form = 1.0 / (4.0 * lead.min(c2));
    let k2 = c_d.max((6.0 * k0 * c_d * c0_ip).powf((4.0 * d + 1.0) / (4.0 * d)));
    let k3 = (4.0 * (4.0 * d + 1.0) / e)
        .max(2.0 / e * ((k2 + 2.0 * c_d) * 4.0 * PI * PI / (6.0 * r * c_d * k1 * (-e).exp())).ln());
    let exponent = e * (d + 0.5) * k3;
    let log10_n_bar = k2.log10() + exponent / std::f64::consts::LN_10;
    let n_bar = (k2 * exponent.exp()).ceil();
    let r1 = 6.0 * r / (PI * PI);
    let provenance: BTreeMap<String, String> = [
        ("r_i", "r_i = (6 r / pi^2) * sum_{j=1..i} 1/j^2"),
        ("d_i", "d_i = r_{i+1} - r_i = 6 r / (pi^2 (i+1)^2)"),
        ("n_i", "n_{i+1} = ((D + 1/2) / (D + 1/4)) n_i"),
        ("t_n", "t_n = max{4 e^{4 eps} / eps, C2} e^{-eps n}"),
        ("k1", "k1 = 4 / max{4 e^{4 eps} / eps, C2}, so that t_n = 4 e^{-eps n} / k1"),
        ("k1_min_form", "k1' = 1 / (4 min{C2, 4 e^{4 eps} / eps})"),
        ("k2", "k2 = max{C_D, (6 k0 C_D C0)^((4D+1)/(4D))}"),
        ("k3", "k3 = max{4 (4D+1) / eps, (2/eps) ln((k2 + 2 C_D) 4 pi^2 / (6 r C_D k1 e^{-eps}))}"),
        ("n_bar", "n_bar = ceil(k2 e^{eps (D + 1/2) k3})"),
        ("r0", "r0 = r1 / 2 = 3 r / pi^2"),
        ("n0", "n0 = 2 n_bar"),
        ("rho", "rho = min{rho0, tolerance / (2 b)}"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    Ok(PipelineConstants {
        fits,
        r,
        rho,
        r1,
        r0: r1 / 2.0,
        n_ratio: (d + 0.5) / (d + 0.25),
        k1,
        k1_min_form,
        k2,
        k3,
        n_bar,
        log10_n_bar,
        n0: 2.0 * n_bar,
        theoretical_only: !(n_bar <= graph_radius as f64),
        provenance,
    })
}

/// `ρ = min{ρ0, tolerance / (2b)}`.
pub fn default_rho(pk: &PotentialConstants, tolerance: f64) -> f64 {
    pk.rho0.min(tolerance / (2.0 * pk.b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorRow {
    pub i: usize,
    pub n_i: f64,
    pub r_i: f64,
    pub low_count: usize,
    pub excess: f64,
    pub phi: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorReport {
    pub xi0: usize,
    pub n1: f64,
    pub rows: Vec<MonitorRow>,
    /// Some `Φ_i` reached its threshold.
    pub active: bool,
}

impl MonitorReport {
    pub fn vacuous(&self) -> bool {
        !self.active
    }
}

/// `Φ_i = #(C_{B_{r_i}(ξ0)} ∩ B_l) + P_{C_{B_{r_i}(ξ0)} ∩ B_h}(x, c1 - ρ)`
/// against `k2 e^{ε(D+1/4) n_i}` for each `n_i < N`.
pub fn main_lemma_monitor(
    model: &BoundaryModel,
    x: &FieldState,
    n: usize,
    pk: &PotentialConstants,
    consts: &PipelineConstants,
    xi0: usize,
    n1: f64,
) -> Result<MonitorReport> {
    if !(n1 > 0.0) {
        return Err(invalid("n1 must be positive"));
    }
    let g = model.graph();
    x.check_graph(g)?;
    let p = pk.potential();
    let ts = transition_sets(x, &g.base_ball(n), consts.rho, pk);
    let mut rows = Vec::new();
    let mut i = 1;
    while rows.len() < MAX_MONITOR_ROWS {
        let ni = consts.n_i(n1, i);
        if ni >= n as f64 {
            break;
        }
        let cone = model.cone(&model.ball(xi0, consts.r_i(i)));
        let low_count = cone.intersection_count(&ts.low);
        let excess = potential_excess(p, &x.values, &cone.intersection(&ts.high), p.c1() - consts.rho);
        let threshold = consts.k2 * (consts.fits.epsilon * (consts.fits.d + 0.25) * ni).exp();
        rows.push(MonitorRow { i, n_i: ni, r_i: consts.r_i(i), low_count, excess, phi: low_count as f64 + excess, threshold });
        i += 1;
    }
    let active = rows.iter().any(|r| r.phi >= r.threshold);
    Ok(MonitorReport { xi0, n1, rows, active })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeInclusion {
    pub n_bar: usize,
    pub lhs_size: usize,
    pub rhs_size: usize,
    pub violations: usize,
    pub holds: bool,
    pub vacuous: bool,
    /// `n̄ >= ε⁻¹ ln(π² / r)`, the size the inclusion is proved for.
    pub hypothesis_met: bool,
}

/// `C_{B_{r0}(ξ0)} \ B_{2n̄} ⊆ (C_{B_{r1}(ξ0)})^{(n̄ inn)}`.
pub fn cone_inclusion_check(model: &BoundaryModel, xi0: usize, r0: f64, r1: f64, n_bar: usize) -> Result<ConeInclusion> {
    if r0 > r1 {
        return Err(invalid(format!("r0 = {r0} exceeds r1 = {r1}")));
    }
    let g = model.graph();
    let lhs = model.cone(&model.ball(xi0, r0)).difference(&g.base_ball(2 * n_bar));
    let rhs = g.iterate_inn(&model.cone(&model.ball(xi0, r1)), n_bar);
    let violations = lhs.difference(&rhs).len();
    let r = r1 * PI * PI / 6.0;
    Ok(ConeInclusion {
        n_bar,
        lhs_size: lhs.len(),
        rhs_size: rhs.len(),
        violations,
        holds: violations == 0,
        vacuous: lhs.is_empty() && rhs.is_empty(),
        hypothesis_met: n_bar as f64 >= (PI * PI / r).ln() / model.metric().epsilon,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub proxy: usize,
    pub side: usize,
    /// Radius with `B_r(ξ) ⊆ D_side`.
    pub r: f64,
}

/// For each side, the interior proxy farthest from the other side, with
/// radius `margin` times that distance.
pub fn default_probes(model: &BoundaryModel, split: &BoundarySplit, margin: f64) -> Result<[Probe; 2]> {
    let pick = |j: usize| -> Result<Probe> {
        let other = split.side(j).complement();
        split
            .interior(j)
            .iter()
            .map(|i| (i, other.iter().map(|k| model.distance(i, k)).fold(f64::INFINITY, f64::min)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(proxy, gap)| Probe { proxy, side: j, r: margin * gap })
            .ok_or_else(|| Error::Empty(format!("interior of D{j}")))
    };
    Ok([pick(0)?, pick(1)?])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub probe: Probe,
    pub target: f64,
    pub r0: f64,
    pub n0_effective: usize,
    pub cone_size: usize,
    pub sup_deviation: f64,
    pub fraction_within: f64,
}

/// `sup |x_u - c_j|` over `C_{B_{r0}(ξ_j)} \ B_{n0}` with `r0 = 3r/π²`.
pub fn asymptotics_report(
    model: &BoundaryModel,
    x: &FieldState,
    split: &BoundarySplit,
    p: &Potential,
    probes: &[Probe],
    n0_effective: usize,
    tolerance: f64,
) -> Result<Vec<ProbeRow>> {
    let g = model.graph();
    x.check_graph(g)?;
    probes
        .iter()
        .map(|pr| {
            if pr.side > 1 {
                return Err(invalid("probe side must be 0 or 1"));
            }
            if !split.interior(pr.side).contains(pr.proxy) {
                return Err(invalid(format!("probe {} is not interior to D{}", pr.proxy, pr.side)));
            }
            if !model.ball(pr.proxy, pr.r).is_subset(split.side(pr.side)) {
                return Err(invalid(format!("ball of radius {} around probe {} leaves D{}", pr.r, pr.proxy, pr.side)));
            }
            let r0 = 3.0 * pr.r / (PI * PI);
            let cone = model.cone(&model.ball(pr.proxy, r0)).difference(&g.base_ball(n0_effective));
            if cone.is_empty() {
                return Err(Error::Empty(format!("truncated cone around probe {}", pr.proxy)));
            }
            let target = if pr.side == 0 { p.c0() } else { p.c1() };
            let devs: Vec<f64> = cone.iter().map(|u| (x.values[u] - target).abs()).collect();
            Ok(ProbeRow {
                probe: *pr,
                target,
                r0,
                n0_effective,
                cone_size: cone.len(),
                sup_deviation: devs.iter().copied().fold(0.0, f64::max),
                fraction_within: devs.iter().filter(|&&d| d <= tolerance).count() as f64 / devs.len() as f64,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathCheck {
    pub witness: usize,
    pub path: Option<Vec<usize>>,
    pub in_cone: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValuesAtInfinity {
    pub n_bar: usize,
    pub r1: f64,
    /// `#(C_{B_{r1}(ξ1)} ∩ B_l)`.
    pub low_in_cone: usize,
    /// `C_{B_{r1}(ξ1)}^{(n̄ inn)} ∩ B_l`.
    pub eroded_hits: Vec<usize>,
    pub paths: Vec<PathCheck>,
    /// `#(C ∩ B_l) < n̄`.
    pub count_below_n_bar: bool,
    /// No hit, or each hit is joined to the low boundary by a low path
    /// that meets the cone in at least `n̄` vertices.
    pub mechanism_consistent: bool,
}

/// Checks the values-at-infinity mechanism for the minimiser `x` on `B_N`
/// with the feasible `n̄`.
pub fn values_at_infinity(
    model: &BoundaryModel,
    x: &FieldState,
    n: usize,
    pk: &PotentialConstants,
    rho: f64,
    xi1: usize,
    r1: f64,
    n_bar: usize,
) -> Result<ValuesAtInfinity> {
    let g = model.graph();
    x.check_graph(g)?;
    let b = g.base_ball(n);
    let ring = g.boundary_out(&b);
    let low = transition_sets(x, &b, rho, pk).low;
    let cone = model.cone(&model.ball(xi1, r1));
    let low_in_cone = cone.intersection_count(&low);
    let eroded_hits = g.iterate_inn(&cone, n_bar).intersection(&low).to_vec();
    let split_value = pk.potential().c1() - 2.0 * pk.b * rho;
    let ring_low = VertexSet::from_predicate(g.vertex_count(), |u| ring.contains(u) && x.values[u] < split_value);
    let walk = low.union(&ring_low);
    let paths: Vec<PathCheck> = eroded_hits
        .iter()
        .map(|&w| {
            let path = low_path(g, w, &walk, &ring_low);
            let in_cone = path.as_ref().map_or(0, |p| p.iter().filter(|&&u| cone.contains(u)).count());
            PathCheck { witness: w, path, in_cone }
        })
        .collect();
    Ok(ValuesAtInfinity {
        n_bar,
        r1,
        low_in_cone,
        mechanism_consistent: paths.iter().all(|p| p.path.is_some() && p.in_cone >= n_bar),
        count_below_n_bar: low_in_cone < n_bar,
        eroded_hits,
        paths,
    })
}

fn low_path(g: &Graph, from: usize, walk: &VertexSet, goal: &VertexSet) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; g.vertex_count()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if goal.contains(u) {
            let mut path = vec![u];
            let mut c = u;
            while c != from {
                c = prev[c];
                path.push(c);
            }
            path.reverse();
            return Some(path);
        }
        for &w in g.neighbors(u) {
            if walk.contains(w) && prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

/// The problem with `D0 ↔ D1` and `V` mirrored about the midpoint of the
/// wells, whose minimisers are `c0 + c1 - x`.
pub fn mirrored_problem(split: &BoundarySplit, p: &Potential, cfg: &SolverConfig) -> (BoundarySplit, Potential, SolverConfig) {
    let mut cfg = cfg.clone();
    cfg.tie_break = match cfg.tie_break {
        TieBreak::Smallest => TieBreak::Largest,
        TieBreak::Largest => TieBreak::Smallest,
    };
    cfg.multistart = cfg
        .multistart
        .iter()
        .map(|s| match s {
            Start::C0Fill => Start::C1Fill,
            Start::C1Fill => Start::C0Fill,
            other => *other,
        })
        .collect();
    (split.swapped(), p.mirrored(), cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapReport {
    /// Ring vertices of some solve where `x̃` of the swapped split differs
    /// from `c0 + c1 - x̃`.
    pub ring_mismatches: usize,
    /// Per `N`, `sup |x'_u - (c0 + c1 - x_u)|` over `B_{N+2}`.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub energy_gaps: Vec<f64>,
}

/// Solves the swapped problem and compares with the mirrored original.
///
/// Vertices whose shadow meets both sides get `c0` in `x̃` for either
/// labelling. Inside the balls they are free and only seed the solver, so
/// the swapped run is seeded with `c0 + c1 - x̃`; on every solve ring the
/// two data are compared and must agree.
pub fn swap_symmetry(
    model: &BoundaryModel,
    split: &BoundarySplit,
    p: &Potential,
    cfg: &SolverConfig,
    original: &Exhaustion,
) -> Result<SwapReport> {
    let g = model.graph();
    let s = p.c0() + p.c1();
    let (ms, mp, mcfg) = mirrored_problem(split, p, cfg);
    let f = tilde_x(model, split, p);
    let swapped = tilde_x(model, &ms, &mp);
    let mirrored = FieldState::from_values(g, f.values.iter().map(|&v| s - v).collect())?;
    let mut ring = g.empty_set();
    for &n in &original.n_list {
        ring.union_with(&g.base_ball(n + 2).difference(&g.base_ball(n)));
    }
    let ring_mismatches = ring.iter().filter(|&u| swapped.values[u] != mirrored.values[u]).count();
    let run = exhaustion_solve_datum(model, &mirrored, &mp, &original.n_list, &mcfg)?;
    let deviations: Vec<f64> = original
        .n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let (a, b) = (original.field(k), run.field(k));
            g.base_ball(n + 2).iter().map(|u| (b.values[u] - (s - a.values[u])).abs()).fold(0.0, f64::max)
        })
        .collect();
    let energy_gaps =
        original.solutions.iter().zip(&run.solutions).map(|(a, b)| (a.energy - b.energy).abs()).collect();
    Ok(SwapReport {
        ring_mismatches,
        max_deviation: deviations.iter().copied().fold(0.0, f64::max),
        deviations,
        energy_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::horizon;
    use crate::geometry::VisualMetric;
    use crate::graph::{build_tiling, build_tree};
    use crate::potential::derive_constants;

    fn tree_model(g: &Graph, r: usize, eps: f64) -> BoundaryModel<'_> {
        let vm = VisualMetric { epsilon: eps, lambda: 1.0, horizon_radius: r };
        BoundaryModel::build(g, horizon(g, r, 0.0).unwrap(), vm, 0.0).unwrap()
    }

    fn subtree(g: &Graph, a: usize) -> VertexSet {
        let d = g.distances_from(a);
        VertexSet::from_predicate(g.vertex_count(), |u| d.get(u) as usize + g.depth(a) == g.depth(u))
    }

    #[test]
    fn split_examples() {
        let g = build_tree(3, 8).unwrap();
        let m = tree_model(&g, 7, 1.0);
        let s = make_split(&m, &SplitSpec::Shadows { vertices: vec![1] }, None).unwrap();
        assert_eq!(s.d1.len(), m.proxy_count() / 3);
        assert!(s.frontier.is_empty());
        assert_eq!(s.d0, s.d1.complement());
        assert!(make_split(&m, &SplitSpec::Proxies { vertices: m.horizon().vertices() }, None).is_err());
        let one = m.vertex_of(0);
        assert!(make_split(&m, &SplitSpec::Proxies { vertices: vec![one] }, None).is_err());
        assert!(make_split(&m, &SplitSpec::Proxies { vertices: vec![5] }, None).is_err());
        let half = make_split(&m, &SplitSpec::Half, None).unwrap();
        assert_eq!(half.d1.len(), m.proxy_count() / 2);
    }

    #[test]
    fn frontier_on_tiling() {
        let g = build_tiling(3, 7, 6).unwrap();
        let vm = VisualMetric { epsilon: 0.5, lambda: 1.0, horizon_radius: 4 };
        let m = BoundaryModel::build(&g, horizon(&g, 4, 1.0).unwrap(), vm, 1.0).unwrap();
        let s = make_split(&m, &SplitSpec::Half, None).unwrap();
        assert!(!s.frontier.is_empty());
        assert!(s.frontier.is_subset(&s.d1) && s.frontier.is_subset(&s.d0));
        assert_eq!(s.d0.union(&s.d1), m.all_proxies());
    }

    #[test]
    fn tilde_x_on_tree() {
        let g = build_tree(3, 8).unwrap();
        let m = tree_model(&g, 7, 1.0);
        let p = Potential::quartic(-1.0, 1.0).unwrap();
        let s = make_split(&m, &SplitSpec::Shadows { vertices: vec![1] }, None).unwrap();
        let x = tilde_x(&m, &s, &p);
        let sub = subtree(&g, 1);
        for u in 0..g.vertex_count() {
            assert_eq!(x.values[u], if sub.contains(u) { 1.0 } else { -1.0 });
            assert!((-1.0..=1.0).contains(&x.values[u]));
        }
        let empty = BoundarySplit { d1: s.frontier.clone(), ..s.clone() };
        assert!(tilde_x(&m, &empty, &p).values.iter().all(|&v| v == -1.0));
    }

    #[test]
    fn constants_formulas() {
        let fits = UpstreamFits { epsilon: 0.5, lambda: 1.0, d: 1.0, c_d: 2.0, c0_ip: 1.5, k0: 3.0, c1_shadow: 1.0, c2_shadow: 1.0 };
        let c = derive_pipeline_constants(fits, 0.8, 0.05, 10).unwrap();
        assert!((c.r_i(1) - 6.0 * 0.8 / (PI * PI)).abs() < 1e-15);
        assert!((c.r_i(100_000) - 0.8).abs() < 1e-5);
        assert!((c.n_ratio - 1.2).abs() < 1e-15);
        assert!((c.n_i(2.0, 3) / c.n_i(2.0, 2) - 1.2).abs() < 1e-14);
        assert!((c.d_i(3) - (c.r_i(4) - c.r_i(3))).abs() < 1e-15);
        assert_eq!(c.r0, c.r1 / 2.0);
        let lead: f64 = 4.0 / 0.5 * 2f64.exp();
        assert!((c.t_n(7) - 4.0 / c.k1 * (-3.5f64).exp()).abs() < 1e-12);
        assert!((c.k1_min_form - 0.25).abs() < 1e-15);
        let k2 = 2f64.max((6.0 * 3.0 * 2.0 * 1.5f64).powf(1.25));
        assert!((c.k2 - k2).abs() < 1e-9 * k2);
        let second = 4.0 * ((k2 + 4.0) * 4.0 * PI * PI / (6.0 * 0.8 * 2.0 * (4.0 / lead) * (-0.5f64).exp())).ln();
        assert!((c.k3 - 40f64.max(second)).abs() < 1e-9);
        assert!(c.theoretical_only);
        assert!(c.log10_n_bar > 10.0);
        assert!(derive_pipeline_constants(fits, 0.0, 0.05, 10).is_err());
    }

    #[test]
    fn monitor_on_constant_field() {
        let g = build_tree(3, 8).unwrap();
        let m = tree_model(&g, 7, 1.0);
        let p = Potential::quartic(-1.0, 1.0).unwrap();
        let pk = derive_constants(&p, None).unwrap();
        let fits = UpstreamFits { epsilon: 1.0, lambda: 1.0, d: 1.0, c_d: 1.0, c0_ip: 1.0, k0: 1.0, c1_shadow: 1.0, c2_shadow: 1.0 };
        let c = derive_pipeline_constants(fits, 0.9, 0.05, 8).unwrap();
        let x = FieldState::constant(&g, 1.0);
        let rep = main_lemma_monitor(&m, &x, 6, &pk, &c, 0, 1.0).unwrap();
        assert!(!rep.rows.is_empty());
        assert!(rep.rows.iter().all(|r| r.phi == 0.0));
        assert!(rep.vacuous());
        let row = &rep.rows[0];
        assert!((row.threshold - c.k2 * 1.25f64.exp()).abs() < 1e-12 * row.threshold);
    }

    #[test]
    fn cone_inclusion_examples() {
        let g = build_tree(3, 8).unwrap();
        let m = tree_model(&g, 7, 1.0);
        let r1 = 6.0 * 0.9 / (PI * PI);
        let c = cone_inclusion_check(&m, 0, r1 / 2.0, r1, 1).unwrap();
        assert!(c.holds && !c.vacuous);
        assert!(cone_inclusion_check(&m, 0, 0.5, 0.4, 1).is_err());
    }

    #[test]
    fn exhaustion_with_full_side() {
        let g = build_tree(3, 8).unwrap();
        let m = tree_model(&g, 7, 1.0);
        let p = Potential::quartic(-1.0, 1.0).unwrap();
        // D1 covers everything except one deep subtree: x̃ = c1 near the root
        let s = make_split(&m, &SplitSpec::Shadows { vertices: vec![1, 2, 6, 7, 8] }, None).unwrap();
        let cfg = SolverConfig::default();
        assert!(exhaustion_solve(&m, &s, &p, &[], &cfg).is_err());
        assert!(exhaustion_solve(&m, &s, &p, &[3, 3], &cfg).is_err());
        assert!(exhaustion_solve(&m, &s, &p, &[7], &cfg).is_err());
        let ex = exhaustion_solve(&m, &s, &p, &[3], &cfg).unwrap();
        assert!(ex.report.deltas.is_empty());
        let all = make_split(&m, &SplitSpec::Ball { center: m.vertex_of(0), radius: 0.99 }, None);
        assert!(all.is_ok());
    }

    #[test]
    fn asymptotics_and_swap_on_small_tree() {
        let g = build_tree(3, 9).unwrap();
        let m = tree_model(&g, 8, 1.0);
        let p = Potential::quartic(-1.0, 1.0).unwrap();
        let pk = derive_constants(&p, None).unwrap();
        let s = make_split(&m, &SplitSpec::Shadows { vertices: vec![1, 6] }, None).unwrap();
        let cfg = SolverConfig::default();
        let ex = exhaustion_solve(&m, &s, &p, &[3, 5, 7], &cfg).unwrap();
        assert!(ex.report.rows.iter().all(|r| r.converged && r.residual <= 1e-10));
        assert!(!ex.report.hard_failure);
        let probes = default_probes(&m, &s, 0.99).unwrap();
        let rows = asymptotics_report(&m, ex.last(), &s, &p, &probes, 4, 0.1).unwrap();
        assert_eq!(rows.len(), 2);
        let frontier_like = Probe { proxy: probes[1].proxy, side: 0, r: 0.1 };
        assert!(asymptotics_report(&m, ex.last(), &s, &p, &[frontier_like], 4, 0.1).is_err());
        let c1 = FieldState::constant(&g, 1.0);
        let ones = asymptotics_report(&m, &c1, &s, &p, &probes[1..], 4, 0.1).unwrap();
        assert_eq!(ones[0].sup_deviation, 0.0);
        let sw = swap_symmetry(&m, &s, &p, &cfg, &ex).unwrap();
        assert_eq!(sw.ring_mismatches, 0);
        assert!(sw.max_deviation < 1e-6, "{sw:?}");
        let rho = default_rho(&pk, 0.1);
        let v = values_at_infinity(&m, ex.last(), 7, &pk, rho, probes[1].proxy, 0.6, 2).unwrap();
        assert!(v.mechanism_consistent);
    }
}
