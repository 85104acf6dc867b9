//! Ball growth, the isoperimetric inequality over families of finite sets,
//! and covering numbers of the horizon.

use crate::boundary::BoundaryModel;
use crate::error::{invalid, Error, Result};
use crate::geometry::VisualMetric;
use crate::graph::{Graph, ProxySet, VertexSet};
use crate::rng;
use rand::seq::SliceRandom;
use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

/// Largest graph accepted by the exhaustive family.
pub const EXHAUSTIVE_MAX_VERTICES: usize = 20;
/// Largest horizon for which exact covering numbers are computed.
pub const EXACT_COVER_MAX_PROXIES: usize = 32;
/// Log-log slope of the ball ratios above which IP is reported violated.
pub const VIOLATION_SLOPE: f64 = 0.05;
/// Margin added to the growth exponent for downstream constants.
pub const D_MARGIN: f64 = 0.1;

fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    /// `(n, #B_n)` for `n = 0..=R_max`.
    pub table: Vec<(usize, usize)>,
    pub slope: f64,
    pub d: f64,
    pub c_d: f64,
    pub fit_window: (usize, usize),
    /// Ball sizes follow a power of `n` better than an exponential.
    pub subexponential: bool,
}

/// Fits `#B_n <= C_D e^{εDn}` on the window `[2, R_max - 2]`.
pub fn growth_fit(g: &Graph, vm: &VisualMetric) -> Result<GrowthFit> {
    if !(vm.epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let mut counts = vec![0usize; g.r_max() + 1];
    for &d in g.depths() {
        counts[d as usize] += 1;
    }
    let mut acc = 0;
    let table: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .map(|(n, &c)| {
            acc += c;
            (n, acc)
        })
        .collect();
    let hi = g.r_max().saturating_sub(2);
    if hi < 3 {
        return Err(invalid(format!("fit window [2, {hi}] has fewer than two points")));
    }
    let window = &table[2..=hi];
    let exp_pts: Vec<(f64, f64)> = window.iter().map(|&(n, b)| (n as f64, (b as f64).ln())).collect();
    let pow_pts: Vec<(f64, f64)> = window.iter().map(|&(n, b)| ((n as f64).ln(), (b as f64).ln())).collect();
    let (slope, _, r2_exp) = least_squares(&exp_pts);
    let (_, _, r2_pow) = least_squares(&pow_pts);
    let d = slope.max(0.0) / vm.epsilon;
    let c_d = window
        .iter()
        .map(|&(n, b)| b as f64 / (vm.epsilon * d * n as f64).exp())
        .fold(1.0, f64::max);
    Ok(GrowthFit { table, slope, d, c_d, fit_window: (2, hi), subexponential: r2_pow > r2_exp })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetFamily {
    /// Balls around the base vertex and around sampled centres.
    Balls { extra_centers: usize },
    /// Cones of visual balls cut down to `B_m`.
    Cones { centers: usize },
    RandomConnected { count: usize, sizes: Vec<usize> },
    /// Every nonempty vertex set; graphs of at most 20 vertices.
    Exhaustive,
}

impl SetFamily {
    fn descriptor(&self) -> String {
        match self {
            SetFamily::Balls { extra_centers } => format!("balls(extra_centers={extra_centers})"),
            SetFamily::Cones { centers } => format!("cones(centers={centers})"),
            SetFamily::RandomConnected { count, sizes } => format!("random_connected({count}, {sizes:?})"),
            SetFamily::Exhaustive => "exhaustive".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IpConfig {
    pub families: Vec<SetFamily>,
    pub seed: u64,
    /// Skip sets within distance 1 of the truncation rim.
    pub rim_exclusion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallRatio {
    pub radius: usize,
    pub size: usize,
    pub boundary: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IpReport {
    pub exponent: f64,
    /// `max(1, raw_max_ratio)`.
    pub c0: f64,
    pub raw_max_ratio: f64,
    pub worst_set: VertexSet,
    pub worst_family: String,
    pub family_spec: String,
    pub tested: usize,
    pub excluded_rim: usize,
    pub excluded_no_boundary: usize,
    /// Ratios along the base balls that were tested.
    pub ball_ratios: Vec<BallRatio>,
    pub ball_ratio_slope: f64,
    pub violated_at_scale: bool,
}

struct Candidate {
    family: usize,
    set: VertexSet,
}

fn balls(g: &Graph, extra: usize, seed: u64) -> Vec<VertexSet> {
    let mut out: Vec<VertexSet> = (0..=g.r_max()).map(|n| g.base_ball(n)).collect();
    let mut r = rng::stream(seed, 8);
    for _ in 0..extra {
        let c = r.random_range(0..g.vertex_count());
        for n in 0..g.r_max() {
            let b = g.ball(c, n);
            out.push(b.value);
            if b.clipped {
                break;
            }
        }
    }
    out
}

fn cones(model: &BoundaryModel, centers: usize, seed: u64) -> Vec<VertexSet> {
    let g = model.graph();
    let mut r = rng::stream(seed, 9);
    let h = model.proxy_count();
    let mut out = Vec::new();
    for _ in 0..centers {
        let xi = r.random_range(0..h);
        let mut levels = model.distance_row(xi);
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for rad in levels {
            let c = model.cone(&model.ball(xi, rad));
            for m in 1..=g.r_max() {
                out.push(c.intersection(&g.base_ball(m)));
            }
        }
    }
    out
}

fn random_connected(g: &Graph, count: usize, sizes: &[usize], seed: u64) -> Vec<VertexSet> {
    let mut r = rng::stream(seed, 6);
    let limit = g.r_max().saturating_sub(2);
    let inside: Vec<usize> = (0..g.vertex_count()).filter(|&u| g.depth(u) <= limit).collect();
    if inside.is_empty() || sizes.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|i| {
            let target = sizes[i % sizes.len()];
            let start = inside[r.random_range(0..inside.len())];
            let mut set = VertexSet::from_ids(g.vertex_count(), [start]);
            let mut frontier: Vec<usize> = Vec::new();
            let push = |u: usize, set: &VertexSet, frontier: &mut Vec<usize>| {
                for &w in g.neighbors(u) {
                    if g.depth(w) <= limit && !set.contains(w) {
                        frontier.push(w);
                    }
                }
            };
            push(start, &set, &mut frontier);
            while set.len() < target && !frontier.is_empty() {
                let k = r.random_range(0..frontier.len());
                let w = frontier.swap_remove(k);
                if set.insert(w) {
                    push(w, &set, &mut frontier);
                }
            }
            set
        })
        .collect()
}

fn exhaustive_c0(g: &Graph, exponent: f64, rim_exclusion: bool) -> (f64, u32, usize, usize, usize) {
    let n = g.vertex_count();
    let nbr: Vec<u32> = (0..n).map(|u| g.neighbors(u).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
    let rim: u32 = g.rim().iter().fold(0, |m, u| m | 1 << u);
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    (1..=full)
        .into_par_iter()
        .map(|b| {
            let mut reach = 0u32;
            let mut bits = b;
            while bits != 0 {
                reach |= nbr[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            let out = reach & !b;
            if rim_exclusion && (b | out) & rim != 0 {
                return (f64::NEG_INFINITY, b, 0, 1, 0);
            }
            if out == 0 {
                return (f64::NEG_INFINITY, b, 0, 0, 1);
            }
            let ratio = (b.count_ones() as f64).powf(exponent) / out.count_ones() as f64;
            (ratio, b, 1, 0, 0)
        })
        .reduce(
            || (f64::NEG_INFINITY, 0, 0, 0, 0),
            |x, y| {
                let best = if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { (y.0, y.1) } else { (x.0, x.1) };
                (best.0, best.1, x.2 + y.2, x.3 + y.3, x.4 + y.4)
            },
        )
}

/// Scans `(#B)^{4D/(4D+1)} / #∂^out B` over the configured families.
pub fn ip_scan(g: &Graph, d: f64, model: Option<&BoundaryModel>, cfg: &IpConfig) -> Result<IpReport> {
    if !(d > 0.0) {
        return Err(invalid("growth exponent D must be positive"));
    }
    if cfg.families.is_empty() {
        return Err(Error::Empty("set family".into()));
    }
    let exponent = 4.0 * d / (4.0 * d + 1.0);
    let mut candidates = Vec::new();
    let mut exhaustive = None;
    for (fi, fam) in cfg.families.iter().enumerate() {
        let sets = match fam {
            SetFamily::Balls { extra_centers } => balls(g, *extra_centers, cfg.seed),
            SetFamily::Cones { centers } => {
                let m = model.ok_or_else(|| invalid("the cone family needs a boundary model"))?;
                if m.graph().id() != g.id() {
                    return Err(Error::GraphMismatch);
                }
                cones(m, *centers, cfg.seed)
            }
            SetFamily::RandomConnected { count, sizes } => random_connected(g, *count, sizes, cfg.seed),
            SetFamily::Exhaustive => {
                if g.vertex_count() > EXHAUSTIVE_MAX_VERTICES {
                    return Err(invalid(format!(
                        "exhaustive family needs at most {EXHAUSTIVE_MAX_VERTICES} vertices, graph has {}",
                        g.vertex_count()
                    )));
                }
                exhaustive = Some(fi);
                Vec::new()
            }
        };
        candidates.extend(sets.into_iter().map(|set| Candidate { family: fi, set }));
    }
    let scored: Vec<Option<Option<f64>>> = candidates
        .par_iter()
        .map(|c| {
            if c.set.is_empty() || (cfg.rim_exclusion && g.near_rim(&c.set, 1)) {
                return None;
            }
            let out = g.boundary_out(&c.set).len();
            if out == 0 {
                return Some(None);
            }
            Some(Some((c.set.len() as f64).powf(exponent) / out as f64))
        })
        .collect();
    let mut raw = f64::NEG_INFINITY;
    let mut worst: Option<(VertexSet, usize)> = None;
    let (mut tested, mut excluded_rim, mut excluded_no_boundary) = (0, 0, 0);
    for (c, s) in candidates.iter().zip(&scored) {
        match s {
            None => excluded_rim += usize::from(!c.set.is_empty()),
            Some(None) => excluded_no_boundary += 1,
            Some(Some(r)) => {
                tested += 1;
                if *r > raw {
                    raw = *r;
                    worst = Some((c.set.clone(), c.family));
                }
            }
        }
    }
    if let Some(fi) = exhaustive {
        let (r, mask, t, er, en) = exhaustive_c0(g, exponent, cfg.rim_exclusion);
        tested += t;
        excluded_rim += er;
        excluded_no_boundary += en;
        if r > raw {
            raw = r;
            let set = VertexSet::from_predicate(g.vertex_count(), |u| mask >> u & 1 == 1);
            worst = Some((set, fi));
        }
    }
    let (worst_set, worst_family) = match worst {
        Some((s, fi)) => (s, cfg.families[fi].descriptor()),
        None => return Err(Error::Empty("no set of the family survived the exclusions".into())),
    };
    let ball_ratios: Vec<BallRatio> = (0..=g.r_max())
        .map(|n| g.base_ball(n))
        .enumerate()
        .filter(|(_, b)| !(cfg.rim_exclusion && g.near_rim(b, 1)))
        .filter_map(|(n, b)| {
            let out = g.boundary_out(&b).len();
            (out > 0).then(|| BallRatio {
                radius: n,
                size: b.len(),
                boundary: out,
                ratio: (b.len() as f64).powf(exponent) / out as f64,
            })
        })
        .collect();
    let pts: Vec<(f64, f64)> = ball_ratios
        .iter()
        .skip(ball_ratios.len() / 2)
        .map(|b| ((b.size as f64).ln(), b.ratio.ln()))
        .collect();
    let ball_ratio_slope = if pts.len() >= 2 { least_squares(&pts).0 } else { 0.0 };
    Ok(IpReport {
        exponent,
        c0: raw.max(1.0),
        raw_max_ratio: raw,
        worst_set,
        worst_family,
        family_spec: cfg.families.iter().map(SetFamily::descriptor).collect::<Vec<_>>().join("+"),
        tested,
        excluded_rim,
        excluded_no_boundary,
        violated_at_scale: pts.len() >= 3 && ball_ratio_slope > VIOLATION_SLOPE,
        ball_ratio_slope,
        ball_ratios,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringEntry {
    pub center: usize,
    pub big_r: f64,
    pub r: f64,
    pub greedy: usize,
    pub exact: Option<usize>,
    pub below_resolution: bool,
    /// `R = 2r`; used for `M_d`, left out of the exponent fit.
    pub doubling: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingReport {
    /// Largest covering number of a `2r`-ball by `r`-balls.
    pub m_d: usize,
    pub covering_table: Vec<CoveringEntry>,
    pub assouad_fit: f64,
    pub below_resolution: bool,
}

/// Farthest-point covering of `target` by `r`-balls centred in `target`.
pub fn greedy_cover(model: &BoundaryModel, target: &ProxySet, first: usize, r: f64) -> usize {
    let Some(mut next) = (if target.contains(first) { Some(first) } else { target.first() }) else {
        return 0;
    };
    let mut nearest: Vec<(usize, f64)> = target.iter().map(|j| (j, f64::INFINITY)).collect();
    let mut count = 0;
    loop {
        count += 1;
        for e in nearest.iter_mut() {
            e.1 = e.1.min(model.distance(next, e.0));
        }
        let far = nearest.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0))).unwrap();
        if model.ball(next, r).contains(far.0) || far.1 <= r * (1.0 + crate::boundary::RADIUS_TOL) {
            return count;
        }
        next = far.0;
    }
}

/// Fewest `r`-balls centred anywhere on the horizon covering `target`.
pub fn exact_cover(model: &BoundaryModel, target: &ProxySet, r: f64) -> Result<usize> {
    let h = model.proxy_count();
    if h > EXACT_COVER_MAX_PROXIES {
        return Err(invalid(format!("exact covering needs at most {EXACT_COVER_MAX_PROXIES} proxies")));
    }
    let mask = |s: &ProxySet| s.iter().fold(0u64, |m, j| m | 1 << j);
    let goal = mask(target);
    let balls: Vec<u64> = (0..h).map(|i| mask(&model.ball(i, r)) & goal).collect();
    fn search(goal: u64, covered: u64, left: usize, balls: &[u64]) -> bool {
        if covered == goal {
            return true;
        }
        if left == 0 {
            return false;
        }
        let pick = (goal & !covered).trailing_zeros();
        balls.iter().filter(|&&b| b >> pick & 1 == 1).any(|&b| search(goal, covered | b, left - 1, balls))
    }
    Ok((0..=h).find(|&k| search(goal, 0, k, &balls)).unwrap_or(h))
}

/// Covering numbers `N_r(B_R(ξ0))` for every pair `r < R` of `radii` and
/// sampled centres, with `R = 2r` added for the doubling constant.
pub fn doubling_probe(model: &BoundaryModel, radii: &[f64], sample_centers: usize, seed: u64) -> Result<DoublingReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("radii must be a nonempty list of positive numbers"));
    }
    if sample_centers == 0 {
        return Err(invalid("sample_centers must be positive"));
    }
    let h = model.proxy_count();
    let mut centers: Vec<usize> = (0..h).collect();
    centers.shuffle(&mut rng::stream(seed, 7));
    centers.truncate(sample_centers);
    let resolution = model.resolution();
    let mut pairs = Vec::new();
    for &r in radii {
        pairs.push((2.0 * r, r, true));
        for &big in radii {
            if big > r {
                pairs.push((big, r, false));
            }
        }
    }
    let jobs: Vec<(usize, f64, f64, bool)> =
        centers.iter().flat_map(|&c| pairs.iter().map(move |&(big, r, dbl)| (c, big, r, dbl))).collect();
    let covering_table: Vec<CoveringEntry> = jobs
        .par_iter()
        .map(|&(c, big, r, doubling)| {
            let target = model.ball(c, big);
            let exact = if h <= EXACT_COVER_MAX_PROXIES { exact_cover(model, &target, r).ok() } else { None };
            CoveringEntry {
                center: c,
                big_r: big,
                r,
                greedy: greedy_cover(model, &target, c, r),
                exact,
                below_resolution: r < resolution,
                doubling,
            }
        })
        .collect();
    let m_d = covering_table
        .iter()
        .filter(|e| e.doubling)
        .map(|e| e.greedy)
        .max()
        .unwrap_or(1);
    let pts: Vec<(f64, f64)> = covering_table
        .iter()
        .filter(|e| !e.doubling && !e.below_resolution)
        .map(|e| ((e.big_r / e.r).ln(), (e.greedy as f64).ln()))
        .collect();
    let assouad_fit = if pts.len() >= 2 { least_squares(&pts).0.max(0.0) } else { 0.0 };
    Ok(DoublingReport {
        m_d,
        below_resolution: covering_table.iter().any(|e| e.below_resolution),
        covering_table,
        assouad_fit,
    })
}

/// `max(D_fit, assouad_fit) + 0.1`.
pub fn downstream_d(growth: &GrowthFit, doubling: Option<&DoublingReport>) -> f64 {
    growth.d.max(doubling.map_or(0.0, |r| r.assouad_fit)) + D_MARGIN
}

/// `D >= assouad_fit - 0.25`.
pub fn growth_consistent(growth: &GrowthFit, doubling: &DoublingReport) -> bool {
    growth.d >= doubling.assouad_fit - 0.25
}
