//! The five subcommands.

use crate::config::{PotentialName, RunConfig};
use crate::embed::embedding;
use crate::output::Bundle;
use acgraph::boundary::{fit_shadow_constants, horizon, BoundaryModel, ShadowConstants};
use acgraph::geometry::{choose_epsilon, fit_lambda, geometry_report, GeometryReport, GeometrySampling, VisualMetric};
use acgraph::graph::{build_control_grid, build_control_line, build_tiling, build_tree, GeneratorSpec, Graph};
use acgraph::isoperimetry::{
    doubling_probe, downstream_d, growth_consistent, growth_fit, ip_scan, DoublingReport, GrowthFit, IpConfig, IpReport,
    SetFamily, EXHAUSTIVE_MAX_VERTICES,
};
use acgraph::pipeline::{
    asymptotics_report, cone_inclusion_check, default_probes, default_rho, derive_pipeline_constants, exhaustion_solve,
    main_lemma_monitor, make_split, swap_symmetry, values_at_infinity, UpstreamFits,
};
use acgraph::potential::{derive_constants, Potential, PotentialConstants};
use acgraph::variational::{derived_k0, SolverConfig};
use anyhow::Result;
use serde::Serialize;
use std::path::Path;

pub fn build_graph(spec: &GeneratorSpec) -> acgraph::Result<Graph> {
    match *spec {
        GeneratorSpec::Tree { degree, radius } => build_tree(degree, radius),
        GeneratorSpec::Tiling { p, q, radius } => build_tiling(p, q, radius),
        GeneratorSpec::Line { extent } => build_control_line(extent),
        GeneratorSpec::Grid { side } => build_control_grid(side),
    }
}

pub fn build_potential(cfg: &RunConfig) -> acgraph::Result<Potential> {
    let s = &cfg.potential;
    match s.name {
        PotentialName::Quartic => Potential::quartic(s.c0, s.c1),
        PotentialName::Tilted => Potential::tilted(s.c0, s.c1, s.kappa),
        PotentialName::Periodic => Potential::periodic(s.c0, s.c1),
    }
}

/// Geometry estimates, the visual metric and the boundary model.
pub struct Setting<'g> {
    pub geometry: GeometryReport,
    pub model: BoundaryModel<'g>,
}

pub fn setting<'g>(cfg: &RunConfig, g: &'g Graph) -> Result<Setting<'g>> {
    let r_max = g.r_max();
    let probe_radius = cfg.geometry.horizon.unwrap_or(r_max.saturating_sub(1)).max(1);
    let sampling = GeometrySampling { quadruples: cfg.geometry.quadruples, triangles: cfg.geometry.triangles, seed: cfg.seed };
    let geometry = geometry_report(g, probe_radius, sampling)?;
    let delta = geometry.delta_used;
    let radius = cfg.geometry.horizon.unwrap_or_else(|| ((r_max as f64 - delta - 1.0).floor() as usize).max(1));
    let epsilon = choose_epsilon(delta, cfg.geometry.epsilon)?;
    let hz = horizon(g, radius, delta)?;
    let trial = VisualMetric { epsilon, lambda: 1.0, horizon_radius: radius };
    let lambda = fit_lambda(&trial, g, &hz.vertices(), cfg.geometry.lambda_samples, cfg.seed);
    let metric = VisualMetric { epsilon, lambda, horizon_radius: radius };
    let model = BoundaryModel::build(g, hz, metric, delta)?;
    Ok(Setting { geometry, model })
}

fn load_graph(cfg: &RunConfig) -> Result<Graph> {
    Ok(build_graph(&cfg.graph)?)
}

#[derive(Serialize)]
struct GraphHeader<'a> {
    base_vertex: usize,
    #[serde(rename = "S")]
    max_degree: usize,
    #[serde(rename = "R_max")]
    r_max: usize,
    generator: &'a GeneratorSpec,
    vertex_count: usize,
    edge_count: usize,
    rim_size: usize,
}

pub fn generate(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let g = load_graph(cfg)?;
    let mut b = Bundle::create(dir, cfg)?;
    b.json(
        "graph.json",
        &GraphHeader {
            base_vertex: g.base_vertex(),
            max_degree: g.max_degree(),
            r_max: g.r_max(),
            generator: g.spec(),
            vertex_count: g.vertex_count(),
            edge_count: g.edge_count(),
            rim_size: g.rim().len(),
        },
    )?;
    b.csv("edges.csv", &["u", "v"], g.edges())?;
    let e = embedding(&g);
    b.csv("embedding.csv", &["vertex", "depth", "x", "y"], e.iter().enumerate().map(|(u, p)| (u, g.depth(u), p[0], p[1])))?;
    b.finish(cfg, "generate", None)?;
    Ok(true)
}

#[derive(Serialize)]
struct HorizonSummary {
    radius: usize,
    proxies: usize,
    rim_margin_ok: bool,
    resolution: f64,
    diameter: f64,
    unresolved_pairs: usize,
}

fn horizon_summary(m: &BoundaryModel) -> HorizonSummary {
    HorizonSummary {
        radius: m.radius(),
        proxies: m.proxy_count(),
        rim_margin_ok: m.horizon().rim_margin_ok,
        resolution: m.resolution(),
        diameter: m.diameter(),
        unresolved_pairs: m.unresolved_pairs(),
    }
}

#[derive(Serialize)]
struct GeometryOutput {
    geometry: GeometryReport,
    metric: VisualMetric,
    horizon: HorizonSummary,
    shadow_constants: ShadowConstants,
}

pub fn geometry(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let g = load_graph(cfg)?;
    let s = setting(cfg, &g)?;
    let k = fit_shadow_constants(&s.model, cfg.geometry.shadow_samples, cfg.seed)?;
    let mut b = Bundle::create(dir, cfg)?;
    b.json(
        "geometry.json",
        &GeometryOutput { geometry: s.geometry.clone(), metric: *s.model.metric(), horizon: horizon_summary(&s.model), shadow_constants: k },
    )?;
    let m = &s.model;
    b.csv("horizon.csv", &["proxy", "vertex", "shadow_owners"], (0..m.proxy_count()).map(|i| {
        let v = m.vertex_of(i);
        (i, v, m.u_set(i).len())
    }))?;
    b.finish(cfg, "geometry", None)?;
    Ok(true)
}

pub struct Isoperimetry {
    pub growth: GrowthFit,
    pub doubling: Option<DoublingReport>,
    pub doubling_error: Option<String>,
    pub d: f64,
    pub ip: IpReport,
}

pub fn run_isoperimetry(cfg: &RunConfig, g: &Graph, model: &BoundaryModel) -> Result<Isoperimetry> {
    let growth = growth_fit(g, model.metric())?;
    let diam = model.diameter();
    let radii: Vec<f64> = (1..=cfg.isoperimetry.doubling_levels).map(|k| diam / 2f64.powi(k as i32)).collect();
    let (doubling, doubling_error) = match doubling_probe(model, &radii, cfg.isoperimetry.doubling_centers, cfg.seed) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let d = downstream_d(&growth, doubling.as_ref());
    let inner = g.base_ball(g.r_max().saturating_sub(2)).len();
    let sizes: Vec<usize> = cfg.isoperimetry.random_sizes.iter().copied().filter(|&s| s <= inner).collect();
    let mut families = vec![
        SetFamily::Balls { extra_centers: cfg.isoperimetry.extra_centers },
        SetFamily::Cones { centers: cfg.isoperimetry.cone_centers },
        SetFamily::RandomConnected { count: cfg.isoperimetry.random_sets, sizes },
    ];
    if cfg.isoperimetry.exhaustive && g.vertex_count() <= EXHAUSTIVE_MAX_VERTICES {
        families.push(SetFamily::Exhaustive);
    }
    let ip = ip_scan(g, d, Some(model), &IpConfig { families, seed: cfg.seed, rim_exclusion: true })?;
    Ok(Isoperimetry { growth, doubling, doubling_error, d, ip })
}

#[derive(Serialize)]
struct IsoperimetryOutput<'a> {
    growth: &'a GrowthFit,
    doubling: &'a Option<DoublingReport>,
    doubling_error: &'a Option<String>,
    growth_consistent: Option<bool>,
    d: f64,
    ip: &'a IpReport,
}

pub fn isoperimetry(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let g = load_graph(cfg)?;
    let s = setting(cfg, &g)?;
    let iso = run_isoperimetry(cfg, &g, &s.model)?;
    let mut b = Bundle::create(dir, cfg)?;
    b.json(
        "isoperimetry.json",
        &IsoperimetryOutput {
            growth: &iso.growth,
            doubling: &iso.doubling,
            doubling_error: &iso.doubling_error,
            growth_consistent: iso.doubling.as_ref().map(|d| growth_consistent(&iso.growth, d)),
            d: iso.d,
            ip: &iso.ip,
        },
    )?;
    b.csv("growth.csv", &["n", "ball_size"], iso.growth.table.iter().copied())?;
    b.csv(
        "ball_ratios.csv",
        &["radius", "size", "boundary", "ratio"],
        iso.ip.ball_ratios.iter().map(|r| (r.radius, r.size, r.boundary, r.ratio)),
    )?;
    if let Some(d) = &iso.doubling {
        b.csv(
            "covering.csv",
            &["center", "big_r", "r", "greedy", "exact", "below_resolution", "doubling"],
            d.covering_table.iter().map(|e| (e.center, e.big_r, e.r, e.greedy, e.exact, e.below_resolution, e.doubling)),
        )?;
    }
    b.finish(cfg, "isoperimetry", None)?;
    Ok(true)
}

/// Solver settings with `ρ` resolved against the potential constants.
pub fn solver_config(cfg: &RunConfig, pk: &PotentialConstants) -> Result<SolverConfig> {
    let rho = cfg.pipeline.rho.unwrap_or_else(|| default_rho(pk, cfg.pipeline.tolerance));
    let solver = SolverConfig { rho, seed: cfg.seed, ..cfg.solver.clone() };
    solver.validate(Some(pk.rho0))?;
    Ok(solver)
}

pub fn n_list(cfg: &RunConfig, horizon: usize) -> Result<Vec<usize>> {
    match &cfg.pipeline.n_list {
        Some(list) => Ok(list.clone()),
        None => {
            let list: Vec<usize> = (2..horizon).step_by(2).collect();
            if list.is_empty() {
                return Err(acgraph::Error::InvalidParameter(format!("horizon {horizon} leaves no radius for the exhaustion")).into());
            }
            Ok(list)
        }
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    split: SplitSummary,
    potential: acgraph::potential::ConstantsSummary,
    rho: f64,
    n_list: &'a [usize],
    exhaustion: &'a acgraph::pipeline::ExhaustionReport,
    asymptotics: Result<Vec<acgraph::pipeline::ProbeRow>, String>,
    constants: &'a acgraph::pipeline::PipelineConstants,
    monitor_active: bool,
    monitor_vacuous: bool,
    values_at_infinity: Result<acgraph::pipeline::ValuesAtInfinity, String>,
    cone_inclusion: Result<acgraph::pipeline::ConeInclusion, String>,
    swap: Result<acgraph::pipeline::SwapReport, String>,
    all_converged: bool,
}

#[derive(Serialize)]
struct SplitSummary {
    spec: String,
    d0: usize,
    d1: usize,
    frontier: usize,
    r_min: f64,
}

pub fn solve(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let g = load_graph(cfg)?;
    let s = setting(cfg, &g)?;
    let m = &s.model;
    let p = build_potential(cfg)?;
    let pk = derive_constants(&p, cfg.potential.resolution)?;
    let solver = solver_config(cfg, &pk)?;
    let rho = solver.rho;
    let split = make_split(m, &cfg.split, cfg.pipeline.r_min)?;
    let n_list = n_list(cfg, m.radius())?;
    let ex = exhaustion_solve(m, &split, &p, &n_list, &solver)?;
    let top = *n_list.last().expect("nonempty list");
    let probes = default_probes(m, &split, cfg.pipeline.probe_margin)?;
    let asymptotics = asymptotics_report(m, ex.last(), &split, &p, &probes, cfg.pipeline.n0_effective, cfg.pipeline.tolerance)
        .map_err(|e| e.to_string());

    let k = fit_shadow_constants(m, cfg.geometry.shadow_samples, cfg.seed)?;
    let growth = growth_fit(&g, m.metric())?;
    let ip = ip_scan(&g, growth.d + 0.1, None, &IpConfig { families: vec![SetFamily::Balls { extra_centers: 0 }], seed: cfg.seed, rim_exclusion: true })?;
    let fits = UpstreamFits {
        epsilon: m.metric().epsilon,
        lambda: m.metric().lambda,
        d: growth.d,
        c_d: growth.c_d,
        c0_ip: ip.c0,
        k0: derived_k0(&pk, rho, g.max_degree()),
        c1_shadow: k.c1,
        c2_shadow: k.c2,
    };
    let r = cfg.pipeline.r.unwrap_or(probes[1].r);
    let consts = derive_pipeline_constants(fits, r, rho, g.r_max())?;
    let xi = probes[1].proxy;
    let monitor = main_lemma_monitor(m, ex.last(), top, &pk, &consts, xi, cfg.pipeline.n1)?;
    let vi = values_at_infinity(m, ex.last(), top, &pk, rho, xi, consts.r1, cfg.pipeline.n_bar).map_err(|e| e.to_string());
    let inclusion = cone_inclusion_check(m, xi, consts.r0, consts.r1, cfg.pipeline.n_bar).map_err(|e| e.to_string());
    let swap = swap_symmetry(m, &split, &p, &solver, &ex).map_err(|e| e.to_string());
    let all_converged = ex.solutions.iter().all(|s| s.converged);

    let mut b = Bundle::create(dir, cfg)?;
    b.json(
        "solve.json",
        &SolveOutput {
            split: SplitSummary {
                spec: split.spec.clone(),
                d0: split.d0.len(),
                d1: split.d1.len(),
                frontier: split.frontier.len(),
                r_min: split.r_min,
            },
            potential: pk.summary(),
            rho,
            n_list: &n_list,
            exhaustion: &ex.report,
            asymptotics: asymptotics.clone(),
            constants: &consts,
            monitor_active: monitor.active,
            monitor_vacuous: monitor.vacuous(),
            values_at_infinity: vi,
            cone_inclusion: inclusion,
            swap,
            all_converged,
        },
    )?;
    b.csv(
        "exhaustion.csv",
        &["n", "region_size", "sweeps", "residual", "energy", "converged", "clamped"],
        ex.report.rows.iter().map(|r| (r.n, r.region_size, r.sweeps, r.residual, r.energy, r.converged, r.clamped)),
    )?;
    b.csv(
        "deltas.csv",
        &["n_from", "n_to", "delta"],
        ex.report.deltas.iter().enumerate().map(|(i, d)| (n_list[i], n_list[i + 1], *d)),
    )?;
    let mut field_rows = Vec::new();
    for (k, &n) in n_list.iter().enumerate() {
        let x = ex.field(k);
        for u in g.base_ball(n + 2).iter() {
            field_rows.push((n, u, g.depth(u), x.values[u]));
        }
    }
    b.csv("field.csv", &["n", "vertex", "depth", "x"], field_rows)?;
    if let Ok(rows) = &asymptotics {
        b.csv(
            "probes.csv",
            &["proxy", "side", "r", "r0", "target", "cone_size", "sup_deviation", "fraction_within"],
            rows.iter().map(|r| (r.probe.proxy, r.probe.side, r.probe.r, r.r0, r.target, r.cone_size, r.sup_deviation, r.fraction_within)),
        )?;
    }
    b.csv(
        "monitor.csv",
        &["i", "n_i", "r_i", "low_count", "excess", "phi", "threshold"],
        monitor.rows.iter().map(|r| (r.i, r.n_i, r.r_i, r.low_count, r.excess, r.phi, r.threshold)),
    )?;
    b.finish(cfg, "solve", Some(all_converged))?;
    Ok(all_converged)
}
