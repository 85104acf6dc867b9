//! Self-checks run by `acgraph verify`.

use crate::commands::{build_potential, n_list, run_isoperimetry, setting, solver_config};
use crate::config::RunConfig;
use acgraph::boundary::{cone_membership, fit_shadow_constants, separating_lemma_check};
use acgraph::graph::{GeneratorSpec, Graph, VertexSet};
use acgraph::pipeline::{exhaustion_solve, make_split, swap_symmetry};
use acgraph::potential::derive_constants;
use acgraph::variational::{
    comparison_check, component_boundary_check, el_residual, minmax_check, trapping_check,
    ts_inequality_check, verify_local_minimality, FieldState, ENERGY_TOL,
};
use anyhow::Result;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const TRIALS: usize = 100;
const REGION_SIZE: usize = 30;
const SWAP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub module: String,
    /// A failing hard check fails the run.
    pub hard: bool,
    pub passed: bool,
    pub detail: String,
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, module: &str, hard: bool, passed: bool, detail: String) {
        self.0.push(Check { name: name.into(), module: module.into(), hard, passed, detail });
    }
}

fn rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

fn random_region(g: &Graph, r: &mut ChaCha8Rng, size: usize) -> VertexSet {
    let max_depth = g.r_max().saturating_sub(2);
    let pool = g.base_ball(max_depth).to_vec();
    let start = pool[r.random_range(0..pool.len())];
    let mut set = VertexSet::from_ids(g.vertex_count(), [start]);
    let mut members = vec![start];
    while set.len() < size {
        let cand: Vec<usize> = members
            .iter()
            .flat_map(|&u| g.neighbors(u).iter().copied())
            .filter(|&w| !set.contains(w) && g.depth(w) <= max_depth)
            .collect();
        if cand.is_empty() {
            break;
        }
        let w = cand[r.random_range(0..cand.len())];
        set.insert(w);
        members.push(w);
    }
    set
}

fn random_field(g: &Graph, r: &mut ChaCha8Rng, lo: f64, hi: f64) -> FieldState {
    let v = (0..g.vertex_count()).map(|_| r.random_range(lo..=hi)).collect();
    FieldState::from_values(g, v).expect("length matches")
}

fn graph_checks(g: &Graph, seed: u64, out: &mut Checks) {
    let mut r = rng(seed, 1);
    let (mut identities, mut intersection, mut degree) = (0, 0, 0);
    for _ in 0..TRIALS {
        let size = r.random_range(1..=60);
        let b = random_region(g, &mut r, size);
        let d = random_region(g, &mut r, size);
        let (o, i) = (g.outer_set(&b), g.inner_set(&b));
        let ok = g.boundary_out(&b) == o.difference(&b)
            && g.boundary_inn(&b) == b.difference(&i)
            && g.boundary_full(&b) == g.boundary_out(&b).union(&g.boundary_inn(&b))
            && g.outer_set(&i).is_subset(&b)
            && b.is_subset(&g.inner_set(&o));
        identities += usize::from(!ok);
        let lhs = g.boundary_out(&b.intersection(&d));
        let rhs = g.boundary_out(&b).intersection(&g.outer_set(&d)).union(&o.intersection(&g.boundary_out(&d)));
        intersection += usize::from(!lhs.is_subset(&rhs));
        degree += usize::from(g.boundary_out(&b).len() > g.max_degree() * b.len());
    }
    out.push("boundary_identities", "graph", true, identities == 0, format!("{identities}/{TRIALS} failures"));
    out.push("boundary_of_intersection", "graph", true, intersection == 0, format!("{intersection}/{TRIALS} sets outside the bound"));
    out.push("degree_bound", "graph", true, degree == 0, format!("{degree}/{TRIALS} failures, S = {}", g.max_degree()));

    let mut bad = 0;
    let radius = g.r_max().min(4);
    for c in 0..g.vertex_count().min(50) {
        let mut union = g.empty_set();
        for n in 0..=radius {
            let s = g.sphere(c, n).value;
            bad += usize::from(!union.is_disjoint(&s));
            union.union_with(&s);
            bad += usize::from(union != g.ball(c, n).value);
        }
    }
    out.push("balls_and_spheres", "graph", true, bad == 0, format!("{bad} mismatches up to radius {radius}"));
}

/// Runs every check and reports them in a fixed order.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let g = crate::commands::build_graph(&cfg.graph)?;
    let s = setting(cfg, &g)?;
    let m = &s.model;
    let is_tree = matches!(cfg.graph, GeneratorSpec::Tree { .. });
    let p = build_potential(cfg)?;
    let pk = derive_constants(&p, cfg.potential.resolution)?;
    let solver = solver_config(cfg, &pk)?;
    let rho = solver.rho;
    let mut out = Checks(Vec::new());

    graph_checks(&g, cfg.seed, &mut out);

    if is_tree {
        let delta = s.geometry.delta_used;
        out.push("tree_is_0_hyperbolic", "geometry", true, delta == 0.0, format!("delta {delta}"));
    }
    let k = fit_shadow_constants(m, cfg.geometry.shadow_samples, cfg.seed)?;
    out.push(
        "shadow_constants_finite",
        "boundary",
        true,
        k.c1.is_finite() && k.c2.is_finite() && k.c1 > 0.0 && k.c2 > 0.0,
        format!("C1 {} C2 {} over {} pairs", k.c1, k.c2, k.sampled_pairs),
    );

    let ok = pk.verify(rho, pk.resolution);
    out.push("potential_constants", "potential", true, ok, format!("rho0 {} b {} m1 {} at rho {rho}", pk.rho0, pk.b, pk.m1));

    let mut r = rng(cfg.seed, 2);
    let (c0, c1) = (p.c0(), p.c1());
    let (mut trapped, mut ordered, mut minmax, mut worst_residual, mut unconverged) = (0, 0, 0, 0f64, 0);
    let (mut min_gap, mut components) = (f64::INFINITY, 0);
    for _ in 0..TRIALS {
        let size = r.random_range(1..=REGION_SIZE);
        let b = random_region(&g, &mut r, size);
        let f = random_field(&g, &mut r, c0, c1);
        let bump = random_field(&g, &mut r, 0.0, 0.5 * (c1 - c0));
        let high = FieldState::from_values(&g, f.values.iter().zip(&bump.values).map(|(a, d)| (a + d).min(c1)).collect())?;
        let cmp = comparison_check(&g, &p, &b, &f, &high, &solver)?;
        ordered += usize::from(!cmp.ordered);
        for sol in [&cmp.low, &cmp.high] {
            trapped += usize::from(!trapping_check(&g, &p, &sol.field, &b)?);
            unconverged += usize::from(!sol.converged);
            worst_residual = worst_residual.max(el_residual(&g, &p, &sol.field, &b)?);
        }
        let gap = verify_local_minimality(&g, &p, &cmp.low.field, &b, 20, 0.05, r.random_range(0..u64::MAX))?;
        min_gap = min_gap.min(gap.min_gap);
        components += usize::from(!component_boundary_check(&g, &cmp.low.field, &b, rho, &pk)?.passed);
        let x = random_field(&g, &mut r, c0 - 1.0, c1 + 1.0);
        let y = random_field(&g, &mut r, c0 - 1.0, c1 + 1.0);
        let (lhs, rhs) = minmax_check(&g, &p, &x, &y, &b)?;
        minmax += usize::from(lhs < rhs - ENERGY_TOL);
    }
    out.push("trapping", "variational", true, trapped == 0, format!("{trapped}/{} minimisers leave [c0, c1]", 2 * TRIALS));
    out.push("comparison", "variational", true, ordered == 0, format!("{ordered}/{TRIALS} unordered pairs"));
    out.push("min_max", "variational", true, minmax == 0, format!("{minmax}/{TRIALS} failures"));
    out.push(
        "euler_lagrange_residual",
        "variational",
        true,
        unconverged == 0 && worst_residual <= solver.residual_tol,
        format!("worst {worst_residual:.3e}, {unconverged} unconverged"),
    );
    out.push("local_minimality", "variational", true, min_gap >= -1e-9, format!("min gap {min_gap:.3e}"));
    out.push("component_boundary", "variational", true, components == 0, format!("{components}/{TRIALS} failures"));

    let mut r = rng(cfg.seed, 3);
    let (mut sep_failed, mut sep_vacuous) = (0, 0);
    for _ in 0..TRIALS {
        let xi0 = r.random_range(0..m.proxy_count());
        let rad = r.random_range(0.0..m.diameter().max(f64::MIN_POSITIVE));
        let n = r.random_range(0..=m.radius());
        let c = separating_lemma_check(m, &k, xi0, rad, n);
        sep_failed += usize::from(!c.holds());
        sep_vacuous += usize::from(c.vacuous);
    }
    out.push(
        "separating_set",
        "boundary",
        true,
        sep_failed == 0,
        format!("{sep_failed}/{TRIALS} failures, {sep_vacuous} vacuous"),
    );

    let (mut applicable, mut inside) = (0, 0);
    for _ in 0..10 * TRIALS {
        let xi = r.random_range(0..m.proxy_count());
        let members = m.u_set(xi).to_vec();
        let u = members[r.random_range(0..members.len())];
        let xi0 = if r.random_bool(0.5) { xi } else { r.random_range(0..m.proxy_count()) };
        let rad = r.random_range(0.0..m.diameter().max(f64::MIN_POSITIVE));
        if let Some(hit) = cone_membership(m, k.c2, u, xi, xi0, rad) {
            applicable += 1;
            inside += usize::from(hit);
        }
    }
    out.push(
        "cone_membership",
        "boundary",
        is_tree,
        inside == applicable,
        format!("{inside}/{applicable} applicable cases inside the cone"),
    );

    let split = make_split(m, &cfg.split, cfg.pipeline.r_min)?;
    let list = n_list(cfg, m.radius())?;
    let ex = exhaustion_solve(m, &split, &p, &list, &solver)?;
    out.push(
        "exhaustion_converged",
        "pipeline",
        true,
        !ex.report.hard_failure && ex.solutions.iter().all(|s| s.converged),
        format!("{} solves over N = {list:?}", ex.solutions.len()),
    );
    out.push(
        "exhaustion_monotone",
        "pipeline",
        false,
        !ex.report.non_monotone,
        format!("successive deltas {:?}", ex.report.deltas),
    );
    let swap = swap_symmetry(m, &split, &p, &solver, &ex)?;
    out.push(
        "swap_symmetry",
        "pipeline",
        true,
        swap.max_deviation <= SWAP_TOL,
        format!("max deviation {:.3e} against the mirrored run", swap.max_deviation),
    );
    out.push(
        "swap_ring_data",
        "pipeline",
        is_tree,
        swap.ring_mismatches == 0,
        format!("{} ring vertices where the swapped datum differs from the mirror", swap.ring_mismatches),
    );

    let top = *list.last().expect("nonempty list");
    let b = g.base_ball(top);
    let (mut ts_failed, mut needed) = (0, 0f64);
    for n in 1..top {
        let rep = ts_inequality_check(&g, ex.last(), &b, &g.base_ball(n), rho, &pk)?;
        ts_failed += usize::from(!rep.holds);
        needed = needed.max(rep.k0_needed);
    }
    out.push(
        "transition_set_inequality",
        "variational",
        false,
        ts_failed == 0,
        format!("{ts_failed} failing balls, largest constant needed {needed:.4}"),
    );

    let iso = run_isoperimetry(cfg, &g, m)?;
    out.push(
        "isoperimetric_profile",
        "isoperimetry",
        false,
        !iso.ip.violated_at_scale,
        format!("C0 {} over {} sets, ball ratio slope {:.3}", iso.ip.c0, iso.ip.tested, iso.ip.ball_ratio_slope),
    );
    Ok(out.0)
}
