mod common;

use acgraph::boundary::{horizon, BoundaryModel};
use acgraph::geometry::VisualMetric;
use acgraph::graph::{build_tiling, build_tree, Graph, VertexSet};
use acgraph::potential::Potential;
use acgraph::variational::{
    dirichlet_energy, energy, minmax_check, solve_dirichlet, FieldState, SolverConfig, ENERGY_TOL,
};
use common::{random_connected, rng};
use proptest::prelude::*;
use std::sync::OnceLock;

fn graphs() -> &'static [Graph; 2] {
    static G: OnceLock<[Graph; 2]> = OnceLock::new();
    G.get_or_init(|| [build_tree(3, 6).unwrap(), build_tiling(3, 7, 5).unwrap()])
}

fn tree_model() -> &'static BoundaryModel<'static> {
    static M: OnceLock<BoundaryModel<'static>> = OnceLock::new();
    M.get_or_init(|| {
        let g = &graphs()[0];
        let vm = VisualMetric { epsilon: 1.0, lambda: 1.0, horizon_radius: 5 };
        BoundaryModel::build(g, horizon(g, 5, 0.0).unwrap(), vm, 0.0).unwrap()
    })
}

fn region(which: usize, seed: u64, size: usize) -> (&'static Graph, VertexSet) {
    let g = &graphs()[which];
    let b = random_connected(g, &mut rng(seed), size, g.r_max() - 2);
    (g, b)
}

fn field(g: &Graph, seed: u64, lo: f64, hi: f64) -> FieldState {
    FieldState::from_values(g, common::random_values(g.vertex_count(), &mut rng(seed), lo, hi)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_identities(which in 0usize..2, seed in any::<u64>(), size in 1usize..60) {
        let (g, b) = region(which, seed, size);
        let out = g.outer_set(&b);
        let inn = g.inner_set(&b);
        prop_assert_eq!(g.boundary_out(&b), out.difference(&b));
        prop_assert_eq!(g.boundary_inn(&b), b.difference(&inn));
        prop_assert_eq!(g.boundary_full(&b), g.boundary_out(&b).union(&g.boundary_inn(&b)));
        prop_assert!(inn.is_subset(&b) && b.is_subset(&out));
        prop_assert_eq!(g.iterate_out(&b, 2), g.outer_set(&out));
    }

    #[test]
    fn boundary_of_intersection(which in 0usize..2, seed in any::<u64>(), sb in 1usize..60, sd in 1usize..60) {
        let (g, b) = region(which, seed, sb);
        let (_, d) = region(which, seed.wrapping_add(1), sd);
        let lhs = g.boundary_out(&b.intersection(&d));
        let rhs = g.boundary_out(&b).intersection(&g.outer_set(&d)).union(&g.outer_set(&b).intersection(&g.boundary_out(&d)));
        prop_assert!(lhs.is_subset(&rhs));
        // the reverse inclusion fails only at vertices touching B \ D and D \ B but not B ∩ D
        for u in rhs.difference(&lhs).iter() {
            prop_assert!(g.neighbors(u).iter().all(|&w| !(b.contains(w) && d.contains(w))));
        }
    }

    #[test]
    fn inner_outer_duality(which in 0usize..2, seed in any::<u64>(), size in 1usize..60) {
        let (g, b) = region(which, seed, size);
        prop_assert!(g.outer_set(&g.inner_set(&b)).is_subset(&b));
        prop_assert!(b.is_subset(&g.inner_set(&g.outer_set(&b))));
    }

    #[test]
    fn degree_bound(which in 0usize..2, seed in any::<u64>(), size in 1usize..60) {
        let (g, b) = region(which, seed, size);
        prop_assert!(g.boundary_out(&b).len() <= g.max_degree() * b.len());
        prop_assert!(g.boundary_inn(&b).len() <= g.max_degree() * g.boundary_out(&b).len().max(1));
    }

    #[test]
    fn balls_and_spheres(which in 0usize..2, center in 0usize..200, n in 0usize..5) {
        let g = &graphs()[which];
        let c = center % g.vertex_count();
        let ball = g.ball(c, n + 1).value;
        let inner = g.ball(c, n).value;
        prop_assert_eq!(g.sphere(c, n + 1).value, ball.difference(&inner));
        prop_assert_eq!(g.outer_set(&inner), ball);
        prop_assert!(inner.contains(c));
        let mut union = g.empty_set();
        for k in 0..=n {
            let sk = g.sphere(c, k).value;
            prop_assert!(union.is_disjoint(&sk));
            union.union_with(&sk);
        }
        prop_assert_eq!(union, inner);
    }

    #[test]
    fn min_max_inequality(which in 0usize..2, seed in any::<u64>(), size in 1usize..40) {
        let (g, b) = region(which, seed, size);
        let p = Potential::quartic(-1.0, 1.0).unwrap();
        let x = field(g, seed ^ 1, -2.0, 2.0);
        let y = field(g, seed ^ 2, -2.0, 2.0);
        let (lhs, rhs) = minmax_check(g, &p, &x, &y, &b).unwrap();
        prop_assert!(lhs >= rhs - ENERGY_TOL);
    }

    #[test]
    fn energies_nonnegative_and_zero_at_wells(which in 0usize..2, seed in any::<u64>(), size in 1usize..40) {
        let (g, b) = region(which, seed, size);
        let p = Potential::quartic(-1.0, 1.0).unwrap();
        let x = field(g, seed, -2.0, 2.0);
        prop_assert!(energy(g, &p, &x, &b).unwrap() >= 0.0);
        prop_assert!(dirichlet_energy(g, &p, &x, &b).unwrap() >= 0.0);
        for c in [-1.0, 1.0] {
            prop_assert_eq!(energy(g, &p, &FieldState::constant(g, c), &b).unwrap(), 0.0);
        }
    }

    #[test]
    fn solver_never_raises_energy(which in 0usize..2, seed in any::<u64>(), size in 1usize..30) {
        let (g, b) = region(which, seed, size);
        let p = Potential::quartic(-1.0, 1.0).unwrap();
        let f = field(g, seed, -1.0, 1.0);
        let s = solve_dirichlet(g, &p, &b, &f, &SolverConfig::default()).unwrap();
        prop_assert!(s.energy <= dirichlet_energy(g, &p, &f, &b).unwrap() + ENERGY_TOL);
        prop_assert!(s.energy_trace.windows(2).all(|w| w[1] <= w[0] + ENERGY_TOL));
        for u in b.iter() {
            prop_assert!((-1.0..=1.0).contains(&s.field.values[u]));
        }
    }

    #[test]
    fn cone_monotone_in_radius(xi in 0usize..96, r in 0.0f64..1.0, extra in 0.0f64..0.5) {
        let m = tree_model();
        let i = xi % m.proxy_count();
        let small = m.cone(&m.ball(i, r));
        let large = m.cone(&m.ball(i, r + extra));
        prop_assert!(small.is_subset(&large));
        prop_assert!(m.ball(i, r).contains(i));
    }

    #[test]
    fn visual_distance_is_ultrametric_on_tree(a in 0usize..96, b in 0usize..96, c in 0usize..96) {
        let m = tree_model();
        let h = m.proxy_count();
        let (a, b, c) = (a % h, b % h, c % h);
        prop_assert_eq!(m.distance(a, b), m.distance(b, a));
        prop_assert!(m.distance(a, c) <= m.distance(a, b).max(m.distance(b, c)) * (1.0 + 1e-12));
    }
}

/// `∂^out(B ∩ D)` is in general a proper subset of
/// `(∂^out B ∩ D^out) ∪ (B^out ∩ ∂^out D)`.
#[test]
fn intersection_boundary_counterexample() {
    let g = build_tree(3, 3).unwrap();
    let (a, c) = (g.neighbors(0)[0], g.neighbors(0)[1]);
    let deep = *g.neighbors(a).iter().find(|&&w| w != 0).unwrap();
    let b = VertexSet::from_ids(g.vertex_count(), [a, deep]);
    let d = VertexSet::from_ids(g.vertex_count(), [c, deep]);
    let lhs = g.boundary_out(&b.intersection(&d));
    let rhs = g.boundary_out(&b).intersection(&g.outer_set(&d)).union(&g.outer_set(&b).intersection(&g.boundary_out(&d)));
    assert!(lhs.is_subset(&rhs));
    assert!(rhs.contains(0) && !lhs.contains(0));
}
