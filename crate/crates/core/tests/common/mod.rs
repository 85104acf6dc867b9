#![allow(dead_code)]

use acgraph::graph::{Graph, VertexSet};
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID: usize = 65;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Double well with zeros at `c0 < c1`, written out independently of the library.
#[derive(Clone, Copy, Debug)]
pub struct Quartic {
    pub c0: f64,
    pub c1: f64,
}

impl Quartic {
    fn t(&self, s: f64) -> (f64, f64) {
        let w = self.c1 - self.c0;
        ((2.0 * s - self.c0 - self.c1) / w, 2.0 / w)
    }

    pub fn v(&self, s: f64) -> f64 {
        let (t, _) = self.t(s);
        (1.0 - t * t).powi(2)
    }

    pub fn dv(&self, s: f64) -> f64 {
        let (t, dt) = self.t(s);
        -4.0 * t * (1.0 - t * t) * dt
    }

    pub fn ddv(&self, s: f64) -> f64 {
        let (t, dt) = self.t(s);
        (12.0 * t * t - 4.0) * dt * dt
    }
}

/// `W` summed over `B ∪ N(B)`: `¼ Σ_{w~u} (x_w - x_u)² + V(x_u)` per site.
pub fn w_out(g: &Graph, q: Quartic, x: &[f64], b: &VertexSet) -> f64 {
    let mut sites: Vec<usize> = b.iter().collect();
    for u in b.iter() {
        sites.extend_from_slice(g.neighbors(u));
    }
    sites.sort_unstable();
    sites.dedup();
    sites
        .iter()
        .map(|&u| {
            let grad: f64 = g.neighbors(u).iter().map(|&w| (x[w] - x[u]).powi(2)).sum();
            0.25 * grad + q.v(x[u])
        })
        .sum()
}

struct Factor {
    vars: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    fn index(&self, assign: &[usize]) -> usize {
        self.vars.iter().rev().fold(0, |acc, &v| acc * GRID + assign[v])
    }
}

struct Step {
    var: usize,
    others: Vec<usize>,
    argmin: Vec<u8>,
}

/// Global minimiser of the free energy on `b` with data `f`, by exact
/// minimisation over a grid of `GRID` levels in `[c0, c1]` per vertex followed
/// by a dense Newton polish. Returns `(W_{B^out}, field)`.
pub fn oracle_minimum(g: &Graph, q: Quartic, b: &VertexSet, f: &[f64]) -> (f64, Vec<f64>) {
    let free = b.to_vec();
    let k = free.len();
    let local = |u: usize| free.iter().position(|&v| v == u);
    let level = |i: usize| q.c0 + (q.c1 - q.c0) * i as f64 / (GRID - 1) as f64;

    let mut factors: Vec<Factor> = Vec::new();
    for (i, &u) in free.iter().enumerate() {
        let table = (0..GRID)
            .map(|a| {
                let t = level(a);
                let ext: f64 = g.neighbors(u).iter().filter(|&&w| !b.contains(w)).map(|&w| 0.5 * (t - f[w]).powi(2)).sum();
                q.v(t) + ext
            })
            .collect();
        factors.push(Factor { vars: vec![i], table });
        for &w in g.neighbors(u) {
            if let Some(j) = local(w) {
                if i < j {
                    let mut table = vec![0.0; GRID * GRID];
                    for a in 0..GRID {
                        for c in 0..GRID {
                            table[a + GRID * c] = 0.5 * (level(a) - level(c)).powi(2);
                        }
                    }
                    factors.push(Factor { vars: vec![i, j], table });
                }
            }
        }
    }

    let mut remaining: Vec<usize> = (0..k).collect();
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        let scope = |v: usize, fs: &[Factor]| {
            let mut s: Vec<usize> = fs.iter().filter(|f| f.vars.contains(&v)).flat_map(|f| f.vars.clone()).filter(|&w| w != v).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let (pos, &var) = remaining.iter().enumerate().min_by_key(|&(_, &v)| scope(v, &factors).len()).unwrap();
        remaining.remove(pos);
        let others = scope(var, &factors);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = rest;
        let size = GRID.pow(others.len() as u32);
        let mut table = vec![0.0; size];
        let mut argmin = vec![0u8; size];
        let mut assign = vec![0usize; k];
        for idx in 0..size {
            let mut rem = idx;
            for &o in &others {
                assign[o] = rem % GRID;
                rem /= GRID;
            }
            let mut best = (f64::INFINITY, 0);
            for a in 0..GRID {
                assign[var] = a;
                let val: f64 = touching.iter().map(|f| f.table[f.index(&assign)]).sum();
                if val < best.0 {
                    best = (val, a);
                }
            }
            table[idx] = best.0;
            argmin[idx] = best.1 as u8;
        }
        factors.push(Factor { vars: others.clone(), table });
        steps.push(Step { var, others, argmin });
    }
    let mut assign = vec![0usize; k];
    for s in steps.iter().rev() {
        let idx = s.others.iter().rev().fold(0, |acc, &v| acc * GRID + assign[v]);
        assign[s.var] = s.argmin[idx] as usize;
    }

    let mut y: Vec<f64> = assign.iter().map(|&a| level(a)).collect();
    let free_energy = |y: &[f64]| -> f64 {
        let mut e = 0.0;
        for (i, &u) in free.iter().enumerate() {
            e += q.v(y[i]);
            for &w in g.neighbors(u) {
                match local(w) {
                    Some(j) if i < j => e += 0.5 * (y[i] - y[j]).powi(2),
                    Some(_) => {}
                    None => e += 0.5 * (y[i] - f[w]).powi(2),
                }
            }
        }
        e
    };
    for _ in 0..200 {
        let mut grad: DVector<f64> = DVector::zeros(k);
        let mut hess: DMatrix<f64> = DMatrix::zeros(k, k);
        for (i, &u) in free.iter().enumerate() {
            grad[i] += q.dv(y[i]);
            hess[(i, i)] += q.ddv(y[i]);
            for &w in g.neighbors(u) {
                let other = local(w).map_or(f[w], |j| y[j]);
                grad[i] += y[i] - other;
                hess[(i, i)] += 1.0;
                if let Some(j) = local(w) {
                    hess[(i, j)] -= 1.0;
                }
            }
        }
        if grad.amax() < 1e-14 {
            break;
        }
        let dir = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let e0 = free_energy(&y);
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-12 {
            let trial: Vec<f64> = y.iter().zip(dir.iter()).map(|(a, d)| a + step * d).collect();
            if free_energy(&trial) <= e0 {
                y = trial;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let mut x = f.to_vec();
    for (i, &u) in free.iter().enumerate() {
        x[u] = y[i];
    }
    (w_out(g, q, &x, b), x)
}

/// Connected set grown from a random vertex of depth at most `max_depth`,
/// staying within that depth.
pub fn random_connected(g: &Graph, r: &mut ChaCha8Rng, size: usize, max_depth: usize) -> VertexSet {
    let pool: Vec<usize> = g.base_ball(max_depth).to_vec();
    let start = pool[r.random_range(0..pool.len())];
    let mut set = VertexSet::from_ids(g.vertex_count(), [start]);
    let mut frontier: Vec<usize> = vec![start];
    while set.len() < size {
        let cand: Vec<usize> = frontier
            .iter()
            .flat_map(|&u| g.neighbors(u).iter().copied())
            .filter(|&w| !set.contains(w) && g.depth(w) <= max_depth)
            .collect();
        if cand.is_empty() {
            break;
        }
        let w = cand[r.random_range(0..cand.len())];
        set.insert(w);
        frontier.push(w);
    }
    set
}

pub fn random_values(n: usize, r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(lo..=hi)).collect()
}
