use super::{check_region, dirichlet_energy, el_residual, FieldState};
use crate::error::{invalid, Result};
use crate::graph::{Graph, VertexSet};
use crate::potential::Potential;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Number of samples in the dense scan of the one-vertex energy.
pub const SCAN_POINTS: usize = 257;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// The input field inside the region, e.g. the tilde-x extension.
    BoundaryExtension,
    C0Fill,
    C1Fill,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    Smallest,
    Largest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    GaussSeidel,
    /// Simultaneous updates in parallel. Follows a different fixed-point
    /// path and does not guarantee energy descent.
    Jacobi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub residual_tol: f64,
    pub max_sweeps: usize,
    pub multistart: Vec<Start>,
    pub rho: f64,
    pub seed: u64,
    pub tie_break: TieBreak,
    pub mode: SweepMode,
    /// Fail instead of silently disabling the clamp when boundary data
    /// leaves `[c0, c1]`.
    pub require_trapping: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_sweeps: 100_000,
            multistart: vec![Start::BoundaryExtension, Start::C0Fill, Start::C1Fill],
            rho: 0.05,
            seed: 0,
            tie_break: TieBreak::Smallest,
            mode: SweepMode::GaussSeidel,
            require_trapping: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, rho0: Option<f64>) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(invalid("residual_tol must be positive"));
        }
        if self.multistart.is_empty() {
            return Err(invalid("multistart needs at least one initialization"));
        }
        if !(self.rho > 0.0) {
            return Err(invalid("rho must be positive"));
        }
        if let Some(r0) = rho0 {
            if self.rho > r0 * (1.0 + 1e-12) {
                return Err(invalid(format!("rho = {} exceeds rho0 = {r0}", self.rho)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StartOutcome {
    pub start: Start,
    pub energy: f64,
    pub residual: f64,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: FieldState,
    pub converged: bool,
    pub sweeps: usize,
    pub residual: f64,
    /// Energy of the free variables, `W_{B^out}` up to a constant fixed by
    /// the boundary data.
    pub energy: f64,
    /// Energy after each sweep of the winning start, starting with the
    /// initial field.
    pub energy_trace: Vec<f64>,
    pub winner: Start,
    pub clamped: bool,
    pub outcomes: Vec<StartOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveTelemetry {
    pub sweeps: usize,
    pub final_residual: f64,
    pub energy: f64,
    pub energy_trace_len: usize,
    pub multistart_winner: Start,
    pub converged: bool,
    pub clamped: bool,
    pub mode: SweepMode,
    pub outcomes: Vec<StartOutcome>,
}

impl Solution {
    pub fn telemetry(&self, mode: SweepMode) -> SolveTelemetry {
        SolveTelemetry {
            sweeps: self.sweeps,
            final_residual: self.residual,
            energy: self.energy,
            energy_trace_len: self.energy_trace.len(),
            multistart_winner: self.winner,
            converged: self.converged,
            clamped: self.clamped,
            mode,
            outcomes: self.outcomes.clone(),
        }
    }
}

/// Global minimiser over `[lo, hi]` of `t ↦ (deg/2) t² - s t + V(t)`.
pub struct VertexMinimizer<'a> {
    p: &'a Potential,
    lo: f64,
    hi: f64,
    ts: Vec<f64>,
    vs: Vec<f64>,
    tie: TieBreak,
}

impl<'a> VertexMinimizer<'a> {
    pub fn new(p: &'a Potential, lo: f64, hi: f64, tie: TieBreak) -> Self {
        let ts: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| {
                if i + 1 == SCAN_POINTS {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64
                }
            })
            .collect();
        let vs = ts.iter().map(|&t| p.value(t)).collect();
        Self { p, lo, hi, ts, vs, tie }
    }

    fn phi(&self, deg: f64, s: f64, t: f64) -> f64 {
        0.5 * deg * t * t - s * t + self.p.value(t)
    }

    fn dphi(&self, deg: f64, s: f64, t: f64) -> f64 {
        deg * t - s + self.p.derivative(t)
    }

    fn polish(&self, deg: f64, s: f64, mut a: f64, mut b: f64, start: f64) -> f64 {
        let da = self.dphi(deg, s, a);
        let db = self.dphi(deg, s, b);
        if !(da < 0.0 && db > 0.0) {
            // no interior stationary point bracketed: best of the three
            let mut best = start;
            for t in [a, b] {
                if self.phi(deg, s, t) < self.phi(deg, s, best) {
                    best = t;
                }
            }
            return best;
        }
        let mut x = start.clamp(a, b);
        for _ in 0..200 {
            let d = self.dphi(deg, s, x);
            if d == 0.0 {
                return x;
            }
            if d < 0.0 {
                a = x;
            } else {
                b = x;
            }
            let curv = deg + self.p.second_derivative(x);
            let mut next = x - d / curv;
            if !(curv > 0.0) || !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) || b - a <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn minimize(&self, deg: usize, s: f64) -> f64 {
        let deg = deg as f64;
        let phis: Vec<f64> = self
            .ts
            .iter()
            .zip(&self.vs)
            .map(|(&t, &v)| 0.5 * deg * t * t - s * t + v)
            .collect();
        let n = phis.len();
        let mut local: Vec<usize> = (0..n)
            .filter(|&i| (i == 0 || phis[i] <= phis[i - 1]) && (i + 1 == n || phis[i] <= phis[i + 1]))
            .collect();
        local.sort_by(|&i, &j| phis[i].total_cmp(&phis[j]));
        local.truncate(4);
        let mut best: Option<(f64, f64)> = None;
        for i in local {
            let a = self.ts[i.saturating_sub(1)];
            let b = self.ts[(i + 1).min(n - 1)];
            let t = self.polish(deg, s, a, b, self.ts[i]).clamp(self.lo, self.hi);
            let f = self.phi(deg, s, t);
            best = Some(match best {
                None => (t, f),
                Some((bt, bf)) => {
                    let tol = 1e-12 * (1.0 + bf.abs());
                    if f < bf - tol {
                        (t, f)
                    } else if f <= bf + tol {
                        let prefer = match self.tie {
                            TieBreak::Smallest => t < bt,
                            TieBreak::Largest => t > bt,
                        };
                        if prefer {
                            (t, f)
                        } else {
                            (bt, bf)
                        }
                    } else {
                        (bt, bf)
                    }
                }
            });
        }
        best.map(|(t, _)| t).unwrap_or(self.lo)
    }
}

/// Minimises `W_{B^out}` over fields agreeing with `f` outside `b`.
///
/// Every start is swept to convergence and the least-energy result is
/// returned. Updates stay in `[c0, c1]` whenever the data on
/// `(B^out)^out \ B` does.
pub fn solve_dirichlet(g: &Graph, p: &Potential, b: &VertexSet, f: &FieldState, cfg: &SolverConfig) -> Result<Solution> {
    f.check_graph(g)?;
    cfg.validate(None)?;
    check_region(g, b)?;
    let ring = g.iterate_out(b, 2).difference(b);
    let (mut fmin, mut fmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for u in ring.iter() {
        fmin = fmin.min(f.values[u]);
        fmax = fmax.max(f.values[u]);
    }
    let trapped = ring.is_empty() || (fmin >= p.c0() && fmax <= p.c1());
    if !trapped && cfg.require_trapping {
        return Err(invalid(format!(
            "boundary data spans [{fmin}, {fmax}], outside [{}, {}], with trapping required",
            p.c0(),
            p.c1()
        )));
    }
    let (lo, hi) = if trapped { (p.c0(), p.c1()) } else { (fmin.min(p.c0()), fmax.max(p.c1())) };
    let mz = VertexMinimizer::new(p, lo, hi, cfg.tie_break);
    let free = b.to_vec();

    let mut best: Option<(FieldState, Vec<f64>, Start, usize, bool, f64)> = None;
    let mut outcomes = Vec::new();
    for &start in &cfg.multistart {
        let mut x = f.clone();
        match start {
            Start::BoundaryExtension => {
                for &u in &free {
                    x.values[u] = x.values[u].clamp(lo, hi);
                }
            }
            Start::C0Fill => free.iter().for_each(|&u| x.values[u] = p.c0()),
            Start::C1Fill => free.iter().for_each(|&u| x.values[u] = p.c1()),
        }
        let mut trace = vec![dirichlet_energy(g, p, &x, b)?];
        let mut residual = el_residual(g, p, &x, b)?;
        let mut sweeps = 0;
        while residual > cfg.residual_tol && sweeps < cfg.max_sweeps {
            match cfg.mode {
                SweepMode::GaussSeidel => {
                    for &u in &free {
                        let s: f64 = g.neighbors(u).iter().map(|&w| x.values[w]).sum();
                        x.values[u] = mz.minimize(g.degree(u), s);
                    }
                }
                SweepMode::Jacobi => {
                    let next: Vec<f64> = free
                        .par_iter()
                        .map(|&u| {
                            let s: f64 = g.neighbors(u).iter().map(|&w| x.values[w]).sum();
                            mz.minimize(g.degree(u), s)
                        })
                        .collect();
                    for (&u, v) in free.iter().zip(next) {
                        x.values[u] = v;
                    }
                }
            }
            sweeps += 1;
            trace.push(dirichlet_energy(g, p, &x, b)?);
            residual = el_residual(g, p, &x, b)?;
        }
        let energy = *trace.last().unwrap();
        let converged = residual <= cfg.residual_tol;
        outcomes.push(StartOutcome { start, energy, residual, sweeps, converged });
        let better = match &best {
            None => true,
            Some((.., e)) => energy < *e - 1e-12 * (1.0 + e.abs()),
        };
        if better {
            best = Some((x, trace, start, sweeps, converged, energy));
        }
    }
    let (field, energy_trace, winner, sweeps, converged, energy) = best.expect("multistart is non-empty");
    let residual = el_residual(g, p, &field, b)?;
    Ok(Solution { field, converged, sweeps, residual, energy, energy_trace, winner, clamped: trapped, outcomes })
}
