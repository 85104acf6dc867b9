//! Double-well potentials and the quantitative well constants used by the
//! transition-set estimates.

use crate::error::{invalid, Error, Result};
use crate::graph::VertexSet;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Quartic,
    Tilted { kappa: f64 },
    Periodic,
    Custom { v: ScalarFn, dv: ScalarFn, ddv: ScalarFn },
}

/// A C² double well with non-degenerate consecutive minima `c0 < c1` and
/// `V(c0) = V(c1) = 0`.
#[derive(Clone)]
pub struct Potential {
    c0: f64,
    c1: f64,
    shape: Shape,
    mirrored: bool,
    description: String,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("c0", &self.c0)
            .field("c1", &self.c1)
            .field("description", &self.description)
            .finish()
    }
}

impl Potential {
    /// `V(s) = (1 - t²)²` with `t = (2s - c0 - c1) / (c1 - c0)`.
    pub fn quartic(c0: f64, c1: f64) -> Result<Self> {
        Self::checked(c0, c1, Shape::Quartic, format!("quartic({c0}, {c1})"))
    }

    /// Quartic multiplied by `1 + κ tanh t`, giving wells of different
    /// curvature for `κ ≠ 0`.
    pub fn tilted(c0: f64, c1: f64, kappa: f64) -> Result<Self> {
        if !(kappa.abs() < 1.0) {
            return Err(invalid(format!("tilt must satisfy |kappa| < 1, got {kappa}")));
        }
        Self::checked(c0, c1, Shape::Tilted { kappa }, format!("tilted({c0}, {c1}, {kappa})"))
    }

    /// `V(s) = 1 - cos(2π (s - c0) / (c1 - c0))`.
    pub fn periodic(c0: f64, c1: f64) -> Result<Self> {
        Self::checked(c0, c1, Shape::Periodic, format!("periodic({c0}, {c1})"))
    }

    /// User supplied `(V, V', V'')`, validated on `[c0, c1]`.
    pub fn custom(c0: f64, c1: f64, v: ScalarFn, dv: ScalarFn, ddv: ScalarFn, description: &str) -> Result<Self> {
        Self::checked(c0, c1, Shape::Custom { v, dv, ddv }, description.to_string())
    }

    fn checked(c0: f64, c1: f64, shape: Shape, description: String) -> Result<Self> {
        if !(c0 < c1) || !c0.is_finite() || !c1.is_finite() {
            return Err(invalid(format!("wells must satisfy c0 < c1, got ({c0}, {c1})")));
        }
        let p = Self { c0, c1, shape, mirrored: false, description };
        p.validate((c1 - c0) / 1e5)?;
        Ok(p)
    }

    /// Checks the well invariants at scan resolution `h`.
    pub fn validate(&self, h: f64) -> Result<()> {
        let scale = 1.0 + self.value((self.c0 + self.c1) / 2.0).abs();
        if self.value(self.c0).abs() > 1e-12 * scale || self.value(self.c1).abs() > 1e-12 * scale {
            return Err(invalid(format!("{}: V must vanish at both wells", self.description)));
        }
        if !(self.second_derivative(self.c0) > 0.0 && self.second_derivative(self.c1) > 0.0) {
            return Err(invalid(format!("{}: wells must be non-degenerate", self.description)));
        }
        let steps = ((self.c1 - self.c0) / h).ceil() as usize;
        for i in 1..steps {
            let s = self.c0 + (self.c1 - self.c0) * i as f64 / steps as f64;
            if self.value(s) <= 0.0 {
                return Err(invalid(format!(
                    "{}: V({s}) <= 0 inside the wells; minima are not consecutive",
                    self.description
                )));
            }
        }
        Ok(())
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn width(&self) -> f64 {
        self.c1 - self.c0
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `s ↦ V(c0 + c1 - s)`, exchanging the roles of the wells.
    pub fn mirrored(&self) -> Self {
        let mut p = self.clone();
        p.mirrored = !p.mirrored;
        p.description = format!("mirror of {}", self.description);
        p
    }

    fn arg(&self, s: f64) -> f64 {
        if self.mirrored {
            self.c0 + self.c1 - s
        } else {
            s
        }
    }

    fn t(&self, s: f64) -> (f64, f64) {
        let w = self.c1 - self.c0;
        ((2.0 * s - (self.c0 + self.c1)) / w, 2.0 / w)
    }

    pub fn value(&self, s: f64) -> f64 {
        let s = self.arg(s);
        match &self.shape {
            Shape::Quartic => {
                let (t, _) = self.t(s);
                let a = 1.0 - t * t;
                a * a
            }
            Shape::Tilted { kappa } => {
                let (t, _) = self.t(s);
                let a = 1.0 - t * t;
                a * a * (1.0 + kappa * t.tanh())
            }
            Shape::Periodic => {
                let k = 2.0 * std::f64::consts::PI / (self.c1 - self.c0);
                1.0 - (k * (s - self.c0)).cos()
            }
            Shape::Custom { v, .. } => v(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let sign = if self.mirrored { -1.0 } else { 1.0 };
        let s = self.arg(s);
        sign * match &self.shape {
            Shape::Quartic => {
                let (t, dt) = self.t(s);
                -4.0 * t * (1.0 - t * t) * dt
            }
            Shape::Tilted { kappa } => {
                let (t, dt) = self.t(s);
                let a = 1.0 - t * t;
                let th = t.tanh();
                let w = 1.0 + kappa * th;
                let dw = kappa * (1.0 - th * th);
                (-4.0 * t * a * w + a * a * dw) * dt
            }
            Shape::Periodic => {
                let k = 2.0 * std::f64::consts::PI / (self.c1 - self.c0);
                k * (k * (s - self.c0)).sin()
            }
            Shape::Custom { dv, .. } => dv(s),
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        let s = self.arg(s);
        match &self.shape {
            Shape::Quartic => {
                let (t, dt) = self.t(s);
                (12.0 * t * t - 4.0) * dt * dt
            }
            Shape::Tilted { kappa } => {
                let (t, dt) = self.t(s);
                let a = 1.0 - t * t;
                let th = t.tanh();
                let sech2 = 1.0 - th * th;
                let w = 1.0 + kappa * th;
                let dw = kappa * sech2;
                let ddw = -2.0 * kappa * sech2 * th;
                ((12.0 * t * t - 4.0) * w + 2.0 * (-4.0 * t * a) * dw + a * a * ddw) * dt * dt
            }
            Shape::Periodic => {
                let k = 2.0 * std::f64::consts::PI / (self.c1 - self.c0);
                k * k * (k * (s - self.c0)).cos()
            }
            Shape::Custom { ddv, .. } => ddv(s),
        }
    }
}

/// Well constants `ρ0, b, m1` with `β(ρ)` and `ρ̃(ρ)` available as methods.
///
/// The well conditions, checked on a scan grid:
/// (a) `V'` is negative and nondecreasing on `[c1 - 2bρ0, c1)`;
/// (b) `V(c0 + y) >= V(c1 - y/b)` for `y ∈ [0, 2bρ0]`;
/// (c) `β(ρ) > 0`;
/// (d) `ρ̃(ρ)` exists and `V >= V(c0 + ρ̃)` on `[c0 + ρ̃, c1 - 2bρ]`.
#[derive(Clone, Debug)]
pub struct PotentialConstants {
    pub rho0: f64,
    pub b: f64,
    pub m1: f64,
    pub resolution: f64,
    potential: Potential,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsSummary {
    pub rho0: f64,
    pub b: f64,
    pub m1: f64,
    pub resolution: f64,
    pub beta_at_rho0: f64,
    pub rho_tilde_at_rho0: f64,
}

fn grid(a: f64, b: f64, h: f64) -> impl Iterator<Item = f64> {
    let steps = (((b - a) / h).ceil() as usize).max(1);
    (0..=steps).map(move |i| if i == steps { b } else { a + (b - a) * i as f64 / steps as f64 })
}

fn tol(v: f64) -> f64 {
    1e-12 * (1.0 + v.abs())
}

impl PotentialConstants {
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `β(ρ)` of (c): `min V` on `[c0 + 2bρ, c1 - 2bρ]` minus
    /// `max{V(c0 + bρ), V(c1 - bρ)}`.
    pub fn beta(&self, rho: f64) -> f64 {
        beta_at(&self.potential, self.b, rho, self.resolution)
    }

    /// `ρ̃(ρ)` of (d): smallest `ρ̃ > 0` with `V(c0 + ρ̃) = V(c1 - 2bρ)`.
    pub fn rho_tilde(&self, rho: f64) -> f64 {
        rho_tilde_at(&self.potential, self.b, rho, self.resolution).unwrap_or(f64::NAN)
    }

    /// Re-runs conditions (a)–(d) at resolution `h` for `ρ`.
    pub fn verify(&self, rho: f64, h: f64) -> bool {
        rho > 0.0 && rho <= self.rho0 * (1.0 + 1e-12) && parts_hold(&self.potential, self.b, self.rho0, rho, h)
    }

    pub fn summary(&self) -> ConstantsSummary {
        ConstantsSummary {
            rho0: self.rho0,
            b: self.b,
            m1: self.m1,
            resolution: self.resolution,
            beta_at_rho0: self.beta(self.rho0),
            rho_tilde_at_rho0: self.rho_tilde(self.rho0),
        }
    }
}

fn beta_at(p: &Potential, b: f64, rho: f64, h: f64) -> f64 {
    let lo = p.c0 + 2.0 * b * rho;
    let hi = p.c1 - 2.0 * b * rho;
    let floor = grid(lo, hi, h).map(|y| p.value(y)).fold(f64::INFINITY, f64::min);
    floor - p.value(p.c0 + b * rho).max(p.value(p.c1 - b * rho))
}

fn rho_tilde_at(p: &Potential, b: f64, rho: f64, h: f64) -> Option<f64> {
    let target = p.value(p.c1 - 2.0 * b * rho);
    let limit = p.width() - 2.0 * b * rho;
    let mut prev = 0.0;
    for s in grid(0.0, limit, h).skip(1) {
        if p.value(p.c0 + s) >= target {
            let (mut a, mut c) = (prev, s);
            for _ in 0..200 {
                let m = 0.5 * (a + c);
                if m <= a || m >= c {
                    break;
                }
                if p.value(p.c0 + m) >= target {
                    c = m;
                } else {
                    a = m;
                }
            }
            return Some(c);
        }
        prev = s;
    }
    None
}

fn part_a(p: &Potential, b: f64, rho0: f64, h: f64) -> bool {
    let mut prev = f64::NEG_INFINITY;
    for y in grid(p.c1 - 2.0 * b * rho0, p.c1, h) {
        let d = p.derivative(y);
        if d < prev - tol(prev) {
            return false;
        }
        if y < p.c1 && d >= 0.0 {
            return false;
        }
        prev = d;
    }
    true
}

fn part_b(p: &Potential, b: f64, rho0: f64, h: f64) -> bool {
    grid(0.0, 2.0 * b * rho0, h).all(|y| {
        let lhs = p.value(p.c0 + y);
        let rhs = p.value(p.c1 - y / b);
        lhs >= rhs - tol(rhs)
    })
}

fn part_c(p: &Potential, b: f64, rho: f64, h: f64) -> bool {
    beta_at(p, b, rho, h) > 0.0
}

fn part_d(p: &Potential, b: f64, rho: f64, h: f64) -> bool {
    let Some(rt) = rho_tilde_at(p, b, rho, h) else { return false };
    let level = p.value(p.c0 + rt);
    let stays_above = grid(p.c0 + rt, p.c1 - 2.0 * b * rho, h).all(|y| p.value(y) >= level - tol(level));
    stays_above && 2.0 * b * rho <= p.width() - 2.0 * b * rho - rt + 1e-12
}

fn tested_rhos(rho0: f64, h: f64) -> impl Iterator<Item = f64> {
    (0..10).map(move |k| rho0 / f64::powi(2.0, k)).filter(move |&r| r > 4.0 * h)
}

fn parts_hold(p: &Potential, b: f64, rho0: f64, rho: f64, h: f64) -> bool {
    4.0 * b * rho0 <= p.width() * (1.0 + 1e-12)
        && part_a(p, b, rho0, h)
        && part_b(p, b, rho0, h)
        && part_c(p, b, rho, h)
        && part_d(p, b, rho, h)
}

/// Searches `b` over powers of two and halves `ρ0` from `(c1 - c0)/(4b)`
/// until conditions (a)–(d) verify on the scan grid for a ladder of `ρ <= ρ0`.
pub fn derive_constants(p: &Potential, h: Option<f64>) -> Result<PotentialConstants> {
    let h = h.unwrap_or(p.width() / 1e5);
    if !(h > 0.0) {
        return Err(invalid("scan resolution must be positive"));
    }
    for k in 0..=10 {
        let b = f64::powi(2.0, k);
        let mut rho0 = p.width() / (4.0 * b);
        while rho0 > 16.0 * h {
            if tested_rhos(rho0, h).all(|rho| parts_hold(p, b, rho0, rho, h)) {
                let m1 = grid(p.c1 - 2.0 * b * rho0, p.c1, h)
                    .filter(|&y| y < p.c1)
                    .map(|y| p.derivative(y) / (y - p.c1))
                    .fold(f64::INFINITY, f64::min)
                    .min(p.second_derivative(p.c1));
                if !(m1 > 0.0) {
                    break;
                }
                return Ok(PotentialConstants {
                    rho0,
                    b,
                    m1: m1 * (1.0 - 1e-9),
                    resolution: h,
                    potential: p.clone(),
                });
            }
            rho0 /= 2.0;
        }
    }
    Err(Error::Unsatisfiable(format!(
        "{}: no rho0 above {} satisfies the well conditions",
        p.description,
        16.0 * h
    )))
}

/// `Σ_{g∈D} (V(x_g) - V(c))`.
pub fn potential_excess(p: &Potential, x: &[f64], d: &VertexSet, c: f64) -> f64 {
    let vc = p.value(c);
    d.iter().map(|g| p.value(x[g]) - vc).sum()
}
