//! The memristor-based Duffing oscillator `x' = y, y' = z, z' = -alpha z - M(x) y`
//! with `M = phi'`: its invariant, the planar reduction on each leaf and an
//! audit of its periodic orbits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{solve_with, Crossing, Event, IntegratorConfig, VectorField};
use crate::roots::brent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    pub alpha: f64,
    /// `phi(x) = sum phi[i] x^i`.
    pub phi: Vec<f64>,
}

impl DuffingParams {
    /// `phi(x) = omega x + beta_d x^3`.
    pub fn cubic(alpha: f64, omega: f64, beta_d: f64) -> Self {
        Self { alpha, phi: vec![0.0, omega, 0.0, beta_d] }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.phi.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Memristance `M = phi'`.
    pub fn m(&self, x: f64) -> f64 {
        self.phi.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
    }

    /// `int_0^x phi`.
    pub fn phi_primitive(&self, x: f64) -> f64 {
        self.phi.iter().enumerate().rev().fold(0.0, |acc, (i, c)| acc * x + c / (i + 1) as f64) * x
    }

    fn check(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.phi.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("Duffing parameters must be finite".into()));
        }
        Ok(())
    }
}

impl VectorField<3> for DuffingParams {
    fn eval(&self, s: &[f64; 3]) -> [f64; 3] {
        let [x, y, z] = *s;
        [y, z, -self.alpha * z - self.m(x) * y]
    }
}

/// `phi(x) + alpha y + z`.
pub fn duffing_invariant(p: &DuffingParams, s: &[f64; 3]) -> f64 {
    p.phi(s[0]) + p.alpha * s[1] + s[2]
}

/// `x' = y, y' = -phi(x) - alpha y + h` on the leaf `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuffingReduced {
    pub params: DuffingParams,
    pub h: f64,
}

impl DuffingReduced {
    /// Divergence of the reduced field, identically `-alpha`.
    pub fn divergence(&self) -> f64 {
        0.0 - self.params.alpha
    }

    /// `y^2/2 + int_0^x phi - h x`, conserved when `alpha = 0`.
    pub fn energy(&self, s: &[f64; 2]) -> f64 {
        0.5 * s[1] * s[1] + self.params.phi_primitive(s[0]) - self.h * s[0]
    }

    /// Point of the leaf above `(x, y)`: `z = h - phi(x) - alpha y`.
    pub fn lift_point(&self, s: [f64; 2]) -> [f64; 3] {
        [s[0], s[1], self.h - self.params.phi(s[0]) - self.params.alpha * s[1]]
    }

    /// A root of `phi(x) = h`, found by expanding a bracket around 0.
    pub fn equilibrium(&self) -> Result<f64> {
        let f = |x: f64| self.params.phi(x) - self.h;
        if f(0.0) == 0.0 {
            return Ok(0.0);
        }
        let mut r = 1.0;
        for _ in 0..60 {
            for (lo, hi) in [(0.0, r), (-r, 0.0)] {
                if f(lo) * f(hi) <= 0.0 {
                    return brent(f, lo, hi, 1e-15, 200);
                }
            }
            r *= 2.0;
        }
        Err(Error::InvalidArgument(format!("phi(x) = {} has no real root", self.h)))
    }
}

impl VectorField<2> for DuffingReduced {
    fn eval(&self, s: &[f64; 2]) -> [f64; 2] {
        [s[1], -self.params.phi(s[0]) - self.params.alpha * s[1] + self.h]
    }
}

pub fn duffing_reduce(p: &DuffingParams, h: f64) -> DuffingReduced {
    DuffingReduced { params: p.clone(), h }
}

/// Successive maxima of `x` (crossings of `y = 0` downwards right of the
/// equilibrium `xe`) starting from `(x0, 0)`, up to `t_final` or `max_count`.
pub fn section_maxima(
    r: &DuffingReduced,
    xe: f64,
    x0: f64,
    t_final: f64,
    max_count: usize,
    config: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let mut out = vec![x0];
    let mut ev = Event::new(|s: &[f64; 2]| s[1], Crossing::Falling).accept(move |s| s[0] > xe);
    if max_count == 1 {
        ev = ev.terminal();
    }
    let events = [ev];
    let (hits, ..) = solve_with(r, [x0, 0.0], t_final, config, &events, |_, _| {})?;
    out.extend(hits.iter().take(max_count).map(|h| h.state[0]));
    Ok(out)
}

/// `P(x0) - x0` for the first-return map on the section `y = 0`, `x > xe`.
pub fn return_displacement(r: &DuffingReduced, xe: f64, x0: f64, config: &IntegratorConfig) -> Result<f64> {
    let m = section_maxima(r, xe, x0, config.max_time, 1, config)?;
    match m.get(1) {
        Some(x1) => Ok(x1 - x0),
        None => Err(Error::MaxTimeExceeded(config.max_time)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NoPeriodicOrbits,
    HamiltonianFoliation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub divergence: f64,
    /// Largest `|H - h|` along the three-dimensional run.
    pub invariant_drift: f64,
    /// Least-squares slope of the section maxima against revolution number.
    pub amplitude_trend: f64,
    pub revolutions: usize,
    /// Whether every per-revolution change had the sign of the trend.
    pub one_signed: bool,
    /// First-return displacement from the starting amplitude.
    pub return_displacement: f64,
    pub verdict: Verdict,
}

fn slope(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = v.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in v.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Audit starting one unit right of the leaf's equilibrium.
pub fn duffing_audit(p: &DuffingParams, h: f64, t_final: f64, config: &IntegratorConfig) -> Result<AuditReport> {
    let xe = duffing_reduce(p, h).equilibrium()?;
    duffing_audit_from(p, h, xe + 1.0, t_final, config)
}

/// Integrates the reduced system from `(x0, 0)` and the full system from its
/// lift over `[0, t_final]`.
pub fn duffing_audit_from(
    p: &DuffingParams,
    h: f64,
    x0: f64,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<AuditReport> {
    p.check()?;
    if !(t_final > 0.0) {
        return Err(Error::InvalidArgument(format!("t_final must be positive (got {t_final})")));
    }
    let r = duffing_reduce(p, h);
    let xe = r.equilibrium()?;
    if !(x0 > xe) {
        return Err(Error::InvalidArgument(format!("start {x0} must lie right of the equilibrium {xe}")));
    }
    let maxima = section_maxima(&r, xe, x0, t_final, usize::MAX, config)?;
    let steps: Vec<f64> = maxima.windows(2).map(|w| w[1] - w[0]).collect();
    let amplitude_trend = if maxima.len() > 1 { slope(&maxima) } else { 0.0 };
    let one_signed = !steps.is_empty()
        && (steps.iter().all(|d| *d < 0.0) || steps.iter().all(|d| *d > 0.0));
    let return_displacement = steps.first().copied().unwrap_or(f64::NAN);

    let start = r.lift_point([x0, 0.0]);
    let mut invariant_drift: f64 = 0.0;
    solve_with(p, start, t_final, config, &[], |_, s| {
        invariant_drift = invariant_drift.max((duffing_invariant(p, s) - h).abs());
    })?;

    Ok(AuditReport {
        divergence: r.divergence(),
        invariant_drift,
        amplitude_trend,
        revolutions: steps.len(),
        one_signed,
        return_displacement,
        verdict: if p.alpha == 0.0 { Verdict::HamiltonianFoliation } else { Verdict::NoPeriodicOrbits },
    })
}
