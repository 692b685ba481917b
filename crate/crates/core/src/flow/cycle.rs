use serde::{Deserialize, Serialize};

use super::unfolding_vf;
use crate::equilibria::{solve_equilibria, DEFAULT_TOL_ROOT};
use crate::ode::{solve_with, Crossing, Event, IntegratorConfig, Trajectory, VectorField};
use crate::roots::brent;
use crate::unfolding::{MuParams, PlanarState};

/// A located periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycle {
    /// One period, starting and ending on the section.
    pub trajectory: Trajectory<2>,
    pub period: f64,
    /// Distance of the section point from the centre.
    pub radius: f64,
    /// `|P(r) - r|` at the located fixed point.
    pub displacement: f64,
    /// Finite-difference derivative of the return map.
    pub multiplier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Section {
    centre: [f64; 2],
    falling: bool,
}

const MIN_RETURN_TIME: f64 = 1e-6;

// First return to the half-line y = centre.y, x > centre.x, crossed in the
// direction the flow takes there. Returns (r, time) or None on escape.
fn return_once<V: VectorField<2>>(
    field: &V,
    sec: Section,
    r: f64,
    escape: f64,
    config: &IntegratorConfig,
    mut observer: impl FnMut(f64, &[f64; 2]),
) -> Option<(f64, f64)> {
    let [cx, cy] = sec.centre;
    let crossing = if sec.falling { Crossing::Falling } else { Crossing::Rising };
    let events = [
        Event::new(move |s: &[f64; 2]| s[1] - cy, crossing)
            .accept(move |s| s[0] > cx)
            .min_time(MIN_RETURN_TIME)
            .terminal(),
        Event::new(move |s: &[f64; 2]| (s[0] - cx).abs().max((s[1] - cy).abs()) - escape, Crossing::Rising)
            .terminal(),
    ];
    match solve_with(field, [cx + r, cy], config.max_time, config, &events, &mut observer) {
        Ok((hits, Some(0), _, t, _)) => Some((hits.last()?.state[0] - cx, t)),
        _ => None,
    }
}

/// Return map `r -> P(r)` of the half-line section through `centre`.
pub fn return_map<V: VectorField<2>>(
    field: &V,
    centre: [f64; 2],
    r: f64,
    escape: f64,
    config: &IntegratorConfig,
) -> Option<f64> {
    let falling = field.eval(&[centre[0] + r, centre[1]])[1] < 0.0;
    return_once(field, Section { centre, falling }, r, escape, config, |_, _| {}).map(|v| v.0)
}

/// Finds an attracting periodic orbit around `centre` by iterating the
/// return map from `r0` and then solving `P(r) = r` by secant steps,
/// switching to Brent once a sign change is bracketed. Returns `None`
/// if iterates escape beyond `escape` or collapse onto the centre.
pub fn find_cycle<V: VectorField<2>>(
    field: &V,
    centre: [f64; 2],
    r0: f64,
    escape: f64,
    config: &IntegratorConfig,
) -> Option<LimitCycle> {
    if !(r0 > 0.0) {
        return None;
    }
    let cfg = IntegratorConfig {
        abs_tol: config.abs_tol.min(1e-12),
        rel_tol: config.rel_tol.min(1e-12),
        ..*config
    };
    let falling = field.eval(&[centre[0] + r0, centre[1]])[1] < 0.0;
    let sec = Section { centre, falling };
    let r_min = 1e-9 * escape;
    let p = |r: f64| return_once(field, sec, r, escape, &cfg, |_, _| {}).map(|v| v.0);
    let d = |r: f64| p(r).map(|v| v - r);
    let tol = 1e-10;

    let mut a = r0;
    let mut da = d(a)?;
    let mut b = a + da;
    if !(b > r_min) {
        return None;
    }
    let mut db = d(b)?;
    let mut root = None;
    for _ in 0..100 {
        if db.abs() <= tol {
            root = Some(b);
            break;
        }
        if da * db < 0.0 {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let r = brent(|r| d(r).unwrap_or(f64::NAN), lo, hi, 1e-15, 200).ok()?;
            root = Some(r);
            break;
        }
        let iterate = b + db;
        let secant = b - db * (b - a) / (db - da);
        // Try the secant step, pulling it back towards b if the orbit
        // escapes, and fall back to plain iteration P(b). A secant step
        // against the sign of d heads for the trivial fixed point at the
        // centre and is rejected.
        let mut next = None;
        if secant.is_finite() && secant > r_min && (secant - b) * db > 0.0 {
            let mut c = secant;
            for _ in 0..6 {
                if let Some(dc) = d(c) {
                    next = Some((c, dc));
                    break;
                }
                c = b + 0.5 * (c - b);
            }
        }
        let (c, dc) = match next {
            Some(v) => v,
            None if iterate > r_min => (iterate, d(iterate)?),
            None => return None,
        };
        a = b;
        da = db;
        b = c;
        db = dc;
    }
    let r = root?;
    let mut trajectory = Trajectory::new();
    let (end, period) = return_once(field, sec, r, escape, &cfg, |t, s| trajectory.push(t, *s))?;
    let displacement = (end - r).abs();
    if displacement > 1e-9 || !(r > r_min) {
        return None;
    }
    let h = 1e-5 * r;
    let multiplier = match (p(r + h), p(r - h)) {
        (Some(u), Some(v)) => (u - v) / (2.0 * h),
        _ => f64::NAN,
    };
    Some(LimitCycle { trajectory, period, radius: r, displacement, multiplier })
}

/// Limit cycle of the unfolding around its antisaddle. The section is the
/// half-line `y = 0, x > x_c` through the central equilibrium (or the
/// single equilibrium); `seed` fixes the starting distance on it.
pub fn find_limit_cycle(mu: MuParams, seed: PlanarState, config: &IntegratorConfig) -> Option<LimitCycle> {
    if !(mu.mu3 > 0.0) {
        // Negative divergence everywhere: no periodic orbits.
        return None;
    }
    let eqs = solve_equilibria(mu, DEFAULT_TOL_ROOT);
    let centre = match eqs.len() {
        3 => eqs[1],
        1 => eqs[0],
        _ => return None,
    };
    if !centre.kind.is_antisaddle() {
        return None;
    }
    let reach = if eqs.len() == 3 { eqs[2].x - centre.x } else { 1.0 + mu.mu2.abs().sqrt() };
    let r0 = if seed.x > centre.x { seed.x - centre.x } else { 0.5 * reach };
    let escape = 10.0 * (1.0 + reach);
    find_cycle(&unfolding_vf(mu), [centre.x, 0.0], r0, escape, config)
}
