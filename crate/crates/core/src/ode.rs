//! Explicit embedded Runge-Kutta integration (Dormand-Prince 5(4)) with
//! event location.
//!
//! States are fixed-size arrays so that the same machinery drives the
//! planar unfolding, the Lienard reductions and the 3D oscillators.

use crate::error::{Error, Result};
use crate::roots::brent;

/// Autonomous vector field `s' = f(s)`.
pub trait VectorField<const N: usize> {
    fn eval(&self, s: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> VectorField<N> for F
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    fn eval(&self, s: &[f64; N]) -> [f64; N] {
        self(s)
    }
}

/// The time-reversed field `s' = -f(s)`.
pub struct Reversed<'a, V>(pub &'a V);

impl<'a, const N: usize, V: VectorField<N>> VectorField<N> for Reversed<'a, V> {
    fn eval(&self, s: &[f64; N]) -> [f64; N] {
        let mut d = self.0.eval(s);
        d.iter_mut().for_each(|v| *v = -*v);
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the step size.
    pub max_step: f64,
    /// Integration horizon for searches that wait for an event.
    pub max_time: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: 0.1,
            max_time: 1e4,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self.rel_tol = tol;
        self
    }

    pub fn with_max_time(mut self, t: f64) -> Self {
        self.max_time = t;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.abs_tol, self.rel_tol, self.max_step, self.max_time]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok && self.max_steps > 0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("integrator config {self:?}")))
        }
    }
}

/// Time-stamped samples of an orbit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, s: [f64; N]) {
        self.times.push(t);
        self.states.push(s);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, [f64; N])> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// Componentwise `(min, max)` over the samples.
    pub fn bounds(&self) -> [(f64, f64); N] {
        let mut b = [(f64::INFINITY, f64::NEG_INFINITY); N];
        for s in &self.states {
            for (k, v) in s.iter().enumerate() {
                b[k].0 = b[k].0.min(*v);
                b[k].1 = b[k].1.max(*v);
            }
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    fn matches(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Crossing::Rising => rising,
            Crossing::Falling => falling,
            Crossing::Either => rising || falling,
        }
    }
}

/// Zero crossing of a scalar function of the state.
pub struct Event<'a, const N: usize> {
    pub g: Box<dyn Fn(&[f64; N]) -> f64 + 'a>,
    pub crossing: Crossing,
    pub terminal: bool,
    /// Extra condition on the located state (e.g. a half-line section).
    pub accept: Option<Box<dyn Fn(&[f64; N]) -> bool + 'a>>,
    /// Crossings earlier than this (relative to the start) are ignored.
    pub min_time: f64,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(g: impl Fn(&[f64; N]) -> f64 + 'a, crossing: Crossing) -> Self {
        Self {
            g: Box::new(g),
            crossing,
            terminal: false,
            accept: None,
            min_time: 0.0,
        }
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn accept(mut self, pred: impl Fn(&[f64; N]) -> bool + 'a) -> Self {
        self.accept = Some(Box::new(pred));
        self
    }

    pub fn min_time(mut self, t: f64) -> Self {
        self.min_time = t;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    pub event: usize,
    pub t: f64,
    pub state: [f64; N],
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub trajectory: Trajectory<N>,
    pub hits: Vec<EventHit<N>>,
    /// Index of the terminal event that stopped the run, if any.
    pub stopped_by: Option<usize>,
    pub steps: usize,
}

impl<const N: usize> Solution<N> {
    pub fn final_state(&self) -> [f64; N] {
        *self.trajectory.states.last().expect("solution has samples")
    }

    pub fn final_time(&self) -> f64 {
        *self.trajectory.times.last().expect("solution has samples")
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Step<const N: usize> {
    y: [f64; N],
    err: [f64; N],
    f_end: [f64; N],
}

fn dp_step<const N: usize, V: VectorField<N>>(field: &V, y: &[f64; N], f0: &[f64; N], h: f64) -> Step<N> {
    let mut k = [[0.0; N]; 7];
    k[0] = *f0;
    for stage in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[stage] = field.eval(&ys);
        debug_assert!(C[stage] >= 0.0);
    }
    let mut out = *y;
    let mut err = [0.0; N];
    for j in 0..7 {
        for i in 0..N {
            out[i] += h * B5[j] * k[j][i];
            err[i] += h * E[j] * k[j][i];
        }
    }
    Step {
        y: out,
        err,
        f_end: k[6],
    }
}

fn error_norm<const N: usize>(cfg: &IntegratorConfig, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize>(cfg: &IntegratorConfig, y0: &[f64; N], f0: &[f64; N]) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs();
        d0 += (y0[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(cfg.max_step).max(1e-12)
}

fn is_finite<const N: usize>(s: &[f64; N]) -> bool {
    s.iter().all(|v| v.is_finite())
}

/// Integrates from `start` at t = 0 up to `t_end`, or until a terminal
/// event fires. `observer` sees every accepted sample (including the
/// start and any terminal event state).
pub fn solve_with<const N: usize, V, O>(
    field: &V,
    start: [f64; N],
    t_end: f64,
    config: &IntegratorConfig,
    events: &[Event<'_, N>],
    mut observer: O,
) -> Result<(Vec<EventHit<N>>, Option<usize>, usize, f64, [f64; N])>
where
    V: VectorField<N>,
    O: FnMut(f64, &[f64; N]),
{
    config.validate()?;
    if !is_finite(&start) {
        return Err(Error::NonFiniteState(0.0));
    }
    let mut t = 0.0;
    let mut y = start;
    let mut f = field.eval(&y);
    observer(t, &y);
    let mut hits = Vec::new();
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(&y)).collect();
    let mut h = initial_step(config, &y, &f);
    let mut steps = 0usize;
    while t < t_end {
        if steps >= config.max_steps {
            return Err(Error::MaxTimeExceeded(t));
        }
        let h_try = h.min(t_end - t).min(config.max_step);
        let step = dp_step(field, &y, &f, h_try);
        let en = error_norm(config, &y, &step.y, &step.err);
        if !en.is_finite() || !is_finite(&step.y) {
            h = 0.25 * h_try;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NonFiniteState(t));
            }
            continue;
        }
        if en > 1.0 {
            h = h_try * (0.9 * en.powf(-0.2)).max(0.2);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow(t));
            }
            continue;
        }
        steps += 1;
        let t_new = if h_try == t_end - t { t_end } else { t + h_try };

        // Event detection over [t, t_new].
        let g_new: Vec<f64> = events.iter().map(|e| (e.g)(&step.y)).collect();
        let mut found: Vec<(f64, usize, [f64; N])> = Vec::new();
        for (idx, ev) in events.iter().enumerate() {
            if !ev.crossing.matches(g_prev[idx], g_new[idx]) {
                continue;
            }
            let phi = |tau: f64| {
                if tau == 0.0 {
                    g_prev[idx]
                } else {
                    (ev.g)(&dp_step(field, &y, &f, tau).y)
                }
            };
            let tau = brent(phi, 0.0, h_try, 1e-13, 200).unwrap_or(h_try);
            let te = t + tau;
            if te < ev.min_time {
                continue;
            }
            let se = if tau == h_try { step.y } else { dp_step(field, &y, &f, tau).y };
            if let Some(pred) = &ev.accept {
                if !pred(&se) {
                    continue;
                }
            }
            found.push((te, idx, se));
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (te, idx, se) in found {
            hits.push(EventHit {
                event: idx,
                t: te,
                state: se,
            });
            if events[idx].terminal {
                observer(te, &se);
                return Ok((hits, Some(idx), steps, te, se));
            }
        }

        t = t_new;
        y = step.y;
        f = step.f_end;
        g_prev = g_new;
        observer(t, &y);
        let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_try * factor;
    }
    Ok((hits, None, steps, t, y))
}

/// Integrates and records every accepted step.
pub fn solve<const N: usize, V: VectorField<N>>(
    field: &V,
    start: [f64; N],
    t_end: f64,
    config: &IntegratorConfig,
    events: &[Event<'_, N>],
) -> Result<Solution<N>> {
    let mut trajectory = Trajectory::new();
    let (hits, stopped_by, steps, _, _) =
        solve_with(field, start, t_end, config, events, |t, s| trajectory.push(t, *s))?;
    Ok(Solution {
        trajectory,
        hits,
        stopped_by,
        steps,
    })
}

/// Runs until the first accepted crossing of `event` and returns it;
/// fails with `MaxTimeExceeded` if none occurs before `config.max_time`.
pub fn first_hit<const N: usize, V: VectorField<N>>(
    field: &V,
    start: [f64; N],
    config: &IntegratorConfig,
    event: Event<'_, N>,
) -> Result<EventHit<N>> {
    let event = event.terminal();
    let (hits, stopped, _, _, _) =
        solve_with(field, start, config.max_time, config, std::slice::from_ref(&event), |_, _| {})?;
    match stopped {
        Some(_) => Ok(*hits.last().expect("terminal hit recorded")),
        None => Err(Error::MaxTimeExceeded(config.max_time)),
    }
}

/// Fixed-step integration with the fifth-order Dormand-Prince solution.
pub fn solve_fixed<const N: usize, V: VectorField<N>>(field: &V, start: [f64; N], h: f64, steps: usize) -> [f64; N] {
    let mut y = start;
    let mut f = field.eval(&y);
    for _ in 0..steps {
        let s = dp_step(field, &y, &f, h);
        y = s.y;
        f = s.f_end;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let field = |s: &[f64; 2]| [s[1], -s[0]];
        let cfg = IntegratorConfig::default();
        let sol = solve(&field, [1.0, 0.0], 2.0 * std::f64::consts::PI, &cfg, &[]).unwrap();
        let end = sol.final_state();
        assert!((end[0] - 1.0).abs() < 1e-9);
        assert!(end[1].abs() < 1e-9);
        assert!(sol.trajectory.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let field = |s: &[f64; 1]| [-0.5 * s[0]];
        let cfg = IntegratorConfig::default();
        let sol = solve(&field, [2.0], 10.0, &cfg, &[]).unwrap();
        assert!((sol.final_state()[0] - 2.0 * (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn event_located_to_high_accuracy() {
        // x(t) = cos t crosses zero downward at t = pi/2.
        let field = |s: &[f64; 2]| [s[1], -s[0]];
        let cfg = IntegratorConfig::default().with_max_step(0.5);
        let ev = Event::new(|s: &[f64; 2]| s[0], Crossing::Falling);
        let hit = first_hit(&field, [1.0, 0.0], &cfg, ev).unwrap();
        assert!((hit.t - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert!(hit.state[0].abs() < 1e-11);
    }

    #[test]
    fn direction_and_acceptance_filter() {
        let field = |s: &[f64; 2]| [s[1], -s[0]];
        let cfg = IntegratorConfig::default();
        // y = 0 with x > 0 crossed while falling happens at t = 2 pi.
        let ev = Event::new(|s: &[f64; 2]| s[1], Crossing::Falling).accept(|s| s[0] > 0.0).min_time(1e-6);
        let hit = first_hit(&field, [1.0, 0.0], &cfg, ev).unwrap();
        assert!((hit.t - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn missing_event_reports_max_time() {
        let field = |s: &[f64; 1]| [-s[0]];
        let cfg = IntegratorConfig::default().with_max_time(5.0);
        let ev = Event::new(|s: &[f64; 1]| s[0] + 1.0, Crossing::Either);
        assert!(matches!(first_hit(&field, [1.0], &cfg, ev), Err(Error::MaxTimeExceeded(_))));
    }

    #[test]
    fn reversed_field_runs_backwards() {
        let field = |s: &[f64; 1]| [s[0]];
        let cfg = IntegratorConfig::default();
        let sol = solve(&Reversed(&field), [1.0], 3.0, &cfg, &[]).unwrap();
        assert!((sol.final_state()[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let field = |s: &[f64; 2]| [s[1], -s[0]];
        let err = |n: usize| {
            let y = solve_fixed(&field, [1.0, 0.0], 1.0 / n as f64, n);
            ((y[0] - 1f64.cos()).powi(2) + (y[1] + 1f64.sin()).powi(2)).sqrt()
        };
        let slope = (err(10) / err(20)).log2();
        assert!((slope - 5.0).abs() < 0.3, "slope {slope}");
    }
}
