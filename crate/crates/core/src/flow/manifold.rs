use serde::{Deserialize, Serialize};

use super::unfolding_vf;
use crate::equilibria::{discriminant, solve_equilibria, Curve, Equilibrium, EquilibriumKind, DEFAULT_TOL_ROOT};
use crate::error::{Error, Result};
use crate::melnikov::{nu1_of_theta, nu2_of_theta};
use crate::ode::{Crossing, Event, IntegratorConfig, Reversed};
use crate::roots::brent;
use crate::unfolding::{MuParams, PlanarState};

/// Default offset of manifold initial conditions from the saddle.
pub const DEFAULT_DELTA: f64 = 1e-6;

/// A branch of a saddle's invariant manifold. `Plus` starts along the
/// eigenvector with positive x-component, `Minus` along its negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldBranch {
    UnstablePlus,
    UnstableMinus,
    StablePlus,
    StableMinus,
}

impl ManifoldBranch {
    fn unstable(self) -> bool {
        matches!(self, ManifoldBranch::UnstablePlus | ManifoldBranch::UnstableMinus)
    }

    fn sign(self) -> f64 {
        match self {
            ManifoldBranch::UnstablePlus | ManifoldBranch::StablePlus => 1.0,
            _ => -1.0,
        }
    }
}

fn escape_radius(mu: MuParams) -> f64 {
    10.0 * (1.0 + mu.mu2.abs().sqrt() + mu.mu1.abs().cbrt())
}

/// Follows one manifold branch of `saddle` to the line `x = section_x`
/// and returns the first crossing at which the forward flow heads back
/// towards the saddle's side of the section. For the loop of the right
/// saddle this is the crossing in the upper half-plane.
pub fn saddle_manifold_shot(
    mu: MuParams,
    saddle: &Equilibrium,
    branch: ManifoldBranch,
    delta: f64,
    section_x: f64,
    config: &IntegratorConfig,
) -> Result<PlanarState> {
    if saddle.kind != EquilibriumKind::Saddle {
        return Err(Error::NotASaddle);
    }
    if !(1e-8..=1e-4).contains(&delta) {
        return Err(Error::InvalidOffset(delta));
    }
    let (ls, lu) = saddle.real_eigenvalues().ok_or(Error::NotASaddle)?;
    let lambda = if branch.unstable() { lu } else { ls };
    let norm = (1.0 + lambda * lambda).sqrt();
    let k = branch.sign() * delta / norm;
    let start = [saddle.x + k, k * lambda];
    let side = saddle.x - section_x;
    let radius = escape_radius(mu);
    let xs = saddle.x;
    let field = unfolding_vf(mu);
    let events = [
        Event::new(move |s: &[f64; 2]| s[0] - section_x, Crossing::Either)
            .accept(move |s| s[1] * side > 0.0)
            .terminal(),
        Event::new(move |s: &[f64; 2]| (s[0] - xs).abs().max(s[1].abs()) - radius, Crossing::Rising).terminal(),
    ];
    let out = if branch.unstable() {
        crate::ode::solve_with(&field, start, config.max_time, config, &events, |_, _| {})
    } else {
        crate::ode::solve_with(&Reversed(&field), start, config.max_time, config, &events, |_, _| {})
    };
    let no_crossing = Error::NoCrossing { section: section_x, max_time: config.max_time };
    match out {
        Ok((hits, Some(0), ..)) => {
            let s = hits.last().expect("terminal hit").state;
            Ok(PlanarState::new(s[0], s[1]))
        }
        Ok(_) | Err(Error::MaxTimeExceeded(_)) | Err(Error::NonFiniteState(_)) | Err(Error::StepSizeUnderflow(_)) => {
            Err(no_crossing)
        }
        Err(e) => Err(e),
    }
}

/// Signed separation of the unstable and stable manifolds of a saddle loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingResult {
    pub mu: MuParams,
    /// `y_unstable - y_stable` at the section.
    pub gap: f64,
    pub section_x: f64,
    pub y_unstable: f64,
    pub y_stable: f64,
}

/// Caps the search horizon by the time needed to leave and re-enter the
/// saddle's neighbourhood plus a multiple of the slow time scale; longer
/// near the double heteroclinic point where the loop lingers at the left saddle.
fn splitting_config(mu: MuParams, saddle: &Equilibrium, delta: f64, config: &IntegratorConfig) -> IntegratorConfig {
    let eps = mu.mu3.abs().sqrt().max(1e-3);
    let rate = saddle
        .real_eigenvalues()
        .map(|(ls, lu)| ls.abs().min(lu))
        .unwrap_or(eps)
        .max(1e-6);
    let dht = (mu.mu2 + 5.0 * mu.mu3 / 3.0).abs().max(1e-300);
    let horizon = (200.0 / eps + 20.0 * (1.0 / delta).ln() / rate) * (1.0 + (1.0 + eps * eps / dht).ln());
    IntegratorConfig {
        max_time: config.max_time.min(horizon),
        ..*config
    }
}

/// Splitting of the homoclinic loop of the right saddle (left saddle when
/// `mu1 < 0`) measured on the section through the central equilibrium.
pub fn homoclinic_splitting(mu: MuParams, config: &IntegratorConfig) -> Result<SplittingResult> {
    splitting_with_delta(mu, DEFAULT_DELTA, config)
}

pub(crate) fn splitting_with_delta(mu: MuParams, delta: f64, config: &IntegratorConfig) -> Result<SplittingResult> {
    let d = discriminant(mu);
    if !(d < 0.0) {
        return Err(Error::NoThreeEquilibria(d));
    }
    let flip = mu.mu1 < 0.0;
    let m = if flip { mu.mirrored() } else { mu };
    let eqs = solve_equilibria(m, DEFAULT_TOL_ROOT);
    let (centre, saddle) = (eqs[1], eqs[2]);
    let cfg = splitting_config(m, &saddle, delta, config);
    let u = saddle_manifold_shot(m, &saddle, ManifoldBranch::UnstableMinus, delta, centre.x, &cfg)?;
    let s = saddle_manifold_shot(m, &saddle, ManifoldBranch::StableMinus, delta, centre.x, &cfg)?;
    let sign = if flip { -1.0 } else { 1.0 };
    Ok(SplittingResult {
        mu,
        gap: sign * (u.y - s.y),
        section_x: sign * centre.x,
        y_unstable: sign * u.y,
        y_stable: sign * s.y,
    })
}

/// One root of the splitting function near the analytic homoclinic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub theta: f64,
    pub analytic: (f64, f64),
    pub numeric: (f64, f64),
    pub gap: f64,
}

impl ContinuationPoint {
    /// Euclidean distance between numeric and analytic points in `(mu2, mu1)`.
    pub fn deviation(&self) -> f64 {
        (self.numeric.0 - self.analytic.0).hypot(self.numeric.1 - self.analytic.1)
    }
}

fn analytic_point(mu3: f64, theta: f64) -> (f64, f64) {
    (-mu3 * nu2_of_theta(theta), mu3.powf(1.5) * nu1_of_theta(theta))
}

/// Locates a zero of the splitting along the normal to the analytic
/// curve through its point at `theta`. Searching along the normal rather
/// than at fixed `mu2` keeps the problem well posed at the fold.
pub fn continue_point(mu3: f64, theta: f64, config: &IntegratorConfig) -> Result<ContinuationPoint> {
    if !(mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu3));
    }
    let p = analytic_point(mu3, theta);
    let dt = 1e-5 * theta.max(1e-2);
    let (a, b) = (analytic_point(mu3, theta - dt), analytic_point(mu3, theta + dt));
    let (tx, ty) = (b.0 - a.0, b.1 - a.1);
    let tn = tx.hypot(ty);
    let normal = (-ty / tn, tx / tn);
    let at = |s: f64| MuParams::new(p.1 + s * normal.1, p.0 + s * normal.0, mu3);
    let gap = |s: f64| homoclinic_splitting(at(s), config).map(|r| r.gap);

    let g0 = gap(0.0)?;
    if g0 == 0.0 {
        return Ok(ContinuationPoint { theta, analytic: p, numeric: p, gap: 0.0 });
    }
    // Expand a bracket in both directions along the normal, abandoning a
    // direction as soon as the splitting stops being defined there.
    let base = 1e-4 * p.1.abs().max(1e-4 * mu3);
    let mut bracket = None;
    let mut alive = [true, true];
    let mut prev = [0.0f64, 0.0];
    let mut h = base;
    'outer: for _ in 0..24 {
        for (k, dir) in [1.0, -1.0].into_iter().enumerate() {
            if !alive[k] {
                continue;
            }
            let s = dir * h;
            if (p.1 + s * normal.1) * p.1 <= 0.0 {
                alive[k] = false;
                continue;
            }
            match gap(s) {
                Ok(g) if g * g0 < 0.0 => {
                    bracket = Some((prev[k].min(s), prev[k].max(s)));
                    break 'outer;
                }
                Ok(_) => prev[k] = s,
                Err(_) => alive[k] = false,
            }
        }
        if !alive[0] && !alive[1] {
            break;
        }
        h *= 2.0;
    }
    let (lo, hi) = bracket.ok_or(Error::RootNotBracketed { index: 0 })?;
    let mut failure = None;
    let root = brent(
        |s| match gap(s) {
            Ok(g) => g,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-15,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let s = root?;
    let mu = at(s);
    let g = gap(s)?;
    Ok(ContinuationPoint { theta, analytic: p, numeric: (mu.mu2, mu.mu1), gap: g })
}

/// Numeric and analytic homoclinic curves over the given parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub numeric: Curve,
    pub analytic: Curve,
    pub points: Vec<ContinuationPoint>,
    /// `(index, message)` for samples whose root could not be found.
    pub failures: Vec<(usize, String)>,
}

impl ContinuationResult {
    pub fn max_deviation(&self) -> f64 {
        self.points.iter().map(ContinuationPoint::deviation).fold(0.0, f64::max)
    }

    pub fn max_abs_mu1(&self) -> f64 {
        self.analytic.samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max)
    }
}

/// Runs [`continue_point`] for every `theta` and collects the results;
/// failing samples are reported instead of aborting the run.
pub fn homoclinic_continuation(mu3: f64, thetas: &[f64], config: &IntegratorConfig) -> Result<ContinuationResult> {
    if !(mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu3));
    }
    if thetas.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (i, &t) in thetas.iter().enumerate() {
        match continue_point(mu3, t, config) {
            Ok(p) => points.push(p),
            Err(Error::RootNotBracketed { .. }) => failures.push((i, Error::RootNotBracketed { index: i }.to_string())),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    let curve = |label: &str, pick: fn(&ContinuationPoint) -> (f64, f64)| Curve {
        label: label.into(),
        mu3,
        samples: points.iter().map(pick).collect(),
        param: Some(points.iter().map(|p| p.theta).collect()),
    };
    Ok(ContinuationResult {
        numeric: curve("hom_numeric", |p| p.numeric),
        analytic: curve("hom_analytic", |p| p.analytic),
        points,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_curve(mu3: f64, theta: f64) -> MuParams {
        let (mu2, mu1) = analytic_point(mu3, theta);
        MuParams::new(mu1, mu2, mu3)
    }

    fn tight() -> IntegratorConfig {
        IntegratorConfig::default().with_tolerance(1e-12)
    }

    #[test]
    fn analytic_point_is_nearly_homoclinic() {
        let mu = on_curve(0.1, 1.0);
        let r = homoclinic_splitting(mu, &tight()).unwrap();
        assert!(r.gap.abs() < 5e-3, "{}", r.gap);
        assert!(r.y_unstable > 0.0 && r.y_stable > 0.0);
        let up = homoclinic_splitting(MuParams { mu1: mu.mu1 + 2e-3, ..mu }, &tight()).unwrap();
        let down = homoclinic_splitting(MuParams { mu1: mu.mu1 - 2e-3, ..mu }, &tight()).unwrap();
        assert!(up.gap * down.gap < 0.0);
    }

    #[test]
    fn mirrored_branch() {
        let mu = on_curve(0.1, 1.0);
        let a = homoclinic_splitting(mu, &tight()).unwrap();
        let b = homoclinic_splitting(mu.mirrored(), &tight()).unwrap();
        assert!((a.gap + b.gap).abs() <= 1e-9);
        assert_eq!(a.section_x, -b.section_x);
    }

    #[test]
    fn guards() {
        assert!(matches!(homoclinic_splitting(MuParams::new(0.0, 0.1, 0.1), &tight()), Err(Error::NoThreeEquilibria(_))));
        let mu = on_curve(0.1, 1.0);
        let eqs = solve_equilibria(mu, DEFAULT_TOL_ROOT);
        let r = saddle_manifold_shot(mu, &eqs[2], ManifoldBranch::UnstableMinus, 1e-2, eqs[1].x, &tight());
        assert_eq!(r, Err(Error::InvalidOffset(1e-2)));
        let r = saddle_manifold_shot(mu, &eqs[1], ManifoldBranch::UnstableMinus, 1e-6, eqs[1].x, &tight());
        assert_eq!(r, Err(Error::NotASaddle));
    }

    #[test]
    fn richardson_offset_check() {
        let mu = on_curve(0.1, 1.0);
        let eqs = solve_equilibria(mu, DEFAULT_TOL_ROOT);
        for branch in [ManifoldBranch::UnstableMinus, ManifoldBranch::StableMinus] {
            let delta = 1e-6;
            let a = saddle_manifold_shot(mu, &eqs[2], branch, delta, eqs[1].x, &tight()).unwrap();
            let b = saddle_manifold_shot(mu, &eqs[2], branch, 0.5 * delta, eqs[1].x, &tight()).unwrap();
            assert!((a.y - b.y).abs() <= 10.0 * delta);
        }
    }

    #[test]
    fn single_point_continuation() {
        let p = continue_point(0.1, 1.0, &tight()).unwrap();
        assert!(p.gap.abs() <= 1e-8, "{}", p.gap);
        assert!(p.deviation() <= 0.15 * p.analytic.1.abs());
    }
}
