//! Cubic memristor oscillators: the general three-dimensional family with
//! a linear first integral, its Liénard reduction on each leaf, the maps to
//! the canonical unfolding, and the sphere of periodic orbits.

use serde::{Deserialize, Serialize};

use crate::equilibria::{solve_equilibria, EquilibriumKind, DEFAULT_TOL_ROOT};
use crate::error::{Error, Result};
use crate::flow::find_cycle;
use crate::ode::{solve, IntegratorConfig, Trajectory, VectorField};
use crate::unfolding::MuParams;

/// `x' = a11 W(z) x + a12 y, y' = a21 x + a22 y, z' = x` with
/// `W = q'`, `q(z) = c z^3 + a z^2 + b z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralFamily {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl GeneralFamily {
    pub fn q(&self, z: f64) -> f64 {
        ((self.c * z + self.a) * z + self.b) * z
    }

    pub fn w(&self, z: f64) -> f64 {
        (3.0 * self.c * z + 2.0 * self.a) * z + self.b
    }

    pub fn field(&self, s: &[f64; 3]) -> [f64; 3] {
        let [x, y, z] = *s;
        [self.a11 * self.w(z) * x + self.a12 * y, self.a21 * x + self.a22 * y, x]
    }

    /// `-a22 x + a12 y + a11 a22 q(z) - a12 a21 z`, constant along orbits.
    pub fn first_integral(&self, s: &[f64; 3]) -> f64 {
        let [x, y, z] = *s;
        -self.a22 * x + self.a12 * y + self.a11 * self.a22 * self.q(z) - self.a12 * self.a21 * z
    }

    /// Liénard damping `F(X) = -a11 q(X) - a22 X`.
    pub fn lienard_f(&self, x: f64) -> f64 {
        -self.a11 * self.q(x) - self.a22 * x
    }

    /// Liénard restoring term `g(X) = a11 a22 q(X) - a12 a21 X`.
    pub fn lienard_g(&self, x: f64) -> f64 {
        self.a11 * self.a22 * self.q(x) - self.a12 * self.a21 * x
    }
}

impl VectorField<3> for GeneralFamily {
    fn eval(&self, s: &[f64; 3]) -> [f64; 3] {
        self.field(s)
    }
}

/// Circuit constants before removing the capacitance scale `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawCircuitParams {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub xi: f64,
    pub alpha: f64,
}

/// Constants of `x' = -W(z) x + y, y' = -xi x + beta y, z' = x`.
///
/// When produced by [`normalize_alpha`] the rescaled characteristic is
/// `alpha W`, whose leading coefficient is `alpha`; [`MemristorParams::family`]
/// keeps that coefficient so the normalised system is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristorParams {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub xi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl MemristorParams {
    pub fn new(a: f64, b: f64, beta: f64, xi: f64) -> Self {
        Self { a, b, beta, xi, alpha: None }
    }

    /// Leading coefficient of `q`.
    pub fn c(&self) -> f64 {
        self.alpha.unwrap_or(1.0)
    }

    pub fn family(&self) -> GeneralFamily {
        GeneralFamily {
            a11: -1.0,
            a12: 1.0,
            a21: -self.xi,
            a22: self.beta,
            c: self.c(),
            a: self.a,
            b: self.b,
        }
    }
}

/// Removes `alpha` via `y -> alpha y`, `xi -> alpha xi`, `a -> alpha a`,
/// `b -> alpha b`, `W -> alpha W`.
pub fn normalize_alpha(raw: RawCircuitParams) -> Result<MemristorParams> {
    let al = raw.alpha;
    if !(al > 0.0) {
        return Err(Error::NonPositiveAlpha(al));
    }
    let alpha = if al == 1.0 { None } else { Some(al) };
    Ok(MemristorParams { a: al * raw.a, b: al * raw.b, beta: raw.beta, xi: al * raw.xi, alpha })
}

pub fn denormalize_alpha(p: MemristorParams) -> RawCircuitParams {
    let al = p.c();
    RawCircuitParams { a: p.a / al, b: p.b / al, beta: p.beta, xi: p.xi / al, alpha: al }
}

/// Maps a raw circuit state to normalised coordinates.
pub fn normalize_state(alpha: f64, s: [f64; 3]) -> [f64; 3] {
    [s[0], alpha * s[1], s[2]]
}

pub fn denormalize_state(alpha: f64, s: [f64; 3]) -> [f64; 3] {
    [s[0], s[1] / alpha, s[2]]
}

/// First-integral level `h` of a state of the circuit system.
pub fn first_integral(p: &MemristorParams, s: &[f64; 3]) -> f64 {
    p.family().first_integral(s)
}

/// `X' = Y - F(X), Y' = -g(X) + h` on the leaf `S_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LienardSystem {
    pub family: GeneralFamily,
    pub h: f64,
}

impl VectorField<2> for LienardSystem {
    fn eval(&self, s: &[f64; 2]) -> [f64; 2] {
        [s[1] - self.family.lienard_f(s[0]), -self.family.lienard_g(s[0]) + self.h]
    }
}

pub fn lienard_reduce(g: GeneralFamily, h: f64) -> Result<LienardSystem> {
    if g.a12 == 0.0 {
        return Err(Error::ZeroA12);
    }
    Ok(LienardSystem { family: g, h })
}

/// `(X, Y) -> (Y - F(X), [(a22^2 + a12 a21) X + a22 Y + h] / a12, X)`.
pub fn lift_point(g: &GeneralFamily, h: f64, s: [f64; 2]) -> [f64; 3] {
    let [xx, yy] = s;
    [
        yy - g.lienard_f(xx),
        ((g.a22 * g.a22 + g.a12 * g.a21) * xx + g.a22 * yy + h) / g.a12,
        xx,
    ]
}

pub fn lift(g: &GeneralFamily, h: f64, traj: &Trajectory<2>) -> Result<Trajectory<3>> {
    if g.a12 == 0.0 {
        return Err(Error::ZeroA12);
    }
    Ok(Trajectory {
        times: traj.times.clone(),
        states: traj.states.iter().map(|&s| lift_point(g, h, s)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CanonicalBranch {
    /// `a22 != 0`, `a11 a22 < 0`.
    A,
    /// `a22 = 0`.
    B,
}

/// `x' = y, y' = mu1 + mu2 x + cubic x^3 + mu3 y + damping x^2 y`
/// reached from the Liénard plane by `x = (X - shift) / scale`,
/// `y = (Y - F(X)) / (scale k)`, `s = k t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub branch: CanonicalBranch,
    pub mu: MuParams,
    pub cubic: f64,
    pub damping: f64,
    pub time_scale: f64,
    pub scale: f64,
    pub shift: f64,
}

impl CanonicalForm {
    pub fn to_canonical_state(&self, g: &GeneralFamily, s: [f64; 2]) -> [f64; 2] {
        let [xx, yy] = s;
        [(xx - self.shift) / self.scale, (yy - g.lienard_f(xx)) / (self.scale * self.time_scale)]
    }

    pub fn from_canonical_state(&self, g: &GeneralFamily, s: [f64; 2]) -> [f64; 2] {
        let xx = self.scale * s[0] + self.shift;
        [xx, self.scale * self.time_scale * s[1] + g.lienard_f(xx)]
    }

    pub fn field(&self, s: &[f64; 2]) -> [f64; 2] {
        let [x, y] = *s;
        let MuParams { mu1, mu2, mu3 } = self.mu;
        [y, mu1 + mu2 * x + self.cubic * x * x * x + mu3 * y + self.damping * x * x * y]
    }
}

struct Shifted {
    shift: f64,
    l1: f64,
    l2: f64,
    l3: f64,
}

fn shifted(g: &GeneralFamily, h: f64) -> Result<Shifted> {
    if g.a12 == 0.0 {
        return Err(Error::ZeroA12);
    }
    if g.c == 0.0 {
        return Err(Error::InvalidArgument("cubic coefficient c must be non-zero".into()));
    }
    let GeneralFamily { a11, a12, a21, a22, c, a, b } = *g;
    let w0 = b - a * a / (3.0 * c);
    let q0 = 2.0 * a * a * a / (27.0 * c * c) - a * b / (3.0 * c);
    let shift = -a / (3.0 * c);
    Ok(Shifted {
        shift,
        l1: a22 + a11 * w0,
        l2: a12 * a21 - a11 * a22 * w0,
        l3: h - a11 * a22 * q0 + a12 * a21 * shift,
    })
}

/// Canonical form of the Liénard reduction: time scale `-a11 a22` and space
/// scale `sqrt(-a11 a22)` on branch (a), no scaling on branch (b).
pub fn canonical_form(g: &GeneralFamily, h: f64) -> Result<CanonicalForm> {
    let s = shifted(g, h)?;
    if g.a22 == 0.0 {
        return Ok(CanonicalForm {
            branch: CanonicalBranch::B,
            mu: MuParams::new(s.l3, s.l2, s.l1),
            cubic: 0.0,
            damping: 3.0 * g.c * g.a11,
            time_scale: 1.0,
            scale: 1.0,
            shift: s.shift,
        });
    }
    let k = -g.a11 * g.a22;
    if !(k > 0.0) {
        return Err(Error::BranchUnavailable(-k));
    }
    Ok(CanonicalForm {
        branch: CanonicalBranch::A,
        mu: MuParams::new(s.l3 / k.powf(2.5), s.l2 / (k * k), s.l1 / k),
        cubic: g.c,
        damping: 3.0 * g.c * g.a11,
        time_scale: k,
        scale: k.sqrt(),
        shift: s.shift,
    })
}

/// Fully normalised form `x^3 - 3 x^2 y`: time scale `a22`, space scale
/// `sqrt(-a22 / (a11 c))`. Requires `a22 != 0` and `a11 a22 c < 0`.
pub fn normalized_form(g: &GeneralFamily, h: f64) -> Result<CanonicalForm> {
    let s = shifted(g, h)?;
    let k = g.a22;
    let sigma2 = -k / (g.a11 * g.c);
    if k == 0.0 || !(sigma2 > 0.0) {
        return Err(Error::BranchUnavailable(g.a11 * g.a22));
    }
    let sigma = sigma2.sqrt();
    Ok(CanonicalForm {
        branch: CanonicalBranch::A,
        mu: MuParams::new(s.l3 / (k * k * sigma), s.l2 / (k * k), s.l1 / k),
        cubic: 1.0,
        damping: -3.0,
        time_scale: k,
        scale: sigma,
        shift: s.shift,
    })
}

/// Unfolding parameters of the circuit system on the leaf `h`.
pub fn to_canonical(p: &MemristorParams, h: f64) -> Result<MuParams> {
    if !(p.beta > 0.0) {
        return Err(Error::BranchUnavailable(-p.beta));
    }
    Ok(normalized_form(&p.family(), h)?.mu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereBounds {
    pub a_bound: f64,
    pub b_bound: f64,
    /// `(-A/27, B/27)`.
    pub printed_h_range: (f64, f64),
    /// Leaves whose middle equilibrium lies strictly inside the Hopf line,
    /// i.e. `|mu1| < (mu3/3)^{1/2} (-mu2 - mu3/3)`.
    pub h_range: (f64, f64),
    pub mu2: f64,
    pub mu3: f64,
    pub checks: Vec<HypothesisCheck>,
}

/// `A` and `B` bounding the leaves that carry a stable periodic orbit,
/// after checking the sign conditions they rely on.
pub fn sphere_bounds(p: &MemristorParams) -> Result<SphereBounds> {
    let MemristorParams { a, b, beta, xi, .. } = *p;
    let d = 3.0 * b - a * a;
    let checks = vec![
        ("beta > 0", beta > 0.0),
        ("xi > 0", xi > 0.0),
        ("a^2 - 3b < 0", -d < 0.0),
        ("a^2 - 3b + 3 beta > 0", -d + 3.0 * beta > 0.0),
        ("3b - a^2 < 3 xi / beta", beta > 0.0 && d < 3.0 * xi / beta),
        (
            "beta (3b - a^2) - 3 xi < (5/2)(3b - a^2 - 3 beta) beta",
            beta * d - 3.0 * xi < 2.5 * (d - 3.0 * beta) * beta,
        ),
        ("(5/2)(3b - a^2 - 3 beta) beta < 0", 2.5 * (d - 3.0 * beta) * beta < 0.0),
    ];
    let failed: Vec<String> = checks.iter().filter(|c| !c.1).map(|c| c.0.to_string()).collect();
    if !failed.is_empty() {
        return Err(Error::HypothesesViolated(failed));
    }
    let root = (a * a - 3.0 * b + 3.0 * beta).sqrt();
    let lead = (4.0 * a * a * beta + 3.0 * beta * beta - 12.0 * b * beta + 9.0 * xi) * root;
    let odd = 9.0 * a * xi + 2.0 * a * a * a * beta - 9.0 * a * b * beta;
    let form = normalized_form(&p.family(), 0.0)?;
    let mu = form.mu;
    // mu1 is affine in h with slope 1 / (k^2 sigma).
    let slope = form.time_scale * form.time_scale * form.scale;
    let r = (mu.mu3 / 3.0).sqrt();
    let hopf = r * (-mu.mu2 - r * r);
    Ok(SphereBounds {
        a_bound: lead + odd,
        b_bound: lead - odd,
        printed_h_range: (-(lead + odd) / 27.0, (lead - odd) / 27.0),
        h_range: ((-hopf - mu.mu1) * slope, (hopf - mu.mu1) * slope),
        mu2: mu.mu2,
        mu3: mu.mu3,
        checks: checks
            .into_iter()
            .map(|(n, h)| HypothesisCheck { name: n.into(), holds: h })
            .collect(),
    })
}

/// `n` Chebyshev points strictly inside `(lo, hi)`, ascending.
pub fn chebyshev_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    (0..n)
        .rev()
        .map(|i| mid + half * ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

/// A closed orbit on one leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSlice {
    pub h: f64,
    pub orbit: Trajectory<3>,
    pub period: f64,
    /// Extent of the orbit along `z`.
    pub amplitude: f64,
    pub leaf_residual: f64,
    pub closure_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSlices {
    pub params: MemristorParams,
    pub bounds: SphereBounds,
    pub slices: Vec<SphereSlice>,
    /// Leaves where no usable cycle was found, with the reason.
    pub skipped: Vec<(f64, String)>,
}

impl SphereSlices {
    pub fn h_values(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.h).collect()
    }
}

/// Cycles smaller than this are not resolved by the return map.
pub const MIN_CYCLE_RADIUS: f64 = 1e-4;

/// Closed orbit of the circuit system on leaf `h`, found in the Liénard
/// plane and lifted back.
pub fn leaf_cycle(p: &MemristorParams, h: f64, config: &IntegratorConfig) -> Result<SphereSlice> {
    let fam = p.family();
    let lien = lienard_reduce(fam, h)?;
    let form = normalized_form(&fam, h)?;
    let eqs = solve_equilibria(form.mu, DEFAULT_TOL_ROOT);
    let centre = match eqs.len() {
        3 => eqs[1],
        1 => eqs[0],
        _ => return Err(Error::CycleNotFound(h)),
    };
    if !centre.kind.is_antisaddle() {
        return Err(Error::CycleNotFound(h));
    }
    let c = form.from_canonical_state(&fam, [centre.x, 0.0]);
    let reach = if eqs.len() == 3 { form.scale * (eqs[2].x - centre.x) } else { form.scale };
    let escape = 10.0 * (reach + c[0].abs() + c[1].abs() + 1.0);
    let cycle = [0.25, 0.05, 0.01]
        .iter()
        .find_map(|f| find_cycle(&lien, c, f * reach, escape, config))
        .ok_or(Error::CycleNotFound(h))?;
    if cycle.radius < MIN_CYCLE_RADIUS {
        return Err(Error::CycleNotFound(h));
    }
    let orbit = lift(&fam, h, &cycle.trajectory)?;
    let leaf_residual = orbit
        .states
        .iter()
        .map(|s| (fam.first_integral(s) - h).abs())
        .fold(0.0, f64::max);
    let (first, last) = (orbit.states[0], *orbit.states.last().expect("non-empty orbit"));
    let closure_gap = (0..3).map(|i| (first[i] - last[i]).powi(2)).sum::<f64>().sqrt();
    let [.., (zmin, zmax)] = orbit.bounds();
    Ok(SphereSlice { h, orbit, period: cycle.period, amplitude: zmax - zmin, leaf_residual, closure_gap })
}

/// Closed orbits on `n_slices` leaves spread over the sphere's h-interval.
pub fn sphere_slices(p: &MemristorParams, n_slices: usize, config: &IntegratorConfig) -> Result<SphereSlices> {
    if n_slices == 0 {
        return Err(Error::InvalidArgument("need at least one slice".into()));
    }
    let bounds = sphere_bounds(p)?;
    let (lo, hi) = bounds.h_range;
    let mut slices = Vec::new();
    let mut skipped = Vec::new();
    for h in chebyshev_nodes(lo, hi, n_slices) {
        match leaf_cycle(p, h, config) {
            Ok(s) => slices.push(s),
            Err(e) => skipped.push((h, e.to_string())),
        }
    }
    Ok(SphereSlices { params: *p, bounds, slices, skipped })
}

/// Direct integration of the circuit system.
pub fn simulate(p: &MemristorParams, start: [f64; 3], t_end: f64, config: &IntegratorConfig) -> Result<Trajectory<3>> {
    Ok(solve(&p.family(), start, t_end, config, &[])?.trajectory)
}

/// Checks that the leaf lies inside the admissible interval.
pub fn check_leaf(bounds: &SphereBounds, h: f64) -> Result<()> {
    let (lo, hi) = bounds.h_range;
    if h > lo && h < hi {
        Ok(())
    } else {
        Err(Error::LeafOutsideInterval { h, lo, hi })
    }
}

/// Kinds of the Liénard equilibria on leaf `h`, ascending in `X`.
pub fn lienard_equilibria(g: &GeneralFamily, h: f64) -> Result<Vec<(f64, EquilibriumKind)>> {
    let form = normalized_form(g, h)?;
    Ok(solve_equilibria(form.mu, DEFAULT_TOL_ROOT)
        .into_iter()
        .map(|e| (form.scale * e.x + form.shift, e.kind))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sphere_params() -> MemristorParams {
        MemristorParams::new(1.0, 4.8, 5.0, 80.0)
    }

    #[test]
    fn alpha_normalisation() {
        let raw = RawCircuitParams { a: 1.0, b: 2.0, beta: 5.0, xi: 50.0, alpha: 1.0 };
        let p = normalize_alpha(raw).unwrap();
        assert_eq!((p.a, p.b, p.beta, p.xi, p.alpha), (1.0, 2.0, 5.0, 50.0, None));
        let raw2 = RawCircuitParams { alpha: 2.0, ..raw };
        let p2 = normalize_alpha(raw2).unwrap();
        assert_eq!(p2.xi, 100.0);
        assert_eq!(denormalize_alpha(p2), raw2);
        assert_eq!(normalize_alpha(RawCircuitParams { alpha: 0.0, ..raw }), Err(Error::NonPositiveAlpha(0.0)));
    }

    #[test]
    fn alpha_normalisation_is_exact_with_scaled_cubic() {
        let raw = RawCircuitParams { a: 0.7, b: 2.0, beta: 3.0, xi: 20.0, alpha: 1.7 };
        let p = normalize_alpha(raw).unwrap();
        let fam = p.family();
        let s = [0.3, -0.2, 0.4];
        let w = 3.0 * s[2] * s[2] + 2.0 * raw.a * s[2] + raw.b;
        let raw_field = [raw.alpha * (s[1] - w * s[0]), -raw.xi * s[0] + raw.beta * s[1], s[0]];
        let n = fam.field(&normalize_state(raw.alpha, s));
        let expected = normalize_state(raw.alpha, raw_field);
        for i in 0..3 {
            assert_relative_eq!(n[i], expected[i], epsilon = 1e-13);
        }
        assert_eq!(denormalize_state(raw.alpha, normalize_state(raw.alpha, s)), s);
    }

    #[test]
    fn first_integral_examples() {
        let p = MemristorParams::new(1.0, 1.0, 5.0, 100.0);
        assert_eq!(first_integral(&p, &[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(first_integral(&p, &[0.0, 0.3, 0.0]), 0.3);
        let s = [0.2, -0.4, 0.7];
        let (a, b, beta, xi) = (p.a, p.b, p.beta, p.xi);
        let printed = -beta * s[0] + s[1] - beta * s[2].powi(3) - a * beta * s[2].powi(2) + (xi - b * beta) * s[2];
        assert_relative_eq!(first_integral(&p, &s), printed, epsilon = 1e-14);
    }

    #[test]
    fn first_integral_is_conserved() {
        let p = MemristorParams::new(1.0, 1.0, 5.0, 100.0);
        let cfg = IntegratorConfig::default().with_tolerance(1e-12);
        let start = [0.01, 0.3, 0.02];
        let tr = simulate(&p, start, 50.0, &cfg).unwrap();
        let h0 = first_integral(&p, &start);
        let drift = tr.states.iter().map(|s| (first_integral(&p, s) - h0).abs()).fold(0.0, f64::max);
        let size = tr.states.iter().map(|s| s[0].abs().max(s[1].abs())).fold(0.0, f64::max);
        assert!(drift <= 1e-7, "{drift} {size}");
    }

    #[test]
    fn lienard_matches_printed_instance() {
        let p = MemristorParams::new(1.0, 4.8, 5.0, 80.0);
        let l = lienard_reduce(p.family(), 0.7).unwrap();
        for x in [-1.3, 0.2, 2.0] {
            let y = 0.4;
            let v = l.eval(&[x, y]);
            assert_relative_eq!(v[0], y - x.powi(3) - x * x - (p.b - p.beta) * x, epsilon = 1e-12);
            assert_relative_eq!(
                v[1],
                p.beta * x.powi(3) + p.a * p.beta * x * x + (p.b * p.beta - p.xi) * x + 0.7,
                epsilon = 1e-12
            );
        }
        // General a: the X^2 coefficient of X' is -a.
        let q = MemristorParams::new(2.5, 4.8, 5.0, 80.0);
        let l = lienard_reduce(q.family(), 0.0).unwrap();
        let quad = 0.5 * (l.eval(&[1.0, 0.0])[0] + l.eval(&[-1.0, 0.0])[0]);
        assert_relative_eq!(quad, -2.5, epsilon = 1e-12);
        let mut fam = q.family();
        fam.a12 = 0.0;
        assert_eq!(lienard_reduce(fam, 0.0), Err(Error::ZeroA12));
    }

    #[test]
    fn lift_lies_on_leaf_and_solves_the_3d_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = GeneralFamily {
                a11: rng.gen_range(-2.0..2.0),
                a12: rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                a21: rng.gen_range(-3.0..3.0),
                a22: rng.gen_range(-2.0..2.0),
                c: rng.gen_range(0.5..2.0),
                a: rng.gen_range(-1.0..1.0),
                b: rng.gen_range(-1.0..1.0),
            };
            let h = rng.gen_range(-1.0..1.0);
            let l = lienard_reduce(g, h).unwrap();
            let s = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let p = lift_point(&g, h, s);
            assert!((g.first_integral(&p) - h).abs() <= 1e-12);
            // Chain rule: d/dt lift(X, Y) equals the 3D field at the lifted point.
            let v = l.eval(&s);
            let fp = -g.a11 * g.w(s[0]) - g.a22;
            let d = [
                v[1] - fp * v[0],
                ((g.a22 * g.a22 + g.a12 * g.a21) * v[0] + g.a22 * v[1]) / g.a12,
                v[0],
            ];
            let f = g.field(&p);
            for i in 0..3 {
                assert!((d[i] - f[i]).abs() <= 1e-12 * (1.0 + f[i].abs()), "{i}: {} vs {}", d[i], f[i]);
            }
        }
    }

    #[test]
    fn lifted_orbit_matches_direct_integration() {
        let p = MemristorParams::new(1.0, 1.0, 5.0, 100.0);
        let fam = p.family();
        let h = 0.3;
        let cfg = IntegratorConfig::default().with_tolerance(1e-12);
        let start2 = [0.05, fam.lienard_f(0.05) + 0.01];
        let planar = solve(&lienard_reduce(fam, h).unwrap(), start2, 20.0, &cfg, &[]).unwrap().trajectory;
        let lifted = lift(&fam, h, &planar).unwrap();
        let direct = simulate(&p, lift_point(&fam, h, start2), 20.0, &cfg).unwrap();
        let a = lifted.last().unwrap().1;
        let b = direct.last().unwrap().1;
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= 1e-6, "{a:?} vs {b:?}");
        }
        let res = lifted.states.iter().map(|s| (fam.first_integral(s) - h).abs()).fold(0.0, f64::max);
        assert!(res <= 1e-12);
    }

    #[test]
    fn canonical_parameters_of_sphere_instance() {
        let p = sphere_params();
        let mu = to_canonical(&p, 0.0).unwrap();
        assert_relative_eq!(mu.mu3, 1.6 / 15.0, epsilon = 1e-14);
        assert_relative_eq!(mu.mu2, -173.0 / 75.0, epsilon = 1e-13);
        assert_relative_eq!(mu.mu1, 514.0 / (27.0 * 5f64.powf(2.5)), epsilon = 1e-13);
        let (a, b, beta, xi) = (p.a, p.b, p.beta, p.xi);
        for h in [-3.0, 0.5, 4.0] {
            let mu = to_canonical(&p, h).unwrap();
            let printed = (27.0 * h + 9.0 * a * xi + 2.0 * a.powi(3) * beta - 9.0 * a * b * beta) / (27.0 * beta.powf(2.5));
            assert_relative_eq!(mu.mu1, printed, epsilon = 1e-13);
        }
        assert!(matches!(to_canonical(&MemristorParams::new(1.0, 4.8, -5.0, 80.0), 0.0), Err(Error::BranchUnavailable(_))));
    }

    #[test]
    fn branch_b_parameters() {
        let g = GeneralFamily { a11: -0.7, a12: 2.0, a21: -1.5, a22: 0.0, c: 1.3, a: 0.4, b: 0.9 };
        let f = canonical_form(&g, 0.25).unwrap();
        assert_eq!(f.branch, CanonicalBranch::B);
        assert_eq!(f.mu.mu2, g.a12 * g.a21);
        assert_relative_eq!(f.mu.mu1, 0.25 - g.a * g.a12 * g.a21 / (3.0 * g.c), epsilon = 1e-15);
        assert_relative_eq!(f.mu.mu3, g.b * g.a11 - g.a * g.a * g.a11 / (3.0 * g.c), epsilon = 1e-15);
        let bad = GeneralFamily { a11: 1.0, a22: 1.0, ..g };
        assert!(matches!(canonical_form(&bad, 0.0), Err(Error::BranchUnavailable(_))));
    }

    // The canonical field, transported back by the state map, must equal
    // the Liénard field rescaled in time.
    fn check_form(g: &GeneralFamily, h: f64, form: &CanonicalForm, rng: &mut ChaCha8Rng) {
        let l = lienard_reduce(*g, h).unwrap();
        for _ in 0..10 {
            let s = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let v = l.eval(&s);
            let fp = -g.a11 * g.w(s[0]) - g.a22;
            let ydot = v[1] - fp * v[0];
            let (k, sig) = (form.time_scale, form.scale);
            let expected = [v[0] / (sig * k), ydot / (sig * k * k)];
            let got = form.field(&form.to_canonical_state(g, s));
            for i in 0..2 {
                assert!((got[i] - expected[i]).abs() <= 1e-10 * (1.0 + expected[i].abs()), "{got:?} {expected:?}");
            }
            let back = form.from_canonical_state(g, form.to_canonical_state(g, s));
            assert!((back[0] - s[0]).abs() < 1e-12 && (back[1] - s[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_maps_conjugate_the_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let a11 = -rng.gen_range(0.3..2.0);
            let g = GeneralFamily {
                a11,
                a12: rng.gen_range(0.5..2.0),
                a21: rng.gen_range(-3.0..3.0),
                a22: rng.gen_range(0.3..2.0),
                c: rng.gen_range(0.5..2.0),
                a: rng.gen_range(-1.0..1.0),
                b: rng.gen_range(-1.0..1.0),
            };
            let h = rng.gen_range(-1.0..1.0);
            check_form(&g, h, &canonical_form(&g, h).unwrap(), &mut rng);
            check_form(&g, h, &normalized_form(&g, h).unwrap(), &mut rng);
            let b = GeneralFamily { a22: 0.0, ..g };
            check_form(&b, h, &canonical_form(&b, h).unwrap(), &mut rng);
        }
    }

    #[test]
    fn equilibria_correspond() {
        let p = sphere_params();
        let fam = p.family();
        for h in [-40.0, -5.0, 0.0, 3.0, 5.5, 40.0] {
            let mu = to_canonical(&p, h).unwrap();
            let canon = solve_equilibria(mu, DEFAULT_TOL_ROOT);
            let lien = lienard_equilibria(&fam, h).unwrap();
            assert_eq!(canon.len(), lien.len());
            for ((x, kind), e) in lien.iter().zip(&canon) {
                assert_eq!(*kind, e.kind);
                assert!((fam.lienard_g(*x) - h).abs() <= 1e-9 * (1.0 + h.abs()));
                // Classification from the Liénard Jacobian directly.
                let tr = fam.a11 * fam.w(*x) + fam.a22;
                let det = 80.0 - 5.0 * fam.w(*x) + 0.0 * tr;
                let saddle = det < 0.0;
                assert_eq!(saddle, e.kind == EquilibriumKind::Saddle);
            }
        }
    }

    #[test]
    fn sphere_bound_values() {
        let b = sphere_bounds(&sphere_params()).unwrap();
        assert!((b.a_bound - 1180.6).abs() <= 1.0, "{}", b.a_bound);
        assert!((b.b_bound - 152.6).abs() <= 1.0, "{}", b.b_bound);
        let p = sphere_params();
        for h in [b.printed_h_range.0, b.printed_h_range.1] {
            let mu = to_canonical(&p, h).unwrap();
            let r = (mu.mu3 / 3.0).sqrt();
            assert_relative_eq!(mu.mu1.abs(), r * (r * r - mu.mu2), max_relative = 1e-10);
        }
        // The usable interval ends where the middle equilibrium has zero trace.
        for h in [b.h_range.0, b.h_range.1] {
            let mu = to_canonical(&p, h).unwrap();
            let e = solve_equilibria(mu, DEFAULT_TOL_ROOT);
            assert!(e[1].trace.abs() < 1e-9, "{}", e[1].trace);
        }
        assert!(b.printed_h_range.0 < b.h_range.0 && b.h_range.1 < b.printed_h_range.1);
        let sym = sphere_bounds(&MemristorParams::new(0.0, 1.0, 1.2, 2.0)).unwrap();
        assert_eq!(sym.a_bound, sym.b_bound);
        let bad = sphere_bounds(&MemristorParams::new(3.0, 1.0, 5.0, 80.0));
        assert!(matches!(bad, Err(Error::HypothesesViolated(v)) if v.iter().any(|s| s == "a^2 - 3b < 0")));
        assert!(check_leaf(&b, b.h_range.1 * 1.1).is_err());
        assert!(check_leaf(&b, 0.0).is_ok());
    }

    #[test]
    fn cycle_at_midpoint_leaf() {
        let p = sphere_params();
        let b = sphere_bounds(&p).unwrap();
        let h = 0.5 * (b.h_range.0 + b.h_range.1);
        let s = leaf_cycle(&p, h, &IntegratorConfig::default()).unwrap();
        assert!(s.leaf_residual <= 1e-7 && s.closure_gap <= 1e-7);
        assert!(s.amplitude > 0.0);
    }
}
