//! Equilibria of the unfolding and the local bifurcation objects in the
//! `(mu2, mu1)` plane at fixed `mu3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::melnikov::het_mu1;
use crate::roots::newton_polish;
use crate::unfolding::MuParams;

/// Default residual tolerance for polished cubic roots.
pub const DEFAULT_TOL_ROOT: f64 = 1e-12;
/// Residual tolerance for codimension-two intersections.
pub const TOL_INTERSECT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Saddle,
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    NonHyperbolic,
}

impl EquilibriumKind {
    pub fn is_antisaddle(self) -> bool {
        !matches!(self, EquilibriumKind::Saddle | EquilibriumKind::NonHyperbolic)
    }
}

/// An equilibrium `(x, 0)` with its Jacobian trace and determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x: f64,
    pub kind: EquilibriumKind,
    pub trace: f64,
    pub det: f64,
}

impl Equilibrium {
    pub fn at(mu: MuParams, x: f64) -> Self {
        let trace = mu.mu3 - 3.0 * x * x;
        let det = -(mu.mu2 + 3.0 * x * x);
        Self {
            x,
            kind: classify(trace, det, mu),
            trace,
            det,
        }
    }

    /// Real eigenvalues `(lambda_minus, lambda_plus)` when the
    /// discriminant of the characteristic polynomial is non-negative.
    pub fn real_eigenvalues(&self) -> Option<(f64, f64)> {
        let disc = self.trace * self.trace - 4.0 * self.det;
        if disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        // Stable evaluation of both roots of l^2 - tr l + det.
        let big = 0.5 * (self.trace + r.copysign(self.trace));
        if big == 0.0 {
            return Some((-0.5 * r, 0.5 * r));
        }
        let small = self.det / big;
        Some(if big > small { (small, big) } else { (big, small) })
    }
}

fn classify(trace: f64, det: f64, mu: MuParams) -> EquilibriumKind {
    let tol_det = 1e-10 * (1.0 + mu.mu2.abs());
    let tol_tr = 1e-10 * (1.0 + mu.mu3.abs());
    if det.abs() <= tol_det {
        return EquilibriumKind::NonHyperbolic;
    }
    if det < 0.0 {
        return EquilibriumKind::Saddle;
    }
    if trace.abs() <= tol_tr {
        return EquilibriumKind::NonHyperbolic;
    }
    let node = trace * trace - 4.0 * det >= 0.0;
    match (node, trace < 0.0) {
        (true, true) => EquilibriumKind::StableNode,
        (true, false) => EquilibriumKind::UnstableNode,
        (false, true) => EquilibriumKind::StableFocus,
        (false, false) => EquilibriumKind::UnstableFocus,
    }
}

/// `27 mu1^2 + 4 mu2^3`; negative iff the cubic has three simple real roots.
pub fn discriminant(mu: MuParams) -> f64 {
    27.0 * mu.mu1 * mu.mu1 + 4.0 * mu.mu2 * mu.mu2 * mu.mu2
}

fn discriminant_is_zero(mu: MuParams) -> bool {
    let scale = 27.0 * mu.mu1 * mu.mu1 + 4.0 * mu.mu2.abs().powi(3);
    discriminant(mu).abs() <= 1e-12 * scale
}

/// Distinct real roots of `x^3 + p x + q`, ascending.
pub fn cubic_roots(p: f64, q: f64, tol_root: f64) -> Vec<f64> {
    let mu = MuParams::new(q, p, 0.0);
    let polish = |x0: f64| {
        let f = |x: f64| (x * x * x + p * x + q, 3.0 * x * x + p);
        let mut x = newton_polish(f, x0, 1);
        let mut extra = 0;
        while (x * x * x + p * x + q).abs() > tol_root && extra < 4 {
            x = newton_polish(f, x, 1);
            extra += 1;
        }
        x
    };
    if p == 0.0 && q == 0.0 {
        return vec![0.0];
    }
    if discriminant_is_zero(mu) {
        // Double root -3q/(2p) and simple root 3q/p.
        let double = -1.5 * q / p;
        let simple = polish(3.0 * q / p);
        let mut r = vec![double, simple];
        r.sort_by(f64::total_cmp);
        return r;
    }
    let d = discriminant(mu);
    if d < 0.0 {
        let m = (-p / 3.0).sqrt();
        let arg = (1.5 * q / p * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        let mut r: Vec<f64> = (0..3).map(|k| polish(2.0 * m * (phi - tau * k as f64).cos())).collect();
        r.sort_by(f64::total_cmp);
        r
    } else {
        let s = (0.25 * q * q + p * p * p / 27.0).sqrt();
        let w = if q >= 0.0 { -0.5 * q - s } else { -0.5 * q + s };
        let u = w.cbrt();
        let x = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        vec![polish(x)]
    }
}

/// All equilibria, sorted by `x`.
pub fn solve_equilibria(mu: MuParams, tol_root: f64) -> Vec<Equilibrium> {
    cubic_roots(mu.mu2, mu.mu1, tol_root)
        .into_iter()
        .map(|x| Equilibrium::at(mu, x))
        .collect()
}

/// The middle root in the three-equilibria regime.
pub fn central_equilibrium(mu: MuParams) -> Option<Equilibrium> {
    let eqs = solve_equilibria(mu, DEFAULT_TOL_ROOT);
    (eqs.len() == 3).then(|| eqs[1])
}

/// A labelled sampled curve in the `(mu2, mu1)` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub mu3: f64,
    /// `(mu2, mu1)` pairs in parameter order.
    pub samples: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<Vec<f64>>,
}

impl Curve {
    pub fn mirrored(&self, label: impl Into<String>) -> Curve {
        Curve {
            label: label.into(),
            mu3: self.mu3,
            samples: self.samples.iter().map(|&(a, b)| (a, -b)).collect(),
            param: self.param.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodimTwoLabel {
    BTplus,
    BTminus,
    Cusp,
    DHT,
    Schecter1p,
    Schecter1m,
    Schecter2p,
    Schecter2m,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodimTwoPoint {
    pub label: CodimTwoLabel,
    pub mu2: f64,
    pub mu1: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i == n - 1 { hi } else { lo + step * i as f64 })
}

fn check_count(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")))
    } else {
        Ok(())
    }
}

/// Both branches of `27 mu1^2 + 4 mu2^3 = 0`, traversed from the upper
/// branch through the cusp to the lower one. `param` holds the location
/// of the colliding double root, which decreases along the traversal.
pub fn saddle_node_curve(mu3: f64, mu2_range: (f64, f64), n: usize) -> Result<Curve> {
    check_count(n)?;
    let (lo, hi) = (mu2_range.0.min(mu2_range.1), mu2_range.0.max(mu2_range.1));
    if hi > 0.0 {
        return Err(Error::PositiveMu2InRange(hi));
    }
    let branch = |mu2: f64| (-4.0 * mu2 * mu2 * mu2 / 27.0).max(0.0).sqrt();
    let mut samples = Vec::with_capacity(2 * n);
    let mut param = Vec::with_capacity(2 * n);
    for mu2 in linspace(lo, hi, n) {
        samples.push((mu2, branch(mu2)));
        param.push((-mu2 / 3.0).sqrt());
    }
    for (i, mu2) in linspace(hi, lo, n).enumerate() {
        if i == 0 && hi == 0.0 {
            continue;
        }
        samples.push((mu2, -branch(mu2)));
        param.push(-(-mu2 / 3.0).sqrt());
    }
    Ok(Curve {
        label: "saddle_node".into(),
        mu3,
        samples,
        param: Some(param),
    })
}

/// `mu1` on the Hopf line of sign `s`: the central equilibrium sits at
/// `s sqrt(mu3/3)` with zero trace.
pub fn hopf_mu1(mu3: f64, mu2: f64, sign: f64) -> f64 {
    let r = (mu3 / 3.0).sqrt();
    -sign * (r * r * r + r * mu2)
}

/// The two Hopf half-lines over `mu2_range`, which must lie left of `-mu3`.
pub fn hopf_line(mu3: f64, mu2_range: (f64, f64), n: usize) -> Result<(Curve, Curve)> {
    check_count(n)?;
    if !(mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu3));
    }
    let (lo, hi) = (mu2_range.0.min(mu2_range.1), mu2_range.0.max(mu2_range.1));
    if hi >= -mu3 {
        return Err(Error::RangeOutsideValidity { lo, hi, bound: -mu3 });
    }
    let make = |sign: f64, label: &str| Curve {
        label: label.into(),
        mu3,
        samples: linspace(lo, hi, n).map(|mu2| (mu2, hopf_mu1(mu3, mu2, sign))).collect(),
        param: None,
    };
    Ok((make(1.0, "hopf+"), make(-1.0, "hopf-")))
}

/// Negative roots of `27 mu2^2 + (90 mu3 + 50) mu2 + 75 mu3^2 = 0`,
/// ordered by increasing `|mu2|`.
pub fn schecter_mu2_roots(mu3: f64) -> Result<(f64, f64)> {
    let (a, b, c) = (27.0, 90.0 * mu3 + 50.0, 75.0 * mu3 * mu3);
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::NoIntersection(mu3));
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    let (r1, r2) = (q / a, c / q);
    let (near, far) = if r1.abs() < r2.abs() { (r1, r2) } else { (r2, r1) };
    if !(near < 0.0 && far < 0.0) {
        return Err(Error::NoIntersection(mu3));
    }
    Ok((near, far))
}

/// Newton refinement of a saddle-node / heteroclinic intersection on the
/// heteroclinic branch with sign `sign`.
fn refine_intersection(mu3: f64, mu2: f64, mu1: f64, sign: f64) -> Result<(f64, f64)> {
    let k = sign * std::f64::consts::SQRT_2 / 15.0;
    let (mut a, mut b) = (mu2, mu1);
    for _ in 0..50 {
        let f1 = 27.0 * b * b + 4.0 * a * a * a;
        let f2 = b - k * a * (3.0 * a + 5.0 * mu3);
        if f1.abs() <= 1e-3 * TOL_INTERSECT * TOL_INTERSECT && f2.abs() <= 1e-3 * TOL_INTERSECT * 1e-3 {
            break;
        }
        let (j11, j12) = (12.0 * a * a, 54.0 * b);
        let (j21, j22) = (-k * (6.0 * a + 5.0 * mu3), 1.0);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 {
            return Err(Error::IntersectionNotConverged);
        }
        let da = (f1 * j22 - j12 * f2) / det;
        let db = (j11 * f2 - j21 * f1) / det;
        a -= da;
        b -= db;
        if da.abs() <= 1e-17 * a.abs() && db.abs() <= 1e-17 * b.abs().max(1e-300) {
            break;
        }
    }
    let r1 = 27.0 * b * b + 4.0 * a * a * a;
    let r2 = b - het_mu1(mu3, a, sign);
    if r1.abs() > TOL_INTERSECT || r2.abs() > TOL_INTERSECT {
        return Err(Error::IntersectionNotConverged);
    }
    Ok((a, b))
}

/// The Schecter points as the closed form is printed in the source
/// literature, kept only for comparison with [`special_points`].
pub fn schecter_points_as_printed(mu3: f64) -> [(f64, f64); 4] {
    let r = (18.0 * mu3 + 5.0).sqrt();
    let s5 = 5f64.sqrt();
    let rho1 = 9.0 * mu3 + 5.0 - s5 * r;
    let rho2 = s5 * r - 9.0 * mu3 - 5.0;
    let k = 5.0 * 10f64.sqrt() / 729.0;
    [
        (rho1 * 5.0 / 27.0, -rho1 * k * (r + s5)),
        (rho1 * 5.0 / 27.0, rho1 * k * (r + s5)),
        (rho2 * 5.0 / 27.0, rho2 * k * (r - s5)),
        (rho2 * 5.0 / 27.0, -rho2 * k * (r - s5)),
    ]
}

/// BT points, cusp, double heteroclinic point and the four Schecter points.
pub fn special_points(mu3: f64) -> Result<Vec<CodimTwoPoint>> {
    if !(mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu3));
    }
    let bt = 2.0 * (mu3 / 3.0).powf(1.5);
    let mut pts = vec![
        CodimTwoPoint { label: CodimTwoLabel::Cusp, mu2: 0.0, mu1: 0.0 },
        CodimTwoPoint { label: CodimTwoLabel::BTplus, mu2: -mu3, mu1: bt },
        CodimTwoPoint { label: CodimTwoLabel::BTminus, mu2: -mu3, mu1: -bt },
        CodimTwoPoint { label: CodimTwoLabel::DHT, mu2: -5.0 * mu3 / 3.0, mu1: 0.0 },
    ];
    let (near, far) = schecter_mu2_roots(mu3)?;
    for (root, (lp, lm)) in [
        (near, (CodimTwoLabel::Schecter1p, CodimTwoLabel::Schecter1m)),
        (far, (CodimTwoLabel::Schecter2p, CodimTwoLabel::Schecter2m)),
    ] {
        for sign in [1.0, -1.0] {
            let (mu2, mu1) = refine_intersection(mu3, root, het_mu1(mu3, root, sign), sign)?;
            let label = if mu1 > 0.0 { lp } else { lm };
            pts.push(CodimTwoPoint { label, mu2, mu1 });
        }
    }
    Ok(pts)
}
