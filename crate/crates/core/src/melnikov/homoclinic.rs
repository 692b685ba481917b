use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::equilibria::{cubic_roots, Curve, DEFAULT_TOL_ROOT};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::roots::brent;

/// A point of the parametric homoclinic curve together with the loop
/// geometry of the right saddle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicParam {
    pub theta: f64,
    pub nu2: f64,
    pub nu1: f64,
    pub s_r: f64,
    pub omega: f64,
}

impl HomoclinicParam {
    pub fn from_theta(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("theta must be positive and finite, got {theta}")));
        }
        let nu2 = nu2_of_theta(theta);
        let c2 = theta.cosh().powi(2);
        let s_r = (nu2 * c2 / (2.0 + c2)).sqrt();
        let nu1 = 2.0 * s_r * nu2 / (2.0 + c2);
        let omega = 2.0 * s_r / theta.cosh();
        Ok(Self { theta, nu2, nu1, s_r, omega })
    }
}

// Odd Taylor coefficients, from t^5 upward, of
//   A(t) = 9 sinh t + sinh 3t - 12 t cosh t
//   D(t) = 370 sinh t + 115 sinh 3t + sinh 5t - 60 t (11 cosh t + cosh 3t).
// The coefficients of t and t^3 vanish in both.
fn series_coefficients() -> &'static ([f64; 20], [f64; 20]) {
    static COEFFS: OnceLock<([f64; 20], [f64; 20])> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut a = [0.0; 20];
        let mut d = [0.0; 20];
        let mut fact = 24.0; // 4!
        for i in 0..20 {
            let n = 5 + 2 * i as i32;
            fact *= n as f64 * if i == 0 { 1.0 } else { (n - 1) as f64 };
            let p3 = 3f64.powi(n);
            let p5 = 5f64.powi(n);
            let nf = n as f64;
            a[i] = (9.0 + p3 - 12.0 * nf) / fact;
            d[i] = (370.0 + 115.0 * p3 + p5 - 60.0 * nf * (11.0 + p3 / 3.0)) / fact;
        }
        (a, d)
    })
}

fn ratio_by_series(theta: f64) -> f64 {
    let (a, d) = series_coefficients();
    let t2 = theta * theta;
    let (mut na, mut nd, mut pw) = (0.0, 0.0, 1.0);
    for i in 0..20 {
        na += a[i] * pw;
        nd += d[i] * pw;
        pw *= t2;
    }
    na / nd
}

fn ratio_scaled(theta: f64) -> f64 {
    // Numerator and denominator multiplied by e^{-5 theta}; A(theta) is
    // only scaled by e^{-3 theta} since the cosh 2 theta factor carries the rest.
    let e = |k: f64| (k * theta).exp();
    let sinh_s = |k: f64, s: f64| 0.5 * (e(k - s) - e(-k - s));
    let cosh_s = |k: f64, s: f64| 0.5 * (e(k - s) + e(-k - s));
    let a = 9.0 * sinh_s(1.0, 3.0) + sinh_s(3.0, 3.0) - 12.0 * theta * cosh_s(1.0, 3.0);
    let d = 370.0 * sinh_s(1.0, 5.0) + 115.0 * sinh_s(3.0, 5.0) + sinh_s(5.0, 5.0)
        - 60.0 * theta * (11.0 * cosh_s(1.0, 5.0) + cosh_s(3.0, 5.0));
    let c = cosh_s(2.0, 2.0) + 5.0 * e(-2.0);
    c * a / d
}

/// `nu2` along the parametric homoclinic curve.
pub fn nu2_of_theta(theta: f64) -> f64 {
    if theta < 1.0 {
        10.0 * ((2.0 * theta).cosh() + 5.0) * ratio_by_series(theta) / 3.0
    } else {
        10.0 * ratio_scaled(theta) / 3.0
    }
}

/// `nu1` along the parametric homoclinic curve.
pub fn nu1_of_theta(theta: f64) -> f64 {
    let nu2 = nu2_of_theta(theta);
    let c2 = theta.cosh().powi(2);
    let s = (nu2 * c2 / (2.0 + c2)).sqrt();
    2.0 * s * nu2 / (2.0 + c2)
}

/// Auxiliary function whose positive zero is the minimiser of `nu2`.
pub fn h1(x: f64) -> f64 {
    2.0 * x * (26.0 * (2.0 * x).cosh() + (4.0 * x).cosh() + 33.0) - 5.0 * (10.0 * (2.0 * x).sinh() + (4.0 * x).sinh())
}

/// `(theta*, nu2(theta*))`, the fold of the homoclinic curve, with the zero
/// of [`h1`] located to `xtol` on `[1, 2]`.
pub fn nu2_min(xtol: f64) -> Result<(f64, f64)> {
    let theta = brent(h1, 1.0, 2.0, xtol, 200)?;
    Ok((theta, nu2_of_theta(theta)))
}

pub(crate) fn fold() -> (f64, f64) {
    static FOLD: OnceLock<(f64, f64)> = OnceLock::new();
    *FOLD.get_or_init(|| nu2_min(1e-14).expect("h1 changes sign on [1, 2]"))
}

/// Which side of the fold a homoclinic parameter lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaBranch {
    /// `theta < theta*`, attached to the BT point.
    Near,
    /// `theta > theta*`, attached to the DHT point.
    Far,
}

const THETA_MIN: f64 = 1e-8;
const THETA_MAX: f64 = 40.0;

/// Inverse of [`nu2_of_theta`] on one branch.
pub fn theta_of_nu2(nu2: f64, branch: ThetaBranch) -> Result<f64> {
    let (ts, ns) = fold();
    let (lo, hi) = match branch {
        ThetaBranch::Near => (THETA_MIN, ts),
        ThetaBranch::Far => (ts, THETA_MAX),
    };
    if nu2 == ns {
        return Ok(ts);
    }
    let f = |t: f64| nu2_of_theta(t) - nu2;
    let (flo, fhi) = (f(lo), f(hi));
    if flo * fhi > 0.0 {
        return Err(Error::BracketFailed { lo, hi });
    }
    brent(f, lo, hi, 1e-14, 200)
}

/// Literal `(F1, F2)` of the printed closed form.
pub fn m_hom_closed_parts(theta: f64) -> (f64, f64) {
    let (s, c) = (theta.sinh(), theta.cosh());
    let f1 = 720.0 * theta - 320.0 * s + 240.0 * theta * c.powi(3) - 320.0 * c * c * s - 80.0 * c.powi(4) * s
        + 480.0 * theta * c;
    let f2 = 1440.0 * theta * c - 768.0 * s - c.powi(3) - 1344.0 * c * c * s - 48.0 * c.powi(4) * s;
    (f1, f2)
}

/// Literal evaluation of the printed homoclinic closed form
/// `sqrt 2 cosh^2 / (cosh^2 + 2) (F1 + nu2 F2)`.
pub fn m_hom_closed(theta: f64, nu2: f64) -> f64 {
    let c2 = theta.cosh().powi(2);
    let (f1, f2) = m_hom_closed_parts(theta);
    std::f64::consts::SQRT_2 * c2 / (c2 + 2.0) * (f1 + nu2 * f2)
}

struct Loop {
    s_r: f64,
    omega: f64,
    x_bar: f64,
}

fn right_loop(nu1: f64, nu2: f64) -> Result<Loop> {
    let d = 27.0 * nu1 * nu1 - 4.0 * nu2 * nu2 * nu2;
    if !(nu1 > 0.0 && nu2 > 0.0 && d < 0.0) {
        return Err(Error::NoThreeEquilibria(d));
    }
    let roots = cubic_roots(-nu2, nu1, DEFAULT_TOL_ROOT);
    let s_r = *roots.last().expect("cubic has a real root");
    let w2 = 2.0 * (nu2 - s_r * s_r);
    if !(w2 > 0.0) {
        return Err(Error::NoHomoclinicLoop);
    }
    let omega = w2.sqrt();
    Ok(Loop { s_r, omega, x_bar: omega - s_r })
}

// Integrates weight(x) * y+(x) over [x_bar, s_R] with x = x_bar + u^2,
// which removes the square-root branch point at the turning point x_bar.
fn loop_integral(l: &Loop, weight: impl Fn(f64) -> f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    let Loop { s_r, omega, x_bar } = *l;
    let u_max = (s_r - x_bar).sqrt();
    let g = |u: f64| {
        let x = x_bar + u * u;
        let y = (s_r - x) / std::f64::consts::SQRT_2 * u * (x + s_r + omega).sqrt();
        weight(x) * y * 2.0 * u
    };
    Ok(integrate(g, 0.0, u_max, abs_tol, rel_tol)?.value)
}

/// Area enclosed by the right saddle's homoclinic level set of `H2`.
pub fn hom_loop_area(nu1: f64, nu2: f64, tol: f64) -> Result<f64> {
    let l = right_loop(nu1, nu2)?;
    Ok(2.0 * loop_integral(&l, |_| 1.0, 0.0, tol)?)
}

/// Area-integral Melnikov function `2 int (3 x^2 - 1) y+ dx` over the loop
/// of the right saddle. The absolute tolerance is `tol` times the loop area.
pub fn m_hom_area(nu1: f64, nu2: f64, tol: f64) -> Result<f64> {
    let l = right_loop(nu1, nu2)?;
    let area = 2.0 * loop_integral(&l, |_| 1.0, 0.0, tol)?;
    Ok(2.0 * loop_integral(&l, |x| 3.0 * x * x - 1.0, 0.5 * tol * area, tol)?)
}

/// 60 geometrically spaced parameters from `1e-3` to `30`.
pub fn default_theta_grid() -> Vec<f64> {
    geometric_grid(1e-3, 30.0, 60)
}

pub(crate) fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo * (r * i as f64).exp() }).collect()
}

/// Both homoclinic branches `mu2 = -mu3 nu2(theta)`,
/// `mu1 = +-mu3^{3/2} nu1(theta)`, with `theta` stored as the parameter.
pub fn hom_curve(mu3: f64, theta_grid: &[f64]) -> Result<(Curve, Curve)> {
    if !(mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu3));
    }
    if theta_grid.is_empty()
        || theta_grid[0] <= 0.0
        || theta_grid.windows(2).any(|w| !(w[1] > w[0]))
        || !theta_grid.iter().all(|t| t.is_finite())
    {
        return Err(Error::InvalidArgument("theta grid must be positive and strictly increasing".into()));
    }
    let scale = mu3.powf(1.5);
    let samples: Vec<(f64, f64)> = theta_grid
        .iter()
        .map(|&t| (-mu3 * nu2_of_theta(t), scale * nu1_of_theta(t)))
        .collect();
    let plus = Curve {
        label: "hom+".into(),
        mu3,
        samples,
        param: Some(theta_grid.to_vec()),
    };
    let minus = plus.mirrored("hom-");
    Ok((plus, minus))
}
