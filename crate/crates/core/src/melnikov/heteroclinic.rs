use std::f64::consts::SQRT_2;

use crate::equilibria::Curve;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Closed-form Melnikov function along the upper heteroclinic connection
/// of the quartic Hamiltonian.
pub fn m_het_closed(nu1: f64, nu2: f64, nu3: f64) -> Result<f64> {
    if !(nu2 > 0.0) {
        return Err(Error::NonPositiveNu2(nu2));
    }
    Ok(2.0 / 15.0 * nu2.sqrt() * (15.0 * nu1 + 5.0 * SQRT_2 * nu2 * nu3 - 3.0 * SQRT_2 * nu2 * nu2))
}

/// Half-width of a time window on which `sech^2` of the connection has
/// decayed below `1e-16`.
pub fn default_t_span(nu2: f64) -> f64 {
    20.0 / (nu2 / 2.0).sqrt()
}

/// Quadrature of `int y (nu1 + (nu3 - 3 x^2) y) dt` along
/// `x = sqrt(nu2) tanh(k t)`, `y = (nu2 / sqrt 2) sech^2(k t)`, `k = sqrt(nu2 / 2)`,
/// over `[-t_span, t_span]`.
pub fn m_het_quadrature(nu1: f64, nu2: f64, nu3: f64, t_span: f64, tol: f64) -> Result<f64> {
    if !(nu2 > 0.0) {
        return Err(Error::NonPositiveNu2(nu2));
    }
    let k = (nu2 / 2.0).sqrt();
    let tail = (k * t_span).cosh().powi(-2);
    if !(tail < 1e-14) {
        return Err(Error::InvalidArgument(format!(
            "t_span {t_span} too short: sech^2 at the window edge is {tail:e}"
        )));
    }
    let a = nu2.sqrt();
    let f = |t: f64| {
        let s = (k * t).cosh().recip();
        let x = a * (k * t).tanh();
        let y = nu2 / SQRT_2 * s * s;
        y * (nu1 + (nu3 - 3.0 * x * x) * y)
    };
    // Split at the origin so each half sees a monotone tail.
    let left = integrate(f, -t_span, 0.0, 0.5 * tol, tol)?;
    let right = integrate(f, 0.0, t_span, 0.5 * tol, tol)?;
    Ok(left.value + right.value)
}

/// `mu1` on the heteroclinic curve with branch sign `sign`.
pub fn het_mu1(mu3: f64, mu2: f64, sign: f64) -> f64 {
    sign * SQRT_2 / 15.0 * mu2 * (3.0 * mu2 + 5.0 * mu3)
}

/// Both heteroclinic branches sampled uniformly over `mu2_range`.
pub fn het_curve(mu3: f64, mu2_range: (f64, f64), n: usize) -> Result<(Curve, Curve)> {
    if !(mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu3));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    let (lo, hi) = (mu2_range.0.min(mu2_range.1), mu2_range.0.max(mu2_range.1));
    let step = (hi - lo) / (n - 1) as f64;
    let mu2s: Vec<f64> = (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect();
    let make = |sign: f64, label: &str| Curve {
        label: label.into(),
        mu3,
        samples: mu2s.iter().map(|&m| (m, het_mu1(mu3, m, sign))).collect(),
        param: None,
    };
    Ok((make(1.0, "het+"), make(-1.0, "het-")))
}
