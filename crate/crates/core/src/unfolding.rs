//! Parameter spaces and planar vector fields of the saddle-case cubic
//! Bogdanov-Takens unfolding
//!
//! ```text
//! x' = y
//! y' = mu1 + mu2 x + x^3 + y (mu3 - 3 x^2)
//! ```
//!
//! together with the two rescalings that turn it into a perturbed
//! Hamiltonian system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unfolding parameters `(mu1, mu2, mu3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuParams {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

impl MuParams {
    pub const fn new(mu1: f64, mu2: f64, mu3: f64) -> Self {
        Self { mu1, mu2, mu3 }
    }

    pub fn is_finite(&self) -> bool {
        self.mu1.is_finite() && self.mu2.is_finite() && self.mu3.is_finite()
    }

    /// Image under the symmetry `(x, y, mu1) -> (-x, -y, -mu1)`.
    pub fn mirrored(&self) -> Self {
        Self::new(-self.mu1, self.mu2, self.mu3)
    }
}

/// Which blow-up of the unfolding is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scaling {
    /// `mu1 = eps^4 nu1, mu2 = -eps^2 nu2, mu3 = eps^2 nu3`; unperturbed part has Hamiltonian `H1`.
    QuarticA,
    /// `mu1 = eps^3 nu1, mu2 = -eps^2 nu2, mu3 = eps^2 nu3`; unperturbed part has Hamiltonian `H2`.
    CubicB,
}

impl Scaling {
    fn mu1_power(self) -> i32 {
        match self {
            Scaling::QuarticA => 4,
            Scaling::CubicB => 3,
        }
    }
}

/// Rescaled parameters `(nu1, nu2, nu3, eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuParams {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub eps: f64,
    pub scaling: Scaling,
}

/// Maps `mu` to the rescaled parameters with `nu3` normalised to one,
/// i.e. `eps = sqrt(mu3)`.
pub fn to_nu(mu: MuParams, scaling: Scaling) -> Result<NuParams> {
    if !(mu.mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu.mu3));
    }
    let eps = mu.mu3.sqrt();
    let nu1 = match scaling {
        Scaling::QuarticA => mu.mu1 / (mu.mu3 * mu.mu3),
        Scaling::CubicB => mu.mu1 / (mu.mu3 * eps),
    };
    Ok(NuParams {
        nu1,
        nu2: -mu.mu2 / mu.mu3,
        nu3: 1.0,
        eps,
        scaling,
    })
}

/// Inverse of [`to_nu`]; valid for any `nu3`.
pub fn to_mu(nu: NuParams) -> MuParams {
    let eps2 = nu.eps * nu.eps;
    MuParams {
        mu1: nu.eps.powi(nu.scaling.mu1_power()) * nu.nu1,
        mu2: -eps2 * nu.nu2,
        mu3: eps2 * nu.nu3,
    }
}

/// A point of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarState {
    pub x: f64,
    pub y: f64,
}

impl PlanarState {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for PlanarState {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<PlanarState> for [f64; 2] {
    fn from(s: PlanarState) -> Self {
        [s.x, s.y]
    }
}

/// The unfolding's right-hand side.
pub fn unfolding_field(mu: MuParams, s: PlanarState) -> PlanarState {
    let PlanarState { x, y } = s;
    let x2 = x * x;
    PlanarState {
        x: y,
        y: mu.mu1 + mu.mu2 * x + x2 * x + y * (mu.mu3 - 3.0 * x2),
    }
}

/// Divergence `mu3 - 3 x^2` of the unfolding.
pub fn unfolding_divergence(mu: MuParams, x: f64) -> f64 {
    mu.mu3 - 3.0 * x * x
}

/// The rescaled field in the chosen scaling: the Hamiltonian part plus
/// `eps` times the perturbation.
pub fn perturbed_field(nu: NuParams, s: PlanarState) -> PlanarState {
    let PlanarState { x, y } = s;
    let x2 = x * x;
    let damping = nu.nu3 * y - 3.0 * x2 * y;
    let ydot = match nu.scaling {
        Scaling::QuarticA => -nu.nu2 * x + x2 * x + nu.eps * (nu.nu1 + damping),
        Scaling::CubicB => nu.nu1 - nu.nu2 * x + x2 * x + nu.eps * damping,
    };
    PlanarState { x: y, y: ydot }
}

/// The two first integrals of the unperturbed rescaled systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HamiltonianKind {
    /// `y^2/2 + nu2 x^2/2 - x^4/4`
    H1 { nu2: f64 },
    /// `y^2/2 - nu1 x + nu2 x^2/2 - x^4/4`
    H2 { nu1: f64, nu2: f64 },
}

pub fn hamiltonian_value(h: HamiltonianKind, s: PlanarState) -> f64 {
    let PlanarState { x, y } = s;
    let x2 = x * x;
    let base = 0.5 * y * y - 0.25 * x2 * x2;
    match h {
        HamiltonianKind::H1 { nu2 } => base + 0.5 * nu2 * x2,
        HamiltonianKind::H2 { nu1, nu2 } => base - nu1 * x + 0.5 * nu2 * x2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn field_examples() {
        let z = unfolding_field(MuParams::new(0.0, 0.0, 0.0), PlanarState::new(0.0, 0.0));
        assert_eq!(z, PlanarState::new(0.0, 0.0));

        let r = unfolding_field(MuParams::new(0.0, -3.0, 1.0), PlanarState::new(3f64.sqrt(), 0.0));
        assert_eq!(r.x, 0.0);
        assert!(r.y.abs() < 1e-14);

        let v = unfolding_field(MuParams::new(1.0, 2.0, 3.0), PlanarState::new(1.0, 1.0));
        assert_eq!(v, PlanarState::new(1.0, 4.0));
    }

    #[test]
    fn rescaling_examples() {
        let nu = to_nu(MuParams::new(0.001, -0.25, 0.1), Scaling::QuarticA).unwrap();
        assert_relative_eq!(nu.eps, 0.1f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(nu.nu1, 0.1, max_relative = 1e-14);
        assert_relative_eq!(nu.nu2, 2.5, max_relative = 1e-15);
        assert_eq!(nu.nu3, 1.0);

        let mu = to_mu(NuParams {
            nu1: 0.0,
            nu2: 1.0,
            nu3: 1.0,
            eps: 0.2,
            scaling: Scaling::QuarticA,
        });
        assert_relative_eq!(mu.mu2, -0.04, max_relative = 1e-15);
        assert_relative_eq!(mu.mu3, 0.04, max_relative = 1e-15);
        assert_eq!(mu.mu1, 0.0);

        assert_eq!(
            to_nu(MuParams::new(0.3, -1.0, 0.0), Scaling::CubicB),
            Err(Error::NonPositiveMu3(0.0))
        );
        assert!(to_nu(MuParams::new(0.3, -1.0, -0.5), Scaling::QuarticA).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let h1 = HamiltonianKind::H1 { nu2: 0.2 };
        assert_eq!(hamiltonian_value(h1, PlanarState::new(0.0, 0.0)), 0.0);
        let h1 = HamiltonianKind::H1 { nu2: 1.0 };
        assert_eq!(hamiltonian_value(h1, PlanarState::new(1.0, 0.0)), 0.25);
        let h2 = HamiltonianKind::H2 { nu1: 0.3, nu2: 1.0 };
        assert_eq!(hamiltonian_value(h2, PlanarState::new(0.0, 1.0)), 0.5);
    }

    #[test]
    fn perturbed_forms_reproduce_unfolding_after_blow_up() {
        // x = eps x1, y = eps^2 y1, t = t1 / eps
        let mu = MuParams::new(0.0007, -0.13, 0.09);
        for scaling in [Scaling::QuarticA, Scaling::CubicB] {
            let nu = to_nu(mu, scaling).unwrap();
            let e = nu.eps;
            let p = PlanarState::new(0.31, -0.42);
            let f = unfolding_field(mu, PlanarState::new(e * p.x, e * e * p.y));
            let g = perturbed_field(nu, p);
            assert_relative_eq!(f.x, e * e * g.x, max_relative = 1e-13);
            assert_relative_eq!(f.y, e * e * e * g.y, max_relative = 1e-12);
        }
    }

    #[test]
    fn bendixson_sign_for_nonpositive_mu3() {
        for &mu3 in &[0.0, -0.1, -2.0] {
            for i in -200..=200 {
                let x = i as f64 * 0.05;
                assert!(unfolding_divergence(MuParams::new(0.0, 0.0, mu3), x) <= 0.0);
            }
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn nu_round_trip(mu1 in -1.0f64..1.0, mu2 in -3.0f64..3.0, mu3 in 1e-3f64..2.0, quartic: bool) {
                let scaling = if quartic { Scaling::QuarticA } else { Scaling::CubicB };
                let mu = MuParams::new(mu1, mu2, mu3);
                let back = to_mu(to_nu(mu, scaling).unwrap());
                prop_assert!((back.mu1 - mu1).abs() <= 8.0 * f64::EPSILON * mu1.abs());
                prop_assert!((back.mu2 - mu2).abs() <= 8.0 * f64::EPSILON * mu2.abs());
                prop_assert!((back.mu3 - mu3).abs() <= 8.0 * f64::EPSILON * mu3);
            }
        }
    }
}
