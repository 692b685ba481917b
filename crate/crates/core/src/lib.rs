//! Bifurcation analysis of the saddle-case Bogdanov–Takens unfolding
//! `x' = y, y' = mu1 + mu2 x + x^3 + y (mu3 - 3 x^2)` and its use on cubic
//! memristor oscillators.

pub mod duffing;
pub mod equilibria;
pub mod error;
pub mod flow;
pub mod melnikov;
pub mod memristor;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod unfolding;

pub use error::{Error, Result};
pub use unfolding::{MuParams, NuParams, PlanarState, Scaling};
