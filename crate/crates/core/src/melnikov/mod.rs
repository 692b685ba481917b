//! Melnikov functions, their quadrature oracles, and the global
//! bifurcation curves built from their zeros.

mod bifset;
mod heteroclinic;
mod homoclinic;

pub use bifset::{assemble_bifset, classify_region, classify_region_with, hom_branches, BifurcationSet, RegionLabel};
pub use heteroclinic::{het_curve, het_mu1, m_het_closed, m_het_quadrature, default_t_span};
pub use homoclinic::{
    default_theta_grid, h1, hom_curve, hom_loop_area, m_hom_area, m_hom_closed, m_hom_closed_parts, nu1_of_theta,
    nu2_min, nu2_of_theta, theta_of_nu2, HomoclinicParam, ThetaBranch,
};
