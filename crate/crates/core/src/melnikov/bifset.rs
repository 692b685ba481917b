use serde::{Deserialize, Serialize};

use super::heteroclinic::{het_curve, het_mu1};
use super::homoclinic::{fold, geometric_grid, hom_curve, nu1_of_theta, theta_of_nu2, ThetaBranch};
use crate::equilibria::{discriminant, hopf_line, hopf_mu1, saddle_node_curve, special_points, CodimTwoLabel, CodimTwoPoint, Curve};
use crate::error::{Error, Result};
use crate::unfolding::MuParams;

/// Region of the `(mu2, mu1)` plane. `R1`..`R4` carry a limit cycle
/// around the central equilibrium, `R5` has three equilibria and no
/// cycle, `R6` has a single equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    Boundary,
}

impl RegionLabel {
    pub fn has_limit_cycle(self) -> bool {
        matches!(self, RegionLabel::R1 | RegionLabel::R2 | RegionLabel::R3 | RegionLabel::R4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationSet {
    pub mu3: f64,
    pub curves: Vec<Curve>,
    pub points: Vec<CodimTwoPoint>,
}

impl BifurcationSet {
    pub fn curve(&self, label: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.label == label)
    }

    pub fn point(&self, label: CodimTwoLabel) -> Option<&CodimTwoPoint> {
        self.points.iter().find(|p| p.label == label)
    }
}

/// Positive `mu1` values of the homoclinic curve above `mu2`: the branch
/// attached to the BT point and the one attached to the DHT point.
pub fn hom_branches(mu3: f64, mu2: f64) -> (Option<f64>, Option<f64>) {
    let nu2 = -mu2 / mu3;
    let (_, nu2_star) = fold();
    let scale = mu3.powf(1.5);
    let at = |b| theta_of_nu2(nu2, b).ok().map(|t| scale * nu1_of_theta(t));
    let near = if nu2 > 1.0 && nu2 <= nu2_star { at(ThetaBranch::Near) } else { None };
    let far = if nu2 > 5.0 / 3.0 && nu2 <= nu2_star { at(ThetaBranch::Far) } else { None };
    (near, far)
}

/// Region label with the default boundary tolerance `1e-6 (1 + |mu1| + |mu2|)`.
pub fn classify_region(mu: MuParams) -> RegionLabel {
    classify_region_with(mu, 1e-6)
}

/// Region label; points within `tol_scale (1 + |mu1| + |mu2|)` in `mu1`
/// of any bifurcation curve are reported as [`RegionLabel::Boundary`].
pub fn classify_region_with(mu: MuParams, tol_scale: f64) -> RegionLabel {
    let m = if mu.mu1 < 0.0 { mu.mirrored() } else { mu };
    let (mu1, mu2, mu3) = (m.mu1, m.mu2, m.mu3);
    let tol = tol_scale * (1.0 + mu1.abs() + mu2.abs());
    let near = |v: f64| (mu1 - v).abs() <= tol;

    if mu2 <= 0.0 && near(2.0 * (-mu2 / 3.0).powf(1.5)) {
        return RegionLabel::Boundary;
    }
    let d = discriminant(m);
    if mu3 <= 0.0 {
        // No cycles by Bendixson; only the equilibrium count matters.
        return if d > 0.0 { RegionLabel::R6 } else { RegionLabel::R5 };
    }
    let hopf = (mu2 < -mu3).then(|| hopf_mu1(mu3, mu2, 1.0));
    let het = het_mu1(mu3, mu2, 1.0).abs();
    let (hom_near, hom_far) = hom_branches(mu3, mu2);
    let on_curve = hopf.is_some_and(near)
        || near(het)
        || hom_near.is_some_and(near)
        || hom_far.is_some_and(near);
    if on_curve {
        return RegionLabel::Boundary;
    }
    if d > 0.0 {
        return RegionLabel::R6;
    }
    let Some(hopf) = hopf else {
        return RegionLabel::R5;
    };
    if mu1 > hopf {
        // Stable centre.
        return RegionLabel::R5;
    }
    let in_band = mu2 < -5.0 * mu3 / 3.0 && mu1 < het;
    let (_, nu2_star) = fold();
    if -mu2 / mu3 >= nu2_star {
        return if in_band { RegionLabel::R1 } else { RegionLabel::R2 };
    }
    if hom_near.is_some_and(|h| mu1 > h) {
        return RegionLabel::R3;
    }
    match hom_far {
        Some(h) if mu1 < h => {
            if in_band {
                RegionLabel::R1
            } else {
                RegionLabel::R4
            }
        }
        _ => RegionLabel::R5,
    }
}

/// All local and global curves and codimension-two points at `mu3`,
/// each curve sampled with `resolution` points per branch.
pub fn assemble_bifset(mu3: f64, resolution: usize) -> Result<BifurcationSet> {
    if !(mu3 > 0.0) {
        return Err(Error::NonPositiveMu3(mu3));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 2, got {resolution}")));
    }
    let points = special_points(mu3)?;
    let far_schecter = points
        .iter()
        .filter(|p| p.label == CodimTwoLabel::Schecter2p)
        .map(|p| p.mu2)
        .fold(-3.0 * mu3, f64::min);
    let lo = 1.2 * far_schecter;
    let sn = saddle_node_curve(mu3, (lo, 0.0), resolution)?;
    let (hopf_p, hopf_m) = hopf_line(mu3, (lo, -mu3 * (1.0 + 1e-12)), resolution)?;
    let (het_p, het_m) = het_curve(mu3, (lo, 0.0), resolution)?;
    // Include the fold so the sampled curve reaches its leftmost mu2.
    let mut thetas = geometric_grid(1e-3, 30.0, resolution);
    let (theta_star, _) = fold();
    let at = thetas.partition_point(|&t| t < theta_star);
    thetas.insert(at, theta_star);
    let (hom_p, hom_m) = hom_curve(mu3, &thetas)?;
    Ok(BifurcationSet {
        mu3,
        curves: vec![sn, hopf_p, hopf_m, het_p, het_m, hom_p, hom_m],
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        let mu3 = 0.1;
        assert!(classify_region(MuParams::new(0.0, -10.0 * mu3, mu3)).has_limit_cycle());
        assert_eq!(classify_region(MuParams::new(0.0, -0.3, mu3)), RegionLabel::R1);
        assert_eq!(classify_region(MuParams::new(0.0, 0.0, mu3)), RegionLabel::Boundary);
        assert_eq!(classify_region(MuParams::new(0.01, 0.0, mu3)), RegionLabel::R6);
        let on_het = MuParams::new(het_mu1(mu3, -0.2, 1.0), -0.2, mu3);
        assert_eq!(classify_region(on_het), RegionLabel::Boundary);
        assert_eq!(classify_region(MuParams::new(0.0, -0.05, mu3)), RegionLabel::R5);
        assert_eq!(classify_region(MuParams::new(0.5, -0.3, -0.1)), RegionLabel::R6);
        assert_eq!(classify_region(MuParams::new(0.0, -0.3, -0.1)), RegionLabel::R5);
    }

    #[test]
    fn wedge_regions() {
        let mu3 = 0.1;
        // Between the homoclinic curve and the Hopf line near the BT point.
        let mu2 = -0.157_25;
        let (hi, _) = hom_branches(mu3, mu2);
        let hopf = hopf_mu1(mu3, mu2, 1.0);
        let mid = 0.5 * (hi.unwrap() + hopf);
        assert_eq!(classify_region(MuParams::new(mid, mu2, mu3)), RegionLabel::R3);
        assert_eq!(classify_region(MuParams::new(-mid, mu2, mu3)), RegionLabel::R3);
        assert_eq!(classify_region(MuParams::new(0.5 * hi.unwrap(), mu2, mu3)), RegionLabel::R5);
        // Between the fold and the DHT point: cycle below the lower branch.
        let mu2 = -0.2;
        let (hi, lo) = hom_branches(mu3, mu2);
        let (hi, lo) = (hi.unwrap(), lo.unwrap());
        let het = het_mu1(mu3, mu2, 1.0);
        assert!(lo < hi && het < lo);
        assert_eq!(classify_region(MuParams::new(0.5 * (lo + hi), mu2, mu3)), RegionLabel::R5);
        assert_eq!(classify_region(MuParams::new(0.5 * (lo + het), mu2, mu3)), RegionLabel::R4);
        assert_eq!(classify_region(MuParams::new(0.5 * het, mu2, mu3)), RegionLabel::R1);
        // Left of the fold, outside the heteroclinic band.
        let mu2 = -0.3;
        let het = het_mu1(mu3, mu2, 1.0);
        let hopf = hopf_mu1(mu3, mu2, 1.0);
        assert_eq!(classify_region(MuParams::new(0.5 * (het + hopf), mu2, mu3)), RegionLabel::R2);
        assert_eq!(classify_region(MuParams::new(hopf * 1.01, mu2, mu3)), RegionLabel::R5);
    }

    #[test]
    fn assemble_counts_and_symmetry() {
        let set = assemble_bifset(0.1, 50).unwrap();
        let labels: Vec<&str> = set.curves.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["saddle_node", "hopf+", "hopf-", "het+", "het-", "hom+", "hom-"]);
        assert!(set.points.len() >= 7);
        assert!(set.curves.iter().all(|c| c.mu3 == 0.1));
        for p in &set.points {
            assert!(set.points.iter().any(|q| q.mu2 == p.mu2 && q.mu1 == -p.mu1));
        }
        for (a, b) in [("hopf+", "hopf-"), ("het+", "het-"), ("hom+", "hom-")] {
            assert_eq!(set.curve(a).unwrap().mirrored(b), *set.curve(b).unwrap());
        }
        let hom = set.curve("hom+").unwrap();
        let (lo, hi) = hom
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s.0), h.max(s.0)));
        assert!(lo >= -0.245_49 && lo < -0.2454);
        assert!(hi <= -0.1 && hi > -0.1001);
        assert!(assemble_bifset(0.0, 10).is_err());
    }
}
