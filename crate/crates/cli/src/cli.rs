use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "btmem", version, about = "Bifurcation sets of the saddle-case cubic Bogdanov-Takens unfolding and cubic memristor oscillators")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output file (or directory, for multi-table CSV); stdout if omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Absolute tolerance of the ODE integrator.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    pub abs_tol: f64,
    /// Relative tolerance of the ODE integrator (and of quadratures).
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    pub rel_tol: f64,
    /// Tolerance for polishing equilibria.
    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive)]
    pub tol_root: f64,
    /// Relative distance in mu1 under which a point counts as on a curve.
    #[arg(long, global = true, default_value_t = 1e-6, value_parser = positive)]
    pub tol_boundary: f64,
    /// Record the wall-clock time in the metadata.
    #[arg(long, global = true)]
    pub timestamp: bool,
}

pub fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite (got {s})"))
    }
}

pub fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite (got {s})"))
    }
}

fn at_least_two(s: &str) -> Result<u64, String> {
    let v: u64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 2 {
        Ok(v)
    } else {
        Err(format!("minimum is 2 (got {s})"))
    }
}

fn mu3_positive(s: &str) -> Result<f64, String> {
    positive(s).map_err(|_| format!("mu3 must be positive (got {s})"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bifurcation curves and codimension-two points for fixed mu3.
    Bifset(BifsetArgs),
    /// Melnikov functions along the heteroclinic and homoclinic connections.
    #[command(subcommand)]
    Melnikov(MelnikovCmd),
    /// Numerical homoclinic curve by manifold shooting, with the analytic one.
    Shoot(ShootArgs),
    /// Equilibria, saddle separatrices and limit cycle for one parameter point.
    Portrait(PortraitArgs),
    /// Region of the bifurcation diagram containing a parameter point.
    Classify(MuArgs),
    /// Cubic memristor oscillator tools.
    #[command(subcommand)]
    Memristor(MemristorCmd),
    /// Memristor-based Duffing oscillator tools.
    #[command(subcommand)]
    Duffing(DuffingCmd),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BifsetArgs {
    #[arg(long, value_parser = mu3_positive)]
    pub mu3: f64,
    /// Samples per curve.
    #[arg(long, default_value_t = 200, value_parser = at_least_two)]
    pub resolution: u64,
    /// Emit only the codimension-two points.
    #[arg(long)]
    pub points_only: bool,
}

#[derive(Debug, Subcommand)]
pub enum MelnikovCmd {
    /// Along the heteroclinic connection of the quartic Hamiltonian.
    Het(HetArgs),
    /// Along the homoclinic loop of the cubic Hamiltonian.
    Hom(HomArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct HetArgs {
    #[arg(long, default_value_t = 0.0, value_parser = finite)]
    pub nu1: f64,
    #[arg(long, value_parser = finite)]
    pub nu2: f64,
    #[arg(long, default_value_t = 1.0, value_parser = finite)]
    pub nu3: f64,
    /// Also evaluate the defining integral by quadrature.
    #[arg(long)]
    pub oracle: bool,
    /// Half-width of the quadrature time window.
    #[arg(long, value_parser = positive)]
    pub t_span: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct HomArgs {
    /// Point of the analytic homoclinic curve.
    #[arg(long, value_parser = positive, conflicts_with_all = ["nu1", "nu2"])]
    pub theta: Option<f64>,
    #[arg(long, value_parser = finite, requires = "nu2")]
    pub nu1: Option<f64>,
    #[arg(long, value_parser = finite, requires = "nu1")]
    pub nu2: Option<f64>,
    /// Evaluate the area-integral Melnikov function and compare with the loop area.
    #[arg(long)]
    pub check_curve: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ShootArgs {
    #[arg(long, value_parser = mu3_positive)]
    pub mu3: f64,
    #[arg(long, default_value_t = 25, value_parser = at_least_two)]
    pub samples: u64,
    #[arg(long, default_value_t = 0.2, value_parser = positive)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 3.5, value_parser = positive)]
    pub theta_max: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct MuArgs {
    #[arg(long, value_parser = finite)]
    pub mu1: f64,
    #[arg(long, value_parser = finite)]
    pub mu2: f64,
    #[arg(long, value_parser = finite)]
    pub mu3: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub mu: MuArgs,
    /// Integration time of each separatrix and extra orbit.
    #[arg(long, default_value_t = 50.0, value_parser = positive)]
    pub t_end: f64,
    /// Extra starting points `x,y`.
    #[arg(long = "start", value_parser = point2)]
    pub starts: Vec<(f64, f64)>,
}

fn point2(s: &str) -> Result<(f64, f64), String> {
    let v: Vec<&str> = s.split(',').collect();
    if v.len() != 2 {
        return Err(format!("expected x,y (got {s})"));
    }
    Ok((finite(v[0].trim())?, finite(v[1].trim())?))
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct MemristorArgs {
    #[arg(long, value_parser = finite)]
    pub a: f64,
    #[arg(long, value_parser = finite)]
    pub b: f64,
    #[arg(long, value_parser = finite)]
    pub beta: f64,
    #[arg(long, value_parser = finite)]
    pub xi: f64,
    /// Capacitance scale of the raw circuit; removed by rescaling.
    #[arg(long, value_parser = finite)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum MemristorCmd {
    /// Liénard reduction and canonical unfolding parameters on one leaf.
    Reduce(ReduceArgs),
    /// Closed orbits on leaves spanning the sphere of periodic orbits.
    Sphere(SphereArgs),
    /// Direct integration of the three-dimensional system.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub params: MemristorArgs,
    /// First-integral level of the leaf.
    #[arg(long, value_parser = finite)]
    pub h: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SphereArgs {
    #[command(flatten)]
    pub params: MemristorArgs,
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..))]
    pub slices: u64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: MemristorArgs,
    #[arg(long, default_value_t = 0.0, value_parser = finite)]
    pub x: f64,
    #[arg(long, default_value_t = 0.3, value_parser = finite)]
    pub y: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite)]
    pub z: f64,
    #[arg(long, default_value_t = 50.0, value_parser = positive)]
    pub t_end: f64,
}

#[derive(Debug, Subcommand)]
pub enum DuffingCmd {
    /// Invariant drift, divergence and amplitude trend of the oscillator.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct AuditArgs {
    #[arg(long, value_parser = finite)]
    pub alpha: f64,
    #[arg(long, value_parser = finite)]
    pub omega: f64,
    #[arg(long, value_parser = finite)]
    pub betad: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite)]
    pub h: f64,
    #[arg(long, default_value_t = 1000.0, value_parser = positive)]
    pub t_final: f64,
    /// Starting point on the section; one unit right of the equilibrium by default.
    #[arg(long, value_parser = finite)]
    pub x0: Option<f64>,
}
