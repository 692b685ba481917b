//! Browser bindings. Each export returns a JSON string; the `*_json`
//! functions are the same computations callable natively.

use btmem::equilibria::{solve_equilibria, EquilibriumKind, DEFAULT_TOL_ROOT};
use btmem::flow::{find_limit_cycle, unfolding_vf, IntegratorConfig};
use btmem::melnikov::{assemble_bifset, classify_region};
use btmem::memristor::{sphere_slices, MemristorParams};
use btmem::ode::{solve, Crossing, Event, Reversed};
use btmem::{MuParams, PlanarState};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Polyline {
    label: String,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Diagram {
    mu3: f64,
    curves: Vec<Polyline>,
    points: Vec<(String, f64, f64)>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Bifurcation curves `(mu2, mu1)` and special points for fixed `mu3`.
pub fn bifset_json(mu3: f64, resolution: usize) -> Result<String, String> {
    let set = assemble_bifset(mu3, resolution.clamp(2, 2000)).map_err(|e| e.to_string())?;
    to_json(&Diagram {
        mu3,
        curves: set
            .curves
            .iter()
            .map(|c| Polyline { label: c.label.clone(), points: c.samples.iter().map(|&(a, b)| [a, b]).collect() })
            .collect(),
        points: set.points.iter().map(|p| (format!("{:?}", p.label), p.mu2, p.mu1)).collect(),
    })
}

#[derive(Serialize)]
struct Portrait {
    region: String,
    has_limit_cycle: bool,
    equilibria: Vec<(f64, String)>,
    orbits: Vec<Polyline>,
    cycle: Vec<Polyline>,
}

/// Region label, equilibria, saddle separatrices and limit cycle.
pub fn portrait_json(mu1: f64, mu2: f64, mu3: f64, t_end: f64) -> Result<String, String> {
    let mu = MuParams::new(mu1, mu2, mu3);
    if !mu.is_finite() || !(t_end > 0.0) {
        return Err("parameters must be finite and t_end positive".into());
    }
    let region = classify_region(mu);
    let cfg = IntegratorConfig::default().with_tolerance(1e-9).with_max_step(0.05);
    let field = unfolding_vf(mu);
    let eqs = solve_equilibria(mu, DEFAULT_TOL_ROOT);
    let extent = 3.0 * (1.0 + eqs.iter().map(|e| e.x.abs()).fold(0.0, f64::max));
    let escape = [Event::new(move |s: &[f64; 2]| s[0].abs().max(s[1].abs()) - extent, Crossing::Rising).terminal()];
    let mut orbits = Vec::new();
    for e in eqs.iter().filter(|e| e.kind == EquilibriumKind::Saddle) {
        let (ls, lu) = e.real_eigenvalues().ok_or("saddle without real eigenvalues")?;
        for (lam, stable) in [(lu, false), (ls, true)] {
            let n = (1.0 + lam * lam).sqrt();
            for sign in [1.0, -1.0] {
                let start = [e.x + sign * 1e-6 / n, sign * 1e-6 * lam / n];
                let sol = if stable {
                    solve(&Reversed(&field), start, t_end, &cfg, &escape)
                } else {
                    solve(&field, start, t_end, &cfg, &escape)
                }
                .map_err(|e| e.to_string())?;
                let label = if stable { "stable" } else { "unstable" };
                orbits.push(Polyline { label: label.into(), points: sol.trajectory.states });
            }
        }
    }
    let cycle = find_limit_cycle(mu, PlanarState::new(f64::NEG_INFINITY, 0.0), &IntegratorConfig::default())
        .map(|c| Polyline { label: "limit cycle".into(), points: c.trajectory.states })
        .into_iter()
        .collect();
    to_json(&Portrait {
        region: format!("{region:?}"),
        has_limit_cycle: region.has_limit_cycle(),
        equilibria: eqs.iter().map(|e| (e.x, format!("{:?}", e.kind))).collect(),
        orbits,
        cycle,
    })
}

#[derive(Serialize)]
struct Sphere {
    h_range: (f64, f64),
    a_bound: f64,
    b_bound: f64,
    slices: Vec<SliceOut>,
    skipped: usize,
}

#[derive(Serialize)]
struct SliceOut {
    h: f64,
    amplitude: f64,
    points: Vec<[f64; 3]>,
}

/// Closed orbits on `n` leaves of the memristor oscillator's sphere.
pub fn sphere_json(a: f64, b: f64, beta: f64, xi: f64, n: usize) -> Result<String, String> {
    let p = MemristorParams::new(a, b, beta, xi);
    let s = sphere_slices(&p, n.clamp(1, 40), &IntegratorConfig::default()).map_err(|e| e.to_string())?;
    to_json(&Sphere {
        h_range: s.bounds.h_range,
        a_bound: s.bounds.a_bound,
        b_bound: s.bounds.b_bound,
        skipped: s.skipped.len(),
        slices: s
            .slices
            .into_iter()
            .map(|sl| SliceOut { h: sl.h, amplitude: sl.amplitude, points: sl.orbit.states })
            .collect(),
    })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bifset(mu3: f64, resolution: usize) -> Result<String, JsValue> {
    js(bifset_json(mu3, resolution))
}

#[wasm_bindgen]
pub fn portrait(mu1: f64, mu2: f64, mu3: f64, t_end: f64) -> Result<String, JsValue> {
    js(portrait_json(mu1, mu2, mu3, t_end))
}

#[wasm_bindgen]
pub fn sphere(a: f64, b: f64, beta: f64, xi: f64, slices: usize) -> Result<String, JsValue> {
    js(sphere_json(a, b, beta, xi, slices))
}
