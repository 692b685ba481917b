use anyhow::{bail, Result};
use btmem::duffing::{duffing_audit, duffing_audit_from, DuffingParams};
use btmem::equilibria::{solve_equilibria, Curve, EquilibriumKind};
use btmem::flow::{find_limit_cycle, homoclinic_continuation, IntegratorConfig, Trajectory};
use btmem::melnikov::{
    assemble_bifset, classify_region_with, default_t_span, hom_loop_area, m_het_closed, m_het_quadrature, m_hom_area,
    m_hom_closed, nu1_of_theta, nu2_of_theta,
};
use btmem::memristor::{
    canonical_form, first_integral, lienard_equilibria, normalize_alpha, simulate, sphere_bounds, sphere_slices,
    to_canonical, MemristorParams, RawCircuitParams,
};
use btmem::ode::{solve, Crossing, Event, Reversed};
use btmem::{MuParams, PlanarState};
use serde_json::{json, Value};

use crate::cli::*;
use crate::output::{document, Kind, Output, Table};

pub fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    let cfg = IntegratorConfig::default().with_tolerance(g.rel_tol);
    let cfg = IntegratorConfig { abs_tol: g.abs_tol, ..cfg };
    let tolerances = json!({
        "abs_tol": g.abs_tol,
        "rel_tol": g.rel_tol,
        "tol_root": g.tol_root,
        "tol_boundary": g.tol_boundary,
    });
    let doc = |kind, name: &str, params: Value, payload: Value, tables| {
        document(kind, name, params, tolerances.clone(), g.timestamp, payload, tables)
    };
    match &cli.command {
        Command::Bifset(a) => bifset(a, doc),
        Command::Melnikov(MelnikovCmd::Het(a)) => het(a, g.rel_tol, doc),
        Command::Melnikov(MelnikovCmd::Hom(a)) => hom(a, g.rel_tol, doc),
        Command::Shoot(a) => shoot(a, &cfg, doc),
        Command::Portrait(a) => portrait(a, g.tol_root, &cfg, doc),
        Command::Classify(a) => classify(a, g.tol_root, g.tol_boundary, doc),
        Command::Memristor(MemristorCmd::Reduce(a)) => reduce(a, g.tol_root, doc),
        Command::Memristor(MemristorCmd::Sphere(a)) => sphere(a, &cfg, doc),
        Command::Memristor(MemristorCmd::Simulate(a)) => memristor_simulate(a, &cfg, doc),
        Command::Duffing(DuffingCmd::Audit(a)) => audit(a, &cfg, doc),
    }
}

fn curve_table(c: &Curve, with_param: Option<&str>) -> Table {
    let mut cols = vec!["mu2", "mu1"];
    if let Some(p) = with_param {
        cols.push(p);
    }
    let mut t = Table::new(c.label.clone(), &cols);
    for (i, &(mu2, mu1)) in c.samples.iter().enumerate() {
        let mut row = vec![mu2, mu1];
        if with_param.is_some() {
            row.push(c.param.as_ref().map_or(f64::NAN, |p| p[i]));
        }
        t.push(row);
    }
    t
}

fn trajectory_table<const N: usize>(label: &str, cols: &[&str], tr: &Trajectory<N>) -> Table {
    let mut t = Table::new(label, cols);
    for (time, s) in tr.times.iter().zip(&tr.states) {
        let mut row = vec![*time];
        row.extend_from_slice(s);
        t.push(row);
    }
    t
}

fn tables_json(tables: &[Table]) -> Value {
    serde_json::to_value(tables).expect("tables serialise")
}

fn bifset(a: &BifsetArgs, doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>) -> Result<Output> {
    let set = assemble_bifset(a.mu3, a.resolution as usize)?;
    let labels: Vec<String> = set.points.iter().map(|p| format!("{:?}", p.label)).collect();
    let mut pts = Table::new("points", &["mu2", "mu1"]);
    for p in &set.points {
        pts.push(vec![p.mu2, p.mu1]);
    }
    let params = json!({ "mu3": a.mu3, "resolution": a.resolution, "point_labels": labels });
    if a.points_only {
        return doc(Kind::Points, "bifset", params, json!({ "mu3": a.mu3, "points": set.points }), vec![pts]);
    }
    let mut tables: Vec<Table> = set
        .curves
        .iter()
        .map(|c| curve_table(c, c.label.starts_with("hom").then_some("theta")))
        .collect();
    let payload = json!({ "mu3": a.mu3, "curves": tables_json(&tables), "points": set.points });
    tables.push(pts);
    doc(Kind::Curves, "bifset", params, payload, tables)
}

fn het(a: &HetArgs, tol: f64, doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>) -> Result<Output> {
    let closed = m_het_closed(a.nu1, a.nu2, a.nu3)?;
    let mut payload = json!({ "closed": closed });
    if a.oracle {
        let span = a.t_span.unwrap_or_else(|| default_t_span(a.nu2));
        let q = m_het_quadrature(a.nu1, a.nu2, a.nu3, span, tol.min(1e-12))?;
        payload["quadrature"] = json!(q);
        payload["reldiff"] = json!((closed - q).abs() / (1.0 + closed.abs()));
        payload["t_span"] = json!(span);
    }
    doc(Kind::Report, "melnikov het", json!({ "nu1": a.nu1, "nu2": a.nu2, "nu3": a.nu3 }), payload, vec![])
}

fn hom(a: &HomArgs, tol: f64, doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>) -> Result<Output> {
    let (nu1, nu2, mut payload) = match (a.theta, a.nu1, a.nu2) {
        (Some(t), _, _) => {
            let (n1, n2) = (nu1_of_theta(t), nu2_of_theta(t));
            (n1, n2, json!({ "theta": t, "nu1": n1, "nu2": n2, "closed_printed": m_hom_closed(t, n2) }))
        }
        (None, Some(n1), Some(n2)) => (n1, n2, json!({ "nu1": n1, "nu2": n2 })),
        _ => bail!("either --theta or both --nu1 and --nu2 are required"),
    };
    if a.check_curve || a.theta.is_none() {
        let t = tol.min(1e-12);
        let m = m_hom_area(nu1, nu2, t)?;
        let area = hom_loop_area(nu1, nu2, t)?;
        payload["area_melnikov"] = json!(m);
        payload["loop_area"] = json!(area);
        payload["relative_to_area"] = json!(m.abs() / area);
        if a.theta.is_some() {
            payload["on_curve"] = json!(m.abs() <= 1e-5 * area);
        }
    }
    let mut params = json!({ "nu1": nu1, "nu2": nu2 });
    if let Some(t) = a.theta {
        params["theta"] = json!(t);
    }
    doc(Kind::Report, "melnikov hom", params, payload, vec![])
}

fn shoot(
    a: &ShootArgs,
    cfg: &IntegratorConfig,
    doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>,
) -> Result<Output> {
    if !(a.theta_max > a.theta_min) {
        bail!("--theta-max must exceed --theta-min");
    }
    let n = a.samples as usize;
    let thetas: Vec<f64> =
        (0..n).map(|i| a.theta_min + (a.theta_max - a.theta_min) * i as f64 / (n - 1) as f64).collect();
    let r = homoclinic_continuation(a.mu3, &thetas, cfg)?;
    let tables = vec![curve_table(&r.numeric, Some("theta")), curve_table(&r.analytic, Some("theta"))];
    let gaps: Vec<f64> = r.points.iter().map(|p| p.gap).collect();
    let payload = json!({
        "curves": tables_json(&tables),
        "gaps": gaps,
        "max_deviation": r.max_deviation(),
        "relative_deviation": if r.points.is_empty() { 0.0 } else { r.max_deviation() / r.max_abs_mu1() },
        "failures": r.failures.iter().map(|(i, m)| json!({ "index": i, "theta": thetas[*i], "message": m })).collect::<Vec<_>>(),
    });
    let params = json!({ "mu3": a.mu3, "samples": a.samples, "theta_min": a.theta_min, "theta_max": a.theta_max });
    doc(Kind::Curves, "shoot", params, payload, tables)
}

fn mu_of(a: &MuArgs) -> MuParams {
    MuParams::new(a.mu1, a.mu2, a.mu3)
}

fn equilibria_json(mu: MuParams, tol_root: f64) -> Vec<Value> {
    solve_equilibria(mu, tol_root)
        .iter()
        .map(|e| json!({ "x": e.x, "y": 0.0, "kind": e.kind, "trace": e.trace, "det": e.det }))
        .collect()
}

fn portrait(
    a: &PortraitArgs,
    tol_root: f64,
    cfg: &IntegratorConfig,
    doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>,
) -> Result<Output> {
    let mu = mu_of(&a.mu);
    let field = btmem::flow::unfolding_vf(mu);
    let eqs = solve_equilibria(mu, tol_root);
    let extent = 4.0 + eqs.iter().map(|e| e.x.abs()).fold(0.0, f64::max) * 4.0;
    let escape = [Event::new(move |s: &[f64; 2]| s[0].abs().max(s[1].abs()) - extent, Crossing::Rising).terminal()];
    let mut tables = Vec::new();
    let delta = 1e-6;
    for (i, e) in eqs.iter().enumerate() {
        if e.kind != EquilibriumKind::Saddle {
            continue;
        }
        let (ls, lu) = e.real_eigenvalues().expect("saddles have real eigenvalues");
        for (lam, stable, name) in [(lu, false, "unstable"), (ls, true, "stable")] {
            let n = (1.0 + lam * lam).sqrt();
            for sign in [1.0, -1.0] {
                let start = [e.x + sign * delta / n, sign * delta * lam / n];
                let sol = if stable {
                    solve(&Reversed(&field), start, a.t_end, cfg, &escape)?
                } else {
                    solve(&field, start, a.t_end, cfg, &escape)?
                };
                let label = format!("saddle{i}_{name}_{}", if sign > 0.0 { "plus" } else { "minus" });
                tables.push(trajectory_table(&label, &["t", "x", "y"], &sol.trajectory));
            }
        }
    }
    for (k, &(x, y)) in a.starts.iter().enumerate() {
        let sol = solve(&field, [x, y], a.t_end, cfg, &escape)?;
        tables.push(trajectory_table(&format!("orbit{k}"), &["t", "x", "y"], &sol.trajectory));
    }
    let cycle = find_limit_cycle(mu, PlanarState::new(f64::NEG_INFINITY, 0.0), cfg);
    let mut payload = json!({
        "equilibria": equilibria_json(mu, tol_root),
        "region": classify_region_with(mu, 1e-6),
    });
    if let Some(c) = &cycle {
        payload["limit_cycle"] = json!({ "period": c.period, "radius": c.radius, "multiplier": c.multiplier });
        tables.push(trajectory_table("limit_cycle", &["t", "x", "y"], &c.trajectory));
    }
    payload["trajectories"] = tables_json(&tables);
    let params = json!({ "mu1": mu.mu1, "mu2": mu.mu2, "mu3": mu.mu3, "t_end": a.t_end });
    doc(Kind::Trajectory, "portrait", params, payload, tables)
}

fn classify(
    a: &MuArgs,
    tol_root: f64,
    tol_boundary: f64,
    doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>,
) -> Result<Output> {
    let mu = mu_of(a);
    let region = classify_region_with(mu, tol_boundary);
    let payload = json!({
        "region": region,
        "has_limit_cycle": region.has_limit_cycle(),
        "equilibria": equilibria_json(mu, tol_root),
    });
    doc(Kind::Report, "classify", json!({ "mu1": mu.mu1, "mu2": mu.mu2, "mu3": mu.mu3 }), payload, vec![])
}

fn memristor_params(a: &MemristorArgs) -> Result<MemristorParams> {
    Ok(match a.alpha {
        Some(alpha) => normalize_alpha(RawCircuitParams { a: a.a, b: a.b, beta: a.beta, xi: a.xi, alpha })?,
        None => MemristorParams::new(a.a, a.b, a.beta, a.xi),
    })
}

fn memristor_json(a: &MemristorArgs) -> Value {
    json!({ "a": a.a, "b": a.b, "beta": a.beta, "xi": a.xi, "alpha": a.alpha.unwrap_or(1.0) })
}

fn reduce(
    a: &ReduceArgs,
    tol_root: f64,
    doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>,
) -> Result<Output> {
    let p = memristor_params(&a.params)?;
    let fam = p.family();
    let mu = to_canonical(&p, a.h)?;
    let general = canonical_form(&fam, a.h)?;
    let eqs: Vec<Value> = lienard_equilibria(&fam, a.h)?
        .iter()
        .map(|(x, kind)| json!({ "x": x, "y": fam.lienard_f(*x), "kind": kind }))
        .collect();
    let c = fam.c;
    let payload = json!({
        "normalized": p,
        "lienard": {
            "F": { "x3": -fam.a11 * c, "x2": -fam.a11 * fam.a, "x1": -fam.a11 * fam.b - fam.a22 },
            "g": { "x3": fam.a11 * fam.a22 * c, "x2": fam.a11 * fam.a22 * fam.a, "x1": fam.a11 * fam.a22 * fam.b - fam.a12 * fam.a21 },
            "h": a.h,
            "equilibria": eqs,
        },
        "canonical": mu,
        "canonical_equilibria": equilibria_json(mu, tol_root),
        "general_form": general,
    });
    let mut params = memristor_json(&a.params);
    params["h"] = json!(a.h);
    doc(Kind::Report, "memristor reduce", params, payload, vec![])
}

fn sphere(
    a: &SphereArgs,
    cfg: &IntegratorConfig,
    doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>,
) -> Result<Output> {
    let p = memristor_params(&a.params)?;
    let _ = sphere_bounds(&p)?;
    let s = sphere_slices(&p, a.slices as usize, cfg)?;
    let tables: Vec<Table> = s
        .slices
        .iter()
        .enumerate()
        .map(|(i, sl)| trajectory_table(&format!("slice{i}"), &["t", "x", "y", "z"], &sl.orbit))
        .collect();
    let slices: Vec<Value> = s
        .slices
        .iter()
        .zip(&tables)
        .map(|(sl, t)| {
            json!({
                "h": sl.h, "period": sl.period, "amplitude": sl.amplitude,
                "leaf_residual": sl.leaf_residual, "closure_gap": sl.closure_gap,
                "columns": t.columns, "rows": t.rows,
            })
        })
        .collect();
    let payload = json!({
        "bounds": s.bounds,
        "h_values": s.h_values(),
        "slices": slices,
        "skipped": s.skipped.iter().map(|(h, m)| json!({ "h": h, "reason": m })).collect::<Vec<_>>(),
    });
    let mut params = memristor_json(&a.params);
    params["slices"] = json!(a.slices);
    doc(Kind::Slices, "memristor sphere", params, payload, tables)
}

fn memristor_simulate(
    a: &SimulateArgs,
    cfg: &IntegratorConfig,
    doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>,
) -> Result<Output> {
    let p = memristor_params(&a.params)?;
    let start = [a.x, a.y, a.z];
    let tr = simulate(&p, start, a.t_end, cfg)?;
    let h = first_integral(&p, &start);
    let drift = tr.states.iter().map(|s| (first_integral(&p, s) - h).abs()).fold(0.0, f64::max);
    let tables = vec![trajectory_table("trajectory", &["t", "x", "y", "z"], &tr)];
    let payload = json!({ "h": h, "invariant_drift": drift, "trajectory": tables_json(&tables)[0] });
    let mut params = memristor_json(&a.params);
    params["start"] = json!(start);
    params["t_end"] = json!(a.t_end);
    doc(Kind::Trajectory, "memristor simulate", params, payload, tables)
}

fn audit(
    a: &AuditArgs,
    cfg: &IntegratorConfig,
    doc: impl Fn(Kind, &str, Value, Value, Vec<Table>) -> Result<Output>,
) -> Result<Output> {
    let p = DuffingParams::cubic(a.alpha, a.omega, a.betad);
    let rep = match a.x0 {
        Some(x0) => duffing_audit_from(&p, a.h, x0, a.t_final, cfg)?,
        None => duffing_audit(&p, a.h, a.t_final, cfg)?,
    };
    let params = json!({ "alpha": a.alpha, "omega": a.omega, "betad": a.betad, "h": a.h, "t_final": a.t_final });
    doc(Kind::Report, "duffing audit", params, serde_json::to_value(rep)?, vec![])
}
