//! The six run commands: speeds, front, simulate, nonlin-speed,
//! energy-scan, fisher-table. Each writes its artifacts plus a
//! `report.json` echoing the fully resolved config.

use std::path::Path;

use front_core::pde::{estimate_c_nonlin, energy_balance_check, fit_invasion_speed, simulate, NonlinOpts};
use front_core::potential::{CriticalPoint, PotentialSpec};
use front_core::profile::smooth_step_down;
use front_core::speeds::{
    c_lin_of_mu, c_upp, c_upp_diag, classify_case, delta_hess, delta_stab, mu_quad_hull,
    BracketMethod, NonlinBracket, RadiusEntry, RadiusScanOpts, SpeedAtlas,
};
use front_core::wave::{find_pushed_front, front_energy_identity, FrontSearchOpts};
use front_core::{Error as CoreError, FrontProfile, GridProfile};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::io;

fn write_report(dir: &Path, command: &str, cfg: &RunConfig, results: Value) -> Result<Value> {
    let report = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(cfg)?,
        "results": results,
    });
    io::write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

/// Shooting attempt over `(c_lin, c_quad_hull)`; `Ok(None)` means the
/// search certified no steep connection at the scan resolution (pulled).
fn shoot_for_pushed(
    p: &PotentialSpec,
    e: &CriticalPoint,
    u_minus: &[f64],
    c_quad_hull: f64,
    cfg: &RunConfig,
) -> Result<(Option<FrontProfile>, Option<String>)> {
    let sep = c_quad_hull - e.c_lin;
    if p.dim() != 1 || sep <= 1e-6 * c_quad_hull.max(1.0) {
        return Ok((None, None));
    }
    let opts = FrontSearchOpts {
        c_tol: cfg.search.c_tol,
        tol_conn: cfg.search.tol_conn,
        xi_max: cfg.search.xi_max,
        ..FrontSearchOpts::default()
    };
    let bracket = (e.c_lin + 0.01 * sep, c_quad_hull);
    match find_pushed_front(p, e, u_minus, bracket, &opts) {
        Ok(front) => Ok((Some(front), None)),
        Err(CoreError::BracketFailure(_)) => Ok((None, None)),
        Err(CoreError::Inconclusive(msg)) => Ok((None, Some(msg))),
        Err(e) => Err(e.into()),
    }
}

fn build_atlas(cfg: &RunConfig) -> Result<(SpeedAtlas, Option<f64>, Option<String>)> {
    let mut p = cfg.build_potential()?;
    let e = cfg.invaded_point(&p)?;
    let b = &cfg.potential;
    let v_min = p.minimize_over_box(b.vmin_box[0], b.vmin_box[1])?;
    if v_min >= 0.0 {
        return Err(CoreError::InvalidInput(format!(
            "V_min = {v_min} >= 0: no invading well below the invaded state"
        ))
        .into());
    }
    let mu_q = mu_quad_hull(&p, &e.location, b.hull_box[0], b.hull_box[1])?;
    let c_quad = c_lin_of_mu(mu_q);
    let u_minus = cfg.invading_state(&p)?;
    let (front, warning) = shoot_for_pushed(&p, &e, &u_minus, c_quad, cfg)?;
    let (c_nonlin, pushed_speed) = match &front {
        Some(f) => (
            NonlinBracket {
                lo: f.c - cfg.search.c_tol,
                hi: f.c + cfg.search.c_tol,
                method: BracketMethod::Shooting,
            },
            Some(f.c),
        ),
        None => (
            // no steep connection above c_lin: the nonlinear speed
            // collapses onto the linear one
            NonlinBracket {
                lo: e.c_lin,
                hi: e.c_lin,
                method: BracketMethod::Shooting,
            },
            None,
        ),
    };
    let case = classify_case(e.c_lin, &c_nonlin, c_quad, cfg.search.case_tol * c_quad)?;
    let scan = RadiusScanOpts::default();
    let mut c0_values = Vec::new();
    if let Some(c0) = cfg.search.c0 {
        c0_values.push(c0);
    }
    c0_values.extend_from_slice(&cfg.search.c0_list);
    if c0_values.is_empty() && c_quad > e.c_lin + 1e-6 {
        c0_values.push(0.5 * (e.c_lin + c_quad));
    }
    let mut radii = Vec::new();
    for c0 in c0_values {
        let ds = delta_stab(&p, &e.location, c0, &scan)?;
        let dh = delta_hess(&p, &e.location, c0, &scan)?;
        radii.push(RadiusEntry {
            c0,
            delta_stab: ds,
            delta_hess: dh,
            c_upp: c_upp(&p, ds)?,
        });
    }
    let diag = if c_quad > e.c_lin + 1e-6 {
        c_upp_diag(&p, &e.location, e.c_lin, c_quad, &scan).ok()
    } else {
        None
    };
    let atlas = SpeedAtlas {
        c_lin: e.c_lin,
        mu_quad_hull: mu_q,
        c_quad_hull: c_quad,
        c_nonlin,
        c_upp_diag: diag,
        case,
        radii,
    };
    Ok((atlas, pushed_speed, warning))
}

pub fn cmd_speeds(cfg: &RunConfig) -> Result<Value> {
    let dir = cfg.output_dir();
    let (atlas, pushed_speed, warning) = build_atlas(cfg)?;
    io::write_json(&dir.join("atlas.json"), &io::atlas_json(&atlas))?;
    print!("{}", io::atlas_table(&atlas));
    if let Some(c) = pushed_speed {
        println!("pushed front at c = {c:.9}");
    }
    write_report(
        &dir,
        "speeds",
        cfg,
        json!({
            "atlas": io::atlas_json(&atlas),
            "pushed_speed": pushed_speed,
            "warning": warning,
        }),
    )
}

pub fn cmd_fisher_table(cfg: &RunConfig, nu_list: &[f64]) -> Result<Value> {
    let dir = cfg.output_dir();
    for &nu in nu_list {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(LabError::Config(format!("nu = {nu} outside (0, 1]")));
        }
    }
    let mut csv = String::from(
        "nu,c_lin,c_quad_hull,pushed_speed,c_nonlin_lo,c_nonlin_hi,case,verdict\n",
    );
    let mut rows = Vec::new();
    println!("nu      c_lin      c_quad     pushed       case  verdict");
    for &nu in nu_list {
        let mut sub = cfg.clone();
        sub.potential.family = String::from("fisher");
        sub.potential.nu = nu;
        // the radii and diagonal bound are not part of the table; skip
        // them by leaving c0 lists empty and restricting to the speeds
        sub.search.c0 = None;
        sub.search.c0_list = Vec::new();
        let (atlas, pushed_speed, _) = build_atlas_speeds_only(&sub)?;
        let verdict = if pushed_speed.is_some() { "pushed" } else { "pulled" };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            io::sig17(nu),
            io::sig17(atlas.c_lin),
            io::sig17(atlas.c_quad_hull),
            pushed_speed.map(io::sig17).unwrap_or_default(),
            io::sig17(atlas.c_nonlin.lo),
            io::sig17(atlas.c_nonlin.hi),
            atlas.case,
            verdict
        ));
        println!(
            "{:<7} {:<10.6} {:<10.6} {:<12} {:<5} {verdict}",
            nu,
            atlas.c_lin,
            atlas.c_quad_hull,
            pushed_speed.map(|c| format!("{c:.7}")).unwrap_or_else(|| String::from("-")),
            atlas.case
        );
        rows.push(json!({
            "nu": nu,
            "c_lin": atlas.c_lin,
            "c_quad_hull": atlas.c_quad_hull,
            "pushed_speed": pushed_speed,
            "c_nonlin": {"lo": atlas.c_nonlin.lo, "hi": atlas.c_nonlin.hi},
            "case": atlas.case,
            "verdict": verdict,
        }));
    }
    io::write_text(&dir.join("fisher_table.csv"), &csv)?;
    write_report(&dir, "fisher-table", cfg, json!({ "rows": rows }))
}

/// Atlas without the radii table or the diagonal bound (for per-row sweeps).
fn build_atlas_speeds_only(cfg: &RunConfig) -> Result<(SpeedAtlas, Option<f64>, Option<String>)> {
    let mut p = cfg.build_potential()?;
    let e = cfg.invaded_point(&p)?;
    let b = &cfg.potential;
    p.minimize_over_box(b.vmin_box[0], b.vmin_box[1])?;
    let mu_q = mu_quad_hull(&p, &e.location, b.hull_box[0], b.hull_box[1])?;
    let c_quad = c_lin_of_mu(mu_q);
    let u_minus = cfg.invading_state(&p)?;
    let (front, warning) = shoot_for_pushed(&p, &e, &u_minus, c_quad, cfg)?;
    let (c_nonlin, pushed_speed) = match &front {
        Some(f) => (
            NonlinBracket {
                lo: f.c - cfg.search.c_tol,
                hi: f.c + cfg.search.c_tol,
                method: BracketMethod::Shooting,
            },
            Some(f.c),
        ),
        None => (
            NonlinBracket {
                lo: e.c_lin,
                hi: e.c_lin,
                method: BracketMethod::Shooting,
            },
            None,
        ),
    };
    let case = classify_case(e.c_lin, &c_nonlin, c_quad, cfg.search.case_tol * c_quad)?;
    Ok((
        SpeedAtlas {
            c_lin: e.c_lin,
            mu_quad_hull: mu_q,
            c_quad_hull: c_quad,
            c_nonlin,
            c_upp_diag: None,
            case,
            radii: Vec::new(),
        },
        pushed_speed,
        warning,
    ))
}

fn search_front(cfg: &RunConfig) -> Result<(PotentialSpec, CriticalPoint, FrontProfile)> {
    let p = cfg.build_potential()?;
    let e = cfg.invaded_point(&p)?;
    let u_minus = cfg.invading_state(&p)?;
    let opts = FrontSearchOpts {
        c_tol: cfg.search.c_tol,
        tol_conn: cfg.search.tol_conn,
        xi_max: cfg.search.xi_max,
        ..FrontSearchOpts::default()
    };
    let bracket = (cfg.search.bracket[0], cfg.search.bracket[1]);
    let front = find_pushed_front(&p, &e, &u_minus, bracket, &opts)?;
    Ok((p, e, front))
}

pub fn cmd_front(cfg: &RunConfig) -> Result<Value> {
    let dir = cfg.output_dir();
    let (p, e, front) = search_front(cfg)?;
    let energy_residual = front_energy_identity(&front, &p, &e.location, front.c)
        .ok()
        .map(|(r, _)| r);
    let residuals = json!({
        "ode": front.max_ode_residual(&p),
        "connection": front.min_target_dist,
        "energy_identity": energy_residual,
    });
    io::write_text(&dir.join("front.csv"), &io::front_csv(&front))?;
    let bracket = (cfg.search.bracket[0], cfg.search.bracket[1]);
    let fj = io::front_json(&front, bracket, residuals.clone());
    io::write_json(&dir.join("front.json"), &fj)?;
    println!("c* = {:.9} ({})", front.c, front.status.as_str());
    if let Some(s) = &front.steepness {
        println!("steepness = {:.9} ({:?})", s.lambda_hat, s.verdict);
    }
    write_report(&dir, "front", cfg, json!({ "front": fj }))
}

fn build_ic(cfg: &RunConfig, e: &[f64], u_minus: &[f64]) -> Result<GridProfile> {
    let g = &cfg.grid;
    let n = (g.length / g.dx).round() as usize + 1;
    let d = e.len();
    let ic = &cfg.ic;
    let shape = |x: f64| -> f64 {
        match ic.kind.as_str() {
            "bump" => {
                let s = (x - ic.center) / ic.width;
                (-s * s).exp()
            }
            // u_minus plateau with a smooth descent of the given width
            "plateau" => smooth_step_down((x - (ic.center - ic.width)) / ic.width),
            _ => f64::NAN,
        }
    };
    if !matches!(ic.kind.as_str(), "bump" | "plateau") {
        return Err(LabError::Config(format!(
            "unknown ic kind {:?} (expected bump or plateau)",
            ic.kind
        )));
    }
    let mut values = vec![0.0; n * d];
    for i in 0..n {
        let chi = ic.amplitude * shape(i as f64 * g.dx);
        for k in 0..d {
            values[i * d + k] = e[k] + chi * (u_minus[k] - e[k]);
        }
    }
    Ok(GridProfile::new(0.0, g.dx, d, values, e.to_vec())?)
}

fn resolve_c0(cfg: &RunConfig, p: &PotentialSpec, e: &CriticalPoint) -> Result<f64> {
    if let Some(c0) = cfg.search.c0 {
        return Ok(c0);
    }
    let b = &cfg.potential;
    let mu_q = mu_quad_hull(p, &e.location, b.hull_box[0], b.hull_box[1])?;
    Ok(0.5 * (e.c_lin + c_lin_of_mu(mu_q)))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Value> {
    let dir = cfg.output_dir();
    let p = cfg.build_potential()?;
    let e = cfg.invaded_point(&p)?;
    let u_minus = cfg.invading_state(&p)?;
    let c0 = resolve_c0(cfg, &p, &e)?;
    let scan = RadiusScanOpts::default();
    let ds = delta_stab(&p, &e.location, c0, &scan)?;
    let dh = delta_hess(&p, &e.location, c0, &scan)?;
    let sim = cfg.sim_config(c0, ds, dh);
    sim.validate()?;
    let ic = build_ic(cfg, &e.location, &u_minus)?;
    let trace = simulate(&p, &ic, &sim)?;
    io::write_text(&dir.join("trace.csv"), &io::trace_csv(&trace))?;
    if sim.store_profiles {
        io::write_snapshots(&dir.join("snapshots"), &trace)?;
    }
    let fit = fit_invasion_speed(&trace, 0.4).ok();
    let balance: Vec<Value> = sim
        .tracked_speeds
        .iter()
        .map(|&c| {
            json!({
                "c": c,
                "defect": energy_balance_check(&trace, c).ok(),
            })
        })
        .collect();
    match fit {
        Some((c, conf)) => println!("fitted invasion speed = {c:.6} (confidence {conf:.2e})"),
        None => println!("no invasion recorded"),
    }
    write_report(
        &dir,
        "simulate",
        cfg,
        json!({
            "c0": c0,
            "delta_stab": ds,
            "delta_hess": dh,
            "fitted_speed": fit.map(|f| f.0),
            "fit_confidence": fit.map(|f| f.1),
            "balance": balance,
            "aborted": trace.aborted.map(|(t, x)| json!({"t": t, "x": x})),
            "snapshots": trace.times.len(),
        }),
    )
}

pub fn cmd_nonlin_speed(cfg: &RunConfig) -> Result<Value> {
    let dir = cfg.output_dir();
    let p = cfg.build_potential()?;
    let e = cfg.invaded_point(&p)?;
    let u_minus = cfg.invading_state(&p)?;
    let bracket = (cfg.search.bracket[0], cfg.search.bracket[1]);
    let c0 = match cfg.search.c0 {
        Some(c0) => c0,
        None => 0.5 * (bracket.0 + bracket.1),
    };
    let scan = RadiusScanOpts::default();
    let ds = delta_stab(&p, &e.location, c0, &scan)?;
    let dh = delta_hess(&p, &e.location, c0, &scan)?;
    let sim = cfg.sim_config(c0, ds, dh);
    sim.validate()?;
    let opts = NonlinOpts {
        resolution: cfg.search.resolution,
        ..NonlinOpts::default()
    };
    let est = estimate_c_nonlin(&p, &u_minus, bracket, &sim, &opts)?;
    let verdicts: Vec<Value> = est
        .verdicts
        .iter()
        .map(|(c, v)| json!({"c": c, "verdict": v.as_str()}))
        .collect();
    println!(
        "c_nonlin in [{:.6}, {:.6}] (width {:.2e})",
        est.lo,
        est.hi,
        est.hi - est.lo
    );
    write_report(
        &dir,
        "nonlin-speed",
        cfg,
        json!({
            "lo": est.lo,
            "hi": est.hi,
            "width": est.hi - est.lo,
            "verdicts": verdicts,
            "warning": est.warning,
        }),
    )?;
    if let Some(w) = est.warning {
        return Err(LabError::Inconclusive(w));
    }
    Ok(json!({"lo": est.lo, "hi": est.hi}))
}

pub fn cmd_energy_scan(cfg: &RunConfig) -> Result<Value> {
    let dir = cfg.output_dir();
    let (p, e, front) = search_front(cfg)?;
    let lambda = front
        .steepness
        .as_ref()
        .map(|s| s.lambda_hat)
        .ok_or_else(|| LabError::Inconclusive(String::from("front carries no steepness fit")))?;
    let window_hi = 2.0 * lambda.abs() * (1.0 - 1e-9);
    let [lo, hi] = cfg.search.scan;
    let n = cfg.search.scan_points.max(2);
    let mut csv = String::from("c,energy,residual\n");
    let mut curve: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        let c = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        if !(c > 0.0 && c < window_hi) {
            continue;
        }
        let (residual, energy) = front_energy_identity(&front, &p, &e.location, c)?;
        csv.push_str(&format!(
            "{},{},{}\n",
            io::sig17(c),
            io::sig17(energy),
            io::sig17(residual)
        ));
        curve.push((c, energy));
    }
    if curve.is_empty() {
        return Err(LabError::Config(format!(
            "scan grid [{lo}, {hi}] misses the convergence window (0, {window_hi:.4})"
        )));
    }
    io::write_text(&dir.join("energy_scan.csv"), &csv)?;
    // the scanned energy changes sign exactly at the front's own speed
    let crossing = curve
        .windows(2)
        .find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0)
        .map(|w| [w[0].0, w[1].0]);
    println!(
        "scanned {} speeds in (0, {window_hi:.4}); zero crossing {:?}",
        curve.len(),
        crossing
    );
    write_report(
        &dir,
        "energy-scan",
        cfg,
        json!({
            "c_star": front.c,
            "window_hi": window_hi,
            "points": curve.len(),
            "zero_crossing": crossing,
        }),
    )
}
