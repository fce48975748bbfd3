//! Artifact writers: CSV tables, `atlas.json`, `front.json`, `report.json`.
//!
//! All numbers in CSV files carry 17 significant digits so that golden
//! files round-trip exactly; identical configs produce byte-identical
//! output.

use std::fs;
use std::path::Path;

use front_core::pde::InvasionTrace;
use front_core::speeds::SpeedAtlas;
use front_core::{FrontProfile, GridProfile};
use serde_json::{json, Value};

use crate::error::Result;

/// 17 significant digits, round-trip exact for f64.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt17(x: Option<f64>) -> String {
    match x {
        Some(v) => sig17(v),
        None => String::new(),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn atlas_json(atlas: &SpeedAtlas) -> Value {
    json!({
        "c_lin": atlas.c_lin,
        "mu_quad_hull": atlas.mu_quad_hull,
        "c_quad_hull": atlas.c_quad_hull,
        "c_nonlin": {
            "lo": atlas.c_nonlin.lo,
            "hi": atlas.c_nonlin.hi,
            "method": atlas.c_nonlin.method.as_str(),
        },
        "c_upp_diag": atlas.c_upp_diag.map(|(lo, hi)| json!({"lo": lo, "hi": hi})),
        "case": atlas.case,
        "radii": atlas.radii.iter().map(|r| json!({
            "c0": r.c0,
            "delta_stab": r.delta_stab,
            "delta_hess": r.delta_hess,
            "c_upp": r.c_upp,
        })).collect::<Vec<_>>(),
    })
}

/// Human-readable atlas table for stdout.
pub fn atlas_table(atlas: &SpeedAtlas) -> String {
    let mut s = String::new();
    s.push_str(&format!("c_lin        = {:.9}\n", atlas.c_lin));
    s.push_str(&format!("mu_quad_hull = {:.9}\n", atlas.mu_quad_hull));
    s.push_str(&format!("c_quad_hull  = {:.9}\n", atlas.c_quad_hull));
    s.push_str(&format!(
        "c_nonlin     = [{:.9}, {:.9}] ({})\n",
        atlas.c_nonlin.lo,
        atlas.c_nonlin.hi,
        atlas.c_nonlin.method.as_str()
    ));
    match atlas.c_upp_diag {
        Some((lo, hi)) => s.push_str(&format!("c_upp_diag   = [{lo:.9}, {hi:.9}]\n")),
        None => s.push_str("c_upp_diag   = (not computed)\n"),
    }
    s.push_str(&format!("case         = {}\n", atlas.case));
    if !atlas.radii.is_empty() {
        s.push_str("c0           delta_stab   delta_hess   c_upp\n");
        for r in &atlas.radii {
            s.push_str(&format!(
                "{:<12.6} {:<12.6} {:<12.6} {:<12.6}\n",
                r.c0, r.delta_stab, r.delta_hess, r.c_upp
            ));
        }
    }
    s
}

pub fn front_csv(profile: &FrontProfile) -> String {
    let d = profile.d;
    let mut s = String::from("xi");
    for k in 1..=d {
        s.push_str(&format!(",phi_{k}"));
    }
    for k in 1..=d {
        s.push_str(&format!(",dphi_{k}"));
    }
    s.push('\n');
    for i in 0..profile.n() {
        s.push_str(&sig17(profile.xi[i]));
        for v in profile.phi_at(i) {
            s.push(',');
            s.push_str(&sig17(*v));
        }
        for v in profile.dphi_at(i) {
            s.push(',');
            s.push_str(&sig17(*v));
        }
        s.push('\n');
    }
    s
}

pub fn front_json(profile: &FrontProfile, bracket: (f64, f64), residuals: Value) -> Value {
    let steepness = profile.steepness.as_ref().map(|s| {
        json!({
            "lambda_hat": s.lambda_hat,
            "window": [s.window.0, s.window.1],
            "samples": s.samples,
            "verdict": format!("{:?}", s.verdict).to_lowercase(),
        })
    });
    json!({
        "c": profile.c,
        "steepness": steepness,
        "status": profile.status.as_str(),
        "bracket": [bracket.0, bracket.1],
        "residuals": residuals,
    })
}

/// One row per snapshot per tracked frame speed.
pub fn trace_csv(trace: &InvasionTrace) -> String {
    let mut s = String::from("t,xbar,xhat,c,E_c,D_c,Ehat_c,F_c\n");
    for track in &trace.tracks {
        for (k, &t) in trace.times.iter().enumerate() {
            s.push_str(&sig17(t));
            s.push(',');
            s.push_str(&opt17(trace.xbar[k]));
            s.push(',');
            s.push_str(&opt17(trace.xhat[k]));
            s.push(',');
            s.push_str(&sig17(track.c));
            s.push(',');
            s.push_str(&sig17(track.energy[k]));
            s.push(',');
            s.push_str(&sig17(track.dissipation[k]));
            s.push(',');
            s.push_str(&sig17(track.ehat[k]));
            s.push(',');
            s.push_str(&sig17(track.f_kin[k]));
            s.push('\n');
        }
    }
    s
}

pub fn profile_csv(w: &GridProfile) -> String {
    let mut s = String::from("x");
    for k in 1..=w.d {
        s.push_str(&format!(",u{k}"));
    }
    s.push('\n');
    for i in 0..w.n() {
        s.push_str(&sig17(w.x(i)));
        for v in w.node(i) {
            s.push(',');
            s.push_str(&sig17(*v));
        }
        s.push('\n');
    }
    s
}

pub fn write_snapshots(dir: &Path, trace: &InvasionTrace) -> Result<()> {
    for (k, (t, w)) in trace.snapshots.iter().enumerate() {
        let path = dir.join(format!("snapshot_{k:04}.csv"));
        let mut body = format!("# t = {}\n", sig17(*t));
        body.push_str(&profile_csv(w));
        write_text(&path, &body)?;
    }
    Ok(())
}
