//! Run configuration: a TOML file with nested sections, every key optional,
//! with CLI flags overriding file values. The fully resolved config
//! (defaults included) is echoed into every `report.json` so that sweep
//! scripts can diff what actually ran.

use std::path::{Path, PathBuf};

use front_core::potential::{PolyTerm, PotentialSpec};
use front_core::{CriticalPoint, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "FRONT_LAB_OUT";

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub potential: PotentialBlock,
    pub grid: GridBlock,
    pub search: SearchBlock,
    pub ic: IcBlock,
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialBlock {
    /// fisher | quintic-gl | polynomial | quadratic
    pub family: String,
    pub nu: f64,
    pub mu1: f64,
    pub mu: f64,
    pub d: usize,
    /// Monomial list for the polynomial family.
    pub terms: Vec<TermConfig>,
    /// Box over which `V_min` is sought (per axis).
    pub vmin_box: [f64; 2],
    /// Interval around `e` scanned for the quadratic-hull curvature.
    pub hull_box: [f64; 2],
}

impl Default for PotentialBlock {
    fn default() -> Self {
        PotentialBlock {
            family: String::from("fisher"),
            nu: 0.25,
            mu1: -1.0,
            mu: -1.0,
            d: 1,
            terms: Vec::new(),
            vmin_box: [-3.0, 3.0],
            hull_box: [-3.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub length: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: f64,
    pub margin: f64,
    pub store_profiles: bool,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock {
            length: 400.0,
            dx: 0.1,
            dt: 5e-3,
            t_final: 150.0,
            snapshot_stride: 0.5,
            margin: 30.0,
            store_profiles: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchBlock {
    /// Speed bracket for shooting / nonlinear-speed bisection.
    pub bracket: [f64; 2],
    pub c_tol: f64,
    pub tol_conn: f64,
    pub xi_max: f64,
    /// Target bracket width for the nonlinear-speed estimate.
    pub resolution: f64,
    /// Reference speed for the stability radii; defaults to the midpoint
    /// of (c_lin, c_quad_hull) when absent.
    pub c0: Option<f64>,
    /// Extra c0 values for the atlas radii table.
    pub c0_list: Vec<f64>,
    /// Frame speeds tracked by the simulation; defaults to [c0].
    pub tracked: Vec<f64>,
    /// Invading state; found by Newton from `u_minus_guess` when absent.
    pub u_minus: Option<Vec<f64>>,
    pub u_minus_guess: Vec<f64>,
    /// Energy-scan grid: [c_lo, c_hi] with `scan_points` samples, clipped
    /// to the convergence window of the front at hand.
    pub scan: [f64; 2],
    pub scan_points: usize,
    /// Tolerance for speed-equality in the case classification, as a
    /// fraction of c_quad_hull.
    pub case_tol: f64,
}

impl Default for SearchBlock {
    fn default() -> Self {
        SearchBlock {
            bracket: [2.01, 2.4],
            c_tol: 1e-7,
            tol_conn: 1e-8,
            xi_max: 200.0,
            resolution: 0.02,
            c0: None,
            c0_list: Vec::new(),
            tracked: Vec::new(),
            u_minus: None,
            u_minus_guess: vec![1.0],
            scan: [1.0, 2.6],
            scan_points: 33,
            case_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IcBlock {
    /// bump | plateau
    pub kind: String,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Default for IcBlock {
    fn default() -> Self {
        IcBlock {
            kind: String::from("bump"),
            amplitude: 1.0,
            center: 50.0,
            width: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// Output directory; falls back to $FRONT_LAB_OUT, then ".".
    pub dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| LabError::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| LabError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        if let Some(d) = &self.output.dir {
            return d.clone();
        }
        if let Ok(root) = std::env::var(OUTPUT_ROOT_ENV) {
            if !root.is_empty() {
                return PathBuf::from(root);
            }
        }
        PathBuf::from(".")
    }

    pub fn build_potential(&self) -> Result<PotentialSpec> {
        let b = &self.potential;
        let p = match b.family.as_str() {
            "fisher" => PotentialSpec::fisher(b.nu)?,
            "quintic-gl" => PotentialSpec::quintic_gl(b.mu1)?,
            "quadratic" => PotentialSpec::quadratic(b.d, b.mu)?,
            "polynomial" => {
                let terms = b
                    .terms
                    .iter()
                    .map(|t| PolyTerm {
                        coeff: t.coeff,
                        powers: t.powers.clone(),
                    })
                    .collect();
                PotentialSpec::polynomial(b.d, terms)?
            }
            other => {
                return Err(LabError::Config(format!(
                    "unknown potential family {other:?} \
                     (expected fisher, quintic-gl, quadratic or polynomial)"
                )))
            }
        };
        Ok(p)
    }

    /// The invaded critical point: Newton from the origin.
    pub fn invaded_point(&self, p: &PotentialSpec) -> Result<CriticalPoint> {
        Ok(p.find_critical_point(&vec![0.0; p.dim()])?)
    }

    /// The invading state: explicit from the config, or a Newton-converged
    /// critical point from `u_minus_guess`.
    pub fn invading_state(&self, p: &PotentialSpec) -> Result<Vec<f64>> {
        if let Some(u) = &self.search.u_minus {
            if u.len() != p.dim() {
                return Err(LabError::Config(format!(
                    "u_minus has {} components, potential has dimension {}",
                    u.len(),
                    p.dim()
                )));
            }
            return Ok(u.clone());
        }
        let mut guess = self.search.u_minus_guess.clone();
        guess.resize(p.dim(), 1.0);
        Ok(p.find_critical_point(&guess)?.location)
    }

    pub fn sim_config(&self, c0: f64, delta_stab: f64, delta_hess: f64) -> SimConfig {
        let mut cfg = SimConfig::new(c0, delta_stab, delta_hess);
        cfg.length = self.grid.length;
        cfg.dx = self.grid.dx;
        cfg.dt = self.grid.dt;
        cfg.t_final = self.grid.t_final;
        cfg.snapshot_stride = self.grid.snapshot_stride;
        cfg.margin = self.grid.margin;
        cfg.store_profiles = self.grid.store_profiles;
        cfg.tracked_speeds = if self.search.tracked.is_empty() {
            vec![c0]
        } else {
            self.search.tracked.clone()
        };
        cfg
    }
}

/// CLI flag values layered on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub family: Option<String>,
    pub nu: Option<f64>,
    pub mu1: Option<f64>,
    pub mu: Option<f64>,
    pub length: Option<f64>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub snapshot_stride: Option<f64>,
    pub margin: Option<f64>,
    pub store_profiles: Option<bool>,
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
    pub c_tol: Option<f64>,
    pub resolution: Option<f64>,
    pub c0: Option<f64>,
    pub tracked: Option<Vec<f64>>,
    pub u_minus: Option<Vec<f64>>,
    pub scan_lo: Option<f64>,
    pub scan_hi: Option<f64>,
    pub scan_points: Option<usize>,
    pub ic: Option<String>,
    pub amplitude: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = &$src {
                    $dst = v.clone();
                }
            };
        }
        set!(self.family, cfg.potential.family);
        set!(self.nu, cfg.potential.nu);
        set!(self.mu1, cfg.potential.mu1);
        set!(self.mu, cfg.potential.mu);
        set!(self.length, cfg.grid.length);
        set!(self.dx, cfg.grid.dx);
        set!(self.dt, cfg.grid.dt);
        set!(self.t_final, cfg.grid.t_final);
        set!(self.snapshot_stride, cfg.grid.snapshot_stride);
        set!(self.margin, cfg.grid.margin);
        set!(self.store_profiles, cfg.grid.store_profiles);
        set!(self.bracket_lo, cfg.search.bracket[0]);
        set!(self.bracket_hi, cfg.search.bracket[1]);
        set!(self.c_tol, cfg.search.c_tol);
        set!(self.resolution, cfg.search.resolution);
        if self.c0.is_some() {
            cfg.search.c0 = self.c0;
        }
        set!(self.tracked, cfg.search.tracked);
        if self.u_minus.is_some() {
            cfg.search.u_minus = self.u_minus.clone();
        }
        set!(self.scan_lo, cfg.search.scan[0]);
        set!(self.scan_hi, cfg.search.scan[1]);
        set!(self.scan_points, cfg.search.scan_points);
        set!(self.ic, cfg.ic.kind);
        set!(self.amplitude, cfg.ic.amplitude);
        set!(self.center, cfg.ic.center);
        set!(self.width, cfg.ic.width);
        if self.out.is_some() {
            cfg.output.dir = self.out.clone();
        }
    }
}
