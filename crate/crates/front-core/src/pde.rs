//! Time integration of `u_t = -grad V(u) + u_xx` on `[0, L]` with invasion
//! tracking: IMEX Crank–Nicolson steps, invasion points at two radii,
//! travelling-frame energies and dissipations per tracked speed, invasion
//! speed fitting, and the energy-sign bisection for the maximal nonlinear
//! invasion speed.
//!
//! Boundary conditions are zero-flux on the left and pinned to the invaded
//! state `e` on the right; runs abort cleanly when the invasion point
//! enters the right safety margin.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::potential::PotentialSpec;
use crate::profile::{self, GridProfile};

/// Simulation parameters. `delta_stab` / `delta_hess` are the invasion
/// radii at the chosen `c0`; `margin` is the distance from the invasion
/// point to the right boundary below which the run aborts.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub length: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: f64,
    pub tracked_speeds: Vec<f64>,
    pub c0: f64,
    pub delta_stab: f64,
    pub delta_hess: f64,
    pub margin: f64,
    pub store_profiles: bool,
}

impl SimConfig {
    /// Defaults sized for desk-scale front runs; the radii still have to
    /// be set from the potential at hand.
    pub fn new(c0: f64, delta_stab: f64, delta_hess: f64) -> Self {
        SimConfig {
            length: 400.0,
            dx: 0.1,
            dt: 5e-3,
            t_final: 150.0,
            snapshot_stride: 0.5,
            tracked_speeds: Vec::new(),
            c0,
            delta_stab,
            delta_hess,
            margin: 30.0,
            store_profiles: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dx > 0.0 && self.t_final > 0.0 && self.length > 0.0) {
            return Err(Error::InvalidInput(String::from(
                "dt, dx, T and L must all be positive",
            )));
        }
        if self.margin < 20.0 * self.dx {
            return Err(Error::InvalidInput(format!(
                "safety margin {} below 20 dx = {}",
                self.margin,
                20.0 * self.dx
            )));
        }
        if !(self.delta_hess > 0.0 && self.delta_stab >= self.delta_hess) {
            return Err(Error::InvalidInput(String::from(
                "invasion radii must satisfy 0 < delta_hess <= delta_stab",
            )));
        }
        if !(self.snapshot_stride >= self.dt) {
            return Err(Error::InvalidInput(String::from(
                "snapshot stride below dt",
            )));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        (self.length / self.dx).round() as usize + 1
    }
}

/// Per-speed diagnostics along a run, one entry per snapshot. Energies are
/// referenced at the invasion point (`xi_ref = xbar - c t` in the
/// travelling frame, i.e. lab weight `exp(c (x - xbar))`); entries are NaN
/// at snapshots without an invasion point.
#[derive(Debug, Clone)]
pub struct SpeedTrack {
    pub c: f64,
    /// Travelling-frame invasion point `xbar(t) - c t`.
    pub xi_bar: Vec<f64>,
    pub energy: Vec<f64>,
    /// Instantaneous dissipation functional at the snapshot.
    pub dissipation: Vec<f64>,
    /// Energy re-referenced at the inner invasion point `xhat - c t`.
    pub ehat: Vec<f64>,
    /// Weighted kinetic part `int e^{c(xi - xi_ref)} |v_xi|^2 / 2`.
    pub f_kin: Vec<f64>,
    /// Per-step-accumulated `int D_c dt` over the snapshot interval ending
    /// here, referenced at the interval-start `xi_bar` (0 for the first).
    pub diss_integral: Vec<f64>,
    /// Discrete-balance energy at the snapshot (staggered kinetic term
    /// against the geometric grid weight, referenced at `xbar`); designed
    /// so that its change matches `bal_integral` up to time-discretization
    /// error only.
    pub bal_energy: Vec<f64>,
    /// Per-step-accumulated discrete energy production `-sum W u_t v_t`
    /// over the snapshot interval ending here, referenced at the
    /// interval-start `xbar`.
    pub bal_integral: Vec<f64>,
}

/// Full invasion diagnostics of one simulation.
#[derive(Debug, Clone)]
pub struct InvasionTrace {
    /// Grid spacing of the run (needed to re-reference the discrete
    /// balance weight between snapshots).
    pub dx: f64,
    pub times: Vec<f64>,
    pub xbar: Vec<Option<f64>>,
    pub xhat: Vec<Option<f64>>,
    pub tracks: Vec<SpeedTrack>,
    pub snapshots: Vec<(f64, GridProfile)>,
    /// `(time, position)` if the run stopped in the right safety margin.
    pub aborted: Option<(f64, f64)>,
}

impl InvasionTrace {
    pub fn no_invasion(&self) -> bool {
        self.xbar.iter().all(|x| x.is_none())
    }

    pub fn track(&self, c: f64) -> Option<&SpeedTrack> {
        self.tracks
            .iter()
            .find(|t| math::abs(t.c - c) < 1e-12)
    }
}

/// Rightmost `x` with `|w(x) - e| > delta`, with linear interpolation of
/// the deviation magnitude between nodes; `None` if the super-level set is
/// empty.
pub fn invasion_point(w: &GridProfile, delta: f64) -> Option<f64> {
    let n = w.n();
    let dev = |i: usize| math::sqrt(w.dev_sq(i));
    for i in (0..n).rev() {
        if dev(i) > delta {
            if i == n - 1 {
                return Some(w.x(i));
            }
            let a = dev(i);
            let b = dev(i + 1);
            // a > delta >= b on [x_i, x_{i+1}]
            return Some(w.x(i) + w.dx * (a - delta) / (a - b));
        }
    }
    None
}

/// One IMEX step: Crank–Nicolson for the diffusion (tridiagonal solve per
/// component), the reaction `-grad V` (plus `frame_speed * u_x` when
/// stepping in a travelling frame) explicit at the half-step predictor.
/// `t` only labels the blow-up diagnostic.
pub fn step(
    w: &GridProfile,
    p: &PotentialSpec,
    dt: f64,
    frame_speed: f64,
    t: f64,
) -> Result<GridProfile> {
    let mut out = w.clone();
    let mut scratch = StepScratch::new(w.n(), w.d, w.dx, dt);
    step_into(w, p, dt, frame_speed, &mut scratch, &mut out)
        .map_err(|_| Error::BlowUp { time: t })?;
    Ok(out)
}

/// Reusable buffers for the stepping loop.
struct StepScratch {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    half: Vec<f64>,
    source: Vec<f64>,
}

impl StepScratch {
    fn new(n: usize, d: usize, dx: f64, dt: f64) -> Self {
        let r = dt / (2.0 * dx * dx);
        let mut lower = vec![-r; n];
        let mut diag = vec![1.0 + 2.0 * r; n];
        let mut upper = vec![-r; n];
        // zero-flux left via the mirror ghost: u_{-1} = u_1
        upper[0] = -2.0 * r;
        lower[0] = 0.0;
        // right boundary pinned: identity row
        diag[n - 1] = 1.0;
        lower[n - 1] = 0.0;
        upper[n - 1] = 0.0;
        StepScratch {
            lower,
            diag,
            upper,
            rhs: vec![0.0; n],
            half: vec![0.0; n * d],
            source: vec![0.0; n * d],
        }
    }
}

/// `source[i] = -grad V(u_i) + frame_speed * (Du)_i` (node-major).
fn eval_source(
    w_values: &[f64],
    n: usize,
    d: usize,
    dx: f64,
    p: &PotentialSpec,
    frame_speed: f64,
    out: &mut [f64],
) {
    for i in 0..n {
        let u = &w_values[i * d..(i + 1) * d];
        let g = p.gradient(u);
        for k in 0..d {
            let du = if i == 0 {
                0.0 // zero-flux: mirror ghost kills the centered difference
            } else if i == n - 1 {
                (w_values[i * d + k] - w_values[(i - 1) * d + k]) / dx
            } else {
                (w_values[(i + 1) * d + k] - w_values[(i - 1) * d + k]) / (2.0 * dx)
            };
            out[i * d + k] = -g[k] + frame_speed * du;
        }
    }
}

fn step_into(
    w: &GridProfile,
    p: &PotentialSpec,
    dt: f64,
    frame_speed: f64,
    s: &mut StepScratch,
    out: &mut GridProfile,
) -> Result<()> {
    let n = w.n();
    let d = w.d;
    let dx = w.dx;

    // explicit half-step predictor for the stiff-free terms
    eval_source(&w.values, n, d, dx, p, frame_speed, &mut s.source);
    for i in 0..n {
        for k in 0..d {
            let lap = laplacian(&w.values, i, k, n, d, dx, &w.e);
            s.half[i * d + k] =
                w.values[i * d + k] + 0.5 * dt * (lap + s.source[i * d + k]);
        }
    }
    // pin the predictor's right end too
    for k in 0..d {
        s.half[(n - 1) * d + k] = w.e[k];
    }
    eval_source(&s.half, n, d, dx, p, frame_speed, &mut s.source);

    for k in 0..d {
        for i in 0..n {
            let lap = laplacian(&w.values, i, k, n, d, dx, &w.e);
            s.rhs[i] = w.values[i * d + k] + 0.5 * dt * lap + dt * s.source[i * d + k];
        }
        s.rhs[n - 1] = w.e[k];
        let sol = linalg::solve_tridiag(&s.lower, &s.diag, &s.upper, &s.rhs);
        for i in 0..n {
            out.values[i * d + k] = sol[i];
        }
    }
    if !out.values.iter().all(|v| v.is_finite()) {
        return Err(Error::BlowUp { time: 0.0 });
    }
    Ok(())
}

#[inline]
fn laplacian(values: &[f64], i: usize, k: usize, n: usize, d: usize, dx: f64, _e: &[f64]) -> f64 {
    let dx2 = dx * dx;
    if i == 0 {
        2.0 * (values[d + k] - values[k]) / dx2
    } else if i == n - 1 {
        0.0 // pinned row, never used for the update
    } else {
        (values[(i + 1) * d + k] - 2.0 * values[i * d + k] + values[(i - 1) * d + k]) / dx2
    }
}

/// Run the full simulation, populating the trace at each snapshot time.
pub fn simulate(p: &PotentialSpec, ic: &GridProfile, cfg: &SimConfig) -> Result<InvasionTrace> {
    cfg.validate()?;
    let d = p.dim();
    if ic.d != d {
        return Err(Error::InvalidInput(String::from(
            "initial condition dimension mismatch",
        )));
    }
    // right end must start pinned
    if math::sqrt(ic.dev_sq(ic.n() - 1)) > 1e-12 {
        return Err(Error::InvalidInput(String::from(
            "initial condition not pinned to e at the right boundary",
        )));
    }

    let n = ic.n();
    let steps_per_snap = (cfg.snapshot_stride / cfg.dt).round().max(1.0) as usize;
    let n_snaps = (cfg.t_final / cfg.snapshot_stride).round() as usize;

    let mut trace = InvasionTrace {
        dx: cfg.dx,
        times: Vec::new(),
        xbar: Vec::new(),
        xhat: Vec::new(),
        tracks: cfg
            .tracked_speeds
            .iter()
            .map(|&c| SpeedTrack {
                c,
                xi_bar: Vec::new(),
                energy: Vec::new(),
                dissipation: Vec::new(),
                ehat: Vec::new(),
                f_kin: Vec::new(),
                diss_integral: Vec::new(),
                bal_energy: Vec::new(),
                bal_integral: Vec::new(),
            })
            .collect(),
        snapshots: Vec::new(),
        aborted: None,
    };

    let mut u = ic.clone();
    let mut next = ic.clone();
    let mut scratch = StepScratch::new(n, d, cfg.dx, cfg.dt);
    let mut t = 0.0;

    record_snapshot(&mut trace, &u, t, p, cfg, &[], &[])?;
    let mut diss_acc = vec![0.0; cfg.tracked_speeds.len()];
    let mut bal_acc = vec![0.0; cfg.tracked_speeds.len()];
    'run: for _snap in 0..n_snaps {
        for a in &mut diss_acc {
            *a = 0.0;
        }
        for a in &mut bal_acc {
            *a = 0.0;
        }
        // reference for the interval's dissipation accumulation: the
        // interval-start invasion point (or 0 without one)
        let ref_xbar = trace.xbar.last().copied().flatten().unwrap_or(0.0);
        let t_ref = t;
        for _s in 0..steps_per_snap {
            step_into(&u, p, cfg.dt, 0.0, &mut scratch, &mut next)
                .map_err(|_| Error::BlowUp { time: t })?;
            accumulate_dissipation(
                &u,
                &next,
                cfg,
                t + 0.5 * cfg.dt - t_ref,
                ref_xbar,
                &mut diss_acc,
            );
            accumulate_balance(&u, &next, cfg, ref_xbar, &mut bal_acc);
            core::mem::swap(&mut u, &mut next);
            t += cfg.dt;
        }
        record_snapshot(&mut trace, &u, t, p, cfg, &diss_acc, &bal_acc)?;
        if let Some(x) = trace.xbar.last().copied().flatten() {
            if x > cfg.length - cfg.margin {
                trace.aborted = Some((t, x));
                break 'run;
            }
        }
    }
    Ok(trace)
}

/// Weighted `|v_t|^2` integral of one step, by the midpoint rule in time:
/// `v_t = (u1 - u0)/dt + c * u_x(half)`. The weight is referenced at the
/// interval-start frame point `ref_xbar - c t_ref`: in lab coordinates
/// `exp(c (x - ref_xbar) - c^2 (t_half - t_ref))` — the `c^2` factor is
/// what makes a fixed frame reference out of a fixed lab one.
fn accumulate_dissipation(
    u0: &GridProfile,
    u1: &GridProfile,
    cfg: &SimConfig,
    t_half_minus_t_ref: f64,
    ref_xbar: f64,
    acc: &mut [f64],
) {
    let n = u0.n();
    let d = u0.d;
    let dx = u0.dx;
    let inv_dt = 1.0 / cfg.dt;
    for (ci, &c) in cfg.tracked_speeds.iter().enumerate() {
        let mut integral = 0.0;
        let frame_shift = -c * c * t_half_minus_t_ref;
        for i in 0..n {
            let exponent = c * (u0.x(i) - ref_xbar) + frame_shift;
            if exponent > 700.0 {
                break; // the remaining contributions cannot be represented
            }
            let wgt = math::exp(exponent);
            let tw = if i == 0 || i == n - 1 { 0.5 * dx } else { dx };
            let mut vtsq = 0.0;
            for k in 0..d {
                let ut = (u1.values[i * d + k] - u0.values[i * d + k]) * inv_dt;
                let ux = if i == 0 || i == n - 1 {
                    0.0
                } else {
                    let h0 = 0.5 * (u0.values[(i + 1) * d + k] + u1.values[(i + 1) * d + k]);
                    let h1 = 0.5 * (u0.values[(i - 1) * d + k] + u1.values[(i - 1) * d + k]);
                    (h0 - h1) / (2.0 * dx)
                };
                let vt = ut + c * ux;
                vtsq += vt * vt;
            }
            integral += tw * wgt * vtsq;
        }
        acc[ci] += cfg.dt * integral;
    }
}

/// Rate of the geometric grid weight `rho^{(x - x_ref)/dx}` with
/// `rho = (1 + c dx/2)/(1 - c dx/2)`: the diagonal Pade approximant of
/// `e^{c dx}`, for which the staggered discrete integration by parts
/// reproduces the scheme's Laplacian-plus-advection exactly.
fn balance_rate(c: f64, dx: f64) -> f64 {
    let theta = 0.5 * c * dx;
    math::ln((1.0 + theta) / (1.0 - theta)) / dx
}

/// `raw * e^{lw}` evaluated in log space so that a huge weight against a
/// vanishing integrand stays finite instead of producing `0 * inf`.
fn log_weighted(lw: f64, raw: f64) -> f64 {
    if raw == 0.0 {
        return 0.0;
    }
    let s = lw + math::ln(math::abs(raw));
    if s < -700.0 {
        return 0.0;
    }
    if raw > 0.0 {
        math::exp(s)
    } else {
        -math::exp(s)
    }
}

/// Discrete-balance energy: `sum_edges W_i (1 + c dx/2) |du|^2 / (2 dx) +
/// sum_i W_i (V(u_i) - V(e)) dx` with the geometric weight `W_i =
/// rho^{(x_i - x_ref)/dx}`. Along the semidiscrete flow its exact time
/// derivative is `-sum W u_t (u_t + c u_x)`, so the defect against
/// `bal_integral` is pure time-discretization error.
fn discrete_balance_energy(u: &GridProfile, c: f64, p: &PotentialSpec, x_ref: f64) -> f64 {
    let n = u.n();
    let d = u.d;
    let dx = u.dx;
    let theta = 0.5 * c * dx;
    let lam = balance_rate(c, dx);
    let ve = p.value(&u.e);
    let mut acc = 0.0;
    for i in 0..n {
        let lw = lam * (u.x(i) - x_ref);
        if u.dev_sq(i) > 0.0 {
            let mut qv = p.value(u.node(i)) - ve;
            // suppress cancellation noise of V(u) - V(e) far in the
            // invaded tail, where the weight would amplify it
            if math::abs(qv) <= 1e-13 * math::abs(ve) {
                qv = 0.0;
            }
            acc += log_weighted(lw, qv * dx);
        }
        if i + 1 < n {
            let mut dsq = 0.0;
            for k in 0..d {
                let du = u.values[(i + 1) * d + k] - u.values[i * d + k];
                dsq += du * du;
            }
            acc += log_weighted(lw, 0.5 * (1.0 + theta) * dsq / dx);
        }
    }
    acc
}

/// One step of the discrete energy production `sum_i W_i u_t (u_t + c u_x)
/// dx` (midpoint in time), the exact negated rate of change of
/// `discrete_balance_energy` up to O(dt^2) per unit time.
fn accumulate_balance(
    u0: &GridProfile,
    u1: &GridProfile,
    cfg: &SimConfig,
    ref_xbar: f64,
    acc: &mut [f64],
) {
    let n = u0.n();
    let d = u0.d;
    let dx = u0.dx;
    let inv_dt = 1.0 / cfg.dt;
    for (ci, &c) in cfg.tracked_speeds.iter().enumerate() {
        let lam = balance_rate(c, dx);
        let mut total = 0.0;
        // the pinned right node has u_t = 0 and drops out
        for i in 0..n - 1 {
            let lw = lam * (u0.x(i) - ref_xbar);
            let mut prod = 0.0;
            for k in 0..d {
                let ut = (u1.values[i * d + k] - u0.values[i * d + k]) * inv_dt;
                // central derivative of the half-time average; zero at the
                // mirrored left boundary
                let ux = if i == 0 {
                    0.0
                } else {
                    let h0 = 0.5 * (u0.values[(i + 1) * d + k] + u1.values[(i + 1) * d + k]);
                    let h1 = 0.5 * (u0.values[(i - 1) * d + k] + u1.values[(i - 1) * d + k]);
                    (h0 - h1) / (2.0 * dx)
                };
                prod += ut * (ut + c * ux);
            }
            total += log_weighted(lw, prod * dx);
        }
        acc[ci] += cfg.dt * total;
    }
}

fn record_snapshot(
    trace: &mut InvasionTrace,
    u: &GridProfile,
    t: f64,
    p: &PotentialSpec,
    cfg: &SimConfig,
    diss_acc: &[f64],
    bal_acc: &[f64],
) -> Result<()> {
    let xbar = invasion_point(u, cfg.delta_stab);
    let xhat = invasion_point(u, cfg.delta_hess);
    trace.times.push(t);
    trace.xbar.push(xbar);
    trace.xhat.push(xhat);
    for (ci, track) in trace.tracks.iter_mut().enumerate() {
        let c = track.c;
        match xbar {
            Some(x) => {
                let en = profile::energy(u, c, p, x)?;
                let dd = profile::dissipation_functional(u, c, p, x)?;
                let xh = xhat.unwrap_or(x);
                track.xi_bar.push(x - c * t);
                track.energy.push(en.value);
                track.dissipation.push(dd);
                track.ehat.push(en.value * math::exp(c * (x - xh)));
                track.f_kin.push(en.kinetic);
                track.bal_energy.push(discrete_balance_energy(u, c, p, x));
            }
            None => {
                track.xi_bar.push(f64::NAN);
                track.energy.push(f64::NAN);
                track.dissipation.push(f64::NAN);
                track.ehat.push(f64::NAN);
                track.f_kin.push(f64::NAN);
                track.bal_energy.push(f64::NAN);
            }
        }
        track
            .diss_integral
            .push(diss_acc.get(ci).copied().unwrap_or(0.0));
        track
            .bal_integral
            .push(bal_acc.get(ci).copied().unwrap_or(0.0));
    }
    if cfg.store_profiles {
        trace.snapshots.push((t, u.clone()));
    }
    Ok(())
}

/// Max over consecutive snapshot pairs of `|dE_c + int D_c dt| / (|dE_c| +
/// |int D_c dt| + eps)`, computed on the discrete-balance energy and its
/// exactly matched per-step production integral; both snapshot energies
/// are re-referenced to the interval-start invasion point by the exact
/// geometric-weight factor. The spatial discretizations cancel by
/// construction, so the defect is O(dt^2).
pub fn energy_balance_check(trace: &InvasionTrace, c: f64) -> Result<f64> {
    let track = trace
        .track(c)
        .ok_or_else(|| Error::InvalidInput(format!("speed {c} not tracked")))?;
    let lam = balance_rate(c, trace.dx);
    let mut worst = 0.0_f64;
    for k in 0..trace.times.len().saturating_sub(1) {
        let (Some(x0), Some(x1)) = (trace.xbar[k], trace.xbar[k + 1]) else {
            continue;
        };
        let e0 = track.bal_energy[k];
        let e1 = track.bal_energy[k + 1] * math::exp(lam * (x1 - x0));
        let de = e1 - e0;
        let dint = track.bal_integral[k + 1];
        let defect = math::abs(de + dint) / (math::abs(de) + math::abs(dint) + 1e-300);
        if defect > worst {
            worst = defect;
        }
    }
    Ok(worst)
}

/// Least-squares slope of `xbar(t)` over the trailing `window_fraction` of
/// the run. Returns `(speed, confidence)` with confidence = residual RMS
/// divided by the window length (smaller is better).
pub fn fit_invasion_speed(trace: &InvasionTrace, window_fraction: f64) -> Result<(f64, f64)> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidInput(String::from(
            "window fraction must lie in (0, 1]",
        )));
    }
    let t_end = *trace
        .times
        .last()
        .ok_or_else(|| Error::InvalidInput(String::from("empty trace")))?;
    let t_start = trace.times[0];
    let t_cut = t_end - window_fraction * (t_end - t_start);
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    for (k, &t) in trace.times.iter().enumerate() {
        if t >= t_cut {
            if let Some(x) = trace.xbar[k] {
                ts.push(t);
                xs.push(x);
            }
        }
    }
    if ts.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "only {} invasion points in the fit window (need 10)",
            ts.len()
        )));
    }
    let slope = crate::wave::fit_slope(&ts, &xs)?;
    // residual RMS around the fitted line
    let nf = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / nf;
    let mx = xs.iter().sum::<f64>() / nf;
    let mut ss = 0.0;
    for i in 0..ts.len() {
        let r = xs[i] - (mx + slope * (ts[i] - mt));
        ss += r * r;
    }
    let rms = math::sqrt(ss / nf);
    let window = ts.last().unwrap() - ts[0];
    Ok((slope, rms / window))
}

/// Verdict of one travelling-frame run at a candidate speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameVerdict {
    /// Energy dropped below the negativity threshold — conclusive
    /// membership of the small-speed regime.
    NegativeEnergy,
    /// Energy stayed nonnegative and flat for the plateau window —
    /// one-sided evidence for the large-speed regime.
    Plateau,
    Ambiguous,
}

impl FrameVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameVerdict::NegativeEnergy => "negative-energy",
            FrameVerdict::Plateau => "plateau",
            FrameVerdict::Ambiguous => "ambiguous",
        }
    }
}

/// Thresholds of the energy-sign bisection.
#[derive(Debug, Clone, Copy)]
pub struct NonlinOpts {
    /// Target bracket width.
    pub resolution: f64,
    /// Relative negativity threshold (scaled by `|V(u_-)| / c`).
    pub tol_neg: f64,
    /// Plateau observation window in time units.
    pub t_plateau: f64,
    /// Relative `|dE/dt|` bound defining a plateau.
    pub plateau_slope: f64,
}

impl Default for NonlinOpts {
    fn default() -> Self {
        NonlinOpts {
            resolution: 0.02,
            tol_neg: 1e-6,
            t_plateau: 50.0,
            plateau_slope: 1e-8,
        }
    }
}

/// Refined bracket with per-speed verdicts.
#[derive(Debug, Clone)]
pub struct NonlinEstimate {
    pub lo: f64,
    pub hi: f64,
    pub verdicts: Vec<(f64, FrameVerdict)>,
    pub warning: Option<String>,
}

/// Evolve `v_t = v_xixi + c v_xi - grad V(v)` from a standard plateau seed
/// and classify the speed by the sign behaviour of `E_c` (referenced at
/// the moving invasion point; the sign is reference-independent).
pub fn frame_verdict(
    p: &PotentialSpec,
    u_minus: &[f64],
    c: f64,
    cfg: &SimConfig,
    opts: &NonlinOpts,
) -> Result<FrameVerdict> {
    cfg.validate()?;
    let d = p.dim();
    let n = cfg.n_nodes();
    // seed: plateau at u_- on the left third, smooth ramp to e
    let ramp_at = cfg.length / 3.0;
    let mut values = vec![0.0; n * d];
    let e_vec = seed_reference(p, u_minus)?;
    for i in 0..n {
        let x = i as f64 * cfg.dx;
        let chi = profile::smooth_step_down((x - ramp_at) / 5.0);
        for k in 0..d {
            values[i * d + k] = e_vec[k] + chi * (u_minus[k] - e_vec[k]);
        }
    }
    let mut u = GridProfile::new(0.0, cfg.dx, d, values, e_vec.clone())?;
    let mut next = u.clone();
    let mut scratch = StepScratch::new(n, d, cfg.dx, cfg.dt);

    let scale = math::abs(p.value(u_minus) - p.value(&e_vec)).max(1e-6) / c;
    let neg_threshold = -opts.tol_neg * scale;
    let steps_per_snap = (cfg.snapshot_stride / cfg.dt).round().max(1.0) as usize;
    let n_snaps = (cfg.t_final / cfg.snapshot_stride).round() as usize;

    // (time, energy, invasion point) per snapshot
    let mut history: Vec<(f64, f64, Option<f64>)> = Vec::new();
    let mut t = 0.0;
    let mut last_ref = ramp_at;
    for snap in 0..=n_snaps {
        if snap > 0 {
            for _ in 0..steps_per_snap {
                step_into(&u, p, cfg.dt, c, &mut scratch, &mut next)
                    .map_err(|_| Error::BlowUp { time: t })?;
                core::mem::swap(&mut u, &mut next);
                t += cfg.dt;
            }
        }
        let xbar = invasion_point(&u, cfg.delta_stab);
        let xref = xbar.unwrap_or(last_ref);
        last_ref = xref;
        if xref > cfg.length - cfg.margin {
            return Err(Error::DomainExhausted {
                time: t,
                position: xref,
            });
        }
        let en = profile::energy(&u, c, p, xref)?;
        if en.value < neg_threshold {
            return Ok(FrameVerdict::NegativeEnergy);
        }
        history.push((t, en.value, xbar));
        // large-speed evidence over the trailing window: the energy never
        // came close to negative, and either it is flat (the frame has
        // drained to the invaded state) or the invasion point is in net
        // recession (the frame outruns the invasion)
        // burn-in of two windows keeps the seed-adjustment transient
        // (which recedes for a while even at subcritical speeds, before
        // the front has formed) out of the recession test
        let window_start = t - opts.t_plateau;
        if window_start >= 2.0 * opts.t_plateau {
            let in_window: Vec<&(f64, f64, Option<f64>)> = history
                .iter()
                .filter(|(tt, _, _)| *tt >= window_start)
                .collect();
            if in_window.len() >= 3 {
                let nonneg = in_window.iter().all(|(_, ev, _)| *ev >= neg_threshold);
                let flat = in_window.windows(2).all(|pair| {
                    let dt = pair[1].0 - pair[0].0;
                    math::abs(pair[1].1 - pair[0].1) / dt.max(1e-12)
                        < opts.plateau_slope * scale.max(1.0)
                });
                let min_x = in_window
                    .iter()
                    .filter_map(|(_, _, x)| *x)
                    .fold(f64::INFINITY, f64::min);
                let receding = match (in_window[0].2, in_window[in_window.len() - 1].2) {
                    // net recession that is still in progress at the end
                    (Some(x_first), Some(x_last)) => {
                        x_last < x_first - cfg.dx && x_last <= min_x + cfg.dx
                    }
                    // invasion point vanished during the window: drained
                    (Some(_), None) | (None, None) => true,
                    (None, Some(_)) => false,
                };
                if nonneg && (flat || receding) {
                    return Ok(FrameVerdict::Plateau);
                }
            }
        }
    }
    Ok(FrameVerdict::Ambiguous)
}

/// The invaded state for the frame seed: the critical point nearest the
/// origin of the deviation scale, found by Newton from 0.
fn seed_reference(p: &PotentialSpec, _u_minus: &[f64]) -> Result<Vec<f64>> {
    let d = p.dim();
    let guess = vec![0.0; d];
    let cp = p.find_critical_point(&guess)?;
    Ok(cp.location)
}

/// Bisection on the frame verdict. `bracket.0` must classify as
/// negative-energy and `bracket.1` as plateau. The split point need not be
/// the midpoint for the bracket to stay valid, so an ambiguous verdict is
/// retried at other interior points; only when all probes stay ambiguous
/// does the refinement stop, returning the current (wide) bracket with a
/// warning.
pub fn estimate_c_nonlin(
    p: &PotentialSpec,
    u_minus: &[f64],
    bracket: (f64, f64),
    cfg: &SimConfig,
    opts: &NonlinOpts,
) -> Result<NonlinEstimate> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidInput(String::from("bracket must satisfy 0 < lo < hi")));
    }
    let mut verdicts = Vec::new();
    let v_lo = frame_verdict(p, u_minus, lo, cfg, opts)?;
    verdicts.push((lo, v_lo));
    if v_lo != FrameVerdict::NegativeEnergy {
        return Err(Error::BracketFailure(format!(
            "lower bracket end {lo} does not certify negative energy (got {})",
            v_lo.as_str()
        )));
    }
    let v_hi = frame_verdict(p, u_minus, hi, cfg, opts)?;
    verdicts.push((hi, v_hi));
    if v_hi == FrameVerdict::NegativeEnergy {
        return Err(Error::BracketFailure(format!(
            "upper bracket end {hi} still certifies negative energy"
        )));
    }
    let mut warning = None;
    // the tolerance keeps a bracket of nominal width `resolution` from
    // triggering one extra split through floating-point round-off
    'refine: while hi - lo > opts.resolution * (1.0 + 1e-9) {
        let mut decided = false;
        for frac in [0.5, 0.382, 0.618, 0.25, 0.75] {
            let mid = lo + frac * (hi - lo);
            let v = frame_verdict(p, u_minus, mid, cfg, opts)?;
            verdicts.push((mid, v));
            match v {
                FrameVerdict::NegativeEnergy => {
                    lo = mid;
                    decided = true;
                    break;
                }
                FrameVerdict::Plateau => {
                    hi = mid;
                    decided = true;
                    break;
                }
                FrameVerdict::Ambiguous => {}
            }
        }
        if !decided {
            warning = Some(format!(
                "all probes of ({lo}, {hi}) stayed ambiguous; bracket left at width {}",
                hi - lo
            ));
            break 'refine;
        }
    }
    Ok(NonlinEstimate {
        lo,
        hi,
        verdicts,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fisher() -> PotentialSpec {
        PotentialSpec::fisher(0.25).unwrap()
    }

    fn bump_ic(cfg: &SimConfig, height: f64, width: f64) -> GridProfile {
        GridProfile::from_fn(0.0, cfg.dx, cfg.n_nodes(), 0.0, |x| {
            height * profile::smooth_step_down((x - width) / 5.0)
        })
        .unwrap()
    }

    #[test]
    fn equilibrium_is_fixed() {
        let p = fisher();
        let w = GridProfile::from_fn(0.0, 0.1, 201, 0.0, |_| 0.0).unwrap();
        let out = step(&w, &p, 5e-3, 0.0, 0.0).unwrap();
        for v in &out.values {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn cn_amplification_of_sine_mode() {
        // V = 0: pure Crank–Nicolson; a discrete cosine eigenmode shrinks
        // by exactly (1 - kappa) / (1 + kappa)
        let p = PotentialSpec::quadratic(1, 0.0).unwrap();
        let n = 401usize;
        let dx = 0.1;
        let dt = 5e-3;
        let length = (n - 1) as f64 * dx;
        // zero-flux-compatible cosine vanishing at the right boundary
        let kx = core::f64::consts::PI * 2.5 / length; // cos(k L) = 0
        let w = GridProfile::from_fn(0.0, dx, n, 0.0, |x| libm::cos(kx * x)).unwrap();
        let out = step(&w, &p, dt, 0.0, 0.0).unwrap();
        let k_eff_sq = (2.0 - 2.0 * libm::cos(kx * dx)) / (dx * dx);
        let kappa = dt * k_eff_sq / 2.0;
        let expect = (1.0 - kappa) / (1.0 + kappa);
        for i in 1..n - 1 {
            let ratio = out.values[i] / w.values[i];
            if w.values[i].abs() > 0.2 {
                assert!((ratio - expect).abs() < 1e-10, "node {i}: {ratio} vs {expect}");
            }
        }
    }

    #[test]
    fn linear_reaction_growth_rate() {
        // tiny constant state far from the pinned boundary grows like
        // exp(dt) per step up to O(dt^3) and nonlinear corrections
        let p = fisher();
        let dt = 5e-3;
        let w = GridProfile::from_fn(0.0, 0.1, 4001, 0.0, |_| 1e-6).unwrap();
        let out = step(&w, &p, dt, 0.0, 0.0).unwrap();
        let mid = 2000;
        let ratio = out.values[mid] / w.values[mid];
        assert!(
            (ratio - math::exp(dt)).abs() < 1e-7,
            "ratio {ratio} vs {}",
            math::exp(dt)
        );
    }

    #[test]
    fn invasion_point_cases() {
        let w = GridProfile::from_fn(0.0, 0.1, 101, 0.0, |_| 0.0).unwrap();
        assert!(invasion_point(&w, 0.1).is_none());

        // single node above the level: crossing interpolated to its right
        let mut w2 = w.clone();
        let delta = 0.1;
        w2.node_mut(50)[0] = 2.0 * delta;
        let x = invasion_point(&w2, delta).unwrap();
        assert!(x > w2.x(50) && x < w2.x(51), "x = {x}");
        // crossing of the linear interpolant: dev 0.2 -> 0.0 hits 0.1 halfway
        assert!((x - (w2.x(50) + 0.05)).abs() < 1e-12);

        // monotone front: |w(xbar)| = delta within interpolation error
        let front = GridProfile::from_fn(0.0, 0.1, 201, 0.0, |x| {
            1.0 / (1.0 + math::exp(1.3 * (x - 10.0)))
        })
        .unwrap();
        let x = invasion_point(&front, 0.2).unwrap();
        let val = 1.0 / (1.0 + math::exp(1.3 * (x - 10.0)));
        assert!((val - 0.2).abs() < 2e-3, "val = {val}");
    }

    #[test]
    fn config_invariants_enforced() {
        let mut cfg = SimConfig::new(2.1, 0.12, 0.04);
        cfg.margin = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::new(2.1, 0.04, 0.12); // radii swapped
        cfg.margin = 30.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn no_invasion_for_equilibrium_ic() {
        let p = fisher();
        let mut cfg = SimConfig::new(2.1, 0.119, 0.0379);
        cfg.length = 40.0;
        cfg.t_final = 2.0;
        cfg.margin = 2.0;
        let ic = GridProfile::from_fn(0.0, cfg.dx, cfg.n_nodes(), 0.0, |_| 0.0).unwrap();
        let trace = simulate(&p, &ic, &cfg).unwrap();
        assert!(trace.no_invasion());
        assert!(fit_invasion_speed(&trace, 0.5).is_err());
    }

    #[test]
    fn short_run_invariants() {
        let p = fisher();
        let mut cfg = SimConfig::new(2.1, 0.119, 0.0379);
        cfg.length = 80.0;
        cfg.t_final = 10.0;
        cfg.tracked_speeds = vec![2.0, 3.0 / core::f64::consts::SQRT_2];
        let ic = bump_ic(&cfg, 1.0, 20.0);
        let trace = simulate(&p, &ic, &cfg).unwrap();
        assert!(trace.aborted.is_none());
        // xbar <= xhat wherever both exist
        for k in 0..trace.times.len() {
            if let (Some(a), Some(b)) = (trace.xbar[k], trace.xhat[k]) {
                assert!(a <= b + 1e-12, "t = {}", trace.times[k]);
            }
        }
        // energy monotone under a common frame reference
        for track in &trace.tracks {
            for k in 1..trace.times.len() {
                let (Some(x0), Some(x1)) = (trace.xbar[k - 1], trace.xbar[k]) else {
                    continue;
                };
                let dt_snap = trace.times[k] - trace.times[k - 1];
                let c = track.c;
                let e0 = track.energy[k - 1];
                let e1 = track.energy[k] * math::exp(c * (x1 - x0) - c * c * dt_snap);
                assert!(
                    e1 <= e0 + 1e-6 * (1.0 + e0.abs()),
                    "c = {}, t = {}: {e1} > {e0}",
                    track.c,
                    trace.times[k]
                );
            }
        }
        // the discrete balance cancels the spatial error by construction,
        // so even this short run is accurate to time-discretization level
        let defect = energy_balance_check(&trace, 2.0).unwrap();
        assert!(defect < 1e-3, "defect = {defect}");
    }

    #[test]
    fn fit_exact_line() {
        let mut trace = InvasionTrace {
            dx: 0.1,
            times: Vec::new(),
            xbar: Vec::new(),
            xhat: Vec::new(),
            tracks: Vec::new(),
            snapshots: Vec::new(),
            aborted: None,
        };
        for k in 0..40 {
            let t = k as f64 * 0.5;
            trace.times.push(t);
            trace.xbar.push(Some(3.0 + 1.75 * t));
            trace.xhat.push(Some(3.5 + 1.75 * t));
        }
        let (c, conf) = fit_invasion_speed(&trace, 0.5).unwrap();
        assert!((c - 1.75).abs() < 1e-12);
        assert!(conf < 1e-12);
    }

    #[test]
    fn tiny_speed_certifies_negative_energy() {
        let p = fisher();
        let mut cfg = SimConfig::new(2.1, 0.119, 0.0379);
        cfg.length = 60.0;
        cfg.t_final = 20.0;
        cfg.margin = 10.0;
        let v = frame_verdict(&p, &[1.0], 0.1, &cfg, &NonlinOpts::default()).unwrap();
        assert_eq!(v, FrameVerdict::NegativeEnergy);
    }

    #[test]
    fn supercritical_speed_plateaus() {
        let p = fisher();
        let mut cfg = SimConfig::new(2.1, 0.119, 0.0379);
        cfg.length = 120.0;
        cfg.t_final = 180.0;
        let c = math::sqrt(6.0) + 0.1; // above the quadratic-hull speed
        let v = frame_verdict(&p, &[1.0], c, &cfg, &NonlinOpts::default()).unwrap();
        assert_eq!(v, FrameVerdict::Plateau);
    }
}
