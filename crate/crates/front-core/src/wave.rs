//! Travelling-wave profiles `phi'' = -c phi' + grad V(phi)`: steep-manifold
//! initial conditions, backward shooting, pushed-front bisection in the
//! speed, steepness fits and the energy identities of connected fronts.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::ode::{self, Control, OdeOpts};
use crate::potential::{CriticalPoint, PotentialSpec};
use crate::speeds::{self, RadiusScanOpts};

/// How a backward shot from the steep tail ended.
#[derive(Debug, Clone, PartialEq)]
pub enum ShotStatus {
    /// Entered the connection ball around the target minimum.
    Connected,
    /// Passed beyond the target minimum while still moving toward it.
    Overshoot,
    /// Turned around (phi' vanished) before reaching the target.
    Undershoot,
    /// Left the escape ball.
    Escaped,
    /// Reached the end of the sweep without any verdict.
    Ambiguous,
}

impl ShotStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShotStatus::Connected => "connected",
            ShotStatus::Overshoot => "overshoot",
            ShotStatus::Undershoot => "undershoot",
            ShotStatus::Escaped => "escaped",
            ShotStatus::Ambiguous => "ambiguous",
        }
    }
}

/// Steepness fit verdict with the margin rule around `-c/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushedVerdict {
    Pushed,
    NotPushed,
    Ambiguous,
}

#[derive(Debug, Clone, Copy)]
pub struct SteepnessFit {
    pub lambda_hat: f64,
    /// Deviation-magnitude window the fit used.
    pub window: (f64, f64),
    pub samples: usize,
    pub verdict: PushedVerdict,
}

/// A sampled travelling-wave trajectory, stored with `xi` increasing.
#[derive(Debug, Clone)]
pub struct FrontProfile {
    pub c: f64,
    pub d: usize,
    pub xi: Vec<f64>,
    /// Node-major `phi` samples, `xi.len() * d` scalars.
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub status: ShotStatus,
    pub steepness: Option<SteepnessFit>,
    /// Shooting amplitude on the steep manifold.
    pub epsilon: f64,
    /// Unit direction in eigen-coordinates on the sphere around `e`.
    pub direction: Vec<f64>,
    /// Closest approach to the target `(u_-, 0)` over the sweep.
    pub min_target_dist: f64,
}

impl FrontProfile {
    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn phi_at(&self, i: usize) -> &[f64] {
        &self.phi[i * self.d..(i + 1) * self.d]
    }

    pub fn dphi_at(&self, i: usize) -> &[f64] {
        &self.dphi[i * self.d..(i + 1) * self.d]
    }

    /// Deviation magnitude `|phi_i - e|`.
    pub fn dev(&self, i: usize, e: &[f64]) -> f64 {
        math::sqrt(
            self.phi_at(i)
                .iter()
                .zip(e)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }

    /// Max central-difference residual `|phi'' + c phi' - grad V|` over
    /// interior check nodes (limited by the sampling step, not the
    /// integrator tolerance).
    pub fn max_ode_residual(&self, p: &PotentialSpec) -> f64 {
        let n = self.n();
        let mut worst = 0.0_f64;
        for i in 1..n - 1 {
            let h = self.xi[i + 1] - self.xi[i - 1];
            if h <= 0.0 {
                continue;
            }
            let g = p.gradient(self.phi_at(i));
            for k in 0..self.d {
                let d2 = (self.dphi_at(i + 1)[k] - self.dphi_at(i - 1)[k]) / h;
                let r = math::abs(d2 + self.c * self.dphi_at(i)[k] - g[k]);
                if r > worst {
                    worst = r;
                }
            }
        }
        worst
    }
}

/// Search and integration options for pushed-front shooting.
#[derive(Debug, Clone)]
pub struct FrontSearchOpts {
    /// Steep-manifold amplitude; computed as `1e-6 * delta_hess` at the
    /// lower bracket speed when absent.
    pub epsilon: Option<f64>,
    pub tol_conn: f64,
    /// Escape radius; `10 (1 + max |critical point|)` proxy when absent.
    pub r_esc: Option<f64>,
    pub c_tol: f64,
    /// Length of the backward sweep in `xi`.
    pub xi_max: f64,
    /// Largest sampling step of the sweep.
    pub h_max: f64,
}

impl Default for FrontSearchOpts {
    fn default() -> Self {
        FrontSearchOpts {
            epsilon: None,
            tol_conn: 1e-8,
            r_esc: None,
            c_tol: 1e-7,
            xi_max: 200.0,
            h_max: 0.02,
        }
    }
}

/// First-order steep-manifold parametrization at the invaded point:
/// `phi0 = e + eps sum_j s_j u_j`, `phi0' = eps sum_j s_j lambda_{c,-}(mu_j) u_j`.
/// Rejects `c <= c_lin`, where the steep branch is not real-separated.
pub fn steep_ic(
    e: &CriticalPoint,
    c: f64,
    eps: f64,
    s: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if c <= e.c_lin {
        return Err(Error::InvalidInput(format!(
            "speed {c} does not exceed the linear speed {}; steep branch not real-separated",
            e.c_lin
        )));
    }
    let d = e.location.len();
    if s.len() != d {
        return Err(Error::InvalidInput(String::from("direction has wrong dimension")));
    }
    let mut phi0 = e.location.clone();
    let mut dphi0 = vec![0.0; d];
    for (j, (mu, uj)) in e.curvatures.iter().zip(&e.eigenvectors).enumerate() {
        let (lm, _) = speeds::lambda_pm(c, *mu);
        if !lm.is_real() {
            return Err(Error::InvalidInput(format!(
                "lambda_-(mu_{j}) is complex at c = {c}"
            )));
        }
        for k in 0..d {
            phi0[k] += eps * s[j] * uj[k];
            dphi0[k] += eps * s[j] * lm.re * uj[k];
        }
    }
    Ok((phi0, dphi0))
}

/// Integrate the first-order travelling-wave system from `(phi0, dphi0)`
/// at `xi0` to `xi1` (either direction), sampling every accepted step.
/// Stops with [`ShotStatus::Escaped`] when `|phi| > r_esc`.
pub fn integrate_profile(
    p: &PotentialSpec,
    c: f64,
    ic: (&[f64], &[f64]),
    xi_span: (f64, f64),
    tol: f64,
    r_esc: f64,
    h_max: f64,
) -> Result<FrontProfile> {
    let d = p.dim();
    let mut y0 = ic.0.to_vec();
    y0.extend_from_slice(ic.1);
    let opts = OdeOpts {
        rtol: tol,
        atol: tol * 1e-2,
        h_max,
        ..OdeOpts::default()
    };
    let mut xi = vec![xi_span.0];
    let mut phi = ic.0.to_vec();
    let mut dphi = ic.1.to_vec();
    let mut escaped = false;
    let res = ode::integrate(
        |_t, y, dy| {
            let g = p.gradient(&y[..d]);
            for k in 0..d {
                dy[k] = y[d + k];
                dy[d + k] = -c * y[d + k] + g[k];
            }
        },
        xi_span.0,
        &y0,
        xi_span.1,
        &opts,
        |t, y| {
            xi.push(t);
            phi.extend_from_slice(&y[..d]);
            dphi.extend_from_slice(&y[d..]);
            if math::norm(&y[..d]) > r_esc {
                escaped = true;
                Control::Stop
            } else {
                Control::Continue
            }
        },
    )?;
    let _ = res;
    let mut out = FrontProfile {
        c,
        d,
        xi,
        phi,
        dphi,
        status: if escaped {
            ShotStatus::Escaped
        } else {
            ShotStatus::Ambiguous
        },
        steepness: None,
        epsilon: 0.0,
        direction: vec![0.0; d],
        min_target_dist: f64::INFINITY,
    };
    if xi_span.1 < xi_span.0 {
        reverse_in_place(&mut out);
    }
    Ok(out)
}

fn reverse_in_place(f: &mut FrontProfile) {
    let n = f.xi.len();
    f.xi.reverse();
    let d = f.d;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        for k in 0..d {
            f.phi.swap(i * d + k, j * d + k);
            f.dphi.swap(i * d + k, j * d + k);
        }
    }
}

/// Classify a finished backward sweep by scanning its samples with the
/// scalar phase-plane convention: with `sigma = sign(u_- - e)`, overshoot
/// means `sigma (phi - u_-) > tol_conn` while still moving toward the
/// target, undershoot means `phi'` vanished with `sigma (phi - u_-) <
/// -tol_conn`, connected means the `(u_-, 0)` ball of radius `tol_conn`
/// was entered.
pub fn classify_shot(
    traj: &FrontProfile,
    e: &[f64],
    u_minus: &[f64],
    tol_conn: f64,
    r_esc: f64,
) -> ShotStatus {
    let d = traj.d;
    let sigma = if d == 1 {
        if u_minus[0] >= e[0] {
            1.0
        } else {
            -1.0
        }
    } else {
        1.0
    };
    // backward sweep = decreasing xi; scan from the steep end down
    for i in (0..traj.n()).rev() {
        let phi = traj.phi_at(i);
        let dphi = traj.dphi_at(i);
        let dist = math::sqrt(
            phi.iter()
                .zip(u_minus)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                + math::norm_sq(dphi),
        );
        if dist < tol_conn {
            return ShotStatus::Connected;
        }
        if math::norm(phi) > r_esc {
            return ShotStatus::Escaped;
        }
        if d == 1 {
            let q = sigma * (phi[0] - u_minus[0]);
            if q > tol_conn {
                return ShotStatus::Overshoot;
            }
            if sigma * dphi[0] >= 0.0 && q < -tol_conn {
                return ShotStatus::Undershoot;
            }
        }
    }
    ShotStatus::Ambiguous
}

/// One backward shot from the steep manifold at speed `c`. The observer
/// classifies on the fly and stops as soon as a verdict is reached; the
/// trajectory keeps everything up to (and including) the deciding sample
/// and records the closest approach to `(u_-, 0)`.
pub fn shoot(
    p: &PotentialSpec,
    e: &CriticalPoint,
    u_minus: &[f64],
    c: f64,
    eps: f64,
    opts: &FrontSearchOpts,
) -> Result<FrontProfile> {
    let d = p.dim();
    let r_esc = opts
        .r_esc
        .unwrap_or_else(|| 10.0 * (1.0 + math::norm(&e.location).max(math::norm(u_minus))));
    let sigma = if d == 1 && u_minus[0] < e.location[0] {
        -1.0
    } else {
        1.0
    };
    let s = {
        let mut s = vec![0.0; d];
        // aim the amplitude of the softest eigendirection toward u_-;
        // the eigensolver's sign convention for u_1 is arbitrary
        let u1_sign = if e.eigenvectors[0][0] >= 0.0 { 1.0 } else { -1.0 };
        s[0] = sigma * u1_sign;
        s
    };
    let (phi0, dphi0) = steep_ic(e, c, eps, &s)?;

    let mut y0 = phi0.clone();
    y0.extend_from_slice(&dphi0);
    let ode_opts = OdeOpts {
        rtol: 1e-11,
        atol: 1e-14,
        h_max: opts.h_max,
        ..OdeOpts::default()
    };
    let mut xi = vec![0.0];
    let mut phi = phi0.clone();
    let mut dphi = dphi0.clone();
    let mut status = ShotStatus::Ambiguous;
    let mut min_dist = f64::INFINITY;
    let tol = opts.tol_conn;
    ode::integrate(
        |_t, y, dy| {
            let g = p.gradient(&y[..d]);
            for k in 0..d {
                dy[k] = y[d + k];
                dy[d + k] = -c * y[d + k] + g[k];
            }
        },
        0.0,
        &y0,
        -opts.xi_max,
        &ode_opts,
        |t, y| {
            xi.push(t);
            phi.extend_from_slice(&y[..d]);
            dphi.extend_from_slice(&y[d..]);
            let dist = math::sqrt(
                y[..d]
                    .iter()
                    .zip(u_minus)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    + math::norm_sq(&y[d..]),
            );
            if dist < min_dist {
                min_dist = dist;
            }
            if dist < tol {
                status = ShotStatus::Connected;
                return Control::Stop;
            }
            if math::norm(&y[..d]) > r_esc {
                status = ShotStatus::Escaped;
                return Control::Stop;
            }
            if d == 1 {
                let q = sigma * (y[0] - u_minus[0]);
                if q > tol {
                    status = ShotStatus::Overshoot;
                    return Control::Stop;
                }
                if sigma * y[1] >= 0.0 && q < -tol {
                    status = ShotStatus::Undershoot;
                    return Control::Stop;
                }
            }
            Control::Continue
        },
    )?;
    let mut out = FrontProfile {
        c,
        d,
        xi,
        phi,
        dphi,
        status,
        steepness: None,
        epsilon: eps,
        direction: s,
        min_target_dist: min_dist,
    };
    reverse_in_place(&mut out);
    Ok(out)
}

/// Truncate a profile at its closest approach to `(u_-, 0)` (drops the
/// post-saddle divergence of a near-connection shot).
fn truncate_at_closest(profile: &mut FrontProfile, u_minus: &[f64]) {
    let d = profile.d;
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for i in 0..profile.n() {
        let dist = profile
            .phi_at(i)
            .iter()
            .zip(u_minus)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            + math::norm_sq(profile.dphi_at(i));
        if dist < best_dist {
            best_dist = dist;
            best = i;
        }
    }
    profile.min_target_dist = math::sqrt(best_dist);
    profile.xi.drain(..best);
    profile.phi.drain(..best * d);
    profile.dphi.drain(..best * d);
}

fn shot_sign(status: &ShotStatus) -> Option<i32> {
    match status {
        ShotStatus::Overshoot => Some(1),
        ShotStatus::Undershoot => Some(-1),
        _ => None,
    }
}

/// Bisection in `c` on the overshoot/undershoot classification of backward
/// shots. Scalar potentials only. Returns the near-connection profile at
/// the converged speed with its steepness fit.
pub fn find_pushed_front(
    p: &PotentialSpec,
    e: &CriticalPoint,
    u_minus: &[f64],
    c_bracket: (f64, f64),
    opts: &FrontSearchOpts,
) -> Result<FrontProfile> {
    if p.dim() != 1 {
        return Err(Error::InvalidInput(String::from(
            "pushed-front bisection supports scalar potentials only",
        )));
    }
    let (mut lo, mut hi) = c_bracket;
    if !(lo < hi) || lo <= e.c_lin {
        return Err(Error::InvalidInput(format!(
            "bracket ({lo}, {hi}) must be increasing and above c_lin = {}",
            e.c_lin
        )));
    }
    let eps = match opts.epsilon {
        Some(v) => v,
        None => 1e-6 * speeds::delta_hess(p, &e.location, lo, &RadiusScanOpts::default())?,
    };

    let shot_lo = shoot(p, e, u_minus, lo, eps, opts)?;
    let shot_hi = shoot(p, e, u_minus, hi, eps, opts)?;
    if shot_lo.status == ShotStatus::Connected {
        return finish_profile(shot_lo, e, u_minus, opts);
    }
    if shot_hi.status == ShotStatus::Connected {
        return finish_profile(shot_hi, e, u_minus, opts);
    }
    let (s_lo, s_hi) = match (shot_sign(&shot_lo.status), shot_sign(&shot_hi.status)) {
        (Some(a), Some(b)) if a != b => (a, b),
        (Some(a), Some(b)) if a == b => {
            return Err(Error::BracketFailure(format!(
                "no pushed front detected in bracket ({lo}, {hi}): both ends classify as {}",
                shot_lo.status.as_str()
            )));
        }
        _ => {
            return Err(Error::Inconclusive(format!(
                "ambiguous classification at a bracket end: lo = {}, hi = {}",
                shot_lo.status.as_str(),
                shot_hi.status.as_str()
            )));
        }
    };
    let _ = s_hi;
    // main refinement to the requested tolerance, then a polish phase down
    // to rounding so the returned profile actually reaches the connection
    // ball (the miss distance scales with the bracket width)
    let floor = 1e-15 * hi.max(1.0);
    let mut polishing = false;
    while hi - lo > floor {
        if hi - lo <= opts.c_tol {
            polishing = true;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let shot = shoot(p, e, u_minus, mid, eps, opts)?;
        match (shot_sign(&shot.status), &shot.status) {
            (_, ShotStatus::Connected) => return finish_profile(shot, e, u_minus, opts),
            (Some(s), _) if s == s_lo => lo = mid,
            (Some(_), _) => hi = mid,
            _ if polishing => break, // tolerance already met
            _ => {
                return Err(Error::Inconclusive(format!(
                    "ambiguous classification at c = {mid}"
                )));
            }
        }
    }
    let mid = 0.5 * (lo + hi);
    let shot = shoot(p, e, u_minus, mid, eps, opts)?;
    finish_profile(shot, e, u_minus, opts)
}

/// Attach steepness and connection bookkeeping to the converged shot.
fn finish_profile(
    mut profile: FrontProfile,
    e: &CriticalPoint,
    u_minus: &[f64],
    opts: &FrontSearchOpts,
) -> Result<FrontProfile> {
    if profile.status != ShotStatus::Connected {
        truncate_at_closest(&mut profile, u_minus);
        // at bracket width c_tol the shot misses the saddle by O(c_tol)
        // amplified along the unstable direction, not by tol_conn
        let relaxed = (1e4 * opts.c_tol).max(opts.tol_conn);
        if profile.min_target_dist < relaxed {
            profile.status = ShotStatus::Connected;
        }
    }
    profile.steepness = steepness(&profile, &e.location, (1e-12, 1e-3)).ok();
    Ok(profile)
}

/// Least-squares slope of `ln |phi - e|` against `xi` over the samples
/// whose deviation magnitude lies in `window`, with the pushed-margin
/// verdict around `-c/2` (margin `0.01 c`).
pub fn steepness(
    profile: &FrontProfile,
    e: &[f64],
    window: (f64, f64),
) -> Result<SteepnessFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..profile.n() {
        let dev = profile.dev(i, e);
        if dev > window.0 && dev < window.1 {
            xs.push(profile.xi[i]);
            ys.push(math::ln(dev));
        }
    }
    let lambda_hat = fit_slope(&xs, &ys)?;
    Ok(SteepnessFit {
        lambda_hat,
        window,
        samples: xs.len(),
        verdict: pushed_verdict(lambda_hat, profile.c, 0.01 * profile.c),
    })
}

/// Margin rule: pushed iff the fitted rate is below `-c/2 - margin`,
/// not pushed iff above `-c/2 + margin`, ambiguous in between.
pub fn pushed_verdict(lambda_hat: f64, c: f64, margin: f64) -> PushedVerdict {
    let threshold = -c / 2.0;
    if lambda_hat < threshold - margin {
        PushedVerdict::Pushed
    } else if lambda_hat > threshold + margin {
        PushedVerdict::NotPushed
    } else {
        PushedVerdict::Ambiguous
    }
}

/// Plain least-squares slope.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InvalidInput(String::from(
            "fit window contains fewer than 2 samples",
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    if den == 0.0 {
        return Err(Error::InvalidInput(String::from("degenerate fit abscissae")));
    }
    Ok(num / den)
}

/// Residual of the front energy identity at an auxiliary speed `c'`:
/// `| E_{c'}[phi] - (1 - c/c') K | / |K|` with
/// `K = int e^{c'(xi - xi_ref)} |phi'|^2`. Also returns the signed energy.
/// Requires `0 < c' < 2 |lambda_hat|` (the convergence window of the
/// weighted integrals on the steep tail).
pub fn front_energy_identity(
    profile: &FrontProfile,
    p: &PotentialSpec,
    e: &[f64],
    c_prime: f64,
) -> Result<(f64, f64)> {
    let lambda_hat = profile
        .steepness
        .as_ref()
        .map(|s| s.lambda_hat)
        .ok_or_else(|| Error::InvalidInput(String::from("profile carries no steepness fit")))?;
    if !(c_prime > 0.0 && c_prime < 2.0 * math::abs(lambda_hat)) {
        return Err(Error::InvalidInput(format!(
            "c' = {c_prime} outside the convergence window (0, {})",
            2.0 * math::abs(lambda_hat)
        )));
    }
    let d = profile.d;
    let n = profile.n();
    let ve = p.value(e);
    // reference the weight at the half-gap crossing of the profile
    let gap = profile
        .phi_at(0)
        .iter()
        .zip(e)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    let half = 0.5 * math::sqrt(gap);
    let mut xi_ref = profile.xi[n - 1];
    for i in 0..n {
        if profile.dev(i, e) < half {
            xi_ref = profile.xi[i];
            break;
        }
    }
    // derivative-corrected trapezoid on the adaptive nodes; the stored
    // phi' and the ODE right-hand side give exact integrand derivatives
    let mut kinetic = 0.0;
    let mut energy = 0.0;
    let dens = |i: usize| -> (f64, f64, f64, f64) {
        let w = math::exp(c_prime * (profile.xi[i] - xi_ref));
        let dphi = profile.dphi_at(i);
        let phi = profile.phi_at(i);
        let g = p.gradient(phi);
        let dsq = math::norm_sq(dphi);
        let kin = w * dsq;
        let en = w * (0.5 * dsq + p.value(phi) - ve);
        // d/dxi of each density, using phi'' = -c phi' + grad V
        let ddsq: f64 = (0..d)
            .map(|k| 2.0 * dphi[k] * (-profile.c * dphi[k] + g[k]))
            .sum();
        let dv = math::dot(&g, dphi);
        let kin_d = w * (c_prime * dsq + ddsq);
        let en_d = w * (c_prime * (0.5 * dsq + p.value(phi) - ve) + 0.5 * ddsq + dv);
        (kin, en, kin_d, en_d)
    };
    let mut prev = dens(0);
    for i in 1..n {
        let cur = dens(i);
        let h = profile.xi[i] - profile.xi[i - 1];
        kinetic += 0.5 * h * (prev.0 + cur.0) - h * h / 12.0 * (cur.2 - prev.2);
        energy += 0.5 * h * (prev.1 + cur.1) - h * h / 12.0 * (cur.3 - prev.3);
        prev = cur;
    }
    // tail corrections for the truncated ends.
    // left (wake): the state persists, only the potential density remains
    energy += math::exp(c_prime * (profile.xi[0] - xi_ref))
        * (p.value(profile.phi_at(0)) - ve)
        / c_prime;
    // right (steep tail): the deviation decays like e^{lambda xi}, so both
    // densities decay like e^{2 lambda xi} against the growing weight;
    // the geometric tail converges exactly because c' < 2 |lambda|
    let decay = -(c_prime + 2.0 * lambda_hat); // > 0 inside the window
    let last = dens(n - 1);
    kinetic += last.0 / decay;
    energy += last.1 / decay;
    let target = (1.0 - profile.c / c_prime) * kinetic;
    let residual = math::abs(energy - target) / math::abs(kinetic).max(1e-300);
    Ok((residual, energy))
}

/// Check the unique-crossing / monotone-decay structure of `|phi - e|`
/// right of its `delta`-crossing. Returns the crossing `xi` (if any) and
/// the first violating `xi` (if any).
pub fn monotone_radius_check(
    profile: &FrontProfile,
    e: &[f64],
    delta: f64,
) -> (bool, Option<f64>, Option<f64>) {
    let n = profile.n();
    // rightmost downward crossing of |phi - e| = delta
    let mut crossing: Option<usize> = None;
    for i in (1..n).rev() {
        if profile.dev(i, e) <= delta && profile.dev(i - 1, e) > delta {
            crossing = Some(i);
            break;
        }
    }
    let Some(i0) = crossing else {
        // no crossing: vacuous pass iff the profile never exceeds delta
        let ok = (0..n).all(|i| profile.dev(i, e) <= delta);
        return (ok, None, None);
    };
    // uniqueness: no other crossing left of i0 back above delta
    for i in i0..n {
        if profile.dev(i, e) > delta {
            return (false, Some(profile.xi[i0]), Some(profile.xi[i]));
        }
    }
    // strict decay at sample nodes right of the crossing (allow the flat
    // floor once the deviation reaches rounding scale)
    let floor = 1e-13 * delta.max(1.0);
    for i in i0..n - 1 {
        let a = profile.dev(i, e);
        let b = profile.dev(i + 1, e);
        if b >= a && a > floor {
            return (false, Some(profile.xi[i0]), Some(profile.xi[i + 1]));
        }
    }
    (true, Some(profile.xi[i0]), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = core::f64::consts::SQRT_2;

    fn fisher_quarter() -> (PotentialSpec, CriticalPoint) {
        let p = PotentialSpec::fisher(0.25).unwrap();
        let e = p.find_critical_point(&[0.0]).unwrap();
        (p, e)
    }

    #[test]
    fn steep_ic_slope_matches_lambda_minus() {
        let (_p, e) = fisher_quarter();
        let c = 2.2;
        let (phi0, dphi0) = steep_ic(&e, c, 1e-6, &[1.0]).unwrap();
        let expect = -1.1 - math::sqrt(0.21);
        let slope = dphi0[0] / (phi0[0] - 0.0);
        assert!((slope - expect).abs() < 1e-12);
        // mirror direction
        let (phi_m, dphi_m) = steep_ic(&e, c, 1e-6, &[-1.0]).unwrap();
        assert!((phi_m[0] + phi0[0]).abs() < 1e-18);
        assert!((dphi_m[0] + dphi0[0]).abs() < 1e-18);
    }

    #[test]
    fn steep_ic_rejects_subcritical_speed() {
        let (_p, e) = fisher_quarter();
        assert!(steep_ic(&e, 1.9, 1e-6, &[1.0]).is_err());
    }

    #[test]
    fn integrate_gradient_free_closed_form() {
        // grad V = 0, c = 1, ic (0, 1): phi(xi) = 1 - exp(-xi)
        let p = PotentialSpec::quadratic(1, 0.0).unwrap();
        let traj = integrate_profile(&p, 1.0, (&[0.0], &[1.0]), (0.0, 5.0), 1e-10, 100.0, 0.05)
            .unwrap();
        for i in 0..traj.n() {
            let expect = 1.0 - math::exp(-traj.xi[i]);
            assert!((traj.phi_at(i)[0] - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn integrator_tolerance_scaling() {
        let p = PotentialSpec::quadratic(1, 0.0).unwrap();
        let endpoint_err = |tol: f64| {
            let traj =
                integrate_profile(&p, 1.0, (&[0.0], &[1.0]), (0.0, 5.0), tol, 100.0, 0.5)
                    .unwrap();
            let last = traj.n() - 1;
            (traj.phi_at(last)[0] - (1.0 - math::exp(-5.0))).abs()
        };
        let coarse = endpoint_err(1e-6);
        let fine = endpoint_err(1e-9);
        assert!(fine < coarse);
    }

    #[test]
    fn exact_fisher_front_reproduced() {
        // phi = 1 / (1 + exp(sqrt2 xi)) solves the ODE at c = 3/sqrt2
        let (p, _e) = fisher_quarter();
        let c = 3.0 / SQRT2;
        let phi0 = 1.0 / (1.0 + math::exp(SQRT2 * -8.0));
        let dphi0 = -SQRT2 * phi0 * (1.0 - phi0);
        let traj =
            integrate_profile(&p, c, (&[phi0], &[dphi0]), (-8.0, 8.0), 1e-11, 100.0, 0.02)
                .unwrap();
        for i in 0..traj.n() {
            let expect = 1.0 / (1.0 + math::exp(SQRT2 * traj.xi[i]));
            assert!(
                (traj.phi_at(i)[0] - expect).abs() < 1e-8,
                "xi = {}",
                traj.xi[i]
            );
        }
        assert!(traj.max_ode_residual(&p) < 5e-3);
    }

    #[test]
    fn shot_signs_flip_across_pushed_speed() {
        let (p, e) = fisher_quarter();
        let opts = FrontSearchOpts::default();
        let eps = 4e-8;
        let below = shoot(&p, &e, &[1.0], 2.01, eps, &opts).unwrap();
        let above = shoot(&p, &e, &[1.0], 2.3, eps, &opts).unwrap();
        let sb = shot_sign(&below.status).expect("verdict below");
        let sa = shot_sign(&above.status).expect("verdict above");
        assert_ne!(sb, sa, "below: {:?}, above: {:?}", below.status, above.status);
        // sign stability on both sides (speeds must stay above c_lin = 2)
        for k in 0..10 {
            let cb = 2.005 + 0.011 * k as f64; // stays below 3/sqrt2
            let ca = 2.15 + 0.02 * k as f64;
            let b = shoot(&p, &e, &[1.0], cb, eps, &opts).unwrap();
            let a = shoot(&p, &e, &[1.0], ca, eps, &opts).unwrap();
            assert_eq!(shot_sign(&b.status), Some(sb), "c = {cb}");
            assert_eq!(shot_sign(&a.status), Some(sa), "c = {ca}");
        }
    }

    #[test]
    fn pushed_front_speed_quarter() {
        let (p, e) = fisher_quarter();
        let front =
            find_pushed_front(&p, &e, &[1.0], (2.01, 2.4), &FrontSearchOpts::default()).unwrap();
        assert!(
            (front.c - 3.0 / SQRT2).abs() < 1e-6,
            "c = {} vs {}",
            front.c,
            3.0 / SQRT2
        );
        assert_eq!(front.status, ShotStatus::Connected);
        let fit = front.steepness.unwrap();
        assert!((fit.lambda_hat + SQRT2).abs() < 0.01 * SQRT2);
        assert_eq!(fit.verdict, PushedVerdict::Pushed);
    }

    #[test]
    fn pushed_front_speed_nu_04() {
        let p = PotentialSpec::fisher(0.4).unwrap();
        let e = p.find_critical_point(&[0.0]).unwrap();
        let front =
            find_pushed_front(&p, &e, &[1.0], (2.001, 2.4), &FrontSearchOpts::default()).unwrap();
        let expect = math::sqrt(1.25) + math::sqrt(0.8);
        assert!((front.c - expect).abs() < 1e-6, "c = {} vs {expect}", front.c);
    }

    #[test]
    fn no_pushed_front_for_pulled_nu() {
        let p = PotentialSpec::fisher(0.7).unwrap();
        let e = p.find_critical_point(&[0.0]).unwrap();
        let res = find_pushed_front(&p, &e, &[1.0], (2.01, 2.4), &FrontSearchOpts::default());
        assert!(
            matches!(res, Err(Error::BracketFailure(_))),
            "expected no sign change, got {res:?}"
        );
    }

    #[test]
    fn energy_identity_on_found_front() {
        let (p, e) = fisher_quarter();
        let front =
            find_pushed_front(&p, &e, &[1.0], (2.01, 2.4), &FrontSearchOpts::default()).unwrap();
        // at its own speed the energy vanishes
        let (res_own, en_own) = front_energy_identity(&front, &p, &[0.0], front.c).unwrap();
        assert!(res_own < 1e-5, "residual at own speed: {res_own}");
        assert!(en_own.abs() < 1e-5, "energy at own speed: {en_own}");
        // identity below and sign structure across the speed
        for cp in [1.6, 1.8, 2.0] {
            let (res, en) = front_energy_identity(&front, &p, &[0.0], cp).unwrap();
            assert!(res < 1e-4, "residual at {cp}: {res}");
            assert!(en < 0.0, "energy at {cp}: {en}");
        }
        for cp in [2.2, 2.5] {
            let (_res, en) = front_energy_identity(&front, &p, &[0.0], cp).unwrap();
            assert!(en > 0.0, "energy at {cp}: {en}");
        }
        // window rejection
        assert!(front_energy_identity(&front, &p, &[0.0], 3.0).is_err());
    }

    #[test]
    fn steepness_of_synthetic_tails() {
        // constructed tail exp(lambda_+ xi) must not be pushed
        let c = 2.2;
        let lp = -c / 2.0 + math::sqrt(c * c / 4.0 - 1.0);
        let n = 2000;
        let xi: Vec<f64> = (0..n).map(|i| -5.0 + 30.0 * i as f64 / n as f64).collect();
        let phi: Vec<f64> = xi.iter().map(|&x| math::exp(lp * x)).collect();
        let dphi: Vec<f64> = phi.iter().map(|&v| lp * v).collect();
        let traj = FrontProfile {
            c,
            d: 1,
            xi,
            phi,
            dphi,
            status: ShotStatus::Ambiguous,
            steepness: None,
            epsilon: 0.0,
            direction: vec![1.0],
            min_target_dist: f64::INFINITY,
        };
        let fit = steepness(&traj, &[0.0], (1e-12, 1e-3)).unwrap();
        assert!((fit.lambda_hat - lp).abs() < 1e-6);
        assert_eq!(fit.verdict, PushedVerdict::NotPushed);

        // boundary tail exp(-(c/2) xi) is flagged ambiguous
        let phi: Vec<f64> = traj.xi.iter().map(|&x| math::exp(-0.5 * c * x)).collect();
        let dphi: Vec<f64> = phi.iter().map(|&v| -0.5 * c * v).collect();
        let boundary = FrontProfile { phi, dphi, ..traj.clone() };
        let fit = steepness(&boundary, &[0.0], (1e-12, 1e-3)).unwrap();
        assert_eq!(fit.verdict, PushedVerdict::Ambiguous);
    }

    #[test]
    fn monotone_radius_checks() {
        let (p, e) = fisher_quarter();
        let front =
            find_pushed_front(&p, &e, &[1.0], (2.01, 2.4), &FrontSearchOpts::default()).unwrap();
        let (ok, crossing, violation) = monotone_radius_check(&front, &[0.0], 0.03);
        assert!(ok, "violation at {violation:?}");
        assert!(crossing.is_some());

        // oscillating synthetic tail must fail with a located violation
        let n = 4000;
        let xi: Vec<f64> = (0..n).map(|i| -2.0 + 20.0 * i as f64 / n as f64).collect();
        let phi: Vec<f64> = xi
            .iter()
            .map(|&x| math::exp(-x) * libm::sin(5.0 * x))
            .collect();
        let dphi = vec![0.0; n];
        let osc = FrontProfile {
            c: 2.2,
            d: 1,
            xi,
            phi,
            dphi,
            status: ShotStatus::Ambiguous,
            steepness: None,
            epsilon: 0.0,
            direction: vec![1.0],
            min_target_dist: f64::INFINITY,
        };
        let (ok, _c, viol) = monotone_radius_check(&osc, &[0.0], 0.03);
        assert!(!ok);
        assert!(viol.is_some());

        // equilibrium profile: vacuous pass
        let flat = FrontProfile {
            c: 2.2,
            d: 1,
            xi: vec![0.0, 1.0, 2.0, 3.0],
            phi: vec![0.0; 4],
            dphi: vec![0.0; 4],
            status: ShotStatus::Ambiguous,
            steepness: None,
            epsilon: 0.0,
            direction: vec![1.0],
            min_target_dist: f64::INFINITY,
        };
        let (ok, crossing, _v) = monotone_radius_check(&flat, &[0.0], 0.03);
        assert!(ok && crossing.is_none());
    }
}
