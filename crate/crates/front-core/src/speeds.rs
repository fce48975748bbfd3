//! The speed hierarchy attached to an invaded critical point: eigenvalue
//! maps, linear speed, quadratic-hull curvature and speed, stability radii,
//! upper speed bounds, and the four-case classification of the speed line.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::potential::{random_direction, PotentialSpec, SplitMix64};

/// A possibly complex eigenvalue `lambda` of the linearized wave system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn real(x: f64) -> Self {
        Eigenvalue { re: x, im: 0.0 }
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }

    /// `|lambda^2 + c lambda - mu|`, the defect of the characteristic
    /// equation.
    pub fn root_residual(&self, c: f64, mu: f64) -> f64 {
        let re = self.re * self.re - self.im * self.im + c * self.re - mu;
        let im = 2.0 * self.re * self.im + c * self.im;
        math::hypot(re, im)
    }
}

/// Both roots of `lambda^2 + c lambda - mu = 0`, minus branch first.
/// Real when `mu >= -c^2/4`, complex-conjugate otherwise.
pub fn lambda_pm(c: f64, mu: f64) -> (Eigenvalue, Eigenvalue) {
    let disc = c * c / 4.0 + mu;
    if disc >= 0.0 {
        let root = math::sqrt(disc);
        (
            Eigenvalue::real(-c / 2.0 - root),
            Eigenvalue::real(-c / 2.0 + root),
        )
    } else {
        let root = math::sqrt(-disc);
        (
            Eigenvalue { re: -c / 2.0, im: -root },
            Eigenvalue { re: -c / 2.0, im: root },
        )
    }
}

/// Linear invasion speed associated with a curvature: `2 sqrt(-mu)` for
/// negative `mu`, zero otherwise.
pub fn c_lin_of_mu(mu: f64) -> f64 {
    if mu < 0.0 {
        2.0 * math::sqrt(-mu)
    } else {
        0.0
    }
}

/// Golden-section minimization on `[a, b]` for a unimodal-enough function.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Curvature of the lower quadratic hull of `V` centred at `e`:
/// the infimum over `u != e` of `2 (V(u) - V(e)) / |u - e|^2`, which is
/// always `<= mu_1` (the limit as `u -> e`).
///
/// In `d = 1` the scan runs over the interval `[e + lo, e + hi]` and the
/// grid minimum is refined by golden section. For `d > 1` the infimum is
/// taken over sampled rays through `e` (a lower-accuracy estimate).
///
/// Errors when the infimum sits on the search-box boundary, since the true
/// minimizer is then not bracketed.
pub fn mu_quad_hull(p: &PotentialSpec, e: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::InvalidInput(String::from("empty search box")));
    }
    let ve = p.value(e);
    let (mu, _) = p.curvatures(e);
    let mu1 = mu[0];
    let d = p.dim();
    let g_along = |dir: &[f64], r: f64| -> f64 {
        let u: Vec<f64> = e.iter().zip(dir).map(|(ei, di)| ei + r * di).collect();
        2.0 * (p.value(&u) - ve) / (r * r)
    };
    let mut result = mu1;
    let mut boundary_hit = false;
    let mut scan_ray = |dir: &[f64], r_lo: f64, r_hi: f64| {
        // one-dimensional scan in the signed radius, excluding |r| < 1e-8
        let n = 2001;
        let mut best_r = f64::NAN;
        let mut best_g = f64::INFINITY;
        let mut best_k = 0usize;
        for k in 0..n {
            let r = r_lo + (r_hi - r_lo) * k as f64 / (n - 1) as f64;
            if math::abs(r) < 1e-8 {
                continue;
            }
            let g = g_along(dir, r);
            if g < best_g {
                best_g = g;
                best_r = r;
                best_k = k;
            }
        }
        if best_g < result {
            if best_k == 0 || best_k == n - 1 {
                boundary_hit = true;
            }
            let h = (r_hi - r_lo) / (n - 1) as f64;
            let a = best_r - h;
            let b = best_r + h;
            let (_, gmin) = golden_min(|r| g_along(dir, r), a, b, 1e-12);
            if gmin < result {
                result = gmin;
            }
        }
    };
    if d == 1 {
        scan_ray(&[1.0], lo, hi);
    } else {
        let r_max = if math::abs(hi) > math::abs(lo) { math::abs(hi) } else { math::abs(lo) };
        let n_dirs = 64 * (d - 1);
        let mut rng = SplitMix64::new(0x5EEDCAFE);
        for _ in 0..n_dirs {
            let dir = random_direction(d, &mut rng);
            scan_ray(&dir, -r_max, r_max);
        }
    }
    if boundary_hit {
        return Err(Error::BracketFailure(format!(
            "quadratic-hull infimum sits on the search box boundary [{lo}, {hi}]; enlarge the box"
        )));
    }
    Ok(result)
}

/// Options for the radius scans.
#[derive(Debug, Clone)]
pub struct RadiusScanOpts {
    /// Largest radius probed for a violation.
    pub r_max: f64,
    /// Number of grid nodes per ray before bisection refinement.
    pub grid: usize,
    /// Radius tolerance of the bisection refinement.
    pub tol: f64,
    /// Ray directions per sphere dimension for `d > 1`.
    pub dirs_per_dim: usize,
}

impl Default for RadiusScanOpts {
    fn default() -> Self {
        RadiusScanOpts {
            r_max: 5.0,
            grid: 4000,
            tol: 1e-10,
            dirs_per_dim: 64,
        }
    }
}

fn smallest_violation_radius<F: Fn(&[f64]) -> bool>(
    d: usize,
    e: &[f64],
    violates: F,
    opts: &RadiusScanOpts,
) -> Option<f64> {
    let probe = |dir: &[f64], r: f64| -> bool {
        let u: Vec<f64> = e.iter().zip(dir).map(|(ei, di)| ei + r * di).collect();
        violates(&u)
    };
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if d == 1 {
        dirs.push(vec![1.0]);
        dirs.push(vec![-1.0]);
    } else {
        // coordinate axes first: exact for separable potentials, cheap
        // insurance for everything else
        for k in 0..d {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; d];
                v[k] = sign;
                dirs.push(v);
            }
        }
        let mut rng = SplitMix64::new(0xD1CE5);
        for _ in 0..opts.dirs_per_dim * (d - 1) {
            dirs.push(random_direction(d, &mut rng));
        }
    }
    let mut best: Option<f64> = None;
    for dir in &dirs {
        let h = opts.r_max / opts.grid as f64;
        let mut found = None;
        for k in 1..=opts.grid {
            let r = k as f64 * h;
            if let Some(b) = best {
                if r >= b {
                    break;
                }
            }
            if probe(dir, r) {
                found = Some((r - h, r));
                break;
            }
        }
        if let Some((mut good, mut bad)) = found {
            while bad - good > opts.tol {
                let mid = 0.5 * (good + bad);
                if probe(dir, mid) {
                    bad = mid;
                } else {
                    good = mid;
                }
            }
            let r = 0.5 * (good + bad);
            if best.map_or(true, |b| r < b) {
                best = Some(r);
            }
        }
    }
    best
}

/// Maximal radius of stability for pushed invasion at the speed `c0`:
/// the infimum of `|u - e|` over the set where
/// `V(u) - V(e) < (1/2) mu0 |u - e|^2` with `mu0 = -c0^2/4`.
///
/// Requires `c_lin < c0 < c_quad_hull`; errors when no violation is found
/// within the scan radius (inconsistent input).
pub fn delta_stab(p: &PotentialSpec, e: &[f64], c0: f64, opts: &RadiusScanOpts) -> Result<f64> {
    let mu0 = -c0 * c0 / 4.0;
    let ve = p.value(e);
    smallest_violation_radius(
        p.dim(),
        e,
        |u| {
            let dev_sq: f64 = u.iter().zip(e).map(|(a, b)| (a - b) * (a - b)).sum();
            p.value(u) - ve < 0.5 * mu0 * dev_sq
        },
        opts,
    )
    .ok_or_else(|| {
        Error::BracketFailure(format!(
            "no violation of the quadratic lower bound found within radius {} for c0 = {c0}; \
             c0 >= c_quad_hull or scan radius too small",
            opts.r_max
        ))
    })
}

/// Radius below which all Hessian eigenvalues of `V` stay `>= mu0`:
/// the infimum of `|u - e|` over the set where the least eigenvalue of
/// `D^2 V(u)` drops below `mu0 = -c0^2/4`. Always `<= delta_stab(c0)`.
pub fn delta_hess(p: &PotentialSpec, e: &[f64], c0: f64, opts: &RadiusScanOpts) -> Result<f64> {
    let mu0 = -c0 * c0 / 4.0;
    smallest_violation_radius(
        p.dim(),
        e,
        |u| {
            let (mu, _) = p.curvatures(u);
            mu[0] < mu0
        },
        opts,
    )
    .ok_or_else(|| {
        Error::BracketFailure(format!(
            "no Hessian eigenvalue below mu0 found within radius {} for c0 = {c0}",
            opts.r_max
        ))
    })
}

/// Speed bound `c_upp(c0) = 2 sqrt(|V_min|) / delta_stab(c0)`: no pushed
/// front at speed `c >= c0` can travel faster than this.
pub fn c_upp(p: &PotentialSpec, delta_stab_c0: f64) -> Result<f64> {
    let v_min = p
        .v_min()
        .ok_or_else(|| Error::InvalidInput(String::from("V_min unknown; compute it first")))?;
    if !(delta_stab_c0 > 0.0) {
        return Err(Error::InvalidInput(String::from("delta_stab must be positive")));
    }
    Ok(2.0 * math::sqrt(math::abs(v_min)) / delta_stab_c0)
}

/// Bracket for `c_upp_diag = sup { c0 : c0 <= c_upp(c0) }`, obtained by a
/// monotone scan over `c0` in `(c_lin, c_quad_hull)` (the map `c0 ->
/// c_upp(c0)` is nonincreasing but possibly discontinuous, so only a
/// bracket is reported).
pub fn c_upp_diag(
    p: &PotentialSpec,
    e: &[f64],
    c_lin: f64,
    c_quad_hull: f64,
    opts: &RadiusScanOpts,
) -> Result<(f64, f64)> {
    if !(c_quad_hull > c_lin) {
        return Err(Error::InvalidInput(String::from(
            "requires c_lin < c_quad_hull",
        )));
    }
    let margin = 1e-6 * (c_quad_hull - c_lin);
    let ok = |c0: f64| -> Result<bool> {
        let ds = delta_stab(p, e, c0, opts)?;
        Ok(c0 <= c_upp(p, ds)?)
    };
    let n = 32;
    let mut last_ok: Option<f64> = None;
    let mut first_bad: Option<f64> = None;
    for k in 0..=n {
        let c0 = c_lin + margin + (c_quad_hull - c_lin - 2.0 * margin) * k as f64 / n as f64;
        if ok(c0)? {
            last_ok = Some(c0);
        } else {
            first_bad = Some(c0);
            break;
        }
    }
    match (last_ok, first_bad) {
        (Some(mut lo), Some(mut hi)) => {
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if ok(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok((lo, hi))
        }
        (Some(lo), None) => Ok((lo, c_quad_hull)),
        (None, _) => Err(Error::BracketFailure(String::from(
            "c0 <= c_upp(c0) fails throughout (c_lin, c_quad_hull): no pushed front above c_lin",
        ))),
    }
}

/// How the nonlinear-speed bracket was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketMethod {
    Shooting,
    EnergyBisection,
    Both,
}

impl BracketMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BracketMethod::Shooting => "shooting",
            BracketMethod::EnergyBisection => "energy-bisection",
            BracketMethod::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NonlinBracket {
    pub lo: f64,
    pub hi: f64,
    pub method: BracketMethod,
}

/// Merge independently produced brackets; disagreement beyond the combined
/// widths is an error, not averaged away.
pub fn merge_nonlin_brackets(a: &NonlinBracket, b: &NonlinBracket) -> Result<NonlinBracket> {
    let lo = if a.lo > b.lo { a.lo } else { b.lo };
    let hi = if a.hi < b.hi { a.hi } else { b.hi };
    if lo > hi {
        return Err(Error::Inconclusive(format!(
            "c_nonlin brackets disagree: [{}, {}] ({}) vs [{}, {}] ({})",
            a.lo,
            a.hi,
            a.method.as_str(),
            b.lo,
            b.hi,
            b.method.as_str()
        )));
    }
    Ok(NonlinBracket {
        lo,
        hi,
        method: BracketMethod::Both,
    })
}

#[derive(Debug, Clone)]
pub struct RadiusEntry {
    pub c0: f64,
    pub delta_stab: f64,
    pub delta_hess: f64,
    pub c_upp: f64,
}

/// Every speed and radius of the hierarchy, plus the case label 1..4.
#[derive(Debug, Clone)]
pub struct SpeedAtlas {
    pub c_lin: f64,
    pub mu_quad_hull: f64,
    pub c_quad_hull: f64,
    pub c_nonlin: NonlinBracket,
    pub c_upp_diag: Option<(f64, f64)>,
    pub case: u8,
    pub radii: Vec<RadiusEntry>,
}

/// Classify the configuration of `(0, c_lin, c_nonlin, c_quad_hull)` on the
/// speed line. Equality of two speeds means agreement within `tol`
/// (enlarged by the bracket width for the nonlinear speed).
pub fn classify_case(
    c_lin: f64,
    c_nonlin: &NonlinBracket,
    c_quad_hull: f64,
    tol: f64,
) -> Result<u8> {
    let c_nl = 0.5 * (c_nonlin.lo + c_nonlin.hi);
    let eq_tol = tol + 0.5 * (c_nonlin.hi - c_nonlin.lo);
    let lin_zero = c_lin <= tol;
    let nl_eq_lin = math::abs(c_nl - c_lin) <= eq_tol;
    let nl_eq_quad = math::abs(c_nl - c_quad_hull) <= eq_tol;
    let nl_below_quad = c_nl < c_quad_hull - eq_tol;
    let nl_above_lin = c_nl > c_lin + eq_tol;
    if lin_zero && nl_above_lin && nl_below_quad {
        return Ok(1);
    }
    if !lin_zero && nl_eq_lin && nl_eq_quad {
        return Ok(2);
    }
    if !lin_zero && nl_eq_lin && nl_below_quad {
        return Ok(3);
    }
    if !lin_zero && nl_above_lin && nl_below_quad {
        return Ok(4);
    }
    Err(Error::Inconclusive(format!(
        "speed configuration (c_lin = {c_lin}, c_nonlin = {c_nl}, c_quad_hull = {c_quad_hull}) \
         matches none of the four cases at tol = {tol}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_pm_known_values() {
        // c = 2, mu = -1/2 -> -1 +- 1/sqrt(2)
        let (lm, lp) = lambda_pm(2.0, -0.5);
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((lm.re - (-1.0 - s)).abs() < 1e-14 && lm.im == 0.0);
        assert!((lp.re - (-1.0 + s)).abs() < 1e-14 && lp.im == 0.0);
        // double root at the discriminant boundary
        let (lm, lp) = lambda_pm(2.0, -1.0);
        assert_eq!(lm, lp);
        assert!((lm.re + 1.0).abs() < 1e-14);
        // c = 3, mu = 0 -> {-3, 0}
        let (lm, lp) = lambda_pm(3.0, 0.0);
        assert!((lm.re + 3.0).abs() < 1e-14);
        assert!(lp.re.abs() < 1e-14);
    }

    #[test]
    fn lambda_pm_root_identity_randomized() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..1000 {
            let c = 0.01 + 5.0 * (rng.next_f64() + 1.0) / 2.0;
            let mu = 4.0 * rng.next_f64();
            let (lm, lp) = lambda_pm(c, mu);
            assert!(lm.root_residual(c, mu) < 1e-12 * (1.0 + mu.abs()));
            assert!(lp.root_residual(c, mu) < 1e-12 * (1.0 + mu.abs()));
        }
    }

    #[test]
    fn c_lin_values() {
        assert!((c_lin_of_mu(-1.0) - 2.0).abs() < 1e-15);
        assert_eq!(c_lin_of_mu(0.5), 0.0);
        assert!((c_lin_of_mu(-4.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn quad_hull_fisher() {
        let p1 = PotentialSpec::fisher(1.0).unwrap();
        let mu = mu_quad_hull(&p1, &[0.0], -3.0, 3.0).unwrap();
        assert!((mu + 1.0).abs() < 1e-9, "nu=1: got {mu}");

        let p4 = PotentialSpec::fisher(0.25).unwrap();
        let mu = mu_quad_hull(&p4, &[0.0], -3.0, 3.0).unwrap();
        assert!((mu + 1.5).abs() < 1e-9, "nu=1/4: got {mu}");
    }

    #[test]
    fn quad_hull_constant_ratio() {
        let p = PotentialSpec::quadratic(1, -0.7).unwrap();
        let mu = mu_quad_hull(&p, &[0.0], -2.0, 2.0).unwrap();
        assert!((mu + 0.7).abs() < 1e-9);
    }

    #[test]
    fn quad_hull_boundary_detection() {
        // V = -u^4: ratio decreases without bound, minimum on the box edge
        let p = PotentialSpec::polynomial(
            1,
            vec![crate::potential::PolyTerm { coeff: -1.0, powers: vec![4] }],
        )
        .unwrap();
        assert!(matches!(
            mu_quad_hull(&p, &[0.0], -2.0, 2.0),
            Err(Error::BracketFailure(_))
        ));
    }

    #[test]
    fn delta_stab_fisher_quarter() {
        // quadratic-root oracle: smaller root of 2u^2 - 2u + 0.21
        let p = PotentialSpec::fisher(0.25).unwrap();
        let opts = RadiusScanOpts::default();
        let d = delta_stab(&p, &[0.0], 2.2, &opts).unwrap();
        let oracle = (2.0 - (4.0_f64 - 4.0 * 2.0 * 0.21).sqrt()) / 4.0;
        assert!((d - oracle).abs() < 1e-8, "got {d}, oracle {oracle}");
    }

    #[test]
    fn delta_stab_approaches_minimizer_near_c_quad() {
        let p = PotentialSpec::fisher(0.25).unwrap();
        let opts = RadiusScanOpts::default();
        let c_quad = 6.0_f64.sqrt();
        let d = delta_stab(&p, &[0.0], c_quad - 1e-5, &opts).unwrap();
        assert!((d - 0.5).abs() < 5e-3, "got {d}");
    }

    #[test]
    fn delta_stab_inconsistent_input() {
        // V exactly quadratic with mu0 below its curvature: the lower
        // bound holds everywhere, no violation to find
        let p = PotentialSpec::quadratic(1, -1.0).unwrap();
        let opts = RadiusScanOpts::default();
        assert!(delta_stab(&p, &[0.0], 2.5, &opts).is_err());
    }

    #[test]
    fn delta_hess_fisher_quarter() {
        // quadratic-root oracle: smaller root of 12u^2 - 6u + 0.21
        let p = PotentialSpec::fisher(0.25).unwrap();
        let opts = RadiusScanOpts::default();
        let d = delta_hess(&p, &[0.0], 2.2, &opts).unwrap();
        let oracle = (6.0 - (36.0_f64 - 4.0 * 12.0 * 0.21).sqrt()) / 24.0;
        assert!((d - oracle).abs() < 1e-8, "got {d}, oracle {oracle}");
    }

    #[test]
    fn delta_hess_le_delta_stab_on_grid() {
        let p = PotentialSpec::fisher(0.25).unwrap();
        let opts = RadiusScanOpts::default();
        for k in 0..10 {
            let c0 = 2.05 + 0.35 * k as f64 / 9.0;
            let ds = delta_stab(&p, &[0.0], c0, &opts).unwrap();
            let dh = delta_hess(&p, &[0.0], c0, &opts).unwrap();
            assert!(dh <= ds + 1e-9, "c0={c0}: dh={dh} > ds={ds}");
        }
    }

    #[test]
    fn delta_hess_block_diagonal_matches_scalar() {
        // two uncoupled copies of Fisher nu=1/4
        let a = 4.0;
        let mut terms = Vec::new();
        for i in 0..2usize {
            let pw = |p: u32| {
                let mut v = vec![0u32; 2];
                v[i] = p;
                v
            };
            terms.push(crate::potential::PolyTerm { coeff: -0.5, powers: pw(2) });
            terms.push(crate::potential::PolyTerm {
                coeff: (1.0 - a) / 3.0,
                powers: pw(3),
            });
            terms.push(crate::potential::PolyTerm {
                coeff: a / 4.0,
                powers: pw(4),
            });
        }
        let p2 = PotentialSpec::polynomial(2, terms).unwrap();
        let p1 = PotentialSpec::fisher(0.25).unwrap();
        let opts = RadiusScanOpts::default();
        let d2 = delta_hess(&p2, &[0.0, 0.0], 2.2, &opts).unwrap();
        let d1 = delta_hess(&p1, &[0.0], 2.2, &opts).unwrap();
        assert!((d1 - d2).abs() < 1e-6, "d1={d1} d2={d2}");
    }

    #[test]
    fn c_upp_fisher_quarter() {
        let p = PotentialSpec::fisher(0.25).unwrap();
        let opts = RadiusScanOpts::default();
        let ds = delta_stab(&p, &[0.0], 2.2, &opts).unwrap();
        let cu = c_upp(&p, ds).unwrap();
        assert!((cu - 2.0 * 0.5_f64.sqrt() / ds).abs() < 1e-12);
        assert!((cu - 11.86).abs() < 0.02, "got {cu}");
        // inverse-linear in delta_stab
        assert!((c_upp(&p, 2.0 * ds).unwrap() - cu / 2.0).abs() < 1e-12);
    }

    #[test]
    fn delta_stab_monotone_in_c0() {
        let p = PotentialSpec::fisher(0.25).unwrap();
        let opts = RadiusScanOpts::default();
        let mut prev = 0.0;
        for k in 0..12 {
            let c0 = 2.02 + 0.4 * k as f64 / 11.0;
            let ds = delta_stab(&p, &[0.0], c0, &opts).unwrap();
            assert!(ds > prev, "delta_stab not increasing at c0={c0}");
            prev = ds;
        }
    }

    #[test]
    fn classify_cases() {
        let nl = |lo: f64, hi: f64| NonlinBracket {
            lo,
            hi,
            method: BracketMethod::Shooting,
        };
        // Fisher-style configurations
        assert_eq!(classify_case(2.0, &nl(2.0, 2.0), 2.0, 2e-3).unwrap(), 2);
        assert_eq!(classify_case(2.0, &nl(2.0, 2.0), 2.029, 2e-3).unwrap(), 3);
        assert_eq!(
            classify_case(2.0, &nl(2.121, 2.122), 2.449, 2.4e-3).unwrap(),
            4
        );
        assert_eq!(classify_case(0.0, &nl(1.0, 1.0), 2.0, 2e-3).unwrap(), 1);
        // inconsistent: c_nonlin below c_lin by far
        assert!(classify_case(2.0, &nl(1.0, 1.0), 2.4, 2e-3).is_err());
    }

    #[test]
    fn merge_brackets() {
        let a = NonlinBracket { lo: 2.1, hi: 2.13, method: BracketMethod::Shooting };
        let b = NonlinBracket { lo: 2.11, hi: 2.2, method: BracketMethod::EnergyBisection };
        let m = merge_nonlin_brackets(&a, &b).unwrap();
        assert!((m.lo - 2.11).abs() < 1e-15 && (m.hi - 2.13).abs() < 1e-15);
        let c = NonlinBracket { lo: 2.3, hi: 2.4, method: BracketMethod::EnergyBisection };
        assert!(merge_nonlin_brackets(&a, &c).is_err());
    }
}
