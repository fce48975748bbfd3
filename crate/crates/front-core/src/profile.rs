//! Discretized profiles on uniform grids and the exponentially weighted
//! functionals living on them: travelling-frame energy, weighted H^1 norm,
//! dissipation, Poincaré gaps, smooth cutoffs, and variational speed scans.
//!
//! All weighted integrals carry a caller-chosen reference shift `xi_ref`:
//! the weight is `exp(c (xi - xi_ref))`, never the raw `exp(c xi)`, which
//! overflows on any sizable domain.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::potential::PotentialSpec;

/// Uniform 1-D grid of `R^d` values with a reference point `e` for
/// deviation norms.
#[derive(Debug, Clone)]
pub struct GridProfile {
    pub x0: f64,
    pub dx: f64,
    pub d: usize,
    /// Node values, `n * d` scalars, node-major.
    pub values: Vec<f64>,
    /// Reference point (the invaded critical point).
    pub e: Vec<f64>,
}

impl GridProfile {
    pub fn new(x0: f64, dx: f64, d: usize, values: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidInput(String::from("dx must be positive")));
        }
        if values.len() % d != 0 || values.len() / d < 8 {
            return Err(Error::InvalidInput(format!(
                "need at least 8 nodes of dimension {d}, got {} scalars",
                values.len()
            )));
        }
        if e.len() != d {
            return Err(Error::InvalidInput(String::from("reference point has wrong dimension")));
        }
        Ok(GridProfile { x0, dx, d, values, e })
    }

    /// Build from a scalar-valued closure (d = 1).
    pub fn from_fn(x0: f64, dx: f64, n: usize, e: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|i| f(x0 + i as f64 * dx)).collect();
        GridProfile::new(x0, dx, 1, values, vec![e])
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n() - 1)
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.d..(i + 1) * self.d]
    }

    /// Squared deviation `|w_i - e|^2`.
    pub fn dev_sq(&self, i: usize) -> f64 {
        self.node(i)
            .iter()
            .zip(&self.e)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Derivative proxy at node `i`: central differences in the interior,
    /// one-sided at the ends.
    pub fn derivative(&self, i: usize) -> Vec<f64> {
        let n = self.n();
        let (j0, j1, h) = if i == 0 {
            (0, 1, self.dx)
        } else if i == n - 1 {
            (n - 2, n - 1, self.dx)
        } else {
            (i - 1, i + 1, 2.0 * self.dx)
        };
        self.node(j1)
            .iter()
            .zip(self.node(j0))
            .map(|(a, b)| (a - b) / h)
            .collect()
    }

    /// Second-difference proxy at node `i` (clamped to the nearest interior
    /// node at the two ends).
    pub fn second_difference(&self, i: usize) -> Vec<f64> {
        let n = self.n();
        let j = i.clamp(1, n - 2);
        let h2 = self.dx * self.dx;
        (0..self.d)
            .map(|k| {
                (self.node(j + 1)[k] - 2.0 * self.node(j)[k] + self.node(j - 1)[k]) / h2
            })
            .collect()
    }

    /// Translate the profile by `k` grid nodes (positive = to the right),
    /// filling the vacated margin with `e`.
    pub fn shifted_by_nodes(&self, k: i64) -> GridProfile {
        let n = self.n() as i64;
        let mut out = self.clone();
        for i in 0..n {
            let src = i - k;
            let node: Vec<f64> = if src >= 0 && src < n {
                self.node(src as usize).to_vec()
            } else {
                self.e.clone()
            };
            out.node_mut(i as usize).copy_from_slice(&node);
        }
        out
    }
}

/// Exponentially weighted energy split into its kinetic and potential parts.
#[derive(Debug, Clone, Copy)]
pub struct WeightedEnergy {
    pub value: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub xi_ref: f64,
    pub c: f64,
}

impl WeightedEnergy {
    /// Re-express the same energy with a different weight reference; the
    /// value changes by the exact factor `exp(c (xi_ref - new_ref))`.
    pub fn rereferenced(&self, new_ref: f64) -> WeightedEnergy {
        let f = math::exp(self.c * (self.xi_ref - new_ref));
        WeightedEnergy {
            value: self.value * f,
            kinetic: self.kinetic * f,
            potential: self.potential * f,
            xi_ref: new_ref,
            c: self.c,
        }
    }
}

/// Trapezoid rule weight for node `i` of `n`.
#[inline]
fn trap_w(i: usize, n: usize, dx: f64) -> f64 {
    if i == 0 || i == n - 1 {
        0.5 * dx
    } else {
        dx
    }
}

fn checked_weight(c: f64, xi: f64, xi_ref: f64, raw: f64) -> Result<f64> {
    let exponent = c * (xi - xi_ref);
    if exponent > 700.0 {
        // the contribution is representable only if the raw integrand is
        // small enough to cancel the weight
        if raw != 0.0 && exponent + math::ln(math::abs(raw)) > -30.0 {
            return Err(Error::WeightOverflow { c, exponent });
        }
        return Ok(0.0);
    }
    Ok(math::exp(exponent) * raw)
}

/// Travelling-frame energy `int exp(c (xi - xi_ref)) (|w'|^2/2 + V(w))`
/// with the potential normalized so that `V(e) = 0`. Kinetic and potential
/// parts are reported separately; their sum is the value, exactly as
/// summed.
pub fn energy(w: &GridProfile, c: f64, p: &PotentialSpec, xi_ref: f64) -> Result<WeightedEnergy> {
    let n = w.n();
    let ve = p.value(&w.e);
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for i in 0..n {
        let tw = trap_w(i, n, w.dx);
        let dsq = math::norm_sq(&w.derivative(i));
        let vv = p.value(w.node(i)) - ve;
        kinetic += tw * checked_weight(c, w.x(i), xi_ref, 0.5 * dsq)?;
        potential += tw * checked_weight(c, w.x(i), xi_ref, vv)?;
    }
    Ok(WeightedEnergy {
        value: kinetic + potential,
        kinetic,
        potential,
        xi_ref,
        c,
    })
}

/// Weighted squared H^1 deviation norm
/// `int exp(c (xi - xi_ref)) (|w - e|^2 + |w'|^2)`.
pub fn weighted_h1_sq(w: &GridProfile, c: f64, xi_ref: f64) -> Result<f64> {
    let n = w.n();
    let mut acc = 0.0;
    for i in 0..n {
        let tw = trap_w(i, n, w.dx);
        let raw = w.dev_sq(i) + math::norm_sq(&w.derivative(i));
        acc += tw * checked_weight(c, w.x(i), xi_ref, raw)?;
    }
    Ok(acc)
}

/// Dissipation functional
/// `int exp(c (xi - xi_ref)) | -grad V(w) + c w' + w'' |^2`.
pub fn dissipation_functional(
    w: &GridProfile,
    c: f64,
    p: &PotentialSpec,
    xi_ref: f64,
) -> Result<f64> {
    let n = w.n();
    let mut acc = 0.0;
    for i in 0..n {
        let tw = trap_w(i, n, w.dx);
        let g = p.gradient(w.node(i));
        let d1 = w.derivative(i);
        let d2 = w.second_difference(i);
        let raw: f64 = (0..w.d)
            .map(|k| {
                let r = -g[k] + c * d1[k] + d2[k];
                r * r
            })
            .sum();
        acc += tw * checked_weight(c, w.x(i), xi_ref, raw)?;
    }
    Ok(acc)
}

/// Alternative algebraic form of the dissipation,
/// `int exp(c xi) (|grad V|^2 + 2 D^2V(w) . w' . w' + |w''|^2)`;
/// agrees with [`dissipation_functional`] to discretization error.
pub fn dissipation_functional_alt(
    w: &GridProfile,
    c: f64,
    p: &PotentialSpec,
    xi_ref: f64,
) -> Result<f64> {
    let n = w.n();
    let mut acc = 0.0;
    for i in 0..n {
        let tw = trap_w(i, n, w.dx);
        let g = p.gradient(w.node(i));
        let h = p.hessian(w.node(i));
        let d1 = w.derivative(i);
        let d2 = w.second_difference(i);
        let hd = h.mul_vec(&d1);
        let raw = math::norm_sq(&g) + 2.0 * math::dot(&hd, &d1) + math::norm_sq(&d2);
        acc += tw * checked_weight(c, w.x(i), xi_ref, raw)?;
    }
    Ok(acc)
}

/// Left-hand side minus right-hand side of the weighted Poincaré
/// inequality on `[xi0, +infty)` with parameter `lambda`, weights
/// referenced at `xi0`:
///
/// `int e^{c(xi-xi0)} |w'|^2  -  lambda |w(xi0)-e|^2
///  -  lambda (c - lambda) int e^{c(xi-xi0)} |w-e|^2`.
///
/// Nonnegative (up to quadrature error) for compactly supported deviations.
pub fn poincare_gap(w: &GridProfile, c: f64, xi0: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(String::from("lambda must be positive")));
    }
    let n = w.n();
    // the deviation must vanish in the boundary margins for the tail
    // integral to be exact on the finite grid
    let margin = 2.min(n);
    for i in (0..margin).chain(n - margin..n) {
        if w.dev_sq(i) != 0.0 {
            return Err(Error::InvalidInput(String::from(
                "profile support touches the grid boundary",
            )));
        }
    }
    // snap xi0 to the nearest node
    let i0 = ((xi0 - w.x0) / w.dx + 0.5) as usize;
    let i0 = i0.min(n - 1);
    let xi0 = w.x(i0);
    let m = n - i0;
    let mut grad_int = 0.0;
    let mut dev_int = 0.0;
    for i in i0..n {
        let tw = trap_w(i - i0, m, w.dx);
        grad_int += tw * checked_weight(c, w.x(i), xi0, math::norm_sq(&w.derivative(i)))?;
        dev_int += tw * checked_weight(c, w.x(i), xi0, w.dev_sq(i))?;
    }
    Ok(grad_int - lambda * w.dev_sq(i0) - lambda * (c - lambda) * dev_int)
}

/// Smooth cutoff ramp: 1 for `s <= 0`, 0 for `s >= 1`, C-infinity in
/// between (standard bump quotient).
pub fn smooth_step_down(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let psi = |t: f64| math::exp(-1.0 / t);
    psi(1.0 - s) / (psi(s) + psi(1.0 - s))
}

/// Multiply the deviation `w - e` by a smooth cutoff that is 1 left of
/// `x_cut` and 0 right of `x_cut + ramp_width`; the result equals `e`
/// identically right of the ramp.
pub fn cutoff_truncate(w: &GridProfile, x_cut: f64, ramp_width: f64) -> Result<GridProfile> {
    if !(ramp_width > 0.0) {
        return Err(Error::InvalidInput(String::from("ramp width must be positive")));
    }
    if x_cut < w.x0 || x_cut + ramp_width > w.x_end() {
        return Err(Error::InvalidInput(String::from("ramp does not fit in the grid")));
    }
    let mut out = w.clone();
    let e = w.e.clone();
    for i in 0..w.n() {
        let chi = smooth_step_down((w.x(i) - x_cut) / ramp_width);
        let node = out.node_mut(i);
        for k in 0..e.len() {
            node[k] = e[k] + chi * (node[k] - e[k]);
        }
    }
    Ok(out)
}

/// Result of a variational speed scan.
#[derive(Debug, Clone)]
pub struct SpeedScan {
    /// Largest scanned speed with negative energy (0 if none).
    pub speed: f64,
    /// Energy values per scanned grid speed (skipped entries are None).
    pub energies: Vec<(f64, Option<f64>)>,
    /// Speeds excluded because the weight overflowed.
    pub excluded: Vec<f64>,
}

/// Scan a grid of speeds for negative travelling-frame energy and refine
/// the largest negative-energy speed by bisection against its right grid
/// neighbour. Weights are referenced at the right end of the grid.
pub fn variational_speed_scan(
    w: &GridProfile,
    c_grid: &[f64],
    p: &PotentialSpec,
) -> Result<SpeedScan> {
    let xi_ref = w.x_end();
    let mut energies = Vec::with_capacity(c_grid.len());
    let mut excluded = Vec::new();
    let mut best: Option<usize> = None;
    for (k, &c) in c_grid.iter().enumerate() {
        match energy(w, c, p, xi_ref) {
            Ok(en) => {
                if en.value < 0.0 {
                    best = Some(k);
                }
                energies.push((c, Some(en.value)));
            }
            Err(Error::WeightOverflow { .. }) => {
                excluded.push(c);
                energies.push((c, None));
            }
            Err(e) => return Err(e),
        }
    }
    let speed = match best {
        None => 0.0,
        Some(k) if k + 1 >= c_grid.len() => c_grid[k],
        Some(k) => {
            let mut lo = c_grid[k];
            let mut hi = c_grid[k + 1];
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                match energy(w, mid, p, xi_ref) {
                    Ok(en) if en.value < 0.0 => lo = mid,
                    Ok(_) => hi = mid,
                    Err(_) => hi = mid,
                }
            }
            lo
        }
    };
    Ok(SpeedScan { speed, energies, excluded })
}

/// Finite-domain version of the invasion integral: the minimum over left
/// cut points `x` of `int_x^{end} (|w'|^2/2 + V(w))`. Always `<= 0` (the
/// empty suffix is admissible); strictly negative values certify that
/// small speeds carry negative energy.
pub fn invasion_condition(w: &GridProfile, p: &PotentialSpec) -> f64 {
    let n = w.n();
    let ve = p.value(&w.e);
    // suffix trapezoid sums from the right
    let density: Vec<f64> = (0..n)
        .map(|i| 0.5 * math::norm_sq(&w.derivative(i)) + p.value(w.node(i)) - ve)
        .collect();
    let mut suffix = 0.0;
    let mut min_suffix = 0.0;
    for i in (0..n - 1).rev() {
        suffix += 0.5 * w.dx * (density[i] + density[i + 1]);
        if suffix < min_suffix {
            min_suffix = suffix;
        }
    }
    min_suffix
}
