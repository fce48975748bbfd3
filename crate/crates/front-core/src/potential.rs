//! Potentials `V: R^d -> R` with exact derivatives, critical-point search,
//! curvature analysis, and a sampled coercivity certificate.
//!
//! Built-in families: the scalar Fisher potential, the scalar subcritical
//! quintic Ginzburg-Landau potential, and user polynomials given as
//! coefficient tables (derivatives are generated from the table, so the
//! gradient and Hessian are exact).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::math;

/// One monomial `coeff * u_1^p_1 * ... * u_d^p_d` of a polynomial potential.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `V(u) = -u^2/2 + (1/3)(1 - 1/nu) u^3 + u^4/(4 nu)`, `d = 1`.
    Fisher { nu: f64 },
    /// `V(u) = mu1 u^2/2 - u^4/4 + u^6/6`, `d = 1`.
    QuinticGl { mu1: f64 },
    /// Sum of monomials in `d` variables.
    Polynomial { terms: Vec<PolyTerm> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Fisher { .. } => "fisher",
            Family::QuinticGl { .. } => "quintic-gl",
            Family::Polynomial { .. } => "polynomial",
        }
    }
}

/// An evaluatable potential together with its dimension and (when known) its
/// global minimum value. Immutable after construction; all evaluations are
/// pure.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    d: usize,
    family: Family,
    v_min: Option<f64>,
}

/// A Newton-converged critical point of the potential.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub residual: f64,
    /// Eigenvalues of `D^2 V` at the point, ascending.
    pub curvatures: Vec<f64>,
    /// Orthonormal eigenvectors; `eigenvectors[j]` matches `curvatures[j]`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Maximal linear invasion speed `2 sqrt(-mu_1)` (0 if `mu_1 >= 0`).
    pub c_lin: f64,
    pub value: f64,
}

impl PotentialSpec {
    /// The Fisher potential with parameter `nu > 0`.
    pub fn fisher(nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidInput(format!("fisher nu must be > 0, got {nu}")));
        }
        let mut p = PotentialSpec {
            d: 1,
            family: Family::Fisher { nu },
            v_min: None,
        };
        // Global minimum sits at one of the two local minima u = 1, u = -nu.
        let v1 = p.value(&[1.0]);
        let v2 = p.value(&[-nu]);
        p.v_min = Some(if v1 < v2 { v1 } else { v2 });
        Ok(p)
    }

    /// Subcritical quintic Ginzburg-Landau potential, curvature `mu1` at 0.
    pub fn quintic_gl(mu1: f64) -> Result<Self> {
        if !mu1.is_finite() {
            return Err(Error::InvalidInput(String::from("quintic-gl mu1 must be finite")));
        }
        let mut p = PotentialSpec {
            d: 1,
            family: Family::QuinticGl { mu1 },
            v_min: None,
        };
        // V'(u) = u (mu1 - u^2 + u^4); nonzero roots from u^4 - u^2 + mu1 = 0.
        let mut vmin = 0.0_f64;
        let disc = 1.0 - 4.0 * mu1;
        if disc >= 0.0 {
            for sign in [-1.0, 1.0] {
                let u_sq = (1.0 + sign * math::sqrt(disc)) / 2.0;
                if u_sq > 0.0 {
                    let u = math::sqrt(u_sq);
                    let v = p.value(&[u]);
                    if v < vmin {
                        vmin = v;
                    }
                }
            }
        }
        p.v_min = Some(vmin);
        Ok(p)
    }

    /// Polynomial potential from a coefficient table. `v_min` is left unset;
    /// use [`PotentialSpec::minimize_over_box`] to fill it.
    pub fn polynomial(d: usize, terms: Vec<PolyTerm>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput(String::from("dimension must be positive")));
        }
        for t in &terms {
            if t.powers.len() != d {
                return Err(Error::InvalidInput(format!(
                    "monomial has {} exponents, expected {d}",
                    t.powers.len()
                )));
            }
        }
        Ok(PotentialSpec {
            d,
            family: Family::Polynomial { terms },
            v_min: None,
        })
    }

    /// The quadratic `V(u) = mu |u|^2 / 2` in dimension `d` (handy in tests
    /// and as a degenerate reference case).
    pub fn quadratic(d: usize, mu: f64) -> Result<Self> {
        let terms = (0..d)
            .map(|i| {
                let mut powers = vec![0u32; d];
                powers[i] = 2;
                PolyTerm {
                    coeff: mu / 2.0,
                    powers,
                }
            })
            .collect();
        PotentialSpec::polynomial(d, terms)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn v_min(&self) -> Option<f64> {
        self.v_min
    }

    pub fn set_v_min(&mut self, v: f64) {
        self.v_min = Some(v);
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.d);
        match &self.family {
            Family::Fisher { nu } => {
                let a = 1.0 / nu;
                let x = u[0];
                -0.5 * x * x + (1.0 - a) / 3.0 * x * x * x + 0.25 * a * x * x * x * x
            }
            Family::QuinticGl { mu1 } => {
                let x = u[0];
                let x2 = x * x;
                0.5 * mu1 * x2 - 0.25 * x2 * x2 + x2 * x2 * x2 / 6.0
            }
            Family::Polynomial { terms } => terms
                .iter()
                .map(|t| t.coeff * monomial(u, &t.powers))
                .sum(),
        }
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.d);
        match &self.family {
            Family::Fisher { nu } => {
                let a = 1.0 / nu;
                let x = u[0];
                vec![-x + (1.0 - a) * x * x + a * x * x * x]
            }
            Family::QuinticGl { mu1 } => {
                let x = u[0];
                vec![mu1 * x - x * x * x + x * x * x * x * x]
            }
            Family::Polynomial { terms } => {
                let mut g = vec![0.0; self.d];
                for t in terms {
                    for i in 0..self.d {
                        if t.powers[i] > 0 {
                            g[i] += t.coeff * monomial_partial(u, &t.powers, i);
                        }
                    }
                }
                g
            }
        }
    }

    pub fn hessian(&self, u: &[f64]) -> SymMatrix {
        debug_assert_eq!(u.len(), self.d);
        match &self.family {
            Family::Fisher { nu } => {
                let a = 1.0 / nu;
                let x = u[0];
                SymMatrix::from_rows(1, vec![-1.0 + 2.0 * (1.0 - a) * x + 3.0 * a * x * x])
            }
            Family::QuinticGl { mu1 } => {
                let x = u[0];
                SymMatrix::from_rows(1, vec![mu1 - 3.0 * x * x + 5.0 * x * x * x * x])
            }
            Family::Polynomial { terms } => {
                let mut h = SymMatrix::zeros(self.d);
                for t in terms {
                    for i in 0..self.d {
                        for j in i..self.d {
                            let v = t.coeff * monomial_second_partial(u, &t.powers, i, j);
                            if v != 0.0 {
                                h.set(i, j, h.get(i, j) + v);
                                if i != j {
                                    h.set(j, i, h.get(j, i) + v);
                                }
                            }
                        }
                    }
                }
                h
            }
        }
    }

    /// Damped Newton iteration on `grad V = 0`. The step is halved until the
    /// gradient norm decreases. Tolerance 1e-12, at most 100 iterations.
    pub fn find_critical_point(&self, guess: &[f64]) -> Result<CriticalPoint> {
        let mut x = guess.to_vec();
        let mut g = self.gradient(&x);
        let mut gnorm = math::norm(&g);
        for _ in 0..100 {
            if gnorm < 1e-12 {
                return Ok(self.critical_point_at(&x, gnorm));
            }
            let h = self.hessian(&x);
            let step = linalg::solve_dense(&h, &g)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _halve in 0..60 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(&step)
                    .map(|(xi, si)| xi - lambda * si)
                    .collect();
                let gt = self.gradient(&trial);
                let gt_norm = math::norm(&gt);
                if gt_norm < gnorm {
                    x = trial;
                    g = gt;
                    gnorm = gt_norm;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::NoConvergence(format!(
                    "Newton stalled at |grad V| = {gnorm}"
                )));
            }
        }
        if gnorm < 1e-10 {
            return Ok(self.critical_point_at(&x, gnorm));
        }
        Err(Error::NoConvergence(format!(
            "Newton did not converge: |grad V| = {gnorm} after 100 iterations"
        )))
    }

    fn critical_point_at(&self, x: &[f64], residual: f64) -> CriticalPoint {
        let eig = linalg::eigen_sym(&self.hessian(x));
        let mu1 = eig.values[0];
        CriticalPoint {
            location: x.to_vec(),
            residual,
            c_lin: crate::speeds::c_lin_of_mu(mu1),
            curvatures: eig.values,
            eigenvectors: eig.vectors,
            value: self.value(x),
        }
    }

    /// Sorted curvatures and orthonormal eigenvectors of `D^2 V(e)`.
    pub fn curvatures(&self, e: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let eig = linalg::eigen_sym(&self.hessian(e));
        (eig.values, eig.vectors)
    }

    /// Sampled coercivity certificate: the minimum of `u . grad V(u) / |u|^2`
    /// over `samples` deterministic points with `|u| >= radius` (radii
    /// log-spaced in `[radius, 10 radius]`). Positivity is evidence for the
    /// coercivity hypothesis at that scale, never a proof.
    pub fn check_coercivity(&self, radius: f64, samples: usize) -> Result<f64> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(String::from("radius must be positive")));
        }
        let n = samples.max(2);
        let mut worst = f64::INFINITY;
        let mut rng = SplitMix64::new(0x9E3779B97F4A7C15);
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            let r = radius * math::exp(t * math::ln(10.0));
            let dir = if self.d == 1 {
                vec![if k % 2 == 0 { 1.0 } else { -1.0 }]
            } else {
                random_direction(self.d, &mut rng)
            };
            let u: Vec<f64> = dir.iter().map(|x| x * r).collect();
            let g = self.gradient(&u);
            let q = math::dot(&u, &g) / math::norm_sq(&u);
            if q < worst {
                worst = q;
            }
        }
        Ok(worst)
    }

    /// Multi-start local minimization of `V` over the box `[lo, hi]^d`:
    /// coarse grid scan followed by Newton refinement of the best starts.
    /// Stores and returns the minimum value found.
    pub fn minimize_over_box(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(hi > lo) {
            return Err(Error::InvalidInput(String::from("empty box")));
        }
        let per_axis: usize = match self.d {
            1 => 201,
            2 => 41,
            3 => 15,
            _ => 7,
        };
        let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
        let total = per_axis.pow(self.d as u32);
        for flat in 0..total {
            let mut idx = flat;
            let mut u = vec![0.0; self.d];
            for i in 0..self.d {
                let k = idx % per_axis;
                idx /= per_axis;
                u[i] = lo + (hi - lo) * k as f64 / (per_axis - 1) as f64;
            }
            let v = self.value(&u);
            best.push((v, u));
        }
        best.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        best.truncate(8);
        let mut vmin = best[0].0;
        for (_, start) in &best {
            if let Ok(cp) = self.find_critical_point(start) {
                if cp.curvatures[0] >= 0.0 && cp.value < vmin {
                    vmin = cp.value;
                }
            }
        }
        self.v_min = Some(vmin);
        Ok(vmin)
    }
}

fn monomial(u: &[f64], powers: &[u32]) -> f64 {
    let mut prod = 1.0;
    for (x, &p) in u.iter().zip(powers) {
        for _ in 0..p {
            prod *= x;
        }
    }
    prod
}

fn monomial_partial(u: &[f64], powers: &[u32], i: usize) -> f64 {
    if powers[i] == 0 {
        return 0.0;
    }
    let mut prod = powers[i] as f64;
    for (k, (x, &p)) in u.iter().zip(powers).enumerate() {
        let q = if k == i { p - 1 } else { p };
        for _ in 0..q {
            prod *= x;
        }
    }
    prod
}

fn monomial_second_partial(u: &[f64], powers: &[u32], i: usize, j: usize) -> f64 {
    if i == j {
        if powers[i] < 2 {
            return 0.0;
        }
        let mut prod = (powers[i] * (powers[i] - 1)) as f64;
        for (k, (x, &p)) in u.iter().zip(powers).enumerate() {
            let q = if k == i { p - 2 } else { p };
            for _ in 0..q {
                prod *= x;
            }
        }
        prod
    } else {
        if powers[i] == 0 || powers[j] == 0 {
            return 0.0;
        }
        let mut prod = (powers[i] * powers[j]) as f64;
        for (k, (x, &p)) in u.iter().zip(powers).enumerate() {
            let q = if k == i || k == j { p - 1 } else { p };
            for _ in 0..q {
                prod *= x;
            }
        }
        prod
    }
}

/// Deterministic 64-bit generator for sampled certificates.
pub(crate) struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in (-1, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

pub(crate) fn random_direction(d: usize, rng: &mut SplitMix64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.next_f64()).collect();
        let n = math::norm(&v);
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fisher(nu: f64) -> PotentialSpec {
        PotentialSpec::fisher(nu).unwrap()
    }

    #[test]
    fn fisher_values() {
        // hand-evaluated: nu=1, u=1 -> -1/2 + 0 + 1/4
        assert!((fisher(1.0).value(&[1.0]) + 0.25).abs() < 1e-15);
        assert_eq!(fisher(1.0).value(&[0.0]), 0.0);
        assert_eq!(fisher(1.0).gradient(&[0.0])[0], 0.0);
        // nu=1/4, u=1 -> -1/2 + (1/3)(-3) + 1
        assert!((fisher(0.25).value(&[1.0]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn fisher_rejects_nonpositive_nu() {
        assert!(PotentialSpec::fisher(0.0).is_err());
        assert!(PotentialSpec::fisher(-1.0).is_err());
    }

    #[test]
    fn fisher_critical_set() {
        for nu in [0.25, 0.5, 0.7, 1.0] {
            let p = fisher(nu);
            for u in [-nu, 0.0, 1.0] {
                assert!(p.gradient(&[u])[0].abs() < 1e-12, "nu={nu} u={u}");
            }
        }
    }

    #[test]
    fn fisher_critical_points_via_newton() {
        let p = fisher(1.0);
        let cp = p.find_critical_point(&[0.1]).unwrap();
        assert!(cp.location[0].abs() < 1e-10);
        assert!((cp.curvatures[0] + 1.0).abs() < 1e-10);
        assert!((cp.c_lin - 2.0).abs() < 1e-10);

        let cp1 = p.find_critical_point(&[0.9]).unwrap();
        assert!((cp1.location[0] - 1.0).abs() < 1e-10);
        assert!(cp1.curvatures[0] > 0.0);
    }

    #[test]
    fn quadratic_critical_point() {
        let p = PotentialSpec::quadratic(1, 3.0).unwrap();
        let cp = p.find_critical_point(&[17.0]).unwrap();
        assert!(cp.location[0].abs() < 1e-12);
        assert!((cp.curvatures[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fisher_curvature_at_origin_is_minus_one_for_all_nu() {
        for nu in [0.1, 0.25, 0.5, 1.0, 2.0] {
            let (mu, _) = fisher(nu).curvatures(&[0.0]);
            assert!((mu[0] + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn fisher_quarter_hessian_at_half() {
        // V''(u) = -1 - 6u + 12u^2 at nu = 1/4
        let h = fisher(0.25).hessian(&[0.5]);
        assert!((h.get(0, 0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn coercivity_certificates() {
        assert!(fisher(1.0).check_coercivity(10.0, 50).unwrap() > 0.0);
        let quad = PotentialSpec::quadratic(1, 1.0).unwrap();
        assert!((quad.check_coercivity(1.0, 50).unwrap() - 1.0).abs() < 1e-12);
        let neg = PotentialSpec::quadratic(1, -1.0).unwrap();
        assert!((neg.check_coercivity(1.0, 50).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fisher_v_min() {
        // nu = 1/4: V(1) = -1/2 is the global minimum
        assert!((fisher(0.25).v_min().unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn polynomial_box_minimum() {
        // double well V = (u^2 - 1)^2 / 4 = u^4/4 - u^2/2 + 1/4, min 0 at +-1
        let mut p = PotentialSpec::polynomial(
            1,
            vec![
                PolyTerm { coeff: 0.25, powers: vec![4] },
                PolyTerm { coeff: -0.5, powers: vec![2] },
                PolyTerm { coeff: 0.25, powers: vec![0] },
            ],
        )
        .unwrap();
        let vmin = p.minimize_over_box(-3.0, 3.0).unwrap();
        assert!(vmin.abs() < 1e-12);
    }

    #[test]
    fn gradient_hessian_match_finite_differences() {
        let step = 1e-5;
        let p2 = PotentialSpec::polynomial(
            2,
            vec![
                PolyTerm { coeff: -0.5, powers: vec![2, 0] },
                PolyTerm { coeff: 0.3, powers: vec![1, 2] },
                PolyTerm { coeff: 0.25, powers: vec![4, 0] },
                PolyTerm { coeff: 0.1, powers: vec![0, 4] },
            ],
        )
        .unwrap();
        let mut rng = SplitMix64::new(42);
        for p in [&fisher(0.25), &fisher(1.0), &p2] {
            let d = p.dim();
            for _ in 0..100 {
                let u: Vec<f64> = (0..d).map(|_| 2.0 * rng.next_f64()).collect();
                let g = p.gradient(&u);
                let h = p.hessian(&u);
                assert!(h.asymmetry() < 1e-12);
                for i in 0..d {
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[i] += step;
                    um[i] -= step;
                    let fd = (p.value(&up) - p.value(&um)) / (2.0 * step);
                    assert!(
                        (g[i] - fd).abs() / (1.0 + g[i].abs()) < 1e-6,
                        "gradient mismatch"
                    );
                    let gp = p.gradient(&up);
                    let gm = p.gradient(&um);
                    for j in 0..d {
                        let fd2 = (gp[j] - gm[j]) / (2.0 * step);
                        assert!(
                            (h.get(j, i) - fd2).abs() / (1.0 + h.get(j, i).abs()) < 1e-6,
                            "hessian mismatch"
                        );
                    }
                }
            }
        }
    }
}
