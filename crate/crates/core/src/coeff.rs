//! Maxwellian-convolved collision coefficients for soft potentials.
//!
//! The kernel is a_jk(z) = |z|^γ (|z|²δ_jk − z_j z_k) with −3 < γ < 0, and the
//! field of interest is its convolution with the unit Maxwellian,
//! ā = a ∗ μ.  Isotropy reduces ā to two radial profiles,
//!     ā(v) = ℓ₁(r) v̂v̂ᵀ + ℓ₂(r)(I − v̂v̂ᵀ),   r = |v|,
//! which in spherical coordinates become the 2-d integrals
//!     ℓᵢ(r) = (2π)^{−1/2} ∫₀^∞∫_{−1}^1 ρ^{γ+4} gᵢ(u)
//!               exp(−((ρ−r)² + 2rρ(1−u))/2) du dρ,
//! with g₁ = 1−u², g₂ = (1+u²)/2.  Radial derivatives insert the probabilists'
//! Hermite polynomial He_k(ρu − r) into the integrand.
//!
//! Everything downstream (quadratic form, drift, derivative tensors) reduces
//! to these profiles and their derivatives:
//!     q(v) = vᵀā(v)v = ℓ₁(r) r²,   d(v) = ∇·(ā(v)v) = 3ℓ₁(r) + r ℓ₁′(r).
//!
//! For small radii the profiles admit clean single-sign power series in
//! S = r² (see [`RadialCoeffSeries`]); the series doubles as an independent
//! route and as the stable source of S-derivatives near the origin.

use crate::error::{LandauError, Result};
use crate::quad::{adaptive_integrate, gauss_legendre_cached, scaled_rule};
use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const INV_SQRT_2PI: f64 = 0.39894228040143267794;
/// Below this radius the S-power-series route is used for S-derivatives.
pub(crate) const SERIES_RADIUS: f64 = 3.5;
/// Half-width of the ρ-window around r outside which the Gaussian factor
/// e^{−(ρ−r)²/2} is below 2e−43.
const RHO_WINDOW: f64 = 14.0;

/// Interaction exponent γ ∈ (−3, 0).
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PotentialConfig {
    pub gamma: f64,
}

impl PotentialConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > -3.0 && gamma < 0.0) || !gamma.is_finite() {
            return Err(LandauError::GammaOutOfRange(gamma));
        }
        Ok(PotentialConfig { gamma })
    }
}

/// Collision kernel a_jk(z) = |z|^γ (|z|² δ_jk − z_j z_k).
/// Singular at z = 0 for γ < 0; the guard refuses radii below 1e−140 where
/// |z|^γ would lose all precision or overflow.
pub fn a_kernel(gamma: f64, z: [f64; 3]) -> Result<Matrix3<f64>> {
    let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    if r2 < 1e-280 {
        return Err(LandauError::SingularKernel { gamma });
    }
    let scale = r2.sqrt().powf(gamma);
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let kron = if i == j { r2 } else { 0.0 };
            m[(i, j)] = scale * (kron - z[i] * z[j]);
        }
    }
    Ok(m)
}

/// ā from its two radial profiles at a point.
pub fn abar_from_profiles(ell1: f64, ell2: f64, v: [f64; 3]) -> Matrix3<f64> {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if r2 < 1e-280 {
        // Isotropic limit: ℓ₁(0) = ℓ₂(0).
        return Matrix3::identity() * ell2;
    }
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let kron = if i == j { ell2 } else { 0.0 };
            m[(i, j)] = kron + (ell1 - ell2) * v[i] * v[j] / r2;
        }
    }
    m
}

/// Probabilists' Hermite polynomial He_k(t).
pub fn hermite_poly_prob(k: usize, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => t,
        _ => {
            let mut prev = 1.0;
            let mut cur = t;
            for m in 1..k {
                let next = t * cur - m as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn angular_weight(which: usize, u: f64) -> f64 {
    match which {
        1 => 1.0 - u * u,
        2 => 0.5 * (1.0 + u * u),
        _ => unreachable!("angular weight index"),
    }
}

/// Inner angular integral
/// ∫_{−1}^1 gᵢ(u) He_k(ρu − r) exp(−(r² + ρ² − 2rρu)/2) du.
///
/// For small s = rρ the integrand is entire and a fixed Gauss–Legendre rule
/// is exact to machine precision; for large s it concentrates at u = 1, so we
/// substitute t = s(1 − u) and integrate e^{−t} on composite panels.
fn inner_angular(which: usize, k: usize, r: f64, rho: f64) -> f64 {
    let s = r * rho;
    if s <= 8.0 {
        let rule = gauss_legendre_cached(32);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&u, &w)| {
                let expo = -0.5 * (r * r + rho * rho - 2.0 * s * u);
                w * angular_weight(which, u) * hermite_poly_prob(k, rho * u - r) * expo.exp()
            })
            .sum()
    } else {
        let prefactor = (-0.5 * (rho - r) * (rho - r)).exp();
        if prefactor == 0.0 {
            return 0.0;
        }
        let t_max = (2.0 * s).min(46.0);
        let edges: [f64; 7] = [0.0, 1.0, 3.0, 8.0, 18.0, 32.0, 46.0];
        let rule = gauss_legendre_cached(20);
        let mut acc = 0.0;
        for win in edges.windows(2) {
            let (a, b) = (win[0].min(t_max), win[1].min(t_max));
            if b <= a {
                break;
            }
            let panel = scaled_rule(&rule, a, b);
            acc += panel.integrate(|t| {
                let u = 1.0 - t / s;
                angular_weight(which, u)
                    * hermite_poly_prob(k, (rho - r) - t / r)
                    * (-t).exp()
            });
        }
        prefactor * acc / s
    }
}

/// k-th radial derivative of both profiles, (ℓ₁^{(k)}(r), ℓ₂^{(k)}(r)), by
/// adaptive quadrature of the 2-d representation.  The [0, 1] panel uses the
/// substitution ρ = σ² to tame the algebraic factor ρ^{γ+4} near ρ = 0.
pub fn profile_derivative_exact(
    gamma: f64,
    r: f64,
    k: usize,
    tol: f64,
    max_panels: usize,
) -> (f64, f64) {
    let mut out = [0.0f64; 2];
    for which in 1..=2usize {
        let power_panel = {
            let f = |sigma: f64| -> f64 {
                if sigma <= 0.0 {
                    return 0.0;
                }
                let rho = sigma * sigma;
                2.0 * sigma.powf(2.0 * gamma + 9.0) * inner_angular(which, k, r, rho)
            };
            adaptive_integrate(&f, 0.0, 1.0, tol, max_panels).value
        };
        let main_panel = {
            let lo = (r - RHO_WINDOW).max(1.0);
            let hi = r + RHO_WINDOW;
            let f = |rho: f64| rho.powf(gamma + 4.0) * inner_angular(which, k, r, rho);
            adaptive_integrate(&f, lo, hi, tol, max_panels).value
        };
        out[which - 1] = INV_SQRT_2PI * (power_panel + main_panel);
    }
    (out[0], out[1])
}

/// Profile values (ℓ₁, ℓ₂) by direct quadrature.
pub fn profile_pair_exact(gamma: f64, r: f64, tol: f64, max_panels: usize) -> (f64, f64) {
    profile_derivative_exact(gamma, r, 0, tol, max_panels)
}

/// Single-sign power series in S = r² for the isotropic decomposition
///     ā(v) = A(S) I + B(S) vvᵀ,
/// i.e. A = ℓ₂ and B = (ℓ₁ − ℓ₂)/S.  Expanding the angular factor of the
/// convolution in powers of rρ gives
///     A(S) = e^{−S/2} Σ_m α_m S^m,   B(S) = e^{−S/2} Σ_m β_{m+1} S^m,
/// with all α_m > 0 and all β_m < 0 — no cancellation — so the series and all
/// its S-derivatives are machine-accurate wherever it converges (we use it
/// for r ≤ 3.5).
pub struct RadialCoeffSeries {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl RadialCoeffSeries {
    pub fn new(gamma: f64) -> Self {
        let c = (gamma + 5.0) / 2.0;
        let kappa = INV_SQRT_2PI * 2f64.powf((gamma + 3.0) / 2.0);
        let n_terms = 80usize;
        let mut alpha = Vec::with_capacity(n_terms);
        let mut beta = Vec::with_capacity(n_terms);
        // t_m = 2^m Γ(c+m) / (2m)!, built incrementally to avoid overflow
        let mut t = libm::tgamma(c);
        for m in 0..n_terms {
            let mf = m as f64;
            let denom = (2.0 * mf + 1.0) * (2.0 * mf + 3.0);
            alpha.push(kappa * (4.0 * mf + 4.0) / denom * t);
            beta.push(kappa * (-4.0 * mf) / denom * t);
            t *= 2.0 * (c + mf) / ((2.0 * mf + 2.0) * (2.0 * mf + 1.0));
        }
        RadialCoeffSeries { alpha, beta }
    }

    /// d^j/dS^j of the polynomial part Σ coef_m S^m, for j = 0..=kmax.
    fn poly_derivs(coefs: &[f64], s: f64, kmax: usize) -> Vec<f64> {
        let mut out = vec![0.0; kmax + 1];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            // descending powers for stable summation of the tail
            for m in (j..coefs.len()).rev() {
                let mut fall = 1.0;
                for i in 0..j {
                    fall *= (m - i) as f64;
                }
                acc += coefs[m] * fall * s.powi((m - j) as i32);
            }
            *slot = acc;
        }
        out
    }

    /// Derivatives of F(S) = e^{−S/2} P(S):
    /// F^{(k)} = e^{−S/2} Σ_j C(k,j) (−1/2)^{k−j} P^{(j)}.
    fn assemble(coefs: &[f64], s: f64, kmax: usize) -> Vec<f64> {
        let p = Self::poly_derivs(coefs, s, kmax);
        let damp = (-s / 2.0).exp();
        (0..=kmax)
            .map(|k| {
                let mut acc = 0.0;
                let mut binom = 1.0;
                for j in 0..=k {
                    // C(k, j) built as C(k,0)=1, C(k,j) = C(k,j−1)(k−j+1)/j
                    if j > 0 {
                        binom *= (k - j + 1) as f64 / j as f64;
                    }
                    acc += binom * (-0.5f64).powi((k - j) as i32) * p[j];
                }
                damp * acc
            })
            .collect()
    }

    /// A^{(k)}(S) for k = 0..=kmax.
    pub fn a_derivatives(&self, s: f64, kmax: usize) -> Vec<f64> {
        Self::assemble(&self.alpha, s, kmax)
    }

    /// B^{(k)}(S) for k = 0..=kmax (note B's polynomial part is
    /// Σ_{m≥1} β_m S^{m−1}).
    pub fn b_derivatives(&self, s: f64, kmax: usize) -> Vec<f64> {
        let shifted: Vec<f64> = self.beta[1..].to_vec();
        Self::assemble(&shifted, s, kmax)
    }
}

/// Convert radial derivatives f^{(j)}(r) into S-derivatives of F(S) = f(√S)
/// by iterating D_S = (2r)^{−1} d/dr symbolically on terms c · f^{(j)} · r^p.
fn s_derivatives_of_radial(radial: &[f64], r: f64, kmax: usize) -> Vec<f64> {
    assert!(radial.len() > kmax);
    let mut out = Vec::with_capacity(kmax + 1);
    let mut terms: BTreeMap<(usize, i64), f64> = BTreeMap::new();
    terms.insert((0, 0), 1.0);
    for k in 0..=kmax {
        if k > 0 {
            let mut next: BTreeMap<(usize, i64), f64> = BTreeMap::new();
            for (&(j, p), &c) in &terms {
                *next.entry((j + 1, p - 1)).or_insert(0.0) += 0.5 * c;
                if p != 0 {
                    *next.entry((j, p - 2)).or_insert(0.0) += 0.5 * c * p as f64;
                }
            }
            terms = next;
        }
        let val: f64 = terms
            .iter()
            .map(|(&(j, p), &c)| c * radial[j] * r.powi(p as i32))
            .sum();
        out.push(val);
    }
    out
}

/// S-derivatives (A^{(k)}, B^{(k)}), k = 0..=kmax, of the isotropic
/// decomposition ā = A(S)I + B(S)vvᵀ at radius r.  Series route for r ≤ 3.5;
/// otherwise radial-derivative quadratures plus the exact recursion
/// B^{(k)} = (ΔL^{(k)} − k B^{(k−1)})/S for ΔL = S·B.
pub fn ab_derivatives(
    gamma: f64,
    r: f64,
    kmax: usize,
    tol: f64,
    max_panels: usize,
) -> (Vec<f64>, Vec<f64>) {
    if r <= SERIES_RADIUS {
        let series = RadialCoeffSeries::new(gamma);
        let s = r * r;
        (series.a_derivatives(s, kmax), series.b_derivatives(s, kmax))
    } else {
        ab_derivatives_quadrature(gamma, r, kmax, tol, max_panels)
    }
}

/// The large-radius branch of [`ab_derivatives`]: radial-derivative
/// quadratures converted to S-derivatives, with the quotient recursion
/// B^{(k)} = (ΔL^{(k)} − k B^{(k−1)})/S (safe because S > 12 here).
pub(crate) fn ab_derivatives_quadrature(
    gamma: f64,
    r: f64,
    kmax: usize,
    tol: f64,
    max_panels: usize,
) -> (Vec<f64>, Vec<f64>) {
    let s = r * r;
    let mut l1_radial = Vec::with_capacity(kmax + 2);
    let mut l2_radial = Vec::with_capacity(kmax + 2);
    for k in 0..=kmax {
        let (d1, d2) = profile_derivative_exact(gamma, r, k, tol, max_panels);
        l1_radial.push(d1);
        l2_radial.push(d2);
    }
    let a = s_derivatives_of_radial(&l2_radial, r, kmax);
    let dl_radial: Vec<f64> = l1_radial
        .iter()
        .zip(&l2_radial)
        .map(|(&x, &y)| x - y)
        .collect();
    let dl_s = s_derivatives_of_radial(&dl_radial, r, kmax);
    let mut b = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let prev = if k == 0 { 0.0 } else { b[k - 1] };
        b.push((dl_s[k] - k as f64 * prev) / s);
    }
    (a, b)
}

/// Settings for the tabulated field.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldSettings {
    /// number of log-spaced radii (besides r = 0)
    pub table_size: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub quad_tol: f64,
    pub max_panels: usize,
}

impl Default for FieldSettings {
    fn default() -> Self {
        FieldSettings {
            table_size: 512,
            r_min: 1e-2,
            r_max: 40.0,
            quad_tol: 1e-12,
            max_panels: 2000,
        }
    }
}

/// Tabulated coefficient field: profile values and exact derivatives on a
/// log-radius grid (plus r = 0), interpolated with cubic Hermite segments.
/// Point queries go through the table; grid assembly recomputes profiles
/// exactly at the distinct grid radii and never pays interpolation error.
#[derive(Clone, Serialize, Deserialize)]
pub struct CoefficientField {
    gamma: f64,
    settings: FieldSettings,
    table_r: Vec<f64>,
    ell1: Vec<f64>,
    ell2: Vec<f64>,
    dell1: Vec<f64>,
    dell2: Vec<f64>,
}

impl CoefficientField {
    /// Build the table by adaptive quadrature at every node (parallel).
    pub fn build(config: PotentialConfig, settings: FieldSettings) -> Result<Self> {
        if settings.table_size < 8 {
            return Err(LandauError::InvalidArgument(
                "coefficient table needs at least 8 radii".into(),
            ));
        }
        if !(settings.r_min > 0.0 && settings.r_max > settings.r_min) {
            return Err(LandauError::InvalidArgument(
                "coefficient table needs 0 < r_min < r_max".into(),
            ));
        }
        let gamma = config.gamma;
        let n = settings.table_size;
        let step = (settings.r_max / settings.r_min).ln() / (n - 1) as f64;
        let mut table_r = Vec::with_capacity(n + 1);
        table_r.push(0.0);
        for i in 0..n {
            table_r.push(settings.r_min * (step * i as f64).exp());
        }
        // exact endpoint
        let last = table_r.len() - 1;
        table_r[last] = settings.r_max;

        let rows: Vec<(f64, f64, f64, f64)> = table_r
            .par_iter()
            .map(|&r| {
                let (l1, l2) =
                    profile_derivative_exact(gamma, r, 0, settings.quad_tol, settings.max_panels);
                let (d1, d2) =
                    profile_derivative_exact(gamma, r, 1, settings.quad_tol, settings.max_panels);
                (l1, l2, d1, d2)
            })
            .collect();

        let mut field = CoefficientField {
            gamma,
            settings,
            table_r,
            ell1: rows.iter().map(|t| t.0).collect(),
            ell2: rows.iter().map(|t| t.1).collect(),
            dell1: rows.iter().map(|t| t.2).collect(),
            dell2: rows.iter().map(|t| t.3).collect(),
        };
        // ℓᵢ are even in r, so the derivative at the origin is exactly zero;
        // pin it rather than keeping the ~1e−17 quadrature residue.
        field.dell1[0] = 0.0;
        field.dell2[0] = 0.0;
        field.check_invariants()?;
        Ok(field)
    }

    fn check_invariants(&self) -> Result<()> {
        for (i, &r) in self.table_r.iter().enumerate() {
            if !(self.ell1[i] > 0.0 && self.ell2[i] > 0.0) {
                return Err(LandauError::InvariantViolation(format!(
                    "profile not positive at r = {r}: ℓ₁ = {}, ℓ₂ = {}",
                    self.ell1[i], self.ell2[i]
                )));
            }
        }
        let origin_gap = (self.ell1[0] - self.ell2[0]).abs();
        if origin_gap > 1e-10 * self.ell1[0].abs() {
            return Err(LandauError::InvariantViolation(format!(
                "isotropy broken at the origin: |ℓ₁(0) − ℓ₂(0)| = {origin_gap}"
            )));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn settings(&self) -> &FieldSettings {
        &self.settings
    }

    pub fn r_max(&self) -> f64 {
        self.settings.r_max
    }

    fn segment(&self, r: f64) -> Result<usize> {
        if !(r >= 0.0) || r > self.settings.r_max {
            return Err(LandauError::OutOfTableRange {
                r,
                r_max: self.settings.r_max,
            });
        }
        if r <= self.settings.r_min {
            return Ok(0);
        }
        let n = self.settings.table_size;
        let step = (self.settings.r_max / self.settings.r_min).ln() / (n - 1) as f64;
        let guess = ((r / self.settings.r_min).ln() / step).floor() as usize + 1;
        let mut i = guess.min(self.table_r.len() - 2);
        while i > 0 && self.table_r[i] > r {
            i -= 1;
        }
        while i + 2 < self.table_r.len() && self.table_r[i + 1] < r {
            i += 1;
        }
        Ok(i)
    }

    /// Interpolated (ℓ₁(r), ℓ₂(r)).
    pub fn profiles(&self, r: f64) -> Result<(f64, f64)> {
        let i = self.segment(r)?;
        Ok((
            cubic_hermite(
                r,
                self.table_r[i],
                self.table_r[i + 1],
                self.ell1[i],
                self.ell1[i + 1],
                self.dell1[i],
                self.dell1[i + 1],
                false,
            ),
            cubic_hermite(
                r,
                self.table_r[i],
                self.table_r[i + 1],
                self.ell2[i],
                self.ell2[i + 1],
                self.dell2[i],
                self.dell2[i + 1],
                false,
            ),
        ))
    }

    /// Interpolated (ℓ₁′(r), ℓ₂′(r)) — derivative of the cubic segments.
    pub fn profile_derivatives(&self, r: f64) -> Result<(f64, f64)> {
        let i = self.segment(r)?;
        Ok((
            cubic_hermite(
                r,
                self.table_r[i],
                self.table_r[i + 1],
                self.ell1[i],
                self.ell1[i + 1],
                self.dell1[i],
                self.dell1[i + 1],
                true,
            ),
            cubic_hermite(
                r,
                self.table_r[i],
                self.table_r[i + 1],
                self.ell2[i],
                self.ell2[i + 1],
                self.dell2[i],
                self.dell2[i + 1],
                true,
            ),
        ))
    }

    /// Profiles by direct quadrature (no table, any radius).
    pub fn profiles_exact(&self, r: f64) -> (f64, f64) {
        profile_pair_exact(
            self.gamma,
            r,
            self.settings.quad_tol,
            self.settings.max_panels,
        )
    }

    /// ā(v) through the table.
    pub fn abar(&self, v: [f64; 3]) -> Result<Matrix3<f64>> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (l1, l2) = self.profiles(r)?;
        Ok(abar_from_profiles(l1, l2, v))
    }

    /// ā(v) by direct quadrature at the exact radius.
    pub fn abar_exact(&self, v: [f64; 3]) -> Matrix3<f64> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (l1, l2) = self.profiles_exact(r);
        abar_from_profiles(l1, l2, v)
    }

    /// (q(v), d(v)) = (vᵀāv, ∇·(āv)) = (ℓ₁r², 3ℓ₁ + rℓ₁′) through the table.
    pub fn potential_and_drift(&self, v: [f64; 3]) -> Result<(f64, f64)> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (l1, _) = self.profiles(r)?;
        let (dl1, _) = self.profile_derivatives(r)?;
        Ok((l1 * r * r, 3.0 * l1 + r * dl1))
    }

    /// (q, d) at exact radius by quadrature.
    pub fn potential_and_drift_exact(&self, r: f64) -> (f64, f64) {
        let (l1, _) = self.profiles_exact(r);
        let (dl1, _) = profile_derivative_exact(
            self.gamma,
            r,
            1,
            self.settings.quad_tol,
            self.settings.max_panels,
        );
        (l1 * r * r, 3.0 * l1 + r * dl1)
    }

    /// Key identifying the table contents (potential + settings + builder
    /// version), used for the cache file name.
    pub fn cache_key(gamma: f64, settings: &FieldSettings) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"coeff-table-v1");
        hasher.update(gamma.to_bits().to_le_bytes());
        hasher.update(settings.table_size.to_le_bytes());
        hasher.update(settings.r_min.to_bits().to_le_bytes());
        hasher.update(settings.r_max.to_bits().to_le_bytes());
        hasher.update(settings.quad_tol.to_bits().to_le_bytes());
        hasher.update(settings.max_panels.to_le_bytes());
        hex::encode(&hasher.finalize()[..12])
    }

    pub fn save_cache(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load_cache(path: &Path) -> Result<Self> {
        let data = std::fs::read_to_string(path)?;
        let field: CoefficientField = serde_json::from_str(&data)?;
        field.check_invariants()?;
        Ok(field)
    }

    /// Load from `cache_dir` if a matching table exists, else build and save.
    pub fn build_cached(
        config: PotentialConfig,
        settings: FieldSettings,
        cache_dir: Option<&Path>,
    ) -> Result<Self> {
        let dir = match cache_dir {
            Some(d) => d,
            None => return Self::build(config, settings),
        };
        let key = Self::cache_key(config.gamma, &settings);
        let path: PathBuf = dir.join(format!("coeff-{key}.json"));
        if path.exists() {
            let field = Self::load_cache(&path)?;
            if field.gamma.to_bits() == config.gamma.to_bits() && field.settings == settings {
                return Ok(field);
            }
        }
        let field = Self::build(config, settings)?;
        field.save_cache(&path)?;
        Ok(field)
    }
}

/// Cubic Hermite segment evaluation (or its first derivative).
#[allow(clippy::too_many_arguments)]
fn cubic_hermite(r: f64, a: f64, b: f64, fa: f64, fb: f64, da: f64, db: f64, deriv: bool) -> f64 {
    let h = b - a;
    let t = (r - a) / h;
    if deriv {
        let h00 = 6.0 * t * t - 6.0 * t;
        let h10 = 3.0 * t * t - 4.0 * t + 1.0;
        let h01 = -6.0 * t * t + 6.0 * t;
        let h11 = 3.0 * t * t - 2.0 * t;
        (h00 * fa + h01 * fb) / h + h10 * da + h11 * db
    } else {
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * fa + h10 * h * da + h01 * fb + h11 * h * db
    }
}
