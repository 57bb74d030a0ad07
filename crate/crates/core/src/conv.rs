//! Independent 3-d quadrature for kernel convolutions
//!     C_ij(v) = ∫ a_ij(v − w) √μ(w) h(w) dw,
//! with h a Hermite expansion.  This route shares nothing with the radial
//! profile machinery: it integrates in spherical coordinates z = v − w
//! centred at the kernel singularity, so it serves as the cross-check for
//! ā (h = Ψ₀, since μ = √μ·Ψ₀) and for the derivative tensors through
//!     ∂^β ā_ij(v) = (−1)^{|β|} √(β!) ∫ a_ij(v−w) √μ(w) Ψ_β(w) dw.
//!
//! Structure of the integrand in z-spherical coordinates (polar axis v̂):
//!  * the azimuthal factor is a trigonometric polynomial of degree
//!    ≤ deg(h) + 2, so an equispaced rectangle rule with deg(h) + 4 points
//!    is exact;
//!  * |w|² = r² + ρ² − 2rρu depends only on (ρ, u); the Gaussian
//!    concentrates at u = 1 for large rρ, handled by the substitution
//!    t = rρ(1−u)/2;
//!  * the radial factor ρ^{γ+4} is tamed on [0,1] by ρ = σ².

use crate::index::MultiIndex;
use crate::quad::{adaptive_integrate_array, gauss_legendre_cached, scaled_rule};
use crate::spectral::{hermite_eval_into, SpectralFunction};
use nalgebra::Matrix3;

/// Azimuthal + polar reduction at fixed ρ: returns the six components
/// (00, 11, 22, 01, 02, 12) of ∫ dΩ (δ − ẑẑᵀ)_ij √μ(v − ρẑ) h(v − ρẑ).
struct AngularKernel<'a> {
    r: f64,
    e1: [f64; 3],
    e2: [f64; 3],
    e3: [f64; 3],
    h: &'a SpectralFunction,
    n_psi: usize,
}

const MU_QUARTER: f64 = 0.25197943553838073035; // (2π)^{−3/4}

fn eval_h(h: &SpectralFunction, w: [f64; 3]) -> f64 {
    let cap = h.cap();
    assert!(cap < 64, "convolution h capped at degree 63");
    let mut t = [[0.0f64; 64]; 3];
    for j in 0..3 {
        hermite_eval_into(w[j], cap, &mut t[j]);
    }
    let order = h.order();
    let mut acc = 0.0;
    for (i, &c) in h.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let a = order.indices()[i].0;
        acc += c * t[0][a[0]] * t[1][a[1]] * t[2][a[2]];
    }
    acc
}

impl AngularKernel<'_> {
    /// Average over the azimuth circle at polar angle u, WITHOUT the
    /// (ρ,u)-dependent Gaussian factor (applied by the caller).
    fn azimuth(&self, rho: f64, u: f64) -> [f64; 6] {
        let su = (1.0 - u * u).max(0.0).sqrt();
        let n = self.n_psi;
        let dpsi = 2.0 * std::f64::consts::PI / n as f64;
        let mut acc = [0.0f64; 6];
        for tix in 0..n {
            let psi = dpsi * tix as f64;
            let (spsi, cpsi) = psi.sin_cos();
            let mut zhat = [0.0f64; 3];
            let mut w = [0.0f64; 3];
            for k in 0..3 {
                zhat[k] = u * self.e3[k] + su * (cpsi * self.e1[k] + spsi * self.e2[k]);
                w[k] = self.r * self.e3[k] - rho * zhat[k];
            }
            let hval = eval_h(self.h, w);
            acc[0] += hval * (1.0 - zhat[0] * zhat[0]);
            acc[1] += hval * (1.0 - zhat[1] * zhat[1]);
            acc[2] += hval * (1.0 - zhat[2] * zhat[2]);
            acc[3] += hval * (-zhat[0] * zhat[1]);
            acc[4] += hval * (-zhat[0] * zhat[2]);
            acc[5] += hval * (-zhat[1] * zhat[2]);
        }
        for a in acc.iter_mut() {
            *a *= dpsi;
        }
        acc
    }

    /// Full angular integral ∫ du ∫ dψ with the Gaussian e^{−|w|²/4} and the
    /// normalisation (2π)^{−3/4} folded in.
    fn polar(&self, rho: f64) -> [f64; 6] {
        let r = self.r;
        let s2 = 0.5 * r * rho;
        let mut acc = [0.0f64; 6];
        if s2 <= 8.0 {
            let rule = gauss_legendre_cached(32);
            for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
                let expo = (-0.25 * (r * r + rho * rho - 2.0 * r * rho * u)).exp();
                if expo == 0.0 {
                    continue;
                }
                let az = self.azimuth(rho, u);
                for k in 0..6 {
                    acc[k] += wu * expo * az[k];
                }
            }
        } else {
            // t = rρ(1−u)/2, u = 1 − t/s2, du = dt/s2
            let prefactor = (-0.25 * (rho - r) * (rho - r)).exp();
            if prefactor == 0.0 {
                return acc;
            }
            let t_max = (2.0 * s2).min(46.0);
            let edges: [f64; 7] = [0.0, 1.0, 3.0, 8.0, 18.0, 32.0, 46.0];
            let rule = gauss_legendre_cached(20);
            for win in edges.windows(2) {
                let (a, b) = (win[0].min(t_max), win[1].min(t_max));
                if b <= a {
                    break;
                }
                let panel = scaled_rule(&rule, a, b);
                for (&t, &wt) in panel.nodes.iter().zip(&panel.weights) {
                    let u = 1.0 - t / s2;
                    let az = self.azimuth(rho, u);
                    let damp = prefactor * (-t).exp() / s2;
                    for k in 0..6 {
                        acc[k] += wt * damp * az[k];
                    }
                }
            }
        }
        for a in acc.iter_mut() {
            *a *= MU_QUARTER;
        }
        acc
    }
}

/// Deterministic orthonormal frame with ê₃ ∝ v (falls back to the lab frame
/// at the origin).
pub(crate) fn frame(v: [f64; 3]) -> ([f64; 3], [f64; 3], [f64; 3], f64) {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if r < 1e-13 {
        return ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], 0.0);
    }
    let e3 = [v[0] / r, v[1] / r, v[2] / r];
    // axis least aligned with e3
    let mut k_min = 0;
    for k in 1..3 {
        if e3[k].abs() < e3[k_min].abs() {
            k_min = k;
        }
    }
    let mut a = [0.0; 3];
    a[k_min] = 1.0;
    let dot = a[0] * e3[0] + a[1] * e3[1] + a[2] * e3[2];
    let mut e1 = [a[0] - dot * e3[0], a[1] - dot * e3[1], a[2] - dot * e3[2]];
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for x in e1.iter_mut() {
        *x /= n1;
    }
    let e2 = [
        e3[1] * e1[2] - e3[2] * e1[1],
        e3[2] * e1[0] - e3[0] * e1[2],
        e3[0] * e1[1] - e3[1] * e1[0],
    ];
    (e1, e2, e3, r)
}

/// C_ij(v) = ∫ a_ij(v − w) √μ(w) h(w) dw by 3-d quadrature.
pub fn convolve_kernel(
    gamma: f64,
    v: [f64; 3],
    h: &SpectralFunction,
    tol: f64,
    max_panels: usize,
) -> Matrix3<f64> {
    let (e1, e2, e3, r) = frame(v);
    let kernel = AngularKernel {
        r,
        e1,
        e2,
        e3,
        h,
        n_psi: (h.cap() + 4).max(8),
    };

    // ρ ∈ [0, 1] with ρ = σ²
    let f_power = |sigma: f64| -> [f64; 6] {
        if sigma <= 0.0 {
            return [0.0; 6];
        }
        let rho = sigma * sigma;
        let scale = 2.0 * sigma.powf(2.0 * gamma + 9.0);
        let mut val = kernel.polar(rho);
        for x in val.iter_mut() {
            *x *= scale;
        }
        val
    };
    let part1 = adaptive_integrate_array(&f_power, 0.0, 1.0, tol, max_panels);

    // main window around the Gaussian ridge ρ ≈ r (decay e^{−(ρ−r)²/4})
    let lo = (r - 20.0).max(1.0);
    let hi = r + 20.0;
    let f_main = |rho: f64| -> [f64; 6] {
        let scale = rho.powf(gamma + 4.0);
        let mut val = kernel.polar(rho);
        for x in val.iter_mut() {
            *x *= scale;
        }
        val
    };
    let part2 = adaptive_integrate_array(&f_main, lo, hi, tol, max_panels);

    let mut m = Matrix3::zeros();
    let total = |k: usize| part1[k] + part2[k];
    m[(0, 0)] = total(0);
    m[(1, 1)] = total(1);
    m[(2, 2)] = total(2);
    m[(0, 1)] = total(3);
    m[(1, 0)] = total(3);
    m[(0, 2)] = total(4);
    m[(2, 0)] = total(4);
    m[(1, 2)] = total(5);
    m[(2, 1)] = total(5);
    m
}

/// ā(v) = (a ∗ μ)(v) via the 3-d route (h = Ψ₀, because μ = √μ Ψ₀).
pub fn abar_independent(gamma: f64, v: [f64; 3], tol: f64, max_panels: usize) -> Matrix3<f64> {
    let h = SpectralFunction::unit(MultiIndex::ZERO);
    convolve_kernel(gamma, v, &h, tol, max_panels)
}

/// ∂^β ā(v) via the 3-d route.
pub fn abar_derivative_independent(
    gamma: f64,
    v: [f64; 3],
    beta: &MultiIndex,
    tol: f64,
    max_panels: usize,
) -> Matrix3<f64> {
    let h = SpectralFunction::unit(*beta);
    let sign = if beta.degree() % 2 == 0 { 1.0 } else { -1.0 };
    let scale = sign * beta.factorial().sqrt();
    convolve_kernel(gamma, v, &h, tol, max_panels) * scale
}
