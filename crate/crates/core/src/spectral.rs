//! Scaled Hermite functions and spectral (coefficient-space) calculus.
//!
//! The 1-d basis is ψ_n(x) = 2^{−1/4} φ_n(2^{−1/2} x) with φ_n the standard
//! orthonormal Hermite functions, so that {ψ_n} is orthonormal in L²(ℝ, dx)
//! and ψ₀(x) = (2π)^{−1/4} e^{−x²/4} — i.e. Ψ₀ = √μ for the unit Maxwellian.
//!
//! The whole calculus rests on the ladder operators
//!     A_{±,j} = v_j/2 ∓ ∂_j,
//! which act on coefficients by shifting one index:
//!     A_{+,j} Ψ_α = √(α_j+1) Ψ_{α+e_j},   A_{−,j} Ψ_α = √(α_j) Ψ_{α−e_j},
//! giving ∂_j = (A_{−,j} − A_{+,j})/2 and v_j· = A_{+,j} + A_{−,j} exactly at
//! the coefficient level, and H = −Δ + |v|²/4 diagonal with H Ψ_α = (|α|+3/2)Ψ_α.

use crate::error::{LandauError, Result};
use crate::index::{BasisOrder, MultiIndex};
use std::sync::Arc;

/// Evaluate ψ_n(x) by the stable three-term recurrence
/// ψ_{k+1} = (x ψ_k − √k ψ_{k−1})/√(k+1), ψ₀ = (2π)^{−1/4} e^{−x²/4}.
pub fn hermite_eval_1d(n: usize, x: f64) -> f64 {
    let psi0 = (2.0 * std::f64::consts::PI).powf(-0.25) * (-x * x / 4.0).exp();
    if n == 0 {
        return psi0;
    }
    let mut prev = psi0;
    let mut cur = x * psi0;
    for k in 1..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Fill `out[0..=max_degree]` with ψ_0(x) … ψ_{max_degree}(x).
pub fn hermite_eval_into(x: f64, max_degree: usize, out: &mut [f64]) {
    debug_assert!(out.len() > max_degree);
    let psi0 = (2.0 * std::f64::consts::PI).powf(-0.25) * (-x * x / 4.0).exp();
    out[0] = psi0;
    if max_degree == 0 {
        return;
    }
    out[1] = x * psi0;
    for k in 1..max_degree {
        out[k + 1] = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
    }
}

/// Table of ψ_n(x_q) for n ≤ max_degree over a fixed set of points,
/// filled by the same recurrence (layout: row n, column q).
pub fn hermite_table(points: &[f64], max_degree: usize) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; points.len()]; max_degree + 1];
    let mut buf = vec![0.0; max_degree + 1];
    for (q, &x) in points.iter().enumerate() {
        hermite_eval_into(x, max_degree, &mut buf);
        for (n, row) in table.iter_mut().enumerate() {
            row[q] = buf[n];
        }
    }
    table
}

/// Evaluate the tensor mode Ψ_α(v) = ∏_j ψ_{α_j}(v_j).
pub fn basis_eval(alpha: &MultiIndex, v: [f64; 3]) -> f64 {
    (0..3)
        .map(|j| hermite_eval_1d(alpha.0[j], v[j]))
        .product()
}

/// Ladder direction for [`SpectralFunction::ladder`].
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Ladder {
    Raise,
    Lower,
}

/// A function on ℝ³ represented by Hermite coefficients up to a degree cap:
/// f = Σ_{|α| ≤ cap} c_α Ψ_α.
///
/// Values are stored densely in the canonical basis order.  All operations are
/// pure: they return new functions, growing the cap where the operation
/// requires headroom (raise, multiply, derivative each need cap+1).
#[derive(Clone, Debug)]
pub struct SpectralFunction {
    order: Arc<BasisOrder>,
    coeffs: Vec<f64>,
}

impl SpectralFunction {
    /// The zero function at a given cap.
    pub fn zeros(cap: usize) -> Self {
        let order = BasisOrder::shared(cap);
        let coeffs = vec![0.0; order.len()];
        SpectralFunction { order, coeffs }
    }

    /// A single basis mode δ_α (cap = |α|).
    pub fn unit(alpha: MultiIndex) -> Self {
        let mut f = SpectralFunction::zeros(alpha.degree());
        let i = f.order.index_of(&alpha).expect("unit mode within cap");
        f.coeffs[i] = 1.0;
        f
    }

    /// Build from a coefficient slice in canonical order at the given cap.
    pub fn from_coeffs(cap: usize, coeffs: Vec<f64>) -> Result<Self> {
        let order = BasisOrder::shared(cap);
        if coeffs.len() != order.len() {
            return Err(LandauError::InvalidArgument(format!(
                "coefficient vector length {} does not match dim {} at cap {}",
                coeffs.len(),
                order.len(),
                cap
            )));
        }
        Ok(SpectralFunction { order, coeffs })
    }

    pub fn cap(&self) -> usize {
        self.order.cap()
    }

    pub fn order(&self) -> &Arc<BasisOrder> {
        &self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, alpha: &MultiIndex) -> f64 {
        match self.order.index_of(alpha) {
            Some(i) => self.coeffs[i],
            None => 0.0,
        }
    }

    pub fn set(&mut self, alpha: &MultiIndex, value: f64) {
        let i = self
            .order
            .index_of(alpha)
            .expect("mode outside degree cap");
        self.coeffs[i] = value;
    }

    /// L² norm = Euclidean norm of the coefficients (orthonormal basis).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Re-encode at a new cap: grows by zero-padding (prefix-stable order),
    /// shrinks by dropping high modes (explicit truncation).
    pub fn with_cap(&self, cap: usize) -> Self {
        let order = BasisOrder::shared(cap);
        let mut coeffs = vec![0.0; order.len()];
        let n = coeffs.len().min(self.coeffs.len());
        coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        SpectralFunction { order, coeffs }
    }

    /// Truncate to a lower cap (alias of `with_cap`, named for intent).
    pub fn truncate(&self, cap: usize) -> Self {
        self.with_cap(cap)
    }

    /// Apply a ladder operator on axis j.  Raising needs one degree of
    /// headroom and returns a function with cap+1; lowering keeps the cap.
    pub fn ladder(&self, j: usize, dir: Ladder) -> Self {
        assert!(j < 3, "axis out of range");
        match dir {
            Ladder::Raise => {
                let mut out = SpectralFunction::zeros(self.cap() + 1);
                for (i, &c) in self.coeffs.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let alpha = self.order.indices()[i];
                    let up = alpha.raised(j);
                    let k = out.order.index_of(&up).expect("raise headroom");
                    out.coeffs[k] += ((alpha.0[j] + 1) as f64).sqrt() * c;
                }
                out
            }
            Ladder::Lower => {
                let mut out = SpectralFunction::zeros(self.cap());
                for (i, &c) in self.coeffs.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let alpha = self.order.indices()[i];
                    if let Some(down) = alpha.lowered(j) {
                        let k = out.order.index_of(&down).expect("lower within cap");
                        out.coeffs[k] += (alpha.0[j] as f64).sqrt() * c;
                    }
                }
                out
            }
        }
    }

    /// ∂_j f = (A_{−,j} − A_{+,j})/2 · f, exact on coefficients (cap grows by 1).
    pub fn derivative(&self, j: usize) -> Self {
        assert!(j < 3, "axis out of range");
        let mut out = SpectralFunction::zeros(self.cap() + 1);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let alpha = self.order.indices()[i];
            let up = alpha.raised(j);
            let k_up = out.order.index_of(&up).expect("derivative headroom");
            out.coeffs[k_up] -= 0.5 * ((alpha.0[j] + 1) as f64).sqrt() * c;
            if let Some(down) = alpha.lowered(j) {
                let k_dn = out.order.index_of(&down).expect("lower within cap");
                out.coeffs[k_dn] += 0.5 * (alpha.0[j] as f64).sqrt() * c;
            }
        }
        out
    }

    /// ∂^β f by iterated single derivatives (cap grows by |β|).
    pub fn derivative_multi(&self, beta: &MultiIndex) -> Self {
        let mut f = self.clone();
        for j in 0..3 {
            for _ in 0..beta.0[j] {
                f = f.derivative(j);
            }
        }
        f
    }

    /// v_j · f = (A_{+,j} + A_{−,j}) f (cap grows by 1).
    pub fn multiply_v(&self, j: usize) -> Self {
        assert!(j < 3, "axis out of range");
        let mut out = SpectralFunction::zeros(self.cap() + 1);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let alpha = self.order.indices()[i];
            let up = alpha.raised(j);
            let k_up = out.order.index_of(&up).expect("multiply headroom");
            out.coeffs[k_up] += ((alpha.0[j] + 1) as f64).sqrt() * c;
            if let Some(down) = alpha.lowered(j) {
                let k_dn = out.order.index_of(&down).expect("lower within cap");
                out.coeffs[k_dn] += (alpha.0[j] as f64).sqrt() * c;
            }
        }
        out
    }

    /// (−Δ + |v|²/4) f: diagonal, multiplies c_α by (|α| + 3/2).
    pub fn harmonic_apply(&self) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let alpha = out.order.indices()[i];
            *c *= alpha.degree() as f64 + 1.5;
        }
        out
    }

    /// Pointwise evaluation f(v) = Σ c_α Ψ_α(v).
    pub fn eval(&self, v: [f64; 3]) -> f64 {
        let tables: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                hermite_table(&[v[j]], self.cap())
                    .into_iter()
                    .map(|row| row[0])
                    .collect()
            })
            .collect();
        let mut acc = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let a = self.order.indices()[i];
            acc += c * tables[0][a.0[0]] * tables[1][a.0[1]] * tables[2][a.0[2]];
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    /// f + g at the larger cap.
    pub fn add(&self, other: &SpectralFunction) -> Self {
        let cap = self.cap().max(other.cap());
        let mut out = self.with_cap(cap);
        for (i, &c) in other.coeffs.iter().enumerate() {
            out.coeffs[i] += c;
        }
        out
    }

    /// Inner product ⟨f, g⟩ in L² (coefficient dot product).
    pub fn dot(&self, other: &SpectralFunction) -> f64 {
        let n = self.coeffs.len().min(other.coeffs.len());
        (0..n).map(|i| self.coeffs[i] * other.coeffs[i]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Frozen oracle values (Rodrigues/recurrence evaluation at 40 digits).
    const PSI0_AT_0: f64 = 0.63161877774606470129;
    const PSI5_AT_1_3: f64 = 0.046970119140806836531;
    const PSI3_AT_M0_7: f64 = 0.40082065664207954923;
    const PSI12_AT_2_25: f64 = 0.0097750465225321691239;
    const BIG_PSI0_AT_ORIGIN: f64 = 0.25197943553838073035;

    #[test]
    fn hermite_eval_matches_oracle() {
        assert_relative_eq!(hermite_eval_1d(0, 0.0), PSI0_AT_0, max_relative = 1e-14);
        assert_relative_eq!(hermite_eval_1d(5, 1.3), PSI5_AT_1_3, max_relative = 1e-13);
        assert_relative_eq!(hermite_eval_1d(3, -0.7), PSI3_AT_M0_7, max_relative = 1e-13);
        assert_relative_eq!(
            hermite_eval_1d(12, 2.25),
            PSI12_AT_2_25,
            max_relative = 1e-12
        );
    }

    #[test]
    fn ground_state_is_sqrt_maxwellian() {
        assert_relative_eq!(
            basis_eval(&MultiIndex::ZERO, [0.0; 3]),
            BIG_PSI0_AT_ORIGIN,
            max_relative = 1e-14
        );
        // √μ(v) at a generic point
        let v = [0.3, -1.1, 0.75];
        let r2: f64 = v.iter().map(|x| x * x).sum();
        let mu_sqrt = (2.0 * std::f64::consts::PI).powf(-0.75) * (-r2 / 4.0).exp();
        assert_relative_eq!(basis_eval(&MultiIndex::ZERO, v), mu_sqrt, max_relative = 1e-14);
    }

    #[test]
    fn table_agrees_with_single_eval() {
        let pts = [-3.0, -0.4, 0.0, 1.7, 5.9];
        let table = hermite_table(&pts, 15);
        for (q, &x) in pts.iter().enumerate() {
            for n in (0..=15).step_by(3) {
                assert_relative_eq!(table[n][q], hermite_eval_1d(n, x), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn ladder_moves_single_modes() {
        // A_{+,1} Ψ₀ = Ψ_{e₁}, A_{−,1} Ψ_{e₁} = Ψ₀, A_{−,1} Ψ₀ = 0.
        let psi0 = SpectralFunction::unit(MultiIndex::ZERO);
        let up = psi0.ladder(0, Ladder::Raise);
        assert_eq!(up.get(&MultiIndex::new(1, 0, 0)), 1.0);
        let down = up.ladder(0, Ladder::Lower);
        assert_eq!(down.get(&MultiIndex::ZERO), 1.0);
        assert_eq!(psi0.ladder(0, Ladder::Lower).l2_norm(), 0.0);
    }

    #[test]
    fn derivative_and_multiply_examples() {
        // ∂₁Ψ₀ = −½Ψ_{e₁};  v₁Ψ₀ = Ψ_{e₁};  v₁Ψ_{e₁} = √2 Ψ_{2e₁} + Ψ₀.
        let psi0 = SpectralFunction::unit(MultiIndex::ZERO);
        let d = psi0.derivative(0);
        assert_eq!(d.get(&MultiIndex::new(1, 0, 0)), -0.5);

        let m = psi0.multiply_v(0);
        assert_eq!(m.get(&MultiIndex::new(1, 0, 0)), 1.0);

        let e1 = SpectralFunction::unit(MultiIndex::new(1, 0, 0));
        let m2 = e1.multiply_v(0);
        assert_relative_eq!(m2.get(&MultiIndex::new(2, 0, 0)), 2.0_f64.sqrt());
        assert_eq!(m2.get(&MultiIndex::ZERO), 1.0);
    }

    #[test]
    fn harmonic_oscillator_diagonal() {
        let f = SpectralFunction::unit(MultiIndex::new(2, 1, 0));
        let h = f.harmonic_apply();
        assert_eq!(h.get(&MultiIndex::new(2, 1, 0)), 3.0 + 1.5);
    }

    #[test]
    fn pointwise_derivative_matches_finite_difference() {
        // spectral ∂₁ vs central finite difference of the pointwise evaluation
        let mut f = SpectralFunction::zeros(4);
        f.set(&MultiIndex::new(2, 1, 0), 0.7);
        f.set(&MultiIndex::new(0, 0, 3), -0.4);
        f.set(&MultiIndex::new(1, 1, 1), 1.3);
        let df = f.derivative(0);
        let v = [0.52, -0.91, 0.33];
        let h = 1e-5;
        let fd = (f.eval([v[0] + h, v[1], v[2]]) - f.eval([v[0] - h, v[1], v[2]])) / (2.0 * h);
        assert_relative_eq!(df.eval(v), fd, max_relative = 1e-8);
    }

    #[test]
    fn multiply_matches_pointwise_product() {
        let mut f = SpectralFunction::zeros(3);
        f.set(&MultiIndex::new(1, 0, 2), 0.9);
        f.set(&MultiIndex::new(0, 1, 0), -1.1);
        let vf = f.multiply_v(2);
        let v = [0.1, 0.77, -1.3];
        assert_relative_eq!(vf.eval(v), v[2] * f.eval(v), max_relative = 1e-12);
    }
}
