//! Exact multi-index derivatives of the convolved coefficients.
//!
//! The field is isotropic, ā(v) = A(S) I + B(S) vvᵀ with S = |v|², and the
//! scalar companions q(v) = S·L₁(S) and d(v) = 3L₁(S) + 2S·L₁′(S) are radial
//! (L₁ = A + S B).  Any ∂^β of such expressions is a finite sum of terms
//! c · F^{(k)}(S) · v^m generated by the two Leibniz moves
//!     ∂_j F^{(k)}(S) = 2 v_j F^{(k+1)}(S),
//!     ∂_j v^m = m_j v^{m − e_j},
//! so a derivative tensor costs one S-derivative table per radius plus a few
//! monomial evaluations per point.  The reflection rule
//! ∂^β ā_ij(σ∘v) = σ_i σ_j σ^β ∂^β ā_ij(v) (σ ∈ {±1}³) follows from the same
//! decomposition and lets grid caches work on one octant.

use crate::coeff::{ab_derivatives_quadrature, RadialCoeffSeries, SERIES_RADIUS};
use crate::index::MultiIndex;
use nalgebra::Matrix3;
use std::collections::BTreeMap;

/// One term c · F^{(k)}(S) · v^mono of an expanded derivative.
#[derive(Clone, Copy, Debug)]
pub struct Term {
    pub k: usize,
    pub mono: [usize; 3],
    pub coeff: f64,
}

/// Expand ∂^β [F(S) v^mono0] into terms.
pub fn expand_derivative(beta: &MultiIndex, mono0: [usize; 3]) -> Vec<Term> {
    let mut terms: BTreeMap<(usize, [usize; 3]), f64> = BTreeMap::new();
    terms.insert((0, mono0), 1.0);
    for axis in 0..3 {
        for _ in 0..beta.0[axis] {
            let mut next: BTreeMap<(usize, [usize; 3]), f64> = BTreeMap::new();
            for (&(k, m), &c) in &terms {
                let mut up = m;
                up[axis] += 1;
                *next.entry((k + 1, up)).or_insert(0.0) += 2.0 * c;
                if m[axis] > 0 {
                    let mut down = m;
                    down[axis] -= 1;
                    *next.entry((k, down)).or_insert(0.0) += c * m[axis] as f64;
                }
            }
            terms = next;
        }
    }
    terms
        .into_iter()
        .map(|((k, mono), coeff)| Term { k, mono, coeff })
        .collect()
}

/// Evaluate expanded terms with F-derivative values `fder[k] = F^{(k)}(S)`.
pub fn eval_terms(terms: &[Term], fder: &[f64], v: [f64; 3]) -> f64 {
    terms
        .iter()
        .map(|t| {
            let mut mono = t.coeff;
            for j in 0..3 {
                for _ in 0..t.mono[j] {
                    mono *= v[j];
                }
            }
            mono * fder[t.k]
        })
        .sum()
}

/// S-derivative tables of A, B, L₁ at one radius.
#[derive(Clone, Debug)]
pub struct RadialDerivData {
    pub r: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub l1: Vec<f64>,
}

impl RadialDerivData {
    /// Q^{(k)} for q = S·L₁(S), k ≤ len(l1) − 1.
    pub fn q_derivs(&self, kmax: usize) -> Vec<f64> {
        assert!(kmax < self.l1.len());
        let s = self.r * self.r;
        (0..=kmax)
            .map(|k| {
                let lower = if k > 0 { k as f64 * self.l1[k - 1] } else { 0.0 };
                s * self.l1[k] + lower
            })
            .collect()
    }

    /// D^{(k)} for d = 3L₁ + 2S·L₁′, k ≤ len(l1) − 2.
    pub fn d_derivs(&self, kmax: usize) -> Vec<f64> {
        assert!(kmax + 1 < self.l1.len());
        let s = self.r * self.r;
        (0..=kmax)
            .map(|k| (3.0 + 2.0 * k as f64) * self.l1[k] + 2.0 * s * self.l1[k + 1])
            .collect()
    }
}

/// Derivative engine for one potential: holds the small-radius series and
/// dispatches to the radial quadrature route beyond it.
pub struct DerivativeEngine {
    gamma: f64,
    series: RadialCoeffSeries,
    pub tol: f64,
    pub max_panels: usize,
}

impl DerivativeEngine {
    pub fn new(gamma: f64) -> Self {
        DerivativeEngine {
            gamma,
            series: RadialCoeffSeries::new(gamma),
            tol: 1e-12,
            max_panels: 2000,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// S-derivative tables up to order `kmax` at radius r.
    pub fn data(&self, r: f64, kmax: usize) -> RadialDerivData {
        let s = r * r;
        let (a, b) = if r <= SERIES_RADIUS {
            (
                self.series.a_derivatives(s, kmax),
                self.series.b_derivatives(s, kmax),
            )
        } else {
            ab_derivatives_quadrature(self.gamma, r, kmax, self.tol, self.max_panels)
        };
        let l1: Vec<f64> = (0..=kmax)
            .map(|k| {
                let lower = if k > 0 { k as f64 * b[k - 1] } else { 0.0 };
                a[k] + s * b[k] + lower
            })
            .collect();
        RadialDerivData { r, a, b, l1 }
    }

    /// ∂^β ā(v) from precomputed radial data (|β| ≤ data order).
    pub fn abar_derivative_from_data(
        &self,
        data: &RadialDerivData,
        v: [f64; 3],
        beta: &MultiIndex,
    ) -> Matrix3<f64> {
        assert!(beta.degree() < data.a.len());
        let mut m = Matrix3::zeros();
        let iso_terms = expand_derivative(beta, [0, 0, 0]);
        let iso = eval_terms(&iso_terms, &data.a, v);
        for i in 0..3 {
            for j in i..3 {
                let mut mono0 = [0usize; 3];
                mono0[i] += 1;
                mono0[j] += 1;
                let terms = expand_derivative(beta, mono0);
                let mut val = eval_terms(&terms, &data.b, v);
                if i == j {
                    val += iso;
                }
                m[(i, j)] = val;
                m[(j, i)] = val;
            }
        }
        m
    }

    /// ∂^β ā(v), building the radial table on the fly.
    pub fn abar_derivative(&self, v: [f64; 3], beta: &MultiIndex) -> Matrix3<f64> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let data = self.data(r, beta.degree());
        self.abar_derivative_from_data(&data, v, beta)
    }

    /// ∂^β q(v) for the potential q = vᵀāv.
    pub fn q_derivative(&self, v: [f64; 3], beta: &MultiIndex) -> f64 {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let data = self.data(r, beta.degree());
        let q = data.q_derivs(beta.degree());
        eval_terms(&expand_derivative(beta, [0, 0, 0]), &q, v)
    }

    /// ∂^β d(v) for the drift d = ∇·(āv).
    pub fn d_derivative(&self, v: [f64; 3], beta: &MultiIndex) -> f64 {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let data = self.data(r, beta.degree() + 1);
        let d = data.d_derivs(beta.degree());
        eval_terms(&expand_derivative(beta, [0, 0, 0]), &d, v)
    }
}
