//! Semigroup evolution ∂_t f = −𝓑 f.
//!
//! The primary propagator is exact: one symmetric eigendecomposition
//! B = V Λ Vᵀ turns the semigroup into f(t) = V e^{−tΛ} Vᵀ f₀, evaluated
//! independently per snapshot time.  Unconditionally stable implicit
//! steppers (backward Euler, trapezoidal) cross-validate the exact route
//! and exercise the path a matrix-free scaling of the solver would take.
//!
//! Energy accounting uses the closed form available in eigencoordinates:
//! with c = Vᵀ f₀,
//!
//!   ‖f(t)‖² = Σ c_i² e^{−2λ_i t},
//!   2 ∫₀ᵗ (fᵀBf)(s) ds = Σ c_i² (1 − e^{−2λ_i t}),
//!
//! so the dissipation identity ‖f(t)‖² + 2∫₀ᵗ fᵀBf ds = ‖f₀‖² can be
//! checked with the left side evaluated through the evolved coefficients
//! and the integral through the eigenvalues.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::galerkin::GalerkinOperator;
use crate::spectral::SpectralFunction;

/// Relative floor below which a negative eigenvalue is treated as roundoff
/// from an exactly PSD matrix and clamped to zero.
const EIGEN_CLAMP_REL: f64 = 1e-10;

/// Sorted, clamped symmetric eigendecomposition of a Galerkin operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    gamma: f64,
    cap: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Decomposes `op`, sorting eigenvalues ascending and clamping the
    /// roundoff-negative ones to zero.  A genuinely negative eigenvalue
    /// (beyond roundoff scale) reports an invariant violation.
    pub fn new(op: &GalerkinOperator) -> Result<Self> {
        if op.max_symmetry_defect() != 0.0 {
            return Err(LandauError::InvariantViolation(
                "eigendecomposition requires an exactly symmetric operator".to_string(),
            ));
        }
        let eig = op.matrix().clone().symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .expect("eigenvalues are finite")
                .then(a.cmp(&b))
        });
        let scale = order
            .last()
            .map(|&i| eig.eigenvalues[i].abs())
            .unwrap_or(0.0)
            .max(1.0);
        let mut eigenvalues = Vec::with_capacity(n);
        let mut eigenvectors = DMatrix::<f64>::zeros(n, n);
        for (slot, &src) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[src];
            if lambda < -EIGEN_CLAMP_REL * scale {
                return Err(LandauError::InvariantViolation(format!(
                    "operator eigenvalue {lambda} is negative beyond roundoff"
                )));
            }
            eigenvalues.push(lambda.max(0.0));
            let col = eig.eigenvectors.column(src);
            // Deterministic sign convention: the entry of largest magnitude
            // (first such on ties) is nonnegative.
            let mut pivot = 0;
            for k in 1..n {
                if col[k].abs() > col[pivot].abs() {
                    pivot = k;
                }
            }
            let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
            for k in 0..n {
                eigenvectors[(k, slot)] = sign * col[k];
            }
        }
        Ok(SpectralDecomposition {
            gamma: op.gamma(),
            cap: op.cap(),
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order (all ≥ 0).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Coordinates of `f` in the eigenbasis, c = Vᵀ x.
    pub fn project(&self, f: &SpectralFunction) -> DVector<f64> {
        let x = DVector::from_column_slice(f.with_cap(self.cap).coeffs());
        self.eigenvectors.transpose() * x
    }

    /// f(t) = V e^{−tΛ} Vᵀ f₀.
    pub fn evolve(&self, f0: &SpectralFunction, t: f64) -> SpectralFunction {
        let mut c = self.project(f0);
        for (ci, lambda) in c.iter_mut().zip(self.eigenvalues.iter()) {
            *ci *= (-t * lambda).exp();
        }
        let x = &self.eigenvectors * c;
        SpectralFunction::from_coeffs(self.cap, x.as_slice().to_vec())
            .expect("eigenbasis preserves dimension")
    }

    /// Closed-form Dirichlet value (fᵀBf)(t) = Σ λ_i c_i² e^{−2λ_i t}.
    pub fn form_value(&self, c0: &DVector<f64>, t: f64) -> f64 {
        c0.iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| l * c * c * (-2.0 * t * l).exp())
            .sum()
    }

    /// Closed-form dissipated energy 2∫₀ᵗ fᵀBf ds = Σ c_i²(1 − e^{−2λ_i t}).
    pub fn dissipated_energy(&self, c0: &DVector<f64>, t: f64) -> f64 {
        c0.iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| c * c * (-(-2.0 * t * l).exp_m1()))
            .sum()
    }

    /// |‖f(t)‖² + 2∫₀ᵗ fᵀBf ds − ‖f₀‖²| with ‖f(t)‖² evaluated through the
    /// evolved coefficient vector (an independent pass through V).
    pub fn energy_identity_residual(&self, f0: &SpectralFunction, t: f64) -> f64 {
        let c0 = self.project(f0);
        let ft = self.evolve(f0, t);
        let lhs = ft.l2_norm().powi(2) + self.dissipated_energy(&c0, t);
        let rhs = f0.with_cap(self.cap).l2_norm().powi(2);
        (lhs - rhs).abs()
    }
}

/// Snapshot record of an exact-semigroup run.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    gamma: f64,
    cap: usize,
    initial: SpectralFunction,
    times: Vec<f64>,
    snapshots: Vec<SpectralFunction>,
    l2_sq: Vec<f64>,
    form_values: Vec<f64>,
}

impl EvolutionTrace {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn initial(&self) -> &SpectralFunction {
        &self.initial
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralFunction] {
        &self.snapshots
    }

    /// ‖f(t)‖² per snapshot, evaluated from the evolved coefficients.
    pub fn l2_sq(&self) -> &[f64] {
        &self.l2_sq
    }

    /// Dirichlet form value fᵀBf per snapshot (closed form).
    pub fn form_values(&self) -> &[f64] {
        &self.form_values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Exact semigroup propagation, one snapshot per requested time.
///
/// Times must be strictly increasing and nonnegative.
pub fn evolve_exact(
    decomp: &SpectralDecomposition,
    f0: &SpectralFunction,
    times: &[f64],
) -> Result<EvolutionTrace> {
    for pair in times.windows(2) {
        if pair[1] <= pair[0] {
            return Err(LandauError::InvalidArgument(
                "snapshot times must be strictly increasing".to_string(),
            ));
        }
    }
    if times.first().map(|t| *t < 0.0).unwrap_or(false) {
        return Err(LandauError::InvalidArgument(
            "snapshot times must be nonnegative".to_string(),
        ));
    }
    let c0 = decomp.project(f0);
    let snapshots: Vec<SpectralFunction> = times.iter().map(|&t| decomp.evolve(f0, t)).collect();
    let l2_sq: Vec<f64> = snapshots.iter().map(|f| f.l2_norm().powi(2)).collect();
    let form_values: Vec<f64> = times.iter().map(|&t| decomp.form_value(&c0, t)).collect();
    Ok(EvolutionTrace {
        gamma: decomp.gamma(),
        cap: decomp.cap(),
        initial: f0.with_cap(decomp.cap()),
        times: times.to_vec(),
        snapshots,
        l2_sq,
        form_values,
    })
}

/// Geometric snapshot schedule over [t_min, t_max], `n` points inclusive.
pub fn geometric_times(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) || n < 2 {
        return Err(LandauError::InvalidArgument(format!(
            "geometric schedule needs 0 < t_min < t_max and n ≥ 2, got [{t_min}, {t_max}] with n = {n}"
        )));
    }
    let ratio = (t_max / t_min).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|k| t_min * (ratio * k as f64).exp())
        .collect())
}

/// Implicit time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    BackwardEuler,
    Trapezoidal,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::BackwardEuler => write!(f, "backward-euler"),
            Scheme::Trapezoidal => write!(f, "trapezoidal"),
        }
    }
}

/// Factor-once implicit stepper for ḟ = −Bf.
///
/// Backward Euler solves (I + dt B) f⁺ = f; trapezoidal solves
/// (I + dt/2 B) f⁺ = (I − dt/2 B) f.  Both system matrices are SPD, so the
/// Cholesky factorization exists and each step is one triangular
/// solve pair.
pub struct Stepper<'a> {
    op: &'a GalerkinOperator,
    scheme: Scheme,
    dt: f64,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl<'a> Stepper<'a> {
    pub fn new(op: &'a GalerkinOperator, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LandauError::InvalidArgument(format!(
                "step size must be positive and finite, got {dt}"
            )));
        }
        let n = op.dim();
        let shift = match scheme {
            Scheme::BackwardEuler => dt,
            Scheme::Trapezoidal => 0.5 * dt,
        };
        let mut m = op.matrix() * shift;
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let chol = nalgebra::Cholesky::new(m).ok_or_else(|| {
            LandauError::InvariantViolation(
                "Cholesky factorization of I + dt·B failed; operator is not PSD".to_string(),
            )
        })?;
        Ok(Stepper {
            op,
            scheme,
            dt,
            chol,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances the coefficient vector by one step.
    pub fn step(&self, x: &DVector<f64>) -> DVector<f64> {
        let rhs = match self.scheme {
            Scheme::BackwardEuler => x.clone(),
            Scheme::Trapezoidal => x - self.op.matrix() * x * (0.5 * self.dt),
        };
        self.chol.solve(&rhs)
    }
}

/// Runs `n_steps` equal implicit steps to t = n_steps · dt.
pub fn evolve_stepped(
    op: &GalerkinOperator,
    f0: &SpectralFunction,
    dt: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<SpectralFunction> {
    let stepper = Stepper::new(op, dt, scheme)?;
    let mut x = DVector::from_column_slice(f0.with_cap(op.cap()).coeffs());
    for _ in 0..n_steps {
        x = stepper.step(&x);
    }
    Ok(SpectralFunction::from_coeffs(op.cap(), x.as_slice().to_vec())
        .expect("stepper preserves dimension"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TensorGrid;
    use crate::index::MultiIndex;
    use crate::norms::NormContext;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn operator(gamma: f64, q: usize, cap: usize) -> GalerkinOperator {
        let grid = Arc::new(TensorGrid::new(q, cap));
        let ctx = NormContext::new(grid, gamma, 1e-12, 2000);
        GalerkinOperator::assemble(&ctx, cap).unwrap()
    }

    fn rough_datum(cap: usize) -> SpectralFunction {
        // Deterministic non-trivial datum touching every mode.
        let order = crate::index::BasisOrder::shared(cap);
        let coeffs: Vec<f64> = (0..order.len())
            .map(|k| if k % 3 == 0 { 1.0 } else { -0.5 } * (1.0 + 0.1 * (k as f64)))
            .collect();
        SpectralFunction::from_coeffs(cap, coeffs).unwrap()
    }

    #[test]
    fn maxwellian_is_stationary() {
        let op = operator(-1.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let psi0 = SpectralFunction::unit(MultiIndex::ZERO);
        for t in [0.1, 1.0, 5.0, 100.0] {
            let ft = decomp.evolve(&psi0, t);
            let diff = ft.add(&psi0.scaled(-1.0)).l2_norm();
            assert!(diff <= 1e-12, "t = {t}: drift {diff}");
        }
    }

    #[test]
    fn zero_mode_eigenpair_is_exact() {
        let op = operator(-1.5, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        // The Maxwellian row is exactly zero, so λ = 0 is exact and e₀ is an
        // exact eigenvector up to eigensolver roundoff.
        assert_eq!(decomp.eigenvalues()[0], 0.0);
        let v0 = decomp.eigenvectors().column(0);
        assert!(
            (v0[0].abs() - 1.0).abs() <= 1e-12,
            "kernel vector misaligned: first component {}",
            v0[0]
        );
        assert!(decomp.eigenvalues().iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn energy_identity_holds_in_closed_form() {
        let op = operator(-1.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(4);
        for t in [0.01, 0.1, 1.0, 10.0] {
            let res = decomp.energy_identity_residual(&f0, t);
            assert!(
                res <= 1e-9 * f0.l2_norm().powi(2),
                "t = {t}: residual {res}"
            );
        }
    }

    #[test]
    fn l2_norm_decays_monotonically() {
        let op = operator(-2.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(4);
        let times = geometric_times(1e-4, 10.0, 24).unwrap();
        let trace = evolve_exact(&decomp, &f0, &times).unwrap();
        for pair in trace.l2_sq().windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-14));
        }
        for pair in trace.form_values().windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn long_time_limit_is_the_maxwellian_projection() {
        let op = operator(-1.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(4);
        let ft = decomp.evolve(&f0, 1e3);
        let projection = f0.coeffs()[0];
        let expected = SpectralFunction::unit(MultiIndex::ZERO).scaled(projection);
        let diff = ft.add(&expected.scaled(-1.0)).l2_norm();
        assert!(diff <= 1e-10, "residual {diff}");
    }

    #[test]
    fn trapezoidal_matches_exact_semigroup() {
        let op = operator(-1.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(4);
        let exact = decomp.evolve(&f0, 1.0);
        let stepped = evolve_stepped(&op, &f0, 1e-3, 1000, Scheme::Trapezoidal).unwrap();
        let err = stepped.add(&exact.scaled(-1.0)).l2_norm() / exact.l2_norm();
        assert!(err <= 1e-5, "relative error {err}");
    }

    #[test]
    fn trapezoidal_is_second_order() {
        let op = operator(-1.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(4);
        let exact = decomp.evolve(&f0, 1.0);
        let mut errs = Vec::new();
        for n in [40usize, 80, 160] {
            let dt = 1.0 / n as f64;
            let stepped = evolve_stepped(&op, &f0, dt, n, Scheme::Trapezoidal).unwrap();
            errs.push(stepped.add(&exact.scaled(-1.0)).l2_norm());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (order - 2.0).abs() <= 0.1,
                "observed order {order}, errors {errs:?}"
            );
        }
    }

    #[test]
    fn backward_euler_is_first_order_and_contractive() {
        let op = operator(-1.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(4);
        let exact = decomp.evolve(&f0, 1.0);
        let mut errs = Vec::new();
        for n in [100usize, 200, 400] {
            let dt = 1.0 / n as f64;
            let stepped = evolve_stepped(&op, &f0, dt, n, Scheme::BackwardEuler).unwrap();
            errs.push(stepped.add(&exact.scaled(-1.0)).l2_norm());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (order - 1.0).abs() <= 0.1,
                "observed order {order}, errors {errs:?}"
            );
        }
        // Resolvent contraction: the norm never grows across a step.
        let stepper = Stepper::new(&op, 0.05, Scheme::BackwardEuler).unwrap();
        let mut x = DVector::from_column_slice(f0.coeffs());
        for _ in 0..50 {
            let next = stepper.step(&x);
            assert!(next.norm() <= x.norm() * (1.0 + 1e-14));
            x = next;
        }
    }

    #[test]
    fn truncation_does_not_commute_with_evolution() {
        // Guard against silently assuming mode decoupling: evolving at D = 4
        // and then truncating to D = 2 must NOT match evolving the truncated
        // datum with the D = 2 operator.
        let op_big = operator(-1.0, 12, 4);
        let op_small = operator(-1.0, 12, 2);
        let f0 = rough_datum(4);
        let big = SpectralDecomposition::new(&op_big).unwrap();
        let small = SpectralDecomposition::new(&op_small).unwrap();
        let evolved_then_truncated = big.evolve(&f0, 0.5).truncate(2);
        let truncated_then_evolved = small.evolve(&f0.truncate(2), 0.5);
        let diff = evolved_then_truncated
            .add(&truncated_then_evolved.scaled(-1.0))
            .l2_norm();
        assert!(
            diff > 1e-6,
            "modes appear decoupled (difference {diff}); the guard is miswired"
        );
    }

    #[test]
    fn decomposition_is_deterministic() {
        let op = operator(-1.0, 12, 3);
        let a = SpectralDecomposition::new(&op).unwrap();
        let b = SpectralDecomposition::new(&op).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.eigenvectors().iter().zip(b.eigenvectors().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn time_zero_is_identity() {
        let op = operator(-1.0, 12, 4);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(4);
        let ft = decomp.evolve(&f0, 0.0);
        let diff = ft.add(&f0.scaled(-1.0)).l2_norm();
        assert!(diff <= 1e-13 * f0.l2_norm());
    }

    #[test]
    fn schedule_and_trace_validation() {
        assert!(geometric_times(0.0, 1.0, 5).is_err());
        assert!(geometric_times(1.0, 0.5, 5).is_err());
        assert!(geometric_times(1e-4, 2.0, 1).is_err());
        let times = geometric_times(1e-4, 2.0, 9).unwrap();
        assert_eq!(times.len(), 9);
        assert_relative_eq!(times[0], 1e-4, max_relative = 1e-14);
        assert_relative_eq!(times[8], 2.0, max_relative = 1e-14);

        let op = operator(-1.0, 12, 3);
        let decomp = SpectralDecomposition::new(&op).unwrap();
        let f0 = rough_datum(3);
        assert!(evolve_exact(&decomp, &f0, &[0.2, 0.1]).is_err());
        assert!(evolve_exact(&decomp, &f0, &[-0.5, 0.1]).is_err());
    }
}
