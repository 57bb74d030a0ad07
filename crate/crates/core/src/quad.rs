//! Quadrature rules: Gauss–Hermite for the weight e^{−x²/2}, Gauss–Legendre
//! on [−1, 1], and a deterministic adaptive panel integrator.
//!
//! Both Gaussian rules are built by Golub–Welsch: nodes are the eigenvalues of
//! the symmetric tridiagonal Jacobi matrix of the orthogonal-polynomial
//! recurrence, and the weight of node i is μ₀·(first eigenvector component)².

use nalgebra::{DMatrix, SymmetricEigen};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of a 1-d quadrature rule.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Golub–Welsch for a symmetric-tridiagonal Jacobi matrix with zero diagonal
/// and the given off-diagonal, with total mass μ₀ = ∫ weight.
fn golub_welsch(offdiag: &[f64], mu0: f64) -> QuadRule {
    let n = offdiag.len() + 1;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for (k, &b) in offdiag.iter().enumerate() {
        jac[(k, k + 1)] = b;
        jac[(k + 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let w = mu0 * eig.eigenvectors[(0, i)].powi(2);
            (x, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Symmetrize: the weight is even in all our rules, so enforce exact
    // node antisymmetry and weight symmetry to kill eigensolver jitter.
    let m = n / 2;
    for i in 0..m {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[m].0 = 0.0;
    }
    QuadRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// n-point Gauss–Hermite rule for ∫ f(x) e^{−x²/2} dx over ℝ (probabilists'
/// scaling): Jacobi off-diagonal √k, μ₀ = √(2π).  Exact for polynomials of
/// degree ≤ 2n−1 against the weight.
pub fn gauss_hermite(n: usize) -> QuadRule {
    assert!(n >= 1);
    if n == 1 {
        return QuadRule {
            nodes: vec![0.0],
            weights: vec![(2.0 * std::f64::consts::PI).sqrt()],
        };
    }
    let offdiag: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    golub_welsch(&offdiag, (2.0 * std::f64::consts::PI).sqrt())
}

/// n-point Gauss–Legendre rule on [−1, 1]: off-diagonal k/√(4k²−1), μ₀ = 2.
pub fn gauss_legendre(n: usize) -> QuadRule {
    assert!(n >= 1);
    if n == 1 {
        return QuadRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&offdiag, 2.0)
}

/// Shared Gauss–Legendre rules: building one requires an eigendecomposition,
/// and the adaptive integrator asks for the same sizes millions of times.
pub fn gauss_legendre_cached(n: usize) -> Arc<QuadRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(gauss_legendre(n)))
        .clone()
}

/// Map a [−1,1] rule onto [a,b].
pub fn scaled_rule(rule: &QuadRule, a: f64, b: f64) -> QuadRule {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    QuadRule {
        nodes: rule.nodes.iter().map(|&x| mid + half * x).collect(),
        weights: rule.weights.iter().map(|&w| half * w).collect(),
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    seq: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.seq == other.seq
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on error; break ties by insertion order for determinism.
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Deterministic adaptive integrator on [a, b]: each panel is estimated with
/// GL_n and GL_2n; the panel with the largest |GL_2n − GL_n| is bisected until
/// the summed error estimate meets `tol` (absolute + relative mix) or the
/// panel budget is exhausted.  The refinement order is deterministic.
pub fn adaptive_integrate(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> AdaptiveResult {
    const N_LO: usize = 15;
    let lo = gauss_legendre_cached(N_LO);
    let hi = gauss_legendre_cached(2 * N_LO);
    let eval = |a: f64, b: f64, seq: u64| -> Panel {
        let r_lo = scaled_rule(&lo, a, b);
        let r_hi = scaled_rule(&hi, a, b);
        let v_lo = r_lo.integrate(f);
        let v_hi = r_hi.integrate(f);
        Panel {
            a,
            b,
            value: v_hi,
            error: (v_hi - v_lo).abs(),
            seq,
        }
    };

    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    heap.push(eval(a, b, seq));
    let mut total_value: f64 = heap.peek().unwrap().value;
    let mut total_error: f64 = heap.peek().unwrap().error;

    while heap.len() < max_panels {
        let scale = total_value.abs().max(1.0);
        if total_error <= tol * scale {
            break;
        }
        let worst = heap.pop().unwrap();
        // Bisection floor: panels narrower than ~1 ulp can't be split.
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        seq += 1;
        let left = eval(worst.a, mid, seq);
        seq += 1;
        let right = eval(mid, worst.b, seq);
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Recompute the totals from scratch to avoid error accumulation drift.
    let panels: Vec<Panel> = heap.into_vec();
    let value = panels.iter().map(|p| p.value).sum();
    let error_estimate = panels.iter().map(|p| p.error).sum();
    AdaptiveResult {
        value,
        error_estimate,
        panels: panels.len(),
    }
}

/// Array-valued variant of [`adaptive_integrate`]: one panel tree shared by
/// K components, refined on the summed component error.  Used where several
/// integrals share an expensive integrand (e.g. the six components of a
/// symmetric tensor).
pub fn adaptive_integrate_array<const K: usize>(
    f: &dyn Fn(f64) -> [f64; K],
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> [f64; K] {
    struct VPanel<const K: usize> {
        a: f64,
        b: f64,
        value: [f64; K],
        error: f64,
    }
    const N_LO: usize = 15;
    let lo = gauss_legendre_cached(N_LO);
    let hi = gauss_legendre_cached(2 * N_LO);
    let eval = |a: f64, b: f64| -> VPanel<K> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut v_lo = [0.0; K];
        for (&x, &w) in lo.nodes.iter().zip(&lo.weights) {
            let fv = f(mid + half * x);
            for k in 0..K {
                v_lo[k] += half * w * fv[k];
            }
        }
        let mut v_hi = [0.0; K];
        for (&x, &w) in hi.nodes.iter().zip(&hi.weights) {
            let fv = f(mid + half * x);
            for k in 0..K {
                v_hi[k] += half * w * fv[k];
            }
        }
        let error = (0..K).map(|k| (v_hi[k] - v_lo[k]).abs()).sum();
        VPanel {
            a,
            b,
            value: v_hi,
            error,
        }
    };

    let mut panels: Vec<VPanel<K>> = vec![eval(a, b)];
    loop {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        let scale = panels
            .iter()
            .flat_map(|p| p.value.iter().map(|v| v.abs()))
            .fold(1.0f64, f64::max);
        if total_error <= tol * scale || panels.len() >= max_panels {
            break;
        }
        // worst panel; ties broken by insertion order
        let (worst_idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|(i, p), (j, q)| {
                p.error
                    .partial_cmp(&q.error)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| j.cmp(i))
            })
            .unwrap();
        let worst = panels.swap_remove(worst_idx);
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            panels.push(worst);
            break;
        }
        panels.push(eval(worst.a, mid));
        panels.push(eval(mid, worst.b));
    }
    // deterministic summation order
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
    let mut out = [0.0; K];
    for p in &panels {
        for k in 0..K {
            out[k] += p.value[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_hermite_moments() {
        // ∫ x^{2k} e^{−x²/2} dx = √(2π) (2k−1)!!
        let rule = gauss_hermite(20);
        let sqrt2pi = (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(rule.integrate(|_| 1.0), sqrt2pi, max_relative = 1e-14);
        assert_relative_eq!(rule.integrate(|x| x * x), sqrt2pi, max_relative = 1e-13);
        assert_relative_eq!(
            rule.integrate(|x| x.powi(4)),
            3.0 * sqrt2pi,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            rule.integrate(|x| x.powi(10)),
            945.0 * sqrt2pi,
            max_relative = 1e-12
        );
        // odd moments vanish exactly by symmetrization
        assert!(rule.integrate(|x| x.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn gauss_hermite_degree_exactness() {
        // n-point rule is exact for degree ≤ 2n−1
        let n = 8;
        let rule = gauss_hermite(n);
        let sqrt2pi = (2.0 * std::f64::consts::PI).sqrt();
        // x^14 has exact moment 13!! √(2π)
        let m14 = 135135.0 * sqrt2pi;
        assert_relative_eq!(rule.integrate(|x| x.powi(14)), m14, max_relative = 1e-12);
    }

    #[test]
    fn gauss_hermite_orthonormality() {
        // ∫ ψ_m ψ_n dx = δ_{mn}: with x s.t. ψ_n = p_n(x)·e^{−x²/4}-type weight,
        // ψ_mψ_n e^{x²/2} is a polynomial of degree m+n against e^{−x²/2}.
        let deg = 10;
        let rule = gauss_hermite(deg + 2);
        for m in 0..=deg {
            for n in 0..=deg {
                let val: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| {
                        let pm = crate::spectral::hermite_eval_1d(m, x);
                        let pn = crate::spectral::hermite_eval_1d(n, x);
                        // ψ values contain e^{−x²/4} each; multiply back e^{x²/2}
                        w * pm * pn * (x * x / 2.0).exp()
                    })
                    .sum();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!(
                    (val - expect).abs() < 1e-12,
                    "⟨ψ_{m}, ψ_{n}⟩ = {val}"
                );
            }
        }
    }

    #[test]
    fn gauss_legendre_polynomials() {
        let rule = gauss_legendre(6);
        assert_relative_eq!(rule.integrate(|_| 1.0), 2.0, max_relative = 1e-15);
        assert_relative_eq!(rule.integrate(|x| x * x), 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(
            rule.integrate(|x| x.powi(10)),
            2.0 / 11.0,
            max_relative = 1e-13
        );
        let shifted = scaled_rule(&rule, 0.0, 2.0);
        assert_relative_eq!(shifted.integrate(|x| x), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_integrable_singularity() {
        // ∫₀¹ x^{−1/2} dx = 2 (kink at 0 forces panel refinement)
        let f = |x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 };
        let res = adaptive_integrate(&f, 0.0, 1.0, 1e-10, 4000);
        assert_relative_eq!(res.value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn adaptive_smooth_is_cheap_and_exact() {
        let f = |x: f64| (-x * x / 2.0).exp();
        let res = adaptive_integrate(&f, -10.0, 10.0, 1e-13, 2000);
        assert_relative_eq!(
            res.value,
            (2.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-13
        );
        assert!(res.panels < 64, "smooth integrand used {} panels", res.panels);
    }

    #[test]
    fn adaptive_array_matches_scalar() {
        let f = |x: f64| [x.sin(), (x * x).cos(), x.abs().sqrt()];
        let v = adaptive_integrate_array(&f, 0.0, 2.0, 1e-12, 2000);
        for (k, g) in [
            |x: f64| x.sin(),
            |x: f64| (x * x).cos(),
            |x: f64| x.abs().sqrt(),
        ]
        .iter()
        .enumerate()
        {
            let s = adaptive_integrate(g, 0.0, 2.0, 1e-12, 2000);
            assert_relative_eq!(v[k], s.value, max_relative = 1e-10);
        }
    }

    #[test]
    fn adaptive_is_deterministic() {
        let f = |x: f64| (10.0 * x).sin().abs() * x.abs().powf(-0.3).min(1e6);
        let r1 = adaptive_integrate(&f, 0.0, 3.0, 1e-9, 3000);
        let r2 = adaptive_integrate(&f, 0.0, 3.0, 1e-9, 3000);
        assert_eq!(r1.value.to_bits(), r2.value.to_bits());
        assert_eq!(r1.panels, r2.panels);
    }
}
