//! Tensorized Gauss–Hermite grid for volume integrals of Hermite expansions.
//!
//! The 1-d rule integrates against e^{−x²/2}; products of two ψ-expansions
//! carry exactly that Gaussian decay per axis, so with the modified weights
//! ŵ_q = w_q e^{x_q²/2} the plain-Lebesgue integral ∫ g dv of such products
//! is computed exactly whenever the residual polynomial degree is within the
//! rule's exactness (Q ≥ D + 1 for a degree-D basis; we run Q = D + 8).
//!
//! Everything stays O(1) in magnitude: the tables hold true ψ values (which
//! contain the Gaussian), and the modified weights absorb its inverse.

use crate::index::BasisOrder;
use crate::quad::{gauss_hermite, QuadRule};
use crate::spectral::{hermite_table, SpectralFunction};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Precomputed tensor grid: 1-d rule, ψ tables, per-node weights and the
/// canonical unique-radius map (used to evaluate radial coefficient profiles
/// once per distinct radius instead of once per node).
pub struct TensorGrid {
    q: usize,
    axis_nodes: Vec<f64>,
    modified_weights: Vec<f64>,
    psi: Vec<Vec<f64>>, // [n][q]
    max_degree: usize,
    node_weights: Vec<f64>, // ŵ_{q1} ŵ_{q2} ŵ_{q3}, len q³
    radii: Vec<f64>,        // sorted ascending, unique
    radius_index: Vec<usize>, // node -> index into `radii`
}

impl TensorGrid {
    /// Build a grid with `q` nodes per axis and ψ tables up to `max_degree`.
    pub fn new(q: usize, max_degree: usize) -> Self {
        let rule: QuadRule = gauss_hermite(q);
        let axis_nodes = rule.nodes.clone();
        let modified_weights: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * (x * x / 2.0).exp())
            .collect();
        let psi = hermite_table(&axis_nodes, max_degree);

        let n3 = q * q * q;
        let mut node_weights = vec![0.0; n3];
        for q1 in 0..q {
            for q2 in 0..q {
                let w12 = modified_weights[q1] * modified_weights[q2];
                for q3 in 0..q {
                    node_weights[(q1 * q + q2) * q + q3] = w12 * modified_weights[q3];
                }
            }
        }

        // Unique radii: key nodes by the sorted |x| bit pattern so that all
        // 48 symmetric images of a node share one canonical radius value.
        let mut key_to_idx: HashMap<[u64; 3], usize> = HashMap::new();
        let mut keys: Vec<[f64; 3]> = Vec::new();
        let mut radius_key = vec![0usize; n3];
        for q1 in 0..q {
            for q2 in 0..q {
                for q3 in 0..q {
                    let mut abs = [
                        axis_nodes[q1].abs(),
                        axis_nodes[q2].abs(),
                        axis_nodes[q3].abs(),
                    ];
                    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let key = [abs[0].to_bits(), abs[1].to_bits(), abs[2].to_bits()];
                    let next = keys.len();
                    let idx = *key_to_idx.entry(key).or_insert_with(|| {
                        keys.push(abs);
                        next
                    });
                    radius_key[(q1 * q + q2) * q + q3] = idx;
                }
            }
        }
        let mut radii_unsorted: Vec<f64> = keys
            .iter()
            .map(|a| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt())
            .collect();
        // Sort radius slots ascending and remap node indices.
        let mut perm: Vec<usize> = (0..radii_unsorted.len()).collect();
        perm.sort_by(|&i, &j| {
            radii_unsorted[i]
                .partial_cmp(&radii_unsorted[j])
                .unwrap()
                .then_with(|| keys[i].partial_cmp(&keys[j]).unwrap())
        });
        let mut rank = vec![0usize; perm.len()];
        for (new_pos, &old) in perm.iter().enumerate() {
            rank[old] = new_pos;
        }
        let radii: Vec<f64> = perm.iter().map(|&old| radii_unsorted[old]).collect();
        radii_unsorted.clear();
        let radius_index: Vec<usize> = radius_key.iter().map(|&k| rank[k]).collect();

        TensorGrid {
            q,
            axis_nodes,
            modified_weights,
            psi,
            max_degree,
            node_weights,
            radii,
            radius_index,
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.q * self.q * self.q
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis_nodes
    }

    /// 1-d modified weights ŵ_q = w_q e^{x_q²/2} (plain-dx integration).
    pub fn axis_weights(&self) -> &[f64] {
        &self.modified_weights
    }

    pub fn psi_table(&self) -> &[Vec<f64>] {
        &self.psi
    }

    #[inline]
    pub fn node(&self, n: usize) -> [f64; 3] {
        let q3 = n % self.q;
        let q2 = (n / self.q) % self.q;
        let q1 = n / (self.q * self.q);
        [
            self.axis_nodes[q1],
            self.axis_nodes[q2],
            self.axis_nodes[q3],
        ]
    }

    /// Weight for plain-dv integration at node n.
    #[inline]
    pub fn node_weight(&self, n: usize) -> f64 {
        self.node_weights[n]
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Canonical radius of node n (bit-identical across the 48 images).
    #[inline]
    pub fn node_radius(&self, n: usize) -> f64 {
        self.radii[self.radius_index[n]]
    }

    /// Sorted unique radii and the node → radius-slot map.
    pub fn unique_radii(&self) -> (&[f64], &[usize]) {
        (&self.radii, &self.radius_index)
    }

    /// Sum-factorized evaluation of a coefficient vector on the full grid.
    /// Layout of the result: index (q1·Q + q2)·Q + q3.
    pub fn eval_coeffs(&self, order: &BasisOrder, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(order.len(), coeffs.len());
        let d = order.cap();
        assert!(
            d <= self.max_degree,
            "grid ψ table holds degree ≤ {}, got cap {}",
            self.max_degree,
            d
        );
        let q = self.q;

        // pair id for (a2, a3), a2 + a3 ≤ d
        let mut pair_id = vec![usize::MAX; (d + 1) * (d + 1)];
        let mut n_pairs = 0usize;
        for a3 in 0..=d {
            for a2 in 0..=(d - a3) {
                pair_id[a2 * (d + 1) + a3] = n_pairs;
                n_pairs += 1;
            }
        }

        // Stage 1: contract a1.  t1[pair][q1]
        let mut t1 = vec![0.0; n_pairs * q];
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let a = order.indices()[i].0;
            let p = pair_id[a[1] * (d + 1) + a[2]];
            let row = &self.psi[a[0]];
            let dst = &mut t1[p * q..(p + 1) * q];
            for q1 in 0..q {
                dst[q1] += c * row[q1];
            }
        }

        // Stage 2: contract a2.  t2[a3][q1][q2]
        let mut t2 = vec![0.0; (d + 1) * q * q];
        for a3 in 0..=d {
            for a2 in 0..=(d - a3) {
                let p = pair_id[a2 * (d + 1) + a3];
                let src = &t1[p * q..(p + 1) * q];
                let row = &self.psi[a2];
                let dst = &mut t2[a3 * q * q..(a3 + 1) * q * q];
                for q1 in 0..q {
                    let s = src[q1];
                    if s == 0.0 {
                        continue;
                    }
                    let dd = &mut dst[q1 * q..(q1 + 1) * q];
                    for q2 in 0..q {
                        dd[q2] += s * row[q2];
                    }
                }
            }
        }

        // Stage 3: contract a3.  out[q1][q2][q3]
        let mut out = vec![0.0; q * q * q];
        for a3 in 0..=d {
            let row = &self.psi[a3];
            let src = &t2[a3 * q * q..(a3 + 1) * q * q];
            for q12 in 0..q * q {
                let s = src[q12];
                if s == 0.0 {
                    continue;
                }
                let dst = &mut out[q12 * q..(q12 + 1) * q];
                for q3 in 0..q {
                    dst[q3] += s * row[q3];
                }
            }
        }
        out
    }

    /// Evaluate a spectral function on the grid.
    pub fn eval(&self, f: &SpectralFunction) -> Vec<f64> {
        self.eval_coeffs(f.order(), f.coeffs())
    }

    /// ∫ g dv for grid samples of a function with two-ψ Gaussian decay.
    pub fn integrate_values(&self, vals: &[f64]) -> f64 {
        assert_eq!(vals.len(), self.node_weights.len());
        vals.iter()
            .zip(&self.node_weights)
            .map(|(&v, &w)| v * w)
            .sum()
    }

    /// Gram matrix G_{αβ} = Σ_n w_n Ψ_α(n) Ψ_β(n) for |α|,|β| ≤ cap.
    pub fn gram_matrix(&self, cap: usize) -> DMatrix<f64> {
        assert!(cap <= self.max_degree);
        let order = BasisOrder::shared(cap);
        let dim = order.len();
        let n3 = self.len();
        let q = self.q;
        let mut p = DMatrix::<f64>::zeros(dim, n3);
        for (i, alpha) in order.indices().iter().enumerate() {
            let a = alpha.0;
            for n in 0..n3 {
                let q3 = n % q;
                let q2 = (n / q) % q;
                let q1 = n / (q * q);
                p[(i, n)] = self.psi[a[0]][q1]
                    * self.psi[a[1]][q2]
                    * self.psi[a[2]][q3]
                    * self.node_weights[n].sqrt();
            }
        }
        &p * p.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::MultiIndex;
    use crate::spectral::basis_eval;
    use approx::assert_relative_eq;

    #[test]
    fn gram_is_identity_small() {
        let grid = TensorGrid::new(12, 4);
        let g = grid.gram_matrix(4);
        let dim = g.nrows();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - expect).abs());
            }
        }
        assert!(worst < 1e-12, "gram deviation {worst}");
    }

    #[test]
    fn maxwellian_moments() {
        // ∫ μ = 1 and ∫ |v|² μ = 3 via Ψ₀² samples
        let grid = TensorGrid::new(10, 2);
        let psi0 = SpectralFunction::unit(MultiIndex::ZERO);
        let vals = grid.eval(&psi0);
        let mass: f64 = grid.integrate_values(
            &vals.iter().map(|&x| x * x).collect::<Vec<_>>(),
        );
        assert_relative_eq!(mass, 1.0, max_relative = 1e-13);
        let second: f64 = (0..grid.len())
            .map(|n| {
                let v = grid.node(n);
                let r2: f64 = v.iter().map(|x| x * x).sum();
                grid.node_weight(n) * r2 * vals[n] * vals[n]
            })
            .sum();
        assert_relative_eq!(second, 3.0, max_relative = 1e-13);
    }

    #[test]
    fn sum_factorized_eval_matches_direct() {
        let grid = TensorGrid::new(8, 5);
        let mut f = SpectralFunction::zeros(5);
        f.set(&MultiIndex::new(2, 1, 0), 0.8);
        f.set(&MultiIndex::new(0, 0, 5), -0.35);
        f.set(&MultiIndex::new(1, 1, 3), 1.05);
        let vals = grid.eval(&f);
        for &n in &[0usize, 17, 211, 345, 511] {
            let v = grid.node(n);
            let direct = 0.8 * basis_eval(&MultiIndex::new(2, 1, 0), v)
                - 0.35 * basis_eval(&MultiIndex::new(0, 0, 5), v)
                + 1.05 * basis_eval(&MultiIndex::new(1, 1, 3), v);
            assert_relative_eq!(vals[n], direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn unique_radius_map_covers_all_nodes() {
        let grid = TensorGrid::new(9, 2);
        let (radii, idx) = grid.unique_radii();
        assert_eq!(idx.len(), grid.len());
        // sorted, unique
        for w in radii.windows(2) {
            assert!(w[0] < w[1]);
        }
        // canonical radius close to the direct one at every node
        for n in 0..grid.len() {
            let v = grid.node(n);
            let direct = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert_relative_eq!(grid.node_radius(n), direct, max_relative = 1e-13);
        }
        // symmetric images share one slot: Q=9 has 5 distinct |x| values,
        // so there are at most C(5+2,3) = 35 distinct sorted triples
        assert!(radii.len() <= 35);
    }

    #[test]
    fn orthogonality_integrates_cross_terms_to_zero() {
        let grid = TensorGrid::new(12, 4);
        let f = SpectralFunction::unit(MultiIndex::new(2, 0, 1));
        let g = SpectralFunction::unit(MultiIndex::new(1, 1, 1));
        let fv = grid.eval(&f);
        let gv = grid.eval(&g);
        let prod: Vec<f64> = fv.iter().zip(&gv).map(|(&a, &b)| a * b).collect();
        assert!(grid.integrate_values(&prod).abs() < 1e-14);
        let sq: Vec<f64> = fv.iter().map(|&a| a * a).collect();
        assert_relative_eq!(grid.integrate_values(&sq), 1.0, max_relative = 1e-13);
    }
}
