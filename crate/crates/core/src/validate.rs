//! Empirical-constant measurement for the operator's structural inequalities.
//!
//! The analytic theory hinges on inequalities that hold with unspecified
//! constants: the ultra-analytic coefficient bounds |∂^βā_ij| ≲ ⟨v⟩^{γ+1}√β!,
//! the commutator estimate |Σ⟨⟨v⟩^{2θ}∂^βā_ij ∂_jf, ∂_ig⟩| ≲ √β!‖f‖_{A,θ}‖g‖_{A,θ},
//! the weighted Galerkin-pairing bound with its three √β!/|β|√β! sums, the
//! coercivity comparison, and the Grönwall energy bound
//! ‖f(t)‖² + ∫₀ᵗ‖f(s)‖²_A ds ≤ e^{2C₀T}‖f₀‖².  None of these constants is
//! given numerically by the theory, so this module measures them: each
//! validator evaluates the ratio LHS/RHS-without-constant over seeded random
//! samples and reports the empirical constant (max ratio, or min for the
//! coercivity lower bound) together with enough metadata to reproduce every
//! number bit-exactly.
//!
//! The pairing LHS (⟨v⟩^{2θ}∂^α(−𝓑f), ∂^αf) is evaluated in the weak form
//! obtained by moving the divergence term onto the test function,
//!     LHS = −T₁ − T₂ − T₃ + T₄,
//!     T₁ = Σ_{β≤α} C_α^β ∫ ⟨v⟩^{2θ} (∂^βā ∇∂^{α−β}f) · ∇∂^αf,
//!     T₂ = Σ_{β≤α} C_α^β ∫ 2θ⟨v⟩^{2(θ−1)} (∂^βā ∇∂^{α−β}f) · v ∂^αf,
//!     T₃ = ¼ Σ_{β≤α} C_α^β ∫ ⟨v⟩^{2θ} ∂^βq ∂^{α−β}f ∂^αf,
//!     T₄ = ½ Σ_{β≤α} C_α^β ∫ ⟨v⟩^{2θ} ∂^βd ∂^{α−β}f ∂^αf,
//! which needs only grid caches of ∂^βā, ∂^βq, ∂^βd and spectral derivatives
//! of f — every factor is exact up to the shared Gauss–Hermite quadrature.

use crate::deriv::{expand_derivative, eval_terms, DerivativeEngine, RadialDerivData};
use crate::error::{LandauError, Result};
use crate::evolve::{EvolutionTrace, SpectralDecomposition};
use crate::grid::TensorGrid;
use crate::index::{enumerate_basis, MultiIndex};
use crate::norms::NormContext;
use crate::spectral::SpectralFunction;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Grid caches of the exact multi-index derivatives of ā, q, and d.
///
/// One radial S-derivative table per distinct grid radius serves every node
/// and every β with |β| ≤ `kmax`; a per-β cache is then a few monomial
/// evaluations per node.
pub struct DerivativeField {
    grid: Arc<TensorGrid>,
    kmax: usize,
    node_slot: Vec<usize>,
    radial: Vec<RadialDerivData>,
    qtab: Vec<Vec<f64>>,
    dtab: Vec<Vec<f64>>,
}

/// Symmetric 3×3 values packed as [a11, a22, a33, a12, a13, a23].
pub type Sym6 = [f64; 6];

fn sym6_apply(m: &Sym6, x: [f64; 3]) -> [f64; 3] {
    [
        m[0] * x[0] + m[3] * x[1] + m[4] * x[2],
        m[3] * x[0] + m[1] * x[1] + m[5] * x[2],
        m[4] * x[0] + m[5] * x[1] + m[2] * x[2],
    ]
}

impl DerivativeField {
    /// Build radial derivative tables (order `kmax` + 1, so that the drift
    /// d = 3ℓ₁ + 2S·ℓ₁′ still has `kmax` clean derivatives) at every distinct
    /// radius of the grid, in parallel.
    pub fn new(
        grid: Arc<TensorGrid>,
        gamma: f64,
        kmax: usize,
        tol: f64,
        max_panels: usize,
    ) -> Self {
        let mut engine = DerivativeEngine::new(gamma);
        engine.tol = tol;
        engine.max_panels = max_panels;
        let (radii, node_map) = grid.unique_radii();
        let radial: Vec<RadialDerivData> = radii
            .par_iter()
            .map(|&r| engine.data(r, kmax + 1))
            .collect();
        let qtab: Vec<Vec<f64>> = radial.par_iter().map(|d| d.q_derivs(kmax)).collect();
        let dtab: Vec<Vec<f64>> = radial.par_iter().map(|d| d.d_derivs(kmax)).collect();
        let node_slot = node_map.to_vec();
        DerivativeField {
            grid,
            kmax,
            node_slot,
            radial,
            qtab,
            dtab,
        }
    }

    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    fn check_order(&self, beta: &MultiIndex) -> Result<()> {
        if beta.degree() > self.kmax {
            return Err(LandauError::CapacityExceeded {
                needed: beta.degree(),
                available: self.kmax,
            });
        }
        Ok(())
    }

    /// Per-node values of the six independent components of ∂^βā.
    pub fn abar_values(&self, beta: &MultiIndex) -> Result<Vec<Sym6>> {
        self.check_order(beta)?;
        let iso_terms = expand_derivative(beta, [0, 0, 0]);
        let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
        let pair_terms: Vec<_> = pairs
            .iter()
            .map(|&(i, j)| {
                let mut mono0 = [0usize; 3];
                mono0[i] += 1;
                mono0[j] += 1;
                expand_derivative(beta, mono0)
            })
            .collect();
        let vals: Vec<Sym6> = (0..self.grid.len())
            .into_par_iter()
            .map(|n| {
                let v = self.grid.node(n);
                let data = &self.radial[self.node_slot[n]];
                let iso = eval_terms(&iso_terms, &data.a, v);
                let mut out = [0.0; 6];
                for (k, terms) in pair_terms.iter().enumerate() {
                    out[k] = eval_terms(terms, &data.b, v);
                    if k < 3 {
                        out[k] += iso;
                    }
                }
                out
            })
            .collect();
        Ok(vals)
    }

    /// Per-node values of ∂^βq for the potential q = vᵀāv.
    pub fn q_values(&self, beta: &MultiIndex) -> Result<Vec<f64>> {
        self.check_order(beta)?;
        let terms = expand_derivative(beta, [0, 0, 0]);
        Ok((0..self.grid.len())
            .into_par_iter()
            .map(|n| eval_terms(&terms, &self.qtab[self.node_slot[n]], self.grid.node(n)))
            .collect())
    }

    /// Per-node values of ∂^βd for the drift d = ∇·(āv).
    pub fn d_values(&self, beta: &MultiIndex) -> Result<Vec<f64>> {
        self.check_order(beta)?;
        let terms = expand_derivative(beta, [0, 0, 0]);
        Ok((0..self.grid.len())
            .into_par_iter()
            .map(|n| eval_terms(&terms, &self.dtab[self.node_slot[n]], self.grid.node(n)))
            .collect())
    }
}

/// Experiment envelope shared by the sampled validators.  Every report embeds
/// its config, which together with the seed reproduces all numbers bit-exactly.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ValidatorConfig {
    pub gamma: f64,
    /// Degree cap of the sampled functions.
    pub cap: usize,
    /// Gauss–Hermite points per axis.
    pub grid_q: usize,
    pub seed: u64,
    pub n_samples: usize,
    /// Commutator derivative range (|β| ≤ beta_max).
    pub beta_max: usize,
    /// Pairing derivative range (|α| ≤ m_max).
    pub m_max: usize,
    /// Weight exponents θ probed by the commutator and coercivity validators.
    pub thetas: Vec<f64>,
    pub quad_tol: f64,
    pub max_panels: usize,
}

impl ValidatorConfig {
    /// Moderate defaults for one potential; heavy knobs stay adjustable.
    pub fn for_gamma(gamma: f64) -> Self {
        ValidatorConfig {
            gamma,
            cap: 6,
            grid_q: 18,
            seed: 0x5EED_0001,
            n_samples: 48,
            beta_max: 4,
            m_max: 3,
            thetas: vec![0.0, gamma / 2.0, gamma],
            quad_tol: 1e-12,
            max_panels: 2000,
        }
    }

    fn validated(&self) -> Result<()> {
        if !(-3.0 < self.gamma && self.gamma < 0.0) {
            return Err(LandauError::GammaOutOfRange(self.gamma));
        }
        if self.n_samples == 0 {
            return Err(LandauError::InvalidArgument(
                "validator needs at least one sample".into(),
            ));
        }
        Ok(())
    }
}

/// One measured ratio.  `ratio_alt` carries the variant reading where an
/// inequality admits two (the pairing's third sum over |β| ≥ 1 vs |β| ≥ 2).
#[derive(Clone, Debug, serde::Serialize)]
pub struct RatioRow {
    pub sample: usize,
    pub alpha: Option<MultiIndex>,
    pub beta: Option<MultiIndex>,
    pub theta: f64,
    pub ratio: f64,
    pub ratio_alt: Option<f64>,
}

/// Outcome of one validator: the flat ratio table, the empirical constant,
/// and named auxiliary constants.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EstimateReport {
    /// Which inequality was probed ("commutator", "pairing", "coercivity",
    /// "energy").
    pub inequality: String,
    pub config: ValidatorConfig,
    pub rows: Vec<RatioRow>,
    /// Empirical constant: max ratio, except the coercivity validator where
    /// the bound is from below and the constant is the min ratio.
    pub constant: f64,
    /// Named side measurements (variant constants, companion-inequality
    /// constants, margins).
    pub aux: Vec<(String, f64)>,
}

impl EstimateReport {
    pub fn aux_value(&self, name: &str) -> Option<f64> {
        self.aux
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

/// Draw a spectral function with coefficients uniform in [−1, 1).
fn sample_function(cap: usize, rng: &mut ChaCha8Rng) -> SpectralFunction {
    let dim = SpectralFunction::zeros(cap).coeffs().len();
    let coeffs = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SpectralFunction::from_coeffs(cap, coeffs).expect("dimension matches the cap by construction")
}

/// Ultra-analyticity probe for the convolved coefficients: group maxima of
///   |∂^βā_ij| / (⟨v⟩^{γ+1}√β!)             for 1 ≤ |β| ≤ beta_max,
///   |∂^βq|, |∂^βd| / (⟨v⟩^{γ+1}(|β|+1)√β!) for 0 ≤ |β| ≤ beta_max,
/// over a fixed fan of sample points, plus the drift of those maxima under
/// quadrature refinement (the same probe with a 100× looser tolerance).
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundProbe {
    pub gamma: f64,
    pub beta_max: usize,
    /// abar_group_max[k−1] = max ratio over |β| = k, k = 1..=beta_max.
    pub abar_group_max: Vec<f64>,
    /// q_group_max[k] = max ratio over |β| = k, k = 0..=beta_max.
    pub q_group_max: Vec<f64>,
    pub d_group_max: Vec<f64>,
    /// max over 1 ≤ |β| ≤ beta_max of abar group max, divided by the |β| = 1
    /// group max.
    pub max_over_first_ratio: f64,
    /// Max relative change of any group max between the probe tolerance and a
    /// 100× looser one.
    pub refinement_drift: f64,
}

const PROBE_RADII: [f64; 12] = [
    0.0, 0.25, 0.6, 1.0, 1.6, 2.4, 3.3, 4.5, 7.0, 11.0, 18.0, 30.0,
];

fn probe_directions() -> [[f64; 3]; 6] {
    let s = 1.0 / 3.0f64.sqrt();
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [s, s, s],
        [1.0 / 3.0, -2.0 / 3.0, 2.0 / 3.0],
        [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0],
    ]
}

fn probe_groups(
    gamma: f64,
    beta_max: usize,
    tol: f64,
    max_panels: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut engine = DerivativeEngine::new(gamma);
    engine.tol = tol;
    engine.max_panels = max_panels;
    let betas = enumerate_basis(beta_max);
    let dirs = probe_directions();

    let per_radius: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = PROBE_RADII
        .par_iter()
        .map(|&r| {
            let data = engine.data(r, beta_max + 1);
            let qd = data.q_derivs(beta_max);
            let dd = data.d_derivs(beta_max);
            let bracket = (1.0 + r * r).sqrt();
            let mut amax = vec![0.0f64; beta_max + 1];
            let mut qmax = vec![0.0f64; beta_max + 1];
            let mut dmax = vec![0.0f64; beta_max + 1];
            for dir in &dirs {
                let v = [r * dir[0], r * dir[1], r * dir[2]];
                for beta in &betas {
                    let k = beta.degree();
                    let sqb = beta.factorial().sqrt();
                    let aw = bracket.powf(gamma + 1.0) * sqb;
                    let qw = aw * (k as f64 + 1.0);
                    let m = engine.abar_derivative_from_data(&data, v, beta);
                    let entry = m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
                    amax[k] = amax[k].max(entry / aw);
                    let terms = expand_derivative(beta, [0, 0, 0]);
                    qmax[k] = qmax[k].max(eval_terms(&terms, &qd, v).abs() / qw);
                    dmax[k] = dmax[k].max(eval_terms(&terms, &dd, v).abs() / qw);
                }
                if r == 0.0 {
                    break; // all directions coincide at the origin
                }
            }
            (amax, qmax, dmax)
        })
        .collect();

    let mut amax = vec![0.0f64; beta_max + 1];
    let mut qmax = vec![0.0f64; beta_max + 1];
    let mut dmax = vec![0.0f64; beta_max + 1];
    for (a, q, d) in &per_radius {
        for k in 0..=beta_max {
            amax[k] = amax[k].max(a[k]);
            qmax[k] = qmax[k].max(q[k]);
            dmax[k] = dmax[k].max(d[k]);
        }
    }
    (amax[1..].to_vec(), qmax, dmax)
}

/// Probe the coefficient derivative bounds over the fixed point fan.
pub fn probe_lemma21(
    gamma: f64,
    beta_max: usize,
    tol: f64,
    max_panels: usize,
) -> Result<BoundProbe> {
    if !(-3.0 < gamma && gamma < 0.0) {
        return Err(LandauError::GammaOutOfRange(gamma));
    }
    if beta_max == 0 {
        return Err(LandauError::InvalidArgument(
            "bound probe needs beta_max >= 1".into(),
        ));
    }
    let (abar, q, d) = probe_groups(gamma, beta_max, tol, max_panels);
    let (abar_loose, q_loose, d_loose) = probe_groups(gamma, beta_max, tol * 100.0, max_panels);
    let mut drift = 0.0f64;
    for (tight, loose) in [(&abar, &abar_loose), (&q, &q_loose), (&d, &d_loose)] {
        for (&x, &y) in tight.iter().zip(loose.iter()) {
            if x > 0.0 {
                drift = drift.max((x - y).abs() / x);
            }
        }
    }
    let first = abar[0];
    let overall = abar.iter().fold(0.0f64, |acc, &x| acc.max(x));
    Ok(BoundProbe {
        gamma,
        beta_max,
        abar_group_max: abar,
        q_group_max: q,
        d_group_max: d,
        max_over_first_ratio: overall / first,
        refinement_drift: drift,
    })
}

fn build_context(cfg: &ValidatorConfig, headroom: usize) -> (Arc<TensorGrid>, NormContext) {
    let grid = Arc::new(TensorGrid::new(cfg.grid_q, cfg.cap + headroom));
    let ctx = NormContext::new(grid.clone(), cfg.gamma, cfg.quad_tol, cfg.max_panels);
    (grid, ctx)
}

/// Commutator estimate: ratios
///   |Σ_ij ⟨⟨v⟩^{2θ}∂^βā_ij ∂_jf, ∂_ig⟩| / (√β! ‖f‖_{A,θ}‖g‖_{A,θ})
/// over seeded random pairs (f, g), all |β| ≤ beta_max and θ in the config
/// set.  The empirical constant is the max ratio.
pub fn validate_lemma22(cfg: &ValidatorConfig) -> Result<EstimateReport> {
    cfg.validated()?;
    let (grid, ctx) = build_context(cfg, 1);
    let field = DerivativeField::new(grid.clone(), cfg.gamma, cfg.beta_max, cfg.quad_tol, cfg.max_panels);

    let betas = enumerate_basis(cfg.beta_max);
    let abar: Vec<Vec<Sym6>> = betas
        .iter()
        .map(|b| field.abar_values(b))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<(SpectralFunction, SpectralFunction)> = (0..cfg.n_samples)
        .map(|_| {
            (
                sample_function(cfg.cap, &mut rng),
                sample_function(cfg.cap, &mut rng),
            )
        })
        .collect();

    let w = grid.node_weights();
    let b2 = ctx.bracket2_on_grid();

    let rows: Vec<RatioRow> = pairs
        .par_iter()
        .enumerate()
        .map(|(s, (f, g))| -> Result<Vec<RatioRow>> {
            let gf = ctx.gradient_values(f)?;
            let gg = ctx.gradient_values(g)?;
            let fvals = grid.eval(f);
            let gvals = grid.eval(g);
            let mut out = Vec::with_capacity(betas.len() * cfg.thetas.len());
            for &theta in &cfg.thetas {
                let nf = ctx.anorm_sq_values(&fvals, &gf, theta).sqrt();
                let ng = ctx.anorm_sq_values(&gvals, &gg, theta).sqrt();
                for (bi, beta) in betas.iter().enumerate() {
                    let cache = &abar[bi];
                    let mut acc = 0.0;
                    for n in 0..grid.len() {
                        let df = [gf[0][n], gf[1][n], gf[2][n]];
                        let dg = [gg[0][n], gg[1][n], gg[2][n]];
                        let adf = sym6_apply(&cache[n], df);
                        let dot = adf[0] * dg[0] + adf[1] * dg[1] + adf[2] * dg[2];
                        acc += w[n] * b2[n].powf(theta) * dot;
                    }
                    let denom = beta.factorial().sqrt() * nf * ng;
                    out.push(RatioRow {
                        sample: s,
                        alpha: None,
                        beta: Some(*beta),
                        theta,
                        ratio: acc.abs() / denom,
                        ratio_alt: None,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let constant = rows.iter().fold(0.0f64, |acc, r| acc.max(r.ratio));
    Ok(EstimateReport {
        inequality: "commutator".into(),
        config: cfg.clone(),
        rows,
        constant,
        aux: Vec::new(),
    })
}

/// Everything the pairing validator measures for one (sample, α) cell.
struct PairingCell {
    rows: Vec<RatioRow>,
    c0_zero: f64,
    c_absorb: f64,
}

/// Weighted pairing estimate: for each sample f and each |α| ≤ m_max with
/// θ = γ|α|/2, computes
///   LHS = (⟨v⟩^{2θ}∂^α(−𝓑f), ∂^αf)
/// by the weak T-form and the smallest admissible constant in
///   LHS ≤ −‖∂^αf‖²_{A,θ} + C₀[⟨θ⟩‖∂^αf‖_{A,θ}‖∂^αf‖_{2,γ/2+θ}
///        + Σ_{|β|≥1} C_α^β √β! ‖∂^{α−β}f‖_{A,θ}(‖∂^αf‖_{A,θ} + |θ|‖∂^αf‖_{2,γ/2+θ})
///        + Σ_{|β|≥v₀} C_α^β |β|√β! ‖∂^{α−β}f‖_{A,θ}‖∂^αf‖_{2,γ/2+θ}],
/// with ⟨θ⟩ = (1+θ²)^{1/2}.  The third sum has two defensible readings,
/// v₀ = 1 and v₀ = 2; `ratio` carries the v₀ = 1 constant and `ratio_alt`
/// the v₀ = 2 one.  Aux constants: both overall maxima, the α = 0, θ = 0
/// zero-order constant in (−𝓑f, f) ≤ −½‖f‖²_A + C‖f‖²_{2,γ/2}, and the largest
/// empirical c in ‖∂^αf‖_{2,γ/2+θ} ≤ c‖∂^{α−e_{j₀}}f‖_{A,θ} with
/// α_{j₀} = max_j α_j.
pub fn validate_prop31(cfg: &ValidatorConfig) -> Result<EstimateReport> {
    cfg.validated()?;
    let (grid, ctx) = build_context(cfg, cfg.m_max + 1);
    let field = DerivativeField::new(grid.clone(), cfg.gamma, cfg.m_max, cfg.quad_tol, cfg.max_panels);

    let alphas = enumerate_basis(cfg.m_max);
    let mut abar: BTreeMap<MultiIndex, Vec<Sym6>> = BTreeMap::new();
    let mut qc: BTreeMap<MultiIndex, Vec<f64>> = BTreeMap::new();
    let mut dc: BTreeMap<MultiIndex, Vec<f64>> = BTreeMap::new();
    for beta in &alphas {
        abar.insert(*beta, field.abar_values(beta)?);
        qc.insert(*beta, field.q_values(beta)?);
        dc.insert(*beta, field.d_values(beta)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<SpectralFunction> = (0..cfg.n_samples)
        .map(|_| sample_function(cfg.cap, &mut rng))
        .collect();

    let w = grid.node_weights();
    let b2 = ctx.bracket2_on_grid();
    let nn = grid.len();

    let cells: Vec<PairingCell> = samples
        .par_iter()
        .enumerate()
        .map(|(s, f)| -> Result<PairingCell> {
            // Grid values and gradients of every ∂^δf with |δ| ≤ m_max.
            let mut dvals: BTreeMap<MultiIndex, (Vec<f64>, [Vec<f64>; 3])> = BTreeMap::new();
            for delta in &alphas {
                let df = f.derivative_multi(delta);
                let vals = grid.eval(&df);
                let grads = ctx.gradient_values(&df)?;
                dvals.insert(*delta, (vals, grads));
            }

            let mut rows = Vec::with_capacity(alphas.len());
            let mut c0_zero = 0.0f64;
            let mut c_absorb = 0.0f64;
            for alpha in &alphas {
                let theta = cfg.gamma * alpha.degree() as f64 / 2.0;
                let (avals, agrads) = &dvals[alpha];
                let a_sq = ctx.anorm_sq_values(avals, agrads, theta);
                let a_norm = a_sq.sqrt();
                let w_norm = ctx.weighted_l2_values(avals, cfg.gamma / 2.0 + theta);

                let mut t1 = 0.0;
                let mut t2 = 0.0;
                let mut t3 = 0.0;
                let mut t4 = 0.0;
                let mut g2 = 0.0;
                let mut g3_v1 = 0.0;
                let mut g3_v2 = 0.0;
                for beta in alpha.sub_indices() {
                    let delta = alpha.minus(&beta);
                    let c = alpha.binomial(&beta);
                    let (bvals, bgrads) = &dvals[&delta];
                    let am = &abar[&beta];
                    let qv = &qc[&beta];
                    let dv = &dc[&beta];
                    let mut s1 = 0.0;
                    let mut s2 = 0.0;
                    let mut s3 = 0.0;
                    let mut s4 = 0.0;
                    for n in 0..nn {
                        let wt = w[n] * b2[n].powf(theta);
                        let gb = [bgrads[0][n], bgrads[1][n], bgrads[2][n]];
                        let adb = sym6_apply(&am[n], gb);
                        s1 += wt * (adb[0] * agrads[0][n] + adb[1] * agrads[1][n] + adb[2] * agrads[2][n]);
                        if theta != 0.0 {
                            let v = grid.node(n);
                            let dot_v = adb[0] * v[0] + adb[1] * v[1] + adb[2] * v[2];
                            s2 += w[n] * 2.0 * theta * b2[n].powf(theta - 1.0) * dot_v * avals[n];
                        }
                        s3 += wt * qv[n] * bvals[n] * avals[n];
                        s4 += wt * dv[n] * bvals[n] * avals[n];
                    }
                    t1 += c * s1;
                    t2 += c * s2;
                    t3 += 0.25 * c * s3;
                    t4 += 0.5 * c * s4;

                    let k = beta.degree();
                    if k >= 1 {
                        let b_anorm = ctx.anorm_sq_values(bvals, bgrads, theta).sqrt();
                        let weight = c * beta.factorial().sqrt() * b_anorm;
                        g2 += weight * (a_norm + theta.abs() * w_norm);
                        g3_v1 += weight * k as f64 * w_norm;
                        if k >= 2 {
                            g3_v2 += weight * k as f64 * w_norm;
                        }
                    }
                }
                let lhs = -(t1 + t2 + t3) + t4;
                let g1 = (1.0 + theta * theta).sqrt() * a_norm * w_norm;
                let excess = lhs + a_sq;
                let c0_v1 = (excess / (g1 + g2 + g3_v1)).max(0.0);
                let c0_v2 = (excess / (g1 + g2 + g3_v2)).max(0.0);
                rows.push(RatioRow {
                    sample: s,
                    alpha: Some(*alpha),
                    beta: None,
                    theta,
                    ratio: c0_v1,
                    ratio_alt: Some(c0_v2),
                });

                if alpha.degree() == 0 {
                    let w0 = ctx.weighted_l2_values(avals, cfg.gamma / 2.0);
                    c0_zero = c0_zero.max(((lhs + 0.5 * a_sq) / (w0 * w0)).max(0.0));
                } else {
                    let j0 = (0..3).max_by_key(|&j| (alpha.0[j], std::cmp::Reverse(j))).unwrap();
                    let lower = alpha.lowered(j0).unwrap();
                    let (lvals, lgrads) = &dvals[&lower];
                    let l_anorm = ctx.anorm_sq_values(lvals, lgrads, theta).sqrt();
                    c_absorb = c_absorb.max(w_norm / l_anorm);
                }
            }
            Ok(PairingCell {
                rows,
                c0_zero,
                c_absorb,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(cells.len() * alphas.len());
    let mut c0_v1 = 0.0f64;
    let mut c0_v2 = 0.0f64;
    let mut c0_zero = 0.0f64;
    let mut c_absorb = 0.0f64;
    for cell in cells {
        for r in &cell.rows {
            c0_v1 = c0_v1.max(r.ratio);
            c0_v2 = c0_v2.max(r.ratio_alt.unwrap());
        }
        rows.extend(cell.rows);
        c0_zero = c0_zero.max(cell.c0_zero);
        c_absorb = c_absorb.max(cell.c_absorb);
    }

    Ok(EstimateReport {
        inequality: "pairing".into(),
        config: cfg.clone(),
        rows,
        constant: c0_v1,
        aux: vec![
            ("c0_third_sum_from_1".into(), c0_v1),
            ("c0_third_sum_from_2".into(), c0_v2),
            ("c0_zero_order".into(), c0_zero),
            ("c_derivative_absorption".into(), c_absorb),
        ],
    })
}

/// Coercivity comparison: min over seeded samples and θ of
///   ‖f‖²_{A,θ} / (‖P_v∇f‖²_{2,γ/2+θ} + ‖(I−P_v)∇f‖²_{2,1+γ/2+θ} + ‖f‖²_{2,1+γ/2+θ}),
/// the empirical constant C₁ in the lower bound.
pub fn validate_coercivity(cfg: &ValidatorConfig) -> Result<EstimateReport> {
    cfg.validated()?;
    let (_, ctx) = build_context(cfg, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<SpectralFunction> = (0..cfg.n_samples)
        .map(|_| sample_function(cfg.cap, &mut rng))
        .collect();

    let rows: Vec<RatioRow> = samples
        .par_iter()
        .enumerate()
        .map(|(s, f)| -> Result<Vec<RatioRow>> {
            let mut out = Vec::with_capacity(cfg.thetas.len());
            for &theta in &cfg.thetas {
                let (lhs, rhs) = ctx.coercivity_probe(f, theta)?;
                out.push(RatioRow {
                    sample: s,
                    alpha: None,
                    beta: None,
                    theta,
                    ratio: lhs / rhs,
                    ratio_alt: None,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let constant = rows.iter().fold(f64::INFINITY, |acc, r| acc.min(r.ratio));
    Ok(EstimateReport {
        inequality: "coercivity".into(),
        config: cfg.clone(),
        rows,
        constant,
        aux: Vec::new(),
    })
}

/// Grönwall energy bound along a semigroup trace:
///   ‖f(t)‖² + ∫₀ᵗ ‖f(s)‖²_A ds ≤ e^{2C₀T}‖f₀‖²
/// with the A-norm evaluated by quadrature and the time integral by the
/// trapezoid rule on the snapshot schedule (from t = 0 using the stored
/// initial datum).  Each row's ratio is LHS(t)/RHS; the bound holds iff the
/// constant (max ratio) is ≤ 1.  Aux: the minimal margin RHS − LHS(t), the
/// max closed-form energy-identity residual, and the inputs C₀ and T.
pub fn validate_energy(
    decomp: &SpectralDecomposition,
    trace: &EvolutionTrace,
    ctx: &NormContext,
    c0: f64,
) -> Result<EstimateReport> {
    if trace.is_empty() {
        return Err(LandauError::InvalidArgument(
            "energy validation needs a nonempty trace".into(),
        ));
    }
    if !c0.is_finite() || c0 < 0.0 {
        return Err(LandauError::InvalidArgument(format!(
            "energy validation needs a finite nonnegative constant, got {c0}"
        )));
    }
    let f0 = trace.initial();
    let l2_sq_0 = {
        let n = f0.l2_norm();
        n * n
    };
    let horizon = *trace.times().last().unwrap();
    let rhs = (2.0 * c0 * horizon).exp() * l2_sq_0;

    // A-norms at t = 0 and at every snapshot (quadrature route, θ = 0).
    let mut anorm_sq = Vec::with_capacity(trace.len() + 1);
    let a0 = ctx.anorm(f0, 0.0)?;
    anorm_sq.push(a0 * a0);
    for snap in trace.snapshots() {
        let a = ctx.anorm(snap, 0.0)?;
        anorm_sq.push(a * a);
    }

    let mut rows = Vec::with_capacity(trace.len());
    let mut integral = 0.0;
    let mut prev_t = 0.0;
    let mut margin_min = f64::INFINITY;
    let mut residual_max = 0.0f64;
    for (k, &t) in trace.times().iter().enumerate() {
        integral += 0.5 * (t - prev_t) * (anorm_sq[k] + anorm_sq[k + 1]);
        prev_t = t;
        let lhs = trace.l2_sq()[k] + integral;
        margin_min = margin_min.min(rhs - lhs);
        residual_max = residual_max.max(decomp.energy_identity_residual(f0, t));
        rows.push(RatioRow {
            sample: k,
            alpha: None,
            beta: None,
            theta: 0.0,
            ratio: lhs / rhs,
            ratio_alt: None,
        });
    }

    let constant = rows.iter().fold(0.0f64, |acc, r| acc.max(r.ratio));
    let mut config = ValidatorConfig::for_gamma(trace.gamma());
    config.cap = trace.cap();
    config.n_samples = trace.len();
    Ok(EstimateReport {
        inequality: "energy".into(),
        config,
        rows,
        constant,
        aux: vec![
            ("margin_min".into(), margin_min),
            ("identity_residual_max".into(), residual_max),
            ("c0_used".into(), c0),
            ("horizon".into(), horizon),
        ],
    })
}
