//! `landau` — command-line driver for the spectral Landau laboratory.
//!
//! Subcommands build the coefficient cache, assemble the Galerkin operator,
//! evolve a seeded rough datum, run the smoothing-verification protocol, and
//! measure the empirical constants of the structural inequalities.  Every
//! artifact is written deterministically: rerunning a command with the same
//! configuration produces byte-identical files.
//!
//! Exit codes: 0 success; 2 configuration/input errors; 3 numerical-tolerance
//! or data-quality failures; 4 capacity (degree-headroom) exhaustion.  Errors
//! are reported as a single JSON object on stderr.

mod config;

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use landau_core::coeff::{CoefficientField, FieldSettings, PotentialConfig};
use landau_core::error::{LandauError, Result};
use landau_core::evolve::{evolve_exact, geometric_times, EvolutionTrace, SpectralDecomposition};
use landau_core::galerkin::GalerkinOperator;
use landau_core::grid::TensorGrid;
use landau_core::norms::NormContext;
use landau_core::report::{
    bound_probe_rows, estimate_rows, fmt_f64, hash_of, smoothing_rows, trace_rows, write_csv,
    write_json, Provenance,
};
use landau_core::smoothing::{rough_datum, verify_smoothing};
use landau_core::validate::{
    probe_lemma21, validate_coercivity, validate_energy, validate_lemma22, validate_prop31,
    BoundProbe, EstimateReport,
};
use serde::Serialize;

use crate::config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "landau",
    version,
    about = "Spectral laboratory for the linearized Landau equation with soft potentials"
)]
struct Cli {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Soft-potential exponent γ in (-3, 0).
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// RNG seed for the rough datum and validator samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Spectral truncation degree D.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Largest derivative order probed.
    #[arg(long = "m-max", global = true)]
    m_max: Option<usize>,
    /// Evolution horizon T.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Axis quadrature size of the base grid.
    #[arg(long = "grid-q", global = true)]
    grid_q: Option<usize>,
    /// Random samples per validated inequality.
    #[arg(long = "n-samples", global = true)]
    n_samples: Option<usize>,
    /// Cache directory (overrides LANDAU_CACHE_DIR and the config file).
    #[arg(long = "cache-dir", global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Output directory root (overrides LANDAU_OUT_DIR and the config file).
    #[arg(long = "out-dir", global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load the collision-coefficient cache; emit profile tables and
    /// derivative-bound probes.
    Coeffs,
    /// Assemble the Galerkin operator; emit its structural manifest.
    Assemble,
    /// Evolve a seeded rough datum by the exact semigroup; emit the trace.
    Evolve,
    /// Run the spectral-resolution smoothing protocol; emit the report.
    VerifySmoothing,
    /// Measure empirical constants for the structural inequalities.
    ValidateEstimates,
    /// Run every stage in order, sharing one assembled operator.
    Pipeline {
        /// Comma-separated γ list; omit the value for the default sweep.
        #[arg(
            long = "gamma-sweep",
            value_delimiter = ',',
            num_args = 0..=1,
            default_missing_value = "-0.5,-1,-1.5,-2,-2.5",
            allow_hyphen_values = true,
            value_name = "LIST"
        )]
        gamma_sweep: Option<Vec<f64>>,
    },
    /// Print the effective configuration as JSON on stdout.
    PrintConfig,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        let (kind, code) = classify(&err);
        let payload = serde_json::json!({
            "error": { "kind": kind, "exit": code, "message": err.to_string() }
        });
        eprintln!("{payload}");
        std::process::exit(code);
    }
}

/// Map library errors onto the exit-code contract.
fn classify(err: &LandauError) -> (&'static str, i32) {
    match err {
        LandauError::CapacityExceeded { .. } => ("capacity", 4),
        LandauError::QuadratureNoConvergence { .. }
        | LandauError::InvariantViolation(_)
        | LandauError::InsufficientData(_) => ("numerical", 3),
        LandauError::GammaOutOfRange(_)
        | LandauError::SingularKernel { .. }
        | LandauError::OutOfTableRange { .. }
        | LandauError::InvalidArgument(_)
        | LandauError::Config(_)
        | LandauError::Io(_)
        | LandauError::Serde(_) => ("config", 2),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let ov = Overrides {
        gamma: cli.gamma,
        seed: cli.seed,
        cap: cli.cap,
        m_max: cli.m_max,
        horizon: cli.horizon,
        grid_q: cli.grid_q,
        n_samples: cli.n_samples,
        cache_dir: cli.cache_dir.clone(),
        out_dir: cli.out_dir.clone(),
    };
    let cfg = RunConfig::resolve(cli.config.as_deref(), &ov)?;
    match &cli.command {
        Command::Coeffs => Lab::new(&cfg)?.coeffs().map(|_| ()),
        Command::Assemble => Lab::new(&cfg)?.assemble().map(|_| ()),
        Command::Evolve => Lab::new(&cfg)?.evolve().map(|_| ()),
        Command::VerifySmoothing => Lab::new(&cfg)?.verify_smoothing(),
        Command::ValidateEstimates => Lab::new(&cfg)?.validate_estimates(),
        Command::Pipeline { gamma_sweep } => {
            let gammas = gamma_sweep.clone().unwrap_or_else(|| vec![cfg.gamma]);
            if gammas.is_empty() {
                return Err(LandauError::Config("gamma sweep list is empty".into()));
            }
            for &g in &gammas {
                let mut cfg_g = cfg.clone();
                cfg_g.gamma = g;
                cfg_g.validate()?;
                Lab::new(&cfg_g)?.pipeline()?;
            }
            Ok(())
        }
        Command::PrintConfig => {
            let mut text = serde_json::to_string_pretty(&cfg)?;
            text.push('\n');
            print!("{text}");
            Ok(())
        }
    }
}

/// One configured run: output directory, provenance stamp, lazily shared
/// operator state.
struct Lab<'a> {
    cfg: &'a RunConfig,
    out: PathBuf,
    prov: Provenance,
}

impl<'a> Lab<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        let out = cfg.out_root().join(format!("gamma_{}", fmt_f64(cfg.gamma)));
        fs::create_dir_all(&out)?;
        // The provenance hash identifies the scientific configuration;
        // storage locations must not perturb it.
        let mut for_hash = cfg.clone();
        for_hash.cache_dir = None;
        for_hash.out_dir = None;
        let prov = Provenance::new(hash_of(&for_hash)?);
        Ok(Lab { cfg, out, prov })
    }

    fn note(&self, msg: &str) {
        eprintln!("[landau γ={}] {msg}", fmt_f64(self.cfg.gamma));
    }

    /// Stage 1: coefficient cache, profile table, derivative-bound probe.
    fn coeffs(&self) -> Result<CoefficientField> {
        let cfg = self.cfg;
        let pot = PotentialConfig::new(cfg.gamma)?;
        let settings = FieldSettings {
            quad_tol: cfg.quad_tol,
            max_panels: cfg.max_panels,
            ..FieldSettings::default()
        };
        let field = CoefficientField::build_cached(pot, settings, cfg.cache_dir.as_deref())?;

        let mut rows = Vec::new();
        for k in 0..=72 {
            let r = 0.5 * k as f64;
            let (l1, l2) = field.profiles(r)?;
            let (q, d) = field.potential_and_drift([r, 0.0, 0.0])?;
            rows.push(vec![
                fmt_f64(r),
                fmt_f64(l1),
                fmt_f64(l2),
                fmt_f64(q),
                fmt_f64(d),
            ]);
        }
        write_csv(
            &self.out.join("profiles.csv"),
            &self.prov,
            &["r", "l1", "l2", "q", "d"],
            &rows,
        )?;

        let probe_order = cfg.beta_max.max(6);
        let probe = probe_lemma21(cfg.gamma, probe_order, cfg.quad_tol, cfg.max_panels)?;
        let (header, rows) = bound_probe_rows(&probe);
        write_csv(&self.out.join("bounds.csv"), &self.prov, &header, &rows)?;

        #[derive(Serialize)]
        struct CoeffsManifest<'m> {
            gamma: f64,
            settings: &'m FieldSettings,
            cache_key: String,
            origin_profile: f64,
            probe: &'m BoundProbe,
        }
        write_json(
            &self.out.join("coefficients.json"),
            &self.prov,
            &CoeffsManifest {
                gamma: cfg.gamma,
                settings: field.settings(),
                cache_key: CoefficientField::cache_key(cfg.gamma, field.settings()),
                origin_profile: field.profiles_exact(0.0).0,
                probe: &probe,
            },
        )?;
        self.note("coeffs: wrote profiles.csv, bounds.csv, coefficients.json");
        Ok(field)
    }

    fn context(&self) -> Result<NormContext> {
        let cfg = self.cfg;
        let grid = Arc::new(TensorGrid::new(cfg.grid_q, cfg.cap + 1));
        Ok(NormContext::new(
            grid,
            cfg.gamma,
            cfg.quad_tol,
            cfg.max_panels,
        ))
    }

    fn operator_cache_path(&self) -> Option<PathBuf> {
        let cfg = self.cfg;
        cfg.cache_dir.as_ref().map(|dir| {
            dir.join(format!(
                "operator_g{}_d{}_q{}.json",
                fmt_f64(cfg.gamma),
                cfg.cap,
                cfg.grid_q
            ))
        })
    }

    fn operator(&self, ctx: &NormContext) -> Result<GalerkinOperator> {
        if let Some(path) = self.operator_cache_path() {
            if path.is_file() {
                if let Ok(op) = GalerkinOperator::load(&path) {
                    if op.gamma() == self.cfg.gamma && op.cap() == self.cfg.cap {
                        return Ok(op);
                    }
                }
            }
            let op = GalerkinOperator::assemble(ctx, self.cfg.cap)?;
            fs::create_dir_all(path.parent().unwrap())?;
            op.save(&path)?;
            Ok(op)
        } else {
            GalerkinOperator::assemble(ctx, self.cfg.cap)
        }
    }

    /// Stage 2: Galerkin operator assembly and structural manifest.
    fn assemble(&self) -> Result<(NormContext, GalerkinOperator)> {
        let ctx = self.context()?;
        let op = self.operator(&ctx)?;

        #[derive(Serialize)]
        struct OperatorManifest {
            gamma: f64,
            cap: usize,
            grid_q: usize,
            dim: usize,
            maxwellian_row_max_abs: f64,
            max_symmetry_defect: f64,
            cache_file: Option<String>,
        }
        write_json(
            &self.out.join("operator.json"),
            &self.prov,
            &OperatorManifest {
                gamma: self.cfg.gamma,
                cap: self.cfg.cap,
                grid_q: self.cfg.grid_q,
                dim: op.dim(),
                maxwellian_row_max_abs: op.maxwellian_row_max_abs(),
                max_symmetry_defect: op.max_symmetry_defect(),
                cache_file: self
                    .operator_cache_path()
                    .map(|p| p.file_name().unwrap().to_string_lossy().into_owned()),
            },
        )?;
        self.note("assemble: wrote operator.json");
        Ok((ctx, op))
    }

    fn trace(
        &self,
        decomp: &SpectralDecomposition,
    ) -> Result<(landau_core::spectral::SpectralFunction, EvolutionTrace)> {
        let cfg = self.cfg;
        let f0 = rough_datum(cfg.cap, cfg.seed);
        let times = geometric_times(cfg.t_min, cfg.horizon, cfg.n_times)?;
        let trace = evolve_exact(decomp, &f0, &times)?;
        Ok((f0, trace))
    }

    /// Stage 3: exact semigroup evolution of the seeded rough datum.
    fn evolve(&self) -> Result<(NormContext, SpectralDecomposition, EvolutionTrace)> {
        let (ctx, op) = self.assemble()?;
        let decomp = SpectralDecomposition::new(&op)?;
        let (f0, trace) = self.trace(&decomp)?;

        let (header, rows) = trace_rows(&trace);
        write_csv(&self.out.join("trace.csv"), &self.prov, &header, &rows)?;

        let residual_max = trace
            .times()
            .iter()
            .map(|&t| decomp.energy_identity_residual(&f0, t))
            .fold(0.0_f64, f64::max);
        let n0 = f0.l2_norm();

        #[derive(Serialize)]
        struct TraceManifest {
            gamma: f64,
            cap: usize,
            seed: u64,
            n_times: usize,
            initial_l2_sq: f64,
            final_l2_sq: f64,
            energy_identity_residual_max: f64,
        }
        write_json(
            &self.out.join("trace.json"),
            &self.prov,
            &TraceManifest {
                gamma: self.cfg.gamma,
                cap: self.cfg.cap,
                seed: self.cfg.seed,
                n_times: trace.times().len(),
                initial_l2_sq: n0 * n0,
                final_l2_sq: *trace.l2_sq().last().unwrap(),
                energy_identity_residual_max: residual_max,
            },
        )?;
        self.note("evolve: wrote trace.csv, trace.json");
        Ok((ctx, decomp, trace))
    }

    /// Stage 4: smoothing-verification protocol.
    fn verify_smoothing(&self) -> Result<()> {
        let cfg = self.cfg;
        let report = verify_smoothing(&cfg.smoothing_params())?;
        let (header, rows) = smoothing_rows(&report);
        write_csv(&self.out.join("smoothing.csv"), &self.prov, &header, &rows)?;
        write_json(&self.out.join("smoothing.json"), &self.prov, &report)?;
        self.note(&format!(
            "verify-smoothing: wrote smoothing.csv, smoothing.json (c_hat={}, resolved_late={})",
            fmt_f64(report.c_hat),
            fmt_f64(report.resolved_fraction_late)
        ));
        if report.resolved_fraction_late < cfg.min_resolved_fraction {
            return Err(LandauError::InsufficientData(format!(
                "only {} of late-time smoothing cells are resolved (minimum {}); raise cap_check or grid sizes",
                fmt_f64(report.resolved_fraction_late),
                fmt_f64(cfg.min_resolved_fraction)
            )));
        }
        Ok(())
    }

    /// Stage 5: empirical constants for the structural inequalities.
    fn validate_estimates(&self) -> Result<()> {
        let cfg = self.cfg;
        let vcfg = cfg.validator_config();
        let commutator = validate_lemma22(&vcfg)?;
        self.note("validate-estimates: commutator constant measured");
        let pairing = validate_prop31(&vcfg)?;
        self.note("validate-estimates: pairing constants measured");
        let coercivity = validate_coercivity(&vcfg)?;
        self.note("validate-estimates: coercivity constant measured");

        let ctx = self.context()?;
        let op = self.operator(&ctx)?;
        let decomp = SpectralDecomposition::new(&op)?;
        let (_, trace) = self.trace(&decomp)?;
        let c0 = pairing.aux_value("c0_zero_order").ok_or_else(|| {
            LandauError::InvariantViolation("pairing report lacks c0_zero_order".into())
        })?;
        let energy = validate_energy(&decomp, &trace, &ctx, c0)?;
        self.note("validate-estimates: energy bound checked");

        let reports = [&commutator, &pairing, &coercivity, &energy];
        let mut rows = Vec::new();
        let mut header: Vec<&'static str> = Vec::new();
        for rep in reports {
            let (h, r) = estimate_rows(rep);
            header = h.to_vec();
            rows.extend(r);
        }
        write_csv(&self.out.join("estimates.csv"), &self.prov, &header, &rows)?;

        #[derive(Serialize)]
        struct EstimatesManifest<'m> {
            commutator: &'m EstimateReport,
            pairing: &'m EstimateReport,
            coercivity: &'m EstimateReport,
            energy: &'m EstimateReport,
        }
        write_json(
            &self.out.join("estimates.json"),
            &self.prov,
            &EstimatesManifest {
                commutator: &commutator,
                pairing: &pairing,
                coercivity: &coercivity,
                energy: &energy,
            },
        )?;
        self.note("validate-estimates: wrote estimates.csv, estimates.json");

        if energy.constant > 1.0 {
            return Err(LandauError::InvariantViolation(format!(
                "energy bound violated: max ratio {} exceeds 1",
                fmt_f64(energy.constant)
            )));
        }
        Ok(())
    }

    /// All stages in order.
    fn pipeline(&self) -> Result<()> {
        self.coeffs()?;
        self.evolve()?; // includes assemble
        self.verify_smoothing()?;
        self.validate_estimates()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_partition_the_error_space() {
        let cases: Vec<(LandauError, &str, i32)> = vec![
            (LandauError::GammaOutOfRange(0.5), "config", 2),
            (LandauError::SingularKernel { gamma: -3.0 }, "config", 2),
            (
                LandauError::OutOfTableRange { r: 99.0, r_max: 40.0 },
                "config",
                2,
            ),
            (LandauError::InvalidArgument("bad".into()), "config", 2),
            (LandauError::Config("bad".into()), "config", 2),
            (
                LandauError::QuadratureNoConvergence {
                    residual: 1.0,
                    target: 1e-12,
                    panels: 2000,
                },
                "numerical",
                3,
            ),
            (LandauError::InvariantViolation("bad".into()), "numerical", 3),
            (LandauError::InsufficientData("bad".into()), "numerical", 3),
            (
                LandauError::CapacityExceeded { needed: 10, available: 5 },
                "capacity",
                4,
            ),
        ];
        for (err, kind, code) in cases {
            assert_eq!(classify(&err), (kind, code), "classifying {err}");
        }
    }
}
