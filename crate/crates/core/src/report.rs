//! Deterministic artifact emission: CSV tables and JSON manifests, every file
//! opening with a provenance header that ties each row back to the exact
//! configuration that produced it.
//!
//! Determinism contract: rerunning the same configuration must produce
//! byte-identical files.  Hence no timestamps, no host names, no map
//! iteration of unspecified order; floats are printed with Rust's shortest
//! round-trip formatting, so a reader recovers the exact f64 bits.

use crate::error::Result;
use crate::evolve::EvolutionTrace;
use crate::index::{MultiIndex, ORDERING_VERSION};
use crate::smoothing::SmoothingReport;
use crate::validate::{BoundProbe, EstimateReport};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Provenance stamped into every artifact.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the canonical configuration JSON.
    pub config_hash: String,
    /// Basis enumeration version; a bump invalidates cached coefficient order.
    pub ordering_version: u32,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Provenance {
            tool: "landau-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash.into(),
            ordering_version: ORDERING_VERSION,
        }
    }

    /// The comment line CSV artifacts open with.
    pub fn comment_line(&self) -> String {
        format!(
            "# tool={} version={} config={} ordering={}",
            self.tool, self.version, self.config_hash, self.ordering_version
        )
    }
}

/// SHA-256 hex digest of a serializable value's canonical JSON.
pub fn hash_of<T: serde::Serialize>(value: &T) -> Result<String> {
    let json = serde_json::to_string(value)?;
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    Ok(hex::encode(hasher.finalize()))
}

/// Shortest round-trip decimal form of an f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_multi(alpha: &MultiIndex) -> String {
    format!("{}-{}-{}", alpha.0[0], alpha.0[1], alpha.0[2])
}

fn fmt_opt_multi(alpha: &Option<MultiIndex>) -> String {
    alpha.as_ref().map(fmt_multi).unwrap_or_default()
}

fn fmt_opt_f64(x: &Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Write a CSV file: provenance comment, header row, data rows, trailing
/// newline.  Fields must not contain commas or newlines (the writers in this
/// module only emit numbers, booleans, and dash-joined multi-indices).
pub fn write_csv(
    path: &Path,
    prov: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&prov.comment_line());
    out.push('\n');
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write a JSON manifest `{ "provenance": …, "data": … }` (pretty-printed,
/// trailing newline).
pub fn write_json<T: serde::Serialize>(path: &Path, prov: &Provenance, data: &T) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Manifest<'a, T: serde::Serialize> {
        provenance: &'a Provenance,
        data: &'a T,
    }
    let mut json = serde_json::to_string_pretty(&Manifest { provenance: prov, data })?;
    json.push('\n');
    std::fs::write(path, json)?;
    Ok(())
}

/// Trace table: one row per snapshot.
pub fn trace_rows(trace: &EvolutionTrace) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["t", "l2_sq", "form_value"];
    let rows = trace
        .times()
        .iter()
        .zip(trace.l2_sq().iter().zip(trace.form_values().iter()))
        .map(|(&t, (&e, &q))| vec![fmt_f64(t), fmt_f64(e), fmt_f64(q)])
        .collect();
    (header, rows)
}

/// Smoothing table: one row per (α, t) cell, joined with the per-(m, t)
/// factorial-fit constant and the per-α short-time slope.
pub fn smoothing_rows(report: &SmoothingReport) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec![
        "m", "alpha", "t", "n_value", "n_check", "resolved", "c_fit", "slope",
    ];
    let rows = report
        .rows
        .iter()
        .map(|row| {
            let c_fit = report
                .c_fit
                .iter()
                .find(|c| c.m == row.m && c.t == row.t)
                .and_then(|c| c.c_fit);
            let slope = report
                .slopes
                .iter()
                .find(|s| s.alpha == row.alpha)
                .map(|s| s.slope);
            vec![
                row.m.to_string(),
                fmt_multi(&row.alpha),
                fmt_f64(row.t),
                fmt_f64(row.n_value),
                fmt_f64(row.n_check),
                row.resolved.to_string(),
                fmt_opt_f64(&c_fit),
                fmt_opt_f64(&slope),
            ]
        })
        .collect();
    (header, rows)
}

/// Estimate table: the flat ratio rows of one validator report.
pub fn estimate_rows(report: &EstimateReport) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec![
        "inequality", "sample", "alpha", "beta", "theta", "ratio", "ratio_alt",
    ];
    let rows = report
        .rows
        .iter()
        .map(|row| {
            vec![
                report.inequality.clone(),
                row.sample.to_string(),
                fmt_opt_multi(&row.alpha),
                fmt_opt_multi(&row.beta),
                fmt_f64(row.theta),
                fmt_f64(row.ratio),
                fmt_opt_f64(&row.ratio_alt),
            ]
        })
        .collect();
    (header, rows)
}

/// Coefficient bound-probe table: one row per |β| group.
pub fn bound_probe_rows(probe: &BoundProbe) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["quantity", "beta_degree", "group_max"];
    let mut rows = Vec::new();
    for (k, &g) in probe.abar_group_max.iter().enumerate() {
        rows.push(vec!["abar".into(), (k + 1).to_string(), fmt_f64(g)]);
    }
    for (k, &g) in probe.q_group_max.iter().enumerate() {
        rows.push(vec!["q".into(), k.to_string(), fmt_f64(g)]);
    }
    for (k, &g) in probe.d_group_max.iter().enumerate() {
        rows.push(vec!["d".into(), k.to_string(), fmt_f64(g)]);
    }
    (header, rows)
}
