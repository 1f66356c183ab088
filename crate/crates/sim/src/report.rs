//! CSV and JSON output rows.
//!
//! CSV output starts with one comment line naming the table kind and schema
//! version, followed by a header row. JSON output wraps the same rows in an
//! object carrying the kind and schema version.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use grand_core::channel::{ChannelModel, MaskSpec};
use grand_core::sim::{Condition, ConditionalStats, CurveConfig, CurvePoint, Z95};
use grand_core::{DecodeOutcome, GuessBudget};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Noted in every curve and threshold table.
pub const SNR_NOTE: &str = "snr_db is -10 log10(sigma^2) for +-1 symbols, not Eb/N0";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn condition_fields(c: Condition) -> (&'static str, Option<usize>, Option<usize>, Option<usize>) {
    match c {
        Condition::Flips { b } => ("hard", Some(b), None, None),
        Condition::Masked { l, b_u } => ("soft", None, Some(l), Some(b_u)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalRow {
    pub detection: &'static str,
    pub b: Option<usize>,
    pub l: Option<usize>,
    pub b_u: Option<usize>,
    pub budget: Option<u64>,
    pub trials: u64,
    pub cond_bler: f64,
    pub cond_bler_lo: f64,
    pub cond_bler_hi: f64,
    pub cond_wrong: f64,
    pub cond_abandon: f64,
    pub mean_q: f64,
    pub seed: u64,
}

impl ConditionalRow {
    pub fn new(stats: &ConditionalStats, budget: GuessBudget, seed: u64) -> Self {
        let (detection, b, l, b_u) = condition_fields(stats.condition);
        let (lo, hi) = stats.bler_interval(Z95);
        ConditionalRow {
            detection,
            b,
            l,
            b_u,
            budget: budget.limit(),
            trials: stats.trials,
            cond_bler: stats.cond_bler(),
            cond_bler_lo: lo,
            cond_bler_hi: hi,
            cond_wrong: stats.cond_wrong(),
            cond_abandon: stats.cond_abandon(),
            mean_q: stats.mean_q(),
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QCdfRow {
    pub detection: &'static str,
    pub b: Option<usize>,
    pub l: Option<usize>,
    pub b_u: Option<usize>,
    pub queries: u64,
    pub cdf: f64,
}

pub fn q_cdf_rows(stats: &ConditionalStats) -> Vec<QCdfRow> {
    let (detection, b, l, b_u) = condition_fields(stats.condition);
    stats.q_cdf.iter().map(|&(queries, cdf)| QCdfRow { detection, b, l, b_u, queries, cdf }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub snr_db: f64,
    pub sigma: f64,
    pub flip_prob: f64,
    pub detection: &'static str,
    pub ab: Option<usize>,
    pub merr: Option<f64>,
    pub tau: Option<f64>,
    pub q: Option<f64>,
    pub p_u: Option<f64>,
    pub budget: u64,
    pub bler: f64,
    pub bler_std_error: f64,
    pub wrong: f64,
    pub abandon: f64,
    pub mask_error: f64,
    pub truncated: f64,
    pub mean_q: f64,
    pub mean_q_upper: f64,
    pub strata: usize,
    pub trials_per_stratum: u64,
    pub seed: u64,
}

impl CurveRow {
    pub fn new(point: &CurvePoint, n: usize, strata: usize, trials_per_stratum: u64, seed: u64) -> Self {
        let ch = ChannelModel::from_snr_db(point.snr_db, n);
        let (detection, ab, merr, tau, q, p_u, budget) = match point.config {
            CurveConfig::Hard { ab, budget } => ("hard", Some(ab), None, None, None, None, budget),
            CurveConfig::Soft { merr, tau, q, p_u, budget } => ("soft", None, Some(merr), Some(tau), Some(q), Some(p_u), budget),
        };
        CurveRow {
            snr_db: point.snr_db,
            sigma: ch.sigma(),
            flip_prob: ch.flip_prob(),
            detection,
            ab,
            merr,
            tau,
            q,
            p_u,
            budget,
            bler: point.bler,
            bler_std_error: point.bler_std_error,
            wrong: point.wrong,
            abandon: point.abandon,
            mask_error: point.mask_error,
            truncated: point.truncated,
            mean_q: point.mean_q,
            mean_q_upper: point.mean_q_upper,
            strata,
            trials_per_stratum,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskRow {
    pub n: usize,
    pub snr_db: f64,
    pub sigma: f64,
    pub flip_prob: f64,
    pub merr: f64,
    pub tau: f64,
    pub q: f64,
    pub p_u: f64,
    pub reliable_flip: f64,
    pub achieved_merr: f64,
}

impl MaskRow {
    pub fn new(ch: &ChannelModel, mask: &MaskSpec) -> Self {
        MaskRow {
            n: ch.n(),
            snr_db: ch.snr_db(),
            sigma: ch.sigma(),
            flip_prob: ch.flip_prob(),
            merr: mask.merr,
            tau: mask.tau,
            q: mask.q,
            p_u: mask.p_u,
            reliable_flip: mask.reliable_flip,
            achieved_merr: mask.achieved_merr(ch),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbRow {
    pub b: usize,
    pub trials: u64,
    pub cond_bler: f64,
    pub cond_bler_lo: f64,
    pub cond_bler_hi: f64,
    pub mean_q: f64,
    pub within_limit: bool,
    pub selected_ab: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeRow {
    pub success: bool,
    pub codeword: Option<String>,
    pub queries: u64,
}

impl From<&DecodeOutcome> for DecodeRow {
    fn from(o: &DecodeOutcome) -> Self {
        DecodeRow { success: o.success(), codeword: o.codeword.as_ref().map(|c| c.to_hex()), queries: o.queries }
    }
}

/// Writes `rows` as CSV under a `# grand-sim <kind> schema v<N>` line and
/// optional further comment lines.
pub fn write_csv<T: Serialize, W: Write>(kind: &str, notes: &[&str], rows: &[T], mut out: W) -> Result<()> {
    writeln!(out, "# grand-sim {kind} schema v{SCHEMA_VERSION}")?;
    for note in notes {
        writeln!(out, "# {note}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// JSON document `{ "kind", "schema_version", "rows", ..extra }`.
pub fn json_document<T: Serialize>(kind: &str, notes: &[&str], rows: &[T], extra: Vec<(&str, Value)>) -> Result<Value> {
    let mut doc = json!({
        "kind": kind,
        "schema_version": SCHEMA_VERSION,
        "rows": serde_json::to_value(rows)?,
    });
    if !notes.is_empty() {
        doc["notes"] = json!(notes);
    }
    for (key, value) in extra {
        doc[key] = value;
    }
    Ok(doc)
}

pub fn write_json<W: Write>(doc: &Value, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    writeln!(out)?;
    Ok(())
}

/// Writes a table in the chosen format.
pub fn emit<T: Serialize, W: Write>(format: Format, kind: &str, notes: &[&str], rows: &[T], out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(kind, notes, rows, out),
        Format::Json => write_json(&json_document(kind, notes, rows, Vec::new())?, out),
    }
}
