//! CSV and JSON export of sweeps, trade-off tables and SLA reports.
//!
//! CSV column orders:
//!
//! * curves: `label,t_ms,consistency,ci95_lo,ci95_hi,smoothed,trials,seed`
//! * trade-off tables: `n,r,w,l_r_999_ms,l_w_999_ms,t_999_ms,t_999_reached,horizon_ms,staleness_at_commit,trials,seed`
//!   (`t_999_ms` is empty when the target was not reached)
//! * SLA reports: `rank,n,r,w,strict,feasible,winner,consistency,consistency_ci95_lo,read_ms,write_ms,objective_ms,trials,seed`
//!   (`rank` is empty for infeasible rows)
//!
//! JSON output is the serde form of the result itself.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{Curve, ReplicationPoint, SlaReport, TradeoffTable};
use crate::error::{Error, Result};
use crate::wars::TVisibility;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config(format!("unknown export format `{other}` (csv or json)"))),
        }
    }
}

pub const CURVE_COLUMNS: [&str; 8] = [
    "label",
    "t_ms",
    "consistency",
    "ci95_lo",
    "ci95_hi",
    "smoothed",
    "trials",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub label: String,
    pub t_ms: f64,
    pub consistency: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub smoothed: f64,
    pub trials: u64,
    pub seed: u64,
}

pub const TRADEOFF_COLUMNS: [&str; 11] = [
    "n",
    "r",
    "w",
    "l_r_999_ms",
    "l_w_999_ms",
    "t_999_ms",
    "t_999_reached",
    "horizon_ms",
    "staleness_at_commit",
    "trials",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCsvRow {
    pub n: u32,
    pub r: u32,
    pub w: u32,
    pub l_r_999_ms: f64,
    pub l_w_999_ms: f64,
    pub t_999_ms: Option<f64>,
    pub t_999_reached: bool,
    pub horizon_ms: Option<f64>,
    pub staleness_at_commit: f64,
    pub trials: u64,
    pub seed: u64,
}

pub const SLA_COLUMNS: [&str; 14] = [
    "rank",
    "n",
    "r",
    "w",
    "strict",
    "feasible",
    "winner",
    "consistency",
    "consistency_ci95_lo",
    "read_ms",
    "write_ms",
    "objective_ms",
    "trials",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlaCsvRow {
    pub rank: Option<usize>,
    pub n: u32,
    pub r: u32,
    pub w: u32,
    pub strict: bool,
    pub feasible: bool,
    pub winner: bool,
    pub consistency: f64,
    pub consistency_ci95_lo: f64,
    pub read_ms: f64,
    pub write_ms: f64,
    pub objective_ms: f64,
    pub trials: u64,
    pub seed: u64,
}

pub fn curve_rows(curves: &[Curve]) -> Vec<CurveRow> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(move |p| CurveRow {
                label: c.label.clone(),
                t_ms: p.t_ms,
                consistency: p.consistency.p_hat,
                ci95_lo: p.consistency.ci95_lo,
                ci95_hi: p.consistency.ci95_hi,
                smoothed: p.smoothed,
                trials: c.trials,
                seed: c.seed,
            })
        })
        .collect()
}

pub fn tradeoff_rows(table: &TradeoffTable) -> Vec<TradeoffCsvRow> {
    table
        .rows
        .iter()
        .map(|row| {
            let (t, horizon) = match row.t_999 {
                TVisibility::Reached { t_ms } => (Some(t_ms), None),
                TVisibility::NotReached { horizon_ms } => (None, Some(horizon_ms)),
            };
            TradeoffCsvRow {
                n: table.n,
                r: row.r,
                w: row.w,
                l_r_999_ms: row.l_r_999,
                l_w_999_ms: row.l_w_999,
                t_999_ms: t,
                t_999_reached: t.is_some(),
                horizon_ms: horizon,
                staleness_at_commit: row.staleness_at_commit.p_hat,
                trials: table.trials,
                seed: table.seed,
            }
        })
        .collect()
}

pub fn sla_rows(report: &SlaReport) -> Vec<SlaCsvRow> {
    let winner = report.winner();
    let rank_of = |n, r, w| {
        report
            .ranked
            .iter()
            .position(|c| (c.n, c.r, c.w) == (n, r, w))
            .map(|i| i + 1)
    };
    let mut rows: Vec<SlaCsvRow> = report
        .evaluated
        .iter()
        .map(|c| SlaCsvRow {
            rank: rank_of(c.n, c.r, c.w),
            n: c.n,
            r: c.r,
            w: c.w,
            strict: c.strict,
            feasible: c.feasible,
            winner: winner.is_some_and(|best| (best.n, best.r, best.w) == (c.n, c.r, c.w)),
            consistency: c.consistency.p_hat,
            consistency_ci95_lo: c.consistency.ci95_lo,
            read_ms: c.read_ms,
            write_ms: c.write_ms,
            objective_ms: c.objective_ms,
            trials: report.trials,
            seed: report.seed,
        })
        .collect();
    rows.sort_by_key(|row| (row.rank.is_none(), row.rank));
    rows
}

/// Writes `rows` as CSV under `columns`. An empty slice yields the header only.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], columns: &[&str], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(columns)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn export_curves<W: Write>(curves: &[Curve], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(&curve_rows(curves), &CURVE_COLUMNS, out),
        Format::Json => write_json(curves, out),
    }
}

pub fn export_replication<W: Write>(points: &[ReplicationPoint], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let curves: Vec<Curve> = points.iter().map(|p| p.curve.clone()).collect();
            write_csv(&curve_rows(&curves), &CURVE_COLUMNS, out)
        }
        Format::Json => write_json(points, out),
    }
}

pub fn export_tradeoff<W: Write>(table: &TradeoffTable, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(&tradeoff_rows(table), &TRADEOFF_COLUMNS, out),
        Format::Json => write_json(table, out),
    }
}

pub fn export_sla<W: Write>(report: &SlaReport, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(&sla_rows(report), &SLA_COLUMNS, out),
        Format::Json => write_json(report, out),
    }
}
