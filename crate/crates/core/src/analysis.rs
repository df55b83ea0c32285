//! Worker counts and rates `mn / N` for this construction and for the A3S and
//! GASP_big schemes, degree-table reports, and parameter sweeps.
//!
//! GASP_big only gives an upper bound on the GASP recovery threshold; the
//! exact threshold is not computed here.

use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::{derive_parameters, pole_number_table, PoleTable, SchemeParams};

pub type Rate = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AgWorkers {
    /// Number of distinct pole numbers in the table.
    pub workers: u64,
    /// The closed-form upper bound.
    pub bound: u64,
}

/// Worker count of the AG construction (swapping `m` and `n` when only `n` is
/// even) together with its closed-form bound.
pub fn workers_ag(m: u64, n: u64, x: u64) -> Result<AgWorkers> {
    let poles = derive_parameters(&SchemeParams::new(m, n, x))?;
    Ok(AgWorkers {
        workers: poles.workers() as u64,
        bound: poles.worker_bound(),
    })
}

/// `(m + X)(n + 1) - 1`, minimised over both orientations.
pub fn workers_a3s(m: u64, n: u64, x: u64) -> u64 {
    let one = |m: u64, n: u64| (m + x) * (n + 1) - 1;
    one(m, n).min(one(n, m))
}

/// The GASP_big bound `2mn + 2X - 1` (symmetric in `m`, `n`).
pub fn workers_gasp_big(m: u64, n: u64, x: u64) -> u64 {
    2 * m * n + 2 * x - 1
}

pub fn rate(m: u64, n: u64, workers: u64) -> Rate {
    Ratio::new(m * n, workers)
}

pub fn format_rate(r: &Rate) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Four decimals, rounded half up, computed exactly.
pub fn format_rate_decimal(r: &Rate) -> String {
    let scaled = (u128::from(*r.numer()) * 20_000 / u128::from(*r.denom())).div_ceil(2);
    format!("{}.{:04}", scaled / 10_000, scaled % 10_000)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeRateRow {
    pub scheme: String,
    pub m: u64,
    pub n: u64,
    pub x: u64,
    pub workers: u64,
    pub rate: Rate,
}

/// Rate rows for the three schemes at one point. The AG row is absent when
/// the construction does not apply.
pub fn rate_rows(m: u64, n: u64, x: u64) -> Vec<SchemeRateRow> {
    let row = |scheme: &str, workers: u64| SchemeRateRow {
        scheme: scheme.to_string(),
        m,
        n,
        x,
        workers,
        rate: rate(m, n, workers),
    };
    let mut rows = Vec::new();
    if let Ok(ag) = workers_ag(m, n, x) {
        rows.push(row("AG", ag.workers));
    }
    rows.push(row("A3S", workers_a3s(m, n, x)));
    rows.push(row("GASP_big", workers_gasp_big(m, n, x)));
    rows
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeTableReport {
    pub table: PoleTable,
    /// Responses needed to decode: the number of distinct entries.
    pub threshold: usize,
}

impl fmt::Display for DegreeTableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .table
            .table
            .iter()
            .flatten()
            .chain(&self.table.rows)
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1);
        let mut head = format!("{:>width$} |", "");
        for c in &self.table.cols {
            write!(head, " {c:>width$}").unwrap();
        }
        writeln!(f, "{head}")?;
        writeln!(f, "{}", "-".repeat(head.len()))?;
        for (r, row) in self.table.rows.iter().zip(&self.table.table) {
            write!(f, "{r:>width$} |")?;
            for v in row {
                write!(f, " {v:>width$}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "distinct entries: {}", self.table.distinct.len())?;
        write!(f, "recovery threshold: {}", self.threshold)
    }
}

fn strictly_increasing(v: &[u64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

pub fn degree_table_report(a: &[u64], b: &[u64]) -> Result<DegreeTableReport> {
    if a.is_empty() || b.is_empty() || !strictly_increasing(a) || !strictly_increasing(b) {
        return Err(Error::InvalidParameters(
            "exponent sequences must be non-empty and strictly increasing".into(),
        ));
    }
    let table = pole_number_table(a, b);
    let threshold = table.distinct.len();
    Ok(DegreeTableReport { table, threshold })
}

/// Inclusive integer range written `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamRange {
    pub lo: u64,
    pub hi: u64,
}

impl ParamRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidParameters(format!(
                "range {lo}:{hi} must satisfy 1 <= lo <= hi"
            )));
        }
        Ok(ParamRange { lo, hi })
    }

    pub fn single(v: u64) -> Result<Self> {
        Self::new(v, v)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }
}

impl FromStr for ParamRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad range bound {t:?} in {s:?}")))
        };
        match s.split_once(':') {
            Some((lo, hi)) => ParamRange::new(parse(lo)?, parse(hi)?),
            None => ParamRange::single(parse(s)?),
        }
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub m: u64,
    pub n: u64,
    #[serde(rename = "X")]
    pub x: u64,
    /// `ok` or `unsupported`.
    pub ag_status: String,
    pub ag_workers: Option<u64>,
    pub ag_bound: Option<u64>,
    pub a3s_workers: u64,
    pub gasp_big_workers: u64,
    pub ag_rate: Option<String>,
    pub ag_rate_decimal: Option<String>,
    pub a3s_rate: String,
    pub a3s_rate_decimal: String,
    pub gasp_big_rate: String,
    pub gasp_big_rate_decimal: String,
}

impl ComparisonRow {
    pub fn compute(m: u64, n: u64, x: u64) -> Self {
        let ag = workers_ag(m, n, x).ok();
        let a3s = workers_a3s(m, n, x);
        let gasp = workers_gasp_big(m, n, x);
        let ag_rate = ag.map(|a| rate(m, n, a.workers));
        let (ra, rg) = (rate(m, n, a3s), rate(m, n, gasp));
        ComparisonRow {
            m,
            n,
            x,
            ag_status: if ag.is_some() { "ok" } else { "unsupported" }.to_string(),
            ag_workers: ag.map(|a| a.workers),
            ag_bound: ag.map(|a| a.bound),
            a3s_workers: a3s,
            gasp_big_workers: gasp,
            ag_rate: ag_rate.as_ref().map(format_rate),
            ag_rate_decimal: ag_rate.as_ref().map(format_rate_decimal),
            a3s_rate: format_rate(&ra),
            a3s_rate_decimal: format_rate_decimal(&ra),
            gasp_big_rate: format_rate(&rg),
            gasp_big_rate_decimal: format_rate_decimal(&rg),
        }
    }

    /// AG needs strictly fewer workers than both other schemes.
    pub fn ag_beats_both(&self) -> bool {
        self.ag_workers
            .is_some_and(|w| w < self.a3s_workers.min(self.gasp_big_workers))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub supported: usize,
    pub ag_better: usize,
    /// `ag_better / supported`.
    pub fraction: f64,
}

impl fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "points: {} ({} supported by the AG construction)",
            self.points, self.supported
        )?;
        writeln!(
            f,
            "AG uses fewer workers than both A3S and GASP_big at {} points ({:.1}% of supported)",
            self.ag_better,
            100.0 * self.fraction
        )?;
        write!(
            f,
            "note: GASP_big is an upper bound on the GASP threshold, so this fraction \
             overstates the advantage over exact GASP"
        )
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<ComparisonRow>,
    pub summary: SweepSummary,
}

/// Every `(m, n, X)` in the ranges, sorted by `(m, n, X)`.
pub fn compare_sweep(m: ParamRange, n: ParamRange, x: ParamRange) -> Sweep {
    let points: Vec<(u64, u64, u64)> = m
        .iter()
        .flat_map(|m| n.iter().flat_map(move |n| x.iter().map(move |x| (m, n, x))))
        .collect();
    let mut rows: Vec<ComparisonRow> = points
        .par_iter()
        .map(|&(m, n, x)| ComparisonRow::compute(m, n, x))
        .collect();
    rows.sort_by_key(|r| (r.m, r.n, r.x));
    let supported = rows.iter().filter(|r| r.ag_workers.is_some()).count();
    let ag_better = rows.iter().filter(|r| r.ag_beats_both()).count();
    let summary = SweepSummary {
        points: rows.len(),
        supported,
        ag_better,
        fraction: if supported == 0 {
            0.0
        } else {
            ag_better as f64 / supported as f64
        },
    };
    Sweep { rows, summary }
}

pub fn write_csv(rows: &[ComparisonRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<ComparisonRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Whitespace-separated columns for gnuplot; `NaN` marks unsupported points.
pub fn write_gnuplot(rows: &[ComparisonRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "# m n X N_ag N_a3s N_gasp_big R_ag R_a3s R_gasp_big")?;
    for r in rows {
        let ag_n = r.ag_workers.map_or("NaN".to_string(), |v| v.to_string());
        let ag_r = r
            .ag_rate_decimal
            .clone()
            .unwrap_or_else(|| "NaN".to_string());
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            r.m,
            r.n,
            r.x,
            ag_n,
            r.a3s_workers,
            r.gasp_big_workers,
            ag_r,
            r.a3s_rate_decimal,
            r.gasp_big_rate_decimal
        )?;
    }
    Ok(())
}

/// Smallest `X0 <= x_max` such that AG needs fewer workers than A3S for every
/// `X` in `X0..=x_max`.
pub fn a3s_crossover(m: u64, n: u64, x_max: u64) -> Result<Option<u64>> {
    let mut start = None;
    for x in (1..=x_max).rev() {
        let ag = workers_ag(m, n, x)?.workers;
        if ag < workers_a3s(m, n, x) {
            start = Some(x);
        } else {
            break;
        }
    }
    Ok(start)
}
