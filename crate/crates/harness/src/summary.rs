//! Aggregation of per-realization records into experiment cells.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use trbeam::link::{wilson_interval, WILSON_Z};
use trbeam::metrics::Summary;
use trbeam::{Scenario, Technique};

use crate::error::{HarnessError, Result};
use crate::records::Record;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std_error: Option<f64>,
}

impl Stat {
    fn of(values: Vec<f64>) -> Result<Self> {
        let s = Summary::from_values(values)?;
        Ok(Self {
            mean: s.mean,
            std_error: s.std_error,
        })
    }
}

/// Statistics of one (technique, scenario, M, N, L, L_p, correlated, SNR)
/// cell over its realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    /// `technique/scenario/M/N/L/L_p/correlation/snr`, unique per cell.
    pub key: String,
    pub technique: Technique,
    pub scenario: Scenario,
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "N")]
    pub users: usize,
    #[serde(rename = "L")]
    pub taps: usize,
    #[serde(rename = "L_p")]
    pub prefilter_len: usize,
    pub correlated: bool,
    pub snr_db: Option<f64>,
    pub count: usize,
    #[serde(rename = "P_s")]
    pub p_s: Stat,
    #[serde(rename = "P_isi")]
    pub p_isi: Stat,
    #[serde(rename = "P_iui")]
    pub p_iui: Stat,
    pub sum_rate: Option<Stat>,
    pub errors: Option<u64>,
    pub bits: Option<u64>,
    pub ber: Option<f64>,
    /// 95% Wilson interval of the pooled BER.
    pub ber_interval: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub experiment: String,
    pub fingerprint: String,
    pub cells: Vec<SummaryCell>,
}

fn cell_key(r: &Record) -> String {
    let snr = r.snr_db.map_or_else(|| "-".to_string(), |s| s.to_string());
    format!(
        "{}/{}/M{}/N{}/L{}/Lp{}/{}/snr{snr}",
        r.technique,
        r.scenario.label(),
        r.antennas,
        r.users,
        r.taps,
        r.prefilter_len,
        if r.correlated { "cor" } else { "unc" }
    )
}

/// Cells in order of first appearance. Means are order-independent.
pub fn summarize(records: &[Record]) -> Result<Vec<SummaryCell>> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<&Record>)> = Vec::new();
    for r in records {
        let key = cell_key(r);
        let i = *index.entry(key.clone()).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(r);
    }
    groups
        .into_iter()
        .map(|(key, rows)| {
            let first = rows[0];
            let col = |f: fn(&Record) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let rates: Option<Vec<f64>> = rows.iter().map(|r| r.sum_rate).collect();
            let errors: Option<u64> = rows.iter().map(|r| r.errors).sum();
            let bits: Option<u64> = rows.iter().map(|r| r.bits).sum();
            let (ber, ber_interval) = match (errors, bits) {
                (Some(e), Some(b)) if b > 0 => (Some(e as f64 / b as f64), Some(wilson_interval(e, b, WILSON_Z))),
                _ => (None, None),
            };
            Ok(SummaryCell {
                key,
                technique: first.technique,
                scenario: first.scenario,
                antennas: first.antennas,
                users: first.users,
                taps: first.taps,
                prefilter_len: first.prefilter_len,
                correlated: first.correlated,
                snr_db: first.snr_db,
                count: rows.len(),
                p_s: Stat::of(col(|r| r.p_s))?,
                p_isi: Stat::of(col(|r| r.p_isi))?,
                p_iui: Stat::of(col(|r| r.p_iui))?,
                sum_rate: rates.map(Stat::of).transpose()?,
                errors,
                bits,
                ber,
                ber_interval,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct FlatCell<'a> {
    key: &'a str,
    technique: Technique,
    scenario: Scenario,
    #[serde(rename = "M")]
    antennas: usize,
    #[serde(rename = "N")]
    users: usize,
    #[serde(rename = "L")]
    taps: usize,
    #[serde(rename = "L_p")]
    prefilter_len: usize,
    correlated: bool,
    snr_db: Option<f64>,
    count: usize,
    #[serde(rename = "P_s")]
    p_s: f64,
    #[serde(rename = "P_s_se")]
    p_s_se: Option<f64>,
    #[serde(rename = "P_isi")]
    p_isi: f64,
    #[serde(rename = "P_isi_se")]
    p_isi_se: Option<f64>,
    #[serde(rename = "P_iui")]
    p_iui: f64,
    #[serde(rename = "P_iui_se")]
    p_iui_se: Option<f64>,
    sum_rate: Option<f64>,
    sum_rate_se: Option<f64>,
    errors: Option<u64>,
    bits: Option<u64>,
    ber: Option<f64>,
    ber_lo: Option<f64>,
    ber_hi: Option<f64>,
}

/// Writes `summary.json` and `summary.csv` into `dir`.
pub fn write_summary(dir: &Path, report: &SummaryReport) -> Result<()> {
    std::fs::write(dir.join("summary.json"), serde_json::to_vec_pretty(report)?)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for c in &report.cells {
        w.serialize(FlatCell {
            key: &c.key,
            technique: c.technique,
            scenario: c.scenario,
            antennas: c.antennas,
            users: c.users,
            taps: c.taps,
            prefilter_len: c.prefilter_len,
            correlated: c.correlated,
            snr_db: c.snr_db,
            count: c.count,
            p_s: c.p_s.mean,
            p_s_se: c.p_s.std_error,
            p_isi: c.p_isi.mean,
            p_isi_se: c.p_isi.std_error,
            p_iui: c.p_iui.mean,
            p_iui_se: c.p_iui.std_error,
            sum_rate: c.sum_rate.as_ref().map(|s| s.mean),
            sum_rate_se: c.sum_rate.as_ref().and_then(|s| s.std_error),
            errors: c.errors,
            bits: c.bits,
            ber: c.ber,
            ber_lo: c.ber_interval.map(|i| i.0),
            ber_hi: c.ber_interval.map(|i| i.1),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_summary(path: &Path) -> Result<SummaryReport> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_slice(&bytes)?)
}
