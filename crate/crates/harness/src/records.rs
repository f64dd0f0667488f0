//! Per-realization CSV rows.

use serde::{Deserialize, Serialize};
use trbeam::{Scenario, Technique};

/// One (realization, pre-filter, SNR point) outcome. Powers are user
/// averages normalised by `ρΓ`; `errors` and `bits` are summed over users.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
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
    pub realization: u64,
    #[serde(rename = "P_s")]
    pub p_s: f64,
    #[serde(rename = "P_isi")]
    pub p_isi: f64,
    #[serde(rename = "P_iui")]
    pub p_iui: f64,
    pub errors: Option<u64>,
    pub bits: Option<u64>,
    pub sum_rate: Option<f64>,
}

/// The header line, without its newline.
pub fn header() -> String {
    let fields = [
        "experiment", "technique", "scenario", "M", "N", "L", "L_p", "correlated", "snr_db", "realization", "P_s",
        "P_isi", "P_iui", "errors", "bits", "sum_rate",
    ];
    fields.join(",")
}
