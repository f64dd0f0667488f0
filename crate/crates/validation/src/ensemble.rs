//! Ensemble averages of the normalised power decomposition.

use trbeam::channel::{generate_channel_set, substream_seed};
use trbeam::dsp::DEFAULT_REG_EPSILON;
use trbeam::link::{composite_response, power_decomposition};
use trbeam::prefilter::build_prefilter;
use trbeam::{ArrayGeometry, ChannelSet64, PrefilterSet64, Result, ScenarioParams, Technique};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Design {
    Tr,
    /// ETR with its total pre-filter length `L + L_E - 1`.
    Etr { prefilter_len: usize },
    Intr { prefilter_len: usize },
}

impl Design {
    pub fn build(self, h: &ChannelSet64) -> Result<PrefilterSet64> {
        let (technique, len) = match self {
            Design::Tr => (Technique::Tr, h.num_taps()),
            Design::Etr { prefilter_len } => (Technique::Etr, prefilter_len),
            Design::Intr { prefilter_len } => (Technique::Intr, prefilter_len),
        };
        build_prefilter(technique, h, len, DEFAULT_REG_EPSILON)
    }

    pub fn label(self) -> String {
        match self {
            Design::Tr => "TR".into(),
            Design::Etr { prefilter_len } => format!("ETR{prefilter_len}"),
            Design::Intr { prefilter_len } => format!("INTR{prefilter_len}"),
        }
    }
}

/// Welford mean and standard error of i.i.d. per-realization values.
#[derive(Clone, Copy, Debug, Default)]
pub struct Tally {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Tally {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }

    /// `(self − other)` in units of the combined standard error.
    pub fn separation(&self, other: &Tally) -> f64 {
        (self.mean - other.mean) / self.std_error().hypot(other.std_error())
    }
}

/// User-averaged `(P_s, P_isi, P_iui) / (ρΓ)` per realization, with ρ = 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct PowerTally {
    pub signal: Tally,
    pub isi: Tally,
    pub iui: Tally,
}

/// Streams `realizations` channel draws (substream `k` of `master_seed`) and
/// tallies the power decomposition of every design on the same channels.
pub fn power_survey(
    scenario: &ScenarioParams,
    num_antennas: usize,
    num_users: usize,
    correlated: bool,
    realizations: u64,
    master_seed: u64,
    designs: &[Design],
) -> Result<Vec<PowerTally>> {
    let array = ArrayGeometry::for_elements(num_antennas)?;
    let mut out = vec![PowerTally::default(); designs.len()];
    for k in 0..realizations {
        let h: ChannelSet64 =
            generate_channel_set(scenario, &array, num_users, correlated, substream_seed(master_seed, k))?;
        for (design, tally) in designs.iter().zip(out.iter_mut()) {
            let d = power_decomposition(&composite_response(&design.build(&h)?, &h)?, 1.0);
            tally.signal.push(d.mean_signal() / scenario.gamma);
            tally.isi.push(d.mean_isi() / scenario.gamma);
            tally.iui.push(d.mean_iui() / scenario.gamma);
        }
    }
    Ok(out)
}
