//! Prints mean normalized (P_s, P_isi, P_iui) for TR, ETR and INTR.
//!
//! Usage: `cargo run --release --example table2 -- [realizations] [users] [correlated]`

use std::time::Instant;

use trbeam::channel::{generate_channel_set, substream_seed, ArrayGeometry, Scenario, ScenarioParams};
use trbeam::link::{composite_response, power_decomposition};
use trbeam::prefilter::{etr_prefilter, intr_prefilter, tr_prefilter};
use trbeam::ChannelSet64;

fn main() -> trbeam::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let reals: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let users: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10);
    let correlated = args.get(3).is_some_and(|s| s == "1" || s == "true");
    let mut scenario = ScenarioParams::new(Scenario::Cubicle);
    if let Ok(v) = std::env::var("TS") {
        scenario.sample_period_ns = v.parse().unwrap();
    }
    if let Ok(v) = std::env::var("BETA") {
        scenario.direct_fraction = v.parse().unwrap();
    }
    let array = ArrayGeometry::for_elements(64)?;
    let labels = ["TR", "ETR90", "ETR120", "INTR60", "INTR90", "INTR120"];
    let mut acc = vec![[0.0f64; 3]; labels.len()];
    let mut time = vec![0.0f64; labels.len()];
    for k in 0..reals {
        let h: ChannelSet64 = generate_channel_set(&scenario, &array, users, correlated, substream_seed(1, k))?;
        for (i, label) in labels.iter().enumerate() {
            let t = Instant::now();
            let p = match *label {
                "TR" => tr_prefilter(&h)?,
                "ETR90" => etr_prefilter(&h, 31)?,
                "ETR120" => etr_prefilter(&h, 61)?,
                "INTR60" => intr_prefilter(&h, 60, 1e-12)?,
                "INTR90" => intr_prefilter(&h, 90, 1e-12)?,
                _ => intr_prefilter(&h, 120, 1e-12)?,
            };
            let d = power_decomposition(&composite_response(&p, &h)?, 1.0);
            time[i] += t.elapsed().as_secs_f64();
            acc[i][0] += d.mean_signal();
            acc[i][1] += d.mean_isi();
            acc[i][2] += d.mean_iui();
        }
    }
    for (i, label) in labels.iter().enumerate() {
        let r = reals as f64;
        println!(
            "{label:8} Ps {:8.4} Pisi {:9.6} Piui {:9.6}  ({:.1} ms/realization)",
            acc[i][0] / r,
            acc[i][1] / r,
            acc[i][2] / r,
            1e3 * time[i] / r
        );
    }
    Ok(())
}
