//! Named configurations shipped with the binary.

use crate::config::ConfigFile;
use crate::error::{HarnessError, Result};

pub const PRESETS: [(&str, &str); 6] = [
    ("smoke", include_str!("../presets/smoke.toml")),
    ("table2", include_str!("../presets/table2.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
];

pub fn preset(name: &str) -> Result<ConfigFile> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        HarnessError::Config(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })?;
    ConfigFile::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            assert!(!cfg.experiments.is_empty(), "{name}");
        }
        assert!(matches!(preset("fig9"), Err(HarnessError::Config(_))));
    }

    #[test]
    fn table2_covers_both_user_counts_and_flags() {
        let cfg = preset("table2").unwrap();
        let cells: Vec<(usize, bool)> = cfg.experiments.iter().map(|e| (e.users, e.correlated)).collect();
        assert_eq!(cells, vec![(2, false), (2, true), (10, false), (10, true)]);
        assert!(cfg.experiments.iter().all(|e| e.antennas == 64 && e.num_realizations == 500 && e.lengths() == [60, 90, 120]));
    }
}
