//! Reshaping experiment summaries into one CSV per figure.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use trbeam::Technique;

use crate::error::{HarnessError, Result};
use crate::summary::{load_summary, SummaryCell, SummaryReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// ETR ISI against pre-filter length.
    Fig5a,
    /// INTR IUI against pre-filter length.
    Fig5b,
    /// BER against SNR, correlated and uncorrelated channels.
    Fig6,
    /// BER against SNR for several antenna counts.
    Fig7a,
    /// BER against SNR for several user counts.
    Fig7b,
    /// Sum rate against SNR.
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig5a,
        Figure::Fig5b,
        Figure::Fig6,
        Figure::Fig7a,
        Figure::Fig7b,
        Figure::Fig8,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig5a => "fig5a",
            Figure::Fig5b => "fig5b",
            Figure::Fig6 => "fig6",
            Figure::Fig7a => "fig7a",
            Figure::Fig7b => "fig7b",
            Figure::Fig8 => "fig8",
        }
    }

    fn header(self) -> &'static [&'static str] {
        match self {
            Figure::Fig5a => &["series", "L_p [taps]", "P_isi [rho*Gamma]", "P_isi SE [rho*Gamma]"],
            Figure::Fig5b => &["series", "L_p [taps]", "P_iui [rho*Gamma]", "P_iui SE [rho*Gamma]"],
            Figure::Fig6 | Figure::Fig7a | Figure::Fig7b => {
                &["series", "SNR [dB]", "BER", "BER 95% low", "BER 95% high"]
            }
            Figure::Fig8 => &["series", "SNR [dB]", "sum rate [bit/s/Hz]", "sum rate SE [bit/s/Hz]"],
        }
    }

    fn technique(self) -> Option<Technique> {
        match self {
            Figure::Fig5a => Some(Technique::Etr),
            Figure::Fig5b => Some(Technique::Intr),
            _ => None,
        }
    }

    fn x_is_length(self) -> bool {
        matches!(self, Figure::Fig5a | Figure::Fig5b)
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let ids: Vec<_> = Figure::ALL.iter().map(|f| f.id()).collect();
                HarnessError::Config(format!("unknown figure `{s}`; expected one of {}", ids.join(", ")))
            })
    }
}

/// One output line: series label, x and the y columns of the figure.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: Vec<Option<f64>>,
}

/// Series label from every parameter except the figure's x axis.
fn series_label(figure: Figure, c: &SummaryCell) -> String {
    let mut label = format!("{} {} M{} N{} L{}", c.technique, c.scenario.label(), c.antennas, c.users, c.taps);
    if !figure.x_is_length() {
        label.push_str(&format!(" Lp{}", c.prefilter_len));
    }
    label.push_str(if c.correlated { " correlated" } else { " uncorrelated" });
    label
}

fn x_value(figure: Figure, c: &SummaryCell) -> Option<f64> {
    if figure.x_is_length() {
        Some(c.prefilter_len as f64)
    } else {
        c.snr_db
    }
}

fn y_values(figure: Figure, c: &SummaryCell) -> Option<Vec<Option<f64>>> {
    match figure {
        Figure::Fig5a => Some(vec![Some(c.p_isi.mean), c.p_isi.std_error]),
        Figure::Fig5b => Some(vec![Some(c.p_iui.mean), c.p_iui.std_error]),
        Figure::Fig6 | Figure::Fig7a | Figure::Fig7b => {
            let (lo, hi) = c.ber_interval?;
            Some(vec![Some(c.ber?), Some(lo), Some(hi)])
        }
        Figure::Fig8 => {
            let s = c.sum_rate.as_ref()?;
            Some(vec![Some(s.mean), s.std_error])
        }
    }
}

/// Reports whose experiment names start with the figure id, else with its
/// numeric part (`fig5` for `fig5a`), else all of them.
fn select(figure: Figure, reports: &[SummaryReport]) -> Vec<&SummaryReport> {
    let id = figure.id();
    let stem = id.trim_end_matches(['a', 'b']);
    for prefix in [id, stem] {
        let chosen: Vec<_> = reports.iter().filter(|r| r.experiment.starts_with(prefix)).collect();
        if !chosen.is_empty() {
            return chosen;
        }
    }
    reports.iter().collect()
}

/// Series label, x and the y columns when the cell carries the figure's data.
type Point = (String, f64, Option<Vec<Option<f64>>>);

/// Rows of `figure`, every series on the union x grid. Absent or
/// incomplete cells are a coverage error naming each of them.
pub fn figure_rows(figure: Figure, reports: &[SummaryReport]) -> Result<Vec<PlotRow>> {
    let mut series: Vec<String> = Vec::new();
    let mut grid: Vec<f64> = Vec::new();
    let mut points: Vec<Point> = Vec::new();
    for report in select(figure, reports) {
        for c in &report.cells {
            if figure.technique().is_some_and(|t| t != c.technique) {
                continue;
            }
            let Some(x) = x_value(figure, c) else { continue };
            let label = series_label(figure, c);
            if points.iter().any(|(s, px, _)| *s == label && *px == x) {
                // Power cells repeat once per SNR point with identical values.
                continue;
            }
            if !series.contains(&label) {
                series.push(label.clone());
            }
            if !grid.contains(&x) {
                grid.push(x);
            }
            points.push((label, x, y_values(figure, c)));
        }
    }
    if points.is_empty() {
        return Err(HarnessError::Coverage(vec![format!("{figure}: no summary cells")]));
    }
    grid.sort_by(f64::total_cmp);

    let mut rows = Vec::with_capacity(series.len() * grid.len());
    let mut missing = BTreeSet::new();
    for s in &series {
        for &x in &grid {
            match points.iter().find(|(ps, px, _)| ps == s && *px == x) {
                Some((_, _, Some(y))) => rows.push(PlotRow {
                    series: s.clone(),
                    x,
                    y: y.clone(),
                }),
                Some((_, _, None)) => {
                    missing.insert(format!("{s} @ {x} (no {} data)", figure.header()[2]));
                }
                None => {
                    missing.insert(format!("{s} @ {x}"));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(HarnessError::Coverage(missing.into_iter().collect()));
    }
    Ok(rows)
}

/// Every `summary.json` one level below `out`, sorted by directory name.
pub fn load_reports(out: &Path) -> Result<Vec<SummaryReport>> {
    let entries = std::fs::read_dir(out)
        .map_err(|e| HarnessError::Runtime(format!("cannot read {}: {e}", out.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path().join("summary.json"))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths.iter().map(|p| load_summary(p)).collect()
}

/// Writes `<out>/plots/<figure>.csv` and returns its path.
pub fn emit_plot(figure: Figure, out: &Path) -> Result<PathBuf> {
    let reports = load_reports(out)?;
    let rows = figure_rows(figure, &reports)?;
    let dir = out.join("plots");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{figure}.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(figure.header())?;
    for row in &rows {
        let mut fields = vec![row.series.clone(), row.x.to_string()];
        fields.extend(row.y.iter().map(|v| v.map_or_else(String::new, |v| v.to_string())));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::Stat;
    use trbeam::Scenario;

    fn cell(technique: Technique, lp: usize, snr: Option<f64>) -> SummaryCell {
        let stat = |v| Stat {
            mean: v,
            std_error: Some(0.01),
        };
        SummaryCell {
            key: String::new(),
            technique,
            scenario: Scenario::Cubicle,
            antennas: 64,
            users: 10,
            taps: 60,
            prefilter_len: lp,
            correlated: false,
            snr_db: snr,
            count: 3,
            p_s: stat(1.0),
            p_isi: stat(lp as f64),
            p_iui: stat(0.5),
            sum_rate: snr.map(stat),
            errors: snr.map(|_| 5),
            bits: snr.map(|_| 1000),
            ber: snr.map(|_| 0.005),
            ber_interval: snr.map(|_| (0.002, 0.01)),
        }
    }

    fn report(name: &str, cells: Vec<SummaryCell>) -> SummaryReport {
        SummaryReport {
            experiment: name.into(),
            fingerprint: String::new(),
            cells,
        }
    }

    #[test]
    fn figure_ids_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.id().parse::<Figure>().unwrap(), f);
        }
        assert!(matches!("fig9".parse::<Figure>(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn length_sweep_keeps_one_point_per_length() {
        let cells = vec![
            cell(Technique::Etr, 90, Some(0.0)),
            cell(Technique::Etr, 90, Some(10.0)),
            cell(Technique::Etr, 60, Some(0.0)),
            cell(Technique::Intr, 60, Some(0.0)),
        ];
        let rows = figure_rows(Figure::Fig5a, &[report("fig5", cells)]).unwrap();
        let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
        assert_eq!(xs, vec![60.0, 90.0]);
        assert_eq!(rows[1].y[0], Some(90.0));
    }

    #[test]
    fn missing_cells_are_listed() {
        let a = report("fig6-unc", vec![cell(Technique::Tr, 60, Some(0.0)), cell(Technique::Tr, 60, Some(10.0))]);
        let b = report("fig6-cor", vec![cell(Technique::Intr, 60, Some(0.0))]);
        match figure_rows(Figure::Fig6, &[a, b]) {
            Err(HarnessError::Coverage(cells)) => {
                assert_eq!(cells.len(), 1);
                assert!(cells[0].starts_with("INTR") && cells[0].ends_with("@ 10"), "{cells:?}");
            }
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn ber_figures_need_ber_data() {
        let mut c = cell(Technique::Tr, 60, Some(0.0));
        c.ber = None;
        c.ber_interval = None;
        assert!(matches!(
            figure_rows(Figure::Fig7a, &[report("x", vec![c])]),
            Err(HarnessError::Coverage(_))
        ));
    }

    #[test]
    fn name_prefix_narrows_the_selection() {
        let reports = [
            report("fig7a-m16", vec![cell(Technique::Tr, 90, Some(0.0))]),
            report("fig7b-n2", vec![cell(Technique::Intr, 90, Some(5.0))]),
        ];
        let rows = figure_rows(Figure::Fig7a, &reports).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].series.starts_with("TR"));
        assert_eq!(select(Figure::Fig5b, &[report("fig5", vec![])]).len(), 1);
    }
}
