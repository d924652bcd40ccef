//! Results CSV, summary table and a static SVG of accuracy against power.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, IoContext, Result};
use crate::sweep::SweepResult;

/// One CSV line. Aggregate rows carry `trial = -1` and fill `mean`/`std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: String,
    pub mode: String,
    pub task: String,
    pub k: usize,
    pub gamma_over_2pi_hz: f64,
    pub power_watt: f64,
    pub trial: i64,
    pub accuracy: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

pub fn csv_rows(results: &[SweepResult]) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for r in results {
        let base = |power: f64, trial: i64, accuracy: f64| CsvRow {
            run_id: r.run_id.clone(),
            mode: r.mode.name().to_string(),
            task: r.task.name().to_string(),
            k: r.k,
            gamma_over_2pi_hz: r.gamma_over_2pi_hz,
            power_watt: power,
            trial,
            accuracy,
            mean: None,
            std: None,
        };
        for (p, &power) in r.powers_watt.iter().enumerate() {
            for (t, &a) in r.accuracy[p].iter().enumerate() {
                rows.push(base(power, t as i64, a));
            }
            let mean = r.mean(p);
            rows.push(CsvRow { mean: Some(mean), std: Some(r.std(p)), ..base(power, -1, mean) });
        }
    }
    rows
}

pub fn write_csv(path: &Path, results: &[SweepResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))?;
    for row in csv_rows(results) {
        w.serialize(row).map_err(|e| HarnessError::Format(e.to_string()))?;
    }
    w.flush().context(|| format!("writing {}", path.display()))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|row| row.map_err(|e| HarnessError::Format(format!("{}: {e}", path.display()))))
        .collect()
}

/// Accuracy per mode at the grid point nearest `power`, as `mean ± std`.
pub fn summary_table(results: &[SweepResult], power: f64) -> String {
    let mut s = format!("{:<14} {:>6} {:>12} {:>16}\n", "mode", "k", "power (W)", "accuracy");
    for r in results {
        if let Some(p) = r.nearest_power(power) {
            writeln!(
                s,
                "{:<14} {:>6} {:>12.3e} {:>8.4} ± {:.4}",
                r.mode.name(),
                r.k,
                r.powers_watt[p],
                r.mean(p),
                r.std(p)
            )
            .expect("string write");
        }
    }
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Line chart of mean accuracy (with ±std bars) against log10 power.
pub fn render_svg(results: &[SweepResult]) -> Result<String> {
    let powers: Vec<f64> = results.iter().flat_map(|r| r.powers_watt.iter().copied()).collect();
    if powers.is_empty() {
        return Err(HarnessError::Format("nothing to plot: empty power grid".into()));
    }
    let lo = powers.iter().copied().fold(f64::INFINITY, f64::min).log10().floor();
    let mut hi = powers.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10().ceil();
    if hi <= lo {
        hi = lo + 1.0;
    }
    let (ml, mr, mt, mb) = MARGIN;
    let pw = WIDTH - ml - mr;
    let ph = HEIGHT - mt - mb;
    let x = |w: f64| ml + (w.log10() - lo) / (hi - lo) * pw;
    let y = |a: f64| mt + (1.0 - a) * ph;

    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line(format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    ));
    line(format!(r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#));
    let mut e = lo;
    while e <= hi {
        let px = x(10f64.powf(e));
        line(format!(r##"<line x1="{px:.1}" y1="{mt}" x2="{px:.1}" y2="{:.1}" stroke="#ddd"/>"##, mt + ph));
        line(format!(r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">1e{e}</text>"#, mt + ph + 18.0));
        e += 1.0;
    }
    for i in 0..=5 {
        let a = i as f64 / 5.0;
        line(format!(
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{a:.1}</text>"#,
            ml - 6.0,
            y(a) + 4.0
        ));
    }
    line(format!(
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">RF power (W)</text>"#,
        ml + pw / 2.0,
        HEIGHT - 10.0
    ));
    line(format!(
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">test accuracy</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    ));
    for (i, r) in results.iter().enumerate() {
        let c = COLOURS[i % COLOURS.len()];
        let pts: Vec<String> = (0..r.powers_watt.len())
            .map(|p| format!("{:.1},{:.1}", x(r.powers_watt[p]), y(r.mean(p))))
            .collect();
        line(format!(r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, pts.join(" ")));
        for p in 0..r.powers_watt.len() {
            let (m, sd, px) = (r.mean(p), r.std(p), x(r.powers_watt[p]));
            line(format!(r#"<circle cx="{px:.1}" cy="{:.1}" r="3" fill="{c}"/>"#, y(m)));
            if sd > 0.0 {
                line(format!(
                    r#"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="{c}"/>"#,
                    y((m + sd).min(1.0)),
                    y((m - sd).max(0.0))
                ));
            }
        }
        let ly = mt + 16.0 + 16.0 * i as f64;
        line(format!(
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{c}" stroke-width="2"/>"#,
            ml + 10.0,
            ml + 30.0
        ));
        line(format!(r#"<text x="{:.1}" y="{:.1}">{} (k={})</text>"#, ml + 36.0, ly + 4.0, r.mode.name(), r.k));
    }
    line("</svg>".to_string());
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Writes `results.csv` and `accuracy_vs_power.svg` under `out`.
pub fn emit_report(out: &Path, results: &[SweepResult]) -> Result<ReportFiles> {
    if results.is_empty() {
        return Err(HarnessError::Format("no sweep results to report".into()));
    }
    if let Some(r) = results.iter().find(|r| r.powers_watt.is_empty()) {
        return Err(HarnessError::Format(format!("run {} has an empty power grid", r.run_id)));
    }
    std::fs::create_dir_all(out).context(|| format!("creating {}", out.display()))?;
    let csv = out.join("results.csv");
    write_csv(&csv, results)?;
    let svg = out.join("accuracy_vs_power.svg");
    std::fs::write(&svg, render_svg(results)?).context(|| format!("writing {}", svg.display()))?;
    crate::sweep::write_timestamp(&csv)?;
    Ok(ReportFiles { csv, svg })
}
