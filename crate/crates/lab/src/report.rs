//! Report rendering and persistence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::formats::{write_bound_csv, BoundSummary};
use crate::pipeline::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn render_json(report: &VerificationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"))
}

pub fn render_text(report: &VerificationReport) -> String {
    let p = &report.provenance;
    let mut s = String::new();
    let h: Vec<String> = p.frame.hodge_numbers.iter().map(|x| x.to_string()).collect();
    writeln!(s, "periodlab verification report").unwrap();
    writeln!(s, "frame    weight {}, h = ({})", p.frame.weight, h.join(", ")).unwrap();
    writeln!(s, "config   {}", p.config_hash).unwrap();
    writeln!(s, "seed     {}", p.seed).unwrap();
    writeln!(s, "version  {}", p.version).unwrap();
    let dims: Vec<String> = report.metrics.dims.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(s, "dims     {}", dims.join(" ")).unwrap();
    writeln!(s).unwrap();
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    writeln!(s, "    {:<14} {:<width$}  {:>10}  {:>10}  detail", "status", "check", "value", "threshold").unwrap();
    for c in &report.checks {
        writeln!(
            s,
            "  {} {:<14} {:<width$}  {:>10}  {:>10}  {}",
            c.status.glyph(),
            c.status.label(),
            c.name,
            fmt_opt(c.value),
            fmt_opt(c.threshold),
            c.detail
        )
        .unwrap();
    }
    for st in &report.skipped {
        writeln!(s, "  - skipped        {st}").unwrap();
    }
    writeln!(s).unwrap();
    let counts: Vec<String> = report.counts().iter().map(|(k, v)| format!("{v} {k}")).collect();
    writeln!(s, "overall: {} ({})", report.overall.label().to_uppercase(), counts.join(", ")).unwrap();
    s
}

pub fn render_checks_csv(report: &VerificationReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "status", "value", "threshold", "detail"])?;
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            c.status.label().to_string(),
            c.value.map(|v| v.to_string()).unwrap_or_default(),
            c.threshold.map(|v| v.to_string()).unwrap_or_default(),
            c.detail.clone(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render_bound_csv(report: &VerificationReport) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_bound_csv(&report.bound_rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

pub fn bound_summary(report: &VerificationReport) -> BoundSummary {
    let v = &report.metrics.values;
    BoundSummary {
        max_abs_coord: v.get("polydisc.max_abs_coord").copied().unwrap_or(0.0),
        max_d_e: v.get("polydisc.max_d_E").copied().unwrap_or(0.0),
        violations: report.bound_violations(),
        config_hash: report.provenance.config_hash.clone(),
    }
}

fn write(path: PathBuf, text: &str) -> anyhow::Result<PathBuf> {
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Writes the report into `dir`: `report.json`, `report.txt`, or
/// `checks.csv` + `bound.csv` + `bound_summary.json`.
pub fn emit_report(report: &VerificationReport, format: Format, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(match format {
        Format::Json => vec![write(dir.join("report.json"), &render_json(report))?],
        Format::Text => vec![write(dir.join("report.txt"), &render_text(report))?],
        Format::Csv => {
            let mut summary = serde_json::to_string_pretty(&bound_summary(report))?;
            summary.push('\n');
            vec![
                write(dir.join("checks.csv"), &render_checks_csv(report)?)?,
                write(dir.join("bound.csv"), &render_bound_csv(report)?)?,
                write(dir.join("bound_summary.json"), &summary)?,
            ]
        }
    })
}
