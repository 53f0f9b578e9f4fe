use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use period_core::big_cell::{cell_coordinate, membership_in_big_cell, FlagPoint};
use period_core::hodge::{build_reference_frame, check_hodge_riemann};
use period_core::lie::lie_algebra_basis;
use period_core::roots::root_system;
use period_core::strong_orth::{centralizer_check, greedy_strongly_orthogonal};
use period_lab::config::{resolve, TrialConfig};
use period_lab::formats::{
    cell_coordinate_json, frame_dump, membership_json, read_flag, read_frame_spec, roots_json, write_bound_csv,
    write_serre_csv,
};
use period_lab::pipeline::{brute_force_strongly_orthogonal, run_bound, run_pipeline, Status};
use period_lab::report::{emit_report, render_checks_csv, render_json, render_text, Format};

/// Period-domain verification lab.
#[derive(Parser)]
#[command(name = "periodlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Trial config JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset: sl2, sp4, k3toy, nonhermitian.
    #[arg(long)]
    preset: Option<String>,
    /// Bare frame spec JSON `{"weight": n, "hodge_numbers": [...]}`.
    #[arg(long)]
    frame: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
}

impl Source {
    fn load(&self) -> anyhow::Result<TrialConfig> {
        let mut cfg = match &self.frame {
            Some(path) if self.config.is_none() && self.preset.is_none() => TrialConfig::new(read_frame_spec(path)?),
            Some(_) => anyhow::bail!("--frame cannot be combined with --config or --preset"),
            None => resolve(self.config.as_deref(), self.preset.as_deref())?,
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.samples = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump the reference frame; with --flag, analyse a flag against it.
    Frame {
        #[command(flatten)]
        source: Source,
        /// Flag basis as JSON or CSV (row-major re, im pairs).
        #[arg(long)]
        flag: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Root system, ordering and Weyl basis summary.
    Roots {
        #[command(flatten)]
        source: Source,
        /// Also write Serre constants as CSV.
        #[arg(long)]
        serre: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy strongly orthogonal set and centralizer check.
    Strongorth {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full verification pipeline.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Directory for report files; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Polydisc bound CSV and summary.
    Bound {
        #[command(flatten)]
        source: Source,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON path; stderr when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn write_out(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

/// Exit status: `Ok(true)` all checks pass.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Frame { source, flag, out } => {
            let cfg = source.load()?;
            let frame = build_reference_frame(&cfg.frame.numbers()?);
            let mut doc = frame_dump(&frame);
            let mut ok = true;
            if let Some(path) = flag {
                let nums = frame.numbers();
                let fp = FlagPoint::new(nums, read_flag(&path)?)?;
                let verdict = check_hodge_riemann(&frame, &fp)?;
                let rep = membership_in_big_cell(nums, &fp);
                let coord = if rep.is_member() {
                    Some(cell_coordinate_json(&cell_coordinate(nums, &fp)?))
                } else {
                    None
                };
                ok = rep.is_member();
                doc["flag"] = json!({
                    "hodge_riemann": format!("{verdict:?}"),
                    "membership": membership_json(&rep),
                    "coordinate": coord,
                });
            }
            write_out(out.as_deref(), &pretty(&doc))?;
            Ok(ok)
        }
        Command::Roots { source, serre, out } => {
            let cfg = source.load()?;
            let alg = lie_algebra_basis(&build_reference_frame(&cfg.frame.numbers()?));
            let rs = root_system(&alg)?;
            let rel = rs.check_sum_relations(&alg);
            let mut doc = roots_json(&rs);
            doc["sum_relation_violations"] = json!(rel.violations());
            if let Some(p) = serre {
                let f = std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                write_serre_csv(&rs, f)?;
            }
            write_out(out.as_deref(), &pretty(&doc))?;
            Ok(rel.violations() == 0)
        }
        Command::Strongorth { source, out } => {
            let cfg = source.load()?;
            let alg = lie_algebra_basis(&build_reference_frame(&cfg.frame.numbers()?));
            let rs = root_system(&alg)?;
            let sos = greedy_strongly_orthogonal(&rs);
            let c = centralizer_check(&rs, &sos);
            let best = brute_force_strongly_orthogonal(&rs);
            let doc = json!({
                "r": sos.r,
                "lambda": sos.lambda,
                "oriented": sos.oriented,
                "oriented_degrees": sos.oriented_degrees,
                "exhaustive_maximum": best,
                "centralizer_dim": c.dim,
                "centralizer_pass": c.pass,
            });
            write_out(out.as_deref(), &pretty(&doc))?;
            Ok(c.pass && best.is_none_or(|b| b == sos.r))
        }
        Command::Verify { source, format, out } => {
            let cfg = source.load()?;
            let report = run_pipeline(&cfg)?;
            match out {
                Some(dir) => {
                    for p in emit_report(&report, format, &dir)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => {
                    let text = match format {
                        Format::Json => render_json(&report),
                        Format::Text => render_text(&report),
                        Format::Csv => render_checks_csv(&report)?,
                    };
                    write_out(None, &text)?;
                }
            }
            Ok(report.overall != Status::Fail)
        }
        Command::Bound { source, out, summary } => {
            let cfg = source.load()?;
            let (rows, sum) = run_bound(&cfg)?;
            match &out {
                Some(p) => {
                    let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
                    write_bound_csv(&rows, f)?;
                }
                None => write_bound_csv(&rows, std::io::stdout().lock())?,
            }
            let text = format!("{}\n", serde_json::to_string_pretty(&sum)?);
            match summary {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => eprint!("{text}"),
            }
            Ok(sum.violations == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
