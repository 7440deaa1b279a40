use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mfc_heat::config::load_scenario;
use mfc_heat::engine::{comparison_suite, compute_metrics, run, run_batch, sweep};
use mfc_heat::output::{comparison_table, metrics_text, plot_svg, sweep_csv, timeseries_csv, write_file};
use mfc_heat::{Actuation, ControllerKind, ReferenceMode, Scenario};

const DEFAULT_FACTORS: [f64; 5] = [0.5, 0.75, 1.0, 1.5, 2.0];

/// Building-heating control simulator.
#[derive(Parser)]
#[command(name = "mfc-heat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario.
    Run(Common),
    /// Run the seven-controller comparison on a shared scenario.
    Compare(Common),
    /// Re-run with all plant coefficients scaled, controller tuning fixed.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated scale factors.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FACTORS)]
        factors: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` lines). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_parser = parse_from_str::<ControllerKind>)]
    controller: Option<ControllerKind>,
    #[arg(long, value_parser = parse_from_str::<ReferenceMode>)]
    reference: Option<ReferenceMode>,
    #[arg(long, value_parser = parse_from_str::<Actuation>)]
    actuator: Option<Actuation>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> std::result::Result<T, String> {
    s.parse()
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = match &self.config {
            Some(path) => load_scenario(path)?,
            None => Scenario::default(),
        };
        if let Some(kind) = self.controller {
            // a different family's gains from the file would not apply
            if kind != s.controller.kind() {
                s.controller = kind.default_config();
            }
        }
        if let Some(r) = self.reference {
            s.reference_mode = r;
        }
        if let Some(a) = self.actuator {
            s.actuator.mode = a;
        }
        if let Some(seed) = self.seed {
            s.rng_seed = seed;
        }
        s.validate().context("invalid scenario")?;
        Ok(s)
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

fn cmd_run(c: &Common) -> Result<()> {
    let s = c.scenario()?;
    let ts = run(&s)?;
    let m = compute_metrics(&ts)?;
    let out = c.out_dir()?;
    write_file(&out.join("timeseries.csv"), &timeseries_csv(&ts))?;
    let text = metrics_text(&m);
    write_file(&out.join("metrics.txt"), &text)?;
    if c.plot {
        write_file(&out.join("plot.svg"), &plot_svg(&ts))?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_compare(c: &Common) -> Result<()> {
    if c.controller.is_some() || c.reference.is_some() {
        bail!("compare fixes controller and reference per row; drop --controller/--reference");
    }
    let base = c.scenario()?;
    let suite = comparison_suite(&base);
    let scenarios: Vec<Scenario> = suite.iter().map(|(_, s)| s.clone()).collect();
    let out = c.out_dir()?;
    let mut rows = Vec::with_capacity(suite.len());
    for ((name, _), ts) in suite.iter().zip(run_batch(&scenarios)) {
        let ts = ts.with_context(|| format!("run {name}"))?;
        write_file(&out.join(format!("{name}.csv")), &timeseries_csv(&ts))?;
        if c.plot {
            write_file(&out.join(format!("{name}.svg")), &plot_svg(&ts))?;
        }
        rows.push((name.to_string(), compute_metrics(&ts)?));
    }
    let table = comparison_table(&rows);
    write_file(&out.join("comparison.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_sweep(c: &Common, factors: &[f64]) -> Result<()> {
    let base = c.scenario()?;
    let kinds = match c.controller {
        Some(k) => vec![k],
        None => vec![
            ControllerKind::Ip,
            ControllerKind::Pi,
            ControllerKind::FlatP,
            ControllerKind::FlatPi,
        ],
    };
    let mut rows = Vec::new();
    for kind in kinds {
        let mut s = base.clone();
        if kind != s.controller.kind() {
            s.controller = kind.default_config();
        }
        for (f, m) in sweep(&s, factors).with_context(|| format!("sweep {kind}"))? {
            rows.push((kind.to_string(), f, m));
        }
    }
    let csv = sweep_csv(&rows);
    write_file(&c.out_dir()?.join("sweep.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Compare(c) => cmd_compare(c),
        Command::Sweep { common, factors } => cmd_sweep(common, factors),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
