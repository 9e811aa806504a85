//! `heatbie` — synthesise Cauchy data, reconstruct inner boundaries and
//! export curves for plotting.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use heatbie::geometry::{fmt_f64, SHAPE_NAMES};
use heatbie::inversion::radial_error;
use heatbie::synthesis::synthesize_with_refinement;
use heatbie::{add_noise, make_shape, reconstruct, CauchyData, Curve, Mode, Reconstruction, ShapeParams};
use serde::Serialize;

use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "heatbie", version, about = "Inner-boundary reconstruction for the heat equation from Cauchy data")]
struct Cli {
    /// Log progress of every iteration.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate (optionally noisy) Cauchy data on the outer curve.
    Synth(Overrides),
    /// Reconstruct the inner curve from Cauchy data.
    Invert(Overrides),
    /// Write sample points of named curves.
    Curves {
        /// Curves to export; all built-in shapes when omitted.
        names: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

/// Exit status 2 for bad input, 1 for failures while computing.
enum Failure {
    Invalid(anyhow::Error),
    Solver(anyhow::Error),
}

impl Failure {
    fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Failure::Invalid(e.into())
    }

    fn solver(e: impl Into<anyhow::Error>) -> Self {
        Failure::Solver(e.into())
    }
}

#[derive(Serialize)]
struct Geometry {
    inner: Curve,
    outer: Curve,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    config: &'a RunConfig,
    command: &'static str,
    resolved_mode: Mode,
    geometry: Geometry,
}

#[derive(Serialize)]
struct Summary<'a> {
    mode: Mode,
    stop: heatbie::StopReason,
    iterations: usize,
    selected_iteration: usize,
    final_lambda: Option<f64>,
    final_update_inf: Option<f64>,
    error_inf: Option<f64>,
    error_rms: Option<f64>,
    coefficients: &'a [f64],
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn prepare(overrides: &Overrides) -> Result<(RunConfig, Curve, Curve), Failure> {
    let config = RunConfig::load(overrides).map_err(Failure::Invalid)?;
    config.validate().map_err(Failure::Invalid)?;
    let inner = config.inner_curve().map_err(Failure::invalid)?;
    let outer = config.outer_curve().map_err(Failure::invalid)?;
    std::fs::create_dir_all(&config.out)
        .with_context(|| format!("creating {}", config.out.display()))
        .map_err(Failure::Solver)?;
    Ok((config, inner, outer))
}

fn sidecar<'a>(config: &'a RunConfig, command: &'static str, inner: &Curve, outer: &Curve) -> Sidecar<'a> {
    Sidecar {
        config,
        command,
        resolved_mode: config.mode.resolve(config.delta),
        geometry: Geometry {
            inner: inner.clone(),
            outer: outer.clone(),
        },
    }
}

fn make_data(config: &RunConfig, inner: &Curve, outer: &Curve) -> Result<CauchyData, Failure> {
    let exact = synthesize_with_refinement(
        inner,
        outer,
        config.kappa,
        config.alpha,
        config.n,
        config.m,
        config.forward_refinement,
    )
    .map_err(Failure::solver)?;
    add_noise(&exact, config.delta, config.seed).map_err(Failure::solver)
}

fn cmd_synth(overrides: &Overrides) -> Result<(), Failure> {
    let (config, inner, outer) = prepare(overrides)?;
    let data = make_data(&config, &inner, &outer)?;
    let csv = config.out.join("data.csv");
    data.write_csv(&csv).map_err(Failure::solver)?;
    write_json(&config.out.join("data.json"), &sidecar(&config, "synth", &inner, &outer)).map_err(Failure::Solver)?;
    log::info!("wrote {}", csv.display());
    Ok(())
}

fn history_csv(recon: &Reconstruction) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut out = String::from("iter,lambda,misfit_rms,update_inf,halvings,error_inf,error_rms\n");
    for h in &recon.history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            h.iter,
            fmt_f64(h.lambda),
            fmt_f64(h.misfit_rms),
            fmt_f64(h.update_inf),
            h.halvings,
            opt(h.error_inf),
            opt(h.error_rms)
        );
    }
    out
}

fn cmd_invert(overrides: &Overrides) -> Result<(), Failure> {
    let (config, inner, outer) = prepare(overrides)?;
    let data = match &config.data {
        Some(path) => {
            CauchyData::read_csv(path, config.kappa, config.alpha, config.m, config.n, config.delta, config.seed)
                .map_err(|e| Failure::Invalid(anyhow!(e).context(format!("reading {}", path.display()))))?
        }
        None => make_data(&config, &inner, &outer)?,
    };
    let recon_config = config.recon();
    let truth = config.compare_truth.then_some(&inner);
    let recon = reconstruct(&recon_config, &outer, &data, truth).map_err(Failure::solver)?;

    for (k, snapshot) in recon.snapshots.iter().enumerate() {
        let path = config.out.join(format!("curve_iter_{k:03}.csv"));
        Curve::Radial(snapshot.clone())
            .export_csv(config.curve_samples, &path)
            .map_err(Failure::solver)?;
    }
    write_text(&config.out.join("history.csv"), &history_csv(&recon)).map_err(Failure::Solver)?;
    let (error_inf, error_rms) = match truth {
        Some(t) => {
            let (a, b) = radial_error(&Curve::Radial(recon.curve.clone()), t).map_err(Failure::solver)?;
            (Some(a), Some(b))
        }
        None => (None, None),
    };
    let last = recon.history.last();
    let summary = Summary {
        mode: recon_config.mode,
        stop: recon.stop,
        iterations: recon.iterations(),
        selected_iteration: recon.selected,
        final_lambda: last.map(|h| h.lambda),
        final_update_inf: last.map(|h| h.update_inf),
        error_inf,
        error_rms,
        coefficients: &recon.curve.coeffs,
    };
    write_json(&config.out.join("summary.json"), &summary).map_err(Failure::Solver)?;
    write_json(&config.out.join("run.json"), &sidecar(&config, "invert", &inner, &outer)).map_err(Failure::Solver)?;
    if let Some(e) = error_inf {
        log::info!("stopped ({:?}) after {} iterations, radial error {e:.4}", recon.stop, recon.iterations());
    }
    Ok(())
}

fn cmd_curves(names: &[String], overrides: &Overrides) -> Result<(), Failure> {
    let config = RunConfig::load(overrides).map_err(Failure::Invalid)?;
    if config.curve_samples < 2 {
        return Err(Failure::Invalid(anyhow!("curve_samples must be at least 2")));
    }
    let names: Vec<String> = if names.is_empty() {
        SHAPE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    let curves = names
        .iter()
        .map(|name| make_shape(name, &ShapeParams::default()).map(|c| (name, c)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::invalid)?;
    std::fs::create_dir_all(&config.out)
        .with_context(|| format!("creating {}", config.out.display()))
        .map_err(Failure::Solver)?;
    for (name, curve) in curves {
        curve
            .export_csv(config.curve_samples, &config.out.join(format!("{name}.csv")))
            .map_err(Failure::solver)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Synth(o) => cmd_synth(o),
        Command::Invert(o) => cmd_invert(o),
        Command::Curves { names, overrides } => cmd_curves(names, overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
