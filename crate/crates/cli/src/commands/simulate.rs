//! `vardyn simulate`: export one model trajectory using a named simulator
//! from the registry.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use vardyn_core::dynamics::{ContinuousParams, DiscreteParams};
use vardyn_core::simulate::{by_name, SimRequest};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, IntoCliResult};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulator to run: discrete, continuous, or phase.
    #[arg(long, default_value = "continuous")]
    pub mode: String,
    /// Horizon in years (sampled yearly from t = 0).
    #[arg(long, default_value_t = 250.0)]
    pub t_max: f64,
    /// Attention amplitude (continuous/phase).
    #[arg(long, default_value_t = 0.027)]
    pub a: f64,
    /// Relaxation timescale in years (continuous/phase).
    #[arg(long, default_value_t = 43.0)]
    pub tau: f64,
    /// Initial -se fraction.
    #[arg(long, default_value_t = 0.2)]
    pub s0: f64,
    /// Intrinsic -ra bias (discrete).
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Enforcement-following fraction (discrete).
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Enforcement target for -ra (discrete).
    #[arg(long, default_value_t = 0.5)]
    pub e_r: f64,
    /// Enforcement target for -se (discrete).
    #[arg(long, default_value_t = 0.5)]
    pub e_s: f64,
    /// Initial -ra fraction (discrete).
    #[arg(long, default_value_t = 0.8)]
    pub r0: f64,
    /// Output CSV path (default: <output_dir>/trajectory_<mode>.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cfg: &RunConfig, args: &SimulateArgs, svg: bool) -> CliResult<()> {
    let simulator = by_name(&args.mode).or_usage()?;
    let request = SimRequest {
        t_max: args.t_max,
        continuous: ContinuousParams {
            a: args.a,
            tau: args.tau,
            s0: args.s0,
        },
        discrete: DiscreteParams {
            c: args.c,
            gamma: args.gamma,
            e_r: args.e_r,
            e_s: args.e_s,
        },
        r0: args.r0,
    };
    let trajectory = simulator.run(&request).or_usage()?;

    let out_path = args
        .out
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join(format!("trajectory_{}.csv", args.mode)));
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            super::ensure_output_dir(parent)?;
        }
    }
    let mut buf = Vec::new();
    trajectory
        .write_csv(&mut buf)
        .map_err(|e| CliError::data(anyhow!("cannot serialize trajectory: {e}")))?;
    super::write_file(&out_path, &buf)?;

    if svg {
        let points: Vec<(f64, f64)> = trajectory.rows.iter().map(|r| (r[0], r[1])).collect();
        let plot = crate::svg::line_plot(
            &points,
            "t (years)",
            "s",
            &format!("{} trajectory", simulator.name()),
        );
        let svg_path = out_path.with_extension("svg");
        super::write_file(&svg_path, plot.as_bytes())?;
        println!("wrote {}", svg_path.display());
    }

    println!(
        "{} simulator: {} rows, columns {}",
        simulator.name(),
        trajectory.rows.len(),
        trajectory.columns.join(",")
    );
    println!("wrote {}", out_path.display());
    Ok(())
}
