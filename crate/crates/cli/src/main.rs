//! Experiment driver: configuration parsing, the four subcommands and CSV
//! emission.  All numeric output carries 17 significant digits so runs are
//! reproducible bit-for-bit from the same config.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result, bail};
use clap::{Parser, Subcommand, ValueEnum};

use kswave_core::config::ExperimentConfig;
use kswave_core::diagnostics::propagation_speed;
use kswave_core::hyperbolic::{self, snapshot_filename, write_snapshot_csv};
use kswave_core::travelingwave::{
    chibar, f_appendix, fixed_point, speed_interval, write_profile_csv, write_profile_meta,
};
use kswave_core::Error;

#[derive(Parser)]
#[command(name = "kswave", version, about = "Nonlocal repulsion front laboratory")]
struct Cli {
    /// Experiment configuration (TOML); built-in defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overridden by the config's `output.directory`,
    /// falls back to $KSWAVE_OUT_DIR, then the current directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Seed for randomized test inputs; the subcommands here are
    /// deterministic and accept it only for script compatibility
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the PDE; writes trace.csv, snapshots and summary.meta
    Simulate,
    /// Construct the sharp traveling-wave profile; writes profile.csv + .meta
    Wave,
    /// Run independent simulations over a parameter list; writes sweep.csv
    Sweep {
        /// Swept parameter
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated parameter values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Print the critical repulsion threshold and tabulate f to f_table.csv
    Chibar,
}

#[derive(Debug, Copy, Clone, ValueEnum)]
enum SweepParam {
    /// Decay rate of the sigmoid initial value
    Alpha,
    /// Squared interaction range sigma^2
    Sigma2,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => {
            let (cfg, warnings) = ExperimentConfig::parse(path)
                .with_context(|| format!("loading {}", path.display()))?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            cfg
        }
        None => ExperimentConfig::default(),
    };
    let out = cfg.output_dir(cli.out.as_deref());
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    match cli.cmd {
        Cmd::Simulate => cmd_simulate(&cfg, &out),
        Cmd::Wave => cmd_wave(&cfg, &out),
        Cmd::Sweep { param, values } => cmd_sweep(&cfg, &out, param, &values, cli.workers),
        Cmd::Chibar => cmd_chibar(&out),
    }
}

fn prefixed(cfg: &ExperimentConfig, base: &str) -> String {
    format!("{}{}", cfg.output.prefix, base)
}

struct SimulationReport {
    speeds: Vec<(f64, f64)>,
    jump_final: f64,
    max_separatrix_speed: f64,
    mass_drift_rel: f64,
}

/// Run the configured simulation, write its artifacts into `out` and return
/// the headline measurements.
fn run_simulation(cfg: &ExperimentConfig, out: &Path) -> Result<SimulationReport> {
    let params = cfg.model_params()?;
    let grid = cfg.grid()?;
    let ic = cfg.initial_condition()?;
    let opts = cfg.run_options();
    let result = hyperbolic::run(grid, &ic, &params, &opts)?;

    result.trace.write_csv(&out.join(prefixed(cfg, "trace.csv")))?;
    for (u, p) in &result.snapshots {
        write_snapshot_csv(u, p, &out.join(prefixed(cfg, &snapshot_filename(u.time))))?;
    }

    let trace = &result.trace;
    let (t1, t2) = (cfg.diagnostics.t1, cfg.diagnostics.t2);
    let mut speeds = Vec::new();
    for &beta in &opts.betas {
        let speed = propagation_speed(trace, beta, t1, t2)?;
        speeds.push((beta, speed));
    }
    let jump_final = *trace.jump.last().unwrap_or(&f64::NAN);
    let mass_drift_rel = (trace.mass.last().unwrap_or(&0.0) - trace.mass[0]) / trace.mass[0];

    let jump_bound = 2.0 / (2.0 + params.chi_hat);
    let sep_bound = params.chi / (2.0 * params.sigma);
    let mut meta = String::new();
    for (beta, speed) in &speeds {
        meta += &format!("speed_beta_{beta:.4}={speed:.16e}\n");
    }
    meta += &format!("jump_final={jump_final:.16e}\n");
    meta += &format!("jump_bound={jump_bound:.16e}\n");
    meta += &format!("jump_ok={}\n", jump_final >= jump_bound - 0.05);
    meta += &format!("max_separatrix_speed={:.16e}\n", result.max_separatrix_speed);
    meta += &format!("separatrix_speed_bound={sep_bound:.16e}\n");
    meta += &format!("separatrix_speed_ok={}\n", result.max_separatrix_speed <= sep_bound + 1e-6);
    meta += &format!("mass_drift_rel={mass_drift_rel:.16e}\n");
    meta += &format!("reaction={}\n", opts.reaction);
    fs::write(out.join(prefixed(cfg, "summary.meta")), &meta)?;
    print!("{meta}");

    Ok(SimulationReport {
        speeds,
        jump_final,
        max_separatrix_speed: result.max_separatrix_speed,
        mass_drift_rel,
    })
}

fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let report = run_simulation(cfg, out)?;
    // verdicts are data; reaching this point is success
    let _ = (report.max_separatrix_speed, report.mass_drift_rel);
    Ok(())
}

fn cmd_wave(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let params = cfg.model_params()?;
    if !params.assumption3_ok {
        eprintln!(
            "warning: chi_hat = {:.4} exceeds the critical threshold {:.4}; \
             the sharp-wave construction is outside its guaranteed range",
            params.chi_hat,
            chibar()
        );
    }
    let opts = cfg.wave_options(&params)?;
    match fixed_point(&params, &opts) {
        Ok(profile) => {
            write_profile_csv(&profile, &out.join(prefixed(cfg, "profile.csv")))?;
            write_profile_meta(&profile, &params, &out.join(prefixed(cfg, "profile.meta")))?;
            let (lo, hi) = speed_interval(&params);
            println!("c={:.12}", profile.c);
            println!("U0minus={:.12}", profile.u0minus);
            println!("speed_interval=({lo:.12}, {hi:.12})");
            println!("speed_in_interval={}", profile.c > lo && profile.c < hi);
            println!("iterations={}", profile.iterations);
            println!("residual_eta={:.3e}", profile.residual_eta);
            Ok(())
        }
        Err(Error::NonConvergence { iterations, last_residual, residual_history }) => {
            let path = out.join(prefixed(cfg, "residuals.txt"));
            let mut f = fs::File::create(&path)?;
            for r in &residual_history {
                writeln!(f, "{r:.16e}")?;
            }
            bail!(
                "fixed point did not converge after {iterations} iterations \
                 (last residual {last_residual:.3e}); history written to {}",
                path.display()
            );
        }
        Err(e) => Err(e.into()),
    }
}

struct SweepRow {
    value: f64,
    speed_beta0: f64,
    jump: f64,
    c_wave: f64,
    error: Option<String>,
}

fn cmd_sweep(
    cfg: &ExperimentConfig,
    out: &Path,
    param: SweepParam,
    values: &[f64],
    workers: Option<usize>,
) -> Result<()> {
    if values.is_empty() {
        bail!("sweep needs at least one parameter value");
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().context("building worker pool")?;

    let rows: Vec<SweepRow> = pool.install(|| {
        use rayon::prelude::*;
        values
            .par_iter()
            .map(|&v| match sweep_entry(cfg, out, param, v) {
                Ok(row) => row,
                Err(e) => SweepRow {
                    value: v,
                    speed_beta0: f64::NAN,
                    jump: f64::NAN,
                    c_wave: f64::NAN,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });

    let name = match param {
        SweepParam::Alpha => "alpha",
        SweepParam::Sigma2 => "sigma2",
    };
    let mut f = fs::File::create(out.join(prefixed(cfg, "sweep.csv")))?;
    writeln!(f, "param,value,speed_beta0,jump,c_wave")?;
    for row in &rows {
        writeln!(
            f,
            "{name},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.value, row.speed_beta0, row.jump, row.c_wave
        )?;
    }

    for row in &rows {
        match &row.error {
            Some(e) => println!("{name}={}: failed: {e}", row.value),
            None => {
                print!(
                    "{name}={}: speed_beta0={:.6} jump={:.6} c_wave={:.6}",
                    row.value, row.speed_beta0, row.jump, row.c_wave
                );
                if matches!(param, SweepParam::Sigma2) {
                    let dist = (row.speed_beta0 - std::f64::consts::FRAC_1_SQRT_2).abs();
                    print!(" dist_to_porous_medium_speed={dist:.6}");
                }
                println!();
            }
        }
    }
    if rows.iter().all(|r| r.error.is_some()) {
        bail!("all sweep entries failed");
    }
    Ok(())
}

/// One sweep entry: derive a config for the parameter value, run it in its
/// own subdirectory and attach the traveling-wave speed.
fn sweep_entry(base: &ExperimentConfig, out: &Path, param: SweepParam, v: f64) -> Result<SweepRow> {
    let mut cfg = base.clone();
    let dx = 2.0 * cfg.grid.l / cfg.grid.m as f64;
    match param {
        SweepParam::Alpha => {
            if !(v > 0.0) {
                bail!("alpha must be positive, got {v}");
            }
            cfg.ic.kind = "sigmoid".into();
            cfg.ic.alpha = v;
            cfg.ic.x0 = -15.0;
            // exponential tails travel at ~1/alpha: widen the domain so the
            // front stays inside until T_final, keeping the cell size
            if cfg.grid.l < 50.0 {
                cfg.grid.l = 50.0;
                cfg.grid.m = (2.0 * cfg.grid.l / dx).round() as usize;
            }
        }
        SweepParam::Sigma2 => {
            if !(v > 0.0) {
                bail!("sigma^2 must be positive, got {v}");
            }
            let sigma = v.sqrt();
            cfg.params.sigma = sigma;
            // keep the interaction range resolved: dx <= sigma / 20
            let needed = (40.0 * cfg.grid.l / sigma).ceil() as usize;
            cfg.grid.m = cfg.grid.m.max(needed);
            // profile solver resolution follows sigma
            cfg.wave.dz = cfg.wave.dz.min(sigma / 100.0);
        }
    }

    let name = match param {
        SweepParam::Alpha => "alpha",
        SweepParam::Sigma2 => "sigma2",
    };
    let subdir = out.join(format!("sweep_{name}_{v}"));
    fs::create_dir_all(&subdir)?;
    let report = run_simulation(&cfg, &subdir)?;
    let speed_beta0 = report
        .speeds
        .iter()
        .find(|(b, _)| *b == 0.0)
        .map(|(_, s)| *s)
        .unwrap_or(f64::NAN);

    let params = cfg.model_params()?;
    let c_wave = match fixed_point(&params, &cfg.wave_options(&params)?) {
        Ok(profile) => profile.c,
        Err(e) => {
            eprintln!("warning: {name}={v}: traveling-wave solve failed: {e}");
            f64::NAN
        }
    };

    Ok(SweepRow {
        value: v,
        speed_beta0,
        jump: report.jump_final,
        c_wave,
        error: None,
    })
}

fn cmd_chibar(out: &Path) -> Result<()> {
    let cb = chibar();
    println!("chibar={cb:.12}");
    println!("f(1)={:.12}", f_appendix(1.0).map_err(anyhow::Error::from)?);
    let path = out.join("f_table.csv");
    let mut f = fs::File::create(&path)?;
    writeln!(f, "x,f")?;
    for i in 0..50 {
        let x = 0.02 + i as f64 * (1.98 - 0.02) / 49.0;
        writeln!(f, "{x:.16e},{:.16e}", f_appendix(x).map_err(anyhow::Error::from)?)?;
    }
    println!("table written to {}", path.display());
    Ok(())
}
