//! Command-line front end: `verify` drives the seeded identity suites,
//! `run` integrates a configured system, `analyze` evaluates stored
//! snapshots. Exit codes: 0 success, 1 failure (identity violation,
//! blow-up, step limit, or any runtime error), 2 usage.

mod config;
mod report;
mod snapshot;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hallmhd::diag::{accumulate, sample, CriterionQuantity, CriterionSpec, DEFAULT_SOBOLEV_ORDER};
use hallmhd::hall::{aux_fields, decompose_hall_2d, decompose_hall_3d, grouped_bounds_witness_3d};
use hallmhd::stepper::{run as run_trajectory, RunStatus};
use hallmhd::verify::{run_suite, Suite};
use hallmhd::{curl, State};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "hallmhd", version, about = "Pseudo-spectral Hall-MHD solver and identity verifier")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Identities2d,
    Identities3d,
    Divcurl,
    Residuals,
    All,
}

impl SuiteArg {
    fn to_suite(self) -> Suite {
        match self {
            SuiteArg::Identities2d => Suite::Identities2d,
            SuiteArg::Identities3d => Suite::Identities3d,
            SuiteArg::Divcurl => Suite::DivCurl,
            SuiteArg::Residuals => Suite::Residuals,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeWhat {
    Hall2d,
    Hall3d,
    Aux,
    Sample,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a seeded identity-verification suite and emit a CSV report
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Grid size (power of two); per-suite default when omitted
        #[arg(long)]
        n: Option<usize>,
        /// Hall parameter used by the decompositions
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a configured system; writes a time-series CSV and a
    /// final snapshot into the configured output directory
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// One-shot analysis of a stored snapshot
    Analyze {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_enum)]
        what: AnalyzeWhat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Verify {
            suite,
            trials,
            seed,
            n,
            epsilon,
            out,
        } => cmd_verify(suite.to_suite(), trials, seed, n, epsilon, out),
        Cmd::Run { config, out_dir } => cmd_run(&config, out_dir),
        Cmd::Analyze {
            snapshot,
            what,
            out,
        } => cmd_analyze(&snapshot, what, out),
    }
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(
    suite: Suite,
    trials: u64,
    seed: u64,
    n: Option<usize>,
    epsilon: f64,
    out: Option<PathBuf>,
) -> Result<i32> {
    let rows = run_suite(suite, trials, seed, n, epsilon)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    let csv = report::verify_csv(&rows);
    emit(&csv, out)?;
    if failed.is_empty() {
        eprintln!("verify {}: {} rows, all pass", suite.tag(), rows.len());
        Ok(0)
    } else {
        eprintln!(
            "verify {}: {} of {} rows FAILED",
            suite.tag(),
            failed.len(),
            rows.len()
        );
        for r in failed.iter().take(10) {
            eprintln!(
                "  {} seed {}: value {:.3e}, normalizer {:.3e}, tolerance {:.0e}",
                r.identity, r.seed, r.value, r.normalizer, r.tolerance
            );
        }
        Ok(1)
    }
}

fn cmd_run(config_path: &std::path::Path, out_dir: Option<PathBuf>) -> Result<i32> {
    // everything is validated (including the initial state) before any
    // output is created, so a bad config leaves no partial artifacts
    let mut cfg = config::parse(config_path)?;
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    let initial = config::build_initial(&cfg)?;

    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating output directory {}", cfg.out_dir.display()))?;
    let ts_path = cfg.out_dir.join("timeseries.csv");
    let snap_path = cfg.out_dir.join("final.snap");

    let mut ts = report::timeseries_header(&cfg.spec, &cfg.criteria);
    let mut rec_prev: Option<hallmhd::diag::DiagnosticsRecord> = None;
    let mut sample_err: Option<hallmhd::Error> = None;
    let spec = cfg.spec;
    let criteria = cfg.criteria.clone();
    let cadence = cfg.cadence;

    let summary = run_trajectory(initial, &spec, &cfg.stepper, |state, info| {
        if sample_err.is_some() {
            return;
        }
        match sample(state, &spec, &criteria, DEFAULT_SOBOLEV_ORDER) {
            Ok(cur) => {
                let next = match &rec_prev {
                    Some(prev) => match accumulate(prev, &cur) {
                        Ok(acc) => acc.with_dissipation_integral(
                            info.dissipation_integral,
                            prev.initial_energy,
                        ),
                        Err(e) => {
                            sample_err = Some(e);
                            return;
                        }
                    },
                    None => cur,
                };
                if info.step % cadence == 0 {
                    ts.push_str(&report::timeseries_row(
                        info.step,
                        info.dt,
                        info.div_defect,
                        &next,
                    ));
                }
                rec_prev = Some(next);
            }
            Err(e) => sample_err = Some(e),
        }
    })?;
    if let Some(e) = sample_err {
        return Err(anyhow!(e).context("diagnostics sampling failed"));
    }

    std::fs::write(&ts_path, ts).with_context(|| format!("writing {}", ts_path.display()))?;
    snapshot::write(&snap_path, &summary.final_state, &spec)?;

    println!(
        "status {} after {} steps to t = {}; energy defect {:.3e}; max divergence defect {:.3e}; sup_t(|grad u|^2 + |grad b|^2) = {:.6e}{}",
        summary.status.tag(),
        summary.steps,
        report::fmt(summary.final_state.t),
        summary.energy_defect,
        summary.max_div_defect,
        summary.sup_h1_sq,
        if summary.cfl_warnings > 0 {
            format!("; {} CFL warnings", summary.cfl_warnings)
        } else {
            String::new()
        }
    );
    Ok(match summary.status {
        RunStatus::Completed => 0,
        RunStatus::BlowupDetected | RunStatus::StepLimit => 1,
    })
}

fn cmd_analyze(
    snapshot_path: &std::path::Path,
    what: AnalyzeWhat,
    out: Option<PathBuf>,
) -> Result<i32> {
    let snap = snapshot::read(snapshot_path)?;
    let state = snap.state;
    let spec = snap.spec;
    let grid = state.grid().clone();
    let text = match what {
        AnalyzeWhat::Hall2d | AnalyzeWhat::Hall3d => {
            // the decompositions demand alias-free cubic quadrature, so the
            // stored field is restricted to the widest admissible band
            let band = grid.cubic_band_limit();
            let b = state.b.truncate(band);
            match what {
                AnalyzeWhat::Hall2d => {
                    if grid.dim() != 2 {
                        bail!("hall2d needs a 2-D snapshot, this one is {}-D", grid.dim());
                    }
                    report::hall2d_csv(&decompose_hall_2d(&b, spec.epsilon)?)
                }
                _ => {
                    if grid.dim() != 3 {
                        bail!("hall3d needs a 3-D snapshot, this one is {}-D", grid.dim());
                    }
                    let d = decompose_hall_3d(&b, spec.epsilon)?;
                    let g = grouped_bounds_witness_3d(&b)?;
                    report::hall3d_csv(&d, &g)
                }
            }
        }
        AnalyzeWhat::Aux => {
            let aux = aux_fields(&state);
            let j3 = curl(&state.b).component(2).clone();
            let recon = aux
                .z2
                .component(2)
                .sub(curl(&aux.omega).component(2));
            let defect = j3.sub(&recon).l2_norm();
            report::aux_csv(&aux, defect)
        }
        AnalyzeWhat::Sample => {
            let criteria = default_criteria(&state)?;
            let rec = sample(&state, &spec, &criteria, DEFAULT_SOBOLEV_ORDER)?;
            report::sample_csv(&rec, &criteria)
        }
    };
    emit(&text, out)?;
    Ok(0)
}

fn default_criteria(_state: &State) -> Result<Vec<CriterionSpec>> {
    Ok(vec![
        CriterionSpec::new(CriterionQuantity::GradB3, 4.0, None)?,
        CriterionSpec::new(CriterionQuantity::J3, 4.0, None)?,
    ])
}
