//! Command-line front end. Exit codes: 0 success, 1 a check failed or the
//! solver stopped, 2 bad configuration or arguments.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use primeq::hydrostatic::classify_initial_data;
use primeq::solver::{picard_solve, run_simulation};

use crate::config::{RunConfig, Scheme};
use crate::error::{HarnessError, Result};
use crate::experiments::{decay_experiment, picard_experiment, PicardSetup};
use crate::io::{write_csv, write_csv_file, write_snapshot_file};
use crate::manufactured::{convergence_study, StudySpec};
use crate::suites::{convergence_checks, run_criterion, CRITERIA};
use crate::tolerances as tol;

#[derive(Debug, Parser)]
#[command(name = "primeq", version, about = "Primitive-equations solver and verification harness")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON configuration file; defaults apply to every missing key.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set grid.nz=32`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate from the configured data and write diagnostics.
    Simulate,
    /// Fixed-point iteration on the estimated existence horizon.
    Picard {
        /// Also measure the time-step order against a fine IMEX reference.
        #[arg(long)]
        study: bool,
    },
    /// Run acceptance criteria, one line each.
    Verify {
        /// Comma-separated criterion ids; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Forced decay experiment with non-resonant forcing.
    Decay,
    /// Manufactured-solution convergence studies.
    Convergence {
        #[arg(long, value_enum, default_value = "all")]
        kind: StudyKind,
    },
    /// Classify the configured initial data by boundary compatibility.
    Classify {
        #[arg(long, default_value_t = tol::CLASSIFIER_TOL)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    Horizontal,
    Vertical,
    Temporal,
    All,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Reports go to `out`, errors to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, line: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{line}")?;
    Ok(())
}

/// `Ok(false)` when the command ran but a check failed.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    let cfg = RunConfig::load(cli.global.config.as_deref(), &cli.global.overrides)?;
    match &cli.command {
        Command::Simulate => simulate(&cfg, out),
        Command::Picard { study } => picard(&cfg, *study, out),
        Command::Verify { only } => verify(&cfg, only, out),
        Command::Decay => decay(&cfg, out),
        Command::Convergence { kind } => convergence(&cfg, *kind, out),
        Command::Classify { tol } => classify(&cfg, *tol, out),
    }
}

fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let model = cfg.model()?;
    let initial = cfg.initial_state(&model)?;
    let forcing = cfg.forcing(&model)?;
    let t = &cfg.time;
    let last = match t.scheme {
        Scheme::Imex => {
            let (last, records) = run_simulation(&model, &initial, &forcing, t.t_end, t.dt, cfg.output.emit_every)?;
            match &cfg.output.csv {
                Some(path) => write_csv_file(path, &records)?,
                None => write_csv(&mut *out, &records)?,
            }
            last
        }
        Scheme::Picard => {
            let p = &t.picard;
            let (traj, report) = picard_solve(
                &model, &initial.v, &initial.tau, &initial.sigma, &forcing, t.t_end, p.intervals, p.max_iter, p.tol,
            )?;
            emit(out, format!("iterations {} converged {}", report.iterations(), report.converged))?;
            for (k, (d, r)) in report.differences.iter().zip(std::iter::once(&f64::NAN).chain(&report.ratios)).enumerate() {
                emit(out, format!("{k:>3} difference {d:.6e} ratio {r:.4}"))?;
            }
            if !report.converged {
                return Ok(false);
            }
            traj.states.last().cloned().unwrap_or(initial)
        }
    };
    if let Some(path) = &cfg.output.snapshot {
        write_snapshot_file(path, model.grid(), model.params(), &last)?;
    }
    Ok(true)
}

fn picard(cfg: &RunConfig, study: bool, out: &mut dyn Write) -> Result<bool> {
    let model = cfg.model()?;
    let p = &cfg.time.picard;
    let setup = PicardSetup {
        initial: cfg.initial_state(&model)?,
        forcing: cfg.forcing(&model)?,
        c: cfg.tstar.c,
        eps: cfg.tstar.eps,
        t_cap: cfg.time.t_end,
        intervals: p.intervals,
        max_iter: p.max_iter,
        tol: p.tol,
        halving: if study { vec![4, 8, 16] } else { Vec::new() },
        reference_steps: 512,
    };
    let e = picard_experiment(&model, &setup)?;
    let ts = &e.tstar;
    emit(out, format!("|a|_H1 {:.6e}  |b|_H1 {:.6e}", e.a_h1, e.b_h1))?;
    emit(
        out,
        format!(
            "T* velocity {:.6e} temperature {:.6e} smallness {:.6e} (unscaled {:.6e}) value {:.6e}",
            ts.velocity, ts.temperature, ts.smallness, ts.smallness_unscaled, ts.value
        ),
    )?;
    emit(out, format!("horizon {:.6e}  iterations {}  converged {}", e.horizon, e.report.iterations(), e.report.converged))?;
    for (k, r) in e.report.ratios.iter().enumerate() {
        emit(out, format!("ratio {} {r:.6e}", k + 1))?;
    }
    emit(out, format!("agreement with IMEX on the same nodes {:.3e}", e.imex_agreement))?;
    for ((m, err), o) in e.errors.iter().zip(std::iter::once(&f64::NAN).chain(&e.orders)) {
        emit(out, format!("M {m:>3} error {err:.6e} order {o:.3}"))?;
    }
    Ok(e.report.converged)
}

fn verify(cfg: &RunConfig, only: &[u8], out: &mut dyn Write) -> Result<bool> {
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(HarnessError::Config(format!("no criterion {bad}; valid ids are 1 to 10")));
    }
    let mut all = true;
    for id in ids {
        let o = run_criterion(id, cfg)?;
        all &= o.passed();
        emit(out, &o)?;
    }
    Ok(all)
}

fn decay(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let d = decay_experiment(cfg)?;
    emit(out, format!("beta_v {:.6} beta_tau {:.6} beta_f {:.6} beta_g {:.6}", d.beta_v, d.beta_tau, d.beta_f, d.beta_g))?;
    if !d.hypothesis_met {
        emit(out, "hypothesis not met: need beta_f >= beta_v and beta_g >= beta_tau")?;
    }
    for (name, r) in [("velocity", &d.velocity), ("temperature", &d.temperature), ("pressure", &d.pressure)] {
        let verdict = if r.passed() { "ok" } else { "FAIL" };
        emit(
            out,
            format!("{name:<12} rate {:.6} required {:.6} on [{:.3}, {:.3}] {verdict}", r.rate, r.required, r.window.0, r.window.1),
        )?;
    }
    Ok(d.hypothesis_met && d.rates_passed())
}

fn convergence(cfg: &RunConfig, kind: StudyKind, out: &mut dyn Write) -> Result<bool> {
    let params = cfg.params()?;
    let specs = match kind {
        StudyKind::Horizontal => vec![StudySpec::horizontal()],
        StudyKind::Vertical => vec![StudySpec::vertical()],
        StudyKind::Temporal => vec![StudySpec::temporal()],
        StudyKind::All => vec![StudySpec::horizontal(), StudySpec::vertical(), StudySpec::temporal()],
    };
    let mut all = true;
    for spec in &specs {
        let r = convergence_study(spec, &params)?;
        emit(out, format!("{} refinement", r.refinement.name()))?;
        for (n, e) in r.levels.iter().zip(&r.errors) {
            emit(out, format!("  level {n:>5} error {e:.6e}"))?;
        }
        for c in convergence_checks(&r) {
            all &= c.passed();
            emit(out, format!("  {c}"))?;
        }
    }
    Ok(all)
}

fn classify(cfg: &RunConfig, tol: f64, out: &mut dyn Write) -> Result<bool> {
    let model = cfg.model()?;
    let s = cfg.initial_state(&model)?;
    let c = classify_initial_data(model.spectral(), model.params(), &s.v, &s.tau, &s.sigma, tol)?;
    let v = &c.velocity;
    emit(out, format!("velocity    {}", v.band.describe()))?;
    emit(
        out,
        format!(
            "  divergence {:.3e} bottom value {:.3e} surface flux {:.3e}",
            v.divergence, v.bottom_value, v.surface_flux
        ),
    )?;
    for (name, r) in [("temperature", &c.temperature), ("salinity", &c.salinity)] {
        emit(out, format!("{name:<11} {}", r.band.describe()))?;
        emit(out, format!("  surface {:.3e} bottom {:.3e}", r.surface, r.bottom))?;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run(std::iter::once("primeq").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn bad_override_is_a_config_error() {
        assert_eq!(run_str(&["--set", "grid.nx=3", "classify"]).0, 2);
        assert_eq!(run_str(&["verify", "--only", "12"]).0, 2);
        assert_eq!(run_str(&["frobnicate"]).0, 2);
    }

    #[test]
    fn classify_reports_three_bands() {
        let (code, text) = run_str(&["--set", "grid.nx=8", "--set", "grid.ny=8", "--set", "grid.nz=8", "classify"]);
        assert_eq!(code, 0);
        assert!(text.contains("velocity") && text.contains("temperature") && text.contains("salinity"));
    }

    #[test]
    fn short_simulation_writes_header_and_rows() {
        let (code, text) = run_str(&[
            "--set", "grid.nx=8", "--set", "grid.ny=8", "--set", "grid.nz=4", "--set", "time.t_end=0.004", "--set", "output.emit_every=1", "simulate",
        ]);
        assert_eq!(code, 0);
        assert_eq!(text.lines().count(), 1 + 5);
    }
}
