//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::costing::{cost_report, trash_report};
use crate::io::{
    import_external_csv, load_hardware_profiles, load_model, load_study_config, load_trials, model_to_json,
    save_model, write_report, ColumnMap, Report, TrialLogWriter,
};
use crate::lab::{Clock, DatasetSpec, SimulatedClock};
use crate::optimizer::{run_study, StudyConfig};
use crate::selection::{calibration_metrics, compare_families, information_criteria, DEFAULT_SPLIT_FRACTION};
use crate::survival::{build_survival_dataset, fit_aft, Family, FitOptions};
use crate::types::{HardwareProfile, TrialRecord};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "advsurv", version, about = "Survival analysis of adversarial robustness")]
pub struct Cli {
    /// Seed for the study, or for the fit/test split of `aft compare`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file. Reports and models go to standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Study configuration (TOML) for `study run`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Timing source for `study run`; overrides the configuration.
    #[arg(long, global = true, value_enum)]
    pub clock: Option<ClockArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClockArg {
    Wall,
    Simulated,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run hyperparameter studies.
    Study {
        #[command(subcommand)]
        command: StudyCommand,
    },
    /// Manage trial logs.
    Trials {
        #[command(subcommand)]
        command: TrialsCommand,
    },
    /// Fit and compare AFT models.
    Aft {
        #[command(subcommand)]
        command: AftCommand,
    },
    /// Write CSV reports.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum StudyCommand {
    /// Run a study and write a new trial log to --out.
    ///
    /// Without --config the study uses 3-class, 2-dimensional blobs with
    /// 1000 samples generated from --seed.
    Run {
        /// Number of trials; overrides the configuration.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TrialsCommand {
    /// Import trials from a CSV file and append them to the log at --out.
    ///
    /// Required columns: random_state, learning_rate, batch_size, epochs,
    /// epsilon, n_train, n_test, n_attack, t_train_total, t_predict_total,
    /// t_attack_total, acc_benign, acc_adv. Optional: trial_id, dataset_tag,
    /// hardware_tag, bit_depth.
    Import {
        csv: PathBuf,
        /// Read a field from a differently named column, as field=column.
        #[arg(long = "map", value_name = "FIELD=COLUMN")]
        map: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AftCommand {
    /// Fit one family to every successful trial and write the model as JSON.
    Fit {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long, default_value = "weibull", value_parser = parse_family)]
        family: Family,
    },
    /// Fit all families on a seeded trial split and write the comparison.
    ///
    /// Columns: model, AIC, BIC, Conc, Test Conc, ICI, Test ICI, E50,
    /// Test E50. "Test" columns are computed on the held-out trials.
    Compare {
        #[arg(long)]
        trials: PathBuf,
        /// Fraction of trials used for fitting.
        #[arg(long, default_value_t = DEFAULT_SPLIT_FRACTION)]
        split: f64,
        /// Also save each fitted model as <DIR>/<family>.json.
        #[arg(long, value_name = "DIR")]
        save_models: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Per trial and hardware profile: per-sample times, cost in USD and
    /// energy in joules for each phase, expected survival time, TRASH score
    /// and verdict.
    Cost {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Hardware profiles (TOML, [[profile]] tables); V100, P100 and L4
        /// when omitted.
        #[arg(long)]
        profiles: Option<PathBuf>,
    },
    /// Per trial: training time per sample, expected survival time, TRASH
    /// score, threshold (1) and verdict.
    Trash {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Calibration curve: t0, predicted and calibrated failure probability.
    Calibration {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Horizon; defaults to the median observed time.
        #[arg(long)]
        t0: Option<f64>,
    },
    /// Fitted coefficients: model, covariate, standardized and raw-scale value.
    Coefficients {
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
    },
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Study {
            command: StudyCommand::Run { trials },
        } => study_run(cli, *trials),
        Command::Trials {
            command: TrialsCommand::Import { csv, map },
        } => trials_import(cli, csv, map),
        Command::Aft {
            command: AftCommand::Fit { trials, family },
        } => aft_fit(cli, trials, *family),
        Command::Aft {
            command: AftCommand::Compare {
                trials,
                split,
                save_models,
            },
        } => aft_compare(cli, trials, *split, save_models.as_deref()),
        Command::Report { command } => report(cli, command),
    }
}

fn require_out(cli: &Cli, what: &str) -> Result<PathBuf> {
    cli.out
        .clone()
        .ok_or_else(|| Error::InvalidArgument(format!("{what} needs --out <path>")))
}

fn emit(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn emit_report(cli: &Cli, report: &Report) -> Result<()> {
    let mut buf = Vec::new();
    write_report(report, &mut buf)?;
    emit(cli, &buf)
}

fn study_config(cli: &Cli, trials: Option<usize>) -> Result<StudyConfig> {
    let mut config = match &cli.config {
        Some(path) => load_study_config(path)?,
        None => StudyConfig::desk_default(DatasetSpec::blobs(cli.seed.unwrap_or(0), 3, 2, 1000)),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = trials {
        config.n_trials = n;
    }
    match cli.clock {
        Some(ClockArg::Wall) => config.clock = Clock::Monotonic,
        Some(ClockArg::Simulated) if !matches!(config.clock, Clock::Simulated(_)) => {
            config.clock = Clock::Simulated(SimulatedClock::default())
        }
        _ => {}
    }
    config.validate()?;
    Ok(config)
}

fn study_run(cli: &Cli, trials: Option<usize>) -> Result<()> {
    let config = study_config(cli, trials)?;
    let out = require_out(cli, "study run")?;
    let mut log = TrialLogWriter::create_new(&out)?;
    let mut sink = |rec: &TrialRecord| log.append(rec);
    let outcome = run_study(&config, Some(&mut sink))?;
    let failed = outcome.records.iter().filter(|r| !r.is_ok()).count();
    eprintln!(
        "{} trials ({failed} failed), {} on the Pareto front, log: {}",
        outcome.records.len(),
        outcome.front.len(),
        out.display()
    );
    Ok(())
}

fn trials_import(cli: &Cli, csv: &Path, map: &[String]) -> Result<()> {
    let columns = ColumnMap::from_pairs(map)?;
    let out = require_out(cli, "trials import")?;
    let import = import_external_csv(csv, &columns)?;
    crate::io::persist_trials(&import.records, &out)?;
    eprintln!(
        "imported {} trials, rejected {} rows, log: {}",
        import.records.len(),
        import.rejected.len(),
        out.display()
    );
    Ok(())
}

fn aft_fit(cli: &Cli, trials: &Path, family: Family) -> Result<()> {
    let records = load_trials(trials)?;
    let data = build_survival_dataset(&records)?;
    let model = fit_aft(&data, family, &FitOptions::default())?;
    let ic = information_criteria(&model, &data)?;
    eprintln!(
        "{}: log-likelihood {:.4}, AIC {:.4}, sigma {:.4}, {} rows",
        family.display_name(),
        model.log_likelihood,
        ic.aic,
        model.sigma,
        model.n_rows
    );
    emit(cli, model_to_json(&model)?.as_bytes())
}

fn aft_compare(cli: &Cli, trials: &Path, split: f64, save_models: Option<&Path>) -> Result<()> {
    let records = load_trials(trials)?;
    let table = compare_families(&records, split, cli.seed.unwrap_or(0))?;
    if table.rows.iter().all(|r| r.metrics.is_none()) {
        let reasons: Vec<String> = table
            .rows
            .iter()
            .map(|r| format!("{}: {}", r.family, r.error.as_deref().unwrap_or("failed")))
            .collect();
        return Err(Error::Numerical(format!("every family failed: {}", reasons.join("; "))));
    }
    if let Some(dir) = save_models {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for row in &table.rows {
            if let Some(model) = &row.model {
                save_model(model, dir.join(format!("{}.json", row.family)))?;
            }
        }
    }
    emit_report(cli, &Report::Compare(&table))
}

fn report(cli: &Cli, command: &ReportCommand) -> Result<()> {
    match command {
        ReportCommand::Cost {
            trials,
            model,
            profiles,
        } => {
            let profiles = match profiles {
                Some(p) => load_hardware_profiles(p)?,
                None => HardwareProfile::reference_profiles(),
            };
            let rows = cost_report(&load_trials(trials)?, &load_model(model)?, &profiles)?;
            emit_report(cli, &Report::Cost(&rows))
        }
        ReportCommand::Trash { trials, model } => {
            let rows = trash_report(&load_trials(trials)?, &load_model(model)?)?;
            emit_report(cli, &Report::Trash(&rows))
        }
        ReportCommand::Calibration { trials, model, t0 } => {
            let data = build_survival_dataset(&load_trials(trials)?)?;
            let cal = calibration_metrics(&load_model(model)?, &data, &data, *t0)?;
            eprintln!("t0 {}: ICI {:.4}, E50 {:.4}", cal.t0, cal.ici, cal.e50);
            emit_report(cli, &Report::CalibrationCurve(&cal))
        }
        ReportCommand::Coefficients { models } => {
            let models = models.iter().map(load_model).collect::<Result<Vec<_>>>()?;
            emit_report(cli, &Report::Coefficients(&models))
        }
    }
}
