use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use fairpipe_core::pipeline::{self, PipelineReport, Stage, StageFailure};
use fairpipe_core::{PipelineConfig, RecordTable};

use crate::error::FileError;
use crate::io::{load_config, load_csv};
use crate::render::{canonical_value, fixed6, render_report, table2_text};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Fairness audit, reweighing and evaluation pipeline for tabular data.
#[derive(Debug, Parser)]
#[command(name = "fairpipe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML pipeline config; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's report_path.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Rerun with reweighing forced on while the verdict is reprocess, at most N times.
    #[arg(long = "max-reprocess", global = true, value_name = "N")]
    max_reprocess: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset-level disparate-impact audit of every group spec.
    Audit,
    /// Full pipeline: audit, reweigh if biased, train, evaluate, re-audit.
    Run,
    /// Full pipeline plus calibrated equalized-odds post-processing.
    Compare,
    /// Validate the config and print the effective settings.
    InspectConfig,
}

/// Runs the command line and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut config = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = cli.max_reprocess {
        config.max_reprocess = n;
    }
    if matches!(cli.command, Command::Compare) {
        config.posthoc.enabled = true;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: invalid config: {e}");
        return EXIT_VALIDATION;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.report_path));

    match cli.command {
        Command::InspectConfig => inspect(&config),
        Command::Audit => audit(&config, cli.out.as_deref()),
        Command::Run | Command::Compare => run(&config, &out_dir, matches!(cli.command, Command::Compare)),
    }
}

fn fail(e: &FileError) -> i32 {
    eprintln!("error: {e}");
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}

fn stage_code(stage: Stage) -> i32 {
    if stage == Stage::Config {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}

fn inspect(config: &PipelineConfig) -> i32 {
    match toml::to_string(config) {
        Ok(text) => {
            print!("{text}");
            eprintln!("config is valid");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: cannot render config: {e}");
            EXIT_RUNTIME
        }
    }
}

fn audit(config: &PipelineConfig, out: Option<&Path>) -> i32 {
    let table = match load_csv(&config.data_path) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let audits = match pipeline::audit_table(&table, config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return stage_code(e.stage);
        }
    };
    for a in &audits {
        eprintln!(
            "{}: DI {}, di_score {}, favorable rate priv {} / unpriv {}, biased={}",
            a.spec_name,
            fixed6(a.di),
            fixed6(a.di_score),
            fixed6(a.favorable_rate_priv),
            fixed6(a.favorable_rate_unpriv),
            a.biased
        );
    }
    let json = canonical_value(&serde_json::to_value(&audits).expect("audit reports serialize"));
    if let Some(dir) = out {
        let path = dir.join("audit.json");
        if let Err(e) = std::fs::create_dir_all(dir).and_then(|()| std::fs::write(&path, &json)) {
            return fail(&FileError::Io { path, source: e });
        }
        eprintln!("wrote {}", path.display());
    }
    print!("{json}");
    EXIT_OK
}

fn load_failure(config: &PipelineConfig, e: &FileError) -> PipelineReport {
    let mut report = PipelineReport::new(config);
    report.decision_log.push(format!("error at stage load: {e}"));
    report.error = Some(StageFailure { stage: Stage::Load, message: e.to_string() });
    report
}

fn run(config: &PipelineConfig, out_dir: &Path, compare: bool) -> i32 {
    let (report, models) = match load_csv(&config.data_path) {
        Ok(table) => run_table(&table, config),
        Err(e) => {
            eprintln!("error: {e}");
            (load_failure(config, &e), Vec::new())
        }
    };
    for line in &report.decision_log {
        eprintln!("  {line}");
    }
    let written = match render_report(&report, &models, out_dir) {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    eprint!("\n{}", table2_text(&report));
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    if let Some(err) = &report.error {
        eprintln!("error: stage `{}`: {}", err.stage, err.message);
        return stage_code(err.stage);
    }
    if compare {
        match crate::render::figure2_csv(&report) {
            Some(csv) => print!("{csv}"),
            None => {
                eprintln!("error: post-processing produced no comparison");
                return EXIT_RUNTIME;
            }
        }
    }
    EXIT_OK
}

fn run_table(table: &RecordTable, config: &PipelineConfig) -> (PipelineReport, Vec<pipeline::TrainedModel>) {
    let out = pipeline::run(table, config);
    (out.report, out.models)
}
