use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use evim_core::constraints::evaluate_constraints;
use evim_core::optimizer::{optimize, write_trace, DesignProblem};
use evim_core::performance::MotorModel;
use evim_core::spec::{DesignVector, SpecDocument, VARIABLE_NAMES};
use evim_core::study::{
    emit_design_table, run_study, write_study, StudyConfig, StudyReport, TableFormat,
};
use evim_core::EvimError;

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "evim",
    version,
    about = "Induction traction motor evaluation and design optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one design and print its performance report as JSON.
    Evaluate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        design: PathBuf,
    },
    /// Optimize one motor for efficiency under the constraint set.
    Optimize {
        #[arg(long)]
        spec: PathBuf,
        /// Write every accepted search move to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the scenario grid and write tables to an output directory.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also sweep rated speed for the trend curves.
        #[arg(long)]
        curves: bool,
    },
    /// Print the comparison table of a finished study.
    Table {
        #[arg(long)]
        study: PathBuf,
        #[arg(long, default_value = "text")]
        format: String,
    },
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<EvimError>() {
            Some(EvimError::NoFeasibleScenario) => EXIT_INFEASIBLE,
            Some(EvimError::Invalid(_) | EvimError::Json(_) | EvimError::UnknownField(_)) => {
                EXIT_INVALID
            }
            _ => EXIT_FAILURE,
        };
        Failure { code, error }
    }
}

impl From<EvimError> for Failure {
    fn from(e: EvimError) -> Self {
        anyhow::Error::new(e).into()
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    EvimError::Invalid(msg.into()).into()
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("EVIM_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            invalid(format!(
                "EVIM_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::from(anyhow::anyhow!("thread pool: {e}")))
}

fn load_spec(path: &Path) -> Result<SpecDocument, Failure> {
    let doc = SpecDocument::load(path).with_context(|| format!("reading {}", path.display()))?;
    doc.ensure_valid()?;
    Ok(doc)
}

/// Write to stdout; a closed pipe (`evim ... | head`) is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(anyhow::Error::new(e).into()),
        _ => Ok(()),
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(EvimError::from)?;
    text.push('\n');
    emit(&text)
}

fn evaluate(spec: PathBuf, design: PathBuf) -> Result<(), Failure> {
    let doc = load_spec(&spec)?;
    let text = std::fs::read_to_string(&design)
        .with_context(|| format!("reading {}", design.display()))?;
    let x: DesignVector = serde_json::from_str(&text)
        .map_err(EvimError::from)
        .with_context(|| format!("parsing {}", design.display()))?;
    for (name, v) in VARIABLE_NAMES.iter().zip(x.to_array()) {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!(
                "design variable {name} must be positive, got {v}"
            )));
        }
    }
    let constraints = doc.constraint_set()?;
    let model = MotorModel {
        spec: doc.motor,
        materials: doc.materials,
        constants: doc.constants,
    };
    match model.evaluate(&x) {
        Ok(report) => {
            let cr = evaluate_constraints(&report, &constraints)?;
            print_json(&json!({ "report": report, "constraints": cr }))
        }
        Err(inf) => {
            print_json(&json!({ "infeasible": inf }))?;
            Err(Failure {
                code: EXIT_INFEASIBLE,
                error: anyhow::anyhow!("design cannot be evaluated: {inf}"),
            })
        }
    }
}

fn optimize_cmd(spec: PathBuf, trace: Option<PathBuf>) -> Result<(), Failure> {
    let doc = load_spec(&spec)?;
    let pool = thread_pool()?;
    let problem = DesignProblem::full(
        MotorModel {
            spec: doc.motor.clone(),
            materials: doc.materials.clone(),
            constants: doc.constants.clone(),
        },
        doc.constraint_set()?,
        doc.bounds(),
    );
    let result = pool.install(|| optimize(&problem, &doc.optimizer))?;
    if let Some(path) = trace {
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_trace(BufWriter::new(file), &result, &problem)?;
    }
    let best = &result.best;
    let (report, constraints) = match problem.model.evaluate(&best.design) {
        Ok(r) => {
            let c = evaluate_constraints(&r, &problem.constraints)?;
            (Some(r), Some(c))
        }
        Err(_) => (None, None),
    };
    print_json(&json!({
        "design": best.design,
        "feasible": best.feasible,
        "efficiency": best.efficiency,
        "objective": best.objective,
        "start_fraction": best.start_fraction,
        "penalty_mu": best.penalty_mu,
        "evaluations": result.total_evaluations(),
        "report": report,
        "constraints": constraints,
    }))?;
    if best.feasible {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INFEASIBLE,
            error: anyhow::anyhow!("no feasible design found"),
        })
    }
}

fn study(config: PathBuf, out: PathBuf, curves: bool) -> Result<(), Failure> {
    let mut cfg =
        StudyConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
    cfg.curves |= curves;
    cfg.validate()?;
    let pool = thread_pool()?;
    let report = pool.install(|| run_study(&cfg))?;
    write_study(&report, &out).with_context(|| format!("writing {}", out.display()))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &report.best {
        Some(b) => emit(&format!("{}\n", b.rationale)),
        None if report.scenarios.is_empty() => Ok(()),
        None => Err(EvimError::NoFeasibleScenario.into()),
    }
}

fn table(study: PathBuf, format: &str) -> Result<(), Failure> {
    let format: TableFormat = format.parse()?;
    let path = if study.is_dir() {
        study.join("study.json")
    } else {
        study
    };
    let report = StudyReport::load(&path).with_context(|| format!("reading {}", path.display()))?;
    if report.scenarios.is_empty() {
        return Err(invalid("study has no scenarios"));
    }
    emit(&emit_design_table(&report, format)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Evaluate { spec, design } => evaluate(spec, design),
        Command::Optimize { spec, trace } => optimize_cmd(spec, trace),
        Command::Study {
            config,
            out,
            curves,
        } => study(config, out, curves),
        Command::Table { study, format } => table(study, &format),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
