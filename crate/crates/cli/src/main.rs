use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use thiserror::Error;

use cavity_thermo::regularize::{g_curve, solve_cutoffs_counted};
use cavity_thermo::CutoffConstants;

mod config;
mod parallel;
mod suites;
mod sweep;

use config::{ConfigError, RunConfig, KEYS, THREADS_ENV};
use suites::Which;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cutoff solver failed: {0}")]
    Solver(cavity_thermo::Error),
    #[error(transparent)]
    Compute(#[from] cavity_thermo::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Compute(_) | CliError::Write { .. } => 1,
        }
    }
}

const EXIT_FLAGGED: u8 = 4;
const EXIT_HARD_FAILURE: u8 = 5;

fn run_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .value_parser(clap::value_parser!(PathBuf))
            .help("key = value configuration file"),
    );
    KEYS.iter().fold(cmd, |cmd, &(key, default, help)| {
        cmd.arg(Arg::new(key).long(key).value_name("VALUE").help(format!("{help} [default: {default}]")))
    })
}

fn cli() -> Command {
    Command::new("cavity-thermo")
        .about("Regularized thermodynamics of the electromagnetic field in a rectangular cavity")
        .subcommand_required(true)
        .subcommand(
            Command::new("cutoffs")
                .about("Solve for the infrared cutoffs v_V and v_E")
                .arg(
                    Arg::new("tolerance")
                        .long("tolerance")
                        .value_parser(clap::value_parser!(f64))
                        .default_value("1e-12"),
                )
                .arg(Arg::new("figure").long("figure").action(ArgAction::SetTrue).help("emit v0,G samples as CSV"))
                .arg(
                    Arg::new("samples")
                        .long("samples")
                        .value_parser(clap::value_parser!(usize))
                        .default_value("400")
                        .help("rows of the --figure CSV on [0.05, 6]"),
                ),
        )
        .subcommand(run_args(Command::new("sweep").about("Evaluate every potential on a ξ grid")))
        .subcommand(run_args(
            Command::new("oracle").about("Run an oracle or diagnostic suite").arg(
                Arg::new("which")
                    .required(true)
                    .value_parser(clap::builder::EnumValueParser::<Which>::new()),
            ),
        ))
}

fn load_config(m: &ArgMatches) -> Result<RunConfig, ConfigError> {
    let file = match m.get_one::<PathBuf>("config") {
        Some(p) => config::read_file(p)?,
        None => BTreeMap::new(),
    };
    let flags: BTreeMap<String, String> = KEYS
        .iter()
        .filter_map(|(k, _, _)| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect();
    config::resolve(&file, &flags, std::env::var(THREADS_ENV).ok())
}

fn emit(path: &str, text: &str) -> Result<(), CliError> {
    let fail = |source| CliError::Write { path: path.to_string(), source };
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes()).map_err(fail)?;
        out.flush().map_err(fail)
    } else {
        std::fs::write(path, text).map_err(fail)
    }
}

fn solve(tolerance: f64) -> Result<(CutoffConstants, usize), CliError> {
    let s = solve_cutoffs_counted(tolerance).map_err(CliError::Solver)?;
    Ok((s.cutoffs, s.g_evaluations))
}

fn cmd_cutoffs(m: &ArgMatches) -> Result<u8, CliError> {
    let tol = *m.get_one::<f64>("tolerance").expect("defaulted");
    let (c, evals) = solve(tol)?;
    let mut out = String::new();
    if m.get_flag("figure") {
        let n = (*m.get_one::<usize>("samples").expect("defaulted")).max(2);
        out.push_str("v0,G\n");
        for (v, g) in g_curve(0.05, 6.0, n).map_err(CliError::Solver)? {
            let _ = writeln!(out, "{v:.16e},{g:.16e}");
        }
    } else {
        let _ = writeln!(out, "v_V={:.9}", c.v_v);
        let _ = writeln!(out, "v_E={:.10}", c.v_e);
        let _ = writeln!(out, "g_evaluations={evals}");
    }
    emit("-", &out)?;
    Ok(0)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_sweep(m: &ArgMatches) -> Result<u8, CliError> {
    let cfg = load_config(m)?;
    let (cutoffs, _) = solve(cfg.cutoff_tolerance)?;
    let out = sweep::run(&cfg, cutoffs)?;
    emit(&cfg.csv, &out.csv)?;
    emit(&cfg.json, &json_text(&out.summary))?;
    if out.flagged > 0 {
        eprintln!("{} row(s) flagged", out.flagged);
        return Ok(EXIT_FLAGGED);
    }
    Ok(0)
}

fn cmd_oracle(m: &ArgMatches) -> Result<u8, CliError> {
    let which = *m.get_one::<Which>("which").expect("required");
    let cfg = load_config(m)?;
    let (cutoffs, _) = solve(cfg.cutoff_tolerance)?;
    let (doc, pass) = suites::run(which, &cfg, cutoffs)?;
    emit(&cfg.json, &json_text(&doc))?;
    if pass == Some(false) {
        eprintln!("{} suite failed", which.name());
        return Ok(EXIT_HARD_FAILURE);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let result = match matches.subcommand() {
        Some(("cutoffs", m)) => cmd_cutoffs(m),
        Some(("sweep", m)) => cmd_sweep(m),
        Some(("oracle", m)) => cmd_oracle(m),
        _ => unreachable!("subcommand required"),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
