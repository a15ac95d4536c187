//! `qtsim`: run propagators, path integrals, grid evolution and the slit
//! calculators from the command line and write CSV tables.

mod commands;
mod output;
mod params;

use std::fmt;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};

use params::{table, Values, COMMANDS};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad command line: unknown flag or missing required value.
    Usage(String),
    /// A config file or parameter value failed validation.
    Config(String),
    /// A computation rejected its own result or hit a singularity.
    Numerical(String),
    /// Reading or writing a file failed.
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<qtsim_core::Error> for CliError {
    fn from(e: qtsim_core::Error) -> Self {
        use qtsim_core::Error as E;
        match e {
            E::Numerical(_) | E::Singular(_) => CliError::Numerical(e.to_string()),
            E::InvalidParameter(_) | E::Grid(_) | E::Unsupported(_) => CliError::Config(e.to_string()),
        }
    }
}

fn cli() -> Command {
    let mut cmd = Command::new("qtsim")
        .about("Quantum mechanics with time as a coordinate: propagators, path integrals and slit-in-time predictions")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in COMMANDS {
        let mut sub = Command::new(*name)
            .about(*about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key = value file; flags override it"));
        for q in table(name) {
            let help = match q.default {
                Some(d) if !d.is_empty() => format!("{} [default: {d}]", q.help),
                Some(_) => q.help.to_string(),
                None => format!("{} [required]", q.help),
            };
            sub = sub.arg(Arg::new(q.key).long(q.key).value_name("VALUE").help(help).allow_hyphen_values(true));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(name: &str, m: &ArgMatches) -> Result<Values, CliError> {
    let file = match m.get_one::<String>("config") {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{p}: {e}")))?),
        None => None,
    };
    let flags: Vec<(&'static str, String)> =
        table(name).into_iter().filter_map(|q| m.get_one::<String>(q.key).map(|v| (q.key, v.clone()))).collect();
    Values::resolve(name, file.as_deref(), &flags)
}

fn execute(name: &str, m: &ArgMatches) -> Result<(), CliError> {
    let values = resolve(name, m)?;
    let outcome = commands::run(&values)?;
    for (path, t) in &outcome.tables {
        t.write(path)?;
    }
    let main = std::path::PathBuf::from(values.str("out"));
    outcome.record.write(&output::params_path(&main))
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("QTSIM_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        qtsim_core::par::configure_threads(n);
    }
    let mut app = cli();
    let matches = match app.try_get_matches_from_mut(std::env::args_os()) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match execute(name, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtsim {name}: {e}");
            if let CliError::Usage(_) = e {
                if let Some(s) = app.find_subcommand_mut(name) {
                    eprintln!("{}", s.render_usage());
                }
            }
            ExitCode::from(e.code())
        }
    }
}
