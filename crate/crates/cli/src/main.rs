//! `exitmap`: run scenario files or builtin scenarios and write tables and plots.

mod commands;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exitmap::scenario::{builtin, builtin_names, planar_builtins, Scenario};
use exitmap::Tolerances;
use serde_json::{Map, Value};

use error::CliError;
use output::{emit, Format, Output};

#[derive(Parser, Debug)]
#[command(
    name = "exitmap",
    version,
    about = "First-out and first-in maps of planar flows, boundary types, realization and impacting systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the first-out map F_E and the first-in map F_R along the boundary.
    Exitmap(Common),
    /// Label every boundary sample A-1, A-2, A-3, B or C.
    Classify(Common),
    /// Run-length encoded boundary types.
    Typeseq(Common),
    /// Run the property suite and print a check matrix.
    Check(Common),
    /// Build a flow whose first-out map is a prescribed map and verify it.
    Realize {
        #[command(flatten)]
        common: Common,
        /// `neg`, `square`, `scaled_neg(mu)`, `tent(alpha)` or a JSON map declaration.
        #[arg(long, conflicts_with_all = ["scenario", "builtin"])]
        map: Option<String>,
    },
    /// Simulate the hybrid, induce or cooling sections of a scenario.
    Hybrid(Common),
    /// List builtin scenarios.
    List,
    /// Print a scenario as JSON.
    Show(Common),
    /// Print the JSON Schema of scenario files.
    Schema,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario JSON file.
    #[arg(long, value_name = "FILE", conflicts_with = "builtin")]
    scenario: Option<PathBuf>,
    /// Builtin scenario, e.g. `exmap` or `affine(-1)`; `all` for check.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Directory for output files; without it the primary table goes to stdout.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Boundary samples, overriding the scenario's grid size
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Time horizon for exits, returns and simulations
    #[arg(long, value_name = "T")]
    horizon: Option<f64>,
    /// JSON object of tolerance overrides, applied after the scenario's own.
    #[arg(long, value_name = "FILE")]
    tol_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))
}

impl Common {
    fn scenarios(&self) -> Result<Vec<Scenario>, CliError> {
        match (&self.scenario, &self.builtin) {
            (Some(path), _) => Ok(vec![Scenario::from_json(&read(path)?)?]),
            (None, Some(name)) if name == "all" => {
                let mut names = planar_builtins();
                names.extend(builtin_names().iter().filter(|n| n.starts_with("control_")).map(|n| n.to_string()));
                names.iter().map(|n| builtin(n).map_err(CliError::from)).collect()
            }
            (None, Some(name)) => Ok(vec![builtin(name)?]),
            (None, None) => Err(CliError::schema("one of --scenario FILE or --builtin NAME is required")),
        }
    }

    fn scenario(&self) -> Result<Scenario, CliError> {
        let mut v = self.scenarios()?;
        if v.len() != 1 {
            return Err(CliError::schema("`--builtin all` is only accepted by `check`"));
        }
        Ok(v.remove(0))
    }

    fn tolerance_file(&self) -> Result<Map<String, Value>, CliError> {
        let Some(path) = &self.tol_file else { return Ok(Map::new()) };
        match serde_json::from_str(&read(path)?) {
            Ok(Value::Object(m)) => Ok(m),
            Ok(_) => Err(CliError::schema(format!("{}: tolerance file must hold a JSON object", path.display()))),
            Err(e) => Err(CliError::schema(format!("{}: {e}", path.display()))),
        }
    }

    fn tolerances(&self, s: &Scenario) -> Result<Tolerances, CliError> {
        Ok(s.tolerances(&self.tolerance_file()?)?)
    }

    fn write(&self, out: &Output, s: Option<&Scenario>) -> Result<(), CliError> {
        let dir = self.out.clone().or_else(|| s.and_then(|s| s.outputs.dir.clone()).map(PathBuf::from));
        let svg = self.svg || s.is_some_and(|s| s.outputs.svg);
        emit(out, dir.as_deref(), self.format, svg)
    }

    fn check_samples(&self) -> Result<(), CliError> {
        match self.samples {
            Some(n) if n < 2 => Err(CliError::schema(format!("--samples must be at least 2, got {n}"))),
            _ => match self.horizon {
                Some(h) if h.is_nan() || h <= 0.0 => {
                    Err(CliError::schema(format!("--horizon must be positive, got {h}")))
                }
                _ => Ok(()),
            },
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("EXITMAP_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::schema(format!("EXITMAP_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::computation(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let single = |c: &Common, f: fn(&Scenario, &Common, &Tolerances) -> Result<Output, CliError>| {
        c.check_samples()?;
        let s = c.scenario()?;
        let cfg = c.tolerances(&s)?;
        let out = f(&s, c, &cfg)?;
        c.write(&out, Some(&s))?;
        Ok(out.exit_code)
    };
    match cli.command {
        Command::Exitmap(c) => single(&c, commands::exitmap),
        Command::Classify(c) => single(&c, commands::classify),
        Command::Typeseq(c) => single(&c, commands::typeseq),
        Command::Hybrid(c) => single(&c, commands::hybrid),
        Command::Check(c) => {
            c.check_samples()?;
            let scenarios = c.scenarios()?;
            let extra = c.tolerance_file()?;
            let out = commands::check(&scenarios, &c, &extra)?;
            c.write(&out, (scenarios.len() == 1).then(|| &scenarios[0]))?;
            Ok(out.exit_code)
        }
        Command::Realize { common: c, map } => {
            c.check_samples()?;
            let out = match map {
                Some(m) => {
                    let decl = commands::parse_map(&m)?;
                    let cfg: Tolerances = serde_json::from_value(Value::Object(c.tolerance_file()?))
                        .map_err(|e| CliError::schema(format!("tolerances: {e}")))?;
                    commands::realize(&decl, &commands::map_name(&m, &decl), &c, &cfg)?
                }
                None => {
                    let s = c.scenario()?;
                    let cfg = c.tolerances(&s)?;
                    let decl = s.realize.clone().ok_or(exitmap::scenario::ScenarioError::Missing {
                        scenario: s.name.clone(),
                        what: "realize section",
                    })?;
                    commands::realize(&decl, &s.name, &c, &cfg)?
                }
            };
            c.write(&out, None)?;
            Ok(out.exit_code)
        }
        Command::List => {
            for n in builtin_names() {
                let s = builtin(n.split('(').next().unwrap_or(n))?;
                println!("{n:24} {}", s.description.unwrap_or_default());
            }
            Ok(0)
        }
        Command::Show(c) => {
            for s in c.scenarios()? {
                println!("{}", s.to_json());
            }
            Ok(0)
        }
        Command::Schema => {
            println!(
                "{}",
                serde_json::to_string_pretty(&exitmap::scenario::scenario_schema()).expect("schema serializes")
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::schema(e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.code as u8)
        }
    }
}
