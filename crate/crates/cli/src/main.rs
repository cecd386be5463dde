use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lpg_core::export::{summary_table, to_json, write_csv_file};
use lpg_core::machine::{BearingFriction, LoweringFormula};
use lpg_core::plan::{Severity, TaskKind};
use lpg_core::scaling::{scale_machine, ScalingReference};
use lpg_core::{
    aggregate, resolve_timeline, validate_plan, Error, LoadProfile, MachineKind, MachineParams,
    PlanDocument,
};

mod plot;

/// Process exit codes. Clap reports usage errors with 2.
mod exit {
    pub const OTHER: u8 = 1;
    pub const FILE_NOT_FOUND: u8 = 3;
    pub const PARSE: u8 = 4;
    pub const VALIDATION: u8 = 5;
    pub const SIMULATION: u8 = 6;
}

#[derive(Debug, Parser)]
#[command(
    name = "lpg",
    version,
    about = "Load profile generator for non-road mobile machinery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one or more plans and write the load profile.
    Run(RunArgs),
    /// Check a plan against a machine without simulating it.
    Validate(ValidateArgs),
    /// Derive a machine file for another vehicle mass.
    Scale(ScaleArgs),
    /// List the task types of the plan language.
    ListTasks {
        /// Only tasks a machine of this kind supports.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LoweringArg {
    Difference,
    Annulus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    MaterialHandler,
    ForestForwarder,
}

impl From<KindArg> for MachineKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::MaterialHandler => MachineKind::MaterialHandler,
            KindArg::ForestForwarder => MachineKind::ForestForwarder,
        }
    }
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Machine parameter file.
    #[arg(long)]
    machine: PathBuf,
    /// Plan file; repeat the flag to run several plans in parallel.
    #[arg(long, required = true)]
    plan: Vec<PathBuf>,
    /// Output directory; one subdirectory per plan when several are given.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Time step override, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Output formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
    /// Also write SVG plots of power and joint motion.
    #[arg(long)]
    plot: bool,
    /// Override the machine's lowering-force formula.
    #[arg(long, value_enum)]
    lowering_formula: Option<LoweringArg>,
    /// `none`, `constant:<torque_nm>` or `coefficient:<mu>:<bearing_diameter_m>`.
    #[arg(long, value_parser = parse_friction)]
    bearing_friction: Option<BearingFriction>,
    /// Suppress the summary table.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Debug, clap::Args)]
struct ValidateArgs {
    /// Machine parameter file.
    #[arg(long)]
    machine: PathBuf,
    /// Plan file.
    #[arg(long)]
    plan: PathBuf,
    /// Time step override, s.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct ScaleArgs {
    /// Reference machine file.
    #[arg(long)]
    machine: PathBuf,
    /// Target vehicle mass, kg.
    #[arg(long, allow_negative_numbers = true)]
    mass: f64,
    /// Output machine file.
    #[arg(long)]
    out: PathBuf,
}

fn parse_friction(s: &str) -> Result<BearingFriction, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    match parts.as_slice() {
        ["none"] => Ok(BearingFriction::None),
        ["constant", t] => Ok(BearingFriction::ConstantTorque { torque_nm: num(t)? }),
        ["coefficient", mu, d] => Ok(BearingFriction::Coefficient {
            mu: num(mu)?,
            bearing_diameter_m: num(d)?,
        }),
        _ => Err(
            "expected none, constant:<torque_nm> or coefficient:<mu>:<bearing_diameter_m>".into(),
        ),
    }
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::FileNotFound(_) => exit::FILE_NOT_FOUND,
            Error::Parse { .. } | Error::Json(_) => exit::PARSE,
            Error::InvalidPlan(_)
            | Error::InvalidMachine(_)
            | Error::InvalidMotion(_)
            | Error::UnsupportedTask { .. } => exit::VALIDATION,
            Error::SingularGeometry(_) | Error::Simulation { .. } => exit::SIMULATION,
            Error::Io { .. } | Error::Csv(_) => exit::OTHER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: exit::VALIDATION,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Error::Io {
            path: path.to_owned(),
            source: e,
        }
        .into()
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(&args),
        Command::Validate(args) => validate(&args),
        Command::Scale(args) => scale(&args),
        Command::ListTasks { kind } => {
            list_tasks(kind.map(Into::into));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_machine(path: &Path, args: Option<&RunArgs>) -> CliResult<MachineParams> {
    let mut machine = MachineParams::load(path)?;
    if let Some(args) = args {
        if let Some(formula) = args.lowering_formula {
            machine.lowering_formula = match formula {
                LoweringArg::Difference => LoweringFormula::Difference,
                LoweringArg::Annulus => LoweringFormula::Annulus,
            };
        }
        if let Some(friction) = args.bearing_friction {
            machine.bearing_friction = friction;
        }
        machine.validate()?;
    }
    Ok(machine)
}

fn load_plan(path: &Path, dt: Option<f64>) -> CliResult<PlanDocument> {
    let mut plan = PlanDocument::load(path)?;
    if let Some(dt) = dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Failure::validation(format!(
                "--dt must be positive (got {dt})"
            )));
        }
        plan.dt = dt;
    }
    Ok(plan)
}

/// Rejects plans with error diagnostics; prints the rest to stderr.
fn check_plan(plan: &lpg_core::ScheduledPlan, machine: &MachineParams, label: &str) -> CliResult {
    let diagnostics = validate_plan(plan, machine);
    let mut errors = 0;
    for d in &diagnostics {
        if d.severity == Severity::Error {
            errors += 1;
        }
        if d.severity >= Severity::Warning {
            eprintln!("{label}: {d}");
        }
    }
    if errors > 0 {
        return Err(Failure::validation(format!(
            "{label}: {errors} validation error(s)"
        )));
    }
    Ok(())
}

fn simulate(machine: &MachineParams, plan_path: &Path, dt: Option<f64>) -> CliResult<LoadProfile> {
    let doc = load_plan(plan_path, dt)?;
    let scheduled = resolve_timeline(&doc)?;
    check_plan(&scheduled, machine, &plan_path.display().to_string())?;
    Ok(aggregate(&scheduled, machine)?)
}

fn write_outputs(profile: &LoadProfile, dir: &Path, args: &RunArgs) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    if args.format.contains(&Format::Csv) {
        write_csv_file(profile, &dir.join("profile.csv"))?;
    }
    if args.format.contains(&Format::Json) {
        let path = dir.join("profile.json");
        fs::write(&path, to_json(profile)?).map_err(|e| Failure::io(&path, e))?;
    }
    if args.plot {
        plot::power(profile, &dir.join("power.svg")).map_err(|message| Failure {
            code: exit::OTHER,
            message,
        })?;
        plot::joints(profile, &dir.join("joints.svg")).map_err(|message| Failure {
            code: exit::OTHER,
            message,
        })?;
    }
    Ok(())
}

fn run(args: &RunArgs) -> CliResult {
    if args.format.is_empty() {
        return Err(Failure::validation("at least one --format is required"));
    }
    let machine = load_machine(&args.machine, Some(args))?;

    // Simulate everything first so a failing plan leaves no partial output.
    let profiles: Vec<CliResult<LoadProfile>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .plan
            .iter()
            .map(|path| scope.spawn(|| simulate(&machine, path, args.dt)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let profiles = profiles.into_iter().collect::<CliResult<Vec<_>>>()?;

    let batch = args.plan.len() > 1;
    for (path, profile) in args.plan.iter().zip(&profiles) {
        let dir = if batch {
            let stem = path
                .file_stem()
                .map_or("plan".into(), |s| s.to_string_lossy().into_owned());
            args.out.join(stem)
        } else {
            args.out.clone()
        };
        write_outputs(profile, &dir, args)?;
        if !args.quiet {
            if batch {
                println!("== {}", path.display());
            }
            print!("{}", summary_table(profile));
        }
    }
    Ok(())
}

fn validate(args: &ValidateArgs) -> CliResult {
    let machine = load_machine(&args.machine, None)?;
    let doc = load_plan(&args.plan, args.dt)?;
    let scheduled = resolve_timeline(&doc)?;
    let diagnostics = validate_plan(&scheduled, &machine);
    for d in &diagnostics {
        println!("{d}");
    }
    let errors = diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    if errors > 0 {
        return Err(Failure::validation(format!("{errors} validation error(s)")));
    }
    println!(
        "ok: {} scheduled task(s), horizon {:.3} s",
        scheduled.tasks.len(),
        scheduled.horizon()
    );
    Ok(())
}

fn scale(args: &ScaleArgs) -> CliResult {
    let reference = ScalingReference::new(load_machine(&args.machine, None)?)?;
    let scaled = scale_machine(&reference, args.mass)?;
    let mut text = scaled.to_json()?;
    text.push('\n');
    fs::write(&args.out, text).map_err(|e| Failure::io(&args.out, e))?;
    println!(
        "wrote {} ({} kg from {} kg reference)",
        args.out.display(),
        args.mass,
        reference.reference_mass()
    );
    Ok(())
}

fn list_tasks(kind: Option<MachineKind>) {
    let machines = [MachineKind::MaterialHandler, MachineKind::ForestForwarder];
    println!(
        "{:<13} {:<35} {:<22} description",
        "task", "machines", "context keys"
    );
    for task in TaskKind::ALL {
        if kind.is_some_and(|k| !task.supported_by(k)) {
            continue;
        }
        let supported: Vec<String> = machines
            .iter()
            .filter(|&&m| task.supported_by(m))
            .map(ToString::to_string)
            .collect();
        let keys = task.context_keys().join(", ");
        println!(
            "{:<13} {:<35} {:<22} {}",
            task.name(),
            supported.join(", "),
            if keys.is_empty() { "-".into() } else { keys },
            task.description()
        );
    }
}
