//! `coex` — scenario runner for the coexistence KPI toolkit.
//!
//! Subcommands:
//! - `run`: evaluate KPIs across a sweep (analytic, Monte-Carlo or both) and
//!   write a CSV or JSON table.
//! - `degrade`: compare two sweep tables and report per-point percentage
//!   degradation with the worst-case rows.
//! - `emit-scenario`: write the built-in reference scenario as a scenario
//!   file to edit from.
//!
//! Exit codes: 0 on success, 1 for input errors (flags, files, scenario
//! contents), 2 when a numerical method fails on valid input.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coex_core::montecarlo::{OverlapWeighting, SimConfig};
use coex_core::profiles::reference_scenario;

use coex_cli::error::{CliError, CliResult};
use coex_cli::runner::{evaluate, Mode, RunRequest};
use coex_cli::schema::{load_scenario, scenario_to_json};
use coex_cli::sweep::{MrcSpec, SweepSpec, SweepVar};
use coex_cli::degrade;
use coex_cli::table::{parse_csv, rows_to_csv, rows_to_json, RunMeta};

#[derive(Parser)]
#[command(
    name = "coex",
    version,
    about = "Grant-free IoT coexistence KPIs: analytic closed forms and Monte-Carlo simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate KPIs across a sweep and write a table.
    Run(RunArgs),
    /// Percentage degradation of one table against a baseline table.
    Degrade(DegradeArgs),
    /// Write the built-in reference scenario as a scenario file.
    EmitScenario(EmitScenarioArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON). Omit to use the built-in reference scenario.
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Sweep as VAR:MIN:MAX:STEPS[:log|:linear]; VAR is distance,
    /// device_density, sinr_threshold (dB) or ap_count.
    #[arg(long)]
    sweep: String,

    /// Which engine fills the table.
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,

    /// Monte-Carlo trials per sweep point [default: 100000].
    #[arg(long)]
    trials: Option<u64>,

    /// Master random seed; identical seeds give byte-identical tables.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Joint reception geometry "d1,d2,d3" or "d1,d2,d3;p1,p2,p3"
    /// (AP distances in metres; optional per-AP availabilities).
    #[arg(long)]
    mrc: Option<String>,

    /// Serving-AP distance (m) when the sweep variable is not distance.
    #[arg(long, default_value_t = 100.0)]
    distance: f64,

    /// Index of the reference class inside the scenario.
    #[arg(long, default_value_t = 0)]
    class: usize,

    /// Output path; omit to print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,

    /// Run Monte-Carlo trials in antithetic pairs (variance reduction).
    #[arg(long)]
    antithetic: bool,

    /// Freeze interferer positions across a session's retransmissions.
    #[arg(long)]
    frozen_topology: bool,

    /// Weight interferers by their sampled per-snapshot spectral overlap
    /// instead of the expected overlap ratio the closed forms use.
    #[arg(long)]
    sampled_overlap: bool,

    /// Interferer region radius (m) [default: max(1000, 10*distance)].
    #[arg(long)]
    region_radius: Option<f64>,
}

#[derive(Args)]
struct DegradeArgs {
    /// Sweep table of the deployment under study (e.g. with interferers).
    table: PathBuf,

    /// Baseline sweep table to compare against (e.g. single technology).
    #[arg(long)]
    compare: PathBuf,

    /// Output path; omit to print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EmitScenarioArgs {
    /// Output path; omit to print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|()| lock.flush())
                .map_err(CliError::from)
        }
    }
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let spec: SweepSpec = args.sweep.parse().map_err(CliError::Input)?;
    let mrc: Option<MrcSpec> = args
        .mrc
        .as_deref()
        .map(|t| t.parse().map_err(CliError::Input))
        .transpose()?;
    let (scenario, scenario_label) = match &args.scenario {
        Some(path) => (load_scenario(path)?, path.display().to_string()),
        None => (reference_scenario(), "reference (built-in)".to_string()),
    };
    if args.mode == Mode::Analytic && args.trials.is_some() {
        eprintln!("warning: trials ignored (mode=analytic)");
    }
    let sim = SimConfig {
        trials: args.trials.unwrap_or(100_000),
        seed: args.seed,
        region_radius: args.region_radius,
        antithetic: args.antithetic,
        frozen_topology: args.frozen_topology,
        overlap_weighting: if args.sampled_overlap {
            OverlapWeighting::Sampled
        } else {
            OverlapWeighting::Expected
        },
    };
    let request = RunRequest {
        scenario,
        class_index: args.class,
        spec: spec.clone(),
        mode: args.mode,
        sim,
        mrc: mrc.clone(),
        base_distance: args.distance,
    };
    let rows = evaluate(&request)?;

    let mut meta = RunMeta::new("coex sweep");
    meta.push("seed", args.seed);
    meta.push("trials", request.sim.trials);
    meta.push("mode", args.mode.name());
    meta.push("scenario", &scenario_label);
    meta.push("sweep", &spec);
    meta.push("class", args.class);
    if spec.var != SweepVar::Distance {
        meta.push("distance_m", args.distance);
    }
    if let Some(mrc) = &mrc {
        meta.push("mrc", render_mrc(mrc));
    }
    if args.antithetic {
        meta.push("antithetic", "true");
    }
    if args.frozen_topology {
        meta.push("frozen_topology", "true");
    }
    if args.sampled_overlap {
        meta.push("overlap_weighting", "sampled");
    }
    if let Some(r) = args.region_radius {
        meta.push("region_radius_m", r);
    }
    meta.push("mc_ci", "one standard error of p_sc_mc");

    let text = if args.json {
        rows_to_json(&meta, &rows)
    } else {
        rows_to_csv(&meta, &rows, mrc.is_some())
    };
    write_output(&args.out, &text)
}

fn render_mrc(mrc: &MrcSpec) -> String {
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| coex_cli::table::fmt_float(*x))
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("{};{}", join(&mrc.distances), join(&mrc.availabilities))
}

fn cmd_degrade(args: DegradeArgs) -> CliResult<()> {
    let read = |path: &PathBuf| -> CliResult<String> {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
    };
    let baseline = parse_csv(&read(&args.compare)?)?;
    let multi = parse_csv(&read(&args.table)?)?;
    let report = degrade::degradation_report(&baseline, &multi)?;

    let mut meta = RunMeta::new("coex degradation report");
    meta.push("baseline", args.compare.display());
    meta.push("table", args.table.display());
    meta.push("definition", "100*(1 - table/baseline) percent, per sweep point");

    let text = if args.json {
        report.to_json(&meta)
    } else {
        report.to_csv(&meta)
    };
    write_output(&args.out, &text)
}

fn cmd_emit_scenario(args: EmitScenarioArgs) -> CliResult<()> {
    write_output(&args.out, &scenario_to_json(&reference_scenario()))
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Degrade(args) => cmd_degrade(args),
        Command::EmitScenario(args) => cmd_emit_scenario(args),
    }
}

fn main() -> ExitCode {
    // Keep exit-code semantics: clap's default exit code for usage errors
    // collides with the tool's "numerical failure" code.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
