//! `foodchain` — experiments on the three-species food chain model:
//! equilibria, bifurcation thresholds, trajectory simulation, attractor
//! sweeps, limit cycles, Lyapunov exponents, extinction verdicts, and
//! response fitting.

mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use config::{CycleTarget, ExperimentConfig, FitConfig, SweepPolicy};
use foodchain_core::bifurcation;
use foodchain_core::dynamics::{self, IcPolicy, IntegratorConfig, Section};
use foodchain_core::equilibria;
use foodchain_core::fitting::{self, FitProblem};
use foodchain_core::model::State;
use foodchain_core::response::{ResponseKind, ResponseSpec, AXIOM_GRID};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "foodchain", version, about)]
struct Cli {
    /// Experiment configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format where a choice exists.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for parallel sweeps (fallback: FOODCHAIN_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check the response axioms and intensity assumptions on the standard grid.
    Validate,
    /// Locate and classify every equilibrium at the configured d2.
    Equilibria,
    /// Saddle-node, transcritical, and Hopf thresholds with diagnostics.
    Thresholds,
    /// Integrate one trajectory and emit it as CSV.
    Simulate,
    /// Classify the attractor over a d2 grid.
    Sweep {
        /// Also render a static SVG bifurcation diagram here.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Overlay the continued unstable cycle branch on the plot.
        #[arg(long)]
        with_cycles: bool,
    },
    /// Compute one limit cycle (interior or boundary) as JSON.
    Cycle,
    /// Largest Lyapunov exponent from the configured initial condition.
    Lyapunov,
    /// Decide extinction vs coexistence of the top predator.
    Extinction,
    /// Fit one response family to another by least squares.
    Fit {
        /// Target response as JSON, e.g. '{"kind":"holling2","p1":4.98,"p2":6.2}'.
        #[arg(long)]
        target: Option<String>,
        /// Family to fit: holling2 | ivlev.
        #[arg(long)]
        family: Option<String>,
        /// Sample window as lo:hi (default 0:1).
        #[arg(long)]
        domain: Option<String>,
        /// Number of uniform samples (default 101).
        #[arg(long)]
        samples: Option<usize>,
        /// Try 16 log-spaced starts and keep the best.
        #[arg(long)]
        multistart: bool,
    },
}

struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            msg: msg.into(),
        }
    }

    fn numeric(msg: impl Into<String>) -> Self {
        Self {
            code: 3,
            msg: msg.into(),
        }
    }
}

impl From<foodchain_core::Error> for CliError {
    fn from(e: foodchain_core::Error) -> Self {
        if e.is_input_error() {
            Self::input(e.to_string())
        } else {
            Self::numeric(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = cli.threads.or_else(|| {
        std::env::var("FOODCHAIN_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        // Ignore the error if a pool already exists (tests, repeated calls).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    // `fit` can run purely from flags; everything else needs the config file.
    if let Command::Fit {
        target: Some(_), ..
    } = &cli.command
    {
        return cmd_fit_flags(&cli);
    }

    let config = load_config(&cli)?;
    let cfg = config.integrator.unwrap_or_default();
    cfg.validate()?;

    match &cli.command {
        Command::Validate => cmd_validate(&cli, &config),
        Command::Equilibria => {
            let params = config.model.params_with_d2()?;
            let report = equilibria::all_equilibria(&params);
            write_out(&cli, &to_json(&report)?)
        }
        Command::Thresholds => {
            let params = config.model.params(0.1)?;
            let tcfg = config.thresholds.unwrap_or_default();
            let report = bifurcation::threshold_report(&params, tcfg.classify_hopf, &cfg)?;
            write_out(&cli, &to_json(&report)?)
        }
        Command::Simulate => {
            let params = config.model.params_with_d2()?;
            let ic = ic_of(&config);
            let t_end = config
                .t_end
                .ok_or_else(|| CliError::input("simulate requires t_end"))?;
            let traj = dynamics::integrate(&params, &ic, t_end, &cfg)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_out(&cli, &output::simulate_csv(&traj)),
                Format::Json => {
                    let rows: Vec<[f64; 4]> = traj
                        .times()
                        .iter()
                        .zip(traj.states())
                        .map(|(t, s)| [*t, s.x, s.y, s.z])
                        .collect();
                    write_out(&cli, &to_json(&rows)?)
                }
            }
        }
        Command::Sweep { plot, with_cycles } => cmd_sweep(&cli, &config, &cfg, plot, *with_cycles),
        Command::Cycle => cmd_cycle(&cli, &config, &cfg),
        Command::Lyapunov => {
            let params = config.model.params_with_d2()?;
            let le = dynamics::lyapunov_max(&params, &ic_of(&config), &cfg)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => write_out(&cli, &format!("{{\"lyapunov_max\":{le}}}\n")),
                Format::Csv => write_out(&cli, &format!("{}\n", output::fmt(le))),
            }
        }
        Command::Extinction => {
            let params = config.model.params_with_d2()?;
            let horizon = config.extinction.unwrap_or_default().horizon;
            let verdict = dynamics::extinction_verdict(&params, &ic_of(&config), horizon, &cfg)?;
            write_out(&cli, &to_json(&verdict)?)
        }
        Command::Fit { .. } => {
            let fc = config
                .fit
                .clone()
                .ok_or_else(|| CliError::input("fit requires a fit block or --target/--family flags"))?;
            run_fit(&cli, &fc)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::input("this command requires --config FILE"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("bad config: {e}")))
}

fn ic_of(config: &ExperimentConfig) -> State {
    config.ic.map(State::from).unwrap_or_else(config::default_ic)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::numeric(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn write_out(cli: &Cli, content: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::numeric(format!("cannot write {}: {e}", path.display())))
}

fn cmd_validate(cli: &Cli, config: &ExperimentConfig) -> Result<(), CliError> {
    let f1 = config.model.f1.validate_axioms(&AXIOM_GRID);
    let f2 = config.model.f2.validate_axioms(&AXIOM_GRID);
    let ok = f1.is_empty() && f2.is_empty();
    let report = serde_json::json!({
        "ok": ok,
        "f1_violations": f1,
        "f2_violations": f2,
    });
    write_out(cli, &to_json(&report)?)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::input("response axioms violated"))
    }
}

fn cmd_sweep(
    cli: &Cli,
    config: &ExperimentConfig,
    cfg: &IntegratorConfig,
    plot: &Option<PathBuf>,
    with_cycles: bool,
) -> Result<(), CliError> {
    let sc = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::input("sweep requires a sweep block"))?;
    let grid = sc.grid()?;
    let base = config.model.params(grid[0])?;
    let ic = ic_of(config);
    let policy = match sc.policy {
        SweepPolicy::Continuation => IcPolicy::Continuation { first: ic },
        SweepPolicy::Fixed => IcPolicy::Fixed { ic },
    };
    let points = dynamics::sweep(&base, &grid, &policy, cfg);

    if let Some(svg_path) = plot {
        let branch = if with_cycles {
            match ulc_branch_over(&base, &grid, cfg) {
                Ok(b) => Some(b),
                Err(e) => {
                    eprintln!("warning: unstable-cycle overlay skipped: {}", e.msg);
                    None
                }
            }
        } else {
            None
        };
        write_file(svg_path, &output::sweep_svg(&base, &points, branch.as_ref()))?;
    }

    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => write_out(cli, &output::sweep_csv(&points)),
        Format::Json => write_out(cli, &to_json(&points)?),
    }
}

/// Continue the subcritical-Hopf cycle down across the grid for the plot
/// overlay.
fn ulc_branch_over(
    base: &foodchain_core::ModelParams,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<dynamics::ContinuationBranch, CliError> {
    let d2_tc = bifurcation::find_transcritical(base)?;
    let (d2_sn, _) = bifurcation::find_saddle_node(base, (d2_tc, 0.999 * base.f2.asymptote()))?;
    let hopf = bifurcation::find_hopf(base, (d2_tc + 1e-6, d2_sn - 1e-8))?;
    let h1 = *hopf
        .last()
        .ok_or_else(|| CliError::numeric("no Hopf point found for the cycle overlay"))?;
    let d2_seed = h1 - 5e-4;
    let params = base.with_d2(d2_seed)?;
    let upper = equilibria::interior_equilibria(&params)
        .into_iter()
        .find(|p| p.kind == equilibria::EquilibriumKind::InteriorUpper)
        .ok_or_else(|| CliError::numeric("upper branch absent at the cycle seed"))?;
    let seed = dynamics::find_cycle_near_equilibrium(&params, &upper.coords, cfg)?;
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(dynamics::continue_cycle(base, &seed, d2_seed, lo, 2e-4, cfg)?)
}

fn cmd_cycle(cli: &Cli, config: &ExperimentConfig, cfg: &IntegratorConfig) -> Result<(), CliError> {
    let params = config.model.params_with_d2()?;
    let cc = config.cycle.as_ref();
    let target = cc.map(|c| c.near).unwrap_or_default();
    match target {
        CycleTarget::Boundary => {
            let bc = dynamics::boundary_cycle(&params, cfg)?;
            write_out(cli, &to_json(&bc)?)
        }
        CycleTarget::UpperInterior => {
            let cycle = if let Some(guess) = cc.and_then(|c| c.guess) {
                let ys = equilibria::y_star(&params)?;
                dynamics::find_cycle(&params, &State::from(guess), &Section::y_plane(ys), cfg)?
            } else {
                let upper = equilibria::interior_equilibria(&params)
                    .into_iter()
                    .find(|p| p.kind == equilibria::EquilibriumKind::InteriorUpper)
                    .ok_or_else(|| {
                        CliError::numeric("no upper coexistence point at this d2; try a guess")
                    })?;
                dynamics::find_cycle_near_equilibrium(&params, &upper.coords, cfg)?
            };
            write_out(cli, &to_json(&cycle)?)
        }
    }
}

fn parse_family(s: &str) -> Result<ResponseKind, CliError> {
    match s {
        "holling2" => Ok(ResponseKind::Holling2),
        "ivlev" => Ok(ResponseKind::Ivlev),
        other => Err(CliError::input(format!(
            "unknown family '{other}' (expected holling2 or ivlev)"
        ))),
    }
}

fn cmd_fit_flags(cli: &Cli) -> Result<(), CliError> {
    let Command::Fit {
        target,
        family,
        domain,
        samples,
        multistart,
    } = &cli.command
    else {
        unreachable!("guarded by caller");
    };
    let target: ResponseSpec = serde_json::from_str(target.as_ref().expect("guarded"))
        .map_err(|e| CliError::input(format!("bad --target: {e}")))?;
    let family = parse_family(
        family
            .as_deref()
            .ok_or_else(|| CliError::input("--family is required with --target"))?,
    )?;
    let domain = match domain.as_deref() {
        None => [0.0, 1.0],
        Some(s) => {
            let (lo, hi) = s
                .split_once(':')
                .ok_or_else(|| CliError::input("--domain expects lo:hi"))?;
            [
                lo.trim()
                    .parse()
                    .map_err(|e| CliError::input(format!("bad --domain: {e}")))?,
                hi.trim()
                    .parse()
                    .map_err(|e| CliError::input(format!("bad --domain: {e}")))?,
            ]
        }
    };
    run_fit(
        cli,
        &FitConfig {
            target,
            family,
            domain,
            samples: samples.unwrap_or(101),
            multistart: *multistart,
            init: None,
        },
    )
}

fn run_fit(cli: &Cli, fc: &FitConfig) -> Result<(), CliError> {
    let problem = FitProblem::new(
        fc.target,
        fc.family,
        (fc.domain[0], fc.domain[1]),
        fc.samples,
        fc.init.map(|p| (p[0], p[1])),
    )?;
    let result = if fc.multistart {
        fitting::fit_multistart(&problem)?
    } else {
        fitting::fit(&problem)?
    };
    write_out(cli, &to_json(&result)?)
}
