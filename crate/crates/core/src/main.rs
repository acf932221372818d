use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use toffrot::builder::{build, Style};
use toffrot::circuit::{executed_census, gate_census};
use toffrot::harness::{self, ExperimentConfig, TableId, Tolerances};
use toffrot::planner::RotationPlan;
use toffrot::qasm::emit_qasm;
use toffrot::simplify::{pass_halve_tests, reduction_report};
use toffrot::Error;

#[derive(Parser)]
#[command(name = "toffrot", version, about = "One-shot Clifford+Toffoli z-rotations")]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PlanArgs {
    /// Target angle in radians; `pi/4`, `-pi/8`, `3*pi/16` are accepted.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    theta: f64,
    /// Angle tolerance; determines n.
    #[arg(long, conflicts_with = "n", required_unless_present = "n")]
    epsilon: Option<f64>,
    /// Number of outer ancillas.
    #[arg(long)]
    n: Option<u32>,
    /// Keep trailing zero bits of k instead of reducing n.
    #[arg(long)]
    no_reduce: bool,
}

impl PlanArgs {
    fn plan(&self) -> toffrot::Result<RotationPlan> {
        match (self.epsilon, self.n) {
            (Some(e), _) if self.no_reduce => {
                RotationPlan::from_n(self.theta, toffrot::planner::choose_n(e)?, false).map(|mut p| {
                    p.epsilon = Some(e);
                    p
                })
            }
            (Some(e), _) => RotationPlan::from_epsilon(self.theta, e),
            (None, Some(n)) => RotationPlan::from_n(self.theta, n, !self.no_reduce),
            (None, None) => Err(Error::Validation("either --epsilon or --n is required".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Resolve an angle into n, k, θ* and the success probability.
    Plan(PlanArgs),
    /// Write the circuit as OpenQASM 3.
    Build {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value = "simplified")]
        style: Style,
        #[arg(long)]
        out: PathBuf,
        /// Also write the gate reduction of the rewrite passes as JSON.
        #[arg(long)]
        reduction: Option<PathBuf>,
    },
    /// Run the twelve tomography circuits per grid point and dump raw counts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the grid and write the result table.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write plot series as JSON.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Fit the exponential decay of the success probability per δ.
    Fit {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a result table with a reference table.
    Compare {
        /// Defaults to the closed-form probabilities for `table1`.
        #[arg(long, required_unless_present = "reference")]
        report: Option<PathBuf>,
        #[arg(long)]
        reference: TableId,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        prob_tolerance: Option<f64>,
        #[arg(long)]
        fidelity_tolerance: Option<f64>,
    },
    /// Circuit size and quality for every n up to a maximum.
    Bench {
        #[arg(long)]
        n_max: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, num_args = 1..)]
        delta: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_angle(s: &str) -> Result<f64, String> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let bad = || format!("cannot read `{s}` as an angle");
    let t = s.replace(' ', "").to_ascii_lowercase();
    let (sign, t) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r.to_string()),
        None => (1.0, t),
    };
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| bad())?),
        None => (t, 1.0),
    };
    let factor = match num.as_str() {
        "pi" => 1.0,
        other => other.strip_suffix("*pi").and_then(|f| f.parse::<f64>().ok()).ok_or_else(bad)?,
    };
    Ok(sign * factor * std::f64::consts::PI / den)
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> toffrot::Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_report(path: &Path) -> toffrot::Result<harness::Report> {
    harness::read_report(BufReader::new(File::open(path)?))
}

fn run(cli: Cli) -> toffrot::Result<ExitCode> {
    match cli.command {
        Command::Plan(args) => {
            let plan = args.plan()?;
            let built = build(&plan, Style::Simplified).ok();
            write_json(
                None,
                &json!({
                    "plan": plan,
                    "angle_error": plan.angle_error(),
                    "qubits": built.as_ref().map(|c| c.num_qubits()),
                    "toffolis": built.as_ref().map(|c| gate_census(c).toffoli),
                }),
            )?;
        }
        Command::Build { plan, style, out, reduction } => {
            let plan = plan.plan()?;
            let c = build(&plan, style)?;
            std::fs::write(&out, emit_qasm(&c))?;
            if let Some(path) = reduction {
                let halved = pass_halve_tests(&build(&plan, Style::Naive)?);
                let simplified = build(&plan, Style::Simplified)?;
                write_json(Some(&path), &reduction_report(&halved, &simplified, &plan)?)?;
            }
            write_json(
                None,
                &json!({ "plan": plan, "qubits": c.num_qubits(), "census": executed_census(&c), "out": out }),
            )?;
        }
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let mut runs = Vec::new();
            for &delta in &cfg.delta {
                for &n in &cfg.n {
                    let plan = RotationPlan::from_n(cfg.theta, n, cfg.reduce)?;
                    let grid = harness::run_settings(&cfg, &plan, delta)?;
                    let settings: Vec<_> = grid
                        .settings
                        .iter()
                        .map(|s| {
                            json!({
                                "input": s.probe.label(),
                                "basis": s.basis.to_string(),
                                "seed": s.seed,
                                "counts": s.counts.to_json(),
                                "success": s.split.success,
                                "success_target": s.split.success_target,
                                "failure_target": s.split.failure_target,
                            })
                        })
                        .collect();
                    runs.push(json!({ "n": plan.n, "k": plan.k, "delta": delta, "settings": settings }));
                }
            }
            write_json(
                out.as_deref(),
                &json!({ "seed": cfg.seed, "stamp": harness::stamp(), "config": cfg, "runs": runs }),
            )?;
        }
        Command::Experiment { config, out, plot_data } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = harness::run_experiment(&cfg)?;
            let mut w = output(Some(&out))?;
            harness::write_report(&report, &mut w)?;
            w.flush()?;
            if let Some(p) = plot_data {
                write_json(Some(&p), &harness::plot_data(&report)?)?;
            }
        }
        Command::Fit { report, out } => {
            let report = read_report(&report)?;
            let fits = harness::fit_report(&report)?;
            write_json(
                out.as_deref(),
                &json!({
                    "seed": report.meta.seed,
                    "stamp": harness::stamp(),
                    "report_stamp": report.meta.stamp,
                    "theta": report.meta.theta,
                    "fits": fits,
                }),
            )?;
        }
        Command::Compare { report, reference, out, prob_tolerance, fidelity_tolerance } => {
            let report = match report {
                Some(p) => read_report(&p)?,
                None if reference == TableId::Table1 => {
                    harness::theory_report(std::f64::consts::FRAC_PI_4, &[2, 4, 5, 6, 7, 8], true)?
                }
                None => return Err(Error::Validation("--report is required for this table".into())),
            };
            let mut tol = Tolerances::default();
            if let Some(p) = prob_tolerance {
                tol.closed_form = p;
                tol.prob_noiseless = p;
                tol.prob_noisy = p;
            }
            if let Some(f) = fidelity_tolerance {
                tol.fidelity_noiseless = f;
                tol.fidelity_noisy = f;
            }
            let diff = harness::compare_reference(&report, reference, &tol)?;
            write_json(out.as_deref(), &diff)?;
            if diff.pass == Some(false) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bench { n_max, config, shots, delta, out } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig { delta: vec![0.0], ..Default::default() },
            };
            if let Some(s) = shots {
                cfg.shots = s;
            }
            if let Some(d) = delta {
                cfg.delta = d;
            }
            let rows = harness::benchmark_mode(n_max, &cfg)?;
            let mut w = output(out.as_deref())?;
            harness::write_bench_csv(&rows, cfg.seed, &mut w)?;
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
