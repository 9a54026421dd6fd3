#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use plate_buckling::analysis::{empirical_delta0, gradient_flow_run, GradientFlowState};
use plate_buckling::export::{
    flow_csv, radial_csv, summarize, sweep_csv, to_json, trajectory_csv, SweepTable,
};
use plate_buckling::integrator::{integrate, SolverConfig, Trajectory};
use plate_buckling::shooting::{shoot, sweep, theta_grid, RowStatus, DEFAULT_ROOT_TOL};
use plate_buckling::verify::{run_suite, DEFAULT_LEVELS};
use plate_buckling::AsymptoticData;

const EXIT_USAGE: u8 = 1;
const EXIT_NO_SCATTERING: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "plate-buckling", version)]
#[command(
    about = "Radial solutions of the conformal plate buckling system by potential scattering"
)]
struct Cli {
    /// Directory for emitted files
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(flatten)]
    solver: SolverArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Output sample spacing in t = ln r
    #[arg(long, global = true)]
    dense_step: Option<f64>,
    #[arg(long, global = true)]
    escape_tol: Option<f64>,
    #[arg(long, global = true)]
    max_time: Option<f64>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.rel_tol, self.rel_tol);
        set(&mut cfg.abs_tol, self.abs_tol);
        set(&mut cfg.dense_step, self.dense_step);
        set(&mut cfg.escape_tol, self.escape_tol);
        set(&mut cfg.max_time, self.max_time);
        cfg
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one trajectory and reconstruct its radial solution
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        eta_in: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi_in: f64,
    },
    /// Find eta_in for a target deflection angle
    Shoot {
        /// Radians, or a multiple of pi such as -0.75pi
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_ROOT_TOL)]
        root_tol: f64,
    },
    /// Shoot on an evenly spaced grid of angles
    Sweep {
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta_min: f64,
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta_max: f64,
        #[arg(long)]
        n: usize,
    },
    /// Run the invariant suite
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
        levels: Vec<f64>,
    },
    /// Run the gradient-flow recurrence
    Flow {
        #[arg(long, allow_hyphen_values = true)]
        mu0: f64,
        /// Defaults to the negative root of mu0^2 + nu0^2 = 1
        #[arg(long, allow_hyphen_values = true)]
        nu0: Option<f64>,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Also bisect for the largest delta that stays in the quadrant
        #[arg(long)]
        probe_delta0: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Shoot { .. } => "shoot",
            Command::Sweep { .. } => "sweep",
            Command::Verify { .. } => "verify",
            Command::Flow { .. } => "flow",
        }
    }
}

/// Accepts `1.2`, `-0.75pi`, `-pi`, `-pi/2` and `-3pi/4`.
fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let Some(at) = s.find("pi") else {
        return s.parse().map_err(|e| format!("bad angle {s:?}: {e}"));
    };
    let (head, tail) = (&s[..at], &s[at + 2..]);
    let coeff = match head.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c
            .parse::<f64>()
            .map_err(|e| format!("bad angle {s:?}: {e}"))?,
    };
    let denom = match tail.strip_prefix('/') {
        None if tail.is_empty() => 1.0,
        Some(d) => d
            .parse::<f64>()
            .map_err(|e| format!("bad angle {s:?}: {e}"))?,
        None => return Err(format!("bad angle {s:?}")),
    };
    Ok(coeff * PI / denom)
}

#[derive(Serialize)]
struct RunManifest {
    schema: &'static str,
    command: &'static str,
    argv: Vec<String>,
    config: SolverConfig,
    inputs: serde_json::Value,
    outputs: Vec<String>,
    version: String,
    timestamp: String,
}

struct Emitter {
    dir: PathBuf,
    written: Vec<String>,
}

impl Emitter {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(
        mut self,
        cmd: &Command,
        cfg: &SolverConfig,
        inputs: serde_json::Value,
    ) -> anyhow::Result<()> {
        let mut outputs = self.written.clone();
        outputs.push("manifest.json".to_string());
        let manifest = RunManifest {
            schema: "plate-buckling/manifest/1",
            command: cmd.name(),
            argv: std::env::args().collect(),
            config: cfg.clone(),
            inputs,
            outputs,
            version: format!("plate-buckling {}", env!("CARGO_PKG_VERSION")),
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        self.write("manifest.json", &to_json(&manifest))
    }
}

fn emit_solution(out: &mut Emitter, a: &AsymptoticData, traj: &Trajectory) -> anyhow::Result<bool> {
    out.write("trajectory.csv", &trajectory_csv(traj))?;
    let (summary, sol) = summarize(a, traj);
    if let Some(sol) = &sol {
        out.write("radial.csv", &radial_csv(sol))?;
    }
    out.write("summary.json", &to_json(&summary))?;
    Ok(summary.theta.is_some() && sol.is_some())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let cfg = cli.solver.config();
    cfg.validate()?;
    let mut out = Emitter::new(&cli.out_dir)?;
    let (code, inputs) = match &cli.command {
        Command::Solve { eta_in, xi_in } => {
            let inputs = json!({ "eta_in": eta_in, "xi_in": xi_in });
            let a = AsymptoticData::new(*xi_in, *eta_in);
            if !(*eta_in > 0.0) {
                let reason = "eta_in nonpositive: no scattering";
                out.write(
                    "summary.json",
                    &to_json(&json!({
                        "schema": plate_buckling::export::SCHEMA,
                        "inputs": a,
                        "outcome": "blow_up",
                        "blowup": { "reason": reason },
                    })),
                )?;
                eprintln!("{reason}");
                (EXIT_NO_SCATTERING, inputs)
            } else {
                let traj = integrate(&a, &cfg)?;
                if emit_solution(&mut out, &a, &traj)? {
                    println!("solve: escaped, {} samples", traj.samples.len());
                    (0, inputs)
                } else {
                    eprintln!("solve: no scattering ({:?})", traj.outcome);
                    (EXIT_NO_SCATTERING, inputs)
                }
            }
        }
        Command::Shoot { theta, root_tol } => {
            let inputs = json!({ "theta": theta, "root_tol": root_tol });
            let shot = shoot(*theta, &cfg, *root_tol)?;
            let a = AsymptoticData::new(0.0, shot.eta_in_found);
            emit_solution(&mut out, &a, &shot.trajectory)?;
            out.write(
                "shoot.json",
                &to_json(&json!({
                    "schema": "plate-buckling/shoot/1",
                    "theta_target": shot.theta_target,
                    "theta_achieved": shot.theta_achieved,
                    "eta_in": shot.eta_in_found,
                    "iterations": shot.iterations,
                    "bracket": [shot.bracket.0, shot.bracket.1],
                })),
            )?;
            println!(
                "shoot: eta_in = {} (theta error {:.3e})",
                shot.eta_in_found,
                shot.theta_achieved - shot.theta_target
            );
            (0, inputs)
        }
        Command::Sweep {
            theta_min,
            theta_max,
            n,
        } => {
            let inputs = json!({ "theta_min": theta_min, "theta_max": theta_max, "n": n });
            if *n == 0 {
                bail!("--n must be positive");
            }
            let rows = sweep(&theta_grid(*theta_min, *theta_max, *n), &cfg);
            out.write("sweep.csv", &sweep_csv(&rows))?;
            let failed = rows.iter().filter(|r| r.status != RowStatus::Ok).count();
            out.write("sweep.json", &to_json(&SweepTable::new(rows)))?;
            println!("sweep: {} rows, {failed} failed", n);
            (if failed > 0 { EXIT_PARTIAL } else { 0 }, inputs)
        }
        Command::Verify { levels } => {
            let inputs = json!({ "levels": levels });
            let report = run_suite(levels, &cfg);
            for line in report.lines() {
                println!("{line}");
            }
            out.write("verify.json", &to_json(&report))?;
            (if report.all_passed() { 0 } else { EXIT_VERIFY }, inputs)
        }
        Command::Flow {
            mu0,
            nu0,
            delta,
            epsilon,
            tol,
            max_iter,
            probe_delta0,
        } => {
            let inputs = json!({
                "mu0": mu0, "nu0": nu0, "delta": delta, "epsilon": epsilon,
                "tol": tol, "max_iter": max_iter,
            });
            let s0 = match nu0 {
                Some(nu0) => GradientFlowState::new(*mu0, *nu0, *delta, *epsilon)?,
                None => GradientFlowState::on_circle(*mu0, *delta, *epsilon)?,
            };
            let delta0 = if *probe_delta0 {
                Some(empirical_delta0(s0.mu0, s0.epsilon, 1e-6)?)
            } else {
                None
            };
            match gradient_flow_run(&s0, *tol, *max_iter) {
                Ok(r) => {
                    out.write("flow.csv", &flow_csv(&r))?;
                    out.write(
                        "flow.json",
                        &to_json(&json!({
                            "schema": "plate-buckling/flow/1",
                            "anchor": [s0.mu0, s0.nu0],
                            "delta": s0.delta,
                            "epsilon": s0.epsilon,
                            "fixed_point": [r.fixed_point.0, r.fixed_point.1],
                            "iterations": r.iterations,
                            "grad_norm": r.grad_norm,
                            "stayed_in_quadrant": r.stayed_in_quadrant,
                            "empirical_delta0": delta0,
                        })),
                    )?;
                    println!(
                        "flow: fixed point ({}, {}) after {} iterations",
                        r.fixed_point.0, r.fixed_point.1, r.iterations
                    );
                    (0, inputs)
                }
                Err(e) => {
                    out.write(
                        "flow.json",
                        &to_json(&json!({
                            "schema": "plate-buckling/flow/1",
                            "anchor": [s0.mu0, s0.nu0],
                            "delta": s0.delta,
                            "epsilon": s0.epsilon,
                            "error": e.to_string(),
                            "empirical_delta0": delta0,
                        })),
                    )?;
                    eprintln!("flow: {e}");
                    (EXIT_PARTIAL, inputs)
                }
            }
        }
    };
    out.finish(&cli.command, &cfg, inputs)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
