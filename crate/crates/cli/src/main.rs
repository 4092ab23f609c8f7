//! Command-line front end: closed-loop runs, rate sweeps, flatness residual
//! checks, pole step responses, and multi-agent formation runs, all emitting
//! CSV artifacts plus a JSON manifest describing the invocation.
//!
//! Exit codes: 0 success, 1 configuration error, 2 divergence, 3 invariant
//! breach.

use clap::{Args, Parser, Subcommand, ValueEnum};
use flatquad::flatness::feedforward;
use flatquad::formation::FormationConfig;
use flatquad::sim::{
    closed_loop, log_to_csv, max_tracking_error, saturation_events, sweep, ControllerSpec,
    SimConfig, SimStatus, TrajectorySpec,
};
use flatquad::traj::YawPolicy;
use flatquad::tuning::{
    self, complex_attitude_poles, default_mellinger_position_poles, default_snap_position_poles,
    default_snap_yaw_poles, settling_time, step_response, PoleSet,
};
use flatquad::vehicle::VehicleParams;
use flatquad::Vec3;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "flatquad",
    version,
    about = "Quadcopter flight-dynamics simulator and tracking-controller workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop tracking simulation and write its log as CSV.
    Sim(SimArgs),
    /// Run a helix-rate sweep and write the summary table as CSV.
    Sweep(SweepArgs),
    /// Check finite-difference residuals of the flatness maps along a trajectory.
    FlatnessCheck(FlatnessArgs),
    /// Integrate the second-order step response for a pole pair and write it as CSV.
    StepResponse(StepArgs),
    /// Run a multi-agent formation simulation from a JSON config.
    Formation(FormationArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerKind {
    Snap,
    Mellinger,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrajKind {
    Helix,
    Hover,
}

#[derive(Args)]
struct CommonSimArgs {
    /// Controller to run.
    #[arg(long, value_enum)]
    controller: ControllerKind,
    /// Trajectory shape.
    #[arg(long, value_enum, default_value = "helix")]
    traj: TrajKind,
    /// Helix angular rate, rad/s.
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    /// Run length, s.
    #[arg(long, default_value_t = 10.0)]
    duration: f64,
    /// Control and physics time step, s.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Position poles (snap: 4 entries; mellinger: 2), e.g. "-10,-10,-10,-10".
    #[arg(long, allow_hyphen_values = true)]
    poles_pos: Option<String>,
    /// Attitude poles for the mellinger controller, e.g. "-0.5+3j,-0.5-3j".
    #[arg(long, allow_hyphen_values = true)]
    poles_att: Option<String>,
    /// Yaw poles for the snap controller, e.g. "-10,-10".
    #[arg(long, allow_hyphen_values = true)]
    poles_yaw: Option<String>,
    /// Vehicle parameter JSON file; omitted fields take the stock values.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: CommonSimArgs,
    /// Output CSV path.
    #[arg(long, default_value = "sim.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonSimArgs,
    #[arg(long, default_value_t = 0.0)]
    omega_min: f64,
    #[arg(long, default_value_t = 2.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 0.1)]
    omega_step: f64,
    /// Worker threads for the sweep (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV path.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct FlatnessArgs {
    #[arg(long, value_enum, default_value = "helix")]
    traj: TrajKind,
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    #[arg(long, default_value_t = 10.0)]
    duration: f64,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Fault-injection hook for testing the breach path: perturbs the
    /// sampled velocity before differencing.
    #[arg(long, hide = true)]
    corrupt_sigma: bool,
}

#[derive(Args)]
struct StepArgs {
    /// Pole pair, e.g. "-1,-1" or "-0.5+3j,-0.5-3j".
    #[arg(long, allow_hyphen_values = true)]
    poles: String,
    #[arg(long, default_value_t = 10.0)]
    duration: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Output CSV path.
    #[arg(long, default_value = "step.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct FormationArgs {
    /// Formation JSON config file.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: CommonSimArgs,
    /// Output prefix; per-agent logs land at <prefix>_agent<i>.csv and the
    /// safety trace at <prefix>_safety.csv.
    #[arg(long, default_value = "formation")]
    out: PathBuf,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: serde_json::Value,
    artifacts: Vec<String>,
    wall_clock_seconds: f64,
}

fn write_manifest(
    command: &str,
    config: serde_json::Value,
    artifacts: &[&PathBuf],
    started: Instant,
) -> std::io::Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        config,
        artifacts: artifacts.iter().map(|p| p.display().to_string()).collect(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let path = artifacts
        .first()
        .map(|p| {
            let mut s = p.as_os_str().to_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
        .unwrap_or_else(|| PathBuf::from(format!("{command}.manifest.json")));
    std::fs::write(path, serde_json::to_string_pretty(&manifest).unwrap())
}

struct ConfigError(String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

fn load_params(path: &Option<PathBuf>) -> Result<VehicleParams<f64>, ConfigError> {
    match path {
        None => Ok(VehicleParams::default_params()),
        Some(p) => Ok(VehicleParams::from_json(&std::fs::read_to_string(p)?)?),
    }
}

fn parse_poles(text: &Option<String>, default: fn() -> PoleSet) -> Result<PoleSet, ConfigError> {
    match text {
        None => Ok(default()),
        Some(t) => Ok(PoleSet::parse(t)?),
    }
}

fn build_controller(
    args: &CommonSimArgs,
    params: &VehicleParams<f64>,
) -> Result<ControllerSpec<f64>, ConfigError> {
    match args.controller {
        ControllerKind::Snap => {
            let pos = parse_poles(&args.poles_pos, default_snap_position_poles)?;
            let yaw = parse_poles(&args.poles_yaw, default_snap_yaw_poles)?;
            Ok(ControllerSpec::Snap(tuning::snap_gains_from_poles(&pos, &yaw)?))
        }
        ControllerKind::Mellinger => {
            let pos = parse_poles(&args.poles_pos, default_mellinger_position_poles)?;
            let att = parse_poles(&args.poles_att, complex_attitude_poles)?;
            Ok(ControllerSpec::Mellinger(tuning::mellinger_gains_from_poles(&pos, &att, params)?))
        }
    }
}

fn build_sim_config(args: &CommonSimArgs) -> Result<SimConfig<f64>, ConfigError> {
    let params = load_params(&args.params)?;
    let controller = build_controller(args, &params)?;
    let trajectory = match args.traj {
        TrajKind::Helix => TrajectorySpec::Helix { omega: args.omega, yaw: YawPolicy::Zero },
        TrajKind::Hover => TrajectorySpec::Hover { point: Vec3::zeros(), psi: 0.0 },
    };
    let config = SimConfig { controller, trajectory, params, dt: args.dt, duration: args.duration };
    config.validate()?;
    Ok(config)
}

fn config_echo(args: &CommonSimArgs) -> serde_json::Value {
    serde_json::json!({
        "controller": match args.controller { ControllerKind::Snap => "snap", ControllerKind::Mellinger => "mellinger" },
        "traj": match args.traj { TrajKind::Helix => "helix", TrajKind::Hover => "hover" },
        "omega": args.omega,
        "duration": args.duration,
        "dt": args.dt,
        "poles_pos": args.poles_pos,
        "poles_att": args.poles_att,
        "poles_yaw": args.poles_yaw,
        "params": args.params.as_ref().map(|p| p.display().to_string()),
    })
}

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn cmd_sim(args: &SimArgs) -> Result<u8, ConfigError> {
    let started = Instant::now();
    let config = build_sim_config(&args.common)?;
    let log = closed_loop(&config)?;
    std::fs::write(&args.out, log_to_csv(&log))?;
    let delta = max_tracking_error(&log)?;
    let (sat_rows, first_sat) = saturation_events(&log)?;
    println!(
        "status={} rows={} delta={} saturated_rows={} first_saturation={}",
        match log.status {
            SimStatus::Completed => "completed",
            SimStatus::Diverged => "diverged",
        },
        log.rows.len(),
        sig9(delta),
        sat_rows,
        first_sat.map(sig9).unwrap_or_default(),
    );
    write_manifest("sim", config_echo(&args.common), &[&args.out], started)?;
    Ok(match log.status {
        SimStatus::Completed => EXIT_OK,
        SimStatus::Diverged => EXIT_DIVERGED,
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, ConfigError> {
    let started = Instant::now();
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let base = build_sim_config(&args.common)?;
    let table = sweep(&base, args.omega_min, args.omega_max, args.omega_step)?;
    let mut csv = String::from("Omega,delta,status,first_saturation_time\n");
    for row in &table {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            sig9(row.omega),
            sig9(row.delta),
            match row.status {
                SimStatus::Completed => "completed",
                SimStatus::Diverged => "diverged",
            },
            row.first_saturation_time.map(sig9).unwrap_or_default(),
        ));
    }
    std::fs::write(&args.out, csv)?;
    println!("rows={}", table.len());
    let mut echo = config_echo(&args.common);
    echo["omega_min"] = args.omega_min.into();
    echo["omega_max"] = args.omega_max.into();
    echo["omega_step"] = args.omega_step.into();
    write_manifest("sweep", echo, &[&args.out], started)?;
    Ok(EXIT_OK)
}

fn cmd_flatness_check(args: &FlatnessArgs) -> Result<u8, ConfigError> {
    let params = load_params(&args.params)?;
    let trajectory = match args.traj {
        TrajKind::Helix => TrajectorySpec::Helix { omega: args.omega, yaw: YawPolicy::Zero },
        TrajKind::Hover => TrajectorySpec::Hover { point: Vec3::zeros(), psi: 0.0 },
    };
    if !(args.duration > 0.0) {
        return Err(ConfigError("duration must be positive".into()));
    }

    let sample_at = |t: f64| {
        let mut s = trajectory.sample(t, args.duration)?;
        if args.corrupt_sigma {
            s.r1 *= 1.1;
        }
        flatquad::error::Result::Ok(s)
    };
    let mut worst_rot = 0.0f64;
    let mut worst_alpha = 0.0f64;
    let mut worst_thrust = 0.0f64;
    let mut worst_vel = 0.0f64;
    let n = 40;
    for i in 1..n {
        let t = args.duration * i as f64 / n as f64;
        let f = feedforward(&sample_at(t)?, &params)?;

        let h = 1e-4;
        let f_next = feedforward(&sample_at(t + h)?, &params)?;
        let advanced = f.rot.matrix() * flatquad::geom::exp_hat(&(f.omega * h));
        worst_rot = worst_rot.max((f_next.rot.matrix() - advanced).amax());

        let fm = feedforward(&sample_at(t - h)?, &params)?;
        let omega_dot = (f_next.omega - fm.omega) / (2.0 * h);
        worst_alpha = worst_alpha.max((omega_dot - f.alpha).amax());

        let h = 1e-5;
        let sm = sample_at(t - h)?;
        let sp = sample_at(t + h)?;
        let fm = feedforward(&sm, &params)?;
        let fp = feedforward(&sp, &params)?;
        worst_thrust = worst_thrust
            .max(((fp.p - fm.p) / (2.0 * h) - f.p1).abs())
            .max(((fp.p1 - fm.p1) / (2.0 * h) - f.p2).abs());
        let s = sample_at(t)?;
        let v_fd = (sp.r0 - sm.r0) / (2.0 * h);
        worst_vel = worst_vel.max((v_fd - s.r1).amax());
    }
    println!("attitude_rate_residual={}", sig9(worst_rot));
    println!("angular_acceleration_residual={}", sig9(worst_alpha));
    println!("thrust_chain_residual={}", sig9(worst_thrust));
    println!("velocity_residual={}", sig9(worst_vel));
    let ok = worst_rot < 1e-6 && worst_alpha < 1e-3 && worst_thrust < 1e-5 && worst_vel < 1e-5;
    Ok(if ok { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_step_response(args: &StepArgs) -> Result<u8, ConfigError> {
    let started = Instant::now();
    let poles = PoleSet::parse(&args.poles)?;
    let series = step_response(&poles, args.duration, args.dt)?;
    let mut csv = String::from("t,y,cumulative_mean\n");
    for s in &series {
        csv.push_str(&format!("{},{},{}\n", sig9(s.t), sig9(s.y), sig9(s.cumulative_mean)));
    }
    std::fs::write(&args.out, csv)?;
    println!(
        "samples={} settling_time={}",
        series.len(),
        settling_time(&series, 0.1).map(sig9).unwrap_or_default(),
    );
    let echo = serde_json::json!({
        "poles": args.poles,
        "duration": args.duration,
        "dt": args.dt,
    });
    write_manifest("step-response", echo, &[&args.out], started)?;
    Ok(EXIT_OK)
}

fn cmd_formation(args: &FormationArgs) -> Result<u8, ConfigError> {
    let started = Instant::now();
    let config = FormationConfig::from_json(&std::fs::read_to_string(&args.config)?)?;
    let params = load_params(&args.common.params)?;
    let controller = build_controller(&args.common, &params)?;
    let log = flatquad::formation::run_formation(
        &config,
        &controller,
        &params,
        args.common.dt,
        args.common.duration,
    )?;

    let prefix = args.out.display();
    let mut artifacts = Vec::new();
    for (idx, agent_log) in log.agent_logs.iter().enumerate() {
        let path = PathBuf::from(format!("{prefix}_agent{}.csv", idx + 1));
        std::fs::write(&path, log_to_csv(agent_log))?;
        artifacts.push(path);
    }
    let mut safety_csv = String::from("t,lambda_min,threshold,pass\n");
    for row in &log.safety {
        safety_csv.push_str(&format!(
            "{},{},{},{}\n",
            sig9(row.t),
            sig9(row.lambda_min),
            sig9(row.threshold),
            if row.pass { "1" } else { "0" },
        ));
    }
    let safety_path = PathBuf::from(format!("{prefix}_safety.csv"));
    std::fs::write(&safety_path, safety_csv)?;
    artifacts.push(safety_path);

    println!(
        "status={} agents={}",
        match log.status {
            SimStatus::Completed => "completed",
            SimStatus::Diverged => "diverged",
        },
        log.agent_logs.len(),
    );
    let mut echo = config_echo(&args.common);
    echo["config"] = args.config.display().to_string().into();
    let refs: Vec<&PathBuf> = artifacts.iter().collect();
    write_manifest("formation", echo, &refs, started)?;
    Ok(match log.status {
        SimStatus::Completed => EXIT_OK,
        SimStatus::Diverged => EXIT_DIVERGED,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage/help requests succeed; anything else is a config error.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Sim(args) => cmd_sim(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::FlatnessCheck(args) => cmd_flatness_check(args),
        Command::StepResponse(args) => cmd_step_response(args),
        Command::Formation(args) => cmd_formation(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(ConfigError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
