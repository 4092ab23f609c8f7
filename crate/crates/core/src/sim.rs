//! Closed-loop simulation engine, tracking-error metrics, the rotational-rate
//! sweep harness, and saturation/breaking-point analysis.

use crate::error::{Error, Result};
use crate::flatness;
use crate::mellinger::{MellingerController, MellingerGains};
use crate::snap::{SnapController, SnapGains};
use crate::traj::{helix, hover, FlatSample, YawPolicy};
use crate::vehicle::{
    mixer_forward, mixer_inverse, rk4_step, ControlCommand, RigidState, VehicleParams,
};
use crate::{real, Real, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Position-error radius beyond which a run is declared diverged, m.
pub const DIVERGENCE_RADIUS: f64 = 25.0;
/// Default maximum tracking error separating stable sweep rows from broken
/// ones, m.
pub const BREAKING_THRESHOLD: f64 = 5.0;

/// Which control law closes the loop, with its gains.
#[derive(Debug, Clone)]
pub enum ControllerSpec<T: Real> {
    Snap(SnapGains<T>),
    Mellinger(MellingerGains<T>),
}

/// Reference trajectory selection.
#[derive(Debug, Clone, Copy)]
pub enum TrajectorySpec<T: Real> {
    /// Hold a point at a fixed yaw.
    Hover { point: Vec3<T>, psi: T },
    /// Rising helix with the given angular rate, smoothed over the run
    /// duration; yaw policy selects fixed-zero or velocity-tangent heading.
    Helix { omega: T, yaw: YawPolicy },
}

impl<T: Real> TrajectorySpec<T> {
    /// Reference flat sample at time `t` of a run lasting `duration`.
    pub fn sample(&self, t: T, duration: T) -> Result<FlatSample<T>> {
        match *self {
            TrajectorySpec::Hover { point, psi } => Ok(hover(point, psi)),
            TrajectorySpec::Helix { omega, yaw } => helix(omega, t, duration, yaw),
        }
    }
}

/// Full closed-loop run description.
#[derive(Debug, Clone)]
pub struct SimConfig<T: Real> {
    pub controller: ControllerSpec<T>,
    pub trajectory: TrajectorySpec<T>,
    pub params: VehicleParams<T>,
    /// Control and physics time step, s.
    pub dt: T,
    /// Run length, s.
    pub duration: T,
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if self.duration < self.dt {
            return Err(Error::InvalidConfig("duration must be at least dt".into()));
        }
        Ok(())
    }
}

/// One logged step of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow<T: Real> {
    pub t: T,
    pub r: Vec3<T>,
    pub r_ref: Vec3<T>,
    pub v: Vec3<T>,
    pub psi: T,
    pub psi_ref: T,
    pub p_cmd: T,
    pub tau_cmd: Vec3<T>,
    pub s: [T; 4],
    pub saturated: [bool; 4],
}

/// Terminal status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimStatus {
    Completed,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct SimLog<T: Real> {
    pub rows: Vec<LogRow<T>>,
    pub status: SimStatus,
}

/// Run the closed loop: sample reference, run the controller, invert the
/// mixer with clamping, re-apply the forward mixer so the dynamics see what
/// the clamped rotors actually produce, integrate, log. Divergence (position
/// error beyond [`DIVERGENCE_RADIUS`], any non-finite value, or a controller
/// singularity) halts the run early with status `Diverged`.
pub fn closed_loop<T: Real>(config: &SimConfig<T>) -> Result<SimLog<T>> {
    config.validate()?;
    let params = &config.params;
    let steps = (config.duration / config.dt)
        .round()
        .to_usize()
        .ok_or_else(|| Error::InvalidConfig("duration/dt overflows".into()))?;

    let mut snap = match &config.controller {
        ControllerSpec::Snap(g) => Some(SnapController::new(*g, params)),
        ControllerSpec::Mellinger(_) => None,
    };
    let mellinger = match &config.controller {
        ControllerSpec::Mellinger(g) => Some(MellingerController::new(*g)),
        ControllerSpec::Snap(_) => None,
    };

    let first_ref = config.trajectory.sample(T::zero(), config.duration)?;
    let mut state = RigidState::hover_at(first_ref.r0);
    let mut rows = Vec::with_capacity(steps + 1);
    let mut status = SimStatus::Completed;

    for i in 0..=steps {
        let t = config.dt * real::<T>(i as f64);
        let reference = config.trajectory.sample(t, config.duration)?;
        if !state.is_finite() || (state.r - reference.r0).norm() > real::<T>(DIVERGENCE_RADIUS) {
            status = SimStatus::Diverged;
            break;
        }
        let cmd: Result<ControlCommand<T>> = match (&mut snap, &mellinger) {
            (Some(c), _) => c.step(&state, &reference, params, config.dt),
            (_, Some(c)) => {
                // Feedforward body rate from the reference's flatness chain.
                let omega_ref = flatness::feedforward(&reference, params)
                    .map(|f| f.omega)
                    .unwrap_or_else(|_| Vec3::zeros());
                c.step(&state, &reference, &omega_ref, params)
            }
            _ => unreachable!(),
        };
        let cmd = match cmd {
            Ok(cmd) if cmd.p.is_finite() && cmd.tau.iter().all(|x| x.is_finite()) => cmd,
            _ => {
                status = SimStatus::Diverged;
                break;
            }
        };
        // A non-finite rotor-speed cap disables clamping entirely: the
        // desired thrust and torque are applied as-is (ideal actuators), the
        // allocator is used only to log nominal speeds, and no saturation is
        // recorded.
        let clamping = params.s_max.is_finite();
        let mut speeds = mixer_inverse(&cmd, params);
        let (p_actual, tau_actual) = if clamping {
            mixer_forward(&speeds.squared(), params)
        } else {
            speeds.saturated = [false; 4];
            (cmd.p, cmd.tau)
        };
        let i_b = state.rot.i_b();
        rows.push(LogRow {
            t,
            r: state.r,
            r_ref: reference.r0,
            v: state.v,
            psi: i_b.y.atan2(i_b.x),
            psi_ref: reference.psi,
            p_cmd: cmd.p,
            tau_cmd: cmd.tau,
            s: speeds.s,
            saturated: speeds.saturated,
        });
        if i < steps {
            let applied = ControlCommand { p: p_actual, tau: tau_actual };
            match rk4_step(&state, &applied, config.dt, params) {
                Ok(next) => state = next,
                Err(_) => {
                    status = SimStatus::Diverged;
                    break;
                }
            }
        }
    }
    Ok(SimLog { rows, status })
}

/// Maximum over rows of the position-error norm.
pub fn max_tracking_error<T: Real>(log: &SimLog<T>) -> Result<T> {
    if log.rows.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(log
        .rows
        .iter()
        .map(|row| (row.r - row.r_ref).norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a }))
}

/// Count of rows with any rotor clamped, and the earliest such time.
pub fn saturation_events<T: Real>(log: &SimLog<T>) -> Result<(usize, Option<T>)> {
    if log.rows.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut count = 0;
    let mut first = None;
    for row in &log.rows {
        if row.saturated.iter().any(|&f| f) {
            count += 1;
            if first.is_none() {
                first = Some(row.t);
            }
        }
    }
    Ok((count, first))
}

/// One row of a rate sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T: Real> {
    pub omega: T,
    pub delta: T,
    pub status: SimStatus,
    pub first_saturation_time: Option<T>,
}

/// Run the helix closed loop once per rate in `[omega_min, omega_max]` with
/// step `omega_step`, in deterministic rate order. Runs execute in parallel;
/// the merge is by index, so the output order never depends on scheduling.
pub fn sweep<T: Real + Send + Sync>(
    base: &SimConfig<T>,
    omega_min: T,
    omega_max: T,
    omega_step: T,
) -> Result<Vec<SweepRow<T>>>
where
    ControllerSpec<T>: Send + Sync,
{
    if !(omega_step > T::zero()) {
        return Err(Error::InvalidConfig("omega step must be positive".into()));
    }
    let count = ((omega_max - omega_min) / omega_step + real::<T>(0.5))
        .floor()
        .to_usize()
        .map(|n| n + 1)
        .ok_or_else(|| Error::InvalidConfig("omega range overflows".into()))?;
    let yaw = match base.trajectory {
        TrajectorySpec::Helix { yaw, .. } => yaw,
        TrajectorySpec::Hover { .. } => YawPolicy::Zero,
    };
    (0..count)
        .into_par_iter()
        .map(|i| {
            let omega = omega_min + omega_step * real::<T>(i as f64);
            let config = SimConfig {
                trajectory: TrajectorySpec::Helix { omega, yaw },
                ..base.clone()
            };
            let log = closed_loop(&config)?;
            let delta = max_tracking_error(&log)?;
            let (_, first_saturation_time) = saturation_events(&log)?;
            Ok(SweepRow {
                omega,
                delta,
                status: log.status,
                first_saturation_time,
            })
        })
        .collect()
}

/// Smallest rate whose row diverged or exceeded the instability threshold;
/// `None` when the whole table is stable.
pub fn detect_breaking_point<T: Real>(table: &[SweepRow<T>], threshold: T) -> Option<T> {
    table
        .iter()
        .find(|row| row.status == SimStatus::Diverged || row.delta > threshold)
        .map(|row| row.omega)
}

/// CSV column header for serialized logs.
pub const CSV_HEADER: &str =
    "t,x,y,z,xT,yT,zT,vx,vy,vz,psi,psiT,p_cmd,taux,tauy,tauz,s1,s2,s3,s4,sat1,sat2,sat3,sat4";

fn sig9<T: Real>(x: T) -> String {
    format!("{:.8e}", x.to_f64().unwrap_or(f64::NAN))
}

/// Serialize a log as CSV: fixed column order, 9 significant digits.
pub fn log_to_csv<T: Real>(log: &SimLog<T>) -> String {
    let mut out = String::with_capacity(32 + log.rows.len() * 320);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &log.rows {
        let fields: Vec<String> = [
            row.t, row.r.x, row.r.y, row.r.z, row.r_ref.x, row.r_ref.y, row.r_ref.z, row.v.x,
            row.v.y, row.v.z, row.psi, row.psi_ref, row.p_cmd, row.tau_cmd.x, row.tau_cmd.y,
            row.tau_cmd.z, row.s[0], row.s[1], row.s[2], row.s[3],
        ]
        .iter()
        .map(|&x| sig9(x))
        .chain(row.saturated.iter().map(|&f| String::from(if f { "1" } else { "0" })))
        .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Parse a CSV produced by [`log_to_csv`]. The terminal status is not stored
/// in the CSV; the caller supplies it.
pub fn log_from_csv(text: &str, status: SimStatus) -> Result<SimLog<f64>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::InvalidConfig("bad or missing CSV header".into())),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 24 {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected 24 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("line {}: bad number", lineno + 2)))
        };
        let flag = |i: usize| -> Result<bool> {
            match fields[i] {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(Error::InvalidConfig(format!("line {}: bad flag", lineno + 2))),
            }
        };
        rows.push(LogRow {
            t: num(0)?,
            r: Vec3::new(num(1)?, num(2)?, num(3)?),
            r_ref: Vec3::new(num(4)?, num(5)?, num(6)?),
            v: Vec3::new(num(7)?, num(8)?, num(9)?),
            psi: num(10)?,
            psi_ref: num(11)?,
            p_cmd: num(12)?,
            tau_cmd: Vec3::new(num(13)?, num(14)?, num(15)?),
            s: [num(16)?, num(17)?, num(18)?, num(19)?],
            saturated: [flag(20)?, flag(21)?, flag(22)?, flag(23)?],
        });
    }
    Ok(SimLog { rows, status })
}
