//! Decentralized multi-quadcopter affine formation flight: leaders track an
//! affine image of their initial position, followers track positive convex
//! combinations of their in-neighbors' simulated positions, and a singular-
//! value safety check bounds how much the transform may shrink separations.

use crate::error::{Error, Result};
use crate::sim::{ControllerSpec, LogRow, SimLog, SimStatus};
use crate::snap::SnapController;
use crate::traj::{sigma, FlatSample};
use crate::vehicle::{mixer_forward, mixer_inverse, rk4_step, ControlCommand, RigidState, VehicleParams};
use crate::{Mat3, Vec3};
use serde::Deserialize;
use std::collections::BTreeMap;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Time-parameterized affine transform family, smoothed from identity to the
/// target by the septic ramp over `t_total` seconds and held afterwards.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformKind {
    /// `Q = I`, `d = s(t) offset`.
    Translate { offset: Vec3<f64> },
    /// `Q = (1 + s(t)(factor-1)) I`, `d = 0`.
    Scale { factor: f64 },
    /// `Q = Rz(s(t) angle)`, `d = 0`.
    RotateZ { angle: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub kind: TransformKind,
    /// Ramp duration, s.
    pub t_total: f64,
}

impl Transform {
    /// Smoothed progress in [0, 1]: 0 before the ramp, 1 after it.
    fn progress(&self, t: f64) -> f64 {
        let u = (t / self.t_total).clamp(0.0, 1.0);
        sigma(u).expect("clamped to the ramp domain")[0]
    }

    /// The transform pair `(Q, d)` at time `t`.
    pub fn at(&self, t: f64) -> (Mat3<f64>, Vec3<f64>) {
        let s = self.progress(t);
        match self.kind {
            TransformKind::Translate { offset } => (Mat3::identity(), offset * s),
            TransformKind::Scale { factor } => {
                (Mat3::identity() * (1.0 + s * (factor - 1.0)), Vec3::zeros())
            }
            TransformKind::RotateZ { angle } => {
                let a = s * angle;
                let (sin, cos) = a.sin_cos();
                (
                    Mat3::new(cos, -sin, 0.0, sin, cos, 0.0, 0.0, 0.0, 1.0),
                    Vec3::zeros(),
                )
            }
        }
    }
}

/// Collision-avoidance bounds: controller error bound, vehicle size, and the
/// minimum initial separation, all in meters.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SafetyBounds {
    pub delta: f64,
    pub epsilon: f64,
    pub d_min: f64,
}

/// Validated formation description. Agent indices are 1-based, matching the
/// JSON schema.
#[derive(Debug, Clone)]
pub struct FormationConfig {
    pub agents: usize,
    pub leaders: Vec<usize>,
    /// In-neighbor lists, keyed by follower index.
    pub neighbors: BTreeMap<usize, Vec<usize>>,
    /// Positive weights summing to one, parallel to `neighbors`.
    pub weights: BTreeMap<usize, Vec<f64>>,
    pub initial_positions: Vec<Vec3<f64>>,
    pub transform: Transform,
    pub safety: SafetyBounds,
}

#[derive(Deserialize)]
struct TransformRaw {
    kind: String,
    #[serde(default)]
    params: serde_json::Value,
    #[serde(rename = "T")]
    t_total: f64,
}

#[derive(Deserialize)]
struct FormationConfigRaw {
    agents: usize,
    leaders: Vec<usize>,
    #[serde(default)]
    neighbors: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    weights: BTreeMap<String, Vec<f64>>,
    initial_positions: Vec<[f64; 3]>,
    transform: TransformRaw,
    safety: SafetyBounds,
}

fn param_f64(v: &serde_json::Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(|x| x.as_f64())
        .ok_or_else(|| Error::InvalidConfig(format!("transform params missing number `{key}`")))
}

impl FormationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FormationConfigRaw =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let parse_keys = |m: BTreeMap<String, Vec<f64>>| -> Result<BTreeMap<usize, Vec<f64>>> {
            m.into_iter()
                .map(|(k, v)| {
                    k.parse::<usize>()
                        .map(|k| (k, v))
                        .map_err(|_| Error::InvalidConfig(format!("bad agent key `{k}`")))
                })
                .collect()
        };
        let neighbors = raw
            .neighbors
            .into_iter()
            .map(|(k, v)| {
                k.parse::<usize>()
                    .map(|k| (k, v))
                    .map_err(|_| Error::InvalidConfig(format!("bad agent key `{k}`")))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let weights = parse_keys(raw.weights)?;
        let kind = match raw.transform.kind.as_str() {
            "translate" => TransformKind::Translate {
                offset: Vec3::new(
                    param_f64(&raw.transform.params, "x")?,
                    param_f64(&raw.transform.params, "y")?,
                    param_f64(&raw.transform.params, "z")?,
                ),
            },
            "scale" => TransformKind::Scale {
                factor: param_f64(&raw.transform.params, "factor")?,
            },
            "rotate_z" => TransformKind::RotateZ {
                angle: param_f64(&raw.transform.params, "angle")?,
            },
            other => {
                return Err(Error::InvalidConfig(format!("unknown transform kind `{other}`")))
            }
        };
        let config = Self {
            agents: raw.agents,
            leaders: raw.leaders,
            neighbors,
            weights,
            initial_positions: raw
                .initial_positions
                .iter()
                .map(|p| Vec3::new(p[0], p[1], p[2]))
                .collect(),
            transform: Transform {
                kind,
                t_total: raw.transform.t_total,
            },
            safety: raw.safety,
        };
        config.validate()?;
        Ok(config)
    }

    /// Check index ranges, leader/follower neighbor structure, weight
    /// positivity, and the sum-to-one constraint.
    pub fn validate(&self) -> Result<()> {
        let n = self.agents;
        if n == 0 {
            return Err(Error::InvalidConfig("formation needs at least one agent".into()));
        }
        if self.initial_positions.len() != n {
            return Err(Error::InvalidConfig(format!(
                "expected {n} initial positions, got {}",
                self.initial_positions.len()
            )));
        }
        if self.leaders.is_empty() {
            return Err(Error::InvalidConfig("formation needs at least one leader".into()));
        }
        let in_range = |i: usize| (1..=n).contains(&i);
        if let Some(&bad) = self.leaders.iter().find(|&&i| !in_range(i)) {
            return Err(Error::InvalidConfig(format!("leader index {bad} out of range")));
        }
        if !(self.transform.t_total > 0.0) {
            return Err(Error::InvalidConfig("transform ramp T must be positive".into()));
        }
        if !(self.safety.delta > 0.0 && self.safety.epsilon > 0.0 && self.safety.d_min > 0.0) {
            return Err(Error::InvalidConfig("safety bounds must be positive".into()));
        }
        for i in 1..=n {
            if self.is_leader(i) {
                if self.neighbors.get(&i).is_some_and(|v| !v.is_empty()) {
                    return Err(Error::InvalidConfig(format!(
                        "leader {i} must have no in-neighbors"
                    )));
                }
                continue;
            }
            let nbrs = self
                .neighbors
                .get(&i)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| {
                    Error::InvalidConfig(format!("follower {i} has no in-neighbors"))
                })?;
            if let Some(&bad) = nbrs.iter().find(|&&j| !in_range(j) || j == i) {
                return Err(Error::InvalidConfig(format!(
                    "follower {i} has invalid neighbor {bad}"
                )));
            }
            let w = self.weights.get(&i).ok_or_else(|| {
                Error::InvalidConfig(format!("follower {i} has no weights"))
            })?;
            if w.len() != nbrs.len() {
                return Err(Error::InvalidConfig(format!(
                    "follower {i}: {} weights for {} neighbors",
                    w.len(),
                    nbrs.len()
                )));
            }
            if w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidConfig(format!(
                    "follower {i} has a non-positive weight"
                )));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::InvalidConfig(format!(
                    "follower {i} weights sum to {sum}, not 1"
                )));
            }
        }
        Ok(())
    }

    pub fn is_leader(&self, i: usize) -> bool {
        self.leaders.contains(&i)
    }
}

/// Reference position of leader `i` at time `t`: the affine image of its
/// initial position, `Q(t) r_i(t0) + d(t)`.
pub fn leader_ref(i: usize, t: f64, config: &FormationConfig) -> Result<Vec3<f64>> {
    if !config.is_leader(i) {
        return Err(Error::NotALeader(i));
    }
    let (q, d) = config.transform.at(t);
    Ok(q * config.initial_positions[i - 1] + d)
}

/// Reference position of follower `i`: the weighted sum of its in-neighbors'
/// current positions, read from the supplied map.
pub fn follower_ref(
    i: usize,
    neighbor_positions: &BTreeMap<usize, Vec3<f64>>,
    config: &FormationConfig,
) -> Result<Vec3<f64>> {
    let nbrs = &config.neighbors[&i];
    let weights = &config.weights[&i];
    let mut acc = Vec3::zeros();
    for (&j, &w) in nbrs.iter().zip(weights) {
        let r = neighbor_positions
            .get(&j)
            .ok_or(Error::MissingNeighbor { follower: i, neighbor: j })?;
        acc += r * w;
    }
    Ok(acc)
}

/// Smallest singular value of `Q`, the separation bound `2(delta+epsilon)/
/// d_min`, and whether the transform passes.
pub fn safety_margin(q: &Mat3<f64>, safety: &SafetyBounds) -> (f64, f64, bool) {
    let lambda_min = q
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let threshold = 2.0 * (safety.delta + safety.epsilon) / safety.d_min;
    (lambda_min, threshold, lambda_min >= threshold)
}

/// Convenience beyond the formation model itself: least-squares affine
/// weights for a follower given its neighbors' initial positions, solving
/// `sum w_j p_j = p_i`, `sum w_j = 1` in the least-squares sense. Exact when
/// the neighbors affinely span space (four or more, non-coplanar).
pub fn weights_from_geometry(follower: &Vec3<f64>, neighbors: &[Vec3<f64>]) -> Result<Vec<f64>> {
    if neighbors.is_empty() {
        return Err(Error::InvalidConfig("no neighbors to weight".into()));
    }
    let k = neighbors.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(4, k);
    for (j, p) in neighbors.iter().enumerate() {
        a[(0, j)] = p.x;
        a[(1, j)] = p.y;
        a[(2, j)] = p.z;
        a[(3, j)] = 1.0;
    }
    let b = nalgebra::DVector::from_column_slice(&[follower.x, follower.y, follower.z, 1.0]);
    let svd = a.svd(true, true);
    let w = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(w.iter().copied().collect())
}

/// One safety-check row of a formation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyRow {
    pub t: f64,
    pub lambda_min: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Per-agent logs plus the per-step transform safety trace.
#[derive(Debug, Clone)]
pub struct FormationLog {
    pub agent_logs: Vec<SimLog<f64>>,
    pub safety: Vec<SafetyRow>,
    pub status: SimStatus,
}

/// Backward finite differences over the newest-first position history,
/// producing a flat sample for the controllers. Higher derivatives are
/// zeroed until enough history exists; followers' references are implicit,
/// so analytic derivatives are unavailable.
fn sample_from_history(history: &[Vec3<f64>], dt: f64) -> FlatSample<f64> {
    let mut s = FlatSample {
        r0: history[0],
        r1: Vec3::zeros(),
        r2: Vec3::zeros(),
        r3: Vec3::zeros(),
        r4: Vec3::zeros(),
        psi: 0.0,
        psi1: 0.0,
        psi2: 0.0,
    };
    let h = history;
    if h.len() >= 2 {
        s.r1 = (h[0] - h[1]) / dt;
    }
    if h.len() >= 3 {
        s.r2 = (h[0] - h[1] * 2.0 + h[2]) / (dt * dt);
    }
    if h.len() >= 4 {
        s.r3 = (h[0] - h[1] * 3.0 + h[2] * 3.0 - h[3]) / (dt * dt * dt);
    }
    if h.len() >= 5 {
        s.r4 = (h[0] - h[1] * 4.0 + h[2] * 6.0 - h[3] * 4.0 + h[4]) / (dt * dt * dt * dt);
    }
    s
}

const HISTORY_DEPTH: usize = 5;

enum AgentController {
    Snap(SnapController<f64>),
    Mellinger(crate::mellinger::MellingerController<f64>),
}

/// Run every agent's own controller in synchronous rounds: follower
/// references are computed from the previous tick's simulated neighbor
/// positions (snapshot isolation), and the transform safety margin is
/// evaluated and logged at every step. Any agent diverging (error beyond the
/// single-vehicle divergence radius, non-finite state, or a controller
/// singularity) halts the run with status `Diverged`.
pub fn run_formation(
    config: &FormationConfig,
    controller: &ControllerSpec<f64>,
    params: &VehicleParams<f64>,
    dt: f64,
    duration: f64,
) -> Result<FormationLog> {
    config.validate()?;
    params.validate()?;
    if !(dt > 0.0) || duration < dt {
        return Err(Error::InvalidConfig("need dt > 0 and duration >= dt".into()));
    }
    let n = config.agents;
    let steps = (duration / dt).round() as usize;

    let mut controllers: Vec<AgentController> = (0..n)
        .map(|_| match controller {
            ControllerSpec::Snap(g) => AgentController::Snap(SnapController::new(*g, params)),
            ControllerSpec::Mellinger(g) => {
                AgentController::Mellinger(crate::mellinger::MellingerController::new(*g))
            }
        })
        .collect();
    let mut states: Vec<RigidState<f64>> = config
        .initial_positions
        .iter()
        .map(|&r| RigidState::hover_at(r))
        .collect();
    let mut histories: Vec<Vec<Vec3<f64>>> = vec![Vec::new(); n];
    let mut logs: Vec<Vec<LogRow<f64>>> = vec![Vec::new(); n];
    let mut safety = Vec::with_capacity(steps + 1);
    let mut status = SimStatus::Completed;

    'time: for i in 0..=steps {
        let t = i as f64 * dt;
        let (q, _) = config.transform.at(t);
        let (lambda_min, threshold, pass) = safety_margin(&q, &config.safety);
        safety.push(SafetyRow { t, lambda_min, threshold, pass });

        // Snapshot of every agent's position from the previous integration.
        let snapshot: BTreeMap<usize, Vec3<f64>> =
            (1..=n).map(|a| (a, states[a - 1].r)).collect();

        let mut commands = Vec::with_capacity(n);
        for a in 1..=n {
            let r_ref = if config.is_leader(a) {
                leader_ref(a, t, config)?
            } else {
                follower_ref(a, &snapshot, config)?
            };
            let hist = &mut histories[a - 1];
            hist.insert(0, r_ref);
            hist.truncate(HISTORY_DEPTH);
            let reference = sample_from_history(hist, dt);

            let state = &states[a - 1];
            if !state.is_finite()
                || (state.r - reference.r0).norm() > crate::sim::DIVERGENCE_RADIUS
            {
                status = SimStatus::Diverged;
                break 'time;
            }
            let cmd = match &mut controllers[a - 1] {
                AgentController::Snap(c) => c.step(state, &reference, params, dt),
                AgentController::Mellinger(c) => {
                    c.step(state, &reference, &Vec3::zeros(), params)
                }
            };
            let cmd = match cmd {
                Ok(c) if c.p.is_finite() && c.tau.iter().all(|x| x.is_finite()) => c,
                _ => {
                    status = SimStatus::Diverged;
                    break 'time;
                }
            };
            let speeds = mixer_inverse(&cmd, params);
            let i_b = state.rot.i_b();
            logs[a - 1].push(LogRow {
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
            let (p_actual, tau_actual) = mixer_forward(&speeds.squared(), params);
            commands.push(ControlCommand { p: p_actual, tau: tau_actual });
        }

        if i < steps {
            for a in 0..n {
                match rk4_step(&states[a], &commands[a], dt, params) {
                    Ok(next) => states[a] = next,
                    Err(_) => {
                        status = SimStatus::Diverged;
                        break 'time;
                    }
                }
            }
        }
    }

    Ok(FormationLog {
        agent_logs: logs
            .into_iter()
            .map(|rows| SimLog { rows, status })
            .collect(),
        safety,
        status,
    })
}
