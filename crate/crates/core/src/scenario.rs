//! Scenario files, the time-stepped simulator and run records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::CalibratedModel;
use crate::equilibrium::{assemble_chain, solve_equilibrium, EquilibriumShape, Loads, Pose, STANDARD_GRAVITY};
use crate::error::VineError;
use crate::growth::{CalibrationTable, EventKind, GrowthEngine, GrowthEvent, GrowthPhase, GrowthState};
use crate::mechanics::{PressureFlag, PressureLimits, PressureState, TendonState};
use crate::robot::{JointId, RobotConfiguration, TendonId};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("runtime fault: {0}")]
    Runtime(#[from] VineError),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<RobotConfiguration>,
}

impl RobotRef {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            inline: None,
        }
    }

    pub fn resolve(&self, model: &CalibratedModel) -> Result<RobotConfiguration, ScenarioError> {
        match (&self.preset, &self.inline) {
            (Some(name), None) => model
                .preset(name)
                .map_err(|_| ScenarioError::Validation(format!("unknown robot preset '{name}'"))),
            (None, Some(config)) => {
                let config = if config.trunk_stiffness.is_some() && config.joints().all(|j| j.stiffness.is_some()) {
                    config.clone()
                } else {
                    model.calibrate(config.clone())?
                };
                config
                    .validate()
                    .map_err(|e| ScenarioError::Validation(e.to_string()))?;
                Ok(config)
            }
            _ => Err(ScenarioError::Validation(
                "robot needs exactly one of 'preset' or 'inline'".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    /// Gravitational acceleration, m/s², acting downward.
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_gravity() -> f64 {
    STANDARD_GRAVITY
}

fn default_dt() -> f64 {
    0.05
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            gravity: default_gravity(),
            dt: default_dt(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default)]
    pub deployed_length: Option<f64>,
    #[serde(default)]
    pub phase: Option<GrowthPhase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    SetTrunkPressure {
        pressure: f64,
    },
    SetJointPressure {
        joint: u32,
        pressure: f64,
    },
    SetTendonTension {
        tendon: u8,
        tension: f64,
    },
    /// Tail tension; any positive value switches to retraction.
    PullTail {
        tension: f64,
    },
    /// Point mass `offset` meters proximal of the tip; zero mass detaches.
    AttachPayload {
        mass: f64,
        #[serde(default)]
        offset: f64,
    },
    Grow {
        #[serde(default)]
        pressure: Option<f64>,
    },
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedAction {
    pub t: f64,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Assertion {
    Phase {
        t: f64,
        phase: GrowthPhase,
    },
    FinalPhase {
        phase: GrowthPhase,
    },
    LengthRange {
        t: f64,
        min: f64,
        max: f64,
    },
    JointStiffened {
        t: f64,
        joint: u32,
        #[serde(default = "yes")]
        stiffened: bool,
    },
    JointBendShare {
        t: f64,
        joint: u32,
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
    },
    JointRotation {
        t: f64,
        joint: u32,
        min_deg: f64,
        max_deg: f64,
    },
    TipDeflection {
        t: f64,
        min: f64,
        max: f64,
    },
    TipDeflectionDecreases {
        before: f64,
        after: f64,
    },
    NoBuckling,
    EventOrder {
        events: Vec<String>,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub robot: RobotRef,
    #[serde(default)]
    pub environment: Environment,
    #[serde(default)]
    pub initial: InitialState,
    pub duration_s: f64,
    #[serde(default)]
    pub actions: Vec<TimedAction>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

const GOLDEN: &[(&str, &str)] = &[
    ("crossing_stall", include_str!("../scenarios/crossing_stall.json")),
    ("shape_locking", include_str!("../scenarios/shape_locking.json")),
    (
        "cascading_retraction",
        include_str!("../scenarios/cascading_retraction.json"),
    ),
    ("payload_hold", include_str!("../scenarios/payload_hold.json")),
];

/// Names of the bundled reference scenarios.
pub fn golden_names() -> Vec<&'static str> {
    GOLDEN.iter().map(|(n, _)| *n).collect()
}

pub fn golden_source(name: &str) -> Option<&'static str> {
    GOLDEN.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

fn finite_nonneg(what: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::Validation(format!(
            "{what} must be finite and >= 0, got {v}"
        )))
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn golden(name: &str) -> Result<Self, ScenarioError> {
        let src =
            golden_source(name).ok_or_else(|| ScenarioError::Validation(format!("no bundled scenario '{name}'")))?;
        Self::from_json(src)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks the scenario against the resolved robot.
    pub fn validate(&self, config: &RobotConfiguration) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Validation(m));
        if self.format_version != FORMAT_VERSION {
            return bad(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if !(self.environment.dt.is_finite() && self.environment.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.environment.dt));
        }
        finite_nonneg("gravity", self.environment.gravity)?;
        finite_nonneg("duration_s", self.duration_s)?;
        if let Some(l) = self.initial.deployed_length {
            if !(0.0..=config.total_length() + 1e-9).contains(&l) {
                return bad(format!(
                    "initial deployed_length {l} outside [0, {}]",
                    config.total_length()
                ));
            }
        }
        let joints = config.joint_ids();
        let joint_ok = |j: u32| -> Result<(), ScenarioError> {
            if joints.contains(&JointId(j)) {
                Ok(())
            } else {
                Err(ScenarioError::Validation(format!(
                    "unknown joint {j} (robot has {})",
                    joints.len()
                )))
            }
        };
        let mut last = 0.0;
        for (i, a) in self.actions.iter().enumerate() {
            if !(a.t.is_finite() && a.t >= last) {
                return bad(format!("action {i} at t={} is out of time order", a.t));
            }
            if a.t > self.duration_s + 1e-9 {
                return bad(format!("action {i} at t={} is after the end of the run", a.t));
            }
            last = a.t;
            match &a.action {
                Action::SetTrunkPressure { pressure } => finite_nonneg("pressure", *pressure)?,
                Action::SetJointPressure { joint, pressure } => {
                    joint_ok(*joint)?;
                    finite_nonneg("pressure", *pressure)?;
                }
                Action::SetTendonTension { tendon, tension } => {
                    TendonId::new(*tendon).map_err(|e| ScenarioError::Validation(e.to_string()))?;
                    finite_nonneg("tension", *tension)?;
                }
                Action::PullTail { tension } => finite_nonneg("tension", *tension)?,
                Action::AttachPayload { mass, offset } => {
                    finite_nonneg("mass", *mass)?;
                    finite_nonneg("offset", *offset)?;
                }
                Action::Grow { pressure } => {
                    if let Some(p) = pressure {
                        finite_nonneg("pressure", *p)?;
                    }
                }
                Action::Stop => {}
            }
        }
        for a in &self.assertions {
            match a {
                Assertion::JointStiffened { joint, .. }
                | Assertion::JointBendShare { joint, .. }
                | Assertion::JointRotation { joint, .. } => joint_ok(*joint)?,
                _ => {}
            }
        }
        Ok(())
    }
}

/// State vector of one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub deployed_length: f64,
    pub phase: GrowthPhase,
    pub active_joint: Option<JointId>,
    pub trunk_pressure: f64,
    pub joint_pressures: BTreeMap<JointId, f64>,
    pub joint_ei: BTreeMap<JointId, f64>,
    /// Rotation across each deployed joint, radians.
    pub joint_rotation: BTreeMap<JointId, f64>,
    pub joint_bend_share: BTreeMap<JointId, f64>,
    pub locked_joints: Vec<JointId>,
    pub tendon_tensions: [f64; 4],
    pub tail_tension: f64,
    pub payload_mass: f64,
    pub tip: [f64; 2],
    pub tip_heading: f64,
    pub tip_deflection: f64,
    pub localization_index: f64,
    pub buckled: bool,
    pub insufficient_tension: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub pressures: PressureState,
    pub tendons: TendonState,
    pub tail_tension: f64,
    pub payload_mass: f64,
    pub payload_offset: f64,
    pub halted: bool,
}

/// One robot, its inputs and its growth state, advanced in fixed steps.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: RobotConfiguration,
    table: CalibrationTable,
    limits: PressureLimits,
    env: Environment,
    inputs: Inputs,
    /// Stress-free curvature of joints locked while bent.
    locks: BTreeMap<JointId, f64>,
    engine: GrowthEngine,
    steps: u64,
    shape: Option<EquilibriumShape>,
}

impl Simulator {
    pub fn new(
        config: RobotConfiguration,
        table: CalibrationTable,
        env: Environment,
        initial: &InitialState,
    ) -> Result<Self, ScenarioError> {
        config.validate()?;
        table.get(config.kind)?;
        let pressures = config
            .joint_ids()
            .into_iter()
            .fold(PressureState::new(0.0), |s, id| s.with_joint(id, 0.0));
        let mut state = GrowthState::at_length(initial.deployed_length.unwrap_or(0.0).min(config.total_length()));
        if let Some(p) = initial.phase {
            state.phase = p;
        }
        Ok(Self {
            inputs: Inputs {
                pressures,
                tendons: TendonState::slack(config.tendon_radial_offset),
                tail_tension: 0.0,
                payload_mass: 0.0,
                payload_offset: 0.0,
                halted: false,
            },
            config,
            table,
            limits: PressureLimits::default(),
            env,
            locks: BTreeMap::new(),
            engine: GrowthEngine::new(state),
            steps: 0,
            shape: None,
        })
    }

    pub fn config(&self) -> &RobotConfiguration {
        &self.config
    }

    pub fn inputs(&self) -> &Inputs {
        &self.inputs
    }

    pub fn state(&self) -> &GrowthState {
        &self.engine.state
    }

    pub fn events(&self) -> &[GrowthEvent] {
        &self.engine.events
    }

    pub fn locks(&self) -> &BTreeMap<JointId, f64> {
        &self.locks
    }

    pub fn dt(&self) -> f64 {
        self.env.dt
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.env.dt
    }

    pub fn loads(&self) -> Loads {
        Loads::vertical(self.env.gravity, self.inputs.payload_mass).with_payload_offset(self.inputs.payload_offset)
    }

    fn engaged(p: &PressureState, id: JointId) -> bool {
        p.joint(id).unwrap_or(0.0) > p.trunk_pressure
    }

    fn check_pressures(&self, p: &PressureState) -> Result<(), VineError> {
        let trunk_burst = self.table.get(self.config.kind)?.burst;
        if p.trunk_pressure >= trunk_burst {
            return Err(VineError::Overpressure {
                what: "trunk".into(),
                pressure: p.trunk_pressure,
                limit: trunk_burst,
            });
        }
        let report = p.validate(&self.limits)?;
        if let Some((id, _)) = report.flags.iter().find(|(_, f)| *f == PressureFlag::AboveBurst) {
            let pressure = p.joint(*id).unwrap_or(0.0);
            return Err(VineError::Overpressure {
                what: format!("joint {id}"),
                pressure,
                limit: self.limits.burst_for(p.trunk_pressure),
            });
        }
        Ok(())
    }

    fn set_pressures(&mut self, next: PressureState) -> Result<(), VineError> {
        self.check_pressures(&next)?;
        let before = self.current_shape()?.clone();
        let prev = std::mem::replace(&mut self.inputs.pressures, next);
        for id in self.config.joint_ids() {
            let (was, now) = (Self::engaged(&prev, id), Self::engaged(&self.inputs.pressures, id));
            if !was && now {
                let kappa = before
                    .joints
                    .iter()
                    .position(|j| *j == Some(id))
                    .map(|i| before.curvatures[i])
                    .unwrap_or(0.0);
                self.locks.insert(id, kappa);
                self.engine
                    .log(EventKind::JointPressurized { joint: id }, &self.inputs.pressures);
            } else if was && !now {
                self.locks.remove(&id);
                self.engine
                    .log(EventKind::JointReleased { joint: id }, &self.inputs.pressures);
            }
        }
        self.shape = None;
        Ok(())
    }

    /// Applies one operator or scenario action.
    pub fn apply(&mut self, action: &Action) -> Result<(), VineError> {
        let nonneg = |what: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(VineError::Domain(format!("{what} must be finite and >= 0, got {v}")))
            }
        };
        match action {
            Action::SetTrunkPressure { pressure } => {
                let mut next = self.inputs.pressures.clone();
                next.trunk_pressure = nonneg("pressure", *pressure)?;
                self.set_pressures(next)?;
            }
            Action::Grow { pressure } => {
                if let Some(p) = pressure {
                    let mut next = self.inputs.pressures.clone();
                    next.trunk_pressure = nonneg("pressure", *p)?;
                    self.set_pressures(next)?;
                }
                self.inputs.tail_tension = 0.0;
                self.inputs.halted = false;
            }
            Action::SetJointPressure { joint, pressure } => {
                let id = JointId(*joint);
                if !self.config.joint_ids().contains(&id) {
                    return Err(VineError::NotFound(format!("joint {joint}")));
                }
                let next = self
                    .inputs
                    .pressures
                    .clone()
                    .with_joint(id, nonneg("pressure", *pressure)?);
                self.set_pressures(next)?;
            }
            Action::SetTendonTension { tendon, tension } => {
                let id = TendonId::new(*tendon)?;
                self.inputs.tendons = self.inputs.tendons.with_tension(id, nonneg("tension", *tension)?);
                self.shape = None;
            }
            Action::PullTail { tension } => {
                self.inputs.tail_tension = nonneg("tension", *tension)?;
                self.inputs.halted = false;
            }
            Action::AttachPayload { mass, offset } => {
                self.inputs.payload_mass = nonneg("mass", *mass)?;
                self.inputs.payload_offset = nonneg("offset", *offset)?;
                self.engine
                    .log(EventKind::PayloadAttached { mass: *mass }, &self.inputs.pressures);
                self.shape = None;
            }
            Action::Stop => {
                self.inputs.tail_tension = 0.0;
                self.inputs.halted = true;
            }
        }
        Ok(())
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<(), VineError> {
        let dt = self.env.dt;
        let before = self.engine.state.deployed_length;
        if self.inputs.halted {
            self.engine.state.elapsed += dt;
        } else if self.inputs.tail_tension > 0.0 {
            self.engine.retract(
                &self.config,
                &self.table,
                &self.inputs.pressures,
                self.inputs.tail_tension,
                dt,
            )?;
        } else {
            self.engine
                .grow(&self.config, &self.table, &self.inputs.pressures, dt)?;
        }
        self.steps += 1;
        self.engine.state.elapsed = self.time();
        if self.engine.state.deployed_length != before {
            self.shape = None;
        }
        Ok(())
    }

    /// Solves a chain for the given inputs without touching the simulator.
    pub fn solve_with(
        &self,
        inputs: &Inputs,
        locks: &BTreeMap<JointId, f64>,
        length: f64,
    ) -> Result<EquilibriumShape, VineError> {
        let mut chain = assemble_chain(&self.config, &inputs.pressures)?.truncated(length);
        for (id, kappa) in locks {
            chain.lock_joint(*id, *kappa);
        }
        let loads = Loads::vertical(self.env.gravity, inputs.payload_mass).with_payload_offset(inputs.payload_offset);
        solve_equilibrium(&chain, &inputs.tendons, &loads)
    }

    pub fn current_shape(&mut self) -> Result<&EquilibriumShape, VineError> {
        if self.shape.is_none() {
            let s = self.solve_with(&self.inputs, &self.locks, self.engine.state.deployed_length)?;
            self.shape = Some(s);
        }
        Ok(self.shape.as_ref().expect("shape just solved"))
    }

    /// Shape after applying `actions` to a copy of the current state.
    pub fn preview(&self, actions: &[Action]) -> Result<(EquilibriumShape, Simulator), VineError> {
        let mut copy = self.clone();
        for a in actions {
            copy.apply(a)?;
        }
        let shape = copy.current_shape()?.clone();
        Ok((shape, copy))
    }

    pub fn sample(&mut self) -> Result<Sample, VineError> {
        let shape = self.current_shape()?.clone();
        let p = &self.inputs.pressures;
        let mut joint_ei = BTreeMap::new();
        for j in self.config.joints() {
            let ei = crate::mechanics::effective_bending_stiffness(j, p.joint(j.id).unwrap_or(0.0), p.trunk_pressure)?;
            joint_ei.insert(j.id, ei);
        }
        let total_bend = shape.total_bend();
        let mut joint_rotation = BTreeMap::new();
        let mut joint_bend_share = BTreeMap::new();
        for (i, j) in shape.joints.iter().enumerate() {
            if let Some(id) = j {
                joint_rotation.insert(*id, shape.rotations[i]);
                let share = if total_bend < 1e-9 {
                    0.0
                } else {
                    shape.rotations[i].abs() / total_bend
                };
                joint_bend_share.insert(*id, share);
            }
        }
        let state = &self.engine.state;
        Ok(Sample {
            t: self.time(),
            deployed_length: state.deployed_length,
            phase: state.phase,
            active_joint: state.active_joint,
            trunk_pressure: p.trunk_pressure,
            joint_pressures: p.joint_pressures.clone(),
            joint_ei,
            joint_rotation,
            joint_bend_share,
            locked_joints: self.locks.keys().copied().collect(),
            tendon_tensions: self.inputs.tendons.tensions,
            tail_tension: self.inputs.tail_tension,
            payload_mass: self.inputs.payload_mass,
            tip: [shape.tip.x, shape.tip.y],
            tip_heading: shape.tip.heading,
            tip_deflection: shape.tip_deflection,
            localization_index: shape.localization_index,
            buckled: shape.buckled,
            insufficient_tension: state.insufficient_tension,
        })
    }

    pub fn centerline(&mut self) -> Result<Vec<[f64; 2]>, VineError> {
        Ok(points(&self.current_shape()?.centerline))
    }
}

pub fn points(poses: &[Pose]) -> Vec<[f64; 2]> {
    poses.iter().map(|p| [p.x, p.y]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub robot: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_note: Option<String>,
    pub dt: f64,
    pub joint_ids: Vec<JointId>,
    pub samples: Vec<Sample>,
    pub events: Vec<GrowthEvent>,
    pub assertions: Vec<AssertionResult>,
    /// Centerline once per simulated second and at the end.
    pub frames: Vec<Frame>,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn final_sample(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        self.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn event_labels(&self) -> Vec<String> {
        self.events.iter().map(GrowthEvent::label).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(note) = &self.model_note {
            let _ = writeln!(out, "# {note}");
        }
        out.push_str("t_s,deployed_length_m,phase,p_t_Pa");
        for id in &self.joint_ids {
            let _ = write!(out, ",p_j_{id}_Pa");
        }
        for k in 1..=4 {
            let _ = write!(out, ",T_{k}_N");
        }
        out.push_str(",tip_x_m,tip_y_m,tip_deflection_m,localization_index\n");
        for s in &self.samples {
            let _ = write!(
                out,
                "{},{},{},{}",
                num(s.t, 3),
                num(s.deployed_length, 6),
                s.phase,
                num(s.trunk_pressure, 1)
            );
            for id in &self.joint_ids {
                let _ = write!(out, ",{}", num(s.joint_pressures.get(id).copied().unwrap_or(0.0), 1));
            }
            for t in s.tendon_tensions {
                let _ = write!(out, ",{}", num(t, 4));
            }
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                num(s.tip[0], 6),
                num(s.tip[1], 6),
                num(s.tip_deflection, 6),
                num(s.localization_index, 6)
            );
        }
        out
    }
}

/// Fixed-precision formatting without negative zero.
fn num(v: f64, precision: usize) -> String {
    let s = format!("{v:.precision$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn within(v: f64, min: f64, max: f64) -> bool {
    v >= min - 1e-12 && v <= max + 1e-12
}

fn evaluate(a: &Assertion, record: &RunRecord) -> AssertionResult {
    let missing = || AssertionResult {
        description: format!("{a:?}"),
        passed: false,
        detail: "no sample".into(),
    };
    let result = |description: String, passed: bool, detail: String| AssertionResult {
        description,
        passed,
        detail,
    };
    match a {
        Assertion::Phase { t, phase } => {
            let Some(s) = record.sample_at(*t) else {
                return missing();
            };
            result(
                format!("phase at t={t} is {phase}"),
                s.phase == *phase,
                format!("phase {}", s.phase),
            )
        }
        Assertion::FinalPhase { phase } => {
            let Some(s) = record.final_sample() else {
                return missing();
            };
            result(
                format!("final phase is {phase}"),
                s.phase == *phase,
                format!("phase {}", s.phase),
            )
        }
        Assertion::LengthRange { t, min, max } => {
            let Some(s) = record.sample_at(*t) else {
                return missing();
            };
            result(
                format!("length at t={t} in [{min}, {max}] m"),
                within(s.deployed_length, *min, *max),
                format!("length {:.6} m", s.deployed_length),
            )
        }
        Assertion::JointStiffened { t, joint, stiffened } => {
            let Some(s) = record.sample_at(*t) else {
                return missing();
            };
            let id = JointId(*joint);
            let engaged = s.joint_pressures.get(&id).copied().unwrap_or(0.0) > s.trunk_pressure;
            let word = if *stiffened { "stiffened" } else { "vented" };
            result(
                format!("joint {joint} {word} at t={t}"),
                engaged == *stiffened,
                format!("EI {:.4} N*m^2", s.joint_ei.get(&id).copied().unwrap_or(f64::NAN)),
            )
        }
        Assertion::JointBendShare { t, joint, min, max } => {
            let Some(s) = record.sample_at(*t) else {
                return missing();
            };
            let share = s.joint_bend_share.get(&JointId(*joint)).copied().unwrap_or(0.0);
            let (lo, hi) = (min.unwrap_or(0.0), max.unwrap_or(1.0));
            result(
                format!("joint {joint} bend share at t={t} in [{lo}, {hi}]"),
                within(share, lo, hi),
                format!("share {share:.4}"),
            )
        }
        Assertion::JointRotation {
            t,
            joint,
            min_deg,
            max_deg,
        } => {
            let Some(s) = record.sample_at(*t) else {
                return missing();
            };
            let deg = s
                .joint_rotation
                .get(&JointId(*joint))
                .copied()
                .unwrap_or(0.0)
                .to_degrees();
            result(
                format!("joint {joint} rotation at t={t} in [{min_deg}, {max_deg}] deg"),
                within(deg, *min_deg, *max_deg),
                format!("rotation {deg:.2} deg"),
            )
        }
        Assertion::TipDeflection { t, min, max } => {
            let Some(s) = record.sample_at(*t) else {
                return missing();
            };
            result(
                format!("tip deflection at t={t} in [{min}, {max}] m"),
                within(s.tip_deflection, *min, *max),
                format!("deflection {:.6} m", s.tip_deflection),
            )
        }
        Assertion::TipDeflectionDecreases { before, after } => {
            let (Some(a), Some(b)) = (record.sample_at(*before), record.sample_at(*after)) else {
                return missing();
            };
            // sag is the tip drop below the base, payload included
            let sag = |s: &Sample| -s.tip[1];
            result(
                format!("tip sag decreases from t={before} to t={after}"),
                sag(b) < sag(a),
                format!("tip height {:.6} -> {:.6} m", a.tip[1], b.tip[1]),
            )
        }
        Assertion::NoBuckling => {
            let first = record.samples.iter().find(|s| s.buckled);
            result(
                "no buckling flag during the run".into(),
                first.is_none(),
                first.map_or("never flagged".into(), |s| format!("flagged at t={:.3}", s.t)),
            )
        }
        Assertion::EventOrder { events } => {
            let labels = record.event_labels();
            let mut it = labels.iter();
            let missing_label = events.iter().find(|e| !it.any(|l| l == *e));
            result(
                format!("events in order: {}", events.join(" < ")),
                missing_label.is_none(),
                missing_label.map_or("all found in order".into(), |e| {
                    format!("'{e}' missing or out of order")
                }),
            )
        }
    }
}

/// Replays a scenario deterministically.
pub fn run_scenario(scenario: &Scenario, model: &CalibratedModel) -> Result<RunRecord, ScenarioError> {
    let config = scenario.robot.resolve(model)?;
    scenario.validate(&config)?;
    let mut sim = Simulator::new(config, model.table.clone(), scenario.environment, &scenario.initial)?;
    let dt = scenario.environment.dt;
    let steps = (scenario.duration_s / dt - 1e-9).ceil().max(0.0) as u64;
    let per_frame = (1.0 / dt).round().max(1.0) as u64;
    let mut pending = scenario.actions.iter().peekable();
    let mut samples = Vec::with_capacity(steps as usize + 1);
    let mut frames = Vec::new();

    let mut apply_due = |sim: &mut Simulator| -> Result<(), ScenarioError> {
        while let Some(a) = pending.next_if(|a| a.t <= sim.time() + 1e-9) {
            sim.apply(&a.action)?;
        }
        Ok(())
    };
    apply_due(&mut sim)?;
    samples.push(sim.sample()?);
    frames.push(Frame {
        t: 0.0,
        points: sim.centerline()?,
    });
    for k in 1..=steps {
        sim.step()?;
        apply_due(&mut sim)?;
        samples.push(sim.sample()?);
        if k % per_frame == 0 || k == steps {
            frames.push(Frame {
                t: sim.time(),
                points: sim.centerline()?,
            });
        }
    }
    let mut record = RunRecord {
        scenario: scenario.name.clone(),
        robot: sim.config().name.clone(),
        model_note: sim.config().kind.model_note().map(String::from),
        dt,
        joint_ids: sim.config().joint_ids(),
        samples,
        events: sim.events().to_vec(),
        assertions: Vec::new(),
        frames,
    };
    record.assertions = scenario.assertions.iter().map(|a| evaluate(a, &record)).collect();
    Ok(record)
}
