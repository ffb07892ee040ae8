//! Wire types shared by the session service and its clients.
//!
//! Operators send one command per line, either as text
//! (`set joint 1 pressure 15000`) or as a JSON object. The session answers
//! with newline-delimited [`SessionMessage`]s.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::CalibratedModel;
use crate::equilibrium::{assemble_chain, solve_equilibrium, EquilibriumShape, Loads, STANDARD_GRAVITY};
use crate::error::VineError;
use crate::growth::{GrowthEvent, GrowthPhase};
use crate::mechanics::{effective_bending_stiffness, PressureState, TendonState};
use crate::robot::{JointId, RobotConfiguration};
use crate::scenario::{
    points, Action, Environment, InitialState, RobotRef, Sample, Scenario, ScenarioError, Simulator,
};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct CommandError(pub String);

fn bad(msg: impl Into<String>) -> CommandError {
    CommandError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Set,
    Grow,
    Retract,
    Attach,
    Stop,
}

/// One operator command. `target` is `trunk`, `tail`, `joint:N` or
/// `tendon:K` for `set`, and unused otherwise. `t` schedules the command at
/// an absolute simulation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Command {
    pub verb: Verb,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl Command {
    fn new(verb: Verb, target: Option<String>, value: Option<f64>) -> Self {
        Self {
            verb,
            target,
            value,
            t: None,
            id: None,
        }
    }

    /// Parses a text or JSON command line.
    pub fn parse(line: &str) -> Result<Self, CommandError> {
        let line = line.trim();
        if line.starts_with('{') {
            return serde_json::from_str(line).map_err(|e| bad(format!("invalid JSON command: {e}")));
        }
        let mut words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
        if words.is_empty() {
            return Err(bad("empty command"));
        }
        let mut t = None;
        if let Some(pos) = words.iter().position(|w| w == "at") {
            if pos + 2 != words.len() {
                return Err(bad("'at' must be followed by exactly one time"));
            }
            t = Some(number(&words[pos + 1])?);
            words.truncate(pos);
        }
        let w: Vec<&str> = words.iter().map(String::as_str).collect();
        let mut cmd = match w.as_slice() {
            ["set", "trunk", "pressure", v] => Self::new(Verb::Set, Some("trunk".into()), Some(number(v)?)),
            ["set", "tail", "tension", v] => Self::new(Verb::Set, Some("tail".into()), Some(number(v)?)),
            ["set", "joint", n, "pressure", v] => {
                let n: u32 = n.parse().map_err(|_| bad(format!("bad joint number '{n}'")))?;
                Self::new(Verb::Set, Some(format!("joint:{n}")), Some(number(v)?))
            }
            ["set", "tendon", k, "tension", v] => {
                let k: u8 = k.parse().map_err(|_| bad(format!("bad tendon number '{k}'")))?;
                Self::new(Verb::Set, Some(format!("tendon:{k}")), Some(number(v)?))
            }
            ["grow"] => Self::new(Verb::Grow, None, None),
            ["grow", v] => Self::new(Verb::Grow, None, Some(number(v)?)),
            ["retract", v] => Self::new(Verb::Retract, None, Some(number(v)?)),
            ["attach", v] | ["attach", "payload", v] => Self::new(Verb::Attach, None, Some(number(v)?)),
            ["stop"] => Self::new(Verb::Stop, None, None),
            _ => return Err(bad(format!("unrecognized command '{line}'"))),
        };
        cmd.t = t;
        Ok(cmd)
    }

    pub fn to_action(&self) -> Result<Action, CommandError> {
        let value = |what: &str| self.value.ok_or_else(|| bad(format!("{what} needs a value")));
        Ok(match self.verb {
            Verb::Set => {
                let target = self.target.as_deref().ok_or_else(|| bad("set needs a target"))?;
                match target.split_once(':') {
                    None if target == "trunk" => Action::SetTrunkPressure {
                        pressure: value("set trunk")?,
                    },
                    None if target == "tail" => Action::PullTail {
                        tension: value("set tail")?,
                    },
                    Some(("joint", n)) => Action::SetJointPressure {
                        joint: n.parse().map_err(|_| bad(format!("bad joint '{n}'")))?,
                        pressure: value("set joint")?,
                    },
                    Some(("tendon", k)) => Action::SetTendonTension {
                        tendon: k.parse().map_err(|_| bad(format!("bad tendon '{k}'")))?,
                        tension: value("set tendon")?,
                    },
                    _ => return Err(bad(format!("unknown target '{target}'"))),
                }
            }
            Verb::Grow => Action::Grow { pressure: self.value },
            Verb::Retract => Action::PullTail {
                tension: value("retract")?,
            },
            Verb::Attach => Action::AttachPayload {
                mass: value("attach")?,
                offset: 0.0,
            },
            Verb::Stop => Action::Stop,
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value.map(|v| format!(" {v}")).unwrap_or_default();
        match (self.verb, self.target.as_deref().and_then(|t| t.split_once(':'))) {
            (Verb::Set, Some((kind, n))) => {
                let what = if kind == "tendon" { "tension" } else { "pressure" };
                write!(f, "set {kind} {n} {what}{v}")?
            }
            (Verb::Set, None) => {
                let target = self.target.as_deref().unwrap_or("?");
                let what = if target == "tail" { "tension" } else { "pressure" };
                write!(f, "set {target} {what}{v}")?
            }
            (Verb::Grow, _) => write!(f, "grow{v}")?,
            (Verb::Retract, _) => write!(f, "retract{v}")?,
            (Verb::Attach, _) => write!(f, "attach payload{v}")?,
            (Verb::Stop, _) => write!(f, "stop")?,
        }
        if let Some(t) = self.t {
            write!(f, " at {t}")?;
        }
        Ok(())
    }
}

fn number(s: &str) -> Result<f64, CommandError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(bad(format!("'{s}' is not a number"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointView {
    pub id: JointId,
    /// Distal end of the joint.
    pub position: [f64; 2],
    pub rotation_deg: f64,
    pub ei: f64,
    pub pressure: f64,
    pub locked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeView {
    pub centerline: Vec<[f64; 2]>,
    pub joints: Vec<JointView>,
    pub tip: [f64; 2],
    pub tip_heading_deg: f64,
    pub tip_deflection: f64,
    pub localization_index: f64,
    pub buckled: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_note: Option<String>,
}

impl ShapeView {
    pub fn build(
        config: &RobotConfiguration,
        pressures: &PressureState,
        locks: &BTreeMap<JointId, f64>,
        shape: &EquilibriumShape,
    ) -> Result<Self, VineError> {
        let mut joints = Vec::new();
        for (i, j) in shape.joints.iter().enumerate() {
            let Some(id) = j else { continue };
            let module = config
                .joints()
                .find(|m| m.id == *id)
                .ok_or_else(|| VineError::NotFound(format!("joint {id}")))?;
            let pressure = pressures.joint(*id).unwrap_or(0.0);
            let end = shape.end_poses[i];
            joints.push(JointView {
                id: *id,
                position: [end.x, end.y],
                rotation_deg: shape.rotations[i].to_degrees(),
                ei: effective_bending_stiffness(module, pressure, pressures.trunk_pressure)?,
                pressure,
                locked: locks.contains_key(id),
            });
        }
        Ok(Self {
            centerline: points(&shape.centerline),
            joints,
            tip: [shape.tip.x, shape.tip.y],
            tip_heading_deg: shape.tip.heading.to_degrees(),
            tip_deflection: shape.tip_deflection,
            localization_index: shape.localization_index,
            buckled: shape.buckled,
            iterations: shape.iterations,
            model_note: config.kind.model_note().map(String::from),
        })
    }
}

fn default_gravity() -> f64 {
    STANDARD_GRAVITY
}

/// A stateless equilibrium query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub robot: RobotRef,
    /// Everted length; full length when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deployed_length: Option<f64>,
    #[serde(default)]
    pub trunk_pressure: f64,
    #[serde(default)]
    pub joint_pressures: BTreeMap<JointId, f64>,
    #[serde(default)]
    pub tendon_tensions: [f64; 4],
    #[serde(default)]
    pub payload_mass: f64,
    #[serde(default)]
    pub payload_offset: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    /// Rest curvature of joints locked while bent.
    #[serde(default)]
    pub locks: BTreeMap<JointId, f64>,
}

impl SolveRequest {
    pub fn solve(&self, model: &CalibratedModel) -> Result<ShapeView, ScenarioError> {
        let config = self.robot.resolve(model)?;
        let ids = config.joint_ids();
        let mut pressures = ids
            .iter()
            .fold(PressureState::new(self.trunk_pressure), |s, id| s.with_joint(*id, 0.0));
        for (id, p) in &self.joint_pressures {
            if !ids.contains(id) {
                return Err(ScenarioError::Validation(format!("robot has no joint {id}")));
            }
            pressures = pressures.with_joint(*id, *p);
        }
        let mut tendons = TendonState::slack(config.tendon_radial_offset);
        tendons.tensions = self.tendon_tensions;
        tendons.validate(crate::mechanics::TRUNK_RADIUS)?;
        let length = self.deployed_length.unwrap_or_else(|| config.total_length());
        if !(length.is_finite() && length >= 0.0) {
            return Err(ScenarioError::Validation(format!(
                "deployed length {length} must be >= 0"
            )));
        }
        let mut chain = assemble_chain(&config, &pressures)?.truncated(length);
        for (id, kappa) in &self.locks {
            chain.lock_joint(*id, *kappa);
        }
        if !(self.gravity.is_finite() && self.payload_mass.is_finite() && self.payload_mass >= 0.0) {
            return Err(ScenarioError::Validation(
                "gravity and payload must be finite, payload >= 0".into(),
            ));
        }
        let loads = Loads::vertical(self.gravity, self.payload_mass).with_payload_offset(self.payload_offset);
        let shape = solve_equilibrium(&chain, &tendons, &loads)?;
        Ok(ShapeView::build(&config, &pressures, &self.locks, &shape)?)
    }
}

/// Either a built-in scenario by name or a full scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RunRequest {
    Golden(String),
    Scenario(Box<Scenario>),
}

impl RunRequest {
    pub fn scenario(&self) -> Result<Scenario, ScenarioError> {
        match self {
            RunRequest::Golden(name) => Scenario::golden(name),
            RunRequest::Scenario(s) => Ok((**s).clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreviewRequest {
    pub commands: Vec<Command>,
}

/// What-if result. `solve` is the stateless request that reproduces
/// `shape` through the solve endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewResponse {
    pub solve: SolveRequest,
    pub shape: ShapeView,
    pub phase: GrowthPhase,
}

fn default_rate() -> f64 {
    20.0
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    pub robot: RobotRef,
    /// Snapshot rate, wall-clock Hz.
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
    /// Simulated seconds per wall-clock second.
    #[serde(default = "default_scale")]
    pub time_scale: f64,
    #[serde(default)]
    pub environment: Environment,
    #[serde(default)]
    pub initial: InitialState,
}

impl CreateSessionRequest {
    pub fn new(robot: RobotRef) -> Self {
        Self {
            robot,
            rate_hz: default_rate(),
            time_scale: default_scale(),
            environment: Environment::default(),
            initial: InitialState::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.rate_hz > 0.0 && self.rate_hz <= 1000.0) {
            return Err(ScenarioError::Validation(format!(
                "rate_hz {} outside (0, 1000]",
                self.rate_hz
            )));
        }
        if !(self.time_scale > 0.0 && self.time_scale <= 1000.0) {
            return Err(ScenarioError::Validation(format!(
                "time_scale {} outside (0, 1000]",
                self.time_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seq: u64,
    pub t: f64,
    pub state: Sample,
    /// Events since the previous snapshot.
    pub events: Vec<GrowthEvent>,
    pub shape: ShapeView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionMessage {
    Hello {
        session: String,
        robot: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model_note: Option<String>,
        joints: Vec<JointId>,
        dt: f64,
        rate_hz: f64,
        time_scale: f64,
    },
    Snapshot(Box<Snapshot>),
    Ack {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        command: String,
        /// Simulation time the command takes effect.
        t: f64,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        message: String,
    },
    Closed {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
    pub hello: SessionMessage,
}

/// Error payload of every non-2xx response. `kind` is one of `parse`,
/// `validation`, `runtime`, `not_found`, `io` or `internal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub sessions: usize,
}

/// Simulation side of a live session: the simulator, scheduled commands and
/// the stream cursor. Owns no timers; the caller decides when to tick.
#[derive(Debug, Clone)]
pub struct SessionCore {
    robot: RobotRef,
    sim: Simulator,
    gravity: f64,
    rate_hz: f64,
    time_scale: f64,
    queue: VecDeque<Command>,
    seq: u64,
    event_cursor: usize,
    carry: f64,
}

impl SessionCore {
    pub fn new(req: &CreateSessionRequest, model: &CalibratedModel) -> Result<Self, ScenarioError> {
        req.validate()?;
        let config = req.robot.resolve(model)?;
        let sim = Simulator::new(config, model.table.clone(), req.environment, &req.initial)?;
        Ok(Self {
            robot: req.robot.clone(),
            sim,
            gravity: req.environment.gravity,
            rate_hz: req.rate_hz,
            time_scale: req.time_scale,
            queue: VecDeque::new(),
            seq: 0,
            event_cursor: 0,
            carry: 0.0,
        })
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    /// Simulated seconds per tick.
    pub fn tick_span(&self) -> f64 {
        self.time_scale / self.rate_hz
    }

    pub fn hello(&self, session: &str) -> SessionMessage {
        SessionMessage::Hello {
            session: session.to_string(),
            robot: self.sim.config().name.clone(),
            model_note: self.sim.config().kind.model_note().map(String::from),
            joints: self.sim.config().joint_ids(),
            dt: self.sim.dt(),
            rate_hz: self.rate_hz,
            time_scale: self.time_scale,
        }
    }

    /// Parses and applies (or schedules) one command line.
    pub fn handle_line(&mut self, line: &str) -> SessionMessage {
        match Command::parse(line) {
            Ok(cmd) => self.handle(cmd),
            Err(e) => SessionMessage::Error { id: None, message: e.0 },
        }
    }

    pub fn handle(&mut self, cmd: Command) -> SessionMessage {
        let action = match cmd.to_action() {
            Ok(a) => a,
            Err(e) => {
                return SessionMessage::Error {
                    id: cmd.id,
                    message: e.0,
                }
            }
        };
        let now = self.sim.time();
        match cmd.t {
            Some(t) if !t.is_finite() => SessionMessage::Error {
                id: cmd.id,
                message: format!("bad schedule time {t}"),
            },
            Some(t) if t > now + 1e-9 => {
                let pos = self
                    .queue
                    .iter()
                    .position(|q| q.t.unwrap_or(0.0) > t)
                    .unwrap_or(self.queue.len());
                let ack = SessionMessage::Ack {
                    id: cmd.id.clone(),
                    command: cmd.to_string(),
                    t,
                };
                self.queue.insert(pos, cmd);
                ack
            }
            _ => match self.sim.apply(&action) {
                Ok(()) => SessionMessage::Ack {
                    id: cmd.id.clone(),
                    command: cmd.to_string(),
                    t: now,
                },
                Err(e) => SessionMessage::Error {
                    id: cmd.id,
                    message: e.to_string(),
                },
            },
        }
    }

    /// Advances by one tick of simulated time and returns the messages to
    /// stream: errors from due commands or the stepper, then a snapshot.
    pub fn tick(&mut self) -> Vec<SessionMessage> {
        let mut out = Vec::new();
        self.carry += self.tick_span();
        let dt = self.sim.dt();
        while self.carry + 1e-12 >= dt {
            self.carry -= dt;
            if let Err(e) = self.sim.step() {
                out.push(SessionMessage::Error {
                    id: None,
                    message: format!("simulation halted: {e}"),
                });
                let _ = self.sim.apply(&Action::Stop);
            }
            let now = self.sim.time();
            while self.queue.front().is_some_and(|c| c.t.unwrap_or(0.0) <= now + 1e-9) {
                let mut cmd = self.queue.pop_front().expect("front checked");
                cmd.t = None;
                if let err @ SessionMessage::Error { .. } = self.handle(cmd) {
                    out.push(err);
                }
            }
        }
        match self.snapshot() {
            Ok(s) => out.push(SessionMessage::Snapshot(Box::new(s))),
            Err(e) => out.push(SessionMessage::Error {
                id: None,
                message: e.to_string(),
            }),
        }
        out
    }

    /// Current state; advances the sequence number and event cursor.
    pub fn snapshot(&mut self) -> Result<Snapshot, VineError> {
        let mut snap = self.peek()?;
        snap.events = self.sim.events()[self.event_cursor..].to_vec();
        self.event_cursor = self.sim.events().len();
        self.seq += 1;
        snap.seq = self.seq;
        Ok(snap)
    }

    /// Current state without consuming events; carries the last sequence
    /// number.
    pub fn peek(&mut self) -> Result<Snapshot, VineError> {
        let state = self.sim.sample()?;
        let shape = self.sim.current_shape()?.clone();
        let view = ShapeView::build(
            self.sim.config(),
            &self.sim.inputs().pressures,
            self.sim.locks(),
            &shape,
        )?;
        Ok(Snapshot {
            seq: self.seq,
            t: state.t,
            state,
            events: Vec::new(),
            shape: view,
        })
    }

    /// Stateless request equivalent to the current state of `sim`.
    fn solve_request(&self, sim: &Simulator) -> SolveRequest {
        let inputs = sim.inputs();
        SolveRequest {
            robot: self.robot.clone(),
            deployed_length: Some(sim.state().deployed_length),
            trunk_pressure: inputs.pressures.trunk_pressure,
            joint_pressures: inputs.pressures.joint_pressures.clone(),
            tendon_tensions: inputs.tendons.tensions,
            payload_mass: inputs.payload_mass,
            payload_offset: inputs.payload_offset,
            gravity: self.gravity,
            locks: sim.locks().clone(),
        }
    }

    /// Applies `req` to a copy of the session and solves the result. The
    /// live session is untouched.
    pub fn preview(&self, req: &PreviewRequest, model: &CalibratedModel) -> Result<PreviewResponse, ScenarioError> {
        let actions = req
            .commands
            .iter()
            .map(|c| c.to_action().map_err(|e| ScenarioError::Validation(e.0)))
            .collect::<Result<Vec<_>, _>>()?;
        let (_, copy) = self.sim.preview(&actions)?;
        let solve = self.solve_request(&copy);
        let shape = solve.solve(model)?;
        Ok(PreviewResponse {
            solve,
            shape,
            phase: copy.state().phase,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_text_commands() {
        let c = Command::parse("set joint 1 pressure 15000").unwrap();
        assert_eq!(c.target.as_deref(), Some("joint:1"));
        assert_eq!(
            c.to_action().unwrap(),
            Action::SetJointPressure {
                joint: 1,
                pressure: 15000.0
            }
        );
        assert_eq!(
            Command::parse("GROW").unwrap().to_action().unwrap(),
            Action::Grow { pressure: None }
        );
        assert_eq!(
            Command::parse("retract 45").unwrap().to_action().unwrap(),
            Action::PullTail { tension: 45.0 }
        );
        let at = Command::parse("set tendon 1 tension 11.5 at 3").unwrap();
        assert_eq!(at.t, Some(3.0));
        assert_eq!(at.to_string(), "set tendon 1 tension 11.5 at 3");
        assert_eq!(Command::parse("attach payload 0.2").unwrap().value, Some(0.2));
    }

    #[test]
    fn text_and_json_agree() {
        for line in [
            "set trunk pressure 6800",
            "set tail tension 30",
            "grow 12000",
            "stop",
            "attach 0.1",
        ] {
            let c = Command::parse(line).unwrap();
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(Command::parse(&json).unwrap(), c);
            assert_eq!(Command::parse(&c.to_string()).unwrap(), c);
        }
    }

    #[test]
    fn rejects_garbage() {
        for line in [
            "",
            "fly",
            "set joint x pressure 1",
            "set trunk pressure nan",
            "grow 1 at",
            "{\"verb\":\"jump\"}",
        ] {
            assert!(Command::parse(line).is_err(), "{line}");
        }
        let c = Command {
            verb: Verb::Set,
            target: Some("elbow".into()),
            value: Some(1.0),
            t: None,
            id: None,
        };
        assert!(c.to_action().is_err());
    }

    #[test]
    fn session_schedules_and_snapshots() {
        let m = CalibratedModel::standard().unwrap();
        let mut req = CreateSessionRequest::new(RobotRef::preset("cantilever_reinforced"));
        req.time_scale = 10.0;
        let mut s = SessionCore::new(&req, m).unwrap();
        assert!(matches!(
            s.handle_line("set trunk pressure 6800"),
            SessionMessage::Ack { .. }
        ));
        assert!(matches!(s.handle_line("set joint 1 pressure 15000 at 1"), SessionMessage::Ack { t, .. } if t == 1.0));
        assert!(matches!(s.handle_line("bogus"), SessionMessage::Error { .. }));
        let mut last = 0;
        for _ in 0..4 {
            for msg in s.tick() {
                if let SessionMessage::Snapshot(snap) = msg {
                    assert!(snap.seq > last);
                    last = snap.seq;
                }
            }
        }
        let snap = s.snapshot().unwrap();
        assert!(snap.t > 1.9);
        assert_eq!(snap.state.joint_pressures[&JointId(1)], 15000.0);
        assert!(snap.state.deployed_length > 0.0);
        assert_eq!(s.peek().unwrap().seq, snap.seq);
    }

    #[test]
    fn run_request_forms() {
        let r: RunRequest = serde_json::from_str(r#"{"golden":"payload_hold"}"#).unwrap();
        assert_eq!(r.scenario().unwrap().name, "payload_hold");
        assert!(serde_json::from_str::<RunRequest>(r#"{"golden":"x","scenario":{}}"#).is_err());
    }

    #[test]
    fn preview_matches_solve() {
        let m = CalibratedModel::standard().unwrap();
        let req = CreateSessionRequest::new(RobotRef::preset("shape_locking_arm"));
        let s = SessionCore::new(&req, m).unwrap();
        let p = PreviewRequest {
            commands: vec![
                Command::parse("set trunk pressure 12000").unwrap(),
                Command::parse("set tendon 1 tension 5").unwrap(),
            ],
        };
        let r = s.preview(&p, m).unwrap();
        let json = serde_json::to_string(&r.solve).unwrap();
        let again: SolveRequest = serde_json::from_str(&json).unwrap();
        assert_eq!(again.solve(m).unwrap(), r.shape);
        assert_eq!(s.simulator().inputs().pressures.trunk_pressure, 0.0);
    }
}
