//! Growth and retraction state machines.
//!
//! Both steppers are pure: they take a state and return the next one. The
//! [`GrowthEngine`] wrapper owns a state, applies the steppers and records
//! phase transitions in an event log.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, VineError};
use crate::mechanics::PressureState;
use crate::robot::{ConfigurationKind, JointId, RobotConfiguration};

/// Distance kept between the inversion front and a pressurized joint.
pub const BOUNDARY_EPSILON: f64 = 1e-3;

const LENGTH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub p_init: f64,
    pub p_grow: f64,
    pub p_crossing: f64,
    pub burst: f64,
    pub growth_speed: f64,
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.p_init > 0.0
            && self.p_init < self.p_grow
            && self.p_grow <= self.p_crossing
            && self.p_crossing < self.burst
            && self.growth_speed > 0.0;
        if ok {
            Ok(())
        } else {
            Err(VineError::InvalidConfig(format!(
                "thresholds must satisfy 0 < P_init < P_grow <= P_crossing < burst: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub thresholds: BTreeMap<ConfigurationKind, Thresholds>,
    pub retraction_speed: f64,
    pub retraction_pressure: f64,
    /// Pressure joints are raised to while they act as retraction boundaries.
    pub boundary_pressure: f64,
    /// Resisting force added to the pressure term of the retraction condition.
    pub residual_force: f64,
}

impl CalibrationTable {
    pub fn get(&self, kind: ConfigurationKind) -> Result<&Thresholds> {
        self.thresholds
            .get(&kind)
            .ok_or_else(|| VineError::UnfittedCalibration(format!("thresholds for {}", kind.label())))
    }

    pub fn validate(&self) -> Result<()> {
        for t in self.thresholds.values() {
            t.validate()?;
        }
        if !(self.retraction_speed > 0.0 && self.residual_force >= 0.0 && self.retraction_pressure >= 0.0) {
            return Err(VineError::InvalidConfig("retraction parameters out of range".into()));
        }
        Ok(())
    }

    /// Tail tension needed to invert the front at trunk pressure `p_t`.
    pub fn required_tension(&self, p_t: f64, front_area: f64) -> f64 {
        p_t * front_area + self.residual_force
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrowthPhase {
    Idle,
    Initiating,
    SteadyGrowth,
    JointCrossing,
    Stalled,
    RetractPulling,
    RetractBoundaryHold,
    FullyRetracted,
}

impl GrowthPhase {
    pub fn is_retraction(self) -> bool {
        matches!(
            self,
            Self::RetractPulling | Self::RetractBoundaryHold | Self::FullyRetracted
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Idle => "Idle",
            Self::Initiating => "Initiating",
            Self::SteadyGrowth => "SteadyGrowth",
            Self::JointCrossing => "JointCrossing",
            Self::Stalled => "Stalled",
            Self::RetractPulling => "RetractPulling",
            Self::RetractBoundaryHold => "RetractBoundaryHold",
            Self::FullyRetracted => "FullyRetracted",
        }
    }
}

impl std::fmt::Display for GrowthPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthState {
    pub deployed_length: f64,
    pub phase: GrowthPhase,
    pub active_joint: Option<JointId>,
    pub elapsed: f64,
    pub insufficient_tension: bool,
}

impl GrowthState {
    pub fn idle() -> Self {
        Self::at_length(0.0)
    }

    pub fn at_length(deployed_length: f64) -> Self {
        Self {
            deployed_length,
            phase: GrowthPhase::Idle,
            active_joint: None,
            elapsed: 0.0,
            insufficient_tension: false,
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("dt must be > 0, got {dt}")))
    }
}

fn check_burst(what: &str, p: f64, limit: f64) -> Result<()> {
    if p >= limit {
        Err(VineError::Overpressure {
            what: what.to_string(),
            pressure: p,
            limit,
        })
    } else {
        Ok(())
    }
}

/// One growth step at trunk pressure `p_t`.
pub fn step_growth(
    state: &GrowthState,
    config: &RobotConfiguration,
    table: &CalibrationTable,
    p_t: f64,
    dt: f64,
) -> Result<GrowthState> {
    check_dt(dt)?;
    let th = table.get(config.kind)?;
    check_burst("trunk", p_t, th.burst)?;
    let total = config.total_length();
    let mut next = state.clone();
    next.elapsed += dt;
    next.insufficient_tension = false;
    next.active_joint = None;

    if p_t < th.p_init {
        next.phase = GrowthPhase::Idle;
        return Ok(next);
    }
    let was_moving = matches!(
        state.phase,
        GrowthPhase::Initiating | GrowthPhase::SteadyGrowth | GrowthPhase::JointCrossing | GrowthPhase::Stalled
    );
    if !was_moving || p_t < th.p_grow {
        next.phase = GrowthPhase::Initiating;
        return Ok(next);
    }

    let s = state.deployed_length;
    let step = th.growth_speed * dt;
    let spans = config.joint_spans();
    if let Some(span) = spans
        .iter()
        .find(|sp| s >= sp.start - LENGTH_TOL && s < sp.end - LENGTH_TOL)
    {
        // front inside a joint span
        if p_t < th.p_crossing {
            next.phase = GrowthPhase::Stalled;
            next.active_joint = Some(span.id);
            return Ok(next);
        }
        let end = (s + step).min(span.end);
        next.deployed_length = end;
        if end >= span.end - LENGTH_TOL {
            next.deployed_length = span.end;
            next.phase = GrowthPhase::SteadyGrowth;
        } else {
            next.phase = GrowthPhase::JointCrossing;
            next.active_joint = Some(span.id);
        }
        return Ok(next);
    }
    let next_start = spans
        .iter()
        .map(|sp| sp.start)
        .filter(|&st| st > s + LENGTH_TOL)
        .fold(total, f64::min);
    next.deployed_length = (s + step).min(next_start).min(total);
    next.phase = GrowthPhase::SteadyGrowth;
    Ok(next)
}

/// One retraction step with tail tension `tension`.
pub fn step_retraction(
    state: &GrowthState,
    config: &RobotConfiguration,
    table: &CalibrationTable,
    pressures: &PressureState,
    tension: f64,
    dt: f64,
) -> Result<GrowthState> {
    check_dt(dt)?;
    if !(tension.is_finite() && tension >= 0.0) {
        return Err(domain(format!("tail tension must be >= 0, got {tension}")));
    }
    let p_t = pressures.trunk_pressure;
    if let Ok(th) = table.get(config.kind) {
        check_burst("trunk", p_t, th.burst)?;
    }
    let front = state.deployed_length;
    let mut next = state.clone();
    next.elapsed += dt;
    next.insufficient_tension = false;
    if front <= LENGTH_TOL {
        next.deployed_length = 0.0;
        next.phase = GrowthPhase::FullyRetracted;
        next.active_joint = None;
        return Ok(next);
    }

    // innermost-distal pressurized joint that is already everted
    let mut hold: Option<(JointId, f64)> = None;
    for span in config.joint_spans() {
        let p_j = pressures.joint(span.id).unwrap_or(0.0);
        if p_j <= p_t || span.start >= front - LENGTH_TOL {
            continue;
        }
        let hold_at = span.end + BOUNDARY_EPSILON;
        if front < hold_at - LENGTH_TOL {
            return Err(VineError::BoundaryViolation(span.id));
        }
        if hold.is_none_or(|(_, h)| hold_at > h) {
            hold = Some((span.id, hold_at));
        }
    }

    let required = table.required_tension(p_t, config.front_area());
    if tension < required {
        next.insufficient_tension = true;
        if !state.phase.is_retraction() || state.phase == GrowthPhase::FullyRetracted {
            next.phase = GrowthPhase::RetractPulling;
        }
        return Ok(next);
    }

    let target = front - table.retraction_speed * dt;
    match hold {
        Some((id, h)) if target <= h + LENGTH_TOL => {
            next.deployed_length = h.min(front);
            next.phase = GrowthPhase::RetractBoundaryHold;
            next.active_joint = Some(id);
        }
        _ if target <= LENGTH_TOL => {
            next.deployed_length = 0.0;
            next.phase = GrowthPhase::FullyRetracted;
            next.active_joint = None;
        }
        _ => {
            next.deployed_length = target;
            next.phase = GrowthPhase::RetractPulling;
            next.active_joint = None;
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum RetractionAction {
    PressurizeJoint { joint: JointId, pressure: f64 },
    SetTrunkPressure { pressure: f64 },
    PullTail { speed: f64, until_length: f64 },
    ReleaseJoint { joint: JointId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetractionStage {
    /// Joint held as the stiff boundary during this stage.
    pub boundary: Option<JointId>,
    pub actions: Vec<RetractionAction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetractionPlan {
    pub stages: Vec<RetractionStage>,
}

impl RetractionPlan {
    /// Joints in the order they are released.
    pub fn release_order(&self) -> Vec<JointId> {
        self.stages
            .iter()
            .flat_map(|s| &s.actions)
            .filter_map(|a| match a {
                RetractionAction::ReleaseJoint { joint } => Some(*joint),
                _ => None,
            })
            .collect()
    }
}

/// Segment-wise retraction: every everted joint is stiffened up front, then
/// each stage pulls back to the next boundary and releases it.
pub fn plan_cascading_retraction(
    config: &RobotConfiguration,
    table: &CalibrationTable,
    deployed_length: f64,
) -> Result<RetractionPlan> {
    if deployed_length <= LENGTH_TOL {
        return Err(VineError::EmptyPlan);
    }
    let boundaries: Vec<_> = config
        .joint_spans()
        .into_iter()
        .filter(|s| s.end + BOUNDARY_EPSILON <= deployed_length + LENGTH_TOL)
        .collect();
    let pull = |until_length| RetractionAction::PullTail {
        speed: table.retraction_speed,
        until_length,
    };

    let mut first = Vec::new();
    for b in &boundaries {
        first.push(RetractionAction::PressurizeJoint {
            joint: b.id,
            pressure: table.boundary_pressure,
        });
    }
    first.push(RetractionAction::SetTrunkPressure {
        pressure: table.retraction_pressure,
    });
    let mut stages = Vec::new();
    let mut actions = first;
    let mut remaining = boundaries.clone();
    while let Some(b) = remaining.pop() {
        actions.push(pull(b.end + BOUNDARY_EPSILON));
        stages.push(RetractionStage {
            boundary: Some(b.id),
            actions: std::mem::take(&mut actions),
        });
        actions.push(RetractionAction::ReleaseJoint { joint: b.id });
    }
    actions.push(pull(0.0));
    stages.push(RetractionStage {
        boundary: None,
        actions,
    });
    Ok(RetractionPlan { stages })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub unsupported_length: f64,
    /// Unsupported length minus threshold; positive when unstable.
    pub margin: f64,
}

pub const FREE_SPACE_THRESHOLD: f64 = 0.6;

/// Whether segment-wise retraction can proceed without environmental
/// support.
pub fn free_space_retraction_stability(config: &RobotConfiguration, threshold: f64) -> Result<StabilityReport> {
    if config.joints().next().is_none() {
        return Err(VineError::InvalidConfig(
            "stability gate needs at least one joint".into(),
        ));
    }
    let length = config.total_length();
    let margin = length - threshold;
    Ok(StabilityReport {
        stable: margin <= 1e-12,
        unsupported_length: length,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Phase {
        from: GrowthPhase,
        to: GrowthPhase,
        joint: Option<JointId>,
    },
    FullLength,
    InsufficientTension {
        applied: f64,
        required: f64,
    },
    JointPressurized {
        joint: JointId,
    },
    JointReleased {
        joint: JointId,
    },
    PayloadAttached {
        mass: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvent {
    pub t: f64,
    pub deployed_length: f64,
    pub trunk_pressure: f64,
    pub joint_pressures: BTreeMap<JointId, f64>,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl GrowthEvent {
    pub fn label(&self) -> String {
        match &self.kind {
            EventKind::Phase { to, joint: Some(j), .. } => format!("{to}:{j}"),
            EventKind::Phase { to, .. } => to.to_string(),
            EventKind::FullLength => "FullLength".into(),
            EventKind::InsufficientTension { .. } => "InsufficientTension".into(),
            EventKind::JointPressurized { joint } => format!("JointPressurized:{joint}"),
            EventKind::JointReleased { joint } => format!("JointReleased:{joint}"),
            EventKind::PayloadAttached { .. } => "PayloadAttached".into(),
        }
    }
}

/// Owns a growth state and logs every transition.
#[derive(Debug, Clone)]
pub struct GrowthEngine {
    pub state: GrowthState,
    pub events: Vec<GrowthEvent>,
}

impl GrowthEngine {
    pub fn new(state: GrowthState) -> Self {
        Self {
            state,
            events: Vec::new(),
        }
    }

    pub fn log(&mut self, kind: EventKind, pressures: &PressureState) {
        self.events.push(GrowthEvent {
            t: self.state.elapsed,
            deployed_length: self.state.deployed_length,
            trunk_pressure: pressures.trunk_pressure,
            joint_pressures: pressures.joint_pressures.clone(),
            kind,
        });
    }

    fn commit(
        &mut self,
        next: GrowthState,
        pressures: &PressureState,
        total: f64,
        required: Option<f64>,
        tension: f64,
    ) {
        let prev = std::mem::replace(&mut self.state, next);
        if prev.phase != self.state.phase || prev.active_joint != self.state.active_joint {
            self.log(
                EventKind::Phase {
                    from: prev.phase,
                    to: self.state.phase,
                    joint: self.state.active_joint,
                },
                pressures,
            );
        }
        if prev.deployed_length < total - LENGTH_TOL && self.state.deployed_length >= total - LENGTH_TOL {
            self.log(EventKind::FullLength, pressures);
        }
        if let Some(required) = required {
            if self.state.insufficient_tension && !prev.insufficient_tension {
                self.log(
                    EventKind::InsufficientTension {
                        applied: tension,
                        required,
                    },
                    pressures,
                );
            }
        }
    }

    pub fn grow(
        &mut self,
        config: &RobotConfiguration,
        table: &CalibrationTable,
        pressures: &PressureState,
        dt: f64,
    ) -> Result<()> {
        let next = step_growth(&self.state, config, table, pressures.trunk_pressure, dt)?;
        self.commit(next, pressures, config.total_length(), None, 0.0);
        Ok(())
    }

    pub fn retract(
        &mut self,
        config: &RobotConfiguration,
        table: &CalibrationTable,
        pressures: &PressureState,
        tension: f64,
        dt: f64,
    ) -> Result<()> {
        let next = step_retraction(&self.state, config, table, pressures, tension, dt)?;
        let required = table.required_tension(pressures.trunk_pressure, config.front_area());
        self.commit(next, pressures, f64::INFINITY, Some(required), tension);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::ChamberGeometry;
    use crate::robot::ChainBuilder;

    fn table() -> CalibrationTable {
        let th = |p_init, p_grow, p_crossing| Thresholds {
            p_init,
            p_grow,
            p_crossing,
            burst: 21.4e3,
            growth_speed: 0.05,
        };
        CalibrationTable {
            thresholds: [
                (ConfigurationKind::Baseline, th(1.2e3, 4.2e3, 4.2e3)),
                (ConfigurationKind::ReinforcedRpj, th(2.6e3, 6.8e3, 12e3)),
            ]
            .into_iter()
            .collect(),
            retraction_speed: 0.02,
            retraction_pressure: 6e3,
            boundary_pressure: 15e3,
            residual_force: 6.81,
        }
    }

    fn robot() -> RobotConfiguration {
        ChainBuilder::new("r", ConfigurationKind::ReinforcedRpj)
            .trunk(0.465)
            .joint(ChamberGeometry::nominal(5.83e-4))
            .trunk(0.465)
            .build()
    }

    fn two_joint() -> RobotConfiguration {
        ChainBuilder::new("r2", ConfigurationKind::ReinforcedRpj)
            .trunk(0.46)
            .joint(ChamberGeometry::nominal(5.83e-4))
            .trunk(0.5)
            .joint(ChamberGeometry::nominal(5.83e-4))
            .trunk(0.4)
            .build()
    }

    fn run(state: GrowthState, p_t: f64, n: usize) -> GrowthState {
        (0..n).fold(state, |s, _| step_growth(&s, &robot(), &table(), p_t, 0.05).unwrap())
    }

    #[test]
    fn below_init_stays_idle() {
        let s = run(GrowthState::idle(), 2.0e3, 10);
        assert_eq!(s.phase, GrowthPhase::Idle);
        assert_eq!(s.deployed_length, 0.0);
    }

    #[test]
    fn steady_growth_speed() {
        let s = run(GrowthState::idle(), 6.8e3, 2);
        assert_eq!(s.phase, GrowthPhase::SteadyGrowth);
        let s2 = run(s.clone(), 6.8e3, 1);
        assert!((s2.deployed_length - s.deployed_length - 0.0025).abs() < 1e-12);
    }

    #[test]
    fn stalls_at_joint_until_crossing_pressure() {
        let mut s = GrowthState::at_length(0.465);
        s.phase = GrowthPhase::SteadyGrowth;
        let stalled = run(s, 6.8e3, 5);
        assert_eq!(stalled.phase, GrowthPhase::Stalled);
        assert_eq!(stalled.active_joint, Some(JointId(1)));
        assert_eq!(stalled.deployed_length, 0.465);
        let crossing = run(stalled, 12e3, 1);
        assert_eq!(crossing.phase, GrowthPhase::JointCrossing);
        assert!(crossing.deployed_length > 0.465);
        let past = run(crossing, 12e3, 30);
        assert_eq!(past.phase, GrowthPhase::SteadyGrowth);
        assert!(past.deployed_length > 0.535);
    }

    #[test]
    fn growth_halts_at_full_length() {
        let s = run(GrowthState::idle(), 12e3, 1000);
        assert!((s.deployed_length - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overpressure_is_an_error() {
        let err = step_growth(&GrowthState::idle(), &robot(), &table(), 21.4e3, 0.05);
        assert!(matches!(err, Err(VineError::Overpressure { .. })));
        assert!(step_growth(&GrowthState::idle(), &robot(), &table(), 5e3, 0.0).is_err());
    }

    #[test]
    fn retraction_needs_tension() {
        let mut s = GrowthState::at_length(1.0);
        s.phase = GrowthPhase::SteadyGrowth;
        let p = PressureState::new(6e3).with_joint(JointId(1), 0.0);
        let r = step_retraction(&s, &robot(), &table(), &p, 0.0, 0.05).unwrap();
        assert!(r.insufficient_tension);
        assert_eq!(r.deployed_length, 1.0);
        let term = 6e3 * robot().front_area();
        assert!((term - 34.05).abs() < 0.1);
        let r = step_retraction(&s, &robot(), &table(), &p, term + 6.0, 0.05).unwrap();
        assert!(r.insufficient_tension);
        let r = step_retraction(&s, &robot(), &table(), &p, term + 7.0, 0.05).unwrap();
        assert!(!r.insufficient_tension);
        assert!((r.deployed_length - 0.999).abs() < 1e-12);
    }

    #[test]
    fn boundary_hold_and_violation() {
        let p = PressureState::new(6e3).with_joint(JointId(1), 15e3);
        let mut s = GrowthState::at_length(0.537);
        s.phase = GrowthPhase::RetractPulling;
        let r = step_retraction(&s, &robot(), &table(), &p, 50.0, 0.1).unwrap();
        assert_eq!(r.phase, GrowthPhase::RetractBoundaryHold);
        assert!((r.deployed_length - 0.536).abs() < 1e-12);
        let inside = GrowthState::at_length(0.5);
        assert_eq!(
            step_retraction(&inside, &robot(), &table(), &p, 50.0, 0.1),
            Err(VineError::BoundaryViolation(JointId(1)))
        );
    }

    #[test]
    fn plan_shapes() {
        let plan = plan_cascading_retraction(&two_joint(), &table(), 1.5).unwrap();
        assert_eq!(plan.stages.len(), 3);
        assert_eq!(plan.release_order(), vec![JointId(2), JointId(1)]);
        assert_eq!(plan.stages[0].boundary, Some(JointId(2)));
        let short = plan_cascading_retraction(&two_joint(), &table(), 0.3).unwrap();
        assert_eq!(short.stages.len(), 1);
        assert_eq!(
            plan_cascading_retraction(&two_joint(), &table(), 0.0),
            Err(VineError::EmptyPlan)
        );
        let plain = ChainBuilder::new("p", ConfigurationKind::Baseline).trunk(1.0).build();
        assert_eq!(
            plan_cascading_retraction(&plain, &table(), 1.0).unwrap().stages.len(),
            1
        );
    }

    #[test]
    fn stability_gate() {
        let short = ChainBuilder::new("s", ConfigurationKind::ReinforcedRpj)
            .trunk(0.165)
            .joint(ChamberGeometry::nominal(5.83e-4))
            .trunk(0.165)
            .build();
        assert!(free_space_retraction_stability(&short, 0.6).unwrap().stable);
        let exact = ChainBuilder::new("e", ConfigurationKind::ReinforcedRpj)
            .trunk(0.265)
            .joint(ChamberGeometry::nominal(5.83e-4))
            .trunk(0.265)
            .build();
        let r = free_space_retraction_stability(&exact, 0.6).unwrap();
        assert!(r.stable && r.margin.abs() < 1e-12);
        let r = free_space_retraction_stability(&two_joint(), 0.6).unwrap();
        assert!(!r.stable && (r.margin - 0.9).abs() < 1e-9);
    }

    #[test]
    fn engine_logs_transitions() {
        let mut e = GrowthEngine::new(GrowthState::idle());
        let p = PressureState::new(12e3).with_joint(JointId(1), 0.0);
        for _ in 0..500 {
            e.grow(&robot(), &table(), &p, 0.05).unwrap();
        }
        let labels: Vec<_> = e.events.iter().map(GrowthEvent::label).collect();
        assert_eq!(labels.first().map(String::as_str), Some("Initiating"));
        assert!(labels.contains(&"JointCrossing:1".to_string()));
        assert!(labels.contains(&"FullLength".to_string()));
    }
}
