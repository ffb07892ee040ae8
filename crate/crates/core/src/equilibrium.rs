//! Planar quasi-static equilibrium of the element chain.
//!
//! Each element carries a scalar flexural rigidity. The solver discretizes
//! elements into short constant-curvature pieces, evaluates the bending
//! moment at every piece midpoint (tendon moment plus the moment of all
//! distal film mass and payload about that point, using the current pose)
//! and relaxes curvatures toward `M / EI` with a damped fixed-point update.
//! Poses are re-integrated from the clamped base with exact arc kinematics,
//! so moderate rotations are represented without small-angle assumptions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, VineError};
use crate::mechanics::{curvature_from_moment, effective_bending_stiffness, PressureState, TendonState};
use crate::robot::{Element, JointId, RobotConfiguration, TendonId};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    /// Advance along a constant-curvature arc.
    pub fn advance(self, curvature: f64, ds: f64) -> Pose {
        let dphi = curvature * ds;
        let heading = self.heading + dphi;
        if dphi.abs() < 1e-9 {
            // second-order expansion of the arc
            let mid = self.heading + 0.5 * dphi;
            Pose {
                x: self.x + ds * mid.cos(),
                y: self.y + ds * mid.sin(),
                heading,
            }
        } else {
            Pose {
                x: self.x + (heading.sin() - self.heading.sin()) / curvature,
                y: self.y - (heading.cos() - self.heading.cos()) / curvature,
                heading,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainElement {
    /// Index into the configuration's element list.
    pub config_index: usize,
    pub joint: Option<JointId>,
    pub length: f64,
    pub ei: f64,
    /// Stress-free curvature; nonzero for a joint locked in a bent pose.
    #[serde(default)]
    pub rest_curvature: f64,
}

/// Element chain with per-element flexural rigidity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub elements: Vec<ChainElement>,
    pub base: Pose,
    /// Film mass per meter of deployed body.
    pub linear_density: f64,
    pub tendon_offset: f64,
}

impl Chain {
    pub fn total_length(&self) -> f64 {
        self.elements.iter().map(|e| e.length).sum()
    }

    /// Keep only the first `length` meters of the chain.
    pub fn truncated(&self, length: f64) -> Chain {
        let mut out = self.clone();
        out.elements.clear();
        let mut remaining = length.max(0.0);
        for e in &self.elements {
            if remaining <= 1e-12 {
                break;
            }
            let mut e = e.clone();
            e.length = e.length.min(remaining);
            remaining -= e.length;
            out.elements.push(e);
        }
        out
    }

    pub fn with_uniform_ei(&self, ei: f64) -> Chain {
        let mut out = self.clone();
        for e in &mut out.elements {
            e.ei = ei;
        }
        out
    }

    pub fn min_ei(&self) -> f64 {
        self.elements.iter().map(|e| e.ei).fold(f64::INFINITY, f64::min)
    }

    /// Give `joint` a stress-free curvature, locking it in a bent pose.
    pub fn lock_joint(&mut self, joint: JointId, curvature: f64) {
        if let Some(e) = self.elements.iter_mut().find(|e| e.joint == Some(joint)) {
            e.rest_curvature = curvature;
        }
    }

    pub fn element_of_joint(&self, id: JointId) -> Option<usize> {
        self.elements.iter().position(|e| e.joint == Some(id))
    }
}

/// Builds the chain, giving each joint its pressure-dependent stiffness and
/// each trunk segment the calibrated trunk stiffness at `p_t`.
pub fn assemble_chain(config: &RobotConfiguration, pressures: &PressureState) -> Result<Chain> {
    config.validate()?;
    let p_t = pressures.trunk_pressure;
    let mut elements = Vec::with_capacity(config.elements.len());
    for (i, e) in config.elements.iter().enumerate() {
        let (ei, joint) = match e {
            Element::Trunk(_) => {
                let trunk = config
                    .trunk_stiffness
                    .ok_or_else(|| VineError::UnfittedCalibration(format!("trunk of {}", config.name)))?;
                (trunk.ei(p_t), None)
            }
            Element::Joint(j) => {
                let p_j = pressures.joint(j.id).ok_or(VineError::MissingJointPressure(j.id))?;
                (effective_bending_stiffness(j, p_j, p_t)?, Some(j.id))
            }
        };
        if !(ei.is_finite() && ei > 0.0) {
            return Err(VineError::DegenerateStiffness(ei));
        }
        elements.push(ChainElement {
            config_index: i,
            joint,
            length: e.length(),
            ei,
            rest_curvature: 0.0,
        });
    }
    Ok(Chain {
        elements,
        base: Pose {
            x: 0.0,
            y: config.base_height,
            heading: 0.0,
        },
        linear_density: config.film_linear_density(),
        tendon_offset: config.tendon_radial_offset,
    })
}

/// External loads: a uniform gravity field and a point payload placed
/// `payload_offset` meters proximal of the tip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loads {
    pub gravity: [f64; 2],
    pub payload_mass: f64,
    pub payload_offset: f64,
}

impl Loads {
    pub fn vertical(g: f64, payload_mass: f64) -> Self {
        Self {
            gravity: [0.0, -g],
            payload_mass,
            payload_offset: 0.0,
        }
    }

    pub fn none() -> Self {
        Self::vertical(0.0, 0.0)
    }

    pub fn with_payload_offset(mut self, offset: f64) -> Self {
        self.payload_offset = offset;
        self
    }

    fn unloaded(self) -> Self {
        Self {
            payload_mass: 0.0,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_piece_length: f64,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Per-element rotation beyond which the shape is flagged.
    pub buckling_rotation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_piece_length: 0.01,
            damping: 0.5,
            tolerance: 1e-5,
            max_iterations: 500,
            buckling_rotation: std::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumShape {
    /// Mean curvature of each element (rotation / length).
    pub curvatures: Vec<f64>,
    /// Rotation across each element.
    pub rotations: Vec<f64>,
    pub end_poses: Vec<Pose>,
    /// Piece-end poses from base to tip, for drawing.
    pub centerline: Vec<Pose>,
    pub lengths: Vec<f64>,
    pub joints: Vec<Option<JointId>>,
    pub tip: Pose,
    /// Displacement of the tip relative to the payload-free shape, measured
    /// along gravity (or as distance when there is no gravity).
    pub tip_deflection: f64,
    /// Largest single-element share of the total bend.
    pub localization_index: f64,
    pub iterations: usize,
    pub residual: f64,
    pub buckled: bool,
}

impl EquilibriumShape {
    pub fn total_bend(&self) -> f64 {
        self.rotations.iter().map(|r| r.abs()).sum()
    }
}

/// Share of the total absolute bend carried by `target`. Zero when the
/// chain is essentially straight.
pub fn localization_index(shape: &EquilibriumShape, target: usize) -> f64 {
    let total = shape.total_bend();
    if total < 1e-9 || target >= shape.rotations.len() {
        return 0.0;
    }
    shape.rotations[target].abs() / total
}

pub fn solve_equilibrium(chain: &Chain, tendons: &TendonState, loads: &Loads) -> Result<EquilibriumShape> {
    solve_equilibrium_with(chain, tendons, loads, &SolverOptions::default())
}

pub fn solve_equilibrium_with(
    chain: &Chain,
    tendons: &TendonState,
    loads: &Loads,
    opts: &SolverOptions,
) -> Result<EquilibriumShape> {
    if loads.gravity.iter().any(|g| !g.is_finite()) {
        return Err(domain("gravity must be finite"));
    }
    if !(loads.payload_mass.is_finite() && loads.payload_mass >= 0.0) {
        return Err(domain(format!("payload must be >= 0, got {}", loads.payload_mass)));
    }
    let mesh = Mesh::new(chain, opts.max_piece_length);
    let moment_tendon = tendons.planar_moment();
    let loaded = mesh.relax(chain, moment_tendon, loads, opts)?;
    let g_norm = loads.gravity[0].hypot(loads.gravity[1]);
    let tip_deflection = if loads.payload_mass > 0.0 && !chain.elements.is_empty() {
        let reference = mesh.relax(chain, moment_tendon, &loads.unloaded(), opts)?;
        let dx = loaded.tip().x - reference.tip().x;
        let dy = loaded.tip().y - reference.tip().y;
        if g_norm > 0.0 {
            (dx * loads.gravity[0] + dy * loads.gravity[1]) / g_norm
        } else {
            dx.hypot(dy)
        }
    } else {
        0.0
    };
    Ok(mesh.shape(chain, loaded, tip_deflection, opts))
}

struct Piece {
    element: usize,
    ds: f64,
    ei: f64,
    rest: f64,
    /// Arc length at the piece midpoint.
    s_mid: f64,
}

struct Mesh {
    pieces: Vec<Piece>,
    total: f64,
}

struct Relaxed {
    curvature: Vec<f64>,
    nodes: Vec<Pose>,
    iterations: usize,
    residual: f64,
}

impl Relaxed {
    fn tip(&self) -> Pose {
        *self.nodes.last().expect("nodes include the base")
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl Mesh {
    fn new(chain: &Chain, max_piece: f64) -> Self {
        let mut pieces = Vec::new();
        let mut s = 0.0;
        for (i, e) in chain.elements.iter().enumerate() {
            let n = (e.length / max_piece).ceil().max(1.0) as usize;
            let ds = e.length / n as f64;
            for k in 0..n {
                pieces.push(Piece {
                    element: i,
                    ds,
                    ei: e.ei,
                    rest: e.rest_curvature,
                    s_mid: s + (k as f64 + 0.5) * ds,
                });
            }
            s += e.length;
        }
        Mesh { pieces, total: s }
    }

    fn integrate(&self, base: Pose, curvature: &[f64]) -> Vec<Pose> {
        let mut nodes = Vec::with_capacity(self.pieces.len() + 1);
        let mut p = base;
        nodes.push(p);
        for (piece, &k) in self.pieces.iter().zip(curvature) {
            p = p.advance(k, piece.ds);
            nodes.push(p);
        }
        nodes
    }

    /// Pose at arc length `s`.
    fn pose_at(&self, nodes: &[Pose], curvature: &[f64], s: f64) -> Pose {
        let mut start = 0.0;
        for (i, piece) in self.pieces.iter().enumerate() {
            if s <= start + piece.ds || i + 1 == self.pieces.len() {
                return nodes[i].advance(curvature[i], (s - start).clamp(0.0, piece.ds));
            }
            start += piece.ds;
        }
        nodes[0]
    }

    fn relax(&self, chain: &Chain, moment_tendon: f64, loads: &Loads, opts: &SolverOptions) -> Result<Relaxed> {
        let n = self.pieces.len();
        let mut curvature = vec![0.0; n];
        let mut nodes = self.integrate(chain.base, &curvature);
        if n == 0 {
            return Ok(Relaxed {
                curvature,
                nodes,
                iterations: 0,
                residual: 0.0,
            });
        }
        // lumped film mass: half of each piece at either end node
        let mut node_mass = vec![0.0; n + 1];
        for (i, p) in self.pieces.iter().enumerate() {
            let m = chain.linear_density * p.ds;
            node_mass[i] += 0.5 * m;
            node_mass[i + 1] += 0.5 * m;
        }
        let payload_s = (self.total - loads.payload_offset).clamp(0.0, self.total);
        let g = loads.gravity;

        let mut residual = f64::INFINITY;
        for it in 1..=opts.max_iterations {
            // suffix sums of force and moment-about-origin over distal nodes
            let mut sum_f = [0.0; 2];
            let mut sum_rf = 0.0;
            let mut suffix = vec![([0.0; 2], 0.0); n + 1];
            for k in (0..=n).rev() {
                let f = [node_mass[k] * g[0], node_mass[k] * g[1]];
                sum_f[0] += f[0];
                sum_f[1] += f[1];
                sum_rf += cross([nodes[k].x, nodes[k].y], f);
                suffix[k] = (sum_f, sum_rf);
            }
            let payload_pose = self.pose_at(&nodes, &curvature, payload_s);
            let payload_force = [loads.payload_mass * g[0], loads.payload_mass * g[1]];

            let mut max_change: f64 = 0.0;
            let mut target = Vec::with_capacity(n);
            for (j, piece) in self.pieces.iter().enumerate() {
                let mid = nodes[j].advance(curvature[j], 0.5 * piece.ds);
                let (f, rf) = suffix[j + 1];
                let mut m = moment_tendon + rf - cross([mid.x, mid.y], f);
                if payload_s > piece.s_mid {
                    m += cross([payload_pose.x - mid.x, payload_pose.y - mid.y], payload_force);
                }
                target.push(piece.rest + curvature_from_moment(m, piece.ei)?);
            }
            for (k, t) in curvature.iter_mut().zip(&target) {
                let update = opts.damping * (t - *k);
                *k += update;
                max_change = max_change.max(update.abs());
            }
            let next = self.integrate(chain.base, &curvature);
            let old_tip = nodes[n];
            let new_tip = next[n];
            residual = (new_tip.x - old_tip.x).hypot(new_tip.y - old_tip.y);
            nodes = next;
            if residual < opts.tolerance && max_change * self.total < opts.tolerance {
                return Ok(Relaxed {
                    curvature,
                    nodes,
                    iterations: it,
                    residual,
                });
            }
        }
        Err(VineError::NonConvergence {
            iterations: opts.max_iterations,
            residual,
        })
    }

    fn shape(&self, chain: &Chain, r: Relaxed, tip_deflection: f64, opts: &SolverOptions) -> EquilibriumShape {
        let m = chain.elements.len();
        let mut rotations = vec![0.0; m];
        let mut end_poses = vec![chain.base; m];
        for (i, piece) in self.pieces.iter().enumerate() {
            rotations[piece.element] += r.curvature[i] * piece.ds;
            end_poses[piece.element] = r.nodes[i + 1];
        }
        let lengths: Vec<f64> = chain.elements.iter().map(|e| e.length).collect();
        let curvatures = rotations.iter().zip(&lengths).map(|(r, l)| r / l).collect();
        let total: f64 = rotations.iter().map(|r| r.abs()).sum();
        let localization = if total < 1e-9 {
            0.0
        } else {
            rotations.iter().map(|r| r.abs()).fold(0.0, f64::max) / total
        };
        let buckled = rotations.iter().any(|r| r.abs() > opts.buckling_rotation);
        EquilibriumShape {
            curvatures,
            rotations,
            end_poses,
            tip: *r.nodes.last().unwrap_or(&chain.base),
            centerline: r.nodes,
            lengths,
            joints: chain.elements.iter().map(|e| e.joint).collect(),
            tip_deflection,
            localization_index: localization,
            iterations: r.iterations,
            residual: r.residual,
            buckled,
        }
    }
}

/// Tip deflection for each payload mass (kg), applied at the hook offset.
pub fn tip_deflection_curve(
    chain: &Chain,
    tendons: &TendonState,
    gravity: f64,
    hook_offset: f64,
    loads_kg: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if loads_kg.windows(2).any(|w| w[1] < w[0]) || loads_kg.iter().any(|m| *m < 0.0) {
        return Err(domain("loads must be non-negative and ascending"));
    }
    loads_kg
        .iter()
        .map(|&m| {
            let loads = Loads::vertical(gravity, m).with_payload_offset(hook_offset);
            solve_equilibrium(chain, tendons, &loads).map(|s| (m, s.tip_deflection))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendSolution {
    pub tension: f64,
    /// Achieved change of tip heading, degrees.
    pub angle_deg: f64,
    pub shape: EquilibriumShape,
}

/// Tension on `tendon` that rotates the tip by `target_deg` relative to the
/// shape with that tendon slack.
pub fn bend_to_angle(
    chain: &Chain,
    tendons: &TendonState,
    tendon: TendonId,
    target_deg: f64,
    loads: &Loads,
) -> Result<BendSolution> {
    if !(0.0..=120.0).contains(&target_deg) {
        return Err(domain(format!("target angle {target_deg}° outside [0, 120]")));
    }
    let sign = tendon.planar_sign();
    let with = |t: f64| {
        let mut ts = *tendons;
        ts.tensions[tendon.index()] = t;
        ts
    };
    let rest = solve_equilibrium(chain, &with(0.0), loads)?;
    if target_deg == 0.0 {
        return Ok(BendSolution {
            tension: 0.0,
            angle_deg: 0.0,
            shape: rest,
        });
    }
    let unreachable = |reason: &str| VineError::UnreachableAngle {
        target_deg,
        reason: reason.to_string(),
    };
    if sign == 0.0 {
        return Err(unreachable("tendon acts out of the bending plane"));
    }
    let angle = |s: &EquilibriumShape| sign * (s.tip.heading - rest.tip.heading).to_degrees();

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_shape = solve_equilibrium(chain, &with(hi), loads)?;
    while angle(&hi_shape) < target_deg {
        if hi_shape.buckled {
            return Err(unreachable("buckling flag tripped before the target"));
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e5 {
            return Err(unreachable("tension bound exceeded"));
        }
        hi_shape = solve_equilibrium(chain, &with(hi), loads)?;
    }
    let mut best = (hi, hi_shape);
    for _ in 0..80 {
        let err = angle(&best.1) - target_deg;
        if err.abs() <= 0.01 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let s = solve_equilibrium(chain, &with(mid), loads)?;
        if angle(&s) < target_deg {
            lo = mid;
        } else {
            hi = mid;
        }
        best = (mid, s);
    }
    let (tension, shape) = best;
    let achieved = angle(&shape);
    if (achieved - target_deg).abs() > 0.5 {
        return Err(unreachable("bisection did not reach the target within 0.5°"));
    }
    if shape.buckled {
        return Err(unreachable("buckling flag tripped at the target"));
    }
    Ok(BendSolution {
        tension,
        angle_deg: achieved,
        shape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(length: f64, ei: f64) -> Chain {
        Chain {
            elements: vec![ChainElement {
                config_index: 0,
                joint: None,
                length,
                ei,
                rest_curvature: 0.0,
            }],
            base: Pose::default(),
            linear_density: 0.0367,
            tendon_offset: 0.0425,
        }
    }

    fn tendons(t1: f64) -> TendonState {
        TendonState::slack(0.0425).with_tension(TendonId::new(1).unwrap(), t1)
    }

    #[test]
    fn arc_advance_matches_circle() {
        let p = Pose::default().advance(1.0, std::f64::consts::PI);
        assert!((p.x).abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
        let straight = Pose::default().advance(0.0, 2.0);
        assert_eq!((straight.x, straight.y), (2.0, 0.0));
    }

    #[test]
    fn unloaded_chain_is_straight() {
        let s = solve_equilibrium(&single(1.0, 2.0), &tendons(0.0), &Loads::none()).unwrap();
        assert!(s.curvatures.iter().all(|k| *k == 0.0));
        assert!((s.tip.x - 1.0).abs() < 1e-12);
        assert_eq!(s.localization_index, 0.0);
    }

    #[test]
    fn pure_tendon_moment_gives_constant_curvature() {
        let s = solve_equilibrium(&single(0.5, 2.0), &tendons(10.0), &Loads::none()).unwrap();
        assert!((s.curvatures[0] - 0.2125).abs() < 1e-4);
        assert!((s.tip.heading - 0.2125 * 0.5).abs() < 1e-4);
    }

    #[test]
    fn single_element_gradient_matches_compliance() {
        let opts = SolverOptions {
            tolerance: 1e-14,
            max_iterations: 2000,
            ..Default::default()
        };
        let ei = 2.0;
        let chain = single(0.3, ei);
        let t = 8.0;
        let h = 1e-3;
        let k = |t: f64| {
            solve_equilibrium_with(&chain, &tendons(t), &Loads::none(), &opts)
                .unwrap()
                .curvatures[0]
        };
        let dk_dm = (k(t + h) - k(t - h)) / (2.0 * h * 0.0425);
        assert!(((dk_dm - 1.0 / ei) * ei).abs() < 1e-6, "{dk_dm}");
    }

    #[test]
    fn cantilever_tip_load_matches_beam_theory_at_small_load() {
        // weightless beam, tiny tip load: δ = F L³ / (3 EI)
        let mut chain = single(1.0, 2.0);
        chain.linear_density = 0.0;
        let s = solve_equilibrium(&chain, &tendons(0.0), &Loads::vertical(9.81, 0.001)).unwrap();
        let f = 0.001 * 9.81;
        let expected = f / (3.0 * 2.0);
        assert!(
            (s.tip_deflection - expected).abs() / expected < 1e-2,
            "{}",
            s.tip_deflection
        );
    }

    #[test]
    fn truncation_keeps_prefix() {
        let mut chain = single(0.4, 2.0);
        chain.elements.push(ChainElement {
            config_index: 1,
            joint: Some(JointId(1)),
            length: 0.07,
            ei: 7.0,
            rest_curvature: 0.0,
        });
        let t = chain.truncated(0.43);
        assert_eq!(t.elements.len(), 2);
        assert!((t.total_length() - 0.43).abs() < 1e-12);
        assert!(chain.truncated(0.0).elements.is_empty());
        let empty = solve_equilibrium(&chain.truncated(0.0), &tendons(5.0), &Loads::vertical(9.81, 0.2)).unwrap();
        assert_eq!(empty.tip, chain.base);
    }

    #[test]
    fn non_convergence_reported() {
        let opts = SolverOptions {
            max_iterations: 2,
            ..Default::default()
        };
        let err = solve_equilibrium_with(&single(1.0, 2.0), &tendons(0.0), &Loads::vertical(9.81, 0.2), &opts);
        assert!(matches!(err, Err(VineError::NonConvergence { iterations: 2, .. })));
    }

    #[test]
    fn buckling_flag_beyond_quarter_turn() {
        // κ L = 0.425 * 1 / 0.2 > π/2
        let s = solve_equilibrium(&single(1.0, 0.2), &tendons(10.0), &Loads::none()).unwrap();
        assert!(s.buckled);
    }

    #[test]
    fn localization_limits() {
        let mut chain = single(0.5, 1e3);
        chain.elements.push(ChainElement {
            config_index: 1,
            joint: Some(JointId(1)),
            length: 0.07,
            ei: 0.05,
            rest_curvature: 0.0,
        });
        chain.elements.push(ChainElement {
            config_index: 2,
            joint: None,
            length: 0.5,
            ei: 1e3,
            rest_curvature: 0.0,
        });
        let s = solve_equilibrium(&chain, &tendons(2.0), &Loads::none()).unwrap();
        assert!(localization_index(&s, 1) > 0.99);
        assert!(localization_index(&s, 7) == 0.0);
    }

    #[test]
    fn bend_to_zero_needs_no_tension() {
        let b = bend_to_angle(
            &single(0.5, 2.0),
            &tendons(0.0),
            TendonId::new(1).unwrap(),
            0.0,
            &Loads::none(),
        )
        .unwrap();
        assert_eq!(b.tension, 0.0);
        assert!(bend_to_angle(
            &single(0.5, 2.0),
            &tendons(0.0),
            TendonId::new(2).unwrap(),
            30.0,
            &Loads::none()
        )
        .is_err());
        assert!(bend_to_angle(
            &single(0.5, 2.0),
            &tendons(0.0),
            TendonId::new(1).unwrap(),
            130.0,
            &Loads::none()
        )
        .is_err());
    }

    #[test]
    fn bend_to_angle_hits_target() {
        let b = bend_to_angle(
            &single(0.5, 2.0),
            &tendons(0.0),
            TendonId::new(1).unwrap(),
            30.0,
            &Loads::none(),
        )
        .unwrap();
        assert!((b.angle_deg - 30.0).abs() <= 0.5);
        // κ L = T r L / EI
        let expected = 30f64.to_radians() * 2.0 / (0.0425 * 0.5);
        assert!((b.tension - expected).abs() / expected < 1e-3);
    }
}
