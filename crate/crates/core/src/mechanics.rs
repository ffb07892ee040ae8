//! Chamber geometry and the closed-form joint relations: pouch deformation,
//! chamber contact force, pressure-dependent joint stiffness, tendon moment
//! and moment-curvature.
//!
//! All quantities are SI: meters, pascals, newtons, radians.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, VineError};
use crate::robot::{JointId, RpjModule, TendonId, TENDON_COUNT};

/// Seam-defined chamber dimensions of one RPJ node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberGeometry {
    /// Flat (uninflated) axial length `l_j`.
    pub flat_length: f64,
    pub width: f64,
    /// Chamber height. Carried as metadata, no relation uses it.
    pub height: f64,
    /// Effective contact area `A_c` of a single chamber.
    pub contact_area: f64,
    /// Radial offset `r_eff` at which the contact force acts.
    pub radial_offset: f64,
    pub chamber_count: u32,
}

impl ChamberGeometry {
    pub fn new(
        flat_length: f64,
        width: f64,
        height: f64,
        contact_area: f64,
        radial_offset: f64,
        chamber_count: u32,
    ) -> Result<Self> {
        let g = Self {
            flat_length,
            width,
            height,
            contact_area,
            radial_offset,
            chamber_count,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("flat_length", self.flat_length),
            ("width", self.width),
            ("height", self.height),
            ("radial_offset", self.radial_offset),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("chamber {name} must be > 0, got {v}")));
            }
        }
        if self.chamber_count < 2 {
            return Err(domain(format!(
                "chamber_count must be >= 2, got {}",
                self.chamber_count
            )));
        }
        let footprint = self.width * self.flat_length;
        if !(self.contact_area > 0.0 && self.contact_area <= footprint * (1.0 + 1e-12)) {
            return Err(domain(format!(
                "contact area {} m² outside (0, w_c·l_j = {footprint}]",
                self.contact_area
            )));
        }
        Ok(())
    }

    /// Nominal node built from two 270 x 70 mm sheets split into four chambers,
    /// mounted on an 85 mm trunk.
    pub fn nominal(contact_area: f64) -> Self {
        Self {
            flat_length: 0.070,
            width: 0.270 / 4.0,
            height: 0.070,
            contact_area,
            radial_offset: TRUNK_RADIUS,
            chamber_count: 4,
        }
    }
}

/// Outer radius of the 85 mm trunk.
pub const TRUNK_RADIUS: f64 = 0.085 / 2.0;

/// Inflated cylindrical-segment state of one chamber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PouchState {
    pub central_angle: f64,
    pub radius_of_curvature: f64,
    pub chord_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub film_thickness: f64,
    pub film_density: f64,
    pub elastic_modulus: f64,
    /// Baseline flexural rigidity of the configuration, N·m².
    pub baseline_ei: f64,
}

impl MaterialSpec {
    /// 75 µm LDPE at 915 kg/m³.
    pub fn ldpe(baseline_ei: f64) -> Self {
        Self {
            film_thickness: 75e-6,
            film_density: 915.0,
            // typical LDPE
            elastic_modulus: 0.2e9,
            baseline_ei,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("film_thickness", self.film_thickness),
            ("film_density", self.film_density),
            ("elastic_modulus", self.elastic_modulus),
            ("baseline_ei", self.baseline_ei),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("material {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Mass per meter of one wall layer of a tube with the given diameter.
    pub fn wall_linear_density(&self, diameter: f64) -> f64 {
        PI * diameter * self.film_thickness * self.film_density
    }
}

/// Pressure limits of the RPJ chambers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLimits {
    pub operating: f64,
    pub bulging_onset: f64,
    pub burst_standalone: f64,
    pub burst_confined: f64,
}

impl Default for PressureLimits {
    fn default() -> Self {
        Self {
            operating: 15.0e3,
            bulging_onset: 19.5e3,
            burst_standalone: 21.4e3,
            burst_confined: 23.0e3,
        }
    }
}

impl PressureLimits {
    /// Burst limit for a joint; a pressurized trunk confines the node.
    pub fn burst_for(&self, trunk_pressure: f64) -> f64 {
        if trunk_pressure > 0.0 {
            self.burst_confined
        } else {
            self.burst_standalone
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PressureState {
    pub trunk_pressure: f64,
    pub joint_pressures: BTreeMap<JointId, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureFlag {
    AboveOperating,
    AboveBurst,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PressureReport {
    pub flags: Vec<(JointId, PressureFlag)>,
}

impl PressureReport {
    pub fn is_burst(&self) -> bool {
        self.flags.iter().any(|(_, f)| *f == PressureFlag::AboveBurst)
    }

    pub fn is_warning(&self) -> bool {
        !self.flags.is_empty()
    }
}

impl PressureState {
    pub fn new(trunk_pressure: f64) -> Self {
        Self {
            trunk_pressure,
            joint_pressures: BTreeMap::new(),
        }
    }

    pub fn with_joint(mut self, id: JointId, pressure: f64) -> Self {
        self.joint_pressures.insert(id, pressure);
        self
    }

    pub fn joint(&self, id: JointId) -> Option<f64> {
        self.joint_pressures.get(&id).copied()
    }

    /// Negative pressures are a hard error. Joint pressures above the burst
    /// or operating limits are flagged, not rejected.
    pub fn validate(&self, limits: &PressureLimits) -> Result<PressureReport> {
        if !(self.trunk_pressure.is_finite() && self.trunk_pressure >= 0.0) {
            return Err(domain(format!(
                "trunk pressure must be >= 0, got {}",
                self.trunk_pressure
            )));
        }
        let burst = limits.burst_for(self.trunk_pressure);
        let mut report = PressureReport::default();
        for (&id, &p) in &self.joint_pressures {
            if !(p.is_finite() && p >= 0.0) {
                return Err(domain(format!("joint {id} pressure must be >= 0, got {p}")));
            }
            if p > burst {
                report.flags.push((id, PressureFlag::AboveBurst));
            } else if p > limits.operating {
                report.flags.push((id, PressureFlag::AboveOperating));
            }
        }
        Ok(report)
    }
}

/// Tendon tensions, indexed 1..=4 around the circumference at 90° spacing.
/// Tendon 1 lies on the +normal side of the bending plane, tendon 3 opposite;
/// tendons 2 and 4 act out of plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TendonState {
    pub tensions: [f64; TENDON_COUNT],
    pub radial_offset: f64,
}

impl TendonState {
    pub fn slack(radial_offset: f64) -> Self {
        Self {
            tensions: [0.0; TENDON_COUNT],
            radial_offset,
        }
    }

    pub fn with_tension(mut self, id: TendonId, tension: f64) -> Self {
        self.tensions[id.index()] = tension;
        self
    }

    pub fn tension(&self, id: TendonId) -> f64 {
        self.tensions[id.index()]
    }

    pub fn validate(&self, trunk_radius: f64) -> Result<()> {
        if let Some(t) = self.tensions.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(domain(format!("tendon tension must be >= 0, got {t}")));
        }
        if !(self.radial_offset > 0.0 && self.radial_offset <= trunk_radius * (1.0 + 1e-12)) {
            return Err(domain(format!(
                "tendon offset {} outside (0, {trunk_radius}]",
                self.radial_offset
            )));
        }
        Ok(())
    }

    /// Net in-plane bending moment from all tendons, counterclockwise positive.
    pub fn planar_moment(&self) -> f64 {
        TendonId::all()
            .map(|id| id.planar_sign() * self.tension(id) * self.radial_offset)
            .sum()
    }
}

/// `l / l_j = sin θ / θ`.
pub fn pouch_ratio(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(domain(format!("central angle {theta} outside (0, π]")));
    }
    Ok(sinc(theta))
}

fn sinc(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        let t2 = theta * theta;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        theta.sin() / theta
    }
}

/// Inverse of [`pouch_ratio`] by bisection on (0, π].
pub fn solve_pouch_angle(ratio: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(domain(format!("pouch ratio {ratio} outside [0, 1]")));
    }
    if ratio == 1.0 {
        return Ok(0.0);
    }
    if ratio == 0.0 {
        return Ok(PI);
    }
    // sinc is strictly decreasing on (0, π]: sinc(lo) > ratio >= sinc(hi)
    let (mut lo, mut hi) = (0.0_f64, PI);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sinc(mid) > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint whose ratio is closer
    if (sinc(lo) - ratio).abs() < (sinc(hi) - ratio).abs() && lo > 0.0 {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// Inflated pouch state from `l_j = 2 r_c θ` and `r_c sin θ = l / 2`.
pub fn pouch_geometry(flat_length: f64, theta: f64) -> Result<PouchState> {
    if !(flat_length.is_finite() && flat_length > 0.0) {
        return Err(domain(format!("flat length must be > 0, got {flat_length}")));
    }
    let ratio = pouch_ratio(theta)?;
    Ok(PouchState {
        central_angle: theta,
        radius_of_curvature: flat_length / (2.0 * theta),
        chord_length: flat_length * ratio,
    })
}

/// Contact force of one chamber. `raw` is `(p_j - p_t) A_c` and may be
/// negative; `effective` is clamped at zero since the membrane cannot pull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactForce {
    pub raw: f64,
    pub effective: f64,
    pub slack: bool,
}

pub fn chamber_contact_force(joint_pressure: f64, trunk_pressure: f64, contact_area: f64) -> Result<ContactForce> {
    if !(contact_area.is_finite() && contact_area > 0.0) {
        return Err(domain(format!("contact area must be > 0, got {contact_area}")));
    }
    if !(joint_pressure.is_finite() && trunk_pressure.is_finite()) {
        return Err(domain("pressures must be finite"));
    }
    let raw = (joint_pressure - trunk_pressure) * contact_area;
    Ok(ContactForce {
        raw,
        effective: raw.max(0.0),
        slack: raw < 0.0,
    })
}

/// Resultant of radially inward chamber forces spaced evenly around the trunk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberResultant {
    pub total: f64,
    pub net_lateral: [f64; 2],
    /// Axial moment of the contact forces about the trunk centerline.
    pub net_torsion: f64,
    /// (max - min) / mean of the individual chamber forces.
    pub spread: f64,
}

pub fn chamber_resultant(forces: &[f64], radial_offset: f64) -> ChamberResultant {
    let n = forces.len();
    let mut lateral = [0.0; 2];
    let mut torsion = 0.0;
    for (k, &f) in forces.iter().enumerate() {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let (s, c) = phi.sin_cos();
        // acts at r_eff·(c, s), pointing to the axis
        let fx = -f * c;
        let fy = -f * s;
        lateral[0] += fx;
        lateral[1] += fy;
        torsion += radial_offset * c * fy - radial_offset * s * fx;
    }
    let total: f64 = forces.iter().sum();
    let mean = total / n.max(1) as f64;
    let max = forces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = forces.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if mean.abs() > 0.0 { (max - min) / mean } else { 0.0 };
    ChamberResultant {
        total,
        net_lateral: lateral,
        net_torsion: torsion,
        spread,
    }
}

/// Affine joint stiffness law: `EI_passive + c_stiff · max(0, Δp) · A_c · r_eff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointStiffness {
    pub ei_passive: f64,
    /// Stiffening coefficient, meters.
    pub c_stiff: f64,
}

pub fn effective_bending_stiffness(joint: &RpjModule, joint_pressure: f64, trunk_pressure: f64) -> Result<f64> {
    let law = joint
        .stiffness
        .ok_or_else(|| VineError::UnfittedCalibration(format!("joint {}", joint.id)))?;
    joint.geometry.validate()?;
    let dp = (joint_pressure - trunk_pressure).max(0.0);
    Ok(law.ei_passive + law.c_stiff * dp * joint.geometry.contact_area * joint.geometry.radial_offset)
}

/// `M = T r`.
pub fn tendon_moment(tension: f64, radial_offset: f64) -> Result<f64> {
    if !(tension.is_finite() && tension >= 0.0) {
        return Err(domain(format!("tension must be >= 0, got {tension}")));
    }
    if !(radial_offset.is_finite() && radial_offset > 0.0) {
        return Err(domain(format!("radial offset must be > 0, got {radial_offset}")));
    }
    Ok(tension * radial_offset)
}

/// `κ = M / EI`.
pub fn curvature_from_moment(moment: f64, ei: f64) -> Result<f64> {
    if !(ei.is_finite() && ei > 0.0) {
        return Err(VineError::DegenerateStiffness(ei));
    }
    Ok(moment / ei)
}
