//! Robot description: an ordered chain of trunk segments and RPJ modules
//! clamped at the base station.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VineError};
use crate::mechanics::{ChamberGeometry, JointStiffness, MaterialSpec, TRUNK_RADIUS};

pub const TENDON_COUNT: usize = 4;

/// 1-based joint number, counted from the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct JointId(pub u32);

// Also accepts the string form, since JSON map keys are strings and tagged
// enums buffer them before the key type is known.
impl<'de> Deserialize<'de> for JointId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = JointId;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a joint number")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<JointId, E> {
                u32::try_from(v).map(JointId).map_err(E::custom)
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<JointId, E> {
                u32::try_from(v).map(JointId).map_err(E::custom)
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<JointId, E> {
                v.parse().map(JointId).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 1-based tendon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TendonId(u8);

impl TendonId {
    pub fn new(n: u8) -> Result<Self> {
        if (1..=TENDON_COUNT as u8).contains(&n) {
            Ok(Self(n))
        } else {
            Err(VineError::InvalidConfig(format!("tendon {n} does not exist (1..=4)")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = TendonId> {
        (1..=TENDON_COUNT as u8).map(TendonId)
    }

    /// Sign of the in-plane moment: tendon 1 bends toward +normal, tendon 3
    /// toward -normal, 2 and 4 are out of plane.
    pub fn planar_sign(self) -> f64 {
        match self.0 {
            1 => 1.0,
            3 => -1.0,
            _ => 0.0,
        }
    }
}

impl TryFrom<u8> for TendonId {
    type Error = VineError;
    fn try_from(n: u8) -> Result<Self> {
        Self::new(n)
    }
}

impl From<TendonId> for u8 {
    fn from(id: TendonId) -> u8 {
        id.0
    }
}

impl fmt::Display for TendonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigurationKind {
    Baseline,
    UnreinforcedRpj,
    ReinforcedRpj,
    /// Lumped parameter set, not a physics model.
    LayerJamming,
}

impl ConfigurationKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::UnreinforcedRpj => "unreinforced_rpj",
            Self::ReinforcedRpj => "reinforced_rpj",
            Self::LayerJamming => "layer_jamming",
        }
    }

    /// Caveat carried into every output produced with this configuration.
    pub fn model_note(self) -> Option<&'static str> {
        match self {
            Self::LayerJamming => Some("layer jamming surrogate: lumped parameters, not a physics model"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrunkSegment {
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpjModule {
    pub id: JointId,
    pub length: f64,
    pub geometry: ChamberGeometry,
    pub stiffness: Option<JointStiffness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    Trunk(TrunkSegment),
    Joint(RpjModule),
}

impl Element {
    pub fn length(&self) -> f64 {
        match self {
            Element::Trunk(t) => t.length,
            Element::Joint(j) => j.length,
        }
    }

    pub fn joint(&self) -> Option<&RpjModule> {
        match self {
            Element::Joint(j) => Some(j),
            Element::Trunk(_) => None,
        }
    }
}

/// Trunk flexural rigidity as a function of trunk pressure. Inflated-beam
/// rigidity is taken proportional to pressure, floored at `min_fraction`
/// of the reference value for a vented trunk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrunkStiffness {
    pub ei_ref: f64,
    pub ref_pressure: f64,
    pub min_fraction: f64,
}

impl TrunkStiffness {
    pub fn ei(&self, trunk_pressure: f64) -> f64 {
        let f = (trunk_pressure / self.ref_pressure).max(self.min_fraction);
        self.ei_ref * f
    }
}

/// Axial span `[start, end)` of a joint measured from the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSpan {
    pub id: JointId,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotConfiguration {
    pub name: String,
    pub kind: ConfigurationKind,
    pub elements: Vec<Element>,
    pub trunk_diameter: f64,
    pub material: MaterialSpec,
    pub tendon_radial_offset: f64,
    pub base_height: f64,
    /// Number of film layers carried along the deployed body (outer wall
    /// plus the tail running through it).
    pub wall_layers: u32,
    pub trunk_stiffness: Option<TrunkStiffness>,
}

impl RobotConfiguration {
    pub fn total_length(&self) -> f64 {
        self.elements.iter().map(Element::length).sum()
    }

    pub fn joints(&self) -> impl Iterator<Item = &RpjModule> {
        self.elements.iter().filter_map(Element::joint)
    }

    pub fn joint_ids(&self) -> Vec<JointId> {
        self.joints().map(|j| j.id).collect()
    }

    pub fn joint_spans(&self) -> Vec<JointSpan> {
        let mut s = 0.0;
        let mut out = Vec::new();
        for e in &self.elements {
            let len = e.length();
            if let Element::Joint(j) = e {
                out.push(JointSpan {
                    id: j.id,
                    start: s,
                    end: s + len,
                });
            }
            s += len;
        }
        out
    }

    pub fn joint_span(&self, id: JointId) -> Option<JointSpan> {
        self.joint_spans().into_iter().find(|s| s.id == id)
    }

    /// Arc-length start of every element.
    pub fn element_starts(&self) -> Vec<f64> {
        let mut s = 0.0;
        self.elements
            .iter()
            .map(|e| {
                let start = s;
                s += e.length();
                start
            })
            .collect()
    }

    pub fn front_area(&self) -> f64 {
        let r = self.trunk_diameter / 2.0;
        std::f64::consts::PI * r * r
    }

    pub fn film_linear_density(&self) -> f64 {
        self.material.wall_linear_density(self.trunk_diameter) * self.wall_layers as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(VineError::InvalidConfig(m));
        if self.elements.is_empty() {
            return bad("no elements".into());
        }
        if self.trunk_diameter.is_nan() || self.trunk_diameter <= 0.0 {
            return bad(format!("trunk diameter {} must be > 0", self.trunk_diameter));
        }
        let radius = self.trunk_diameter / 2.0;
        if !(self.tendon_radial_offset > 0.0 && self.tendon_radial_offset <= radius * (1.0 + 1e-12)) {
            return bad(format!(
                "tendon offset {} outside (0, {radius}]",
                self.tendon_radial_offset
            ));
        }
        self.material.validate()?;
        let mut seen = std::collections::BTreeSet::new();
        for (i, e) in self.elements.iter().enumerate() {
            if !(e.length().is_finite() && e.length() > 0.0) {
                return bad(format!("element {i} has non-positive length {}", e.length()));
            }
            if let Element::Joint(j) = e {
                j.geometry.validate()?;
                if !seen.insert(j.id) {
                    return bad(format!("duplicate joint id {}", j.id));
                }
            }
            if i > 0 {
                if let (Element::Joint(_), Element::Joint(_)) = (&self.elements[i - 1], e) {
                    return bad(format!("joints at elements {} and {i} are adjacent", i - 1));
                }
            }
        }
        Ok(())
    }
}

/// Geometry-only builder; stiffness laws are attached by calibration.
#[derive(Debug, Clone)]
pub struct ChainBuilder {
    config: RobotConfiguration,
    next_joint: u32,
}

impl ChainBuilder {
    pub fn new(name: &str, kind: ConfigurationKind) -> Self {
        Self {
            config: RobotConfiguration {
                name: name.to_string(),
                kind,
                elements: Vec::new(),
                trunk_diameter: 2.0 * TRUNK_RADIUS,
                material: MaterialSpec::ldpe(1.0),
                tendon_radial_offset: TRUNK_RADIUS,
                base_height: 0.115,
                wall_layers: 2,
                trunk_stiffness: None,
            },
            next_joint: 1,
        }
    }

    pub fn trunk(mut self, length: f64) -> Self {
        self.config.elements.push(Element::Trunk(TrunkSegment { length }));
        self
    }

    pub fn joint(mut self, geometry: ChamberGeometry) -> Self {
        let id = JointId(self.next_joint);
        self.next_joint += 1;
        self.config.elements.push(Element::Joint(RpjModule {
            id,
            length: geometry.flat_length,
            geometry,
            stiffness: None,
        }));
        self
    }

    pub fn base_height(mut self, h: f64) -> Self {
        self.config.base_height = h;
        self
    }

    pub fn build(self) -> RobotConfiguration {
        self.config
    }
}
