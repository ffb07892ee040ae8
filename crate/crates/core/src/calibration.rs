//! Embedded reference data, least-squares fits and the calibrated model
//! used by every scenario.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{assemble_chain, solve_equilibrium, tip_deflection_curve, Loads, STANDARD_GRAVITY};
use crate::error::{Result, VineError};
use crate::growth::{CalibrationTable, Thresholds};
use crate::mechanics::{ChamberGeometry, JointStiffness, MaterialSpec, PressureState, TendonState, TRUNK_RADIUS};
use crate::robot::{ChainBuilder, ConfigurationKind, Element, RobotConfiguration, TrunkStiffness};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub x_name: String,
    pub x_unit: String,
    pub y_name: String,
    pub y_unit: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// True for points interpolated between reported anchors.
    pub synthetic: Vec<bool>,
    pub provenance: String,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() || self.x.len() != self.synthetic.len() {
            return Err(VineError::InvalidConfig(format!(
                "{}: series lengths differ",
                self.name
            )));
        }
        if self.x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(VineError::InvalidConfig(format!(
                "{}: independent variable not strictly increasing",
                self.name
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.x.iter().copied().zip(self.y.iter().copied()).collect()
    }

    /// Comma-separated export with a header naming unit and provenance of
    /// each column.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{} [{}] ({}),{} [{}] ({}),origin\n",
            self.x_name, self.x_unit, self.provenance, self.y_name, self.y_unit, self.provenance
        );
        for ((x, y), s) in self.x.iter().zip(&self.y).zip(&self.synthetic) {
            let origin = if *s { "synthetic" } else { "reported" };
            let _ = writeln!(out, "{x:.6},{y:.6},{origin}");
        }
        out
    }

    /// Linear interpolation between `anchors` on an even grid; grid points
    /// that are not anchors are marked synthetic.
    fn interpolated(
        name: &str,
        (x_name, x_unit): (&str, &str),
        (y_name, y_unit): (&str, &str),
        anchors: &[(f64, f64)],
        grid: impl Iterator<Item = f64>,
        provenance: &str,
    ) -> Self {
        let (mut x, mut y, mut synthetic) = (Vec::new(), Vec::new(), Vec::new());
        for g in grid {
            let anchor = anchors.iter().find(|(ax, _)| (ax - g).abs() < 1e-12);
            let value = match anchor {
                Some(&(_, ay)) => ay,
                None => {
                    let i = anchors
                        .windows(2)
                        .position(|w| g > w[0].0 && g < w[1].0)
                        .expect("grid within anchors");
                    let (x0, y0) = anchors[i];
                    let (x1, y1) = anchors[i + 1];
                    y0 + (y1 - y0) * (g - x0) / (x1 - x0)
                }
            };
            x.push(g);
            y.push(value);
            synthetic.push(anchor.is_none());
        }
        Dataset {
            name: name.into(),
            x_name: x_name.into(),
            x_unit: x_unit.into(),
            y_name: y_name.into(),
            y_unit: y_unit.into(),
            x,
            y,
            synthetic,
            provenance: provenance.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    pub residual_norm: f64,
    pub r_squared: f64,
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }
}

fn param(name: &str, value: f64, unit: &str) -> FitParameter {
    FitParameter {
        name: name.into(),
        value,
        unit: unit.into(),
    }
}

/// Coefficient of determination of a prediction, clamped to [0, 1].
pub fn r_squared(y: &[f64], predicted: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(predicted).map(|(a, b)| (a - b).powi(2)).sum();
    if ss_tot <= f64::EPSILON * n {
        return if ss_res <= f64::EPSILON { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Zero-intercept least squares `y ≈ c x`. Returns (c, residual norm, R²).
fn slope_through_origin(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(VineError::SingularFit("independent variable is all zero".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let c = sxy / sxx;
    let predicted: Vec<f64> = x.iter().map(|v| c * v).collect();
    let residual = y
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((c, residual, r_squared(y, &predicted)))
}

/// Ordinary least squares `y ≈ a + b x`. Returns (a, b, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return Err(VineError::SingularFit("need at least two paired samples".into()));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(VineError::SingularFit("independent variable is constant".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let predicted: Vec<f64> = x.iter().map(|v| a + b * v).collect();
    Ok((a, b, r_squared(y, &predicted)))
}

/// Per-chamber contact area from (pressure differential, total force)
/// samples.
pub fn fit_contact_area(samples: &[(f64, f64)], chamber_count: u32) -> Result<FitResult> {
    if samples.len() < 2 || chamber_count == 0 {
        return Err(VineError::SingularFit("need >= 2 samples and >= 1 chamber".into()));
    }
    if samples.iter().any(|(p, f)| !p.is_finite() || !f.is_finite()) {
        return Err(VineError::SingularFit("non-finite sample".into()));
    }
    let (p, f): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let (slope, residual, r2) = slope_through_origin(&p, &f)?;
    let mut warnings = Vec::new();
    if f.iter().all(|v| *v == 0.0) {
        warnings.push("all forces are zero; contact area is zero".into());
    }
    Ok(FitResult {
        parameters: vec![param("contact_area", slope / chamber_count as f64, "m^2")],
        residual_norm: residual,
        r_squared: r2,
        assumptions: vec!["reported chamber pressure is taken as the full differential p_j - p_t".into()],
        warnings,
    })
}

/// Cantilever rigidity from (load kg, deflection m) samples with the load
/// `arm_length` from the clamp: `δ = F L³ / (3 EI)`.
pub fn fit_cantilever_ei(samples: &[(f64, f64)], arm_length: f64, gravity: f64) -> Result<FitResult> {
    if samples.iter().filter(|(m, _)| *m > 0.0).count() < 2 {
        return Err(VineError::SingularFit("need >= 2 nonzero loads".into()));
    }
    if !(arm_length > 0.0 && gravity > 0.0) {
        return Err(VineError::SingularFit("arm length and gravity must be > 0".into()));
    }
    let (m, d): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let force: Vec<f64> = m.iter().map(|v| v * gravity).collect();
    let (compliance, residual, r2) = slope_through_origin(&force, &d)?;
    if compliance <= 0.0 {
        return Err(VineError::SingularFit("non-positive compliance".into()));
    }
    let ei = arm_length.powi(3) / (3.0 * compliance);
    Ok(FitResult {
        parameters: vec![param("ei", ei, "N*m^2"), param("compliance", compliance, "m/N")],
        residual_norm: residual,
        r_squared: r2,
        assumptions: vec!["deflection measured relative to the unloaded shape".into()],
        warnings: Vec::new(),
    })
}

/// Solves the affine joint law for its coefficient.
pub fn fit_stiffening_coefficient(
    baseline_ei: f64,
    reinforced_ei: f64,
    joint_pressure: f64,
    trunk_pressure: f64,
    contact_area: f64,
    radial_offset: f64,
) -> Result<f64> {
    let dp = joint_pressure - trunk_pressure;
    if dp <= 0.0 {
        return Err(VineError::ZeroDifferential);
    }
    if !(contact_area > 0.0 && radial_offset > 0.0) {
        return Err(VineError::SingularFit("contact area and offset must be > 0".into()));
    }
    Ok((reinforced_ei - baseline_ei) / (dp * contact_area * radial_offset))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub value: f64,
    pub unit: String,
    pub note: String,
}

/// Immutable reference values and tabulated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub entries: BTreeMap<String, CatalogEntry>,
    pub datasets: Vec<Dataset>,
}

impl Catalog {
    pub fn lookup(&self, key: &str) -> Result<f64> {
        self.entries
            .get(key)
            .map(|e| e.value)
            .ok_or_else(|| VineError::NotFound(key.to_string()))
    }

    pub fn entry(&self, key: &str) -> Result<&CatalogEntry> {
        self.entries
            .get(key)
            .ok_or_else(|| VineError::NotFound(key.to_string()))
    }

    pub fn dataset(&self, name: &str) -> Result<&Dataset> {
        self.datasets
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| VineError::NotFound(name.to_string()))
    }
}

const CATALOG_ENTRIES: &[(&str, f64, &str, &str)] = &[
    ("growth.baseline.P_init", 1200.0, "Pa", "eversion onset, plain trunk"),
    ("growth.baseline.P_grow", 4200.0, "Pa", "steady growth, plain trunk"),
    (
        "growth.unreinforced.P_init",
        1900.0,
        "Pa",
        "eversion onset, chambers without fabric",
    ),
    (
        "growth.unreinforced.P_grow",
        6000.0,
        "Pa",
        "steady growth, chambers without fabric",
    ),
    (
        "growth.reinforced.P_init",
        2600.0,
        "Pa",
        "eversion onset, fabric-reinforced joint",
    ),
    (
        "growth.reinforced.P_grow",
        6800.0,
        "Pa",
        "steady growth, fabric-reinforced joint",
    ),
    (
        "growth.P_crossing",
        12000.0,
        "Pa",
        "transient growth pressure while a joint inverts",
    ),
    ("growth.growth_speed", 0.05, "m/s", "steady growth speed"),
    ("burst.onset", 19500.0, "Pa", "irreversible bulging, standalone node"),
    ("burst.rupture", 21400.0, "Pa", "rupture, standalone node"),
    (
        "burst.confined",
        23000.0,
        "Pa",
        "rupture on a trunk pressurized to 12 kPa",
    ),
    ("burst.operating", 15000.0, "Pa", "selected joint operating pressure"),
    (
        "contact.pressure",
        15000.0,
        "Pa",
        "chamber pressure of the force anchor",
    ),
    ("contact.total_force", 35.0, "N", "total contact force at the anchor"),
    ("contact.chamber_count", 4.0, "1", "chambers per node"),
    ("contact.spread_min", 0.05, "1", "inter-sensor variation, lower bound"),
    ("contact.spread_max", 0.08, "1", "inter-sensor variation, upper bound"),
    ("cantilever.length", 1.0, "m", "cantilever length"),
    ("cantilever.hook_offset", 0.05, "m", "hook distance from the tip"),
    ("cantilever.joint_length", 0.07, "m", "joint length"),
    ("cantilever.load_max", 0.2, "kg", "largest hook load"),
    ("cantilever.load_step", 0.01, "kg", "load increment"),
    ("cantilever.p_t", 12000.0, "Pa", "trunk pressure"),
    ("cantilever.p_j", 15000.0, "Pa", "joint pressure"),
    (
        "cantilever.baseline.deflection_min",
        0.25,
        "m",
        "plain trunk deflection at largest load, lower",
    ),
    (
        "cantilever.baseline.deflection_max",
        0.30,
        "m",
        "plain trunk deflection at largest load, upper",
    ),
    (
        "cantilever.unreinforced.reduction_min",
        0.40,
        "1",
        "deflection reduction vs plain, lower",
    ),
    (
        "cantilever.unreinforced.reduction_max",
        0.60,
        "1",
        "deflection reduction vs plain, upper",
    ),
    (
        "cantilever.reinforced.reduction_min",
        0.70,
        "1",
        "deflection reduction vs plain, lower",
    ),
    (
        "cantilever.reinforced.reduction_max",
        0.80,
        "1",
        "deflection reduction vs plain, upper",
    ),
    (
        "cantilever.reinforced.deflection_max",
        0.10,
        "m",
        "reinforced deflection bound at largest load",
    ),
    (
        "cantilever.stiffness_ratio_min",
        3.0,
        "1",
        "reinforced/plain stiffness, lower",
    ),
    (
        "cantilever.stiffness_ratio_max",
        4.0,
        "1",
        "reinforced/plain stiffness, upper",
    ),
    ("benchmark.rpj.growth_time", 18.0, "s", "1 m growth time"),
    ("benchmark.lj.growth_time", 34.0, "s", "1 m growth time, layer jamming"),
    (
        "benchmark.growth_time_ratio",
        1.9,
        "1",
        "reported growth-time improvement",
    ),
    ("benchmark.rpj.growth_speed", 5.0, "cm/s", "steady growth speed"),
    (
        "benchmark.lj.growth_speed",
        2.4,
        "cm/s",
        "steady growth speed as tabulated",
    ),
    (
        "benchmark.lj.growth_speed_text",
        2.4e-4,
        "m/s",
        "steady growth speed as stated in the text",
    ),
    (
        "benchmark.growth_speed_ratio",
        2.1,
        "1",
        "reported growth-speed improvement",
    ),
    ("benchmark.rpj.peak_curvature", 90.0, "deg", "at least"),
    ("benchmark.lj.peak_curvature", 100.0, "deg", "approximately"),
    ("benchmark.rpj.rise_time", 0.40, "s", "rise time to full curvature"),
    ("benchmark.lj.rise_time", 2.00, "s", "rise time to full curvature"),
    ("benchmark.rise_time_ratio", 5.0, "1", "reported rise-time improvement"),
    ("lj.P_grow", 17500.0, "Pa", "pressure sustaining layer-jamming growth"),
    ("retraction.p_t", 6000.0, "Pa", "trunk pressure during retraction"),
    ("retraction.speed", 0.02, "m/s", "tail pull speed"),
    ("retraction.free_space_threshold", 0.6, "m", "unsupported length limit"),
    ("arm.link1", 0.30, "m", "first link of the three-joint arm"),
    ("arm.link2", 0.50, "m", "second link"),
    ("arm.link3", 0.40, "m", "third link"),
    ("arm.base_height", 0.115, "m", "outlet height above ground"),
    ("payload.total", 0.202, "kg", "largest carried payload"),
    ("payload.extra", 0.100, "kg", "added mass"),
    ("trunk.diameter", 0.085, "m", "inflated diameter"),
    ("film.thickness", 75e-6, "m", "LDPE film"),
    ("film.density", 915.0, "kg/m^3", "LDPE film"),
];

fn build_catalog() -> Catalog {
    let entries = CATALOG_ENTRIES
        .iter()
        .map(|(k, v, u, n)| {
            (
                k.to_string(),
                CatalogEntry {
                    value: *v,
                    unit: u.to_string(),
                    note: n.to_string(),
                },
            )
        })
        .collect();

    let contact = Dataset::interpolated(
        "contact_force",
        ("pressure", "Pa"),
        ("total_force", "N"),
        &[(0.0, 0.0), (15000.0, 35.0)],
        (0..=10).map(|i| i as f64 * 1500.0),
        "contact force characterization",
    );
    let loads = || (0..=20).map(|i| i as f64 * 0.01);
    let deflection = |name: &str, at_max: f64| {
        Dataset::interpolated(
            name,
            ("load", "kg"),
            ("tip_deflection", "m"),
            &[(0.0, 0.0), (0.2, at_max)],
            loads(),
            "load-deflection characterization",
        )
    };
    let baseline = 0.275;
    let datasets = vec![
        contact,
        deflection("deflection.baseline", baseline),
        deflection("deflection.unreinforced", baseline * 0.5),
        deflection("deflection.reinforced", baseline / 3.5),
        Dataset {
            name: "growth_thresholds".into(),
            x_name: "configuration".into(),
            x_unit: "index".into(),
            y_name: "P_init".into(),
            y_unit: "Pa".into(),
            x: vec![0.0, 1.0, 2.0],
            y: vec![1200.0, 1900.0, 2600.0],
            synthetic: vec![false; 3],
            provenance: "growth pressure characterization".into(),
        },
    ];
    Catalog { entries, datasets }
}

/// Shared, read-only reference catalog.
pub fn embedded_datasets() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

/// Growth thresholds and retraction parameters from the catalog.
pub fn calibration_table(catalog: &Catalog) -> Result<CalibrationTable> {
    let v = |k: &str| catalog.lookup(k);
    let burst = v("burst.rupture")?;
    let speed = v("growth.growth_speed")?;
    let crossing = v("growth.P_crossing")?;
    let mut thresholds = BTreeMap::new();
    thresholds.insert(
        ConfigurationKind::Baseline,
        Thresholds {
            p_init: v("growth.baseline.P_init")?,
            p_grow: v("growth.baseline.P_grow")?,
            p_crossing: v("growth.baseline.P_grow")?,
            burst,
            growth_speed: speed,
        },
    );
    for (kind, key) in [
        (ConfigurationKind::UnreinforcedRpj, "unreinforced"),
        (ConfigurationKind::ReinforcedRpj, "reinforced"),
    ] {
        thresholds.insert(
            kind,
            Thresholds {
                p_init: v(&format!("growth.{key}.P_init"))?,
                p_grow: v(&format!("growth.{key}.P_grow"))?,
                p_crossing: crossing,
                burst,
                growth_speed: speed,
            },
        );
    }
    // surrogate: slower growth sized to the reported full-length time
    let lj_grow = v("lj.P_grow")?;
    thresholds.insert(
        ConfigurationKind::LayerJamming,
        Thresholds {
            p_init: v("growth.reinforced.P_init")?,
            p_grow: lj_grow,
            p_crossing: lj_grow,
            burst,
            growth_speed: v("cantilever.length")? / v("benchmark.lj.growth_time")?,
        },
    );
    let retraction_pressure = v("retraction.p_t")?;
    let diameter = v("trunk.diameter")?;
    let front_area = std::f64::consts::PI * (diameter / 2.0).powi(2);
    let table = CalibrationTable {
        thresholds,
        retraction_speed: v("retraction.speed")?,
        retraction_pressure,
        boundary_pressure: v("burst.operating")?,
        residual_force: RESIDUAL_FRACTION * retraction_pressure * front_area,
    };
    table.validate()?;
    Ok(table)
}

/// Residual retraction force as a fraction of the pressure term at the
/// retraction pressure.
pub const RESIDUAL_FRACTION: f64 = 0.2;

/// Vented-joint rigidity as a fraction of the plain trunk's.
pub const PASSIVE_JOINT_FRACTION: f64 = 0.025;

/// Floor on trunk rigidity when the trunk is vented.
pub const TRUNK_MIN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationFit {
    pub kind: ConfigurationKind,
    /// Target deflection at the largest load.
    pub target_deflection: f64,
    /// Closed-form cantilever fit of the reference series.
    pub cantilever: FitResult,
    /// Trunk rigidity at the reference trunk pressure, tuned so the full
    /// chain reproduces the target deflection.
    pub trunk_ei: f64,
    pub joint: Option<JointStiffness>,
    /// Deflection of the calibrated chain at the largest load.
    pub solved_deflection: f64,
}

impl ConfigurationFit {
    pub fn cantilever_ei(&self) -> f64 {
        self.cantilever.value("ei").unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedModel {
    pub contact: FitResult,
    pub contact_area: f64,
    pub table: CalibrationTable,
    pub ei_passive: f64,
    pub fits: BTreeMap<ConfigurationKind, ConfigurationFit>,
    pub reference_trunk_pressure: f64,
    pub reference_joint_pressure: f64,
    pub hook_offset: f64,
}

fn with_stiffness(
    mut config: RobotConfiguration,
    trunk: TrunkStiffness,
    joint: Option<JointStiffness>,
    baseline_ei: f64,
) -> RobotConfiguration {
    config.trunk_stiffness = Some(trunk);
    config.material = MaterialSpec::ldpe(baseline_ei);
    for e in &mut config.elements {
        if let Element::Joint(j) = e {
            j.stiffness = joint;
        }
    }
    config
}

fn cantilever_geometry(
    name: &str,
    kind: ConfigurationKind,
    contact_area: f64,
    catalog: &Catalog,
) -> Result<RobotConfiguration> {
    let length = catalog.lookup("cantilever.length")?;
    Ok(match kind {
        ConfigurationKind::Baseline | ConfigurationKind::LayerJamming => {
            ChainBuilder::new(name, kind).trunk(length).build()
        }
        _ => {
            let joint = catalog.lookup("cantilever.joint_length")?;
            let side = (length - joint) / 2.0;
            ChainBuilder::new(name, kind)
                .trunk(side)
                .joint(ChamberGeometry::nominal(contact_area))
                .trunk(side)
                .build()
        }
    })
}

impl CalibratedModel {
    /// Runs every fit against the embedded catalog. Deterministic.
    pub fn fit(catalog: &Catalog) -> Result<Self> {
        let g = STANDARD_GRAVITY;
        let contact_ds = catalog.dataset("contact_force")?;
        let chambers = catalog.lookup("contact.chamber_count")? as u32;
        let contact = fit_contact_area(&contact_ds.points(), chambers)?;
        let contact_area = contact.value("contact_area").unwrap_or(0.0);
        let table = calibration_table(catalog)?;
        let p_t = catalog.lookup("cantilever.p_t")?;
        let p_j = catalog.lookup("cantilever.p_j")?;
        let hook = catalog.lookup("cantilever.hook_offset")?;
        let arm = catalog.lookup("cantilever.length")? - hook;
        let load_max = catalog.lookup("cantilever.load_max")?;

        let mut fits = BTreeMap::new();
        let mut baseline_ei = None;
        for (kind, series) in [
            (ConfigurationKind::Baseline, "deflection.baseline"),
            (ConfigurationKind::UnreinforcedRpj, "deflection.unreinforced"),
            (ConfigurationKind::ReinforcedRpj, "deflection.reinforced"),
        ] {
            let ds = catalog.dataset(series)?;
            let cantilever = fit_cantilever_ei(&ds.points(), arm, g)?;
            let ei = cantilever.value("ei").unwrap_or(f64::NAN);
            let base = *baseline_ei.get_or_insert(ei);
            let ei_passive = PASSIVE_JOINT_FRACTION * base;
            let joint = match kind {
                ConfigurationKind::Baseline => None,
                _ => Some(JointStiffness {
                    ei_passive,
                    c_stiff: fit_stiffening_coefficient(ei_passive, ei, p_j, p_t, contact_area, TRUNK_RADIUS)?,
                }),
            };
            let target = *ds.y.last().unwrap_or(&0.0);
            let geometry = cantilever_geometry("fit", kind, contact_area, catalog)?;
            let deflect = |trunk_ei: f64| -> Result<f64> {
                let trunk = TrunkStiffness {
                    ei_ref: trunk_ei,
                    ref_pressure: p_t,
                    min_fraction: TRUNK_MIN_FRACTION,
                };
                let config = with_stiffness(geometry.clone(), trunk, joint, base);
                let pressures = joint_pressures(&config, p_t, p_j);
                let chain = assemble_chain(&config, &pressures)?;
                let loads = Loads::vertical(g, load_max).with_payload_offset(hook);
                Ok(solve_equilibrium(&chain, &TendonState::slack(config.tendon_radial_offset), &loads)?.tip_deflection)
            };
            // deflection falls monotonically with rigidity; bisect in log space
            let (mut lo, mut hi) = (ei / 8.0, ei * 8.0);
            for _ in 0..60 {
                let mid = (lo * hi).sqrt();
                if deflect(mid)? > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi / lo - 1.0 < 1e-7 {
                    break;
                }
            }
            let trunk_ei = (lo * hi).sqrt();
            fits.insert(
                kind,
                ConfigurationFit {
                    kind,
                    target_deflection: target,
                    cantilever,
                    trunk_ei,
                    joint,
                    solved_deflection: deflect(trunk_ei)?,
                },
            );
        }
        let ei_passive = PASSIVE_JOINT_FRACTION * baseline_ei.unwrap_or(f64::NAN);
        Ok(Self {
            contact,
            contact_area,
            table,
            ei_passive,
            fits,
            reference_trunk_pressure: p_t,
            reference_joint_pressure: p_j,
            hook_offset: hook,
        })
    }

    /// Model fitted once against the embedded catalog.
    pub fn standard() -> Result<&'static CalibratedModel> {
        static MODEL: OnceLock<std::result::Result<CalibratedModel, VineError>> = OnceLock::new();
        MODEL
            .get_or_init(|| CalibratedModel::fit(embedded_datasets()))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn fit_for(&self, kind: ConfigurationKind) -> Result<&ConfigurationFit> {
        self.fits
            .get(&kind)
            .ok_or_else(|| VineError::UnfittedCalibration(kind.label().into()))
    }

    /// Pressurized-joint rigidity of the reinforced joint over the plain
    /// trunk's closed-form rigidity.
    pub fn stiffness_ratio(&self) -> Result<f64> {
        let base = self.fit_for(ConfigurationKind::Baseline)?.cantilever_ei();
        let reinforced = self.fit_for(ConfigurationKind::ReinforcedRpj)?.cantilever_ei();
        Ok(reinforced / base)
    }

    fn trunk(&self, kind: ConfigurationKind) -> Result<TrunkStiffness> {
        Ok(TrunkStiffness {
            ei_ref: self.fit_for(kind)?.trunk_ei,
            ref_pressure: self.reference_trunk_pressure,
            min_fraction: TRUNK_MIN_FRACTION,
        })
    }

    fn baseline_ei(&self) -> Result<f64> {
        Ok(self.fit_for(ConfigurationKind::Baseline)?.cantilever_ei())
    }

    /// Attach the calibrated laws of `kind` to an arbitrary geometry.
    pub fn calibrate(&self, config: RobotConfiguration) -> Result<RobotConfiguration> {
        let kind = match config.kind {
            ConfigurationKind::LayerJamming => ConfigurationKind::Baseline,
            k => k,
        };
        let fit = self.fit_for(kind)?;
        let joint = fit.joint.or(self.fit_for(ConfigurationKind::ReinforcedRpj)?.joint);
        let out = with_stiffness(config, self.trunk(kind)?, joint, self.baseline_ei()?);
        out.validate()?;
        Ok(out)
    }

    /// Names accepted by [`CalibratedModel::preset`].
    pub const PRESETS: &'static [&'static str] = &[
        "cantilever_baseline",
        "cantilever_unreinforced",
        "cantilever_reinforced",
        "layer_jamming",
        "shape_locking_arm",
        "retraction_arm",
    ];

    pub fn preset(&self, name: &str) -> Result<RobotConfiguration> {
        let catalog = embedded_datasets();
        let a_c = self.contact_area;
        let kind = match name {
            "cantilever_baseline" => ConfigurationKind::Baseline,
            "cantilever_unreinforced" => ConfigurationKind::UnreinforcedRpj,
            "cantilever_reinforced" => ConfigurationKind::ReinforcedRpj,
            "layer_jamming" => ConfigurationKind::LayerJamming,
            "shape_locking_arm" => {
                // outlet joint, two active joints and a vented distal one
                let c = ChainBuilder::new(name, ConfigurationKind::ReinforcedRpj)
                    .trunk(0.09)
                    .joint(ChamberGeometry::nominal(a_c))
                    .trunk(catalog.lookup("arm.link1")?)
                    .joint(ChamberGeometry::nominal(a_c))
                    .trunk(catalog.lookup("arm.link2")?)
                    .joint(ChamberGeometry::nominal(a_c))
                    .trunk(catalog.lookup("arm.link3")?)
                    .base_height(catalog.lookup("arm.base_height")?)
                    .build();
                return self.calibrate(c);
            }
            "retraction_arm" => {
                let c = ChainBuilder::new(name, ConfigurationKind::ReinforcedRpj)
                    .trunk(0.46)
                    .joint(ChamberGeometry::nominal(a_c))
                    .trunk(catalog.lookup("arm.link2")?)
                    .joint(ChamberGeometry::nominal(a_c))
                    .trunk(catalog.lookup("arm.link3")?)
                    .base_height(catalog.lookup("arm.base_height")?)
                    .build();
                return self.calibrate(c);
            }
            other => return Err(VineError::NotFound(format!("preset {other}"))),
        };
        self.calibrate(cantilever_geometry(name, kind, a_c, catalog)?)
    }
}

/// Pressure state with every joint of `config` at `p_j`.
pub fn joint_pressures(config: &RobotConfiguration, p_t: f64, p_j: f64) -> PressureState {
    config
        .joint_ids()
        .into_iter()
        .fold(PressureState::new(p_t), |s, id| s.with_joint(id, p_j))
}

/// Fitted model plus the solved load-deflection curves of the three
/// cantilever configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub model: CalibratedModel,
    pub stiffness_ratio: f64,
    /// (preset, [(load kg, deflection m)])
    pub curves: Vec<(String, Vec<(f64, f64)>)>,
}

impl CalibratedModel {
    pub fn report(&self) -> Result<CalibrationReport> {
        let catalog = embedded_datasets();
        let step = catalog.lookup("cantilever.load_step")?;
        let max = catalog.lookup("cantilever.load_max")?;
        let loads: Vec<f64> = (0..=(max / step).round() as usize).map(|k| k as f64 * step).collect();
        let mut curves = Vec::new();
        for name in [
            "cantilever_baseline",
            "cantilever_unreinforced",
            "cantilever_reinforced",
        ] {
            let c = self.preset(name)?;
            let chain = assemble_chain(
                &c,
                &joint_pressures(&c, self.reference_trunk_pressure, self.reference_joint_pressure),
            )?;
            let curve = tip_deflection_curve(
                &chain,
                &TendonState::slack(c.tendon_radial_offset),
                STANDARD_GRAVITY,
                self.hook_offset,
                &loads,
            )?;
            curves.push((name.to_string(), curve));
        }
        Ok(CalibrationReport {
            model: self.clone(),
            stiffness_ratio: self.stiffness_ratio()?,
            curves,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn contact_area_from_anchors() {
        let fit = fit_contact_area(&[(0.0, 0.0), (15e3, 35.0)], 4).unwrap();
        assert_relative_eq!(fit.value("contact_area").unwrap(), 35.0 / 60e3, max_relative = 1e-12);
        let zero = fit_contact_area(&[(1e3, 0.0), (2e3, 0.0), (3e3, 0.0)], 4).unwrap();
        assert_eq!(zero.value("contact_area"), Some(0.0));
        assert_eq!(zero.warnings.len(), 1);
        assert!(matches!(
            fit_contact_area(&[(0.0, 1.0), (0.0, 2.0)], 4),
            Err(VineError::SingularFit(_))
        ));
    }

    #[test]
    fn exact_linear_data_has_zero_residual() {
        let samples: Vec<_> = (1..=10)
            .map(|i| (i as f64 * 1500.0, i as f64 * 1500.0 * 2e-3))
            .collect();
        let fit = fit_contact_area(&samples, 4).unwrap();
        assert!(fit.residual_norm < 1e-12);
        assert_relative_eq!(fit.value("contact_area").unwrap(), 5e-4, max_relative = 1e-12);
    }

    #[test]
    fn cantilever_endpoint() {
        let fit = fit_cantilever_ei(&[(0.1, 0.1375), (0.2, 0.275)], 0.95, 9.81).unwrap();
        let ei = fit.value("ei").unwrap();
        assert!((ei - 2.04).abs() < 0.01, "{ei}");
        let doubled = fit_cantilever_ei(&[(0.1, 0.275), (0.2, 0.55)], 0.95, 9.81).unwrap();
        assert_relative_eq!(doubled.value("ei").unwrap(), ei / 2.0, max_relative = 1e-12);
        assert!(fit_cantilever_ei(&[(0.0, 0.0), (0.2, 0.275)], 0.95, 9.81).is_err());
    }

    #[test]
    fn stiffening_coefficient() {
        assert_eq!(
            fit_stiffening_coefficient(2.0, 2.0, 15e3, 12e3, 5.83e-4, 0.0425),
            Ok(0.0)
        );
        let c1 = fit_stiffening_coefficient(2.0, 7.0, 15e3, 12e3, 5.83e-4, 0.0425).unwrap();
        let c2 = fit_stiffening_coefficient(2.0, 7.0, 18e3, 12e3, 5.83e-4, 0.0425).unwrap();
        assert_relative_eq!(c2, c1 / 2.0, max_relative = 1e-12);
        assert_eq!(
            fit_stiffening_coefficient(2.0, 7.0, 12e3, 12e3, 5.83e-4, 0.0425),
            Err(VineError::ZeroDifferential)
        );
    }

    #[test]
    fn catalog_lookups() {
        let c = embedded_datasets();
        assert_eq!(c.lookup("growth.reinforced.P_init"), Ok(2600.0));
        assert_eq!(c.lookup("benchmark.rpj.growth_time"), Ok(18.0));
        assert_eq!(c.lookup("nope"), Err(VineError::NotFound("nope".into())));
        for d in &c.datasets {
            d.validate().unwrap();
        }
    }

    #[test]
    fn csv_marks_interpolated_points() {
        let csv = embedded_datasets().dataset("deflection.baseline").unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert!(lines[0].starts_with("load [kg]"));
        assert_eq!(lines.len(), 22);
        assert!(lines[1].ends_with("reported"));
        assert!(lines[2].ends_with("synthetic"));
        assert!(lines[21].ends_with("reported"));
    }

    #[test]
    fn table_invariants() {
        let t = calibration_table(embedded_datasets()).unwrap();
        t.validate().unwrap();
        let required = t.required_tension(6e3, std::f64::consts::PI * 0.0425f64.powi(2));
        assert_relative_eq!(
            required,
            1.2 * 6e3 * std::f64::consts::PI * 0.0425f64.powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn model_presets_validate() {
        let m = CalibratedModel::standard().unwrap();
        for name in CalibratedModel::PRESETS {
            m.preset(name).unwrap().validate().unwrap();
        }
        assert!(m.preset("unknown").is_err());
        let arm = m.preset("shape_locking_arm").unwrap();
        assert!((arm.total_length() - 1.5).abs() < 1e-12);
        assert!((m.preset("retraction_arm").unwrap().total_length() - 1.5).abs() < 1e-12);
    }
}
