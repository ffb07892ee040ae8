use std::f64::consts::PI;

use proptest::prelude::*;
use vinesim_core::calibration::{
    embedded_datasets, fit_cantilever_ei, fit_contact_area, joint_pressures, CalibratedModel,
};
use vinesim_core::equilibrium::{assemble_chain, solve_equilibrium, Chain, Loads, STANDARD_GRAVITY};
use vinesim_core::growth::{
    plan_cascading_retraction, step_growth, step_retraction, GrowthPhase, GrowthState, RetractionAction,
    BOUNDARY_EPSILON,
};
use vinesim_core::mechanics::{
    chamber_contact_force, effective_bending_stiffness, pouch_geometry, pouch_ratio, solve_pouch_angle, PressureState,
    TendonState,
};
use vinesim_core::robot::{ConfigurationKind, JointId, TendonId};
use vinesim_core::VineError;

fn model() -> &'static CalibratedModel {
    CalibratedModel::standard().unwrap()
}

fn reinforced_chain(p_j: f64) -> Chain {
    let m = model();
    let c = m.preset("cantilever_reinforced").unwrap();
    assemble_chain(&c, &joint_pressures(&c, m.reference_trunk_pressure, p_j)).unwrap()
}

fn slack() -> TendonState {
    TendonState::slack(0.0425)
}

fn payload(m: f64) -> Loads {
    Loads::vertical(STANDARD_GRAVITY, m).with_payload_offset(model().hook_offset)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pouch_angle_round_trip(theta in 1e-3f64..PI) {
        let back = solve_pouch_angle(pouch_ratio(theta).unwrap()).unwrap();
        prop_assert!((back - theta).abs() < 1e-9, "{theta} -> {back}");
    }

    #[test]
    fn pouch_geometry_consistent(l in 0.01f64..0.2, theta in 1e-3f64..PI) {
        let g = pouch_geometry(l, theta).unwrap();
        prop_assert!((2.0 * g.radius_of_curvature * theta - l).abs() < 1e-12);
        prop_assert!((g.radius_of_curvature * theta.sin() - g.chord_length / 2.0).abs() < 1e-12);
        prop_assert!(g.chord_length <= l + 1e-15);
    }

    #[test]
    fn contact_force_never_pulls(p_j in 0.0f64..25e3, p_t in 0.0f64..25e3, a in 1e-5f64..1e-3) {
        let f = chamber_contact_force(p_j, p_t, a).unwrap();
        prop_assert!(f.effective >= 0.0);
        prop_assert_eq!(f.slack, p_j < p_t);
        if p_j >= p_t {
            prop_assert!((f.effective - (p_j - p_t) * a).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_stiffness_monotone_in_pressure(a in 0.0f64..20e3, b in 0.0f64..20e3, p_t in 0.0f64..15e3) {
        let c = model().preset("cantilever_reinforced").unwrap();
        let j = c.joints().next().unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let e_lo = effective_bending_stiffness(j, lo, p_t).unwrap();
        let e_hi = effective_bending_stiffness(j, hi, p_t).unwrap();
        prop_assert!(e_lo <= e_hi);
        prop_assert!(e_lo >= j.stiffness.unwrap().ei_passive);
    }

    #[test]
    fn cantilever_fit_round_trip(ei in 0.5f64..20.0, arm in 0.3f64..1.5, n in 3usize..25) {
        let g = STANDARD_GRAVITY;
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let m = 0.01 * k as f64;
                (m, m * g * arm.powi(3) / (3.0 * ei))
            })
            .collect();
        let fit = fit_cantilever_ei(&samples, arm, g).unwrap();
        prop_assert!((fit.value("ei").unwrap() / ei - 1.0).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn contact_area_fit_round_trip(area in 1e-5f64..1e-3, n in 2usize..10) {
        let samples: Vec<(f64, f64)> = (1..=n).map(|k| {
            let dp = 2000.0 * k as f64;
            (dp, 4.0 * area * dp)
        }).collect();
        let fit = fit_contact_area(&samples, 4).unwrap();
        prop_assert!((fit.value("contact_area").unwrap() / area - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_loads_superpose(m1 in 0.001f64..0.025, m2 in 0.001f64..0.025) {
        let chain = reinforced_chain(15e3);
        let d = |m: f64| solve_equilibrium(&chain, &slack(), &payload(m)).unwrap().tip_deflection;
        let (a, b, ab) = (d(m1), d(m2), d(m1 + m2));
        prop_assert!((ab - (a + b)).abs() <= 0.02 * ab + 1e-7, "{a} + {b} vs {ab}");
    }

    #[test]
    fn rigid_rotation_of_frame(phi in -PI..PI, m in 0.0f64..0.2, t in 0.0f64..8.0) {
        let chain = reinforced_chain(15e3);
        let tendons = slack().with_tension(TendonId::new(1).unwrap(), t);
        let loads = payload(m);
        let a = solve_equilibrium(&chain, &tendons, &loads).unwrap();
        let mut turned = chain.clone();
        turned.base.heading += phi;
        let (s, c) = phi.sin_cos();
        let g = loads.gravity;
        let rotated = Loads { gravity: [c * g[0] - s * g[1], s * g[0] + c * g[1]], ..loads };
        let b = solve_equilibrium(&turned, &tendons, &rotated).unwrap();
        for (ka, kb) in a.curvatures.iter().zip(&b.curvatures) {
            prop_assert!((ka - kb).abs() < 1e-6, "{ka} vs {kb}");
        }
        prop_assert!((a.tip_deflection - b.tip_deflection).abs() < 1e-6);
    }

    #[test]
    fn softest_uniform_chain_bounds_deflection(p_j in 0.0f64..20e3, m in 0.01f64..0.2) {
        let chain = reinforced_chain(p_j);
        let actual = solve_equilibrium(&chain, &slack(), &payload(m)).unwrap();
        // a vented joint makes the bound a hinge-soft beam that folds past
        // what the relaxation can follow; that is still a bound
        match solve_equilibrium(&chain.with_uniform_ei(chain.min_ei()), &slack(), &payload(m)) {
            Ok(bound) => prop_assert!(bound.buckled || bound.tip_deflection >= actual.tip_deflection - 1e-9),
            Err(e) => prop_assert!(matches!(e, VineError::NonConvergence { .. }), "{e}"),
        }
    }

    #[test]
    fn stiffer_joint_sags_less(a in 0.0f64..20e3, b in 0.0f64..20e3) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d = |p| solve_equilibrium(&reinforced_chain(p), &slack(), &payload(0.2)).unwrap().tip_deflection;
        prop_assert!(d(hi) <= d(lo) + 1e-9);
    }

    #[test]
    fn growth_never_shortens(pressures in prop::collection::vec(0.0f64..20e3, 1..300)) {
        let m = model();
        for preset in ["cantilever_reinforced", "shape_locking_arm", "layer_jamming"] {
            let c = m.preset(preset).unwrap();
            let mut s = GrowthState::idle();
            for p in &pressures {
                let next = step_growth(&s, &c, &m.table, *p, 0.05).unwrap();
                prop_assert!(next.deployed_length >= s.deployed_length);
                prop_assert!(next.deployed_length <= c.total_length() + 1e-12);
                s = next;
            }
        }
    }

    #[test]
    fn retraction_never_lengthens(start in 0.0f64..1.4, tensions in prop::collection::vec(0.0f64..60.0, 1..200)) {
        let m = model();
        let c = m.preset("retraction_arm").unwrap();
        let p = joint_pressures(&c, 6000.0, 0.0);
        let mut s = GrowthState::at_length(start);
        for t in &tensions {
            let next = step_retraction(&s, &c, &m.table, &p, *t, 0.05).unwrap();
            prop_assert!(next.deployed_length <= s.deployed_length);
            prop_assert!(next.deployed_length >= 0.0);
            s = next;
        }
    }

    /// Executing the cascading plan never brings the front within the
    /// boundary margin of a pressurized joint and always finishes retracted.
    #[test]
    fn cascading_plan_is_safe(start in 0.05f64..1.4) {
        let m = model();
        let c = m.preset("retraction_arm").unwrap();
        let plan = plan_cascading_retraction(&c, &m.table, start).unwrap();
        let spans = c.joint_spans();
        let mut pressures = joint_pressures(&c, 0.0, 0.0);
        let mut s = GrowthState::at_length(start);
        let tension = m.table.required_tension(m.table.retraction_pressure, c.front_area()) + 1.0;
        let safe = |s: &GrowthState, p: &PressureState| {
            spans.iter().all(|sp| {
                let engaged = p.joint(sp.id).unwrap_or(0.0) > p.trunk_pressure;
                !engaged || sp.start >= s.deployed_length || s.deployed_length >= sp.end + BOUNDARY_EPSILON - 1e-9
            })
        };
        for stage in &plan.stages {
            for action in &stage.actions {
                match *action {
                    RetractionAction::PressurizeJoint { joint, pressure } => pressures = pressures.with_joint(joint, pressure),
                    RetractionAction::ReleaseJoint { joint } => pressures = pressures.with_joint(joint, 0.0),
                    RetractionAction::SetTrunkPressure { pressure } => pressures.trunk_pressure = pressure,
                    RetractionAction::PullTail { until_length, .. } => {
                        for _ in 0..10_000 {
                            if s.deployed_length <= until_length + 1e-9 || s.phase == GrowthPhase::RetractBoundaryHold {
                                break;
                            }
                            s = step_retraction(&s, &c, &m.table, &pressures, tension, 0.05).unwrap();
                            prop_assert!(safe(&s, &pressures), "front {} with {:?}", s.deployed_length, pressures);
                        }
                        s.phase = GrowthPhase::RetractPulling;
                    }
                }
                prop_assert!(safe(&s, &pressures));
            }
        }
        prop_assert_eq!(s.deployed_length, 0.0);
    }
}

#[test]
fn calibration_is_deterministic() {
    let a = serde_json::to_string(&CalibratedModel::fit(embedded_datasets()).unwrap()).unwrap();
    let b = serde_json::to_string(&CalibratedModel::fit(embedded_datasets()).unwrap()).unwrap();
    assert_eq!(a, b);
    let c1 = serde_json::to_string(embedded_datasets()).unwrap();
    let c2 = serde_json::to_string(embedded_datasets()).unwrap();
    assert_eq!(c1, c2);
}

#[test]
fn rigidity_ordering() {
    let m = model();
    let ei = |k| m.fit_for(k).unwrap().cantilever_ei();
    assert!(ei(ConfigurationKind::Baseline) < ei(ConfigurationKind::UnreinforcedRpj));
    assert!(ei(ConfigurationKind::UnreinforcedRpj) < ei(ConfigurationKind::ReinforcedRpj));
    let c = m.preset("cantilever_reinforced").unwrap();
    let j = c.joints().next().unwrap();
    let vented = effective_bending_stiffness(j, 0.0, 12e3).unwrap();
    let engaged = effective_bending_stiffness(j, 15e3, 12e3).unwrap();
    assert!(vented < engaged);
}

#[test]
fn missing_joint_pressure_is_rejected() {
    let c = model().preset("cantilever_reinforced").unwrap();
    let err = assemble_chain(&c, &PressureState::new(12e3)).unwrap_err();
    assert_eq!(err, VineError::MissingJointPressure(JointId(1)));
}
