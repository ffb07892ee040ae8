//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vinesim_core::bench::run_benchmark_comparison;
use vinesim_core::calibration::{embedded_datasets, joint_pressures, CalibratedModel};
use vinesim_core::equilibrium::{
    assemble_chain, bend_to_angle, localization_index, solve_equilibrium, tip_deflection_curve, Loads, STANDARD_GRAVITY,
};
use vinesim_core::growth::{free_space_retraction_stability, step_retraction, GrowthState, FREE_SPACE_THRESHOLD};
use vinesim_core::mechanics::{
    chamber_contact_force, chamber_resultant, pouch_ratio, solve_pouch_angle, TendonState, TRUNK_RADIUS,
};
use vinesim_core::robot::{ChainBuilder, ConfigurationKind, JointId, TendonId};
use vinesim_core::scenario::{run_scenario, RunRecord, Scenario};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn model() -> &'static CalibratedModel {
    CalibratedModel::standard().expect("embedded calibration")
}

fn golden(name: &str) -> Result<RunRecord, String> {
    let s = Scenario::golden(name).map_err(|e| e.to_string())?;
    run_scenario(&s, model()).map_err(|e| e.to_string())
}

fn golden_passes(name: &str) -> Outcome {
    let r = golden(name)?;
    let failed: Vec<_> = r
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| format!("{}: {}", a.description, a.detail))
        .collect();
    check(
        failed.is_empty(),
        format!("{} assertions, failures: {failed:?}", r.assertions.len()),
    )
}

fn pouch_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let theta = rng.gen_range(1e-6..PI);
        let back = solve_pouch_angle(pouch_ratio(theta).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        worst = worst.max((back - theta).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst < 1e-9 && elapsed < 1.0,
        format!("worst error {worst:.2e} rad in {elapsed:.3} s"),
    )
}

fn contact_force() -> Outcome {
    let m = model();
    let c = embedded_datasets();
    let p = c.lookup("contact.pressure").unwrap();
    let n = c.lookup("contact.chamber_count").unwrap() as usize;
    let nominal = chamber_contact_force(p, 0.0, m.contact_area).unwrap().effective;
    let target = c.lookup("contact.total_force").unwrap();
    let total = nominal * n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_spread = 0.0f64;
    let mut worst_total = 0.0f64;
    for _ in 0..200 {
        // split the chambers around the nominal so the spread lands in [5 %, 8 %]
        let spread = rng.gen_range(0.05..0.08);
        let mut forces = vec![nominal; n];
        forces[0] *= 1.0 + spread / 2.0;
        forces[1] *= 1.0 - spread / 2.0;
        let r = chamber_resultant(&forces, TRUNK_RADIUS);
        worst_spread = worst_spread.max(r.spread);
        worst_total = worst_total.max((r.total / target - 1.0).abs());
    }
    check(
        (total / target - 1.0).abs() <= 0.05 && worst_spread <= 0.08 + 1e-12 && worst_total <= 0.05,
        format!(
            "total {total:.2} N, perturbed spread <= {worst_spread:.3}, total error <= {:.3}",
            worst_total
        ),
    )
}

fn deflection_curves() -> Result<[Vec<(f64, f64)>; 3], String> {
    let m = model();
    let loads: Vec<f64> = (0..=20).map(|k| 0.01 * k as f64).collect();
    let curve = |name: &str| -> Result<Vec<(f64, f64)>, String> {
        let c = m.preset(name).map_err(|e| e.to_string())?;
        let chain = assemble_chain(
            &c,
            &joint_pressures(&c, m.reference_trunk_pressure, m.reference_joint_pressure),
        )
        .map_err(|e| e.to_string())?;
        tip_deflection_curve(
            &chain,
            &TendonState::slack(c.tendon_radial_offset),
            STANDARD_GRAVITY,
            m.hook_offset,
            &loads,
        )
        .map_err(|e| e.to_string())
    };
    Ok([
        curve("cantilever_baseline")?,
        curve("cantilever_unreinforced")?,
        curve("cantilever_reinforced")?,
    ])
}

fn stiffening() -> Outcome {
    let start = Instant::now();
    let fitted = CalibratedModel::fit(embedded_datasets()).map_err(|e| e.to_string())?;
    let fit_time = start.elapsed().as_secs_f64();
    let [base, unr, rein] = deflection_curves()?;
    let at_max = |c: &[(f64, f64)]| c.last().map(|p| p.1).unwrap_or(f64::NAN);
    let reductions: Vec<f64> = base
        .iter()
        .zip(&unr)
        .filter(|(b, _)| b.0 >= 0.05 - 1e-9)
        .map(|(b, u)| 1.0 - u.1 / b.1)
        .collect();
    let (rmin, rmax) = reductions
        .iter()
        .fold((1.0f64, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    let ratio = fitted.stiffness_ratio().map_err(|e| e.to_string())?;
    let r2 = fitted.fits.values().map(|f| f.cantilever.r_squared).fold(1.0, f64::min);
    let ok = (0.25..=0.30).contains(&at_max(&base))
        && rmin >= 0.40
        && rmax <= 0.60
        && at_max(&rein) < 0.10
        && (3.0..=4.0).contains(&ratio)
        && r2 >= 0.98
        && fit_time < 10.0;
    check(
        ok,
        format!(
            "plain {:.4} m, unreinforced reduction {rmin:.3}..{rmax:.3}, reinforced {:.4} m, ratio {ratio:.2}, min R² {r2:.4}, fit {fit_time:.2} s",
            at_max(&base),
            at_max(&rein)
        ),
    )
}

fn thresholds() -> Outcome {
    let c = embedded_datasets();
    let t = &model().table;
    let mut mismatches = Vec::new();
    for (kind, key) in [
        (ConfigurationKind::Baseline, "baseline"),
        (ConfigurationKind::UnreinforcedRpj, "unreinforced"),
        (ConfigurationKind::ReinforcedRpj, "reinforced"),
    ] {
        let th = t.get(kind).unwrap();
        if th.p_init != c.lookup(&format!("growth.{key}.P_init")).unwrap() {
            mismatches.push(format!("{key} P_init"));
        }
        if th.p_grow != c.lookup(&format!("growth.{key}.P_grow")).unwrap() {
            mismatches.push(format!("{key} P_grow"));
        }
    }
    let rein = t.get(ConfigurationKind::ReinforcedRpj).unwrap();
    if rein.p_crossing != c.lookup("growth.P_crossing").unwrap() {
        mismatches.push("P_crossing".into());
    }
    let stall = golden_passes("crossing_stall").err();
    check(
        mismatches.is_empty() && stall.is_none(),
        format!("mismatches {mismatches:?}, stall scenario {stall:?}"),
    )
}

fn timing() -> Outcome {
    let b = run_benchmark_comparison(model()).map_err(|e| e.to_string())?;
    check(
        b.growth_time_in_band() && b.ratio_in_band(),
        format!(
            "RPJ {:.2} s in {:?}, surrogate {:.2} s, ratio {:.3} in [{:.3}, {:.3}]",
            b.rpj_growth_time, b.rpj_time_band, b.lj_growth_time, b.growth_time_ratio, b.ratio_band.0, b.ratio_band.1
        ),
    )
}

fn retraction() -> Outcome {
    let m = model();
    let c = m.preset("retraction_arm").unwrap();
    let p_t = m.table.retraction_pressure;
    let pressure_term = p_t * c.front_area();
    let required = m.table.required_tension(p_t, c.front_area());
    let state = GrowthState::at_length(1.2);
    let pressures = joint_pressures(&c, p_t, 0.0);
    let held = step_retraction(&state, &c, &m.table, &pressures, required * 0.99, 0.05).map_err(|e| e.to_string())?;
    let moved = step_retraction(&state, &c, &m.table, &pressures, required * 1.01, 0.05).map_err(|e| e.to_string())?;
    let stall_ok = held.insufficient_tension && held.deployed_length == 1.2 && moved.deployed_length < 1.2;
    let long = free_space_retraction_stability(&c, FREE_SPACE_THRESHOLD).map_err(|e| e.to_string())?;
    let short = ChainBuilder::new("short", ConfigurationKind::ReinforcedRpj)
        .trunk(0.2)
        .joint(c.joints().next().unwrap().geometry)
        .trunk(0.3)
        .build();
    let short = free_space_retraction_stability(&short, FREE_SPACE_THRESHOLD).map_err(|e| e.to_string())?;
    let cascade = golden_passes("cascading_retraction");
    let ok = (pressure_term - 34.1).abs() <= 0.1 && stall_ok && !long.stable && short.stable && cascade.is_ok();
    check(
        ok,
        format!(
            "pressure term {pressure_term:.2} N, required {required:.2} N, stall {stall_ok}, gate 1.4 m {} / 0.5 m {}, cascade {cascade:?}",
            long.stable, short.stable
        ),
    )
}

fn localization() -> Outcome {
    let m = model();
    let arm = m.preset("shape_locking_arm").unwrap();
    let p = joint_pressures(&arm, m.reference_trunk_pressure, m.reference_joint_pressure).with_joint(JointId(3), 0.0);
    let chain = assemble_chain(&arm, &p).map_err(|e| e.to_string())?;
    let tendons = TendonState::slack(arm.tendon_radial_offset);
    let loads = Loads::vertical(STANDARD_GRAVITY, 0.0);
    let bend = bend_to_angle(&chain, &tendons, TendonId::new(1).unwrap(), 45.0, &loads).map_err(|e| e.to_string())?;
    let j3 = chain.element_of_joint(JointId(3)).unwrap();
    let share = localization_index(&bend.shape, j3);
    let trunk_ei = arm.trunk_stiffness.unwrap().ei(m.reference_trunk_pressure);
    let uniform = solve_equilibrium(
        &chain.with_uniform_ei(trunk_ei),
        &tendons.with_tension(TendonId::new(1).unwrap(), bend.tension),
        &loads,
    )
    .map_err(|e| e.to_string())?;
    let locking = golden_passes("shape_locking");
    check(
        share >= 0.8 && uniform.localization_index < 0.5 && locking.is_ok(),
        format!(
            "joint 3 share {share:.3} at {:.2} N, uniform max share {:.3}, locking scenario {locking:?}",
            bend.tension, uniform.localization_index
        ),
    )
}

fn payload() -> Outcome {
    let r = golden("payload_hold")?;
    let loaded = r.sample_at(23.0).ok_or("no sample at 23 s")?;
    let lighter = r.final_sample().ok_or("no samples")?;
    let ok = r.passed() && !r.samples.iter().any(|s| s.buckled) && -lighter.tip[1] < -loaded.tip[1];
    check(
        ok,
        format!(
            "202 g deflection {:.4} m, tip y {:.4} -> {:.4} m after removing 100 g",
            loaded.tip_deflection, loaded.tip[1], lighter.tip[1]
        ),
    )
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for name in vinesim_core::scenario::golden_names() {
        let runs: Vec<String> = (0..3)
            .map(|_| golden(name).map(|r| r.to_csv()))
            .collect::<Result<_, _>>()?;
        if runs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(name);
        }
    }
    check(differing.is_empty(), format!("non-identical CSV: {differing:?}"))
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("pouch angle round trip", pouch_round_trip),
        ("contact force and spread", contact_force),
        ("joint stiffening against the plain trunk", stiffening),
        ("growth thresholds and crossing stall", thresholds),
        ("growth time and surrogate ratio", timing),
        ("cascading retraction", retraction),
        ("bend localization and shape locking", localization),
        ("payload hold", payload),
        ("golden run determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(d) => println!("PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
