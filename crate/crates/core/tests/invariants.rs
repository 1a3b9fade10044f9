mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use common::*;
use wpt_core::circuit::*;
use wpt_core::coupling::{build_paper_couplings, coaxial_loop_mutual, LoopGeometry};
use wpt_core::linalg::norm_2;
use wpt_core::metrics::{pte, s21, voltage_gain, FrequencyResponse};
use wpt_core::Error;

/// Chain of `n_cells` cells between transmitter and receiver, optionally
/// with driver and load loops, random lumped values and random couplings
/// with |k| ≤ 1 on every pair.
fn model_strategy(lossless: bool) -> impl Strategy<Value = SystemModel> {
    (0usize..4, any::<bool>()).prop_flat_map(move |(n_cells, four)| {
        let n = n_cells + if four { 4 } else { 2 };
        let pairs = n * (n - 1) / 2;
        (
            Just((n_cells, four)),
            prop::collection::vec((0.0f64..20.0, 1e-7f64..1e-4, 1e-12f64..1e-9), n),
            prop::collection::vec(-1.0f64..1.0, pairs),
            (0.0f64..100.0, 0.1f64..100.0, 0.1f64..100.0),
        )
    })
    .prop_map(move |((n_cells, four), params, ks, (vs, rs, rl))| {
        let mut roles = Vec::new();
        if four {
            roles.push(Role::Driver);
        }
        roles.push(Role::Transmitter);
        roles.extend((1..=n_cells as u32).map(Role::MmCell));
        roles.push(Role::Receiver);
        if four {
            roles.push(Role::Load);
        }
        let resonators: Vec<ResonatorNode> = roles
            .into_iter()
            .zip(&params)
            .map(|(role, &(r, l, c))| ResonatorNode::new(role, ResonatorParams::new(if lossless { 0.0 } else { r }, l, c).unwrap()))
            .collect();
        let n = resonators.len();
        let mut m = CouplingSet::zeros(n);
        let mut it = ks.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let l = (resonators[i].params.inductance * resonators[j].params.inductance).sqrt();
                m.set(i, j, it.next().unwrap() * l);
            }
        }
        SystemModel::new(resonators, m, SourceSpec { v_source: vs.max(1e-3), r_source: rs }, LoadSpec { r_load: rl }).unwrap()
    })
}

fn omega_for(model: &SystemModel, t: f64) -> f64 {
    // frequencies spread around the first loop's resonance
    2.0 * PI * model.resonators()[0].params.resonant_frequency() * (0.2 + 1.6 * t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn kvl_matrix_is_exactly_symmetric(model in model_strategy(false), t in 0.0f64..1.0) {
        let (z, _) = build_kvl_matrix(&model, omega_for(&model, t)).unwrap();
        prop_assert!(z.is_symmetric());
    }

    #[test]
    fn currents_scale_linearly(model in model_strategy(false), t in 0.0f64..1.0, alpha in 0.01f64..100.0) {
        let omega = omega_for(&model, t);
        let src = model.source();
        let scaled = model.with_source(SourceSpec { v_source: src.v_source * alpha, ..src }).unwrap();
        if let (Ok(a), Ok(b)) = (solve_currents(&model, omega), solve_currents(&scaled, omega)) {
            let scale = norm_2(&a).max(1e-300);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x * alpha - y).norm() <= 1e-9 * alpha * scale);
            }
            let (ga, gb) = (voltage_gain(&model, &a).unwrap(), voltage_gain(&scaled, &b).unwrap());
            prop_assert!((ga - gb).norm() <= 1e-12 * ga.norm().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn accepted_solves_meet_the_residual_bound(model in model_strategy(false), t in 0.0f64..1.0) {
        let omega = omega_for(&model, t);
        if let Ok(i) = solve_currents(&model, omega) {
            let (z, v) = build_kvl_matrix(&model, omega).unwrap();
            let r: Vec<Complex64> = z.mul_vec(&i).iter().zip(&v).map(|(a, b)| a - b).collect();
            prop_assert!(norm_2(&r) <= 1e-10 * norm_2(&v));
        }
    }

    #[test]
    fn passivity(model in model_strategy(false), t in 0.0f64..1.0) {
        match FrequencyResponse::evaluate(&model, omega_for(&model, t) / (2.0 * PI)) {
            Ok(r) => prop_assert!(r.pte <= 100.0 + 1e-6, "{}", r.pte),
            Err(Error::SingularSystem { .. }) => {}
            Err(e) => prop_assert!(false, "{e:?}"),
        }
    }

    #[test]
    fn lossless_energy_audit(model in model_strategy(true), t in 0.0f64..1.0) {
        match FrequencyResponse::evaluate(&model, omega_for(&model, t) / (2.0 * PI)) {
            Ok(r) => prop_assert!((r.s11.norm_sqr() + r.s21.norm_sqr() - 1.0).abs() <= 1e-8),
            Err(Error::SingularSystem { .. }) => {}
            Err(e) => prop_assert!(false, "{e:?}"),
        }
    }

    #[test]
    fn pte_is_four_gain_squared_for_equal_ports(re in -1.0f64..1.0, im in -1.0f64..1.0, r in 0.1f64..1e3) {
        let g = Complex64::new(re, im);
        let direct = (2.0 * g).norm_sqr() * 100.0;
        prop_assert!((pte(s21(g, r, r).unwrap()) - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn neglect_rule_matches_manual_edit(model in model_strategy(false), t in 0.0f64..1.0) {
        let policy = NeglectPolicy::paper();
        let auto = model.with_neglect(&policy);
        let mut manual = model.couplings().clone();
        let res = model.resonators();
        for i in 0..res.len() {
            for j in i + 1..res.len() {
                if policy.covers(res[i].role.kind(), res[j].role.kind()) {
                    manual.set(i, j, 0.0);
                }
            }
        }
        let manual = model.with_couplings(manual).unwrap();
        let omega = omega_for(&model, t);
        prop_assert_eq!(solve_currents(&auto, omega), solve_currents(&manual, omega));
    }

    #[test]
    fn zero_coupled_resonators_can_be_deleted(model in model_strategy(false), t in 0.0f64..1.0) {
        // isolate every cell, then delete them
        let mut m = model.couplings().clone();
        let cells = model.cell_indices();
        for &c in &cells {
            for j in 0..m.dim() {
                if j != c {
                    m.set(c, j, 0.0);
                }
            }
        }
        let isolated = model.with_couplings(m).unwrap();
        let bare = remove_cells(&isolated).unwrap();
        let omega = omega_for(&model, t);
        if let (Ok(full), Ok(reduced)) = (solve_currents(&isolated, omega), solve_currents(&bare, omega)) {
            let kept: Vec<Complex64> = full.iter().enumerate().filter(|(i, _)| !cells.contains(i)).map(|(_, c)| *c).collect();
            for (a, b) in kept.iter().zip(&reduced) {
                prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(norm_2(&reduced) * 1e-6).max(1e-300));
            }
        }
    }

    #[test]
    fn mutual_decreases_with_separation(a in 0.005f64..0.2, b in 0.005f64..0.2, d in 0.001f64..0.5, step in 1e-3f64..0.1) {
        let near = coaxial_loop_mutual(&LoopGeometry::new(a, 1, 0.0).unwrap(), &LoopGeometry::new(b, 1, d).unwrap()).unwrap();
        let far = coaxial_loop_mutual(&LoopGeometry::new(a, 1, 0.0).unwrap(), &LoopGeometry::new(b, 1, d + step).unwrap()).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn built_couplings_respect_bounds(d in 0.05f64..0.4, frac in 0.05f64..0.95) {
        let t = tuned_reference(d).with_slab_position(frac * d).unwrap();
        let m = build_paper_couplings(&t.resonators, &t.plan, &t.layout).unwrap();
        for i in 0..m.dim() {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..m.dim() {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                let bound = (t.resonators[i].params.inductance * t.resonators[j].params.inductance).sqrt();
                prop_assert!(m.get(i, j).abs() <= bound);
            }
        }
    }
}

#[test]
fn uncoupled_model_isolates_the_source_loop() {
    let model = tuned_reference(0.2).instantiate().unwrap();
    let bare = model.with_couplings(CouplingSet::zeros(model.len())).unwrap();
    let i = solve_currents(&bare, 2.0 * PI * f0()).unwrap();
    let src = bare.source_index().unwrap();
    for (k, c) in i.iter().enumerate() {
        if k != src {
            assert_eq!(*c, Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn reciprocity_under_port_exchange() {
    // mirror-symmetric reference: driving from the load side gives the same transfer
    let model = tuned_reference(0.2).with_slab_position(0.07).unwrap().instantiate().unwrap();
    let n = model.len();
    let mirrored_res: Vec<ResonatorNode> = model.resonators().to_vec();
    let rows = model.couplings().rows();
    let flipped: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| rows[n - 1 - i][n - 1 - j]).collect()).collect();
    let mirrored = model.with_resonators(mirrored_res).unwrap().with_couplings(CouplingSet::from_rows(&flipped).unwrap()).unwrap();
    for f in [12.5e6, f0(), 12.7e6] {
        let a = FrequencyResponse::evaluate(&model, f).unwrap().gain.norm();
        let b = FrequencyResponse::evaluate(&mirrored, f).unwrap().gain.norm();
        assert!((a - b).abs() <= 1e-10 * a, "{a} {b}");
    }
}
