mod common;

use common::*;
use wpt_core::circuit::{LoadSpec, ResonatorParams, RoleKind, SourceSpec};
use wpt_core::metrics::FrequencyResponse;
use wpt_core::sweep::*;
use wpt_core::Error;

fn base(k_tx_rx: f64) -> TopologyBase {
    let coil = ResonatorParams::new(R_COIL, L_COIL, C_COIL).unwrap();
    let drive = ResonatorParams::new(R_COIL, L_DRIVE, L_COIL * C_COIL / L_DRIVE).unwrap();
    TopologyBase {
        driver: Some(drive),
        transmitter: coil,
        receiver: coil,
        load: Some(drive),
        source: SourceSpec { v_source: 1.0, r_source: 50.0 },
        load_spec: LoadSpec { r_load: 50.0 },
        f0: None,
        k_driver_tx: Some(0.002),
        k_tx_rx: Some(k_tx_rx),
        k_rx_load: Some(0.002),
    }
}

fn all_kinds() -> Vec<TopologySpec> {
    [TopologyKind::TwoCoil, TopologyKind::FourCoil, TopologyKind::Clc]
        .into_iter()
        .map(TopologySpec::new)
        .collect()
}

fn grid() -> FrequencyGrid {
    FrequencyGrid::linear(11e6, 14e6, 3001).unwrap()
}

#[test]
fn peaks_agree_with_common_f0() {
    for k in [0.005, 0.01, 0.02] {
        let cmp = topology_compare(&base(k), &all_kinds(), &grid(), &SweepOptions::with_workers(4)).unwrap();
        for o in &cmp.outcomes {
            assert!(((o.peak.frequency - f0()) / f0()).abs() < 0.01, "{k} {}: {}", o.label, o.peak.frequency);
        }
        assert_eq!(cmp.result.labels, vec!["two_coil", "four_coil", "clc"]);
        assert_eq!(cmp.result.rows.len(), 3 * grid().points);
    }
}

#[test]
fn identical_specs_give_identical_curves() {
    let specs = vec![TopologySpec::new(TopologyKind::FourCoil), TopologySpec::new(TopologyKind::FourCoil)];
    let cmp = topology_compare(&base(0.01), &specs, &grid(), &SweepOptions::with_workers(2)).unwrap();
    let (a, b) = (cmp.result.curve(0), cmp.result.curve(1));
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.response, y.response);
    }
}

#[test]
fn four_coil_bandwidth_regression() {
    // golden values from the k_tx_rx = 0.01 configuration on this grid
    let cmp = topology_compare(&base(0.01), &all_kinds(), &grid(), &SweepOptions::with_workers(4)).unwrap();
    let bw: Vec<f64> = cmp.outcomes.iter().map(|o| o.bandwidth.unwrap()).collect();
    assert!(bw[1] < bw[0]);
    let golden = [1_297_962.213_227_478_8, 8_834.563_271_578_401, 19_747.407_530_022_785];
    for (got, want) in bw.iter().zip(golden) {
        assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn clc_matches_the_source_at_f0() {
    let spec = TopologySpec::new(TopologyKind::Clc);
    let model = resolve_topology(&base(0.02), &spec).unwrap();
    let r = FrequencyResponse::evaluate(&model, f0()).unwrap();
    assert!(r.s11.norm() < 1e-6, "{}", r.s11.norm());
    // the shunt inductor appears as a negative mutual between matching mesh and coil
    let dr = model.index_of_kind(RoleKind::Driver).unwrap();
    let tx = model.index_of_kind(RoleKind::Transmitter).unwrap();
    assert!(model.couplings().get(dr, tx) < 0.0);
    for res in model.resonators() {
        assert!(((res.params.resonant_frequency() - f0()) / f0()).abs() < 1e-12);
    }
}

#[test]
fn untunable_clc_is_a_tuning_error() {
    let mut b = base(0.01);
    b.source.r_source = 0.0;
    let err = resolve_topology(&b, &TopologySpec::new(TopologyKind::Clc)).unwrap_err();
    assert!(matches!(err, Error::Tuning(_)));
}

#[test]
fn missing_parameters_are_reported() {
    let mut b = base(0.01);
    b.k_driver_tx = None;
    assert!(resolve_topology(&b, &TopologySpec::new(TopologyKind::FourCoil)).is_err());
    assert!(resolve_topology(&b, &TopologySpec::new(TopologyKind::TwoCoil)).is_ok());
    let mut spec = TopologySpec::new(TopologyKind::FourCoil);
    spec.k_driver_tx = Some(0.003);
    assert!(resolve_topology(&b, &spec).is_ok());
}

#[test]
fn bandwidth_needs_both_crossings() {
    // grid too narrow to see the two-coil half-power points
    let narrow = FrequencyGrid::linear(12.5e6, 12.7e6, 101).unwrap();
    let cmp = topology_compare(&base(0.01), &[TopologySpec::new(TopologyKind::TwoCoil)], &narrow, &SweepOptions::with_workers(1)).unwrap();
    assert_eq!(cmp.outcomes[0].bandwidth, None);
}
