#![allow(dead_code)]

use wpt_core::circuit::{LoadSpec, MMUnitCellParams, ResonatorNode, ResonatorParams, Role, RoleKind, SourceSpec};
use wpt_core::coupling::{CoilGeometry, CoilShape, CouplingPlan, Layout, PairLaw};
use wpt_core::scenario::ModelTemplate;
use wpt_core::sweep::FrequencyGrid;

pub const L_DRIVE: f64 = 0.7e-3;
pub const L_COIL: f64 = 4e-6;
pub const C_COIL: f64 = 40e-12;
pub const L_CELL: f64 = 1.49e-6;
pub const C_CELL: f64 = 100e-12;
pub const R_COIL: f64 = 0.05;

pub fn f0() -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * (L_COIL * C_COIL).sqrt())
}

pub fn table1_resonators(cells: u32) -> Vec<ResonatorNode> {
    let c_drive = L_COIL * C_COIL / L_DRIVE;
    let drive = ResonatorParams::new(R_COIL, L_DRIVE, c_drive).unwrap();
    let coil = ResonatorParams::new(R_COIL, L_COIL, C_COIL).unwrap();
    let cell = ResonatorParams::new(R_COIL, L_CELL, C_CELL).unwrap();
    let mut out = vec![
        ResonatorNode::new(Role::Driver, drive),
        ResonatorNode::new(Role::Transmitter, coil),
    ];
    out.extend((1..=cells).map(|i| ResonatorNode::new(Role::MmCell(i), cell)));
    out.push(ResonatorNode::new(Role::Receiver, coil));
    out.push(ResonatorNode::new(Role::Load, drive));
    out
}

/// Mirror-symmetric reference: coaxial 3-turn loops (coils 30 mm, cells
/// 20 mm), driver and load attached by k = 0.002, slab at mid-gap.
pub fn reference_template(distance: f64) -> ModelTemplate {
    let coil = CoilShape { radius: 0.03, turns: 3 };
    let geometry = CoilGeometry {
        driver: None,
        transmitter: Some(coil),
        cell: Some(CoilShape { radius: 0.02, turns: 3 }),
        receiver: Some(coil),
        load: None,
    };
    let plan = CouplingPlan::analytic(geometry)
        .with_rule(RoleKind::Driver, RoleKind::Transmitter, PairLaw::Coefficient(0.002))
        .with_rule(RoleKind::Receiver, RoleKind::Load, PairLaw::Coefficient(0.002));
    let cell = MMUnitCellParams {
        r_ohmic: R_COIL,
        r_dielectric: 0.0,
        c_stray: 0.0,
        c_compensation: C_CELL,
        inductance: L_CELL,
    };
    ModelTemplate {
        resonators: table1_resonators(9),
        plan,
        layout: Layout {
            driver_offset: 0.01,
            transfer_distance: distance,
            slab_position: 0.5 * distance,
            load_offset: 0.01,
        },
        source: SourceSpec { v_source: 1.0, r_source: 50.0 },
        load: LoadSpec { r_load: 50.0 },
        cell: Some(cell),
    }
}

pub fn tuned_reference(distance: f64) -> ModelTemplate {
    reference_template(distance).with_slab_tuned_to(f0()).unwrap()
}

/// Fine grid around the coil resonance; the loops have Q in the thousands.
pub fn narrow_grid() -> FrequencyGrid {
    FrequencyGrid::linear(12.4e6, 12.8e6, 801).unwrap()
}
