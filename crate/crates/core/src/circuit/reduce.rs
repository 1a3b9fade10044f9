//! Collapsing a slab of identical, identically coupled unit cells.
//!
//! With `n` identical cells that couple equally to every other loop (and
//! equally to each other through `M_cc`), the symmetric solution has one
//! shared cell current `I`. Writing `J = sqrt(n)·I`, each cell row scaled by
//! `sqrt(n)` reads
//!
//! ```text
//! (Z_c + jω(n−1)M_cc)·J + Σ_k jω·sqrt(n)·M_ck·I_k = 0
//! ```
//!
//! and every other row sees `Σ_cells jωM_ck·I = jω·sqrt(n)·M_ck·J`. The slab is
//! therefore one loop with `L_eff = L_c + (n−1)·M_cc`, unchanged `R` and `C`,
//! and couplings scaled by `sqrt(n)`; the matrix stays symmetric. The reduced
//! cell current is `sqrt(n)` times the per-cell current.

use super::{ResonatorNode, ResonatorParams, Role, SystemModel};
use crate::error::{Error, Result};

const MATCH_TOL: f64 = 1e-12;

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs())
}

fn same_params(a: &ResonatorParams, b: &ResonatorParams) -> bool {
    same(a.resistance, b.resistance) && same(a.inductance, b.inductance) && same(a.capacitance, b.capacitance)
}

/// Replaces all unit cells with one effective resonator placed where the
/// first cell was. Models without cells are returned unchanged.
pub fn reduce_slab(model: &SystemModel) -> Result<SystemModel> {
    let cells = model.cell_indices();
    if cells.is_empty() {
        return Ok(model.clone());
    }
    let nodes = model.resonators();
    let m = model.couplings();
    let first = cells[0];
    let n_cells = cells.len() as f64;

    for &c in &cells[1..] {
        if !same_params(&nodes[c].params, &nodes[first].params) {
            return Err(Error::ReductionNotApplicable(format!(
                "{} differs from {}",
                nodes[c].role, nodes[first].role
            )));
        }
    }
    let others: Vec<usize> = (0..model.len()).filter(|i| !nodes[*i].role.is_cell()).collect();
    for &k in &others {
        for &c in &cells[1..] {
            if !same(m.get(c, k), m.get(first, k)) {
                return Err(Error::ReductionNotApplicable(format!(
                    "{} couples to {} differently from {}",
                    nodes[c].role, nodes[k].role, nodes[first].role
                )));
            }
        }
    }
    let m_cc = if cells.len() > 1 { m.get(cells[0], cells[1]) } else { 0.0 };
    for (a, &ca) in cells.iter().enumerate() {
        for &cb in &cells[..a] {
            if !same(m.get(ca, cb), m_cc) {
                return Err(Error::ReductionNotApplicable(
                    "cell-to-cell couplings are not uniform".into(),
                ));
            }
        }
    }

    let base = nodes[first].params;
    let l_eff = base.inductance + (n_cells - 1.0) * m_cc;
    let effective = ResonatorParams::new(base.resistance, l_eff, base.capacitance).map_err(|_| {
        Error::ReductionNotApplicable(format!("effective slab inductance {l_eff:e} H is not positive"))
    })?;

    // keep original order, cell block collapsed onto the first cell's slot
    let keep: Vec<usize> = (0..model.len()).filter(|&i| !nodes[i].role.is_cell() || i == first).collect();
    let reduced_nodes: Vec<ResonatorNode> = keep
        .iter()
        .map(|&i| {
            if i == first {
                ResonatorNode::new(Role::MmCell(1), effective)
            } else {
                nodes[i]
            }
        })
        .collect();
    let mut reduced = m.select(&keep);
    let slot = keep.iter().position(|&i| i == first).expect("first cell kept");
    let scale = n_cells.sqrt();
    for (a, &i) in keep.iter().enumerate() {
        if a != slot {
            reduced.set(slot, a, scale * m.get(first, i));
        }
    }

    SystemModel::new(reduced_nodes, reduced, model.source(), model.load()).map_err(|e| match e {
        Error::CoefficientBound { pair, k } => Error::ReductionNotApplicable(format!(
            "effective coupling {pair} has |k| = {k}; the full inductance matrix is not positive definite"
        )),
        other => other,
    })
}

/// Deletes every unit-cell row and column.
pub fn remove_cells(model: &SystemModel) -> Result<SystemModel> {
    let keep: Vec<usize> = (0..model.len())
        .filter(|&i| !model.resonators()[i].role.is_cell())
        .collect();
    let nodes = keep.iter().map(|&i| model.resonators()[i]).collect();
    SystemModel::new(nodes, model.couplings().select(&keep), model.source(), model.load())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{solve_currents, CouplingSet, LoadSpec, SourceSpec};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn p(r: f64, l: f64, c: f64) -> ResonatorParams {
        ResonatorParams::new(r, l, c).unwrap()
    }

    /// Driver, transmitter, `n` cells, receiver, load with uniform couplings.
    fn slab_model(n: u32, m_tx: f64, m_rx: f64, m_cc: f64) -> SystemModel {
        let mut nodes = vec![
            ResonatorNode::new(Role::Driver, p(0.05, 0.7e-3, 2.2857e-13)),
            ResonatorNode::new(Role::Transmitter, p(0.05, 4e-6, 40e-12)),
        ];
        for i in 1..=n {
            nodes.push(ResonatorNode::new(Role::MmCell(i), p(0.05, 1.49e-6, 100e-12)));
        }
        nodes.push(ResonatorNode::new(Role::Receiver, p(0.05, 4e-6, 40e-12)));
        nodes.push(ResonatorNode::new(Role::Load, p(0.05, 0.7e-3, 2.2857e-13)));
        let len = nodes.len();
        let mut m = CouplingSet::zeros(len);
        m.set(0, 1, 0.002 * (0.7e-3f64 * 4e-6).sqrt());
        m.set(len - 2, len - 1, 0.002 * (0.7e-3f64 * 4e-6).sqrt());
        for c in 2..2 + n as usize {
            m.set(1, c, m_tx);
            m.set(c, len - 2, m_rx);
            for d in 2..c {
                m.set(c, d, m_cc);
            }
        }
        SystemModel::new(nodes, m, SourceSpec { v_source: 1.0, r_source: 50.0 }, LoadSpec { r_load: 50.0 }).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn no_cells_is_identity() {
        let model = slab_model(0, 0.0, 0.0, 0.0);
        assert_eq!(reduce_slab(&model).unwrap(), model);
    }

    #[test]
    fn nine_cells_match_full_solve() {
        let full = slab_model(9, 5e-8, 4e-8, 0.0);
        let reduced = reduce_slab(&full).unwrap();
        assert_eq!(reduced.len(), 5);
        for f in [12.0e6, 12.583e6, 13.04e6, 14.0e6] {
            let omega = 2.0 * PI * f;
            let a = solve_currents(&full, omega).unwrap();
            let b = solve_currents(&reduced, omega).unwrap();
            for role in [Role::Driver, Role::Transmitter, Role::Receiver, Role::Load] {
                let ia = a[full.index_of(role).unwrap()];
                let ib = b[reduced.index_of(role).unwrap()];
                assert!(rel(ib, ia) < 1e-9, "{role} at {f}: {ia} vs {ib}");
            }
            let cell = a[full.index_of(Role::MmCell(1)).unwrap()];
            let eff = b[reduced.index_of(Role::MmCell(1)).unwrap()];
            assert!(rel(eff, cell * 3.0) < 1e-9);
        }
    }

    #[test]
    fn uniform_cell_coupling_folds_into_inductance() {
        let full = slab_model(4, 5e-8, 5e-8, 2e-8);
        let reduced = reduce_slab(&full).unwrap();
        let cell = reduced.resonators()[reduced.index_of(Role::MmCell(1)).unwrap()];
        assert!((cell.params.inductance - (1.49e-6 + 3.0 * 2e-8)).abs() < 1e-20);
        let omega = 2.0 * PI * 12.7e6;
        let a = solve_currents(&full, omega).unwrap();
        let b = solve_currents(&reduced, omega).unwrap();
        assert!(rel(b[reduced.index_of(Role::Load).unwrap()], a[full.index_of(Role::Load).unwrap()]) < 1e-9);
    }

    #[test]
    fn differing_cell_is_rejected() {
        let full = slab_model(3, 5e-8, 5e-8, 0.0);
        let mut nodes = full.resonators().to_vec();
        nodes[3].params.capacitance = 101e-12;
        let odd = full.with_resonators(nodes).unwrap();
        assert!(matches!(reduce_slab(&odd), Err(Error::ReductionNotApplicable(_))));
    }

    #[test]
    fn differing_coupling_is_rejected() {
        let full = slab_model(3, 5e-8, 5e-8, 0.0);
        let mut m = full.couplings().clone();
        m.set(1, 3, 6e-8);
        let odd = full.with_couplings(m).unwrap();
        assert!(matches!(reduce_slab(&odd), Err(Error::ReductionNotApplicable(_))));
    }

    #[test]
    fn remove_cells_keeps_chain() {
        let full = slab_model(9, 5e-8, 4e-8, 0.0);
        let bare = remove_cells(&full).unwrap();
        assert_eq!(bare.len(), 4);
        assert_eq!(remove_cells(&bare).unwrap(), bare);
        assert_eq!(bare.couplings().get(0, 1), full.couplings().get(0, 1));
    }
}
