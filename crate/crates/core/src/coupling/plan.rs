//! Assembling a full [`CouplingSet`] for a driver → transmitter → slab →
//! receiver → load chain laid out along one axis.

use std::collections::BTreeMap;

use super::{coaxial_loop_mutual, coupling_from_k, CouplingTable, LoopGeometry};
use crate::circuit::{apply_neglect_rule, CouplingSet, NeglectPolicy, ResonatorNode, RoleKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilShape {
    pub radius: f64,
    pub turns: u32,
}

/// Loop shapes per role; only needed for pairs evaluated geometrically.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoilGeometry {
    pub driver: Option<CoilShape>,
    pub transmitter: Option<CoilShape>,
    pub cell: Option<CoilShape>,
    pub receiver: Option<CoilShape>,
    pub load: Option<CoilShape>,
}

impl CoilGeometry {
    pub fn shape(&self, kind: RoleKind) -> Option<CoilShape> {
        match kind {
            RoleKind::Driver => self.driver,
            RoleKind::Transmitter => self.transmitter,
            RoleKind::MmCell => self.cell,
            RoleKind::Receiver => self.receiver,
            RoleKind::Load => self.load,
        }
    }
}

/// How one pair's mutual inductance is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum PairLaw {
    /// Fixed mutual inductance in henries.
    Mutual(f64),
    Coefficient(f64),
    /// Coaxial-filament Neumann integral at the layout positions.
    Geometric,
    /// Interpolated against the axial separation of the pair.
    Table(CouplingTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRule {
    pub a: RoleKind,
    pub b: RoleKind,
    pub law: PairLaw,
}

/// Default law for adjacent pairs that have no explicit rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Geometric.
    Analytic,
    /// Zero unless listed.
    Coefficients,
    /// Zero unless listed.
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingPlan {
    pub mode: CouplingMode,
    pub geometry: CoilGeometry,
    pub rules: Vec<PairRule>,
    /// Also evaluate non-adjacent pairs (ignored while `neglect_non_adjacent` holds).
    pub include_non_adjacent: bool,
    /// Zero every pair that is not adjacent in the chain.
    pub neglect_non_adjacent: bool,
    /// Uniform cell↔cell coupling; cells are uncoupled when `None`.
    pub cell_to_cell: Option<PairLaw>,
}

impl CouplingPlan {
    pub fn analytic(geometry: CoilGeometry) -> Self {
        Self {
            mode: CouplingMode::Analytic,
            geometry,
            rules: Vec::new(),
            include_non_adjacent: false,
            neglect_non_adjacent: true,
            cell_to_cell: None,
        }
    }

    pub fn coefficients(rules: Vec<(RoleKind, RoleKind, f64)>) -> Self {
        Self {
            mode: CouplingMode::Coefficients,
            geometry: CoilGeometry::default(),
            rules: rules
                .into_iter()
                .map(|(a, b, k)| PairRule {
                    a,
                    b,
                    law: PairLaw::Coefficient(k),
                })
                .collect(),
            include_non_adjacent: false,
            neglect_non_adjacent: true,
            cell_to_cell: None,
        }
    }

    pub fn with_rule(mut self, a: RoleKind, b: RoleKind, law: PairLaw) -> Self {
        self.rules.retain(|r| !same_pair(r.a, r.b, a, b));
        self.rules.push(PairRule { a, b, law });
        self
    }

    fn rule(&self, a: RoleKind, b: RoleKind) -> Option<&PairLaw> {
        self.rules.iter().find(|r| same_pair(r.a, r.b, a, b)).map(|r| &r.law)
    }
}

fn same_pair(a: RoleKind, b: RoleKind, x: RoleKind, y: RoleKind) -> bool {
    (a == x && b == y) || (a == y && b == x)
}

/// Axial placement. The transmitter sits at z = 0, the receiver at
/// `transfer_distance`, the slab at `slab_position`, the driver at
/// `-driver_offset` and the load at `transfer_distance + load_offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub driver_offset: f64,
    pub transfer_distance: f64,
    pub slab_position: f64,
    pub load_offset: f64,
}

impl Layout {
    pub fn position(&self, kind: RoleKind) -> f64 {
        match kind {
            RoleKind::Driver => -self.driver_offset,
            RoleKind::Transmitter => 0.0,
            RoleKind::MmCell => self.slab_position,
            RoleKind::Receiver => self.transfer_distance,
            RoleKind::Load => self.transfer_distance + self.load_offset,
        }
    }

    fn check(&self, present: &[RoleKind]) -> Result<()> {
        let has = |k| present.contains(&k);
        if !(self.transfer_distance.is_finite() && self.transfer_distance > 0.0) {
            return Err(Error::Geometry(format!(
                "transfer distance must be > 0, got {}",
                self.transfer_distance
            )));
        }
        if has(RoleKind::Driver) && !(self.driver_offset.is_finite() && self.driver_offset > 0.0) {
            return Err(Error::Geometry(format!(
                "driver must sit behind the transmitter (offset {})",
                self.driver_offset
            )));
        }
        if has(RoleKind::Load) && !(self.load_offset.is_finite() && self.load_offset > 0.0) {
            return Err(Error::Geometry(format!(
                "load must sit beyond the receiver (offset {})",
                self.load_offset
            )));
        }
        if has(RoleKind::MmCell) && !(self.slab_position > 0.0 && self.slab_position < self.transfer_distance) {
            return Err(Error::Geometry(format!(
                "slab position {} m is outside the transmitter-receiver gap (0, {})",
                self.slab_position, self.transfer_distance
            )));
        }
        Ok(())
    }
}

fn chain(present: &[RoleKind]) -> Vec<RoleKind> {
    RoleKind::ALL.into_iter().filter(|k| present.contains(k)).collect()
}

fn adjacent(chain: &[RoleKind], a: RoleKind, b: RoleKind) -> bool {
    chain.windows(2).any(|w| same_pair(w[0], w[1], a, b))
}

fn non_adjacent_policy(chain: &[RoleKind]) -> NeglectPolicy {
    let mut pairs = Vec::new();
    for (i, &a) in chain.iter().enumerate() {
        for &b in &chain[i + 1..] {
            if !adjacent(chain, a, b) {
                pairs.push((a, b));
            }
        }
    }
    NeglectPolicy { pairs }
}

fn inductance(resonators: &[ResonatorNode], kind: RoleKind) -> f64 {
    resonators
        .iter()
        .find(|r| r.role.kind() == kind)
        .map(|r| r.params.inductance)
        .expect("kind present")
}

fn evaluate(
    law: &PairLaw,
    a: RoleKind,
    b: RoleKind,
    plan: &CouplingPlan,
    layout: &Layout,
    resonators: &[ResonatorNode],
) -> Result<f64> {
    let pair = || format!("{a}-{b}");
    match law {
        PairLaw::Mutual(m) => Ok(*m),
        PairLaw::Coefficient(k) => coupling_from_k(*k, inductance(resonators, a), inductance(resonators, b))
            .map_err(|e| match e {
                Error::CoefficientBound { k, .. } => Error::CoefficientBound { pair: pair(), k },
                other => other,
            }),
        PairLaw::Geometric => {
            let shape = |kind: RoleKind| {
                plan.geometry
                    .shape(kind)
                    .ok_or_else(|| Error::Geometry(format!("no coil geometry for {kind} (needed by {})", pair())))
            };
            let (sa, sb) = (shape(a)?, shape(b)?);
            let la = LoopGeometry::new(sa.radius, sa.turns, layout.position(a))?;
            let lb = LoopGeometry::new(sb.radius, sb.turns, layout.position(b))?;
            coaxial_loop_mutual(&la, &lb)
        }
        PairLaw::Table(table) => table.interpolate((layout.position(b) - layout.position(a)).abs()),
    }
}

/// Evaluates every pair the plan asks for at the given layout, zeroes
/// non-adjacent pairs when the plan neglects them, and checks
/// `|M| ≤ sqrt(L_i·L_j)` on the result.
///
/// Adjacency follows the chain of roles present: with a slab, the
/// transmitter↔receiver pair is non-adjacent; without one it is adjacent.
pub fn build_paper_couplings(resonators: &[ResonatorNode], plan: &CouplingPlan, layout: &Layout) -> Result<CouplingSet> {
    let present: Vec<RoleKind> = resonators.iter().map(|r| r.role.kind()).collect();
    layout.check(&present)?;
    let chain = chain(&present);

    let mut per_pair: BTreeMap<(RoleKind, RoleKind), f64> = BTreeMap::new();
    for (i, &a) in chain.iter().enumerate() {
        for &b in &chain[i + 1..] {
            let is_adjacent = adjacent(&chain, a, b);
            if !is_adjacent && (plan.neglect_non_adjacent || !plan.include_non_adjacent) {
                continue;
            }
            let law = match plan.rule(a, b) {
                Some(law) => Some(law.clone()),
                None if plan.mode == CouplingMode::Analytic => Some(PairLaw::Geometric),
                None => None,
            };
            if let Some(law) = law {
                per_pair.insert((a, b), evaluate(&law, a, b, plan, layout, resonators)?);
            }
        }
    }
    let cell_cell = match &plan.cell_to_cell {
        None => 0.0,
        Some(PairLaw::Mutual(m)) => *m,
        Some(PairLaw::Coefficient(k)) if present.contains(&RoleKind::MmCell) => {
            let l = inductance(resonators, RoleKind::MmCell);
            coupling_from_k(*k, l, l).map_err(|_| Error::CoefficientBound {
                pair: "mm_cell-mm_cell".into(),
                k: *k,
            })?
        }
        Some(PairLaw::Coefficient(_)) => 0.0,
        Some(_) => {
            return Err(Error::SingularGeometry(
                "slab cells share one axial position; cell-to-cell coupling must be a fixed value or coefficient"
                    .into(),
            ))
        }
    };

    let n = resonators.len();
    let mut set = CouplingSet::zeros(n);
    for i in 0..n {
        for j in 0..i {
            let (ki, kj) = (resonators[i].role.kind(), resonators[j].role.kind());
            let value = if ki == RoleKind::MmCell && kj == RoleKind::MmCell {
                cell_cell
            } else {
                let key = if ki <= kj { (ki, kj) } else { (kj, ki) };
                per_pair.get(&key).copied().unwrap_or(0.0)
            };
            if value != 0.0 {
                set.set(i, j, value);
            }
        }
    }
    if plan.neglect_non_adjacent {
        set = apply_neglect_rule(&set, resonators, &non_adjacent_policy(&chain));
    }
    set.check_bounds(resonators)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{ResonatorParams, Role};

    fn nodes(cells: u32) -> Vec<ResonatorNode> {
        let p = |l: f64, c: f64| ResonatorParams::new(0.05, l, c).unwrap();
        let mut v = vec![
            ResonatorNode::new(Role::Driver, p(0.7e-3, 2.2857e-13)),
            ResonatorNode::new(Role::Transmitter, p(4e-6, 40e-12)),
        ];
        v.extend((1..=cells).map(|i| ResonatorNode::new(Role::MmCell(i), p(1.49e-6, 100e-12))));
        v.push(ResonatorNode::new(Role::Receiver, p(4e-6, 40e-12)));
        v.push(ResonatorNode::new(Role::Load, p(0.7e-3, 2.2857e-13)));
        v
    }

    fn geometry() -> CoilGeometry {
        let coil = CoilShape { radius: 0.03, turns: 3 };
        CoilGeometry {
            driver: Some(coil),
            transmitter: Some(coil),
            cell: Some(CoilShape { radius: 0.02, turns: 3 }),
            receiver: Some(coil),
            load: Some(coil),
        }
    }

    fn plan() -> CouplingPlan {
        CouplingPlan::analytic(geometry())
            .with_rule(RoleKind::Driver, RoleKind::Transmitter, PairLaw::Coefficient(0.002))
            .with_rule(RoleKind::Receiver, RoleKind::Load, PairLaw::Coefficient(0.002))
    }

    fn layout(d: f64, slab: f64) -> Layout {
        Layout {
            driver_offset: 0.01,
            transfer_distance: d,
            slab_position: slab,
            load_offset: 0.01,
        }
    }

    #[test]
    fn mid_slab_is_mirror_symmetric() {
        let r = nodes(9);
        let m = build_paper_couplings(&r, &plan(), &layout(0.25, 0.125)).unwrap();
        for c in 2..11 {
            assert_eq!(m.get(1, c), m.get(c, 11));
            assert!(m.get(1, c) > 0.0);
        }
        assert_eq!(m.get(0, 1), m.get(11, 12));
    }

    #[test]
    fn neglect_zeroes_non_adjacent() {
        let r = nodes(9);
        let mut p = plan();
        p.include_non_adjacent = true;
        let m = build_paper_couplings(&r, &p, &layout(0.25, 0.125)).unwrap();
        // driver↔receiver, transmitter↔receiver, driver↔cell, cell↔load
        assert_eq!(m.get(0, 11), 0.0);
        assert_eq!(m.get(1, 11), 0.0);
        assert_eq!(m.get(0, 5), 0.0);
        assert_eq!(m.get(5, 12), 0.0);
    }

    #[test]
    fn non_adjacent_terms_when_not_neglected() {
        let r = nodes(9);
        let mut p = plan();
        p.include_non_adjacent = true;
        p.neglect_non_adjacent = false;
        let m = build_paper_couplings(&r, &p, &layout(0.25, 0.125)).unwrap();
        assert!(m.get(1, 11) > 0.0);
        assert!(m.get(1, 11) < m.get(1, 2));
        // no driver coil geometry issue: driver pairs other than the listed one are geometric
        assert!(m.get(0, 11) > 0.0);
    }

    #[test]
    fn without_slab_tx_rx_are_adjacent() {
        let r = nodes(0);
        let m = build_paper_couplings(&r, &plan(), &layout(0.25, 0.125)).unwrap();
        assert!(m.get(1, 2) > 0.0);
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn doubling_distance_cuts_coupling_eightfold() {
        let r = nodes(0);
        let p = plan();
        let near = build_paper_couplings(&r, &p, &layout(0.5, 0.25)).unwrap().get(1, 2);
        let far = build_paper_couplings(&r, &p, &layout(1.0, 0.5)).unwrap().get(1, 2);
        let ratio = near / far;
        assert!((ratio - 8.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn ordering_violations() {
        let r = nodes(9);
        assert!(matches!(
            build_paper_couplings(&r, &plan(), &layout(0.25, 0.3)),
            Err(Error::Geometry(_))
        ));
        assert!(build_paper_couplings(&r, &plan(), &layout(0.25, 0.0)).is_err());
        let mut bad = layout(0.25, 0.1);
        bad.driver_offset = -0.01;
        assert!(build_paper_couplings(&r, &plan(), &bad).is_err());
    }

    #[test]
    fn coefficient_bound_names_pair() {
        let r = nodes(0);
        let p = plan().with_rule(RoleKind::Transmitter, RoleKind::Receiver, PairLaw::Coefficient(1.5));
        match build_paper_couplings(&r, &p, &layout(0.25, 0.1)) {
            Err(Error::CoefficientBound { pair, .. }) => assert_eq!(pair, "transmitter-receiver"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn table_law_uses_separation() {
        let r = nodes(0);
        let table = CouplingTable::new(vec![(0.1, 2e-8), (0.3, 1e-8)]).unwrap();
        let p = plan().with_rule(RoleKind::Transmitter, RoleKind::Receiver, PairLaw::Table(table));
        let m = build_paper_couplings(&r, &p, &layout(0.2, 0.1)).unwrap();
        assert!((m.get(1, 2) - 1.5e-8).abs() < 1e-22);
        assert!(matches!(
            build_paper_couplings(&r, &p, &layout(0.4, 0.1)),
            Err(Error::Extrapolation { .. })
        ));
    }

    #[test]
    fn cell_to_cell_coupling() {
        let r = nodes(3);
        let mut p = plan();
        p.cell_to_cell = Some(PairLaw::Coefficient(0.01));
        let m = build_paper_couplings(&r, &p, &layout(0.25, 0.125)).unwrap();
        assert!((m.get(2, 3) - 0.01 * 1.49e-6).abs() < 1e-20);
        p.cell_to_cell = Some(PairLaw::Geometric);
        assert!(matches!(
            build_paper_couplings(&r, &p, &layout(0.25, 0.125)),
            Err(Error::SingularGeometry(_))
        ));
    }
}
