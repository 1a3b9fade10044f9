//! Resonator network representation and the KVL impedance-matrix solve.
//!
//! Every resonator is a series RLC loop carrying one mesh current. All loop
//! currents share one orientation, so a mutual inductance `M` between loops
//! `i` and `j` enters row `i` as `+jωM·I_j`; a negative `M` encodes an
//! anti-phase winding. The source sits in series with the driver loop and the
//! load resistance in series with the load loop.

mod reduce;
mod solve;

pub use reduce::{reduce_slab, remove_cells};
pub use solve::{build_kvl_matrix, self_impedance, solve_currents, SINGULAR_CONDITION_LIMIT};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Relative slack allowed on `|M| ≤ sqrt(L_i·L_j)` to absorb rounding in `k·sqrt(L_i·L_j)`.
const BOUND_SLACK: f64 = 1e-12;

/// Lumped series R, L, C of one loop, in ohms, henries and farads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    pub resistance: f64,
    pub inductance: f64,
    pub capacitance: f64,
}

impl ResonatorParams {
    pub fn new(resistance: f64, inductance: f64, capacitance: f64) -> Result<Self> {
        let params = Self {
            resistance,
            inductance,
            capacitance,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resistance.is_finite() && self.resistance >= 0.0) {
            return Err(Error::Domain(format!(
                "resistance must be finite and >= 0, got {}",
                self.resistance
            )));
        }
        if !(self.inductance.is_finite() && self.inductance > 0.0) {
            return Err(Error::Domain(format!(
                "inductance must be finite and > 0, got {}",
                self.inductance
            )));
        }
        if !(self.capacitance.is_finite() && self.capacitance > 0.0) {
            return Err(Error::Domain(format!(
                "capacitance must be finite and > 0, got {}",
                self.capacitance
            )));
        }
        Ok(())
    }

    /// `1/(2π·sqrt(LC))` in hertz.
    pub fn resonant_frequency(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * (self.inductance * self.capacitance).sqrt())
    }
}

/// Lumped model of one metamaterial unit cell before its losses and
/// capacitances are folded into totals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MMUnitCellParams {
    pub r_ohmic: f64,
    pub r_dielectric: f64,
    pub c_stray: f64,
    pub c_compensation: f64,
    pub inductance: f64,
}

impl MMUnitCellParams {
    pub fn total_resistance(&self) -> f64 {
        self.r_ohmic + self.r_dielectric
    }

    pub fn total_capacitance(&self) -> f64 {
        self.c_stray + self.c_compensation
    }

    pub fn to_resonator(&self) -> Result<ResonatorParams> {
        for (name, v) in [
            ("r_ohmic", self.r_ohmic),
            ("r_dielectric", self.r_dielectric),
            ("c_stray", self.c_stray),
            ("c_compensation", self.c_compensation),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.total_capacitance() <= 0.0 {
            return Err(Error::Domain("unit cell total capacitance must be > 0".into()));
        }
        ResonatorParams::new(
            self.total_resistance(),
            self.inductance,
            self.total_capacitance(),
        )
    }
}

/// Position of a loop in the driver → transmitter → slab → receiver → load chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Driver,
    Transmitter,
    /// Unit cell of the slab; indices are 1-based and distinct within a model.
    MmCell(u32),
    Receiver,
    Load,
}

/// [`Role`] with the cell index erased, used to name coupling classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleKind {
    Driver,
    Transmitter,
    MmCell,
    Receiver,
    Load,
}

impl Role {
    pub fn kind(&self) -> RoleKind {
        match self {
            Role::Driver => RoleKind::Driver,
            Role::Transmitter => RoleKind::Transmitter,
            Role::MmCell(_) => RoleKind::MmCell,
            Role::Receiver => RoleKind::Receiver,
            Role::Load => RoleKind::Load,
        }
    }

    pub fn is_cell(&self) -> bool {
        matches!(self, Role::MmCell(_))
    }
}

impl RoleKind {
    pub const ALL: [RoleKind; 5] = [
        RoleKind::Driver,
        RoleKind::Transmitter,
        RoleKind::MmCell,
        RoleKind::Receiver,
        RoleKind::Load,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RoleKind::Driver => "driver",
            RoleKind::Transmitter => "transmitter",
            RoleKind::MmCell => "mm_cell",
            RoleKind::Receiver => "receiver",
            RoleKind::Load => "load",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        RoleKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::MmCell(i) => write!(f, "mm_cell[{i}]"),
            other => f.write_str(other.kind().name()),
        }
    }
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorNode {
    pub role: Role,
    pub params: ResonatorParams,
}

impl ResonatorNode {
    pub fn new(role: Role, params: ResonatorParams) -> Self {
        Self { role, params }
    }
}

/// Symmetric, zero-diagonal matrix of mutual inductances in henries, indexed
/// by resonator position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSet {
    n: usize,
    m: Vec<f64>,
}

impl CouplingSet {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            m: vec![0.0; n * n],
        }
    }

    /// Builds from a full square matrix, rejecting asymmetry, a nonzero
    /// diagonal, or non-finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut set = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Model(format!(
                    "coupling row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Model(format!("coupling ({i}, {j}) is not finite")));
                }
                set.m[i * n + j] = v;
            }
        }
        for i in 0..n {
            if set.get(i, i) != 0.0 {
                return Err(Error::Model(format!("coupling diagonal ({i}, {i}) must be zero")));
            }
            for j in 0..i {
                if set.get(i, j) != set.get(j, i) {
                    return Err(Error::Model(format!(
                        "coupling matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`. Panics on the diagonal.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "self-coupling is not representable");
        self.m[i * self.n + j] = value;
        self.m[j * self.n + i] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.m.chunks(self.n.max(1)).map(|r| r.to_vec()).take(self.n).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|&v| v == 0.0)
    }

    /// Keeps only the rows and columns listed in `keep`, in that order.
    pub fn select(&self, keep: &[usize]) -> Self {
        let mut out = Self::zeros(keep.len());
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                out.m[a * keep.len() + b] = self.get(i, j);
            }
        }
        out
    }

    /// Checks `|M_ij| ≤ sqrt(L_i·L_j)` against the given resonators.
    pub fn check_bounds(&self, resonators: &[ResonatorNode]) -> Result<()> {
        if resonators.len() != self.n {
            return Err(Error::Model(format!(
                "coupling matrix is {n}x{n} but model has {} resonators",
                resonators.len(),
                n = self.n
            )));
        }
        for i in 0..self.n {
            for j in 0..i {
                let limit = (resonators[i].params.inductance * resonators[j].params.inductance).sqrt();
                let m = self.get(i, j);
                if m.abs() > limit * (1.0 + BOUND_SLACK) {
                    return Err(Error::CoefficientBound {
                        pair: format!("{}-{}", resonators[j].role, resonators[i].role),
                        k: m / limit,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Unordered set of role-kind pairs whose couplings are forced to zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NeglectPolicy {
    pub pairs: Vec<(RoleKind, RoleKind)>,
}

impl NeglectPolicy {
    pub fn none() -> Self {
        Self::default()
    }

    /// Driver↔cell, transmitter↔receiver, cell↔load and driver↔load.
    pub fn paper() -> Self {
        Self {
            pairs: vec![
                (RoleKind::Driver, RoleKind::MmCell),
                (RoleKind::Transmitter, RoleKind::Receiver),
                (RoleKind::MmCell, RoleKind::Load),
                (RoleKind::Driver, RoleKind::Load),
            ],
        }
    }

    pub fn covers(&self, a: RoleKind, b: RoleKind) -> bool {
        self.pairs
            .iter()
            .any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    }
}

/// Returns a copy of `couplings` with every entry between resonators whose
/// role kinds form a pair in `policy` set to exactly zero.
pub fn apply_neglect_rule(
    couplings: &CouplingSet,
    resonators: &[ResonatorNode],
    policy: &NeglectPolicy,
) -> CouplingSet {
    let mut out = couplings.clone();
    for i in 0..out.dim() {
        for j in 0..i {
            if policy.covers(resonators[i].role.kind(), resonators[j].role.kind()) {
                out.set(i, j, 0.0);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    /// Amplitude of the sinusoidal source, volts.
    pub v_source: f64,
    pub r_source: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub r_load: f64,
}

/// A validated resonator network.
///
/// The source is in series with the driver loop, or with the transmitter when
/// no driver exists (two-coil systems). The load resistance is in series with
/// the load loop, or with the receiver when no load loop exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemModel {
    resonators: Vec<ResonatorNode>,
    couplings: CouplingSet,
    source: SourceSpec,
    load: LoadSpec,
}

impl SystemModel {
    pub fn new(
        resonators: Vec<ResonatorNode>,
        couplings: CouplingSet,
        source: SourceSpec,
        load: LoadSpec,
    ) -> Result<Self> {
        let model = Self {
            resonators,
            couplings,
            source,
            load,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.resonators.is_empty() {
            return Err(Error::Model("model has no resonators".into()));
        }
        if self.couplings.dim() != self.resonators.len() {
            return Err(Error::Model(format!(
                "coupling matrix is {n}x{n} but model has {} resonators",
                self.resonators.len(),
                n = self.couplings.dim()
            )));
        }
        for node in &self.resonators {
            node.params
                .validate()
                .map_err(|e| Error::Model(format!("{}: {e}", node.role)))?;
        }
        for kind in RoleKind::ALL {
            if kind == RoleKind::MmCell {
                continue;
            }
            let count = self.resonators.iter().filter(|r| r.role.kind() == kind).count();
            if count > 1 {
                return Err(Error::Model(format!("more than one {kind} resonator")));
            }
        }
        let mut cell_ids: Vec<u32> = self
            .resonators
            .iter()
            .filter_map(|r| match r.role {
                Role::MmCell(i) => Some(i),
                _ => None,
            })
            .collect();
        if cell_ids.contains(&0) {
            return Err(Error::Model("mm_cell indices start at 1".into()));
        }
        cell_ids.sort_unstable();
        if cell_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Model("duplicate mm_cell index".into()));
        }
        if self.source_index().is_none() {
            return Err(Error::Model(
                "model needs a driver or transmitter to carry the source".into(),
            ));
        }
        if !(self.source.v_source.is_finite() && self.source.v_source >= 0.0) {
            return Err(Error::Model(format!(
                "v_source must be finite and >= 0, got {}",
                self.source.v_source
            )));
        }
        if !(self.source.r_source.is_finite() && self.source.r_source >= 0.0) {
            return Err(Error::Model(format!(
                "r_source must be finite and >= 0, got {}",
                self.source.r_source
            )));
        }
        if !(self.load.r_load.is_finite() && self.load.r_load >= 0.0) {
            return Err(Error::Model(format!(
                "r_load must be finite and >= 0, got {}",
                self.load.r_load
            )));
        }
        // from_rows already enforced symmetry for matrices built that way;
        // sets mutated through `set` stay symmetric by construction.
        self.couplings.check_bounds(&self.resonators)
    }

    /// Additionally requires exactly one driver, transmitter, receiver and load.
    pub fn validate_four_coil(&self) -> Result<()> {
        for kind in [
            RoleKind::Driver,
            RoleKind::Transmitter,
            RoleKind::Receiver,
            RoleKind::Load,
        ] {
            if self.index_of_kind(kind).is_none() {
                return Err(Error::Model(format!("four-coil system is missing a {kind}")));
            }
        }
        Ok(())
    }

    pub fn resonators(&self) -> &[ResonatorNode] {
        &self.resonators
    }

    pub fn couplings(&self) -> &CouplingSet {
        &self.couplings
    }

    pub fn source(&self) -> SourceSpec {
        self.source
    }

    pub fn load(&self) -> LoadSpec {
        self.load
    }

    pub fn len(&self) -> usize {
        self.resonators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resonators.is_empty()
    }

    pub fn index_of(&self, role: Role) -> Option<usize> {
        self.resonators.iter().position(|r| r.role == role)
    }

    pub fn index_of_kind(&self, kind: RoleKind) -> Option<usize> {
        self.resonators.iter().position(|r| r.role.kind() == kind)
    }

    pub fn cell_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.resonators[i].role.is_cell()).collect()
    }

    /// Row that carries the source.
    pub fn source_index(&self) -> Option<usize> {
        self.index_of_kind(RoleKind::Driver)
            .or_else(|| self.index_of_kind(RoleKind::Transmitter))
    }

    /// Row that carries the load resistance, if any.
    pub fn load_index(&self) -> Option<usize> {
        self.index_of_kind(RoleKind::Load)
            .or_else(|| self.index_of_kind(RoleKind::Receiver))
    }

    pub fn with_source(&self, source: SourceSpec) -> Result<Self> {
        Self::new(self.resonators.clone(), self.couplings.clone(), source, self.load)
    }

    pub fn with_load(&self, load: LoadSpec) -> Result<Self> {
        Self::new(self.resonators.clone(), self.couplings.clone(), self.source, load)
    }

    pub fn with_couplings(&self, couplings: CouplingSet) -> Result<Self> {
        Self::new(self.resonators.clone(), couplings, self.source, self.load)
    }

    pub fn with_resonators(&self, resonators: Vec<ResonatorNode>) -> Result<Self> {
        Self::new(resonators, self.couplings.clone(), self.source, self.load)
    }

    pub fn with_neglect(&self, policy: &NeglectPolicy) -> Self {
        let couplings = apply_neglect_rule(&self.couplings, &self.resonators, policy);
        // zeroing entries can never break a bound
        Self {
            couplings,
            ..self.clone()
        }
    }
}
