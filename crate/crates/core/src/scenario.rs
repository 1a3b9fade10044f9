//! A resonator chain whose couplings are rebuilt from a layout, so that
//! transfer distance and slab position can be varied.

use crate::circuit::{LoadSpec, MMUnitCellParams, ResonatorNode, ResonatorParams, SourceSpec, SystemModel};
use crate::coupling::{build_paper_couplings, CouplingPlan, Layout};
use crate::error::{Error, Result};
use crate::tuner::tune_compensation_capacitor;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelTemplate {
    pub resonators: Vec<ResonatorNode>,
    pub plan: CouplingPlan,
    pub layout: Layout,
    pub source: SourceSpec,
    pub load: LoadSpec,
    /// Unit-cell description the slab resonators were built from, if known.
    pub cell: Option<MMUnitCellParams>,
}

impl ModelTemplate {
    pub fn instantiate(&self) -> Result<SystemModel> {
        let couplings = build_paper_couplings(&self.resonators, &self.plan, &self.layout)?;
        SystemModel::new(self.resonators.clone(), couplings, self.source, self.load)
    }

    pub fn has_cells(&self) -> bool {
        self.resonators.iter().any(|r| r.role.is_cell())
    }

    pub fn gap(&self) -> f64 {
        self.layout.transfer_distance
    }

    /// Moves the receiver side to `distance`, keeping the slab at the same
    /// fraction of the gap.
    pub fn at_distance(&self, distance: f64) -> Result<Self> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::Geometry(format!("transfer distance must be > 0, got {distance}")));
        }
        let fraction = self.layout.slab_position / self.layout.transfer_distance;
        let mut out = self.clone();
        out.layout.transfer_distance = distance;
        out.layout.slab_position = fraction * distance;
        Ok(out)
    }

    pub fn with_slab_position(&self, position: f64) -> Result<Self> {
        if !(position > 0.0 && position < self.layout.transfer_distance) {
            return Err(Error::Geometry(format!(
                "slab position {position} m is outside the gap (0, {})",
                self.layout.transfer_distance
            )));
        }
        let mut out = self.clone();
        out.layout.slab_position = position;
        Ok(out)
    }

    pub fn without_cells(&self) -> Self {
        let mut out = self.clone();
        out.resonators.retain(|r| !r.role.is_cell());
        out
    }

    /// Replaces every unit cell's lumped values.
    pub fn with_cell_params(&self, params: ResonatorParams) -> Self {
        let mut out = self.clone();
        for r in out.resonators.iter_mut().filter(|r| r.role.is_cell()) {
            r.params = params;
        }
        out
    }

    /// Retunes the slab's compensation capacitance so the cells resonate at `frequency`.
    pub fn with_slab_tuned_to(&self, frequency: f64) -> Result<Self> {
        let cell = match self.cell {
            Some(cell) => cell,
            None => {
                let first = self
                    .resonators
                    .iter()
                    .find(|r| r.role.is_cell())
                    .ok_or_else(|| Error::Tuning("template has no slab to tune".into()))?;
                MMUnitCellParams {
                    r_ohmic: first.params.resistance,
                    r_dielectric: 0.0,
                    c_stray: 0.0,
                    c_compensation: first.params.capacitance,
                    inductance: first.params.inductance,
                }
            }
        };
        let tuned = tune_compensation_capacitor(&cell, frequency)?;
        let mut out = self.with_cell_params(tuned.cell.to_resonator()?);
        out.cell = Some(tuned.cell);
        Ok(out)
    }
}
