use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::engine::{evaluate_grid, SweepOptions};
use super::grid::FrequencyGrid;
use super::peak::{peak_find, Peak};
use super::result::{SweepResult, SweepRow};
use crate::circuit::{CouplingSet, LoadSpec, ResonatorNode, ResonatorParams, Role, SourceSpec, SystemModel};
use crate::coupling::coupling_from_k;
use crate::error::{Error, Result};
use crate::tuner::capacitance_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    TwoCoil,
    FourCoil,
    Clc,
}

impl TopologyKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TwoCoil => "two_coil",
            Self::FourCoil => "four_coil",
            Self::Clc => "clc",
        }
    }
}

/// Shared coil data the topologies are built from. Capacitances are
/// ignored: every loop is retuned to the common resonant frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyBase {
    /// Only needed by `four_coil`.
    pub driver: Option<ResonatorParams>,
    pub transmitter: ResonatorParams,
    pub receiver: ResonatorParams,
    /// Only needed by `four_coil`.
    pub load: Option<ResonatorParams>,
    pub source: SourceSpec,
    pub load_spec: LoadSpec,
    /// Common resonant frequency; defaults to the transmitter's own.
    pub f0: Option<f64>,
    pub k_driver_tx: Option<f64>,
    pub k_tx_rx: Option<f64>,
    pub k_rx_load: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_driver_tx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_tx_rx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_rx_load: Option<f64>,
}

impl TopologySpec {
    pub fn new(kind: TopologyKind) -> Self {
        Self {
            kind,
            label: None,
            f0: None,
            k_driver_tx: None,
            k_tx_rx: None,
            k_rx_load: None,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.name().to_string())
    }
}

fn required(value: Option<f64>, name: &str, kind: TopologyKind) -> Result<f64> {
    value.ok_or_else(|| Error::Domain(format!("{} topology needs {name}", kind.name())))
}

fn retuned(p: &ResonatorParams, f0: f64) -> Result<ResonatorParams> {
    ResonatorParams::new(p.resistance, p.inductance, capacitance_for(p.inductance, f0)?)
}

/// Builds the model for `spec`, with every loop tuned to the common f0.
///
/// `clc` places a series-C / shunt-L / series-C ladder between the source and
/// the transmitter coil. The shunt inductor is shared by the matching mesh
/// and the coil mesh, which appears as a mutual inductance of `-L_sh`; it is
/// sized so the receiver-loaded coil presents `R_s` to the source at f0.
pub fn resolve_topology(base: &TopologyBase, spec: &TopologySpec) -> Result<SystemModel> {
    let kind = spec.kind;
    let f0 = spec.f0.or(base.f0).unwrap_or_else(|| base.transmitter.resonant_frequency());
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::Tuning(format!("cannot tune to {f0} Hz")));
    }
    let omega = 2.0 * PI * f0;
    let k_tx_rx = required(spec.k_tx_rx.or(base.k_tx_rx), "k_tx_rx", kind)?;
    let tx = retuned(&base.transmitter, f0)?;
    let rx = retuned(&base.receiver, f0)?;
    let m_tx_rx = coupling_from_k(k_tx_rx, tx.inductance, rx.inductance)?;
    let (resonators, rows) = match kind {
        TopologyKind::TwoCoil => (
            vec![ResonatorNode::new(Role::Transmitter, tx), ResonatorNode::new(Role::Receiver, rx)],
            vec![vec![0.0, m_tx_rx], vec![m_tx_rx, 0.0]],
        ),
        TopologyKind::FourCoil => {
            let missing = |name: &str| Error::Domain(format!("four_coil topology needs a {name} loop"));
            let dr = retuned(&base.driver.ok_or_else(|| missing("driver"))?, f0)?;
            let ld = retuned(&base.load.ok_or_else(|| missing("load"))?, f0)?;
            let m1 = coupling_from_k(required(spec.k_driver_tx.or(base.k_driver_tx), "k_driver_tx", kind)?, dr.inductance, tx.inductance)?;
            let m3 = coupling_from_k(required(spec.k_rx_load.or(base.k_rx_load), "k_rx_load", kind)?, rx.inductance, ld.inductance)?;
            (
                vec![
                    ResonatorNode::new(Role::Driver, dr),
                    ResonatorNode::new(Role::Transmitter, tx),
                    ResonatorNode::new(Role::Receiver, rx),
                    ResonatorNode::new(Role::Load, ld),
                ],
                vec![
                    vec![0.0, m1, 0.0, 0.0],
                    vec![m1, 0.0, m_tx_rx, 0.0],
                    vec![0.0, m_tx_rx, 0.0, m3],
                    vec![0.0, 0.0, m3, 0.0],
                ],
            )
        }
        TopologyKind::Clc => {
            let rs = base.source.r_source;
            let r_b = tx.resistance + (omega * m_tx_rx).powi(2) / (rx.resistance + base.load_spec.r_load);
            if !(rs > 0.0 && r_b > 0.0 && r_b.is_finite()) {
                return Err(Error::Tuning(format!(
                    "clc matching needs R_s > 0 and a lossy coil branch (R_s = {rs}, R_branch = {r_b})"
                )));
            }
            let l_sh = (rs * r_b).sqrt() / omega;
            let matching = ResonatorParams::new(0.0, l_sh, capacitance_for(l_sh, f0)?)?;
            let coil = retuned(&ResonatorParams { inductance: tx.inductance + l_sh, ..tx }, f0)?;
            (
                vec![
                    ResonatorNode::new(Role::Driver, matching),
                    ResonatorNode::new(Role::Transmitter, coil),
                    ResonatorNode::new(Role::Receiver, rx),
                ],
                vec![vec![0.0, -l_sh, 0.0], vec![-l_sh, 0.0, m_tx_rx], vec![0.0, m_tx_rx, 0.0]],
            )
        }
    };
    SystemModel::new(resonators, CouplingSet::from_rows(&rows)?, base.source, base.load_spec)
}

/// −3 dB width of |S21| around the peak, interpolated linearly at the
/// crossings. `None` when a crossing falls outside the grid or in a gap.
pub fn minus_3db_bandwidth(rows: &[SweepRow]) -> Result<Option<f64>> {
    let peak = peak_find(rows)?;
    let threshold = peak.s21_mag / 2f64.sqrt();
    let mag = |i: usize| rows[i].response.as_ref().map(|r| r.s21.norm());
    let crossing = |inner: usize, outer: usize| -> Option<f64> {
        let (y0, y1) = (mag(inner)?, mag(outer)?);
        let (x0, x1) = (rows[inner].frequency, rows[outer].frequency);
        Some(x0 + (x1 - x0) * (y0 - threshold) / (y0 - y1))
    };
    let mut lower = None;
    let mut i = peak.index;
    while i > 0 {
        match mag(i - 1) {
            None => return Ok(None),
            Some(m) if m < threshold => {
                lower = crossing(i, i - 1);
                break;
            }
            Some(_) => i -= 1,
        }
    }
    let mut upper = None;
    let mut j = peak.index;
    while j + 1 < rows.len() {
        match mag(j + 1) {
            None => return Ok(None),
            Some(m) if m < threshold => {
                upper = crossing(j, j + 1);
                break;
            }
            Some(_) => j += 1,
        }
    }
    Ok(match (lower, upper) {
        (Some(lo), Some(hi)) => Some(hi - lo),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyOutcome {
    pub label: String,
    pub kind: TopologyKind,
    pub f0: f64,
    pub peak: Peak,
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyComparison {
    pub result: SweepResult,
    pub outcomes: Vec<TopologyOutcome>,
}

/// Sweeps each topology on the same grid. The swept value is the spec's
/// index; labels name them.
pub fn topology_compare(
    base: &TopologyBase,
    specs: &[TopologySpec],
    grid: &FrequencyGrid,
    opts: &SweepOptions,
) -> Result<TopologyComparison> {
    grid.validate()?;
    if specs.is_empty() {
        return Err(Error::Domain("topology list is empty".into()));
    }
    let freqs = grid.frequencies();
    let models = specs.iter().map(|s| resolve_topology(base, s)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(specs.len() * freqs.len());
    let mut outcomes = Vec::with_capacity(specs.len());
    for (i, (spec, model)) in specs.iter().zip(&models).enumerate() {
        let mut curve = evaluate_grid(model, &freqs, opts)?;
        for row in &mut curve {
            row.swept_value = i as f64;
        }
        outcomes.push(TopologyOutcome {
            label: spec.label(),
            kind: spec.kind,
            f0: spec.f0.or(base.f0).unwrap_or_else(|| base.transmitter.resonant_frequency()),
            peak: peak_find(&curve)?,
            bandwidth: minus_3db_bandwidth(&curve)?,
        });
        rows.extend(curve);
    }
    let refs: Vec<&SystemModel> = models.iter().collect();
    let values = (0..specs.len()).map(|i| i as f64).collect();
    let mut result = SweepResult::assemble("topology", values, grid.points, rows, &refs);
    result.labels = outcomes.iter().map(|o| o.label.clone()).collect();
    Ok(TopologyComparison { result, outcomes })
}
