//! The JSON configuration document and its conversion into solver inputs.
//!
//! Every physical value is a string with an explicit unit suffix; see
//! `docs/config.md` for the full schema.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use wpt_core::circuit::{
    LoadSpec, MMUnitCellParams, ResonatorNode, ResonatorParams, Role, RoleKind, SourceSpec, SystemModel,
};
use wpt_core::coupling::{CoilGeometry, CoilShape, CouplingMode, CouplingPlan, CouplingTable, Layout, PairLaw};
use wpt_core::scenario::ModelTemplate;
use wpt_core::sweep::{FrequencyGrid, Spacing, TopologyBase, TopologyKind, TopologySpec};

use crate::error::CliError;
use crate::units::{Farads, Henries, Hertz, Meters, Ohms, Quantity, Volts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub source: SourceConfig,
    pub load: LoadConfig,
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutConfig>,
    pub couplings: CouplingsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuner: Option<TunerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topologies: Option<TopologiesConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub voltage: Quantity<Volts>,
    pub resistance: Quantity<Ohms>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub resistance: Quantity<Ohms>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub radius: Quantity<Meters>,
    pub turns: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilConfig {
    pub resistance: Quantity<Ohms>,
    pub inductance: Quantity<Henries>,
    pub capacitance: Quantity<Farads>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub inductance: Quantity<Henries>,
    pub r_ohmic: Quantity<Ohms>,
    /// Defaults to 0 Ω.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_dielectric: Option<Quantity<Ohms>>,
    /// Defaults to 0 F.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_stray: Option<Quantity<Farads>>,
    pub c_compensation: Quantity<Farads>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabConfig {
    pub cells: u32,
    pub cell: CellConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver: Option<CoilConfig>,
    pub transmitter: CoilConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab: Option<SlabConfig>,
    pub receiver: CoilConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<CoilConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    pub transfer_distance: Quantity<Meters>,
    /// Defaults to mid-gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab_position: Option<Quantity<Meters>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver_offset: Option<Quantity<Meters>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_offset: Option<Quantity<Meters>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Analytic,
    Coefficients,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    /// CSV with header `separation_m,m_henries`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<(Quantity<Meters>, Quantity<Henries>)>>,
}

/// One pair rule; exactly one of `k`, `mutual`, `table`, `geometric` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutual: Option<Quantity<Henries>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellCouplingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutual: Option<Quantity<Henries>>,
}

fn default_true() -> bool {
    true
}

fn is_true(v: &bool) -> bool {
    *v
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsConfig {
    pub mode: ModeConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairConfig>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub include_non_adjacent: bool,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub neglect_non_adjacent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_to_cell: Option<CellCouplingConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_min: Option<Quantity<Hertz>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_max: Option<Quantity<Hertz>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Quantity<Meters>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Quantity<Meters>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TunerConfig {
    /// Unit-cell resonance target for `tune-cap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Quantity<Hertz>>,
    /// Retune the slab before every run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune_slab: Option<bool>,
    /// Frequency the slab is retuned to; defaults to the transmitter resonance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab_target: Option<Quantity<Hertz>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_bounds: Option<(Quantity<Meters>, Quantity<Meters>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyEntryConfig {
    pub kind: TopologyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<Quantity<Hertz>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_driver_tx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_tx_rx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_rx_load: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologiesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<Quantity<Hertz>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_driver_tx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_tx_rx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_rx_load: Option<f64>,
    pub specs: Vec<TopologyEntryConfig>,
}

/// Everything a subcommand needs, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub template: ModelTemplate,
    pub sweep: SweepConfig,
    pub tuner: TunerConfig,
    pub topologies: Option<(TopologyBase, Vec<TopologySpec>)>,
}

impl Scenario {
    pub fn model(&self) -> Result<SystemModel, CliError> {
        Ok(self.template.instantiate()?)
    }

    /// Configured sweep grid, if complete.
    pub fn default_grid(&self) -> Option<Result<FrequencyGrid, CliError>> {
        let s = &self.sweep;
        match (s.f_min, s.f_max, s.points) {
            (Some(lo), Some(hi), Some(n)) => {
                Some(FrequencyGrid::new(lo.si, hi.si, n, s.spacing.unwrap_or_default()).map_err(CliError::from))
            }
            _ => None,
        }
    }

    /// Resonant frequency of the transmitter loop.
    pub fn system_f0(&self) -> f64 {
        self.template
            .resonators
            .iter()
            .find(|r| r.role == Role::Transmitter)
            .map(|r| r.params.resonant_frequency())
            .expect("transmitter is required by the schema")
    }

    /// Retunes the slab to `tuner.slab_target`, or to the transmitter resonance.
    pub fn tune_slab(&mut self) -> Result<(), CliError> {
        let target = self.tuner.slab_target.map_or_else(|| self.system_f0(), |q| q.si);
        self.template = self.template.with_slab_tuned_to(target)?;
        Ok(())
    }
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses a document, reporting failures with the JSON field path.
pub fn parse_document(text: &str) -> Result<ConfigDocument, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        config_error(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| config_error("<root>", e.to_string()))?;
    Ok(doc)
}

pub fn to_json(doc: &ConfigDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("config documents always serialize");
    s.push('\n');
    s
}

fn resonator(path: &str, c: &CoilConfig) -> Result<ResonatorParams, CliError> {
    ResonatorParams::new(c.resistance.si, c.inductance.si, c.capacitance.si)
        .map_err(|e| config_error(path, e.to_string()))
}

fn shape(s: &Option<ShapeConfig>) -> Option<CoilShape> {
    s.map(|s| CoilShape {
        radius: s.radius.si,
        turns: s.turns,
    })
}

fn role_kind(path: &str, name: &str) -> Result<RoleKind, CliError> {
    RoleKind::parse(name).ok_or_else(|| {
        config_error(
            path,
            format!("unknown role {name:?} (expected driver, transmitter, mm_cell, receiver or load)"),
        )
    })
}

fn load_table(path: &str, table: &TableConfig, base_dir: Option<&Path>) -> Result<CouplingTable, CliError> {
    let rows = match (&table.file, &table.rows) {
        (Some(file), None) => read_table_csv(path, &resolve(base_dir, file))?,
        (None, Some(rows)) => rows.iter().map(|(d, m)| (d.si, m.si)).collect(),
        _ => return Err(config_error(path, "a table needs exactly one of `file` or `rows`")),
    };
    CouplingTable::new(rows).map_err(|e| config_error(path, e.to_string()))
}

fn resolve(base_dir: Option<&Path>, file: &str) -> PathBuf {
    match base_dir {
        Some(dir) if Path::new(file).is_relative() => dir.join(file),
        _ => PathBuf::from(file),
    }
}

/// Reads a `separation_m,m_henries` CSV.
pub fn read_table_csv(path: &str, file: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::Reader::from_path(file).map_err(|e| config_error(path, format!("{}: {e}", file.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| config_error(path, format!("{}: {e}", file.display())))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != ["separation_m", "m_henries"] {
        return Err(config_error(
            path,
            format!("{}: header must be `separation_m,m_henries`, got `{}`", file.display(), names.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| config_error(path, format!("{}: {e}", file.display())))?;
        let field = |i: usize| -> Result<f64, CliError> {
            record.get(i).unwrap_or("").trim().parse().map_err(|_| {
                config_error(path, format!("{}: data row {}: not a number: {:?}", file.display(), line + 1, record.get(i)))
            })
        };
        rows.push((field(0)?, field(1)?));
    }
    Ok(rows)
}

fn pair_law(path: &str, p: &PairConfig, base_dir: Option<&Path>) -> Result<PairLaw, CliError> {
    let set = [p.k.is_some(), p.mutual.is_some(), p.table.is_some(), p.geometric.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if set != 1 {
        return Err(config_error(path, "set exactly one of `k`, `mutual`, `table`, `geometric`"));
    }
    Ok(if let Some(k) = p.k {
        PairLaw::Coefficient(k)
    } else if let Some(m) = p.mutual {
        PairLaw::Mutual(m.si)
    } else if let Some(t) = &p.table {
        PairLaw::Table(load_table(&format!("{path}.table"), t, base_dir)?)
    } else if p.geometric == Some(true) {
        PairLaw::Geometric
    } else {
        return Err(config_error(format!("{path}.geometric"), "must be true when present"));
    })
}

/// Converts a parsed document. `base_dir` resolves relative table files.
pub fn to_scenario(doc: &ConfigDocument, base_dir: Option<&Path>) -> Result<Scenario, CliError> {
    let sys = &doc.system;
    let mut resonators = Vec::new();
    let mut cell = None;
    if let Some(d) = &sys.driver {
        resonators.push(ResonatorNode::new(Role::Driver, resonator("system.driver", d)?));
    }
    let tx = resonator("system.transmitter", &sys.transmitter)?;
    resonators.push(ResonatorNode::new(Role::Transmitter, tx));
    if let Some(slab) = &sys.slab {
        if slab.cells == 0 {
            return Err(config_error("system.slab.cells", "a slab needs at least one cell"));
        }
        let c = &slab.cell;
        let params = MMUnitCellParams {
            r_ohmic: c.r_ohmic.si,
            r_dielectric: c.r_dielectric.map_or(0.0, |q| q.si),
            c_stray: c.c_stray.map_or(0.0, |q| q.si),
            c_compensation: c.c_compensation.si,
            inductance: c.inductance.si,
        };
        let r = params.to_resonator().map_err(|e| config_error("system.slab.cell", e.to_string()))?;
        resonators.extend((1..=slab.cells).map(|i| ResonatorNode::new(Role::MmCell(i), r)));
        cell = Some(params);
    }
    let rx = resonator("system.receiver", &sys.receiver)?;
    resonators.push(ResonatorNode::new(Role::Receiver, rx));
    if let Some(l) = &sys.load {
        resonators.push(ResonatorNode::new(Role::Load, resonator("system.load", l)?));
    }

    let geometry = CoilGeometry {
        driver: sys.driver.as_ref().and_then(|c| shape(&c.shape)),
        transmitter: shape(&sys.transmitter.shape),
        cell: sys.slab.as_ref().and_then(|s| shape(&s.cell.shape)),
        receiver: shape(&sys.receiver.shape),
        load: sys.load.as_ref().and_then(|c| shape(&c.shape)),
    };
    let c = &doc.couplings;
    let mut plan = match c.mode {
        ModeConfig::Analytic => CouplingPlan::analytic(geometry),
        ModeConfig::Coefficients => CouplingPlan {
            geometry,
            ..CouplingPlan::coefficients(Vec::new())
        },
        ModeConfig::Table => CouplingPlan {
            mode: CouplingMode::Table,
            geometry,
            ..CouplingPlan::coefficients(Vec::new())
        },
    };
    plan.include_non_adjacent = c.include_non_adjacent;
    plan.neglect_non_adjacent = c.neglect_non_adjacent;
    for (i, p) in c.pairs.iter().enumerate() {
        let path = format!("couplings.pairs[{i}]");
        let a = role_kind(&format!("{path}.a"), &p.a)?;
        let b = role_kind(&format!("{path}.b"), &p.b)?;
        if a == b && a != RoleKind::MmCell {
            return Err(config_error(path, format!("a {a} cannot couple to itself")));
        }
        let law = pair_law(&path, p, base_dir)?;
        if a == RoleKind::MmCell && b == RoleKind::MmCell {
            plan.cell_to_cell = Some(law);
        } else {
            plan = plan.with_rule(a, b, law);
        }
    }
    if let Some(cc) = &c.cell_to_cell {
        plan.cell_to_cell = Some(match (cc.k, cc.mutual) {
            (Some(k), None) => PairLaw::Coefficient(k),
            (None, Some(m)) => PairLaw::Mutual(m.si),
            _ => return Err(config_error("couplings.cell_to_cell", "set exactly one of `k` or `mutual`")),
        });
    }

    let needs_positions = c.mode != ModeConfig::Coefficients
        || plan.rules.iter().any(|r| matches!(r.law, PairLaw::Geometric | PairLaw::Table(_)));
    let layout = match &doc.layout {
        Some(l) => {
            let d = l.transfer_distance.si;
            Layout {
                driver_offset: l.driver_offset.map_or(0.0, |q| q.si),
                transfer_distance: d,
                slab_position: l.slab_position.map_or(0.5 * d, |q| q.si),
                load_offset: l.load_offset.map_or(0.0, |q| q.si),
            }
        }
        None if needs_positions => {
            return Err(config_error("layout", "required when couplings depend on positions"));
        }
        // positions are never read by coefficient or fixed-mutual laws
        None => Layout {
            driver_offset: 1.0,
            transfer_distance: 1.0,
            slab_position: 0.5,
            load_offset: 1.0,
        },
    };

    let template = ModelTemplate {
        resonators,
        plan,
        layout,
        source: SourceSpec {
            v_source: doc.source.voltage.si,
            r_source: doc.source.resistance.si,
        },
        load: LoadSpec {
            r_load: doc.load.resistance.si,
        },
        cell,
    };

    let topologies = match &doc.topologies {
        None => None,
        Some(t) => {
            if t.specs.is_empty() {
                return Err(config_error("topologies.specs", "list at least one topology"));
            }
            let base = TopologyBase {
                driver: sys.driver.as_ref().map(|d| resonator("system.driver", d)).transpose()?,
                transmitter: tx,
                receiver: rx,
                load: sys.load.as_ref().map(|l| resonator("system.load", l)).transpose()?,
                source: template.source,
                load_spec: template.load,
                f0: t.f0.map(|q| q.si),
                k_driver_tx: t.k_driver_tx,
                k_tx_rx: t.k_tx_rx,
                k_rx_load: t.k_rx_load,
            };
            let specs = t
                .specs
                .iter()
                .map(|s| TopologySpec {
                    kind: s.kind,
                    label: s.label.clone(),
                    f0: s.f0.map(|q| q.si),
                    k_driver_tx: s.k_driver_tx,
                    k_tx_rx: s.k_tx_rx,
                    k_rx_load: s.k_rx_load,
                })
                .collect();
            Some((base, specs))
        }
    };

    let scenario = Scenario {
        name: doc.name.clone(),
        template,
        sweep: doc.sweep.clone().unwrap_or_default(),
        tuner: doc.tuner.clone().unwrap_or_default(),
        topologies,
    };
    if let Some(grid) = scenario.default_grid() {
        grid.map_err(|e| config_error("sweep", e.to_string()))?;
    }
    // surface model errors (bounds, geometry) at load time
    scenario.model()?;
    Ok(scenario)
}

/// Loads a config file, or a built-in preset when `name` is not a file.
pub fn load(name: &str) -> Result<(ConfigDocument, Scenario), CliError> {
    let path = Path::new(name);
    let (text, base_dir) = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: name.to_string(),
            source,
        })?;
        (text, path.parent().map(Path::to_path_buf))
    } else if let Some(text) = crate::presets::get(name) {
        (text.to_string(), None)
    } else {
        return Err(config_error(
            "--config",
            format!(
                "{name:?} is neither a file nor a preset (presets: {})",
                crate::presets::NAMES.join(", ")
            ),
        ));
    };
    let doc = parse_document(&text)?;
    let scenario = to_scenario(&doc, base_dir.as_deref())?;
    Ok((doc, scenario))
}
