use rayon::prelude::*;
use serde::Serialize;

use super::grid::FrequencyGrid;
use super::peak::{peak_find, Peak};
use super::result::{SweepResult, SweepRow};
use crate::circuit::{remove_cells, SystemModel};
use crate::error::{Error, Result};
use crate::metrics::FrequencyResponse;
use crate::scenario::ModelTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads used for independent grid points. Has no effect on results.
    pub workers: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl SweepOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
        }
    }
}

/// Solves `model` at every frequency, keeping input order. Singular points
/// become gaps; any other error aborts the sweep.
pub fn evaluate_grid(model: &SystemModel, frequencies: &[f64], opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let point = |f: f64| -> Result<SweepRow> {
        let response = match FrequencyResponse::evaluate(model, f) {
            Ok(r) => Some(r),
            Err(Error::SingularSystem { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(SweepRow {
            swept_value: 0.0,
            frequency: f,
            response,
        })
    };
    let rows: Result<Vec<SweepRow>> = if opts.workers <= 1 || frequencies.len() < 2 {
        frequencies.iter().map(|&f| point(f)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::Model(format!("cannot start worker pool: {e}")))?;
        // indexed parallel collect keeps input order
        pool.install(|| frequencies.par_iter().map(|&f| point(f)).collect())
    };
    let rows = rows?;
    if rows.iter().all(|r| r.response.is_none()) {
        return Err(Error::EmptyResult);
    }
    Ok(rows)
}

pub fn frequency_sweep(model: &SystemModel, grid: &FrequencyGrid, opts: &SweepOptions) -> Result<SweepResult> {
    grid.validate()?;
    let rows = evaluate_grid(model, &grid.frequencies(), opts)?;
    Ok(SweepResult::assemble("none", vec![0.0], grid.points, rows, &[model]))
}

fn sweep_models(
    variable: &str,
    values: &[f64],
    models: &[SystemModel],
    grid: &FrequencyGrid,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let freqs = grid.frequencies();
    let mut rows = Vec::with_capacity(values.len() * freqs.len());
    for (&value, model) in values.iter().zip(models) {
        let mut curve = evaluate_grid(model, &freqs, opts)?;
        for row in &mut curve {
            row.swept_value = value;
        }
        rows.extend(curve);
    }
    let refs: Vec<&SystemModel> = models.iter().collect();
    Ok(SweepResult::assemble(variable, values.to_vec(), grid.points, rows, &refs))
}

/// Rebuilds couplings at each transfer distance (slab kept at the same
/// fraction of the gap) and sweeps frequency.
pub fn distance_sweep(
    template: &ModelTemplate,
    distances: &[f64],
    grid: &FrequencyGrid,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    grid.validate()?;
    if distances.is_empty() {
        return Err(Error::Domain("distance list is empty".into()));
    }
    let models = distances
        .iter()
        .map(|&d| template.at_distance(d)?.instantiate())
        .collect::<Result<Vec<_>>>()?;
    sweep_models("transfer_distance_m", distances, &models, grid, opts)
}

/// Moves the slab to each position and sweeps frequency.
pub fn slab_position_sweep(
    template: &ModelTemplate,
    positions: &[f64],
    grid: &FrequencyGrid,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    grid.validate()?;
    if positions.is_empty() {
        return Err(Error::Domain("position list is empty".into()));
    }
    let models = positions
        .iter()
        .map(|&p| template.with_slab_position(p)?.instantiate())
        .collect::<Result<Vec<_>>>()?;
    sweep_models("slab_position_m", positions, &models, grid, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmComparison {
    pub with_mm: SweepResult,
    pub without_mm: SweepResult,
    pub peak_with: Peak,
    pub peak_without: Peak,
    /// Peak PTE with the slab over peak PTE without it.
    pub pte_ratio: f64,
}

/// Sweeps `model` and the same model with every unit cell deleted.
pub fn compare_with_without_mm(model: &SystemModel, grid: &FrequencyGrid, opts: &SweepOptions) -> Result<MmComparison> {
    if model.cell_indices().is_empty() {
        return Err(Error::NothingToCompare("model has no unit cells".into()));
    }
    let bare = remove_cells(model)?;
    let with_mm = frequency_sweep(model, grid, opts)?;
    let without_mm = frequency_sweep(&bare, grid, opts)?;
    let peak_with = peak_find(&with_mm.rows)?;
    let peak_without = peak_find(&without_mm.rows)?;
    Ok(MmComparison {
        pte_ratio: peak_with.pte() / peak_without.pte(),
        with_mm,
        without_mm,
        peak_with,
        peak_without,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmDistanceRow {
    pub distance: f64,
    /// `distance / max(distances)`.
    pub normalized_distance: f64,
    pub peak_pte_with: f64,
    pub peak_pte_without: f64,
    pub pte_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmDistanceComparison {
    pub with_mm: SweepResult,
    pub without_mm: SweepResult,
    pub rows: Vec<MmDistanceRow>,
}

/// Distance sweep of the template with and without its slab. The bare
/// system is rebuilt from the layout, so the transmitter and receiver become
/// neighbours and couple directly.
pub fn compare_mm_over_distances(
    template: &ModelTemplate,
    distances: &[f64],
    grid: &FrequencyGrid,
    opts: &SweepOptions,
) -> Result<MmDistanceComparison> {
    if !template.has_cells() {
        return Err(Error::NothingToCompare("template has no unit cells".into()));
    }
    let with_mm = distance_sweep(template, distances, grid, opts)?;
    let without_mm = distance_sweep(&template.without_cells(), distances, grid, opts)?;
    let d_max = distances.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rows = with_mm
        .peaks()?
        .into_iter()
        .zip(without_mm.peaks()?)
        .zip(distances)
        .map(|((w, wo), &d)| MmDistanceRow {
            distance: d,
            normalized_distance: d / d_max,
            peak_pte_with: w.pte(),
            peak_pte_without: wo.pte(),
            pte_ratio: w.pte() / wo.pte(),
        })
        .collect();
    Ok(MmDistanceComparison {
        with_mm,
        without_mm,
        rows,
    })
}
