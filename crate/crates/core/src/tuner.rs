//! Compensation-capacitor tuning, slab-position optimisation and match checks.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::circuit::{MMUnitCellParams, SystemModel};
use crate::error::{Error, Result};
use crate::metrics::input_reflection;
use crate::scenario::ModelTemplate;
use crate::sweep::{evaluate_grid, peak_find, FrequencyGrid, SweepOptions};

/// Golden ratio.
const PHI: f64 = 1.618_033_988_749_895;
const SCAN_POINTS: usize = 9;
/// Position tolerance as a fraction of the transfer gap.
pub const POSITION_TOLERANCE: f64 = 1e-4;
/// |S11| below this counts as matched.
pub const MATCH_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuneResult {
    pub tuned_value: f64,
    pub achieved_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacitorTuning {
    pub result: TuneResult,
    pub cell: MMUnitCellParams,
}

/// Capacitance that resonates with `inductance` at `frequency`.
pub fn capacitance_for(inductance: f64, frequency: f64) -> Result<f64> {
    if !(inductance.is_finite() && inductance > 0.0) {
        return Err(Error::Domain(format!("inductance must be > 0, got {inductance}")));
    }
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::Domain(format!("frequency must be > 0, got {frequency}")));
    }
    let omega = 2.0 * PI * frequency;
    Ok(1.0 / (omega * omega * inductance))
}

/// Chooses `c_compensation` so that the cell resonates at `target` (Hz).
///
/// The stray capacitance is in parallel, so targets above the stray-only
/// resonance are unreachable.
pub fn tune_compensation_capacitor(cell: &MMUnitCellParams, target: f64) -> Result<CapacitorTuning> {
    let total = capacitance_for(cell.inductance, target)?;
    if !(cell.c_stray.is_finite() && cell.c_stray >= 0.0) {
        return Err(Error::Domain(format!("stray capacitance must be >= 0, got {}", cell.c_stray)));
    }
    let mut c_comp = total - cell.c_stray;
    if c_comp < 0.0 {
        // rounding when the target sits exactly on the stray-only resonance
        if c_comp.abs() <= 1e-12 * total {
            c_comp = 0.0;
        } else {
            let ceiling = 1.0 / (2.0 * PI * (cell.inductance * cell.c_stray).sqrt());
            return Err(Error::InfeasibleTarget(format!(
                "{target} Hz exceeds the stray-only resonance {ceiling} Hz"
            )));
        }
    }
    let tuned = MMUnitCellParams {
        c_compensation: c_comp,
        ..*cell
    };
    let achieved = 1.0 / (2.0 * PI * (tuned.inductance * tuned.total_capacitance()).sqrt());
    Ok(CapacitorTuning {
        result: TuneResult {
            tuned_value: c_comp,
            achieved_objective: achieved,
            iterations: 1,
            converged: true,
        },
        cell: tuned,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionOptimum {
    pub result: TuneResult,
    /// Whether the coarse scan looked unimodal; a `false` here means the
    /// reported optimum may be local.
    pub unimodal: bool,
    /// Every (position, peak |S21|) probe in evaluation order.
    pub probes: Vec<(f64, f64)>,
}

/// Maximises peak |S21| over the slab position within `bounds`.
///
/// A coarse uniform scan brackets the best point, then golden-section search
/// narrows it to `POSITION_TOLERANCE` of the gap. Ties resolve to the lowest
/// position.
pub fn optimize_slab_position(
    template: &ModelTemplate,
    bounds: (f64, f64),
    grid: &FrequencyGrid,
    opts: &SweepOptions,
) -> Result<PositionOptimum> {
    if !template.has_cells() {
        return Err(Error::Tuning("template has no slab to position".into()));
    }
    let (lo, hi) = bounds;
    let gap = template.gap();
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Domain(format!("invalid position bounds [{lo}, {hi}]")));
    }
    if !(lo > 0.0 && hi < gap) {
        return Err(Error::Geometry(format!("position bounds [{lo}, {hi}] must lie inside (0, {gap})")));
    }
    let mut probes: Vec<(f64, f64)> = Vec::new();
    let mut probe = |x: f64| -> Result<f64> {
        let value = objective(template, x, grid, opts).map_err(|e| Error::Probe {
            position: x,
            source: Box::new(e),
        })?;
        if !value.is_finite() {
            return Err(Error::Probe {
                position: x,
                source: Box::new(Error::Domain("objective is not finite".into())),
            });
        }
        probes.push((x, value));
        Ok(value)
    };

    if lo == hi {
        let value = probe(lo)?;
        return Ok(PositionOptimum {
            result: TuneResult {
                tuned_value: lo,
                achieved_objective: value,
                iterations: 0,
                converged: true,
            },
            unimodal: true,
            probes,
        });
    }

    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| if i == SCAN_POINTS - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let mut ys = Vec::with_capacity(SCAN_POINTS);
    for &x in &xs {
        ys.push(probe(x)?);
    }
    let unimodal = is_unimodal(&ys);
    let best = argmax_first(&ys);
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(SCAN_POINTS - 1)];

    let tol = POSITION_TOLERANCE * gap;
    let mut iterations = 0;
    let mut c = b - (b - a) / PHI;
    let mut d = a + (b - a) / PHI;
    let mut fc = probe(c)?;
    let mut fd = probe(d)?;
    while b - a > tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) / PHI;
            fc = probe(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) / PHI;
            fd = probe(d)?;
        }
    }
    probe(0.5 * (a + b))?;

    let (mut tuned, mut value) = probes[0];
    for &(x, y) in &probes[1..] {
        if y > value || (y == value && x < tuned) {
            tuned = x;
            value = y;
        }
    }
    Ok(PositionOptimum {
        result: TuneResult {
            tuned_value: tuned,
            achieved_objective: value,
            iterations,
            converged: b - a <= tol,
        },
        unimodal,
        probes,
    })
}

/// Upper bound on golden-section iterations for a bracket of width `gap`.
pub fn golden_iteration_bound(gap: f64) -> usize {
    let tol = POSITION_TOLERANCE * gap;
    ((gap / tol).ln() / PHI.ln()).ceil() as usize + 2
}

fn objective(template: &ModelTemplate, position: f64, grid: &FrequencyGrid, opts: &SweepOptions) -> Result<f64> {
    let model = template.with_slab_position(position)?.instantiate()?;
    let responses = evaluate_grid(&model, &grid.frequencies(), opts)?;
    Ok(peak_find(&responses)?.s21_mag)
}

fn argmax_first(ys: &[f64]) -> usize {
    let mut best = 0;
    for (i, &y) in ys.iter().enumerate() {
        if y > ys[best] {
            best = i;
        }
    }
    best
}

/// Non-decreasing up to the first maximum, non-increasing after it.
fn is_unimodal(ys: &[f64]) -> bool {
    let peak = argmax_first(ys);
    ys[..=peak].windows(2).all(|w| w[1] >= w[0]) && ys[peak..].windows(2).all(|w| w[1] <= w[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchReport {
    pub frequency: f64,
    pub z_in: Complex64,
    pub s11_mag: f64,
    pub matched: bool,
}

/// Input impedance and reflection seen by the source at `frequency`.
pub fn match_check(model: &SystemModel, frequency: f64) -> Result<MatchReport> {
    let omega = 2.0 * PI * frequency;
    let s11 = input_reflection(model, omega)?;
    let rs = model.source().r_source;
    // invert S11 = (Zin − Rs)/(Zin + Rs)
    let z_in = Complex64::new(rs, 0.0) * (Complex64::new(1.0, 0.0) + s11) / (Complex64::new(1.0, 0.0) - s11);
    let s11_mag = s11.norm();
    Ok(MatchReport {
        frequency,
        z_in,
        s11_mag,
        matched: s11_mag < MATCH_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(c_stray: f64) -> MMUnitCellParams {
        MMUnitCellParams {
            r_ohmic: 0.1,
            r_dielectric: 0.02,
            c_stray,
            c_compensation: 10e-12,
            inductance: 1.49e-6,
        }
    }

    #[test]
    fn compensation_example() {
        let t = tune_compensation_capacitor(&cell(0.0), 13.56e6).unwrap();
        assert!((t.result.tuned_value - 92.45e-12).abs() < 0.01e-12, "{}", t.result.tuned_value);
        assert!((t.result.achieved_objective - 13.56e6).abs() < 1e-3);
    }

    #[test]
    fn stray_capacitance_is_subtracted() {
        let bare = tune_compensation_capacitor(&cell(0.0), 13.56e6).unwrap().result.tuned_value;
        let with = tune_compensation_capacitor(&cell(5e-12), 13.56e6).unwrap().result.tuned_value;
        assert!((bare - with - 5e-12).abs() < 1e-20);
    }

    #[test]
    fn unreachable_target() {
        let c = cell(50e-12);
        let ceiling = 1.0 / (2.0 * PI * (c.inductance * c.c_stray).sqrt());
        let err = tune_compensation_capacitor(&c, ceiling * 1.01).unwrap_err();
        assert!(matches!(err, Error::InfeasibleTarget(_)));
        let exact = tune_compensation_capacitor(&c, ceiling).unwrap();
        assert!(exact.result.tuned_value.abs() < 1e-22);
    }

    #[test]
    fn tuning_rejects_bad_inputs() {
        assert!(tune_compensation_capacitor(&cell(0.0), 0.0).is_err());
        assert!(tune_compensation_capacitor(&cell(-1e-12), 1e6).is_err());
    }

    #[test]
    fn unimodality() {
        assert!(is_unimodal(&[1.0, 2.0, 3.0, 3.0, 2.0]));
        assert!(is_unimodal(&[1.0, 1.0, 1.0]));
        assert!(!is_unimodal(&[1.0, 3.0, 2.0, 4.0, 1.0]));
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn iteration_bound() {
        assert_eq!(golden_iteration_bound(0.25), 22);
    }
}
