use serde::Serialize;

use super::result::SweepRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    /// Index of the best grid row.
    pub index: usize,
    pub frequency: f64,
    pub s21_mag: f64,
    /// False when the grid maximum was returned unchanged (boundary, gap
    /// neighbour or flat neighbourhood).
    pub refined: bool,
}

impl Peak {
    pub fn pte(&self) -> f64 {
        self.s21_mag * self.s21_mag * 100.0
    }
}

/// Largest |S21| over `rows`, refined by a parabola through the neighbours.
///
/// Gaps are skipped. Ties go to the lowest frequency; boundary maxima are
/// returned unrefined.
pub fn peak_find(rows: &[SweepRow]) -> Result<Peak> {
    let mag = |i: usize| rows[i].response.as_ref().map(|r| r.s21.norm());
    let mut best: Option<(usize, f64)> = None;
    for i in 0..rows.len() {
        if let Some(m) = mag(i) {
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
    }
    let (index, value) = best.ok_or(Error::EmptyResult)?;
    let unrefined = Peak {
        index,
        frequency: rows[index].frequency,
        s21_mag: value,
        refined: false,
    };
    if index == 0 || index + 1 >= rows.len() {
        return Ok(unrefined);
    }
    let (Some(y0), Some(y2)) = (mag(index - 1), mag(index + 1)) else {
        return Ok(unrefined);
    };
    let (x0, x1, x2) = (rows[index - 1].frequency, rows[index].frequency, rows[index + 1].frequency);
    match parabola_vertex((x0, y0), (x1, value), (x2, y2)) {
        Some((x, y)) if x >= x0 && x <= x2 && y >= value => Ok(Peak {
            index,
            frequency: x,
            s21_mag: y,
            refined: true,
        }),
        _ => Ok(unrefined),
    }
}

fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> Option<(f64, f64)> {
    // Lagrange form: y = a(x − x1)² + b(x − x1) + y1
    let (h0, h2) = (x0 - x1, x2 - x1);
    let (d0, d2) = (y0 - y1, y2 - y1);
    let denom = h0 * h2 * (h0 - h2);
    if denom == 0.0 {
        return None;
    }
    let a = (d0 * h2 - d2 * h0) / denom;
    let b = (d2 * h0 * h0 - d0 * h2 * h2) / denom;
    if !(a < 0.0) {
        return None;
    }
    let dx = -b / (2.0 * a);
    Some((x1 + dx, y1 + b * dx / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::FrequencyResponse;
    use num_complex::Complex64;

    fn rows(freqs: &[f64], mags: &[Option<f64>]) -> Vec<SweepRow> {
        freqs
            .iter()
            .zip(mags)
            .map(|(&f, m)| SweepRow {
                swept_value: 0.0,
                frequency: f,
                response: m.map(|m| FrequencyResponse {
                    frequency: f,
                    currents: vec![],
                    v_load: Complex64::new(0.0, 0.0),
                    gain: Complex64::new(0.0, 0.0),
                    s21: Complex64::new(m, 0.0),
                    pte: m * m * 100.0,
                    s11: Complex64::new(0.0, 0.0),
                }),
            })
            .collect()
    }

    #[test]
    fn monotone_returns_last_point() {
        let f: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let p = peak_find(&rows(&f, &[Some(0.1), Some(0.2), Some(0.3), Some(0.4), Some(0.5)])).unwrap();
        assert_eq!(p.index, 4);
        assert_eq!(p.frequency, 4.0);
        assert!(!p.refined);
    }

    #[test]
    fn flat_returns_lowest() {
        let f: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let p = peak_find(&rows(&f, &[Some(0.3); 5])).unwrap();
        assert_eq!(p.index, 0);
        assert_eq!(p.frequency, 0.0);
    }

    #[test]
    fn lorentzian_between_points() {
        // true centre halfway between two grid points
        let step = 1.0e3;
        let center = 12.5e6 + 0.5 * step;
        let width = 4.0e3;
        let f: Vec<f64> = (-20..=20).map(|i| 12.5e6 + i as f64 * step).collect();
        let m: Vec<Option<f64>> = f
            .iter()
            .map(|&x| Some(1.0 / (1.0 + ((x - center) / width).powi(2)).sqrt()))
            .collect();
        let p = peak_find(&rows(&f, &m)).unwrap();
        assert!(p.refined);
        assert!((p.frequency - center).abs() < 0.5 * step, "{}", p.frequency - center);
    }

    #[test]
    fn parabola_is_exact_on_quadratics() {
        let f = [1.0, 2.5, 3.0];
        let q = |x: f64| 2.0 - 0.5 * (x - 2.2) * (x - 2.2);
        let p = peak_find(&rows(&f, &[Some(q(1.0)), Some(q(2.5)), Some(q(3.0))])).unwrap();
        assert!((p.frequency - 2.2).abs() < 1e-12);
        assert!((p.s21_mag - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaps_are_skipped() {
        let f = [1.0, 2.0, 3.0, 4.0];
        let p = peak_find(&rows(&f, &[Some(0.1), None, Some(0.9), Some(0.2)])).unwrap();
        assert_eq!(p.index, 2);
        assert!(!p.refined);
        assert!(matches!(peak_find(&rows(&f, &[None; 4])), Err(Error::EmptyResult)));
        assert!(matches!(peak_find(&[]), Err(Error::EmptyResult)));
    }
}
