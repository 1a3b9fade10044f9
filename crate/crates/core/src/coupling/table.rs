use crate::error::{Error, Result};

/// Mutual inductance sampled against separation for one resonator pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    rows: Vec<(f64, f64)>,
}

impl CouplingTable {
    /// `rows` are `(separation_m, m_henries)` with strictly increasing separation.
    pub fn new(rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Table(format!("need at least 2 rows, got {}", rows.len())));
        }
        if rows.iter().any(|(s, m)| !s.is_finite() || !m.is_finite()) {
            return Err(Error::Table("non-finite entry".into()));
        }
        if let Some(w) = rows.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::Table(format!(
                "separations must strictly increase ({} then {})",
                w[0].0, w[1].0
            )));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn range(&self) -> (f64, f64) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].0)
    }

    pub fn interpolate(&self, separation: f64) -> Result<f64> {
        interpolate_coupling(self, separation)
    }
}

/// Piecewise-linear interpolation; refuses to extrapolate.
pub fn interpolate_coupling(table: &CouplingTable, separation: f64) -> Result<f64> {
    let (min, max) = table.range();
    if !(separation >= min && separation <= max) {
        return Err(Error::Extrapolation { separation, min, max });
    }
    let rows = &table.rows;
    match rows.binary_search_by(|(s, _)| s.total_cmp(&separation)) {
        Ok(i) => Ok(rows[i].1),
        Err(i) => {
            let (s0, m0) = rows[i - 1];
            let (s1, m1) = rows[i];
            let t = (separation - s0) / (s1 - s0);
            Ok(m0 + t * (m1 - m0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> CouplingTable {
        CouplingTable::new(vec![(0.1, 1e-7), (0.2, 4e-8), (0.25, 3e-8)]).unwrap()
    }

    #[test]
    fn knots_are_exact() {
        let t = table();
        for &(s, m) in t.rows() {
            assert_eq!(t.interpolate(s).unwrap(), m);
        }
    }

    #[test]
    fn midpoint_is_mean() {
        let t = table();
        assert!((t.interpolate(0.225).unwrap() - 3.5e-8).abs() < 1e-22);
    }

    #[test]
    fn linear_example() {
        let t = CouplingTable::new(vec![(0.1, 1e-7), (0.2, 4e-8)]).unwrap();
        assert!((t.interpolate(0.15).unwrap() - 7e-8).abs() < 1e-22);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let t = table();
        assert!(matches!(t.interpolate(0.05), Err(Error::Extrapolation { .. })));
        assert!(matches!(t.interpolate(0.3), Err(Error::Extrapolation { .. })));
        assert!(t.interpolate(f64::NAN).is_err());
    }

    #[test]
    fn malformed_tables() {
        assert!(CouplingTable::new(vec![(0.1, 1e-7)]).is_err());
        assert!(CouplingTable::new(vec![(0.2, 1e-7), (0.1, 1e-7)]).is_err());
        assert!(CouplingTable::new(vec![(0.1, 1e-7), (0.1, 2e-7)]).is_err());
    }

    proptest! {
        #[test]
        fn stays_between_bracketing_knots(
            knots in prop::collection::vec((0.001f64..0.05, -1e-6f64..1e-6), 2..8),
            u in 0.0f64..1.0,
        ) {
            let mut s = 0.0;
            let rows: Vec<(f64, f64)> = knots.iter().map(|&(ds, m)| { s += ds; (s, m) }).collect();
            let t = CouplingTable::new(rows.clone()).unwrap();
            let (lo, hi) = t.range();
            let q = lo + u * (hi - lo);
            let v = t.interpolate(q).unwrap();
            let i = rows.iter().position(|r| r.0 >= q).unwrap();
            let (a, b) = if i == 0 { (rows[0].1, rows[0].1) } else { (rows[i - 1].1, rows[i].1) };
            prop_assert!(v >= a.min(b) - 1e-21 && v <= a.max(b) + 1e-21);
        }
    }
}
