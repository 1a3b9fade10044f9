use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

use super::peak::{peak_find, Peak};
use crate::circuit::SystemModel;
use crate::error::{Error, Result};
use crate::metrics::FrequencyResponse;

pub const CSV_HEADER: &str = "swept_value,frequency_hz,s21_re,s21_im,s21_mag,s11_mag,pte_percent";

/// One grid point. `response` is `None` where the system was singular.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub swept_value: f64,
    pub frequency: f64,
    pub response: Option<FrequencyResponse>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    /// SHA-256 over the serialized models, in sweep order.
    pub model_hash: String,
    /// Left empty unless the caller stamps it, so output stays reproducible.
    pub timestamp: Option<String>,
    pub tool_version: String,
}

/// Rows ordered by (swept value, frequency), `points_per_value` rows per
/// swept value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub swept_variable: String,
    pub swept_values: Vec<f64>,
    /// Optional names for the swept values (topology comparisons).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    pub points_per_value: usize,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub(crate) fn assemble(
        swept_variable: &str,
        swept_values: Vec<f64>,
        points_per_value: usize,
        rows: Vec<SweepRow>,
        models: &[&SystemModel],
    ) -> Self {
        debug_assert_eq!(rows.len(), swept_values.len() * points_per_value);
        Self {
            swept_variable: swept_variable.to_string(),
            swept_values,
            labels: Vec::new(),
            points_per_value,
            rows,
            metadata: SweepMetadata {
                model_hash: model_hash(models),
                timestamp: None,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    /// Rows belonging to the `index`-th swept value.
    pub fn curve(&self, index: usize) -> &[SweepRow] {
        let start = index * self.points_per_value;
        &self.rows[start..start + self.points_per_value]
    }

    pub fn peak(&self, index: usize) -> Result<Peak> {
        peak_find(self.curve(index))
    }

    /// Refined peak of every curve, in swept order.
    pub fn peaks(&self) -> Result<Vec<Peak>> {
        (0..self.swept_values.len()).map(|i| self.peak(i)).collect()
    }

    /// Swept value whose curve has the largest peak |S21| (lowest value on ties).
    pub fn argmax_swept(&self) -> Result<(f64, Peak)> {
        let mut best: Option<(f64, Peak)> = None;
        for (i, &v) in self.swept_values.iter().enumerate() {
            let p = self.peak(i)?;
            if best.is_none_or(|(_, b)| p.s21_mag > b.s21_mag) {
                best = Some((v, p));
            }
        }
        best.ok_or(Error::EmptyResult)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 160);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:.16e},{:.16e}", row.swept_value, row.frequency);
            match &row.response {
                Some(r) => {
                    let _ = write!(
                        out,
                        ",{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                        r.s21.re,
                        r.s21.im,
                        r.s21.norm(),
                        r.s11.norm(),
                        r.pte
                    );
                }
                None => out.push_str(",NaN,NaN,NaN,NaN,NaN"),
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_full_precision(self)
    }
}

/// Serializes `value` as JSON with every float written to 17 significant digits.
pub fn to_json_full_precision<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Model(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Model(format!("serialization failed: {e}")))
}

struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn model_hash(models: &[&SystemModel]) -> String {
    let mut hasher = Sha256::new();
    for model in models {
        // serialization of a validated model cannot fail (no maps, no non-string keys)
        let bytes = serde_json::to_vec(model).unwrap_or_default();
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    hasher.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
