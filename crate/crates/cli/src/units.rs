//! Unit-suffixed physical quantities such as `"4 uH"` or `"100mm"`.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;
use std::marker::PhantomData;

pub trait Dimension {
    /// SI unit symbol used when writing values back out.
    const UNIT: &'static str;
    /// Accepted spellings of the base unit.
    const SPELLINGS: &'static [&'static str];
    const NAME: &'static str;
}

macro_rules! dimension {
    ($ty:ident, $unit:literal, [$($spelling:literal),+], $name:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $ty;
        impl Dimension for $ty {
            const UNIT: &'static str = $unit;
            const SPELLINGS: &'static [&'static str] = &[$($spelling),+];
            const NAME: &'static str = $name;
        }
    };
}

dimension!(Henries, "H", ["H"], "inductance");
dimension!(Farads, "F", ["F"], "capacitance");
dimension!(Ohms, "ohm", ["ohm", "Ohm", "Ω"], "resistance");
dimension!(Meters, "m", ["m"], "length");
dimension!(Hertz, "Hz", ["Hz"], "frequency");
dimension!(Volts, "V", ["V"], "voltage");

const PREFIXES: &[(&str, i32)] = &[
    ("p", -12),
    ("n", -9),
    ("u", -6),
    ("µ", -6),
    ("μ", -6),
    ("m", -3),
    ("c", -2),
    ("k", 3),
    ("M", 6),
    ("G", 9),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("expected a {dimension} such as \"1.5 {unit}\", got {text:?}")]
    Malformed {
        text: String,
        dimension: &'static str,
        unit: &'static str,
    },
    #[error("unknown unit suffix {suffix:?} for a {dimension} (expected a prefix of {unit})")]
    UnknownUnit {
        suffix: String,
        dimension: &'static str,
        unit: &'static str,
    },
}

/// Parses `text` as a quantity of dimension `D`, returning SI units.
///
/// Submultiples are applied by division so that e.g. `"4 uH"` is the
/// correctly rounded `4e-6`.
pub fn parse_quantity<D: Dimension>(text: &str) -> Result<f64, UnitError> {
    let text = text.trim();
    let malformed = || UnitError::Malformed {
        text: text.to_string(),
        dimension: D::NAME,
        unit: D::UNIT,
    };
    let split = text
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .map_or(text.len(), |(i, _)| i);
    let (number, suffix) = text.split_at(split);
    let value: f64 = number.parse().map_err(|_| malformed())?;
    if !value.is_finite() {
        return Err(malformed());
    }
    let suffix = suffix.trim();
    if suffix.is_empty() {
        return Err(UnitError::UnknownUnit {
            suffix: String::new(),
            dimension: D::NAME,
            unit: D::UNIT,
        });
    }
    for spelling in D::SPELLINGS {
        if suffix == *spelling {
            return Ok(value);
        }
        if let Some(prefix) = suffix.strip_suffix(spelling) {
            if let Some(&(_, exp)) = PREFIXES.iter().find(|(p, _)| *p == prefix) {
                let scale = 10f64.powi(exp.abs());
                return Ok(if exp < 0 { value / scale } else { value * scale });
            }
        }
    }
    Err(UnitError::UnknownUnit {
        suffix: suffix.to_string(),
        dimension: D::NAME,
        unit: D::UNIT,
    })
}

/// Writes `value` in base SI units with a round-tripping mantissa.
pub fn format_quantity<D: Dimension>(value: f64) -> String {
    format!("{value:e} {}", D::UNIT)
}

/// A value in SI units that (de)serializes as a unit-suffixed string.
#[derive(Clone, Copy, PartialEq)]
pub struct Quantity<D> {
    pub si: f64,
    _dim: PhantomData<D>,
}

impl<D> Quantity<D> {
    pub fn new(si: f64) -> Self {
        Self { si, _dim: PhantomData }
    }
}

impl<D: Dimension> fmt::Debug for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_quantity::<D>(self.si))
    }
}

impl<D: Dimension> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_quantity::<D>(self.si))
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(deserializer: De) -> Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = Quantity<D>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a {} string with a unit suffix, e.g. \"1 {}\"", D::NAME, D::UNIT)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                parse_quantity::<D>(v).map(Quantity::new).map_err(E::custom)
            }
        }
        deserializer.deserialize_str(V(PhantomData))
    }
}
