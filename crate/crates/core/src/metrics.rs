//! Figures of merit derived from solved loop currents.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::circuit::{self_impedance, solve_currents, ResonatorParams, RoleKind, SystemModel};
use crate::error::{Error, Result};

/// Everything reported for one solved frequency point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyResponse {
    pub frequency: f64,
    pub currents: Vec<Complex64>,
    pub v_load: Complex64,
    /// `V_L / V_S`.
    pub gain: Complex64,
    pub s21: Complex64,
    /// `|S21|²·100`.
    pub pte: f64,
    pub s11: Complex64,
}

impl FrequencyResponse {
    /// Solves `model` at `frequency` (Hz) and derives every metric.
    pub fn evaluate(model: &SystemModel, frequency: f64) -> Result<Self> {
        let omega = 2.0 * PI * frequency;
        let currents = solve_currents(model, omega)?;
        let gain = voltage_gain(model, &currents)?;
        let s21 = s21(gain, model.source().r_source, model.load().r_load)?;
        let s11 = reflection_from_currents(model, &currents)?;
        Ok(Self {
            frequency,
            v_load: gain * model.source().v_source,
            pte: pte(s21),
            currents,
            gain,
            s21,
            s11,
        })
    }
}

/// `(I_load·R_L) / V_s`.
pub fn voltage_gain(model: &SystemModel, currents: &[Complex64]) -> Result<Complex64> {
    let v_s = model.source().v_source;
    if v_s == 0.0 {
        return Err(Error::UndefinedGain("source voltage is zero".into()));
    }
    let load = model
        .load_index()
        .ok_or_else(|| Error::UndefinedGain("model has no load or receiver row".into()))?;
    if currents.len() != model.len() {
        return Err(Error::UndefinedGain(format!(
            "{} currents for {} resonators",
            currents.len(),
            model.len()
        )));
    }
    Ok(currents[load] * model.load().r_load / v_s)
}

/// `2·gain·sqrt(R_S/R_L)`.
pub fn s21(gain: Complex64, r_source: f64, r_load: f64) -> Result<Complex64> {
    if !(r_source > 0.0 && r_load > 0.0) {
        return Err(Error::Domain(format!(
            "S21 needs positive port resistances, got R_S = {r_source}, R_L = {r_load}"
        )));
    }
    Ok(gain * 2.0 * (r_source / r_load).sqrt())
}

/// Power-transfer efficiency in percent, `|S21|²·100`.
pub fn pte(s21: Complex64) -> f64 {
    s21.norm_sqr() * 100.0
}

/// Driving-point impedance seen by the source, excluding `R_S`.
pub fn input_impedance(model: &SystemModel, currents: &[Complex64]) -> Result<Complex64> {
    let src = model.source_index().expect("validated model has a source row");
    let i_src = currents[src];
    if i_src == Complex64::new(0.0, 0.0) {
        return Err(Error::UndefinedGain("source current is zero".into()));
    }
    Ok(Complex64::new(model.source().v_source, 0.0) / i_src - model.source().r_source)
}

fn reflection_from_currents(model: &SystemModel, currents: &[Complex64]) -> Result<Complex64> {
    let z_in = input_impedance(model, currents)?;
    let r_s = model.source().r_source;
    Ok((z_in - r_s) / (z_in + r_s))
}

/// `S11 = (Z_in − R_S)/(Z_in + R_S)`, referenced to the source resistance.
pub fn input_reflection(model: &SystemModel, omega: f64) -> Result<Complex64> {
    let currents = solve_currents(model, omega)?;
    reflection_from_currents(model, &currents)
}

/// `1/(2π·sqrt(LC))`.
pub fn resonant_frequency(l: f64, c: f64) -> Result<f64> {
    if !(l > 0.0 && c > 0.0 && l.is_finite() && c.is_finite()) {
        return Err(Error::Domain(format!("L and C must be > 0, got L = {l}, C = {c}")));
    }
    Ok(1.0 / (2.0 * PI * (l * c).sqrt()))
}

/// Loop parameters consumed by [`closed_form_gain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourCoilParams {
    pub driver: ResonatorParams,
    pub transmitter: ResonatorParams,
    pub receiver: ResonatorParams,
    pub load: ResonatorParams,
    pub r_load: f64,
}

impl FourCoilParams {
    pub fn from_model(model: &SystemModel) -> Result<Self> {
        model.validate_four_coil()?;
        let get = |kind| model.resonators()[model.index_of_kind(kind).expect("checked")].params;
        Ok(Self {
            driver: get(RoleKind::Driver),
            transmitter: get(RoleKind::Transmitter),
            receiver: get(RoleKind::Receiver),
            load: get(RoleKind::Load),
            r_load: model.load().r_load,
        })
    }
}

/// The printed closed-form four-coil voltage transfer ratio, evaluated as is:
///
/// ```text
///            ω³·L_tx·L_rx·R_L·sqrt(L_dr·L_l)
/// ─────────────────────────────────────────────────────────────────────────────
/// Z_dr·Z_tx·Z_rx·Z_l + ω²(L_dr·L_rx·Z_rx·Z_l + L_tx·L_rx·Z_dr·Z_l + L_rx·L_l·Z_dr·Z_tx)
///                    + ω⁴·L_dr·L_tx·L_rx·L_l
/// ```
///
/// with `Z_l` including `R_L`. The expression carries self-inductances where
/// mutual inductances would be dimensionally expected, so it is a diagnostic
/// only; the matrix solve is the canonical gain.
pub fn closed_form_gain(params: &FourCoilParams, omega: f64) -> Result<Complex64> {
    let z_dr = self_impedance(&params.driver, omega)?;
    let z_tx = self_impedance(&params.transmitter, omega)?;
    let z_rx = self_impedance(&params.receiver, omega)?;
    let z_l = self_impedance(&params.load, omega)? + params.r_load;
    let (l_dr, l_tx, l_rx, l_l) = (
        params.driver.inductance,
        params.transmitter.inductance,
        params.receiver.inductance,
        params.load.inductance,
    );
    let w2 = omega * omega;
    let numerator = omega.powi(3) * l_tx * l_rx * params.r_load * (l_dr * l_l).sqrt();
    let denominator = z_dr * z_tx * z_rx * z_l
        + w2 * (l_dr * l_rx * z_rx * z_l + l_tx * l_rx * z_dr * z_l + l_rx * l_l * z_dr * z_tx)
        + w2 * w2 * (l_dr * l_tx * l_rx * l_l);
    if denominator == Complex64::new(0.0, 0.0) || !denominator.is_finite() {
        return Err(Error::SingularFormula { omega });
    }
    Ok(numerator / denominator)
}
