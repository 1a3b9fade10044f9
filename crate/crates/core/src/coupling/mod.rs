//! Mutual inductances between resonators: analytic coaxial filaments,
//! coupling coefficients, and tabulated (e.g. field-solver exported) data.

mod plan;
pub mod quadrature;
mod table;

pub use plan::{build_paper_couplings, CoilGeometry, CoilShape, CouplingMode, CouplingPlan, Layout, PairLaw, PairRule};
pub use table::{interpolate_coupling, CouplingTable};

use quadrature::{integrate, QuadratureOptions};

use crate::error::{Error, Result};

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// A circular filament loop on the shared axis. Multi-turn coils are stacked
/// filaments at one radius and position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopGeometry {
    pub radius: f64,
    pub turns: u32,
    pub axial_position: f64,
}

impl LoopGeometry {
    pub fn new(radius: f64, turns: u32, axial_position: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Geometry(format!("loop radius must be > 0, got {radius}")));
        }
        if turns == 0 {
            return Err(Error::Geometry("loop needs at least one turn".into()));
        }
        if !axial_position.is_finite() {
            return Err(Error::Geometry("axial position must be finite".into()));
        }
        Ok(Self {
            radius,
            turns,
            axial_position,
        })
    }
}

/// Mutual inductance of two coaxial loops from the Neumann double integral.
///
/// For coaxial circles the double contour integral collapses to
/// `M = μ0·N_a·N_b·a·b·∫₀^π cos φ / sqrt(a² + b² − 2ab·cos φ + Δz²) dφ`,
/// evaluated adaptively to a relative tolerance of 1e-8.
pub fn coaxial_loop_mutual(a: &LoopGeometry, b: &LoopGeometry) -> Result<f64> {
    coaxial_loop_mutual_with(a, b, QuadratureOptions::default())
}

pub fn coaxial_loop_mutual_with(a: &LoopGeometry, b: &LoopGeometry, opts: QuadratureOptions) -> Result<f64> {
    let dz = b.axial_position - a.axial_position;
    let (ra, rb) = (a.radius, b.radius);
    if dz == 0.0 && ra == rb {
        return Err(Error::SingularGeometry(format!(
            "coincident filaments of radius {ra} m at z = {} m",
            a.axial_position
        )));
    }
    // order the radii so the integrand and its sum are independent of argument order
    let (r1, r2) = if ra <= rb { (ra, rb) } else { (rb, ra) };
    let base = r1 * r1 + r2 * r2 + dz * dz;
    let two_ab = 2.0 * r1 * r2;
    let integral = integrate(|phi| phi.cos() / (base - two_ab * phi.cos()).sqrt(), 0.0, std::f64::consts::PI, opts)?;
    Ok(MU_0 * f64::from(a.turns) * f64::from(b.turns) * r1 * r2 * integral)
}

/// `k·sqrt(L_a·L_b)`.
pub fn coupling_from_k(k: f64, l_a: f64, l_b: f64) -> Result<f64> {
    if !k.is_finite() || k.abs() > 1.0 {
        return Err(Error::CoefficientBound {
            pair: "coefficient".into(),
            k,
        });
    }
    if !(l_a > 0.0 && l_b > 0.0 && l_a.is_finite() && l_b.is_finite()) {
        return Err(Error::Domain(format!("inductances must be > 0, got {l_a}, {l_b}")));
    }
    Ok(k * (l_a * l_b).sqrt())
}
