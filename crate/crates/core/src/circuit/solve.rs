use num_complex::Complex64;

use super::{ResonatorParams, SystemModel};
use crate::error::{Error, Result};
use crate::linalg::{norm_2, ComplexMatrix, Lu, LuError};

/// Systems whose 1-norm condition number exceeds this are reported singular.
pub const SINGULAR_CONDITION_LIMIT: f64 = 1e14;

/// Accepted solves satisfy `‖Zx − v‖ ≤ RESIDUAL_LIMIT·‖v‖`.
const RESIDUAL_LIMIT: f64 = 1e-10;

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "angular frequency must be finite and > 0, got {omega}"
        )))
    }
}

/// `R + j(ωL − 1/(ωC))`.
pub fn self_impedance(params: &ResonatorParams, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    Ok(Complex64::new(
        params.resistance,
        omega * params.inductance - 1.0 / (omega * params.capacitance),
    ))
}

/// Assembles the loop-impedance matrix and excitation vector of `model` at `omega`.
///
/// Diagonal entries are the loop self-impedances with `r_source` added on the
/// source row and `r_load` on the load row; off-diagonals are `jωM_ij`. The
/// result is complex-symmetric.
pub fn build_kvl_matrix(model: &SystemModel, omega: f64) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    check_omega(omega)?;
    let n = model.len();
    if model.couplings().dim() != n {
        return Err(Error::Model("coupling matrix dimension mismatch".into()));
    }
    let mut z = ComplexMatrix::zeros(n);
    for (i, node) in model.resonators().iter().enumerate() {
        z.set(i, i, self_impedance(&node.params, omega)?);
        for j in 0..n {
            if j != i {
                z.set(i, j, Complex64::new(0.0, omega * model.couplings().get(i, j)));
            }
        }
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    // both ports exist on validated models except a missing load row
    let src = model.source_index().expect("validated model has a source row");
    z.add_to(src, src, Complex64::new(model.source().r_source, 0.0));
    v[src] = Complex64::new(model.source().v_source, 0.0);
    if let Some(ld) = model.load_index() {
        z.add_to(ld, ld, Complex64::new(model.load().r_load, 0.0));
    }
    Ok((z, v))
}

/// Solves the KVL system for the loop currents in amperes, ordered as the
/// model's resonators.
pub fn solve_currents(model: &SystemModel, omega: f64) -> Result<Vec<Complex64>> {
    let (z, v) = build_kvl_matrix(model, omega)?;
    let singular = |reason: String| Error::SingularSystem { omega, reason };

    let lu = Lu::factor(&z).map_err(|LuError::ZeroPivot(k)| singular(format!("zero pivot at step {k}")))?;
    let cond = lu.condition_1(&z);
    if !(cond <= SINGULAR_CONDITION_LIMIT) {
        return Err(singular(format!("condition estimate {cond:e}")));
    }

    let mut x = lu.solve(&v);
    let v_norm = norm_2(&v);
    let residual = |x: &[Complex64]| -> Vec<Complex64> {
        z.mul_vec(x).iter().zip(&v).map(|(a, b)| b - a).collect()
    };
    let mut r = residual(&x);
    if norm_2(&r) > RESIDUAL_LIMIT * v_norm {
        let dx = lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        r = residual(&x);
    }
    let r_norm = norm_2(&r);
    if !(r_norm <= RESIDUAL_LIMIT * v_norm) {
        return Err(singular(format!(
            "relative residual {:e} after refinement",
            r_norm / v_norm
        )));
    }
    Ok(x)
}
