//! Principal branch of the Lambert W function.

use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// `W₀(x)`: the solution `w ≥ -1` of `w·eʷ = x`, for `x ≥ -1/e`.
///
/// A branch-point series or logarithmic asymptote seeds Halley's iteration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E - 1e-15 {
        return Err(Error::Domain(format!("W0 undefined for x = {x} < -1/e")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    // Distance from the branch point, p = sqrt(2(ex + 1)).
    let p2 = 2.0 * (std::f64::consts::E * x + 1.0);
    let p = p2.max(0.0).sqrt();
    if p < 1e-3 {
        return Ok(-1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p.powi(3) - 43.0 / 540.0 * p.powi(4));
    }

    let mut w = if x < -0.25 {
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p.powi(3)
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - x.ln_1p() / (2.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}
