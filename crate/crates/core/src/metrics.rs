//! Error metrics shared by the solver loop and the experiment harness.

use crate::error::{invalid_arg, Result};
use crate::linalg::vector::{dist_sq, norm_sq};

/// `||x - x_hat|| / ||x_hat||`, or the absolute error when `x_hat = 0`.
pub fn relative_error(x: &[f64], x_hat: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), x_hat.len());
    let num = dist_sq(x, x_hat).sqrt();
    let den = norm_sq(x_hat).sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Peak signal-to-noise ratio in decibels, `10 log10(sum x_hat^2 / sum (x - x_hat)^2)`.
///
/// Returns `+inf` for an exact reconstruction.
pub fn psnr(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(invalid_arg(format!(
            "length mismatch: {} vs {}",
            x.len(),
            x_hat.len()
        )));
    }
    let signal = norm_sq(x_hat);
    if signal == 0.0 {
        return Err(invalid_arg("reference image is identically zero"));
    }
    let err = dist_sq(x, x_hat);
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / err).log10())
}
