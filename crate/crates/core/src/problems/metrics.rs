use crate::error::{check_len, Error, Result};
use crate::linalg::{norm2, sub};
use crate::lowrank::singular_values;

/// Normalized singular values below this are dropped from exported spectra.
pub const EXPORT_SPECTRUM_FLOOR: f64 = 1e-3;

/// `‖x_exact − x‖₂ / ‖x_exact‖₂`
pub fn relative_error(x: &[f64], x_exact: &[f64]) -> Result<f64> {
    check_len("relative error", x_exact.len(), x.len())?;
    let denom = norm2(x_exact);
    if denom == 0.0 {
        return Err(Error::ZeroVector("exact solution"));
    }
    Ok(norm2(&sub(x_exact, x)) / denom)
}

/// Singular values of `unvec(x)` divided by the largest one (all zeros for
/// a zero image).
pub fn normalized_spectrum(x: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut s = singular_values(x, n)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top > 0.0 {
        s.iter_mut().for_each(|v| *v /= top);
    }
    Ok(s)
}

/// Leading part of a normalized spectrum at or above [`EXPORT_SPECTRUM_FLOOR`].
pub fn export_spectrum(spectrum: &[f64]) -> Vec<f64> {
    spectrum.iter().copied().take_while(|&s| s >= EXPORT_SPECTRUM_FLOOR).collect()
}
