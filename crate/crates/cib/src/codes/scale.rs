//! Percentage to 1-5 half-point scale mapping.

use super::CodesError;

/// Maps an event fraction to the half-point behavioral scale.
///
/// Linear map `1 + 4p`, rounded to the nearest half point (midpoints round
/// up), clamped to `[1, 5]`. Input must lie in `[0, 1]`; use
/// [`try_percentage_to_score`] for fallible input.
pub fn percentage_to_score(p: f64) -> f64 {
    try_percentage_to_score(p).expect("fraction must lie in [0,1]")
}

/// Fallible variant of [`percentage_to_score`].
pub fn try_percentage_to_score(p: f64) -> Result<f64, CodesError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(CodesError::OutOfRange { value: p });
    }
    let raw = 1.0 + 4.0 * p;
    let half = ((2.0 * raw + 0.5).floor()) / 2.0;
    Ok(half.clamp(1.0, 5.0))
}

/// True when a score sits on the half-point lattice `{1.0, 1.5, ..., 5.0}`.
pub fn on_half_point_lattice(score: f64) -> bool {
    if !(1.0..=5.0).contains(&score) {
        return false;
    }
    let doubled = score * 2.0;
    (doubled - doubled.round()).abs() < 1e-9
}
