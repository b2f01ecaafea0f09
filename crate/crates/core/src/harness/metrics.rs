//! Width metrics relative to the modified Krawczyk enclosure.

use crate::baseline::SampleSet;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::interval::IMatrix;

/// `sum rad(Y) / sum rad(Z)`. `None` when `Z` has zero total radius.
pub fn ratio(y: &IMatrix, z: &IMatrix) -> Result<Option<f64>> {
    if (y.rows(), y.cols()) != (z.rows(), z.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            y.rows(),
            y.cols(),
            z.rows(),
            z.cols()
        )));
    }
    let den = z.sum_rad();
    Ok((den > 0.0).then(|| y.sum_rad() / den))
}

/// Average radius `sum rad / (m n)`.
pub fn mean_r(y: &IMatrix) -> f64 {
    y.sum_rad() / (y.rows() * y.cols()) as f64
}

/// Ratio of `enc` against the MKW enclosure, unavailable when either run
/// failed to verify.
pub fn ratio_vs(enc: &Enclosure, mkw: Option<&Enclosure>) -> Result<Option<f64>> {
    match mkw {
        Some(z) if z.verified && enc.verified => ratio(&enc.evaluated, &z.evaluated),
        _ => Ok(None),
    }
}

/// Fraction of sampled solutions inside `enc.evaluated`. One when there are
/// no samples.
pub fn containment_rate(enc: &Enclosure, samples: &SampleSet) -> f64 {
    let n = samples.solutions.len();
    if n == 0 {
        return 1.0;
    }
    let inside = samples.solutions.iter().filter(|x| enc.evaluated.contains_point(x)).count();
    inside as f64 / n as f64
}
