use super::PMatrix;
use crate::error::{Error, Result};

/// Largest number of entries a Kronecker product may hold.
pub(crate) const KRON_MAX_ENTRIES: usize = 1 << 26;

/// `A (x) B`, entry `(i p + k, j q + l)` equal to `a_ij b_kl`.
pub fn kron(a: &PMatrix, b: &PMatrix) -> Result<PMatrix> {
    let rows = a.rows().checked_mul(b.rows()).ok_or(Error::KronOverflow)?;
    let cols = a.cols().checked_mul(b.cols()).ok_or(Error::KronOverflow)?;
    if rows.checked_mul(cols).map_or(true, |e| e > KRON_MAX_ENTRIES) {
        return Err(Error::KronOverflow);
    }
    let (p, q) = (b.rows(), b.cols());
    Ok(PMatrix::from_fn(rows, cols, |r, c| {
        a.get(r / p, c / q) * b.get(r % p, c % q)
    }))
}

/// Column-stacking of `x` into an `mn x 1` matrix.
pub fn vec(x: &PMatrix) -> PMatrix {
    let (m, n) = (x.rows(), x.cols());
    PMatrix::from_fn(m * n, 1, |r, _| x.get(r % m, r / m))
}

/// Inverse of [`vec`].
pub fn unvec(v: &PMatrix, m: usize, n: usize) -> Result<PMatrix> {
    if v.cols() != 1 || v.rows() != m * n {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape {}x{} into {m}x{n}",
            v.rows(),
            v.cols()
        )));
    }
    Ok(PMatrix::from_fn(m, n, |i, j| v.get(j * m + i, 0)))
}
