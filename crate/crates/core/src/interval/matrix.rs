
use super::{iv_meet, Disk, RoundingPolicy};
use crate::dense::{PMatrix, RMatrix};
use crate::error::{Error, Result};
use crate::round::{abs_up, add_up, gamma, mul_up};

/// Entries of a Hadamard divisor below this fraction of the largest one are
/// treated as zero.
pub const SINGULAR_THRESHOLD: f64 = 1.0 / (1u64 << 40) as f64;

/// Dense matrix of disks, stored as a midpoint matrix and a radius matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IMatrix {
    mid: PMatrix,
    rad: RMatrix,
}

impl IMatrix {
    pub fn new(mid: PMatrix, rad: RMatrix) -> Result<Self> {
        if mid.rows() != rad.rows() || mid.cols() != rad.cols() {
            return Err(Error::DimensionMismatch(format!(
                "midpoint {}x{} with radius {}x{}",
                mid.rows(),
                mid.cols(),
                rad.rows(),
                rad.cols()
            )));
        }
        if rad.data().iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidInput("radii must be finite and nonnegative".into()));
        }
        Ok(Self { mid, rad })
    }

    pub fn from_point(mid: PMatrix) -> Self {
        let rad = RMatrix::zeros(mid.rows(), mid.cols());
        Self { mid, rad }
    }

    pub fn from_disks(rows: usize, cols: usize, entries: &[Disk]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let mid = PMatrix::new(rows, cols, entries.iter().map(|d| d.mid).collect())?;
        let rad = RMatrix::new(rows, cols, entries.iter().map(|d| d.rad).collect())?;
        Self::new(mid, rad)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Disk) -> Self {
        let mut mid = PMatrix::zeros(rows, cols);
        let mut rad = RMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let d = f(i, j);
                mid.set(i, j, d.mid);
                rad.set(i, j, d.rad);
            }
        }
        Self { mid, rad }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_point(PMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_point(PMatrix::identity(n))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.mid.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.mid.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Disk {
        Disk {
            mid: self.mid.get(i, j),
            rad: self.rad.get(i, j),
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, d: Disk) {
        self.mid.set(i, j, d.mid);
        self.rad.set(i, j, d.rad);
    }

    pub fn mid(&self) -> &PMatrix {
        &self.mid
    }

    pub fn rad(&self) -> &RMatrix {
        &self.rad
    }

    pub fn into_parts(self) -> (PMatrix, RMatrix) {
        (self.mid, self.rad)
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<Disk> {
        self.mid
            .data()
            .iter()
            .zip(self.rad.data())
            .map(|(&mid, &rad)| Disk { mid, rad })
            .collect()
    }

    pub fn is_real(&self) -> bool {
        self.mid.is_real()
    }

    pub fn is_point(&self) -> bool {
        self.rad.is_zero()
    }

    /// Entrywise upper bound on the magnitude.
    pub fn mag(&self) -> RMatrix {
        let data = self
            .mid
            .data()
            .iter()
            .zip(self.rad.data())
            .map(|(&m, &r)| add_up(abs_up(m), r))
            .collect();
        RMatrix::from_vec_unchecked(self.rows(), self.cols(), data)
    }

    pub fn transpose(&self) -> Self {
        Self {
            mid: self.mid.transpose(),
            rad: self.rad.transpose(),
        }
    }

    fn check_shape(&self, other: &IMatrix) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }

    fn zip_disks(&self, other: &IMatrix, f: impl Fn(Disk, Disk) -> Result<Disk>) -> Result<IMatrix> {
        self.check_shape(other)?;
        let n = self.rows() * self.cols();
        let mut mid = Vec::with_capacity(n);
        let mut rad = Vec::with_capacity(n);
        for k in 0..n {
            let x = Disk {
                mid: self.mid.data()[k],
                rad: self.rad.data()[k],
            };
            let y = Disk {
                mid: other.mid.data()[k],
                rad: other.rad.data()[k],
            };
            let z = f(x, y)?;
            mid.push(z.mid);
            rad.push(z.rad);
        }
        Ok(Self {
            mid: PMatrix::from_vec_unchecked(self.rows(), self.cols(), mid),
            rad: RMatrix::from_vec_unchecked(self.rows(), self.cols(), rad),
        })
    }

    pub fn add(&self, other: &IMatrix) -> Result<IMatrix> {
        let pol = RoundingPolicy::default();
        self.zip_disks(other, |x, y| pol.add(x, y))
    }

    pub fn sub(&self, other: &IMatrix) -> Result<IMatrix> {
        let pol = RoundingPolicy::default();
        self.zip_disks(other, |x, y| pol.sub(x, y))
    }

    /// Entrywise meet; the result is contained in `other`.
    pub fn meet(&self, other: &IMatrix) -> Result<IMatrix> {
        self.zip_disks(other, iv_meet)
    }

    /// Adds `rad` to every radius, rounding up.
    pub fn widen(&self, rad: &RMatrix) -> Result<IMatrix> {
        Ok(Self {
            mid: self.mid.clone(),
            rad: self.rad.add_up(rad)?,
        })
    }

    /// True only if every entry of `x` certainly lies in the matching disk.
    pub fn contains_point(&self, x: &PMatrix) -> bool {
        x.rows() == self.rows()
            && x.cols() == self.cols()
            && (0..self.rows()).all(|i| (0..self.cols()).all(|j| self.get(i, j).contains(x.get(i, j))))
    }

    /// True only if `self` is certainly contained in `other`.
    pub fn subset_of(&self, other: &IMatrix) -> bool {
        self.check_shape(other).is_ok()
            && (0..self.rows()).all(|i| (0..self.cols()).all(|j| self.get(i, j).subset_of(&other.get(i, j))))
    }

    /// Intersection of every entry with the real axis.
    pub fn real_section(&self) -> Result<IMatrix> {
        let entries: Vec<Disk> = self
            .entries()
            .into_iter()
            .map(|d| d.real_section().ok_or(Error::InconsistentEnclosure))
            .collect::<Result<_>>()?;
        Self::from_disks(self.rows(), self.cols(), &entries)
    }

    /// Upward-rounded sum of all radii.
    pub fn sum_rad(&self) -> f64 {
        self.rad.data().iter().fold(0.0, |acc, &r| add_up(acc, r))
    }

    pub fn max_rad(&self) -> f64 {
        self.rad.max()
    }
}

fn product_error_coefficient(k: usize, real: bool) -> f64 {
    if real {
        gamma(k.max(1))
    } else {
        2.0 * gamma(k + 2)
    }
}

/// Interval matrix product.
///
/// The midpoint is the floating-point product of the midpoints; the radius is
/// `|Xc| Yr + Xr |Yc| + Xr Yr + c_k |Xc| |Yc|`, where the last term bounds the
/// rounding error of the midpoint product.
pub fn im_matmul(x: &IMatrix, y: &IMatrix) -> Result<IMatrix> {
    if x.cols() != y.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let mid = x.mid.matmul(&y.mid)?;
    let ax = x.mid.abs_up();
    let ay = y.mid.abs_up();
    let ck = product_error_coefficient(x.cols(), x.is_real() && y.is_real());
    let mut rad = ax.matmul_up(&ay)?;
    let scaled: Vec<f64> = rad.data().iter().map(|&v| mul_up(ck, v)).collect();
    rad = RMatrix::from_vec_unchecked(rad.rows(), rad.cols(), scaled);
    if !y.rad.is_zero() {
        rad = rad.add_up(&ax.matmul_up(&y.rad)?)?;
    }
    if !x.rad.is_zero() {
        rad = rad.add_up(&x.rad.matmul_up(&ay)?)?;
        if !y.rad.is_zero() {
            rad = rad.add_up(&x.rad.matmul_up(&y.rad)?)?;
        }
    }
    if rad.data().iter().any(|r| !r.is_finite()) || mid.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::IntervalOverflow);
    }
    Ok(IMatrix { mid, rad })
}

/// Entrywise division by an exact point matrix.
pub fn hadamard_div_point(y: &IMatrix, s: &PMatrix) -> Result<IMatrix> {
    if y.rows() != s.rows() || y.cols() != s.cols() {
        return Err(Error::DimensionMismatch("divisor shape differs".into()));
    }
    let smax = s.max_abs();
    if s.data().iter().any(|&z| !(z.norm() >= SINGULAR_THRESHOLD * smax) || z.norm() == 0.0) {
        return Err(Error::SingularPreconditioner);
    }
    let pol = RoundingPolicy::default();
    let mut out = IMatrix::zeros(y.rows(), y.cols());
    for i in 0..y.rows() {
        for j in 0..y.cols() {
            out.set(i, j, pol.div_point(y.get(i, j), s.get(i, j))?);
        }
    }
    Ok(out)
}

/// Entrywise division by the disks `<s_ij, err_ij>`.
pub fn hadamard_div_disk(y: &IMatrix, s: &PMatrix, err: &RMatrix) -> Result<IMatrix> {
    if y.rows() != s.rows() || y.cols() != s.cols() || err.rows() != s.rows() || err.cols() != s.cols() {
        return Err(Error::DimensionMismatch("divisor shape differs".into()));
    }
    let pol = RoundingPolicy::default();
    let mut out = IMatrix::zeros(y.rows(), y.cols());
    for i in 0..y.rows() {
        for j in 0..y.cols() {
            let d = Disk {
                mid: s.get(i, j),
                rad: err.get(i, j),
            };
            let q = pol.div(y.get(i, j), d).map_err(|_| Error::SingularPreconditioner)?;
            out.set(i, j, q);
        }
    }
    Ok(out)
}

/// True only if every disk of `h` lies in the open interior of the matching
/// disk of `x`.
pub fn in_interior(h: &IMatrix, x: &IMatrix) -> bool {
    h.rows() == x.rows()
        && h.cols() == x.cols()
        && (0..h.rows()).all(|i| (0..h.cols()).all(|j| h.get(i, j).interior_of(&x.get(i, j))))
}

/// Inflation radii `0.1 rad(M) + 10 eps`, with `eps = 2^-52`.
pub fn epsilon_radius(m: &IMatrix) -> RMatrix {
    let floor = 10.0 * f64::EPSILON;
    let data = m.rad.data().iter().map(|&r| add_up(mul_up(0.1, r), floor)).collect();
    RMatrix::from_vec_unchecked(m.rows(), m.cols(), data)
}

/// `H + <0, 0.1 rad(M) + 10 eps>`.
pub fn epsilon_inflate(h: &IMatrix, m: &IMatrix) -> Result<IMatrix> {
    h.check_shape(m)?;
    h.widen(&epsilon_radius(m))
}

/// Interval Kronecker product.
pub fn im_kron(a: &IMatrix, b: &IMatrix) -> Result<IMatrix> {
    // shape and size guard shared with the point version
    let mid = crate::dense::kron(a.mid(), b.mid())?;
    let pol = RoundingPolicy::default();
    let (p, q) = (b.rows(), b.cols());
    let mut out = IMatrix::from_point(mid);
    for r in 0..out.rows() {
        for c in 0..out.cols() {
            let z = pol.mul(a.get(r / p, c / q), b.get(r % p, c % q))?;
            out.set(r, c, z);
        }
    }
    Ok(out)
}
