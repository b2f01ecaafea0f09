//! Axis-aligned complex rectangles.
//!
//! Intersection of rectangles is exact in floating point, so repeated meets
//! stay nested bit for bit.

use super::{Disk, IMatrix};
use crate::error::{Error, Result};
use crate::round::{add_up, sub_down, sub_up};

/// `[re_lo, re_hi] x i[im_lo, im_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    /// Bounding rectangle of a disk, rounded outward. Real disks keep a
    /// degenerate imaginary side.
    pub fn from_disk(d: Disk) -> Self {
        let (im_lo, im_hi) = if d.is_real() {
            (0.0, 0.0)
        } else {
            (sub_down(d.mid.im, d.rad), add_up(d.mid.im, d.rad))
        };
        Self {
            re_lo: sub_down(d.mid.re, d.rad),
            re_hi: add_up(d.mid.re, d.rad),
            im_lo,
            im_hi,
        }
    }

    /// Smallest disk found containing the rectangle.
    pub fn to_disk(&self) -> Disk {
        Disk::rect_hull(self.re_lo, self.re_hi, self.im_lo, self.im_hi)
    }

    /// Exact intersection, or `None` when empty.
    pub fn meet(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            re_lo: self.re_lo.max(other.re_lo),
            re_hi: self.re_hi.min(other.re_hi),
            im_lo: self.im_lo.max(other.im_lo),
            im_hi: self.im_hi.min(other.im_hi),
        };
        (r.re_lo <= r.re_hi && r.im_lo <= r.im_hi).then_some(r)
    }

    pub fn subset_of(&self, other: &Rect) -> bool {
        self.re_lo >= other.re_lo && self.re_hi <= other.re_hi && self.im_lo >= other.im_lo && self.im_hi <= other.im_hi
    }

    /// Hausdorff distance in the max norm, rounded up.
    pub fn distance(&self, other: &Rect) -> f64 {
        let d = |a: f64, b: f64| if a >= b { sub_up(a, b) } else { sub_up(b, a) };
        d(self.re_lo, other.re_lo)
            .max(d(self.re_hi, other.re_hi))
            .max(d(self.im_lo, other.im_lo))
            .max(d(self.im_hi, other.im_hi))
    }

    /// Half of the longer side.
    pub fn rad(&self) -> f64 {
        0.5 * sub_up(self.re_hi, self.re_lo).max(sub_up(self.im_hi, self.im_lo))
    }

    /// Largest modulus over the rectangle, rounded up.
    pub fn mag(&self) -> f64 {
        let re = self.re_lo.abs().max(self.re_hi.abs());
        let im = self.im_lo.abs().max(self.im_hi.abs());
        crate::round::up(re.hypot(im))
    }
}

/// Row-major matrix of rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rect>,
}

impl RectMatrix {
    pub fn from_imatrix(x: &IMatrix) -> Self {
        Self {
            rows: x.rows(),
            cols: x.cols(),
            data: x.entries().into_iter().map(Rect::from_disk).collect(),
        }
    }

    pub fn to_imatrix(&self) -> Result<IMatrix> {
        let disks: Vec<Disk> = self.data.iter().map(Rect::to_disk).collect();
        IMatrix::from_disks(self.rows, self.cols, &disks)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Rect {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[Rect] {
        &self.data
    }

    fn check_shape(&self, other: &RectMatrix) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Entrywise exact intersection; any empty entry is an inconsistency.
    pub fn meet(&self, other: &RectMatrix) -> Result<RectMatrix> {
        self.check_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.meet(b).ok_or(Error::InconsistentEnclosure))
            .collect::<Result<_>>()?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn subset_of(&self, other: &RectMatrix) -> bool {
        self.check_shape(other).is_ok() && self.data.iter().zip(&other.data).all(|(a, b)| a.subset_of(b))
    }

    /// Largest entrywise Hausdorff distance.
    pub fn distance(&self, other: &RectMatrix) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.distance(b)).fold(0.0, f64::max))
    }

    /// Upward-rounded sum of [`Rect::rad`] over all entries.
    pub fn sum_rad(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, r| add_up(acc, r.rad()))
    }

    pub fn max_mag(&self) -> f64 {
        self.data.iter().map(Rect::mag).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn disk_round_trip_contains_original() {
        let d = Disk {
            mid: Complex64::new(1.0, -2.0),
            rad: 0.5,
        };
        let r = Rect::from_disk(d);
        assert_eq!((r.re_lo, r.re_hi, r.im_lo, r.im_hi), (0.5, 1.5, -2.5, -1.5));
        assert!(d.subset_of(&r.to_disk()));
    }

    #[test]
    fn real_disk_gives_flat_rectangle() {
        let r = Rect::from_disk(Disk::real(2.0, 0.1));
        assert_eq!((r.im_lo, r.im_hi), (0.0, 0.0));
        let back = r.to_disk();
        assert!(back.is_real());
        assert!(back.inf() <= 1.9 && back.sup() >= 2.1);
    }

    #[test]
    fn meet_is_exact_and_nested() {
        let a = Rect::from_disk(Disk::real(2.0, 0.5));
        let b = Rect::from_disk(Disk::real(1.0, 1.0));
        let c = a.meet(&b).unwrap();
        assert_eq!((c.re_lo, c.re_hi), (1.5, 2.0));
        assert!(c.subset_of(&a) && c.subset_of(&b));
        assert!(a.meet(&Rect::from_disk(Disk::real(10.0, 1.0))).is_none());
    }

    #[test]
    fn distance_and_radius() {
        let a = Rect::from_disk(Disk::real(0.0, 1.0));
        let b = Rect::from_disk(Disk::real(0.25, 0.5));
        assert_eq!(a.distance(&b), 0.75);
        assert_eq!(a.rad(), 1.0);
    }
}
