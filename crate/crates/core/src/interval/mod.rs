//! Midpoint-radius (disk) interval arithmetic.
//!
//! A [`Disk`] `<c, r>` stands for `{x in C : |x - c| <= r}`. A real interval is
//! a disk whose midpoint has zero imaginary part. Every operation returns a
//! disk containing the exact image of its operands: the midpoint is computed
//! in round-to-nearest and the radius is inflated by an a-priori bound on the
//! midpoint error, as configured by a [`RoundingPolicy`].

mod json;
mod matrix;
mod rect;

pub use json::IMatrixJson;
pub use rect::{Rect, RectMatrix};
pub use matrix::{
    epsilon_inflate, epsilon_radius, hadamard_div_disk, hadamard_div_point, im_kron, im_matmul, in_interior,
    IMatrix, SINGULAR_THRESHOLD,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::round::{abs_down, abs_up, add_up, down, mul_up, sub_up, up, UNIT};

/// Relative error bound of a nearest-rounded complex product.
const COMPLEX_MUL_REL: f64 = 4.0 * UNIT;

/// Outward-rounding configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingPolicy {
    eta: f64,
}

impl Default for RoundingPolicy {
    fn default() -> Self {
        Self { eta: 1.0 / (1u64 << 50) as f64 }
    }
}

impl RoundingPolicy {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta >= UNIT) || !eta.is_finite() {
            return Err(Error::InvalidInput(format!("rounding constant {eta} below 2^-53")));
        }
        Ok(Self { eta })
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `rad + eta (|mid| + rad)`, rounded up, with the midpoint coefficient at
    /// least `floor`.
    #[inline]
    fn inflate(&self, mid: Complex64, rad: f64, floor: f64) -> f64 {
        let m = abs_up(mid);
        let slack = add_up(mul_up(self.eta.max(floor), m), mul_up(self.eta, rad));
        add_up(rad, slack)
    }

    fn finish(&self, mid: Complex64, rad: f64, floor: f64) -> Result<Disk> {
        let rad = self.inflate(mid, rad, floor);
        if !mid.re.is_finite() || !mid.im.is_finite() || !rad.is_finite() {
            return Err(Error::IntervalOverflow);
        }
        Ok(Disk { mid, rad })
    }

    pub fn add(&self, x: Disk, y: Disk) -> Result<Disk> {
        self.finish(x.mid + y.mid, add_up(x.rad, y.rad), UNIT)
    }

    pub fn sub(&self, x: Disk, y: Disk) -> Result<Disk> {
        self.finish(x.mid - y.mid, add_up(x.rad, y.rad), UNIT)
    }

    pub fn mul(&self, x: Disk, y: Disk) -> Result<Disk> {
        let mx = abs_up(x.mid);
        let my = abs_up(y.mid);
        let rad = add_up(add_up(mul_up(mx, y.rad), mul_up(x.rad, my)), mul_up(x.rad, y.rad));
        let floor = if x.is_real() && y.is_real() { UNIT } else { COMPLEX_MUL_REL };
        self.finish(x.mid * y.mid, rad, floor)
    }

    /// Product with an exact point.
    pub fn mul_point(&self, x: Disk, p: Complex64) -> Result<Disk> {
        self.mul(x, Disk::point(p))
    }

    /// Division by an exact nonzero point.
    pub fn div_point(&self, x: Disk, p: Complex64) -> Result<Disk> {
        if p == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero);
        }
        if p.im == 0.0 {
            let mid = Complex64::new(x.mid.re / p.re, x.mid.im / p.re);
            return self.finish(mid, crate::round::div_up(x.rad, p.re.abs()), UNIT);
        }
        let mid = x.mid / p;
        let q = crate::round::div_up(abs_up(x.mid), abs_down(p));
        // the textbook complex quotient is accurate to a few units in the last place
        let rad = add_up(crate::round::div_up(x.rad, abs_down(p)), mul_up(8.0 * UNIT, q));
        self.finish(mid, rad, UNIT)
    }

    /// Division by a disk that excludes zero.
    pub fn div(&self, x: Disk, y: Disk) -> Result<Disk> {
        let ym = abs_down(y.mid);
        let gap = crate::round::sub_down(ym, y.rad);
        if !(gap > 0.0) {
            return Err(Error::DivisionByZero);
        }
        let base = self.div_point(Disk::point(x.mid), y.mid)?;
        // |x/y - xm/ym| <= (xr + |xm| yr / |ym|) / (|ym| - yr)
        let spread = crate::round::div_up(
            add_up(x.rad, crate::round::div_up(mul_up(abs_up(x.mid), y.rad), ym)),
            gap,
        );
        self.finish(base.mid, add_up(base.rad, spread), UNIT)
    }
}

/// Closed complex disk `<mid, rad>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub mid: Complex64,
    pub rad: f64,
}

impl Disk {
    pub fn new(mid: Complex64, rad: f64) -> Result<Self> {
        if !mid.re.is_finite() || !mid.im.is_finite() || !rad.is_finite() || !(rad >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid disk <{mid}, {rad}>")));
        }
        Ok(Self { mid, rad })
    }

    #[inline]
    pub fn point(mid: Complex64) -> Self {
        Self { mid, rad: 0.0 }
    }

    #[inline]
    pub fn real(mid: f64, rad: f64) -> Self {
        Self {
            mid: Complex64::new(mid, 0.0),
            rad,
        }
    }

    /// Smallest representable disk containing the real interval `[lo, hi]`.
    pub fn from_inf_sup(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInput(format!("invalid interval [{lo}, {hi}]")));
        }
        let mid = lo + 0.5 * (hi - lo);
        let mid = if mid.is_finite() { mid } else { 0.5 * lo + 0.5 * hi };
        let rad = sub_up(mid, lo).max(sub_up(hi, mid)).max(0.0);
        Ok(Self::real(mid, rad))
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.mid.im == 0.0
    }

    /// Lower endpoint of the real part, rounded down.
    pub fn inf(&self) -> f64 {
        crate::round::sub_down(self.mid.re, self.rad)
    }

    /// Upper endpoint of the real part, rounded up.
    pub fn sup(&self) -> f64 {
        add_up(self.mid.re, self.rad)
    }

    /// Upper bound on `max |x|` over the disk.
    #[inline]
    pub fn mag(&self) -> f64 {
        add_up(abs_up(self.mid), self.rad)
    }

    /// Upper bound on `|self.mid - z|`.
    fn dist_up(&self, z: Complex64) -> f64 {
        if self.mid == z {
            return 0.0;
        }
        let d = self.mid - z;
        if d.im == 0.0 && self.mid.im == 0.0 && z.im == 0.0 {
            let (a, b) = (self.mid.re, z.re);
            return if a >= b { sub_up(a, b) } else { sub_up(b, a) };
        }
        mul_up(abs_up(d), 1.0 + 2.0 * UNIT)
    }

    /// Lower bound on `|self.mid - z|`.
    fn dist_down(&self, z: Complex64) -> f64 {
        let d = self.mid - z;
        (abs_down(d) * (1.0 - 4.0 * UNIT)).next_down().max(0.0)
    }

    /// True only if `z` certainly lies in the disk.
    pub fn contains(&self, z: Complex64) -> bool {
        self.dist_up(z) <= self.rad
    }

    /// True only if `self` is certainly a subset of `other`.
    pub fn subset_of(&self, other: &Disk) -> bool {
        add_up(other.dist_up(self.mid), self.rad) <= other.rad
    }

    /// True only if `self` certainly lies in the open interior of `other`.
    pub fn interior_of(&self, other: &Disk) -> bool {
        add_up(other.dist_up(self.mid), self.rad) < other.rad
    }

    /// True only if the two disks certainly do not meet.
    pub fn disjoint(&self, other: &Disk) -> bool {
        self.dist_down(other.mid) > add_up(self.rad, other.rad)
    }

    /// Intersection with the real axis, or `None` if it is certainly empty.
    pub fn real_section(&self) -> Option<Disk> {
        if self.is_real() {
            return Some(*self);
        }
        let b = self.mid.im.abs();
        if b > self.rad {
            return None;
        }
        let h = sub_up(mul_up(self.rad, self.rad), crate::round::mul_down(b, b)).max(0.0);
        Some(Disk::real(self.mid.re, up(h.sqrt())))
    }

    /// Disk hull of the rectangle `[re_lo, re_hi] x [im_lo, im_hi]`.
    pub(crate) fn rect_hull(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Disk {
        let (re, re_r) = half_span(re_lo, re_hi);
        let (im, im_r) = half_span(im_lo, im_hi);
        let rad = if im_r == 0.0 && im == 0.0 {
            re_r
        } else {
            up(up(re_r.hypot(im_r)))
        };
        Disk {
            mid: Complex64::new(re, im),
            rad,
        }
    }
}

/// Midpoint and an upward-rounded half-width covering `[lo, hi]`.
fn half_span(lo: f64, hi: f64) -> (f64, f64) {
    let m = lo + 0.5 * (hi - lo);
    (m, sub_up(m, lo).max(sub_up(hi, m)).max(0.0))
}

/// Scalar product under the default policy.
pub fn iv_mul(x: Disk, y: Disk) -> Result<Disk> {
    RoundingPolicy::default().mul(x, y)
}

pub fn iv_add(x: Disk, y: Disk) -> Result<Disk> {
    RoundingPolicy::default().add(x, y)
}

pub fn iv_sub(x: Disk, y: Disk) -> Result<Disk> {
    RoundingPolicy::default().sub(x, y)
}

/// `|mid| + rad`, rounded up.
pub fn iv_mag(x: Disk) -> f64 {
    x.mag()
}

/// A disk containing `x ∩ y` and contained in `y`.
///
/// Real disks intersect exactly as inf-sup intervals. Complex disks are
/// intersected through their bounding rectangles, falling back to `y`
/// whenever the hull of the rectangle overlap is not inside `y`.
pub fn iv_meet(x: Disk, y: Disk) -> Result<Disk> {
    if x.subset_of(&y) {
        return Ok(x);
    }
    if x.disjoint(&y) {
        return Err(Error::InconsistentEnclosure);
    }
    if x.is_real() && y.is_real() {
        let lo = x.inf().max(y.inf());
        let hi = x.sup().min(y.sup());
        if lo > hi {
            return Err(Error::InconsistentEnclosure);
        }
        let (mut m, _) = half_span(lo, hi);
        for _ in 0..4 {
            let r = sub_up(m, lo).max(sub_up(hi, m)).max(0.0);
            let cand = Disk::real(m, r);
            if cand.subset_of(&y) {
                return Ok(if cand.rad < y.rad { cand } else { y });
            }
            m = if m < y.mid.re { up(m) } else { down(m) };
        }
        return Ok(y);
    }
    let re_lo = (x.mid.re - x.rad).max(y.mid.re - y.rad);
    let re_hi = (x.mid.re + x.rad).min(y.mid.re + y.rad);
    let im_lo = (x.mid.im - x.rad).max(y.mid.im - y.rad);
    let im_hi = (x.mid.im + x.rad).min(y.mid.im + y.rad);
    if re_lo > re_hi || im_lo > im_hi {
        return Ok(y);
    }
    let cand = Disk::rect_hull(down(re_lo), up(re_hi), down(im_lo), up(im_hi));
    if cand.rad < y.rad && cand.subset_of(&y) {
        Ok(cand)
    } else {
        Ok(y)
    }
}
