//! Directed-rounding helpers built on round-to-nearest arithmetic.
//!
//! Every nearest-rounded result is within half an ulp of the exact value, so
//! stepping one ulp outward yields a valid bound without touching the FPU
//! rounding mode.

use num_complex::Complex64;

/// Unit roundoff of binary64.
pub const UNIT: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

/// Bound on the absolute error of a single underflowing product.
pub const TINY: f64 = f64::MIN_POSITIVE;

#[inline]
pub fn up(x: f64) -> f64 {
    x.next_up()
}

#[inline]
pub fn down(x: f64) -> f64 {
    x.next_down()
}

/// Below this magnitude a product or quotient may have lost bits to underflow.
const UNDERFLOW_GUARD: f64 = f64::MIN_POSITIVE * 9_007_199_254_740_992.0;

/// Exact rounding error of `a + b` (TwoSum).
#[inline]
fn sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a == 0.0 || b == 0.0 || !p.is_finite() {
        return p;
    }
    if p.abs() < UNDERFLOW_GUARD {
        return p.next_up();
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a == 0.0 || b == 0.0 || !p.is_finite() {
        return p;
    }
    if p.abs() < UNDERFLOW_GUARD {
        return p.next_down();
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

/// `a / b` rounded up, for `b > 0`.
#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    debug_assert!(b > 0.0);
    let q = a / b;
    if a == 0.0 || !q.is_finite() {
        return q;
    }
    if q.abs() < UNDERFLOW_GUARD || a.abs() < UNDERFLOW_GUARD {
        return q.next_up();
    }
    // a - q b is exact here
    if -q.mul_add(b, -a) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

/// Upper bound on `|z|`.
#[inline]
pub fn abs_up(z: Complex64) -> f64 {
    if z.im == 0.0 {
        z.re.abs()
    } else if z.re == 0.0 {
        z.im.abs()
    } else {
        // hypot is accurate to within one ulp
        z.re.hypot(z.im).next_up().next_up()
    }
}

/// Lower bound on `|z|`.
#[inline]
pub fn abs_down(z: Complex64) -> f64 {
    if z.im == 0.0 {
        z.re.abs()
    } else if z.re == 0.0 {
        z.im.abs()
    } else {
        z.re.hypot(z.im).next_down().next_down().max(0.0)
    }
}

/// `gamma_k = k u / (1 - k u)`, rounded up.
pub fn gamma(k: usize) -> f64 {
    let ku = (k as f64) * UNIT;
    assert!(ku < 0.5, "gamma({k}) out of range");
    div_up(ku.next_up(), (1.0 - ku).next_down())
}

/// Upper bound on an exact sum of `k` nonnegative products given its
/// nearest-rounded evaluation `s`.
#[inline]
pub fn nonneg_sum_bound(s: f64, k: usize, g: f64) -> f64 {
    add_up(mul_up(s, 1.0 + 2.0 * g), (k as f64) * TINY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_results_are_not_bumped() {
        assert_eq!(add_up(3.0, 1.0), 4.0);
        assert_eq!(mul_up(0.5, 6.0), 3.0);
        assert_eq!(div_up(1.0, 4.0), 0.25);
        assert_eq!(sub_up(1.0, 1.0), 0.0);
        assert!(div_up(1.0, 3.0) > 1.0 / 3.0);
        assert!(mul_up(0.1, 0.1) >= 0.1 * 0.1);
        assert!(mul_down(0.1, 0.1) < mul_up(0.1, 0.1));
    }

    #[test]
    fn directed_steps_bracket() {
        let x = 0.1_f64 + 0.2;
        assert!(down(x) < x && x < up(x));
        assert!(add_up(0.1, 0.2) > 0.3);
        assert!(add_down(0.1, 0.2) < 0.30000000000000005);
    }

    #[test]
    fn abs_bounds_bracket_hypot() {
        let z = Complex64::new(3.0, 4.0);
        assert!(abs_down(z) <= 5.0 && abs_up(z) >= 5.0);
        assert_eq!(abs_up(Complex64::new(-2.5, 0.0)), 2.5);
    }

    #[test]
    fn gamma_grows_linearly() {
        let g1 = gamma(1);
        let g100 = gamma(100);
        assert!(g1 >= UNIT);
        assert!(g100 >= 100.0 * UNIT && g100 < 101.0 * UNIT);
    }
}
