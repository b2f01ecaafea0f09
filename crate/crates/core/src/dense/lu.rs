use num_complex::Complex64;

use super::{PMatrix, Scalar};
use crate::error::{Error, Result};

/// In-place LU factorization with partial pivoting, row-major.
struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    fn factor(mut a: Vec<T>, n: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].modulus()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                if l == T::zero() {
                    continue;
                }
                let (upper, lower) = a.split_at_mut(i * n);
                let krow = &upper[k * n + k + 1..k * n + n];
                for (x, &u) in lower[k + 1..n].iter_mut().zip(krow) {
                    *x = *x - l * u;
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    /// Solves `A X = B` for row-major `B` with `ncols` columns.
    fn solve(&self, b: &[T], ncols: usize) -> Vec<T> {
        let n = self.n;
        let mut x = Vec::with_capacity(n * ncols);
        for &p in &self.perm {
            x.extend_from_slice(&b[p * ncols..(p + 1) * ncols]);
        }
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i * ncols);
            let row = &mut rest[..ncols];
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l == T::zero() {
                    continue;
                }
                for (xi, &xk) in row.iter_mut().zip(&done[k * ncols..(k + 1) * ncols]) {
                    *xi = *xi - l * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * ncols);
            let row = &mut head[i * ncols..];
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                if u == T::zero() {
                    continue;
                }
                let xk = &tail[(k - i - 1) * ncols..(k - i) * ncols];
                for (xi, &v) in row.iter_mut().zip(xk) {
                    *xi = *xi - u * v;
                }
            }
            let d = self.lu[i * n + i];
            for xi in row.iter_mut() {
                *xi = *xi / d;
            }
        }
        x
    }
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn lu_solve(a: &PMatrix, b: &PMatrix) -> Result<PMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("lu_solve needs a square matrix".into()));
    }
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, expected {}",
            b.rows(),
            a.rows()
        )));
    }
    let n = a.rows();
    let ncols = b.cols();
    let data = if a.is_real() && b.is_real() {
        let lu = Lu::factor(a.re_vec(), n)?;
        lu.solve(&b.re_vec(), ncols)
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect()
    } else {
        let lu = Lu::factor(a.data().to_vec(), n)?;
        lu.solve(b.data(), ncols)
    };
    if data.iter().any(|z: &Complex64| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(PMatrix::from_vec_unchecked(n, ncols, data))
}

/// Approximate inverse via LU solve against the identity.
pub fn inverse(a: &PMatrix) -> Result<PMatrix> {
    lu_solve(a, &PMatrix::identity(a.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_solve_returns_rhs() {
        let b = PMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let x = lu_solve(&PMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_solve() {
        let a = PMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let b = PMatrix::from_rows(&[vec![2.0], vec![8.0]]).unwrap();
        let x = lu_solve(&a, &b).unwrap();
        assert_eq!(x, PMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap());
    }

    #[test]
    fn singular_pivot_is_reported() {
        let a = PMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(lu_solve(&a, &PMatrix::identity(2)), Err(Error::SingularMatrix));
    }

    #[test]
    fn recovers_planted_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for complex in [false, true] {
            let a = PMatrix::from_fn(5, 5, |i, j| {
                let d = if i == j { 5.0 } else { 0.0 };
                Complex64::new(rng.gen::<f64>() - 0.5 + d, if complex { rng.gen::<f64>() } else { 0.0 })
            });
            let x0 = PMatrix::from_fn(5, 2, |_, _| Complex64::new(rng.gen(), 0.0));
            let b = a.matmul(&x0).unwrap();
            let x = lu_solve(&a, &b).unwrap();
            let err = x.sub(&x0).unwrap().max_abs() / x0.max_abs();
            assert!(err <= 1e-10, "relative error {err}");
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = PMatrix::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        let ai = inverse(&a).unwrap();
        let r = a.matmul(&ai).unwrap().sub(&PMatrix::identity(3)).unwrap();
        assert!(r.max_abs() < 1e-14);
    }
}
