//! Complex Schur form by Householder reduction to Hessenberg form followed by
//! single-shift QR iteration, and eigenvectors read off the triangular factor.

use num_complex::Complex64;

use super::{inverse, PMatrix};
use crate::error::{Error, Result};
use crate::round::UNIT;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// `A = Q T Q^H` with `Q` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: PMatrix,
    pub q: PMatrix,
}

/// Eigendecomposition `A V = V Diag(values)`.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: Vec<Complex64>,
    /// Unit 2-norm eigenvectors stored as columns.
    pub vectors: PMatrix,
    pub inv_vectors: PMatrix,
    /// `max_k || A v_k - lambda_k v_k ||_inf`.
    pub residual: f64,
}

struct Work {
    n: usize,
    h: Vec<Complex64>,
    q: Vec<Complex64>,
}

impl Work {
    #[inline]
    fn h(&self, i: usize, j: usize) -> Complex64 {
        self.h[i * self.n + j]
    }

    /// Left-multiplies rows `k, k+1` (columns `from..`) by `[[c, s], [-conj(s), c]]`.
    fn rotate_rows(&mut self, k: usize, c: f64, s: Complex64, from: usize) {
        let n = self.n;
        for j in from..n {
            let x = self.h[k * n + j];
            let y = self.h[(k + 1) * n + j];
            self.h[k * n + j] = x * c + s * y;
            self.h[(k + 1) * n + j] = -s.conj() * x + y * c;
        }
    }

    /// Right-multiplies columns `k, k+1` (rows `..=to`) of `H` and all of `Q`
    /// by the conjugate transpose of the same rotation.
    fn rotate_cols(&mut self, k: usize, c: f64, s: Complex64, to: usize) {
        let n = self.n;
        for i in 0..=to {
            let x = self.h[i * n + k];
            let y = self.h[i * n + k + 1];
            self.h[i * n + k] = x * c + y * s.conj();
            self.h[i * n + k + 1] = -x * s + y * c;
        }
        for i in 0..n {
            let x = self.q[i * n + k];
            let y = self.q[i * n + k + 1];
            self.q[i * n + k] = x * c + y * s.conj();
            self.q[i * n + k + 1] = -x * s + y * c;
        }
    }
}

/// Rotation `(c, s)` with `c a + s b = r`, `-conj(s) a + c b = 0`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let na = a.norm();
    let nrm = na.hypot(b.norm());
    ((na / nrm), (a / na) * b.conj() / nrm)
}

fn hessenberg(w: &mut Work) {
    let n = w.n;
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let xnorm = (k + 1..n).map(|i| w.h(i, k).norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = w.h(k + 1, k);
        let phase = if x0 == ZERO { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        for (l, i) in (k + 1..n).enumerate() {
            v[l] = w.h(i, k);
        }
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v[..len] {
            *z /= vnorm;
        }
        // H <- P H, P = I - 2 v v^H acting on rows k+1..n
        for j in k..n {
            let mut s = ZERO;
            for l in 0..len {
                s += v[l].conj() * w.h[(k + 1 + l) * n + j];
            }
            s *= 2.0;
            for l in 0..len {
                w.h[(k + 1 + l) * n + j] -= v[l] * s;
            }
        }
        // H <- H P and Q <- Q P on columns k+1..n
        for mat in [&mut w.h, &mut w.q] {
            for i in 0..n {
                let row = &mut mat[i * n + k + 1..i * n + n];
                let mut s = ZERO;
                for l in 0..len {
                    s += row[l] * v[l];
                }
                s *= 2.0;
                for l in 0..len {
                    row[l] -= s * v[l].conj();
                }
            }
        }
        w.h[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            w.h[i * n + k] = ZERO;
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let mu1 = half_tr + disc;
    let mu2 = half_tr - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Complex Schur decomposition.
pub fn schur(a: &PMatrix) -> Result<Schur> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("schur needs a square matrix".into()));
    }
    let n = a.rows();
    let mut w = Work {
        n,
        h: a.data().to_vec(),
        q: PMatrix::identity(n).data().to_vec(),
    };
    hessenberg(&mut w);

    let anorm = a.norm_fro().max(f64::MIN_POSITIVE);
    let mut hi = n.saturating_sub(1);
    let mut iter = 0usize;
    let mut rot = Vec::with_capacity(n);
    while hi > 0 {
        // find the start of the unreduced active block
        let mut l = hi;
        while l > 0 {
            let sub = w.h(l, l - 1).norm();
            let mut scale = w.h(l - 1, l - 1).norm() + w.h(l, l).norm();
            if scale == 0.0 {
                scale = anorm;
            }
            if sub <= UNIT * scale {
                w.h[l * n + l - 1] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::EigenFailed);
        }
        let shift = if iter % 11 == 0 {
            // exceptional shift to break cycles
            w.h(hi, hi) + Complex64::new(0.75 * w.h(hi, hi - 1).norm(), 0.3 * w.h(hi, hi - 1).norm())
        } else {
            wilkinson_shift(w.h(hi - 1, hi - 1), w.h(hi - 1, hi), w.h(hi, hi - 1), w.h(hi, hi))
        };

        for i in l..=hi {
            w.h[i * n + i] -= shift;
        }
        rot.clear();
        for k in l..hi {
            let (c, s) = givens(w.h(k, k), w.h(k + 1, k));
            w.rotate_rows(k, c, s, k);
            w.h[(k + 1) * n + k] = ZERO;
            rot.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rot[idx];
            w.rotate_cols(k, c, s, k + 1);
        }
        for i in l..=hi {
            w.h[i * n + i] += shift;
        }
    }
    for i in 1..n {
        for j in 0..i {
            w.h[i * n + j] = ZERO;
        }
    }
    if w.h.iter().chain(&w.q).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailed);
    }
    Ok(Schur {
        t: PMatrix::from_vec_unchecked(n, n, w.h),
        q: PMatrix::from_vec_unchecked(n, n, w.q),
    })
}

/// Swaps the adjacent diagonal entries `k` and `k+1` of an upper triangular
/// Schur factor, updating `q` so that `Q T Q^H` is unchanged.
pub fn swap_adjacent(t: &mut PMatrix, q: &mut PMatrix, k: usize) {
    let n = t.rows();
    let a = t.get(k, k);
    let b = t.get(k + 1, k + 1);
    let c = t.get(k, k + 1);
    if a == b {
        return;
    }
    // eigenvector of [[a, c], [0, b]] for eigenvalue b
    let v1 = c;
    let v2 = b - a;
    let nv = v1.norm().hypot(v2.norm());
    let (z11, z21) = (v1 / nv, v2 / nv);
    let (z12, z22) = (-z21.conj(), z11.conj());
    let tdata = t.data_mut();
    // T <- Z^H T on rows k, k+1
    for j in k..n {
        let x = tdata[k * n + j];
        let y = tdata[(k + 1) * n + j];
        tdata[k * n + j] = z11.conj() * x + z21.conj() * y;
        tdata[(k + 1) * n + j] = z12.conj() * x + z22.conj() * y;
    }
    // T <- T Z on columns k, k+1
    for i in 0..=k + 1 {
        let x = tdata[i * n + k];
        let y = tdata[i * n + k + 1];
        tdata[i * n + k] = x * z11 + y * z21;
        tdata[i * n + k + 1] = x * z12 + y * z22;
    }
    tdata[(k + 1) * n + k] = ZERO;
    tdata[k * n + k] = b;
    tdata[(k + 1) * n + k + 1] = a;
    let qdata = q.data_mut();
    for i in 0..n {
        let x = qdata[i * n + k];
        let y = qdata[i * n + k + 1];
        qdata[i * n + k] = x * z11 + y * z21;
        qdata[i * n + k + 1] = x * z12 + y * z22;
    }
}

/// Eigenvalues and unit-norm eigenvectors of a general square matrix.
pub fn eig_decompose(a: &PMatrix) -> Result<EigResult> {
    let Schur { t, q } = schur(a)?;
    let n = a.rows();
    let values = t.diag();
    let tnorm = t.norm_fro().max(f64::MIN_POSITIVE);
    let smin = (2.0 * UNIT * tnorm).max(f64::MIN_POSITIVE);

    // columns of Y: eigenvectors of T, upper triangular
    let mut y = PMatrix::zeros(n, n);
    let mut col = vec![ZERO; n];
    for k in 0..n {
        let lambda = values[k];
        col.iter_mut().for_each(|z| *z = ZERO);
        col[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t.get(i, j) * col[j];
            }
            let mut d = t.get(i, i) - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            col[i] = -s / d;
            let big = col[i].norm();
            if big > 1e100 {
                for z in &mut col[..=k] {
                    *z /= big;
                }
            }
        }
        for i in 0..=k {
            y.set(i, k, col[i]);
        }
    }
    let mut vectors = q.matmul(&y)?;
    for k in 0..n {
        let nrm = (0..n).map(|i| vectors.get(i, k).norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::EigenFailed);
        }
        for i in 0..n {
            let v = vectors.get(i, k) / nrm;
            vectors.set(i, k, v);
        }
    }
    let av = a.matmul(&vectors)?;
    let mut residual: f64 = 0.0;
    for k in 0..n {
        let r = (0..n)
            .map(|i| (av.get(i, k) - vectors.get(i, k) * values[k]).norm())
            .fold(0.0, f64::max);
        residual = residual.max(r);
    }
    let inv_vectors = inverse(&vectors)?;
    if !residual.is_finite() {
        return Err(Error::EigenFailed);
    }
    Ok(EigResult {
        values,
        vectors,
        inv_vectors,
        residual,
    })
}
