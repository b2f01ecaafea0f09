//! Spectral preconditioning of the interval equation.
//!
//! With `U`, `V` the eigenvector matrices of `mid(A)` and `mid(B)`, the unknown
//! is written `X = U Y V^-1` and the transformed equation
//! `Ap Y Bp + Cp Y Dp = Fp` has (nearly) diagonal midpoint coefficients.
//! Every transformed coefficient is an enclosure: the inverses of `U` and `V`
//! are verified enclosures, not floating-point approximations.

use num_complex::Complex64;

use crate::dense::{eig_decompose, PMatrix, RMatrix};
use crate::error::{Error, Result};
use crate::interval::{im_matmul, IMatrix};
use crate::round::{abs_up, add_up, mul_up, UNIT};
use crate::system::System;

use crate::interval::SINGULAR_THRESHOLD;

/// Relative off-diagonal mass above which a warning is recorded.
pub const OFFDIAG_WARNING: f64 = 1e-2;

/// Point-level result of conjugating a pair by the eigenvectors of the first.
#[derive(Debug, Clone)]
pub struct SimDiag {
    pub u: PMatrix,
    pub uinv: PMatrix,
    pub d_first: Vec<Complex64>,
    pub d_second: Vec<Complex64>,
    /// `||Off(Uinv Cc U)||_inf / ||Cc||_inf`.
    pub offdiag_mass: f64,
    /// `||Ac Cc - Cc Ac||_F`.
    pub commutator: f64,
}

/// Diagnostics of the four transformed coefficients.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OffdiagMass {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Preconditioned system.
#[derive(Debug, Clone)]
pub struct PrecondSystem {
    pub ap: IMatrix,
    pub bp: IMatrix,
    pub cp: IMatrix,
    pub dp: IMatrix,
    pub fp: IMatrix,
    pub u: PMatrix,
    pub uinv: PMatrix,
    pub v: PMatrix,
    pub vinv: PMatrix,
    /// Verified enclosure of `U^-1`.
    pub uinv_enc: IMatrix,
    /// Verified enclosure of `V^-1`.
    pub vinv_enc: IMatrix,
    pub da: Vec<Complex64>,
    pub db: Vec<Complex64>,
    pub dc: Vec<Complex64>,
    pub dd: Vec<Complex64>,
    /// `S_ij = dB_j dA_i + dD_j dC_i`, rounded to nearest.
    pub s: PMatrix,
    /// Bound on `|S_ij - fl(S_ij)|`.
    pub s_err: RMatrix,
    pub offdiag_mass: OffdiagMass,
    pub commutator_ac: f64,
    pub commutator_bd: f64,
    pub warnings: Vec<String>,
    /// The input system is real.
    pub real: bool,
}

impl PrecondSystem {
    pub fn m(&self) -> usize {
        self.ap.rows()
    }

    pub fn n(&self) -> usize {
        self.bp.rows()
    }
}

fn offdiag_inf_norm(x: &PMatrix) -> f64 {
    (0..x.rows())
        .map(|i| (0..x.cols()).filter(|&j| j != i).map(|j| x.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Relative commutator below which a pair is treated as commuting.
const COMMUTE_TOL: f64 = 1e-12;

/// Matrix whose eigenvectors are used for the pair `(ac, cc)`: a generic
/// combination `ac + t cc` when the two commute, `ac` otherwise. The
/// combination separates eigenvalues that are repeated in one of them.
pub(crate) fn pencil_basis(ac: &PMatrix, cc: &PMatrix) -> Result<PMatrix> {
    let (na, nc) = (ac.norm_fro(), cc.norm_fro());
    if nc == 0.0 {
        return Ok(ac.clone());
    }
    let commutator = ac.matmul(cc)?.sub(&cc.matmul(ac)?)?.norm_fro();
    if commutator > COMMUTE_TOL * na * nc {
        return Ok(ac.clone());
    }
    let t = if na == 0.0 { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 * na / nc };
    ac.add(&cc.scale(Complex64::new(t, 0.0)))
}

/// Eigenvectors of [`pencil_basis`] used to conjugate both `ac` and `cc`.
pub fn simultaneous_diag(ac: &PMatrix, cc: &PMatrix) -> Result<SimDiag> {
    if !ac.is_square() || !cc.is_square() || ac.rows() != cc.rows() {
        return Err(Error::DimensionMismatch("pair must be square and of equal size".into()));
    }
    let eig = eig_decompose(&pencil_basis(ac, cc)?)?;
    let conj_a = eig.inv_vectors.matmul(ac)?.matmul(&eig.vectors)?;
    let conj = eig.inv_vectors.matmul(cc)?.matmul(&eig.vectors)?;
    let scale = cc.norm_inf();
    let offdiag_mass = if scale == 0.0 { 0.0 } else { offdiag_inf_norm(&conj) / scale };
    let commutator = ac.matmul(cc)?.sub(&cc.matmul(ac)?)?.norm_fro();
    Ok(SimDiag {
        d_second: conj.diag(),
        d_first: conj_a.diag(),
        u: eig.vectors,
        uinv: eig.inv_vectors,
        offdiag_mass,
        commutator,
    })
}

/// Verified enclosure of `U^-1` around an approximate inverse `R`.
///
/// With `E = I - R U` and `delta = ||E||_inf < 1`,
/// `|U^-1 - R| <= |E||R| + delta / (1 - delta) * colmax(|E||R|)`.
/// Returns `None` when `delta >= 1`.
pub fn verified_inverse(u: &PMatrix, r: &PMatrix) -> Result<Option<IMatrix>> {
    let n = u.rows();
    let ru = im_matmul(&IMatrix::from_point(r.clone()), &IMatrix::from_point(u.clone()))?;
    let e = IMatrix::identity(n).sub(&ru)?;
    let abs_e = e.mag();
    let delta = abs_e.norm_inf_up();
    if !(delta < 1.0) {
        return Ok(None);
    }
    let w = abs_e.matmul_up(&r.abs_up())?;
    let factor = crate::round::div_up(delta, (1.0 - delta).next_down());
    let mut rad = RMatrix::zeros(n, n);
    for j in 0..n {
        let colmax = (0..n).map(|i| w.get(i, j)).fold(0.0, f64::max);
        let tail = mul_up(factor, colmax);
        for i in 0..n {
            rad.set(i, j, add_up(w.get(i, j), tail));
        }
    }
    Ok(Some(IMatrix::new(r.clone(), rad)?))
}

/// `S` together with a bound on its rounding error.
pub fn build_s_with_error(
    da: &[Complex64],
    db: &[Complex64],
    dc: &[Complex64],
    dd: &[Complex64],
) -> Result<(PMatrix, RMatrix)> {
    let (m, n) = (da.len(), db.len());
    if dc.len() != m || dd.len() != n {
        return Err(Error::DimensionMismatch("diagonal lengths differ".into()));
    }
    let mut s = PMatrix::zeros(m, n);
    let mut err = RMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let v = db[j] * da[i] + dd[j] * dc[i];
            let terms = add_up(mul_up(abs_up(db[j]), abs_up(da[i])), mul_up(abs_up(dd[j]), abs_up(dc[i])));
            // two complex products and one addition
            let e = add_up(mul_up(4.0 * UNIT, terms), mul_up(UNIT, abs_up(v)));
            s.set(i, j, v);
            err.set(i, j, e);
        }
    }
    let smax = s.max_abs();
    if s.data().iter().any(|z| !(z.norm() >= SINGULAR_THRESHOLD * smax) || z.norm() == 0.0) {
        return Err(Error::SingularPreconditioner);
    }
    Ok((s, err))
}

/// `S_ij = dB_j dA_i + dD_j dC_i`.
pub fn build_s(da: &[Complex64], db: &[Complex64], dc: &[Complex64], dd: &[Complex64]) -> Result<PMatrix> {
    build_s_with_error(da, db, dc, dd).map(|(s, _)| s)
}

/// Moves every midpoint entry outside `keep` into the radius, and recentres
/// kept diagonal entries on `diag` when given.
pub(crate) fn absorb_pattern(
    x: &IMatrix,
    keep: impl Fn(usize, usize) -> bool,
    diag: Option<&[Complex64]>,
) -> IMatrix {
    let mut out = x.clone();
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            let mut d = x.get(i, j);
            if i == j {
                if let Some(target) = diag {
                    let shift = d.mid - target[i];
                    d.rad = add_up(d.rad, abs_up(shift));
                    d.mid = target[i];
                }
            } else if !keep(i, j) && d.mid != zero {
                d.rad = add_up(d.rad, abs_up(d.mid));
                d.mid = zero;
            }
            out.set(i, j, d);
        }
    }
    out
}

/// `left * x * right` in interval arithmetic.
pub(crate) fn conjugate(left: &IMatrix, x: &IMatrix, right: &PMatrix) -> Result<IMatrix> {
    im_matmul(&im_matmul(left, x)?, &IMatrix::from_point(right.clone()))
}

/// Builds the preconditioned system from the midpoint spectral decompositions.
///
/// Returns [`Error::SingularMatrix`] when the eigenvector matrix of `mid(A)` or
/// `mid(B)` cannot be verified to be invertible.
pub fn transform_enclose(sys: &System) -> Result<PrecondSystem> {
    sys.validate()?;
    let [ac, bc, cc, dc_mat, _] = sys.midpoints();
    let left = simultaneous_diag(&ac, &cc)?;
    let right = simultaneous_diag(&bc, &dc_mat)?;
    let uinv_enc = verified_inverse(&left.u, &left.uinv)?.ok_or(Error::SingularMatrix)?;
    let vinv_enc = verified_inverse(&right.u, &right.uinv)?.ok_or(Error::SingularMatrix)?;

    let raw_a = conjugate(&uinv_enc, &sys.a, &left.u)?;
    let raw_c = conjugate(&uinv_enc, &sys.c, &left.u)?;
    let raw_b = conjugate(&vinv_enc, &sys.b, &right.u)?;
    let raw_d = conjugate(&vinv_enc, &sys.d, &right.u)?;
    let fp = conjugate(&uinv_enc, &sys.f, &right.u)?;

    let da = left.d_first.clone();
    let db = right.d_first.clone();
    let dc = raw_c.mid().diag();
    let dd = raw_d.mid().diag();
    let diag_only = |i: usize, j: usize| i == j;
    let ap = absorb_pattern(&raw_a, diag_only, Some(&da));
    let bp = absorb_pattern(&raw_b, diag_only, Some(&db));
    let cp = absorb_pattern(&raw_c, diag_only, Some(&dc));
    let dp = absorb_pattern(&raw_d, diag_only, Some(&dd));
    let (s, s_err) = build_s_with_error(&da, &db, &dc, &dd)?;

    let rel = |x: &PMatrix, orig: &PMatrix| {
        let scale = orig.norm_inf();
        if scale == 0.0 {
            0.0
        } else {
            offdiag_inf_norm(x) / scale
        }
    };
    let offdiag_mass = OffdiagMass {
        a: rel(raw_a.mid(), &ac),
        b: rel(raw_b.mid(), &bc),
        c: left.offdiag_mass,
        d: right.offdiag_mass,
    };
    let mut warnings = Vec::new();
    for (name, v) in [("C", offdiag_mass.c), ("D", offdiag_mass.d)] {
        if v > OFFDIAG_WARNING {
            warnings.push(format!("transformed {name} has relative off-diagonal mass {v:.3e}"));
        }
    }
    Ok(PrecondSystem {
        ap,
        bp,
        cp,
        dp,
        fp,
        u: left.u,
        uinv: left.uinv,
        v: right.u,
        vinv: right.uinv,
        uinv_enc,
        vinv_enc,
        da,
        db,
        dc,
        dd,
        s,
        s_err,
        offdiag_mass,
        commutator_ac: left.commutator,
        commutator_bd: right.commutator,
        warnings,
        real: sys.is_real(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Disk;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cv(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x)).collect()
    }

    #[test]
    fn diagonal_pair() {
        let a = PMatrix::from_diag(&cv(&[1.0, 2.0]));
        let cc = PMatrix::from_diag(&cv(&[3.0, 4.0]));
        let sd = simultaneous_diag(&a, &cc).unwrap();
        let mut pairs: Vec<(f64, f64)> = sd.d_first.iter().zip(&sd.d_second).map(|(x, y)| (x.re, y.re)).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        assert_eq!(pairs, vec![(1.0, 3.0), (2.0, 4.0)]);
        assert_eq!(sd.offdiag_mass, 0.0);
        assert!(sd.u.abs_up().data().iter().all(|&x| x == 0.0 || x == 1.0));
    }

    #[test]
    fn identity_first_member_uses_the_second() {
        let b = PMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.5, -3.0, 1.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let sd = simultaneous_diag(&PMatrix::identity(3), &b).unwrap();
        assert!(sd.offdiag_mass <= 1e-12, "{}", sd.offdiag_mass);
        assert!(sd.d_first.iter().all(|z| (z - c(1.0)).norm() < 1e-12));
    }

    #[test]
    fn scaled_pair_commutes() {
        let a = PMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.5, 3.0, 1.0], vec![0.0, 1.0, -1.0]]).unwrap();
        let sd = simultaneous_diag(&a, &a.scale(c(2.0))).unwrap();
        for (x, y) in sd.d_first.iter().zip(&sd.d_second) {
            assert!((y - x * 2.0).norm() < 1e-12);
        }
        assert!(sd.offdiag_mass <= 1e-10);
    }

    #[test]
    fn polynomial_in_a_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = PMatrix::from_fn(4, 4, |_, _| c(rng.gen::<f64>() * 2.0 - 1.0));
        let a2 = a.matmul(&a).unwrap();
        let p = a2.scale(c(0.5)).add(&a.scale(c(-2.0))).unwrap().add(&PMatrix::identity(4).scale(c(3.0))).unwrap();
        let sd = simultaneous_diag(&a, &p).unwrap();
        assert!(sd.offdiag_mass <= 1e-8, "{}", sd.offdiag_mass);
        assert!(sd.commutator <= 1e-12);
    }

    #[test]
    fn s_formula() {
        assert_eq!(build_s(&cv(&[2.0]), &cv(&[1.0]), &cv(&[1.0]), &cv(&[1.0])).unwrap().get(0, 0), c(3.0));
        let s = build_s(&cv(&[1.0, 2.0]), &cv(&[3.0, 4.0]), &cv(&[5.0, 6.0]), &cv(&[7.0, 8.0])).unwrap();
        assert_eq!(s, PMatrix::from_rows(&[vec![38.0, 44.0], vec![48.0, 56.0]]).unwrap());
        let bad = build_s(&cv(&[1.0, -1.0]), &cv(&[1.0]), &cv(&[1.0, 1.0]), &cv(&[-1.0]));
        assert_eq!(bad, Err(Error::SingularPreconditioner));
    }

    #[test]
    fn s_matches_kronecker_diagonal() {
        let da = vec![c(1.5), Complex64::new(0.5, 2.0)];
        let db = vec![c(-1.0), c(2.0), Complex64::new(0.0, 1.0)];
        let dc = vec![c(0.25), c(3.0)];
        let dd = vec![c(1.0), c(1.0), c(-2.0)];
        let s = build_s(&da, &db, &dc, &dd).unwrap();
        let lam = crate::dense::kron(&PMatrix::from_diag(&db), &PMatrix::from_diag(&da))
            .unwrap()
            .add(&crate::dense::kron(&PMatrix::from_diag(&dd), &PMatrix::from_diag(&dc)).unwrap())
            .unwrap();
        let diag = PMatrix::from_vec_unchecked(6, 1, lam.diag());
        let back = crate::dense::unvec(&diag, 2, 3).unwrap();
        assert!(back.sub(&s).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn verified_inverse_contains_exact_inverse() {
        let u = PMatrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let r = crate::dense::inverse(&u).unwrap();
        let enc = verified_inverse(&u, &r).unwrap().unwrap();
        let exact = PMatrix::from_rows(&[vec![0.3, -0.1], vec![-0.2, 0.4]]).unwrap();
        assert!(enc.contains_point(&exact));
        assert!(enc.max_rad() < 1e-14);
        let singular = PMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(verified_inverse(&singular, &PMatrix::identity(2)).unwrap().is_none());
    }

    fn identity_system(n: usize) -> System {
        let i = IMatrix::identity(n);
        System::new(i.clone(), i.clone(), i.clone(), i, IMatrix::from_point(PMatrix::zeros(n, n))).unwrap()
    }

    #[test]
    fn identity_system_preconditions_to_identity() {
        let ps = transform_enclose(&identity_system(3)).unwrap();
        for x in [&ps.ap, &ps.bp, &ps.cp, &ps.dp] {
            assert_eq!(x.mid(), &PMatrix::identity(3));
            assert!(x.max_rad() <= 1e-15);
        }
        assert!(ps.s.data().iter().all(|&z| z == c(2.0)));
    }

    #[test]
    fn diagonal_inputs_are_preserved() {
        let a = IMatrix::from_fn(2, 2, |i, j| if i == j { Disk::real(1.0 + i as f64, 0.01) } else { Disk::real(0.0, 0.0) });
        let sys = System::new(a.clone(), a.clone(), IMatrix::identity(2), IMatrix::identity(2), IMatrix::identity(2))
            .unwrap();
        let ps = transform_enclose(&sys).unwrap();
        let mut diag: Vec<f64> = ps.ap.mid().diag().iter().map(|z| z.re).collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(diag, vec![1.0, 2.0]);
        for i in 0..2 {
            assert!(ps.ap.get(i, i).rad >= 0.01 && ps.ap.get(i, i).rad < 0.01 + 1e-14);
            assert!(ps.ap.get(i, 1 - i).rad <= 1e-15);
        }
    }

    #[test]
    fn midpoints_are_exactly_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut rnd = |k: usize| IMatrix::from_fn(k, k, |_, _| Disk::real(4.0 * rng.gen::<f64>() - 3.0, 1e-3));
        let sys = System::new(rnd(4), rnd(3), IMatrix::identity(4), IMatrix::identity(3), rnd(4).transpose())
            .unwrap_err();
        assert!(matches!(sys, Error::DimensionMismatch(_)));
        let f = IMatrix::from_fn(4, 3, |_, _| Disk::real(1.0, 0.0));
        let sys = System::new(rnd(4), rnd(3), IMatrix::identity(4), IMatrix::identity(3), f).unwrap();
        let ps = transform_enclose(&sys).unwrap();
        for x in [&ps.ap, &ps.bp, &ps.cp, &ps.dp] {
            for i in 0..x.rows() {
                for j in 0..x.cols() {
                    if i != j {
                        assert_eq!(x.mid().get(i, j), Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
        for i in 0..4 {
            for j in 0..3 {
                let want = ps.db[j] * ps.da[i] + ps.dd[j] * ps.dc[i];
                assert_eq!(ps.s.get(i, j), want);
            }
        }
    }
}
