//! Modified Krawczyk verification on the preconditioned system.
//!
//! With `R = Lambda^-1` the inverse of the (block-)diagonal midpoint of the
//! preconditioned Kronecker matrix, the Krawczyk image of `Xtilde + X` is
//! enclosed by `Xtilde + M + N`, where `M` encloses the preconditioned residual
//! and `N` bounds `(I - R Qp) X`. Finding `X` with `M + N` in its interior
//! proves that every member equation is uniquely solvable with solution in
//! `U (Xtilde + X) V^-1`.

use crate::dense::{PMatrix, RMatrix};
use crate::enclosure::{back_transform, Enclosure, Factored, Method};
use crate::error::{Error, Result};
use crate::interval::{epsilon_radius, hadamard_div_disk, im_matmul, in_interior, IMatrix};
use crate::precond::{transform_enclose, PrecondSystem};
use crate::round::{abs_down, div_up, sub_down};
use crate::system::System;

/// Iteration cap of the inflation loop.
pub const DEFAULT_KMAX: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MkwOptions {
    pub kmax: usize,
}

impl Default for MkwOptions {
    fn default() -> Self {
        Self { kmax: DEFAULT_KMAX }
    }
}

/// Access to `Lambda^-1`, the inverse midpoint of the preconditioned system.
pub(crate) trait LambdaSolve {
    /// Approximate `Lambda^-1 vec(rhs)` in point arithmetic.
    fn solve_point(&self, rhs: &PMatrix) -> Result<PMatrix>;
    /// Enclosure of `{Lambda^-1 vec(r) : r in rhs}`.
    fn solve_interval(&self, rhs: &IMatrix) -> Result<IMatrix>;
    /// Upper bound on `|Lambda^-1| vec(v)` for nonnegative `v`.
    fn bound_abs(&self, v: &RMatrix) -> Result<RMatrix>;
}

/// Diagonal `Lambda = Diag(vec(S))`, with `S` known up to `s_err`.
pub(crate) struct DiagSolve<'a> {
    pub s: &'a PMatrix,
    pub s_err: &'a RMatrix,
}

impl LambdaSolve for DiagSolve<'_> {
    fn solve_point(&self, rhs: &PMatrix) -> Result<PMatrix> {
        let data = rhs.data().iter().zip(self.s.data()).map(|(&f, &s)| f / s).collect();
        PMatrix::new(rhs.rows(), rhs.cols(), data).map_err(|_| Error::SingularPreconditioner)
    }

    fn solve_interval(&self, rhs: &IMatrix) -> Result<IMatrix> {
        hadamard_div_disk(rhs, self.s, self.s_err)
    }

    fn bound_abs(&self, v: &RMatrix) -> Result<RMatrix> {
        let mut out = RMatrix::zeros(v.rows(), v.cols());
        for i in 0..v.rows() {
            for j in 0..v.cols() {
                let denom = sub_down(abs_down(self.s.get(i, j)), self.s_err.get(i, j));
                if !(denom > 0.0) {
                    return Err(Error::SingularPreconditioner);
                }
                out.set(i, j, div_up(v.get(i, j), denom));
            }
        }
        Ok(out)
    }
}

/// `Fp - (Ap Xtilde) Bp - (Cp Xtilde) Dp`.
pub(crate) fn residual(ps: &PrecondSystem, xtilde: &PMatrix) -> Result<IMatrix> {
    let xt = IMatrix::from_point(xtilde.clone());
    let t1 = im_matmul(&im_matmul(&ps.ap, &xt)?, &ps.bp)?;
    let t2 = im_matmul(&im_matmul(&ps.cp, &xt)?, &ps.dp)?;
    ps.fp.sub(&t1)?.sub(&t2)
}

/// `Ap^D |X| |Bp^c| + Mag(Ap) |X| Bp^D + Cp^D |X| |Dp^c| + Mag(Cp) |X| Dp^D`.
pub(crate) fn contraction_numerator(ps: &PrecondSystem, xmag: &RMatrix) -> Result<RMatrix> {
    let side = |a: &IMatrix, b: &IMatrix| -> Result<RMatrix> {
        let first = a.rad().matmul_up(xmag)?.matmul_up(&b.mid().abs_up())?;
        let second = a.mag().matmul_up(xmag)?.matmul_up(b.rad())?;
        first.add_up(&second)
    };
    side(&ps.ap, &ps.bp)?.add_up(&side(&ps.cp, &ps.dp)?)
}

/// `Xtilde = mid(Fp) ./ S`.
pub fn compute_xtilde(ps: &PrecondSystem) -> Result<PMatrix> {
    DiagSolve {
        s: &ps.s,
        s_err: &ps.s_err,
    }
    .solve_point(ps.fp.mid())
}

/// Residual enclosure `M = (Fp - (Ap Xtilde) Bp - (Cp Xtilde) Dp) ./ S`.
pub fn compute_m(ps: &PrecondSystem, xtilde: &PMatrix) -> Result<IMatrix> {
    hadamard_div_disk(&residual(ps, xtilde)?, &ps.s, &ps.s_err)
}

/// Contraction enclosure `N = <0, numerator ./ |S|>` for a box of magnitude
/// `xmag`.
pub fn compute_n(ps: &PrecondSystem, xmag: &RMatrix) -> Result<IMatrix> {
    let num = contraction_numerator(ps, xmag)?;
    let rad = DiagSolve {
        s: &ps.s,
        s_err: &ps.s_err,
    }
    .bound_abs(&num)?;
    IMatrix::new(PMatrix::zeros(rad.rows(), rad.cols()), rad)
}

/// Recomputes `H = M + N(Xbox)` from scratch and checks `H` lies in the
/// interior of `Xbox`.
pub fn recheck(ps: &PrecondSystem, xbox: &IMatrix) -> Result<bool> {
    let xt = compute_xtilde(ps)?;
    let n = compute_n(ps, &xbox.mag())?;
    let h = compute_m(ps, &xt)?.widen(n.rad())?;
    Ok(in_interior(&h, xbox))
}

/// State of the inflation loop after it stops.
#[derive(Debug, Clone)]
pub struct KrawczykRun {
    pub xtilde: PMatrix,
    pub m: IMatrix,
    /// Last inflated box `X`.
    pub xbox: IMatrix,
    /// Last image `H = M + N(X)`.
    pub h: IMatrix,
    pub verified: bool,
    pub iterations: usize,
}

pub(crate) fn krawczyk_loop(ps: &PrecondSystem, solver: &dyn LambdaSolve, kmax: usize) -> Result<KrawczykRun> {
    let xtilde = solver.solve_point(ps.fp.mid())?;
    let m = solver.solve_interval(&residual(ps, &xtilde)?)?;
    let e = epsilon_radius(&m);
    let mut h = m.clone();
    let mut xbox = h.clone();
    let mut k = 0;
    let mut ready = false;
    while !ready && k < kmax {
        xbox = h.widen(&e)?;
        k += 1;
        let nrad = solver.bound_abs(&contraction_numerator(ps, &xbox.mag())?)?;
        h = m.widen(&nrad)?;
        ready = in_interior(&h, &xbox);
    }
    Ok(KrawczykRun {
        xtilde,
        m,
        xbox,
        h,
        verified: ready,
        iterations: k,
    })
}

/// The solution lies in `Xtilde + H`, with `H` inside `X` once verified.
pub(crate) fn finish(method: Method, ps: &PrecondSystem, run: KrawczykRun) -> Result<Enclosure> {
    let inner = if run.verified { &run.h } else { &run.xbox };
    let y = IMatrix::from_point(run.xtilde.clone()).add(inner)?;
    let evaluated = match back_transform(&ps.u, &y, &ps.vinv_enc, ps.real) {
        Ok(z) => z,
        Err(Error::InconsistentEnclosure) if !run.verified => back_transform(&ps.u, &y, &ps.vinv_enc, false)?,
        Err(e) => return Err(e),
    };
    Ok(Enclosure {
        method,
        verified: run.verified,
        iterations: run.iterations,
        factored: Factored {
            u: ps.u.clone(),
            xtilde: run.xtilde,
            xbox: run.xbox,
            image: run.verified.then_some(run.h),
            vinv: ps.vinv.clone(),
        },
        evaluated,
        message: (!run.verified).then(|| "method cannot obtain an outer estimate".to_string()),
    })
}

/// Runs the modified Krawczyk method on an already preconditioned system.
pub fn mkw_solve_preconditioned(ps: &PrecondSystem, opts: &MkwOptions) -> Result<Enclosure> {
    let solver = DiagSolve {
        s: &ps.s,
        s_err: &ps.s_err,
    };
    let run = krawczyk_loop(ps, &solver, opts.kmax)?;
    finish(Method::Mkw, ps, run)
}

pub fn mkw_solve_with(sys: &System, opts: &MkwOptions) -> Result<Enclosure> {
    let ps = match transform_enclose(sys) {
        Ok(ps) => ps,
        Err(Error::SingularMatrix) => {
            return Ok(Enclosure::failed(
                Method::Mkw,
                sys.m(),
                sys.n(),
                0,
                "eigenvector matrix could not be verified invertible",
            ))
        }
        Err(e) => return Err(e),
    };
    mkw_solve_preconditioned(&ps, opts)
}

/// Modified Krawczyk method with default options.
pub fn mkw_solve(sys: &System) -> Result<Enclosure> {
    mkw_solve_with(sys, &MkwOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Disk;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64, r: f64) -> IMatrix {
        IMatrix::from_fn(1, 1, |_, _| Disk::real(v, r))
    }

    fn scalar_system() -> System {
        System::new(scalar(2.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(6.0, 0.3)).unwrap()
    }

    #[test]
    fn xtilde_is_pointwise_quotient() {
        let ps = transform_enclose(&scalar_system()).unwrap();
        assert_eq!(compute_xtilde(&ps).unwrap().get(0, 0), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn scalar_residual() {
        let ps = transform_enclose(&scalar_system()).unwrap();
        let m = compute_m(&ps, &compute_xtilde(&ps).unwrap()).unwrap().get(0, 0);
        assert!(m.mid.norm() < 1e-15);
        assert!(m.rad >= 0.1 && m.rad < 0.1 + 1e-14);
    }

    #[test]
    fn point_coefficients_give_tiny_n() {
        let ps = transform_enclose(&scalar_system()).unwrap();
        let n = compute_n(&ps, &RMatrix::from_fn(1, 1, |_, _| 0.2)).unwrap();
        assert!(n.max_rad() < 1e-15);
    }

    #[test]
    fn n_scalar_formula() {
        let sys = System::new(scalar(2.0, 0.1), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(6.0, 0.3))
            .unwrap();
        let ps = transform_enclose(&sys).unwrap();
        let n = compute_n(&ps, &RMatrix::from_fn(1, 1, |_, _| 0.2)).unwrap().get(0, 0);
        let want = 0.1 * 0.2 * 1.0 / 3.0;
        assert!(n.rad >= want && n.rad < want * (1.0 + 1e-12), "{}", n.rad);
    }

    #[test]
    fn scalar_system_encloses_exact_solution_set() {
        let enc = mkw_solve(&scalar_system()).unwrap();
        assert!(enc.verified);
        let z = enc.evaluated.get(0, 0);
        assert!(z.is_real());
        assert!(z.inf() <= 1.9 && z.sup() >= 2.1);
        assert!(z.sup() - z.inf() <= 0.2 + 1e-3);
    }

    #[test]
    fn point_system_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rnd = || PMatrix::from_fn(4, 4, |i, j| Complex64::new(rng.gen::<f64>() - 0.5 + if i == j { 2.0 } else { 0.0 }, 0.0));
        let (a, b, f) = (rnd(), rnd(), rnd());
        let poly = |x: &PMatrix, s: f64| x.matmul(x).unwrap().scale(Complex64::new(s, 0.0)).add(&PMatrix::identity(4)).unwrap();
        let (c, d) = (poly(&a, 0.5), poly(&b, -0.25));
        let sys = System::from_points(a.clone(), b.clone(), c.clone(), d.clone(), f.clone()).unwrap();
        let enc = mkw_solve(&sys).unwrap();
        assert!(enc.verified);
        assert!(enc.evaluated.max_rad() * 2.0 <= 1e-8);
        let q = crate::dense::kron(&b.transpose(), &a).unwrap().add(&crate::dense::kron(&d.transpose(), &c).unwrap()).unwrap();
        let x = crate::dense::unvec(&crate::dense::lu_solve(&q, &crate::dense::vec(&f)).unwrap(), 4, 4).unwrap();
        let grown = enc.evaluated.widen(&RMatrix::from_fn(4, 4, |_, _| 1e-13)).unwrap();
        assert!(grown.contains_point(&x));
    }

    #[test]
    fn recomputed_image_is_interior() {
        let sys = System::new(scalar(2.0, 0.01), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(6.0, 0.3))
            .unwrap();
        let ps = transform_enclose(&sys).unwrap();
        let enc = mkw_solve_preconditioned(&ps, &MkwOptions::default()).unwrap();
        assert!(enc.verified);
        assert!(recheck(&ps, &enc.factored.xbox).unwrap());
    }

    #[test]
    fn zero_iteration_cap_is_unverified() {
        let enc = mkw_solve_with(&scalar_system(), &MkwOptions { kmax: 0 }).unwrap();
        assert!(!enc.verified);
        assert!(enc.message.is_some());
    }
}
