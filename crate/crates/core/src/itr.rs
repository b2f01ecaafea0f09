//! Residual-divide-intersect refinement of a preconditioned enclosure.
//!
//! Each step bounds the defect of the diagonal midpoint equation over the
//! current box by `T`, divides `<Fp^c, T>` by `S` and meets the quotient with
//! the current box. Iterates are held as rectangles so that every step is
//! nested exactly.

use crate::dense::{PMatrix, RMatrix};
use crate::enclosure::{back_transform, Enclosure, Factored, Method};
use crate::error::{Error, Result};
use crate::interval::{hadamard_div_disk, im_matmul, Disk, IMatrix, RectMatrix};
use crate::mkw::{krawczyk_loop, DiagSolve, DEFAULT_KMAX};
use crate::precond::{transform_enclose, PrecondSystem};
use crate::system::System;

#[derive(Debug, Clone, PartialEq)]
pub struct ItrOptions {
    /// Relative stopping tolerance on the distance of successive iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting box in preconditioned coordinates. Taken from the modified
    /// Krawczyk method when absent.
    pub y0: Option<IMatrix>,
    /// Iteration cap of the Krawczyk run producing the starting box.
    pub kmax: usize,
}

impl Default for ItrOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            y0: None,
            kmax: DEFAULT_KMAX,
        }
    }
}

/// State of the iteration.
#[derive(Debug, Clone)]
pub struct GammaState {
    pub y: RectMatrix,
    /// Last quotient `<Fp^c, T> ./ S`, also an enclosure.
    pub quotient: Option<IMatrix>,
    pub k: usize,
    pub converged: bool,
}

/// `Mag(Ap)|Y|Bp^D + Ap^D|Y Bp^c| + Mag(Cp)|Y|Dp^D + Cp^D|Y Dp^c| + Fp^D`.
fn defect_bound(ps: &PrecondSystem, y: &IMatrix) -> Result<RMatrix> {
    let ymag = y.mag();
    let side = |a: &IMatrix, b: &IMatrix| -> Result<RMatrix> {
        let first = a.mag().matmul_up(&ymag)?.matmul_up(b.rad())?;
        let yb = im_matmul(y, &IMatrix::from_point(b.mid().clone()))?.mag();
        first.add_up(&a.rad().matmul_up(&yb)?)
    };
    side(&ps.ap, &ps.bp)?.add_up(&side(&ps.cp, &ps.dp)?)?.add_up(ps.fp.rad())
}

fn gamma_quotient(ps: &PrecondSystem, y: &RectMatrix) -> Result<IMatrix> {
    let t = defect_bound(ps, &y.to_imatrix()?)?;
    let rhs = IMatrix::new(ps.fp.mid().clone(), t)?;
    hadamard_div_disk(&rhs, &ps.s, &ps.s_err)
}

/// One refinement step. An empty meet means no member solution lies in `y`.
pub fn gamma_step(ps: &PrecondSystem, y: &RectMatrix) -> Result<RectMatrix> {
    RectMatrix::from_imatrix(&gamma_quotient(ps, y)?).meet(y)
}

/// Iterates [`gamma_step`] from `y0`, calling `observe(prev, next)` after
/// every step.
pub fn gamma_iterate(
    ps: &PrecondSystem,
    y0: &IMatrix,
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(&RectMatrix, &RectMatrix),
) -> Result<GammaState> {
    if y0.rows() != ps.m() || y0.cols() != ps.n() {
        return Err(Error::DimensionMismatch(format!(
            "starting box is {}x{}, expected {}x{}",
            y0.rows(),
            y0.cols(),
            ps.m(),
            ps.n()
        )));
    }
    let mut state = GammaState {
        y: RectMatrix::from_imatrix(y0),
        quotient: None,
        k: 0,
        converged: false,
    };
    while state.k < max_iter {
        let q = gamma_quotient(ps, &state.y)?;
        let next = RectMatrix::from_imatrix(&q).meet(&state.y)?;
        debug_assert!(next.subset_of(&state.y));
        observe(&state.y, &next);
        let dist = next.distance(&state.y)?;
        let scale = 1.0 + next.max_mag();
        state.y = next;
        state.quotient = Some(q);
        state.k += 1;
        if dist < tol * scale {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}

/// Smallest of the available enclosures of each entry that lies inside `y0`.
fn select_disks(state: &GammaState, y0: &IMatrix) -> Result<IMatrix> {
    let hull = state.y.to_imatrix()?;
    let mut out = y0.clone();
    for i in 0..y0.rows() {
        for j in 0..y0.cols() {
            let outer = y0.get(i, j);
            let mut best = outer;
            let mut consider = |d: Disk| {
                if d.rad < best.rad && d.subset_of(&outer) {
                    best = d;
                }
            };
            consider(hull.get(i, j));
            if let Some(q) = &state.quotient {
                consider(q.get(i, j));
            }
            out.set(i, j, best);
        }
    }
    Ok(out)
}

/// Runs the iteration on a preconditioned system.
pub fn itr_solve_preconditioned(ps: &PrecondSystem, opts: &ItrOptions) -> Result<Enclosure> {
    let y0 = match &opts.y0 {
        Some(y0) => y0.clone(),
        None => {
            let solver = DiagSolve {
                s: &ps.s,
                s_err: &ps.s_err,
            };
            let run = krawczyk_loop(ps, &solver, opts.kmax)?;
            if !run.verified {
                return Err(Error::NoInitialEnclosure);
            }
            IMatrix::from_point(run.xtilde).add(&run.h)?
        }
    };
    let state = gamma_iterate(ps, &y0, opts.tol, opts.max_iter, |_, _| {})?;
    let z = select_disks(&state, &y0)?;
    let evaluated = back_transform(&ps.u, &z, &ps.vinv_enc, ps.real)?;
    let (mid, rad) = z.into_parts();
    Ok(Enclosure {
        method: Method::Itr,
        verified: true,
        iterations: state.k,
        factored: Factored {
            u: ps.u.clone(),
            xtilde: mid.clone(),
            xbox: IMatrix::new(PMatrix::zeros(mid.rows(), mid.cols()), rad)?,
            image: None,
            vinv: ps.vinv.clone(),
        },
        evaluated,
        message: (!state.converged).then(|| format!("stopped after {} steps without reaching the tolerance", state.k)),
    })
}

/// Γ-iteration started from `Xtilde + H` of the modified Krawczyk method
/// unless `opts.y0` is set.
pub fn itr_solve(sys: &System, opts: &ItrOptions) -> Result<Enclosure> {
    let ps = transform_enclose(sys).map_err(|e| match e {
        Error::SingularMatrix => Error::NoInitialEnclosure,
        e => e,
    })?;
    itr_solve_preconditioned(&ps, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mkw::mkw_solve_preconditioned;
    use crate::mkw::MkwOptions;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64, r: f64) -> IMatrix {
        IMatrix::from_fn(1, 1, |_, _| Disk::real(v, r))
    }

    fn scalar_system() -> System {
        System::new(scalar(2.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(6.0, 0.3)).unwrap()
    }

    #[test]
    fn scalar_step_hits_exact_solution_set() {
        let ps = transform_enclose(&scalar_system()).unwrap();
        let y = RectMatrix::from_imatrix(&scalar(2.0, 0.5));
        let r = gamma_step(&ps, &y).unwrap().get(0, 0);
        assert!(r.re_lo <= 1.9 && r.re_lo > 1.9 - 1e-14);
        assert!(r.re_hi >= 2.1 && r.re_hi < 2.1 + 1e-14);
    }

    #[test]
    fn scalar_iteration_converges_quickly() {
        let opts = ItrOptions {
            y0: Some(scalar(2.0, 0.5)),
            ..Default::default()
        };
        let enc = itr_solve(&scalar_system(), &opts).unwrap();
        assert!(enc.iterations <= 2);
        let z = enc.evaluated.get(0, 0);
        assert!(z.inf() <= 1.9 && z.sup() >= 2.1);
        assert!(z.sup() - z.inf() <= 0.2 * (1.0 + 1e-6) + 1e-9);
    }

    #[test]
    fn fixed_point_is_idempotent() {
        let ps = transform_enclose(&scalar_system()).unwrap();
        let first = gamma_iterate(&ps, &scalar(2.0, 0.5), 1e-12, 100, |_, _| {}).unwrap();
        let y1 = first.y.to_imatrix().unwrap();
        let second = gamma_iterate(&ps, &y1, 1e-12, 100, |_, _| {}).unwrap();
        assert_eq!(second.k, 1);
        assert!(second.converged);
        assert_eq!(second.y, RectMatrix::from_imatrix(&y1));
    }

    #[test]
    fn disjoint_start_is_inconsistent() {
        let ps = transform_enclose(&scalar_system()).unwrap();
        let y = RectMatrix::from_imatrix(&scalar(5.0, 0.5));
        assert!(matches!(gamma_step(&ps, &y), Err(Error::InconsistentEnclosure)));
    }

    #[test]
    fn random_trajectory_is_nested_and_inside_mkw_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rnd = |w: f64| {
            IMatrix::from_fn(3, 3, |i, j| {
                let c = rng.gen::<f64>() - 0.5 + if i == j { 3.0 } else { 0.0 };
                Disk::real(c, w * rng.gen::<f64>())
            })
        };
        let sys = System::new(rnd(1e-4), rnd(1e-4), IMatrix::identity(3), IMatrix::identity(3), rnd(1e-3)).unwrap();
        let ps = transform_enclose(&sys).unwrap();
        let mkw = mkw_solve_preconditioned(&ps, &MkwOptions::default()).unwrap();
        assert!(mkw.verified);
        let y0 = mkw.preconditioned_box().unwrap();
        let mut sums = vec![RectMatrix::from_imatrix(&y0).sum_rad()];
        let state = gamma_iterate(&ps, &y0, 1e-12, 100, |prev, next| {
            assert!(next.subset_of(prev));
            sums.push(next.sum_rad());
        })
        .unwrap();
        assert!(state.k >= 1);
        assert!(sums.windows(2).all(|w| w[1] <= w[0]));
        let enc = itr_solve_preconditioned(&ps, &ItrOptions::default()).unwrap();
        assert!(enc.preconditioned_box().unwrap().subset_of(&y0));
        let ratio = enc.evaluated.sum_rad() / mkw.evaluated.sum_rad();
        assert!((0.95..=1.05).contains(&ratio), "{ratio}");
    }

    #[test]
    fn kyc31_width_tracks_mkw() {
        use crate::harness::{generate, Family, GenSpec};
        let sys = generate(&GenSpec::square(Family::Kyc31, 10, 1e-6, 3)).unwrap();
        let mkw = crate::mkw::mkw_solve(&sys).unwrap();
        let itr = itr_solve(&sys, &ItrOptions::default()).unwrap();
        assert!(mkw.verified && itr.verified);
        assert!(itr.evaluated.sum_rad() <= 1.01 * mkw.evaluated.sum_rad());
        let samples = crate::baseline::sample_solutions(&sys, 100, crate::baseline::SampleMode::Mixed, 4).unwrap();
        assert!(samples.solutions.iter().all(|x| itr.evaluated.contains_point(x)));
    }

    #[test]
    fn unverifiable_start_is_reported() {
        let opts = ItrOptions {
            kmax: 0,
            ..Default::default()
        };
        assert!(matches!(itr_solve(&scalar_system(), &opts), Err(Error::NoInitialEnclosure)));
    }
}
