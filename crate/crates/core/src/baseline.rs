//! Full Kronecker formulation, used as a reference.
//!
//! The equation is rewritten as `Q vec(X) = vec(F)` with
//! `Q = B^T (x) A + D^T (x) C`. This costs `O(m^3 n^3)` and is only meant for
//! small systems: to cross-check the structured methods, to solve sampled
//! member systems and to test the necessary membership inequalities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{inverse, kron, lu_solve, unvec, vec, PMatrix, RMatrix};
use crate::enclosure::{Enclosure, Factored, Method};
use crate::error::{Error, Result};
use crate::interval::{epsilon_radius, im_matmul, in_interior, Disk, IMatrix, RoundingPolicy};
use crate::mkw::DEFAULT_KMAX;
use crate::round::{abs_down, add_down, add_up, mul_up, sub_down, sub_up};
use crate::system::System;

/// Default bound on `m n` for the Kronecker formulation.
pub const DEFAULT_CAP: usize = 1024;

/// `Q vec(X) = f` with an approximate inverse of `mid(Q)`.
#[derive(Debug, Clone)]
pub struct KronSystem {
    pub q: IMatrix,
    pub f: IMatrix,
    pub r: Option<PMatrix>,
}

fn check_cap(m: usize, n: usize, cap: usize) -> Result<()> {
    let size = m.saturating_mul(n);
    if size > cap {
        return Err(Error::BaselineSizeCap { size, cap });
    }
    Ok(())
}

/// Interval `vec`, column-major.
pub fn ivec(x: &IMatrix) -> IMatrix {
    let m = x.rows();
    IMatrix::from_fn(m * x.cols(), 1, |k, _| x.get(k % m, k / m))
}

/// Inverse of [`ivec`].
pub fn iunvec(v: &IMatrix, m: usize, n: usize) -> Result<IMatrix> {
    if v.rows() != m * n || v.cols() != 1 {
        return Err(Error::DimensionMismatch(format!("cannot reshape {} entries to {m}x{n}", v.rows())));
    }
    Ok(IMatrix::from_fn(m, n, |i, j| v.get(j * m + i, 0)))
}

/// `b a + d c` with midpoint `b^c a^c + d^c c^c` and radius
/// `|b^c| a^D + b^D Mag(a) + |d^c| c^D + d^D Mag(c)` plus the rounding error of
/// the midpoint, which is exact zero for exact real data.
fn kron_entry(pol: &RoundingPolicy, b: Disk, a: Disk, d: Disk, c: Disk) -> Result<Disk> {
    if !(a.is_real() && b.is_real() && c.is_real() && d.is_real()) {
        return pol.add(pol.mul(b, a)?, pol.mul(d, c)?);
    }
    let (a0, b0, c0, d0) = (a.mid.re, b.mid.re, c.mid.re, d.mid.re);
    let p1 = b0 * a0;
    let e1 = b0.mul_add(a0, -p1);
    let p2 = d0 * c0;
    let e2 = d0.mul_add(c0, -p2);
    let s = p1 + p2;
    let t = s - p1;
    let e3 = (p1 - (s - t)) + (p2 - t);
    let mut rad = add_up(add_up(e1.abs(), e2.abs()), e3.abs());
    let term = |x: Disk, y: Disk| add_up(mul_up(x.mid.re.abs(), y.rad), mul_up(x.rad, y.mag()));
    rad = add_up(rad, add_up(term(b, a), term(d, c)));
    if !s.is_finite() || !rad.is_finite() {
        return Err(Error::IntervalOverflow);
    }
    Ok(Disk::real(s, rad))
}

/// Builds `Q = B^T (x) A + D^T (x) C` entrywise.
pub fn build_q_kron(sys: &System, cap: usize) -> Result<KronSystem> {
    sys.validate()?;
    let (m, n) = (sys.m(), sys.n());
    check_cap(m, n, cap)?;
    let pol = RoundingPolicy::default();
    let size = m * n;
    let mut q = IMatrix::zeros(size, size);
    for k in 0..n {
        for l in 0..n {
            let b = sys.b.get(l, k);
            let d = sys.d.get(l, k);
            for i in 0..m {
                for j in 0..m {
                    let v = kron_entry(&pol, b, sys.a.get(i, j), d, sys.c.get(i, j))?;
                    q.set(k * m + i, l * m + j, v);
                }
            }
        }
    }
    let r = inverse(q.mid()).ok();
    Ok(KronSystem { q, f: ivec(&sys.f), r })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineOptions {
    pub cap: usize,
    pub kmax: usize,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            kmax: DEFAULT_KMAX,
        }
    }
}

/// Standard Krawczyk method on the Kronecker system.
pub fn full_krawczyk_solve(sys: &System, opts: &BaselineOptions) -> Result<Enclosure> {
    let (m, n) = (sys.m(), sys.n());
    let ks = build_q_kron(sys, opts.cap)?;
    let Some(r) = ks.r.as_ref() else {
        return Ok(Enclosure::failed(Method::Ver, m, n, 0, "midpoint Kronecker matrix is singular"));
    };
    let fc = ks.f.mid();
    let mut xt = r.matmul(fc)?;
    let defect = fc.sub(&ks.q.mid().matmul(&xt)?)?;
    xt = xt.add(&r.matmul(&defect)?)?;
    let rp = IMatrix::from_point(r.clone());
    let residual = ks.f.sub(&im_matmul(&ks.q, &IMatrix::from_point(xt.clone()))?)?;
    let z = im_matmul(&rp, &residual)?;
    let contraction = IMatrix::identity(m * n).sub(&im_matmul(&rp, &ks.q)?)?;
    let e = epsilon_radius(&z);
    let mut h = z.clone();
    let mut xbox = h.clone();
    let mut k = 0;
    let mut ready = false;
    while !ready && k < opts.kmax {
        xbox = h.widen(&e)?;
        k += 1;
        h = z.add(&im_matmul(&contraction, &xbox)?)?;
        ready = in_interior(&h, &xbox);
    }
    let xt_m = unvec(&xt, m, n)?;
    let inner = if ready { &h } else { &xbox };
    let mut evaluated = IMatrix::from_point(xt_m.clone()).add(&iunvec(inner, m, n)?)?;
    if ready && sys.is_real() {
        evaluated = evaluated.real_section()?;
    }
    Ok(Enclosure {
        method: Method::Ver,
        verified: ready,
        iterations: k,
        factored: Factored {
            u: PMatrix::identity(m),
            xtilde: xt_m,
            xbox: iunvec(&xbox, m, n)?,
            image: if ready { Some(iunvec(&h, m, n)?) } else { None },
            vinv: PMatrix::identity(n),
        },
        evaluated,
        message: (!ready).then(|| "method cannot obtain an outer estimate".to_string()),
    })
}

/// Point solve through the Kronecker system with one refinement step.
pub fn point_solve(a: &PMatrix, b: &PMatrix, c: &PMatrix, d: &PMatrix, f: &PMatrix) -> Result<PMatrix> {
    let (m, n) = (f.rows(), f.cols());
    if a.rows() != m || !a.is_square() || c.rows() != m || !c.is_square() {
        return Err(Error::DimensionMismatch("A and C must be square with F's row count".into()));
    }
    if b.rows() != n || !b.is_square() || d.rows() != n || !d.is_square() {
        return Err(Error::DimensionMismatch("B and D must be square with F's column count".into()));
    }
    check_cap(m, n, DEFAULT_CAP)?;
    let q = kron(&b.transpose(), a)?.add(&kron(&d.transpose(), c)?)?;
    let rhs = vec(f);
    let x = lu_solve(&q, &rhs)?;
    let defect = rhs.sub(&q.matmul(&x)?)?;
    let x = x.add(&lu_solve(&q, &defect)?)?;
    unvec(&x, m, n)
}

/// `||A X B + C X D - F||_inf`.
pub fn point_residual(a: &PMatrix, b: &PMatrix, c: &PMatrix, d: &PMatrix, f: &PMatrix, x: &PMatrix) -> Result<f64> {
    let r = a.matmul(x)?.matmul(b)?.add(&c.matmul(x)?.matmul(d)?)?.sub(f)?;
    Ok(r.norm_inf())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Uniform in every coefficient disk.
    Random,
    /// Boundary selections `mid +- rad`; all of them when at most 12
    /// coefficients are uncertain.
    Vertex,
    /// Half vertex, half random.
    Mixed,
}

/// Solutions of sampled member systems.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub solutions: Vec<PMatrix>,
    /// Member systems skipped as singular.
    pub skipped: usize,
}

/// Largest uncertain-entry count for exhaustive vertex enumeration.
pub const VERTEX_ENUMERATION_LIMIT: usize = 12;

/// A member of `d` determined by `t` in the closed unit disk, never outside
/// `d`.
fn member(d: Disk, t: Complex64) -> Complex64 {
    if d.rad == 0.0 {
        return d.mid;
    }
    if d.is_real() && t.im == 0.0 {
        let lo = sub_up(d.mid.re, d.rad);
        let hi = add_down(d.mid.re, d.rad);
        let v = (d.mid.re + d.rad * t.re).clamp(lo.min(hi), hi.max(lo));
        return Complex64::new(v, 0.0);
    }
    let mut s = 1.0;
    for _ in 0..8 {
        let z = d.mid + t * (d.rad * s);
        if d.contains(z) {
            return z;
        }
        s *= 1.0 - 1e-12;
    }
    d.mid
}

fn random_unit(rng: &mut ChaCha8Rng, real: bool) -> Complex64 {
    if real {
        Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 0.0)
    } else {
        let r = rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
    }
}

fn vertex_unit(rng: &mut ChaCha8Rng, real: bool, sign: bool) -> Complex64 {
    if real {
        Complex64::new(if sign { 1.0 } else { -1.0 }, 0.0)
    } else {
        Complex64::from_polar(1.0, std::f64::consts::TAU * rng.gen::<f64>())
    }
}

/// Coefficient selection for one member system, one unit-disk value per
/// entry of `A, B, C, D, F` in that order.
type Plan = Vec<Complex64>;

fn all_disks(sys: &System) -> Vec<Disk> {
    [&sys.a, &sys.b, &sys.c, &sys.d, &sys.f].iter().flat_map(|x| x.entries()).collect()
}

fn realize(sys: &System, disks: &[Disk], plan: &Plan) -> Result<[PMatrix; 5]> {
    let mut it = disks.iter().zip(plan).map(|(&d, &t)| member(d, t));
    let mut take = |x: &IMatrix| {
        let data: Vec<Complex64> = (0..x.rows() * x.cols()).map(|_| it.next().unwrap()).collect();
        PMatrix::new(x.rows(), x.cols(), data)
    };
    Ok([take(&sys.a)?, take(&sys.b)?, take(&sys.c)?, take(&sys.d)?, take(&sys.f)?])
}

/// Draws member systems and solves each with [`point_solve`]. The sample plan
/// depends only on `seed`.
pub fn sample_solutions(sys: &System, count: usize, mode: SampleMode, seed: u64) -> Result<SampleSet> {
    sys.validate()?;
    check_cap(sys.m(), sys.n(), DEFAULT_CAP)?;
    let disks = all_disks(sys);
    let uncertain: Vec<usize> = (0..disks.len()).filter(|&i| disks[i].rad > 0.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = Complex64::new(0.0, 0.0);
    let mut plans: Vec<Plan> = Vec::new();
    let vertex_count = match mode {
        SampleMode::Random => 0,
        SampleMode::Vertex => count,
        SampleMode::Mixed => count / 2,
    };
    let k = uncertain.len();
    if vertex_count > 0 {
        let exhaustive = k <= VERTEX_ENUMERATION_LIMIT && (mode == SampleMode::Vertex || (1usize << k) <= vertex_count);
        let patterns: Vec<u64> = if exhaustive {
            (0..1u64 << k).collect()
        } else {
            (0..vertex_count).map(|_| rng.gen()).collect()
        };
        for bits in patterns {
            let mut plan = vec![zero; disks.len()];
            for (pos, &idx) in uncertain.iter().enumerate() {
                let sign = if exhaustive { (bits >> pos) & 1 == 1 } else { rng.gen() };
                plan[idx] = vertex_unit(&mut rng, disks[idx].is_real(), sign);
            }
            plans.push(plan);
        }
    }
    let target = if mode == SampleMode::Vertex { plans.len() } else { count };
    while plans.len() < target {
        let mut plan = vec![zero; disks.len()];
        for &idx in &uncertain {
            plan[idx] = random_unit(&mut rng, disks[idx].is_real());
        }
        plans.push(plan);
    }
    let mut solutions = Vec::with_capacity(plans.len());
    let mut skipped = 0;
    for plan in &plans {
        let [a, b, c, d, f] = realize(sys, &disks, plan)?;
        match point_solve(&a, &b, &c, &d, &f) {
            Ok(x) if x.data().iter().all(|z| z.re.is_finite() && z.im.is_finite()) => solutions.push(x),
            Ok(_) | Err(Error::SingularMatrix) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(SampleSet { solutions, skipped })
}

/// Which necessary membership inequality to test. `Base` bounds both products
/// as `Mag(A)|X|B^D + A^D|X B^c|`; the other variants swap to
/// `|A^c X|B^D + A^D|X|Mag(B)` in the first pair, the second pair, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Base,
    SwapFirst,
    SwapSecond,
    SwapBoth,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Base, Variant::SwapFirst, Variant::SwapSecond, Variant::SwapBoth];
}

fn pair_bound(a: &IMatrix, b: &IMatrix, x: &IMatrix, swapped: bool) -> Result<RMatrix> {
    let xmag = x.mag();
    if swapped {
        let ax = im_matmul(&IMatrix::from_point(a.mid().clone()), x)?.mag();
        ax.matmul_up(b.rad())?.add_up(&a.rad().matmul_up(&xmag)?.matmul_up(&b.mag())?)
    } else {
        let xb = im_matmul(x, &IMatrix::from_point(b.mid().clone()))?.mag();
        a.mag().matmul_up(&xmag)?.matmul_up(b.rad())?.add_up(&a.rad().matmul_up(&xb)?)
    }
}

/// Tests `|A^c X B^c + C^c X D^c - F^c| <= bound` entrywise with the left
/// side rounded down and the right side rounded up, so a member solution is
/// never rejected.
pub fn residual_membership(sys: &System, x: &PMatrix, variant: Variant) -> Result<bool> {
    if x.rows() != sys.m() || x.cols() != sys.n() {
        return Err(Error::DimensionMismatch("X has the wrong shape".into()));
    }
    let xi = IMatrix::from_point(x.clone());
    let point = |y: &IMatrix| IMatrix::from_point(y.mid().clone());
    let lhs = im_matmul(&im_matmul(&point(&sys.a), &xi)?, &point(&sys.b))?
        .add(&im_matmul(&im_matmul(&point(&sys.c), &xi)?, &point(&sys.d))?)?
        .sub(&point(&sys.f))?;
    let (s1, s2) = match variant {
        Variant::Base => (false, false),
        Variant::SwapFirst => (true, false),
        Variant::SwapSecond => (false, true),
        Variant::SwapBoth => (true, true),
    };
    let rhs = pair_bound(&sys.a, &sys.b, &xi, s1)?
        .add_up(&pair_bound(&sys.c, &sys.d, &xi, s2)?)?
        .add_up(sys.f.rad())?;
    Ok((0..lhs.rows()).all(|i| {
        (0..lhs.cols()).all(|j| {
            let d = lhs.get(i, j);
            sub_down(abs_down(d.mid), d.rad) <= rhs.get(i, j)
        })
    }))
}
