//! Block-diagonal preconditioning for midpoints that are defective or have
//! ill-conditioned eigenvectors.
//!
//! `mid(A)` is brought to Schur form, its eigenvalues are grouped into
//! clusters, the Schur form is reordered so that clusters are contiguous and
//! the off-diagonal blocks are removed by solving triangular Sylvester
//! equations. Clusters whose decoupling would need a transformation larger
//! than `max_cond` are merged. The `(B, D)` pair is treated through `B^T`, so
//! its blocks are lower triangular and the Kronecker midpoint `Lambda` is
//! upper block-triangular. `Lambda^-1` is then applied by interval back
//! substitution, one column block of the unknown at a time.

use num_complex::Complex64;

use crate::dense::{schur, swap_adjacent, PMatrix, RMatrix};
use crate::enclosure::{Enclosure, Method};
use crate::error::{Error, Result};
use crate::interval::{Disk, IMatrix, RoundingPolicy, SINGULAR_THRESHOLD};
use crate::mkw::{finish, krawczyk_loop, LambdaSolve, DEFAULT_KMAX};
use crate::precond::{
    absorb_pattern, build_s_with_error, conjugate, pencil_basis, verified_inverse, OffdiagMass, PrecondSystem,
};
use crate::system::System;

/// Eigenvalues closer than this fraction of `||A||_F` share a block.
pub const CLUSTER_TOL: f64 = 1e-4;
/// Default bound on the decoupling transformation.
pub const DEFAULT_MAX_COND: f64 = 1e4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Consecutive diagonal blocks of an `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    sizes: Vec<usize>,
    start_of: Vec<usize>,
    end_of: Vec<usize>,
}

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut start_of = Vec::new();
        let mut end_of = Vec::new();
        let mut p = 0;
        for &s in &sizes {
            for _ in 0..s {
                start_of.push(p);
                end_of.push(p + s);
            }
            p += s;
        }
        Self { sizes, start_of, end_of }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.start_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start_of.is_empty()
    }

    /// Block range containing index `i`.
    pub fn block_of(&self, i: usize) -> (usize, usize) {
        (self.start_of[i], self.end_of[i])
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.start_of[i] == self.start_of[j]
    }

    /// Block ranges in order.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.sizes.len());
        let mut p = 0;
        for &s in &self.sizes {
            out.push((p, p + s));
            p += s;
        }
        out
    }
}

/// `Uinv Ac U = T` with `T` block diagonal and upper triangular blocks.
#[derive(Debug, Clone)]
pub struct BlockHalf {
    pub u: PMatrix,
    pub uinv: PMatrix,
    pub t: PMatrix,
    pub partition: Partition,
}

/// Block-diagonal forms of both pairs.
#[derive(Debug, Clone)]
pub struct BlockDiagForm {
    pub u: PMatrix,
    pub uinv: PMatrix,
    pub v: PMatrix,
    pub vinv: PMatrix,
    /// Upper triangular blocks.
    pub da: PMatrix,
    pub dc: PMatrix,
    /// Lower triangular blocks.
    pub db: PMatrix,
    pub dd: PMatrix,
    pub a_sizes: Vec<usize>,
    pub b_sizes: Vec<usize>,
    /// `max(||U||_inf ||Uinv||_inf, ||V||_inf ||Vinv||_inf)`.
    pub cond_bound: f64,
}

impl BlockDiagForm {
    /// Upper bound of the block-size sequence pair.
    pub fn largest_block(&self) -> usize {
        self.a_sizes.iter().chain(&self.b_sizes).copied().max().unwrap_or(0)
    }
}

fn cluster_ranks(values: &[Complex64], tol: f64) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let next = p[k];
            p[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut rank_of_root = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            if rank_of_root[r] == usize::MAX {
                rank_of_root[r] = next;
                next += 1;
            }
            rank_of_root[r]
        })
        .collect()
}

/// Solves `T11 Y - Y T22 = R` for upper triangular `T11`, `T22`.
fn triangular_sylvester(t: &PMatrix, blk: (usize, usize), rest: (usize, usize), r: &[Complex64]) -> Option<Vec<Complex64>> {
    let (p, q) = blk;
    let (s, e) = rest;
    let rows = q - p;
    let cols = e - s;
    let mut y = vec![ZERO; rows * cols];
    for j in 0..cols {
        let lambda = t.get(s + j, s + j);
        let mut rhs: Vec<Complex64> = (0..rows).map(|i| r[i * cols + j]).collect();
        for k in 0..j {
            let tkj = t.get(s + k, s + j);
            if tkj != ZERO {
                for (i, v) in rhs.iter_mut().enumerate() {
                    *v += y[i * cols + k] * tkj;
                }
            }
        }
        for i in (0..rows).rev() {
            let mut acc = rhs[i];
            for k in i + 1..rows {
                acc -= t.get(p + i, p + k) * y[k * cols + j];
            }
            let d = t.get(p + i, p + i) - lambda;
            if d == ZERO {
                return None;
            }
            y[i * cols + j] = acc / d;
        }
    }
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(y)
}

/// Schur form, clustering, reordering and decoupling of `ac`.
pub fn block_diagonalize(ac: &PMatrix, max_cond: f64) -> Result<BlockHalf> {
    if !ac.is_square() {
        return Err(Error::DimensionMismatch("block_diagonalize needs a square matrix".into()));
    }
    let n = ac.rows();
    let sch = schur(ac)?;
    let (mut t, mut q) = (sch.t, sch.q);
    let mut rank = cluster_ranks(&t.diag(), CLUSTER_TOL * ac.norm_fro());
    for pass in 0..n {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if rank[k] > rank[k + 1] {
                swap_adjacent(&mut t, &mut q, k);
                rank.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let mut clusters: Vec<usize> = Vec::new();
    for k in 0..n {
        if k == 0 || rank[k] != rank[k - 1] {
            clusters.push(1);
        } else {
            *clusters.last_mut().unwrap() += 1;
        }
    }

    let mut u = q.clone();
    let mut uinv = q.conj_transpose();
    let mut sizes = Vec::new();
    let mut p = 0;
    let mut c = 0;
    while c < clusters.len() {
        let mut q_end = p + clusters[c];
        c += 1;
        loop {
            if q_end == n {
                break;
            }
            let (rows, cols) = (q_end - p, n - q_end);
            let r: Vec<Complex64> = (0..rows * cols)
                .map(|k| -t.get(p + k / cols, q_end + k % cols))
                .collect();
            let y = triangular_sylvester(&t, (p, q_end), (q_end, n), &r);
            let ok = y.as_ref().is_some_and(|y| {
                (0..rows)
                    .map(|i| (0..cols).map(|j| y[i * cols + j].norm()).sum::<f64>())
                    .fold(0.0, f64::max)
                    <= max_cond
            });
            if ok {
                let y = y.unwrap();
                // U[:, rest] += U[:, blk] Y ; Uinv[blk, :] -= Y Uinv[rest, :]
                for i in 0..n {
                    for j in 0..cols {
                        let mut acc = ZERO;
                        for k in 0..rows {
                            acc += u.get(i, p + k) * y[k * cols + j];
                        }
                        u.set(i, q_end + j, u.get(i, q_end + j) + acc);
                    }
                }
                for i in 0..rows {
                    for j in 0..n {
                        let mut acc = ZERO;
                        for k in 0..cols {
                            acc += y[i * cols + k] * uinv.get(q_end + k, j);
                        }
                        uinv.set(p + i, j, uinv.get(p + i, j) - acc);
                    }
                }
                for i in p..q_end {
                    for j in q_end..n {
                        t.set(i, j, ZERO);
                    }
                }
                break;
            }
            q_end += clusters[c];
            c += 1;
        }
        sizes.push(q_end - p);
        p = q_end;
    }
    Ok(BlockHalf {
        u,
        uinv,
        t,
        partition: Partition::new(sizes),
    })
}

/// `Lambda^-1` through block back substitution.
pub(crate) struct BlockSolve<'a> {
    pub da: &'a PMatrix,
    pub db: &'a PMatrix,
    pub dc: &'a PMatrix,
    pub dd: &'a PMatrix,
    pub rows: &'a Partition,
    pub cols: &'a Partition,
}

impl BlockSolve<'_> {
    /// `(x M) y` for the upper triangular blocks of `M`, with `x` a scalar
    /// disk.
    fn tri_apply(pol: &RoundingPolicy, m: &PMatrix, part: &Partition, y: &[Disk]) -> Result<Vec<Disk>> {
        let mut out = vec![Disk::point(ZERO); y.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let (_, end) = part.block_of(i);
            let mut acc = Disk::point(ZERO);
            for k in i..end {
                let a = m.get(i, k);
                if a != ZERO {
                    acc = pol.add(acc, pol.mul_point(y[k], a)?)?;
                }
            }
            *o = acc;
        }
        Ok(out)
    }
}

impl LambdaSolve for BlockSolve<'_> {
    fn solve_point(&self, rhs: &PMatrix) -> Result<PMatrix> {
        Ok(self.solve_interval(&IMatrix::from_point(rhs.clone()))?.mid().clone())
    }

    fn solve_interval(&self, rhs: &IMatrix) -> Result<IMatrix> {
        let pol = RoundingPolicy::default();
        let (m, n) = (rhs.rows(), rhs.cols());
        let smax = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.db.get(j, j) * self.da.get(i, i) + self.dd.get(j, j) * self.dc.get(i, i)).norm())
            .fold(0.0, f64::max);
        let mut out = IMatrix::zeros(m, n);
        for (p, q) in self.cols.ranges() {
            let mut ga: Vec<Vec<Disk>> = vec![Vec::new(); q - p];
            let mut gc: Vec<Vec<Disk>> = vec![Vec::new(); q - p];
            for c in (p..q).rev() {
                let mut t: Vec<Disk> = (0..m).map(|i| rhs.get(i, c)).collect();
                for c2 in c + 1..q {
                    let (beta, delta) = (self.db.get(c2, c), self.dd.get(c2, c));
                    for i in 0..m {
                        let mut s = t[i];
                        if beta != ZERO {
                            s = pol.sub(s, pol.mul_point(ga[c2 - p][i], beta)?)?;
                        }
                        if delta != ZERO {
                            s = pol.sub(s, pol.mul_point(gc[c2 - p][i], delta)?)?;
                        }
                        t[i] = s;
                    }
                }
                let (beta, delta) = (self.db.get(c, c), self.dd.get(c, c));
                let coef = |i: usize, k: usize| -> Result<Disk> {
                    let a = pol.mul_point(Disk::point(self.da.get(i, k)), beta)?;
                    let b = pol.mul_point(Disk::point(self.dc.get(i, k)), delta)?;
                    pol.add(a, b)
                };
                let mut y = vec![Disk::point(ZERO); m];
                for i in (0..m).rev() {
                    let (_, end) = self.rows.block_of(i);
                    let mut acc = t[i];
                    for k in i + 1..end {
                        if self.da.get(i, k) != ZERO || self.dc.get(i, k) != ZERO {
                            acc = pol.sub(acc, pol.mul(coef(i, k)?, y[k])?)?;
                        }
                    }
                    let piv = coef(i, i)?;
                    if !(piv.mid.norm() >= SINGULAR_THRESHOLD * smax) {
                        return Err(Error::SingularPreconditionerBlock);
                    }
                    y[i] = pol.div(acc, piv).map_err(|_| Error::SingularPreconditionerBlock)?;
                }
                if c > p {
                    ga[c - p] = Self::tri_apply(&pol, self.da, self.rows, &y)?;
                    gc[c - p] = Self::tri_apply(&pol, self.dc, self.rows, &y)?;
                }
                for (i, d) in y.into_iter().enumerate() {
                    out.set(i, c, d);
                }
            }
        }
        Ok(out)
    }

    fn bound_abs(&self, v: &RMatrix) -> Result<RMatrix> {
        let rhs = IMatrix::new(PMatrix::zeros(v.rows(), v.cols()), v.clone())?;
        Ok(self.solve_interval(&rhs)?.mag())
    }
}

/// Block preconditioned system together with its forms.
#[derive(Debug, Clone)]
pub struct BlockPrecond {
    pub ps: PrecondSystem,
    pub form: BlockDiagForm,
    pub rows: Partition,
    pub cols: Partition,
}

impl BlockPrecond {
    pub(crate) fn solver(&self) -> BlockSolve<'_> {
        BlockSolve {
            da: &self.form.da,
            db: &self.form.db,
            dc: &self.form.dc,
            dd: &self.form.dd,
            rows: &self.rows,
            cols: &self.cols,
        }
    }
}

fn off_pattern_mass(x: &PMatrix, keep: impl Fn(usize, usize) -> bool, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let worst = (0..x.rows())
        .map(|i| (0..x.cols()).filter(|&j| !keep(i, j)).map(|j| x.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max);
    worst / scale
}

/// Block analogue of [`crate::precond::transform_enclose`].
pub fn transform_block(sys: &System, max_cond: f64) -> Result<BlockPrecond> {
    sys.validate()?;
    let [ac, bc, cc, dc_mat, _] = sys.midpoints();
    let left = block_diagonalize(&pencil_basis(&ac, &cc)?, max_cond)?;
    let right = block_diagonalize(&pencil_basis(&bc.transpose(), &dc_mat.transpose())?, max_cond)?;
    let (u, uinv) = (left.u, left.uinv);
    let (v, vinv) = (right.uinv.transpose(), right.u.transpose());
    let uinv_enc = verified_inverse(&u, &uinv)?.ok_or(Error::SingularMatrix)?;
    let vinv_enc = verified_inverse(&v, &vinv)?.ok_or(Error::SingularMatrix)?;
    let rows = left.partition;
    let cols = right.partition;

    let raw_a = conjugate(&uinv_enc, &sys.a, &u)?;
    let raw_c = conjugate(&uinv_enc, &sys.c, &u)?;
    let raw_b = conjugate(&vinv_enc, &sys.b, &v)?;
    let raw_d = conjugate(&vinv_enc, &sys.d, &v)?;
    let fp = conjugate(&uinv_enc, &sys.f, &v)?;
    let upper = |i: usize, j: usize| j >= i && rows.same_block(i, j);
    let lower = |i: usize, j: usize| i >= j && cols.same_block(i, j);
    let ap = absorb_pattern(&raw_a, upper, None);
    let cp = absorb_pattern(&raw_c, upper, None);
    let bp = absorb_pattern(&raw_b, lower, None);
    let dp = absorb_pattern(&raw_d, lower, None);
    let (da, db, dc, dd) = (ap.mid().diag(), bp.mid().diag(), cp.mid().diag(), dp.mid().diag());
    let (s, s_err) = build_s_with_error(&da, &db, &dc, &dd).map_err(|e| match e {
        Error::SingularPreconditioner => Error::SingularPreconditionerBlock,
        e => e,
    })?;

    let offdiag_mass = OffdiagMass {
        a: off_pattern_mass(raw_a.mid(), upper, ac.norm_inf()),
        b: off_pattern_mass(raw_b.mid(), lower, bc.norm_inf()),
        c: off_pattern_mass(raw_c.mid(), upper, cc.norm_inf()),
        d: off_pattern_mass(raw_d.mid(), lower, dc_mat.norm_inf()),
    };
    let cond = |x: &PMatrix, y: &PMatrix| x.norm_inf() * y.norm_inf();
    let form = BlockDiagForm {
        u: u.clone(),
        uinv: uinv.clone(),
        v: v.clone(),
        vinv: vinv.clone(),
        da: ap.mid().clone(),
        dc: cp.mid().clone(),
        db: bp.mid().clone(),
        dd: dp.mid().clone(),
        a_sizes: rows.sizes().to_vec(),
        b_sizes: cols.sizes().to_vec(),
        cond_bound: cond(&u, &uinv).max(cond(&v, &vinv)),
    };
    let ps = PrecondSystem {
        ap,
        bp,
        cp,
        dp,
        fp,
        u,
        uinv,
        v,
        vinv,
        uinv_enc,
        vinv_enc,
        da,
        db,
        dc,
        dd,
        s,
        s_err,
        offdiag_mass,
        commutator_ac: ac.matmul(&cc)?.sub(&cc.matmul(&ac)?)?.norm_fro(),
        commutator_bd: bc.matmul(&dc_mat)?.sub(&dc_mat.matmul(&bc)?)?.norm_fro(),
        warnings: Vec::new(),
        real: sys.is_real(),
    };
    Ok(BlockPrecond { ps, form, rows, cols })
}

/// Interval back substitution `vec(Z) = Lambda^-1 vec(rhs)`.
pub fn interval_back_substitute(bp: &BlockPrecond, rhs: &IMatrix) -> Result<IMatrix> {
    bp.solver().solve_interval(rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOptions {
    pub max_cond: f64,
    pub kmax: usize,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self {
            max_cond: DEFAULT_MAX_COND,
            kmax: DEFAULT_KMAX,
        }
    }
}

/// Modified Krawczyk method on an already block-preconditioned system.
pub fn mkw_block_solve_preconditioned(bp: &BlockPrecond, kmax: usize) -> Result<Enclosure> {
    let run = krawczyk_loop(&bp.ps, &bp.solver(), kmax)?;
    finish(Method::Blk, &bp.ps, run)
}

pub fn mkw_block_solve_with(sys: &System, opts: &BlockOptions) -> Result<Enclosure> {
    let bp = match transform_block(sys, opts.max_cond) {
        Ok(bp) => bp,
        Err(Error::SingularMatrix) => {
            return Ok(Enclosure::failed(
                Method::Blk,
                sys.m(),
                sys.n(),
                0,
                "block transformation could not be verified invertible",
            ))
        }
        Err(e) => return Err(e),
    };
    mkw_block_solve_preconditioned(&bp, opts.kmax)
}

/// Block-diagonal modified Krawczyk method with default options.
pub fn mkw_block_solve(sys: &System) -> Result<Enclosure> {
    mkw_block_solve_with(sys, &BlockOptions::default())
}
