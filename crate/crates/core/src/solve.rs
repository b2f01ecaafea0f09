//! Single entry point over all enclosure methods.

use crate::baseline::{full_krawczyk_solve, BaselineOptions, DEFAULT_CAP};
use crate::blockdiag::{mkw_block_solve_with, BlockOptions, DEFAULT_MAX_COND};
use crate::enclosure::{Enclosure, Method};
use crate::error::{Error, Result};
use crate::itr::{itr_solve, ItrOptions};
use crate::mkw::{mkw_solve_with, MkwOptions, DEFAULT_KMAX};
use crate::system::System;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub kmax: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub baseline_cap: usize,
    pub max_cond: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            kmax: DEFAULT_KMAX,
            tol: 1e-12,
            max_iter: 100,
            baseline_cap: DEFAULT_CAP,
            max_cond: DEFAULT_MAX_COND,
        }
    }
}

/// Runs `method` on `sys`. Failures to verify come back as an unverified
/// [`Enclosure`]; an ITR run without a starting box is reported the same way.
pub fn solve(sys: &System, method: Method, opts: &SolveOptions) -> Result<Enclosure> {
    match method {
        Method::Mkw => mkw_solve_with(sys, &MkwOptions { kmax: opts.kmax }),
        Method::Itr => {
            let itr_opts = ItrOptions {
                tol: opts.tol,
                max_iter: opts.max_iter,
                y0: None,
                kmax: opts.kmax,
            };
            match itr_solve(sys, &itr_opts) {
                Err(Error::NoInitialEnclosure) => Ok(Enclosure::failed(
                    Method::Itr,
                    sys.m(),
                    sys.n(),
                    0,
                    Error::NoInitialEnclosure.to_string(),
                )),
                other => other,
            }
        }
        Method::Ver => full_krawczyk_solve(
            sys,
            &BaselineOptions {
                cap: opts.baseline_cap,
                kmax: opts.kmax,
            },
        ),
        Method::Blk => mkw_block_solve_with(
            sys,
            &BlockOptions {
                max_cond: opts.max_cond,
                kmax: opts.kmax,
            },
        ),
    }
}
