//! Seeded problem generators.
//!
//! Every uniform draw is `ChaCha8Rng::gen::<f64>()`, a value in `[0, 1)`,
//! taken row by row in the order the matrices are listed below.
//!
//! * `kyc31`: `A X B + X = C` with `A1 = 4 rand - 3`, `A2 = A1 + alpha rand`,
//!   `B1 = 3 rand - 2`, `B2 = B1 + alpha rand`, `C1 = 1`, `C2 = C1 + alpha rand`.
//! * `sylvester32`: `A X + X B = C` with the same `A`, `B`, `C`.
//! * `gallery33`: `A X B + C X D = F` with `A1 = parter - 1`,
//!   `A2 = A1 + alpha lehmer`, `C = A + <0, alpha>`, the same for `B` and `D`,
//!   and `F = [lehmer, (1 + alpha) lehmer]`. Needs `m = n` and draws nothing.
//!
//! Inf-sup bounds are converted outward to disks.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::PMatrix;
use crate::error::{Error, Result};
use crate::interval::{Disk, IMatrix};
use crate::round::add_up;
use crate::system::System;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Kyc31,
    Sylvester32,
    Gallery33,
    /// A system read from JSON; nothing to generate.
    Custom,
}

impl Family {
    pub const GENERATED: [Family; 3] = [Family::Kyc31, Family::Sylvester32, Family::Gallery33];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Kyc31 => "kyc31",
            Family::Sylvester32 => "sylvester32",
            Family::Gallery33 => "gallery33",
            Family::Custom => "custom",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kyc31" => Ok(Family::Kyc31),
            "sylvester32" => Ok(Family::Sylvester32),
            "gallery33" => Ok(Family::Gallery33),
            "custom" => Ok(Family::Custom),
            other => Err(Error::InvalidInput(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn square(family: Family, m: usize, alpha: f64, seed: u64) -> Self {
        Self {
            family,
            m,
            n: m,
            alpha,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidInput("sizes must be positive".into()));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be finite and nonnegative".into()));
        }
        if self.family == Family::Custom {
            return Err(Error::InvalidInput("custom systems are read from JSON".into()));
        }
        if self.family == Family::Gallery33 && self.m != self.n {
            return Err(Error::InvalidInput("gallery33 needs m = n".into()));
        }
        Ok(())
    }
}

/// `parter(m)_ij = 1 / (i - j + 1/2)`.
pub fn parter(m: usize) -> PMatrix {
    PMatrix::from_fn(m, m, |i, j| Complex64::new(1.0 / (i as f64 - j as f64 + 0.5), 0.0))
}

/// `lehmer(m)_ij = min(i, j) / max(i, j)` with one-based indices.
pub fn lehmer(m: usize) -> PMatrix {
    PMatrix::from_fn(m, m, |i, j| {
        let (a, b) = ((i + 1) as f64, (j + 1) as f64);
        Complex64::new(a.min(b) / a.max(b), 0.0)
    })
}

fn from_bounds(lo: &[f64], hi: &[f64], rows: usize, cols: usize) -> Result<IMatrix> {
    let disks = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| Disk::from_inf_sup(a, b))
        .collect::<Result<Vec<_>>>()?;
    IMatrix::from_disks(rows, cols, &disks)
}

/// `lo = scale rand + shift`, `hi = lo + alpha rand`.
fn random_pair(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64, shift: f64, alpha: f64) -> Result<IMatrix> {
    let lo: Vec<f64> = (0..rows * cols).map(|_| scale * rng.gen::<f64>() + shift).collect();
    let hi: Vec<f64> = lo.iter().map(|&a| a + alpha * rng.gen::<f64>()).collect();
    from_bounds(&lo, &hi, rows, cols)
}

fn ones_pair(rng: &mut ChaCha8Rng, rows: usize, cols: usize, alpha: f64) -> Result<IMatrix> {
    let lo = vec![1.0; rows * cols];
    let hi: Vec<f64> = lo.iter().map(|&a| a + alpha * rng.gen::<f64>()).collect();
    from_bounds(&lo, &hi, rows, cols)
}

fn gallery_pair(m: usize, alpha: f64) -> Result<(IMatrix, IMatrix)> {
    let p = parter(m);
    let l = lehmer(m);
    let lo: Vec<f64> = p.data().iter().map(|z| z.re - 1.0).collect();
    let hi: Vec<f64> = lo.iter().zip(l.data()).map(|(&a, z)| a + alpha * z.re).collect();
    let x = from_bounds(&lo, &hi, m, m)?;
    let widened = IMatrix::from_fn(m, m, |i, j| {
        let d = x.get(i, j);
        Disk::real(d.mid.re, add_up(d.rad, alpha))
    });
    Ok((x, widened))
}

/// Builds the system described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<System> {
    spec.validate()?;
    let (m, n, alpha) = (spec.m, spec.n, spec.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.family {
        Family::Kyc31 | Family::Sylvester32 => {
            let a = random_pair(&mut rng, m, m, 4.0, -3.0, alpha)?;
            let b = random_pair(&mut rng, n, n, 3.0, -2.0, alpha)?;
            let rhs = ones_pair(&mut rng, m, n, alpha)?;
            if spec.family == Family::Kyc31 {
                System::new(a, b, IMatrix::identity(m), IMatrix::identity(n), rhs)
            } else {
                System::new(a, IMatrix::identity(n), IMatrix::identity(m), b, rhs)
            }
        }
        Family::Custom => unreachable!("rejected by validate"),
        Family::Gallery33 => {
            let (a, c) = gallery_pair(m, alpha)?;
            let (b, d) = gallery_pair(n, alpha)?;
            let l = lehmer(m);
            let lo: Vec<f64> = l.data().iter().map(|z| z.re).collect();
            let hi: Vec<f64> = lo.iter().map(|&v| v + alpha * v).collect();
            System::new(a, b, c, d, from_bounds(&lo, &hi, m, n)?)
        }
    }
}
