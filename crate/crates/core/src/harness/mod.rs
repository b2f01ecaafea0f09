//! Generators, metrics, benchmark sweeps and the containment check behind
//! the command line tool.

pub mod bench;
pub mod gen;
pub mod metrics;

use serde::{Deserialize, Serialize};

use crate::baseline::{sample_solutions, SampleMode};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::system::System;

pub use bench::{run_benchmark, BenchConfig, BenchRecord, BenchReport, CellStatus, EXIT_OK, EXIT_UNSOUND, EXIT_UNVERIFIED};
pub use gen::{generate, lehmer, parter, Family, GenSpec};
pub use metrics::{containment_rate, mean_r, ratio};

/// Outcome of sampling member solutions against an enclosure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verified: bool,
    pub samples: usize,
    pub contained: usize,
    /// Member systems skipped as singular.
    pub skipped: usize,
}

impl CheckReport {
    pub fn exit_code(&self) -> i32 {
        if self.verified && self.contained < self.samples {
            EXIT_UNSOUND
        } else if !self.verified {
            EXIT_UNVERIFIED
        } else {
            EXIT_OK
        }
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "containment {}/{}", self.contained, self.samples)?;
        if self.skipped > 0 {
            write!(f, " ({} singular members skipped)", self.skipped)?;
        }
        if !self.verified {
            write!(f, " (enclosure not verified)")?;
        }
        Ok(())
    }
}

/// Samples `count` member solutions, half at vertices, and counts those
/// inside `enc.evaluated`.
pub fn check_enclosure(sys: &System, enc: &Enclosure, count: usize, seed: u64) -> Result<CheckReport> {
    if (enc.rows(), enc.cols()) != (sys.m(), sys.n()) {
        return Err(Error::DimensionMismatch(format!(
            "enclosure is {}x{}, system is {}x{}",
            enc.rows(),
            enc.cols(),
            sys.m(),
            sys.n()
        )));
    }
    let set = sample_solutions(sys, count, SampleMode::Mixed, seed)?;
    let contained = set.solutions.iter().filter(|x| enc.evaluated.contains_point(x)).count();
    Ok(CheckReport {
        verified: enc.verified,
        samples: set.solutions.len(),
        contained,
        skipped: set.skipped,
    })
}
