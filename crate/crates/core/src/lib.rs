pub mod baseline;
pub mod blockdiag;
pub mod dense;
pub mod enclosure;
pub mod error;
pub mod harness;
pub mod interval;
pub mod itr;
pub mod mkw;
pub mod precond;
pub mod round;
pub mod solve;
pub mod system;

pub use enclosure::{Enclosure, Method};
pub use error::{Error, Result};
pub use system::System;
pub use solve::{solve, SolveOptions};
