use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::PMatrix;
use crate::error::{Error, Result};
use crate::interval::{im_matmul, IMatrix};

/// Enclosure method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    /// Modified Krawczyk on the spectrally preconditioned system.
    Mkw,
    /// Residual-divide-intersect iteration started from the MKW box.
    Itr,
    /// Standard Krawczyk on the full Kronecker system.
    Ver,
    /// Modified Krawczyk on the block-diagonalized system.
    Blk,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mkw, Method::Itr, Method::Ver, Method::Blk];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mkw => "MKW",
            Method::Itr => "ITR",
            Method::Ver => "VER",
            Method::Blk => "BLK",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mkw" => Ok(Method::Mkw),
            "itr" => Ok(Method::Itr),
            "ver" | "baseline" => Ok(Method::Ver),
            "blk" | "block" => Ok(Method::Blk),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

/// Factored form `U (Xtilde + Xbox) Vinv`. The evaluated enclosure uses the
/// tighter `H` in place of `Xbox` when it is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factored {
    #[serde(rename = "U")]
    pub u: PMatrix,
    #[serde(rename = "Xtilde")]
    pub xtilde: PMatrix,
    #[serde(rename = "Xbox")]
    pub xbox: IMatrix,
    /// Krawczyk image `H`, contained in `Xbox` when verified.
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub image: Option<IMatrix>,
    #[serde(rename = "Vinv")]
    pub vinv: PMatrix,
}

/// Result of an enclosure method.
///
/// When `verified` is false nothing is guaranteed about `evaluated`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub method: Method,
    pub verified: bool,
    pub iterations: usize,
    pub factored: Factored,
    pub evaluated: IMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Enclosure {
    pub fn failed(method: Method, m: usize, n: usize, iterations: usize, message: impl Into<String>) -> Self {
        Self {
            method,
            verified: false,
            iterations,
            factored: Factored {
                u: PMatrix::identity(m),
                xtilde: PMatrix::zeros(m, n),
                xbox: IMatrix::zeros(m, n),
                image: None,
                vinv: PMatrix::identity(n),
            },
            evaluated: IMatrix::zeros(m, n),
            message: Some(message.into()),
        }
    }

    pub fn rows(&self) -> usize {
        self.evaluated.rows()
    }

    pub fn cols(&self) -> usize {
        self.evaluated.cols()
    }

    /// `Xtilde + Xbox`.
    pub fn preconditioned_box(&self) -> Result<IMatrix> {
        IMatrix::from_point(self.factored.xtilde.clone()).add(&self.factored.xbox)
    }
}

/// `U Y Vinv` with a verified enclosure of the inverse, intersected with the
/// real axis for real systems.
pub(crate) fn back_transform(u: &PMatrix, y: &IMatrix, vinv_enc: &IMatrix, real: bool) -> Result<IMatrix> {
    let z = im_matmul(&im_matmul(&IMatrix::from_point(u.clone()), y)?, vinv_enc)?;
    if real {
        z.real_section()
    } else {
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn failed_enclosure_serializes() {
        let e = Enclosure::failed(Method::Mkw, 2, 3, 15, "no outer estimate");
        let text = serde_json::to_string(&e).unwrap();
        assert!(text.contains("\"MKW\"") && text.contains("\"Xbox\""));
        let back: Enclosure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }
}
