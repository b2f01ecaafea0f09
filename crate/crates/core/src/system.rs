use serde::{Deserialize, Serialize};

use crate::dense::PMatrix;
use crate::error::{Error, Result};
use crate::interval::IMatrix;

/// Interval equation `A X B + C X D = F` with `X` of size `m x n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    #[serde(rename = "A")]
    pub a: IMatrix,
    #[serde(rename = "B")]
    pub b: IMatrix,
    #[serde(rename = "C")]
    pub c: IMatrix,
    #[serde(rename = "D")]
    pub d: IMatrix,
    #[serde(rename = "F")]
    pub f: IMatrix,
}

impl System {
    pub fn new(a: IMatrix, b: IMatrix, c: IMatrix, d: IMatrix, f: IMatrix) -> Result<Self> {
        let sys = Self { a, b, c, d, f };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.a.rows();
        let n = self.b.rows();
        let square = |x: &IMatrix, k: usize, name: &str| -> Result<()> {
            if x.rows() != k || x.cols() != k {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {k}x{k}",
                    x.rows(),
                    x.cols()
                )));
            }
            Ok(())
        };
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch("empty system".into()));
        }
        square(&self.a, m, "A")?;
        square(&self.c, m, "C")?;
        square(&self.b, n, "B")?;
        square(&self.d, n, "D")?;
        if self.f.rows() != m || self.f.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "F is {}x{}, expected {m}x{n}",
                self.f.rows(),
                self.f.cols()
            )));
        }
        Ok(())
    }

    /// Rows of the unknown.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Columns of the unknown.
    pub fn n(&self) -> usize {
        self.b.rows()
    }

    pub fn is_real(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d, &self.f].iter().all(|x| x.is_real())
    }

    pub fn from_points(a: PMatrix, b: PMatrix, c: PMatrix, d: PMatrix, f: PMatrix) -> Result<Self> {
        Self::new(
            IMatrix::from_point(a),
            IMatrix::from_point(b),
            IMatrix::from_point(c),
            IMatrix::from_point(d),
            IMatrix::from_point(f),
        )
    }

    /// The midpoint system.
    pub fn midpoints(&self) -> [PMatrix; 5] {
        [
            self.a.mid().clone(),
            self.b.mid().clone(),
            self.c.mid().clone(),
            self.d.mid().clone(),
            self.f.mid().clone(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Disk;

    fn scalar(v: f64, r: f64) -> IMatrix {
        IMatrix::from_fn(1, 1, |_, _| Disk::real(v, r))
    }

    #[test]
    fn shapes_are_checked() {
        let ok = System::new(scalar(2.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(6.0, 0.3));
        assert!(ok.is_ok());
        let bad = System::new(
            scalar(2.0, 0.0),
            scalar(1.0, 0.0),
            IMatrix::zeros(2, 2),
            scalar(1.0, 0.0),
            scalar(6.0, 0.3),
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn json_uses_capital_keys() {
        let sys = System::new(scalar(2.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(1.0, 0.0), scalar(6.0, 0.3))
            .unwrap();
        let text = serde_json::to_string(&sys).unwrap();
        assert!(text.contains("\"A\"") && text.contains("\"F\""));
        let back: System = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sys);
    }
}
