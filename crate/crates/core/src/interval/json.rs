//! JSON forms of point and interval matrices.
//!
//! Interval matrices are written as
//! `{"rows":m,"cols":n,"mid_re":[[..]],"mid_im":[[..]],"rad":[[..]]}` with
//! `mid_im` omitted for real data. Input may instead give `{"inf":[[..]],"sup":[[..]]}`,
//! which is converted outward to midpoint-radius form.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Disk, IMatrix};
use crate::dense::{PMatrix, RMatrix};
use crate::error::{Error, Result};

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IMatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid_re: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid_im: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rad: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inf: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup: Option<Rows>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PMatrixJson {
    rows: usize,
    cols: usize,
    re: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Rows>,
}

fn nest(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Rows {
    (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect()
}

fn flatten(name: &str, rows: usize, cols: usize, data: &Rows) -> Result<Vec<f64>> {
    if data.len() != rows || data.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput(format!("field {name} is not {rows}x{cols}")));
    }
    Ok(data.concat())
}

fn shape_of(explicit: (Option<usize>, Option<usize>), data: &Rows) -> (usize, usize) {
    let rows = explicit.0.unwrap_or(data.len());
    let cols = explicit.1.unwrap_or_else(|| data.first().map_or(0, Vec::len));
    (rows, cols)
}

impl From<&IMatrix> for IMatrixJson {
    fn from(m: &IMatrix) -> Self {
        let (r, c) = (m.rows(), m.cols());
        Self {
            rows: Some(r),
            cols: Some(c),
            mid_re: Some(nest(r, c, |i, j| m.mid().get(i, j).re)),
            mid_im: (!m.is_real()).then(|| nest(r, c, |i, j| m.mid().get(i, j).im)),
            rad: Some(nest(r, c, |i, j| m.rad().get(i, j))),
            inf: None,
            sup: None,
        }
    }
}

impl TryFrom<IMatrixJson> for IMatrix {
    type Error = Error;

    fn try_from(j: IMatrixJson) -> Result<Self> {
        if let (Some(inf), Some(sup)) = (&j.inf, &j.sup) {
            if j.mid_re.is_some() {
                return Err(Error::InvalidInput("give either mid/rad or inf/sup, not both".into()));
            }
            let (r, c) = shape_of((j.rows, j.cols), inf);
            let lo = flatten("inf", r, c, inf)?;
            let hi = flatten("sup", r, c, sup)?;
            let disks = lo
                .iter()
                .zip(&hi)
                .map(|(&a, &b)| Disk::from_inf_sup(a, b))
                .collect::<Result<Vec<_>>>()?;
            return IMatrix::from_disks(r, c, &disks);
        }
        let mid_re = j
            .mid_re
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("missing mid_re (or inf/sup)".into()))?;
        let (r, c) = shape_of((j.rows, j.cols), mid_re);
        let re = flatten("mid_re", r, c, mid_re)?;
        let im = match &j.mid_im {
            Some(im) => flatten("mid_im", r, c, im)?,
            None => vec![0.0; r * c],
        };
        let rad = match &j.rad {
            Some(rad) => flatten("rad", r, c, rad)?,
            None => vec![0.0; r * c],
        };
        let mid = PMatrix::new(r, c, re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect())?;
        IMatrix::new(mid, RMatrix::new(r, c, rad)?)
    }
}

impl Serialize for IMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = IMatrixJson::deserialize(d)?;
        IMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl Serialize for PMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (r, c) = (self.rows(), self.cols());
        PMatrixJson {
            rows: r,
            cols: c,
            re: nest(r, c, |i, j| self.get(i, j).re),
            im: (!self.is_real()).then(|| nest(r, c, |i, j| self.get(i, j).im)),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PMatrixJson::deserialize(d)?;
        let build = || -> Result<PMatrix> {
            let re = flatten("re", j.rows, j.cols, &j.re)?;
            let im = match &j.im {
                Some(im) => flatten("im", j.rows, j.cols, im)?,
                None => vec![0.0; re.len()],
            };
            PMatrix::new(j.rows, j.cols, re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect())
        };
        build().map_err(serde::de::Error::custom)
    }
}
