//! Interchange format `{"dim": d, "re": [..], "im": [..]}`, row-major.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::SquareMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn to_matrix<T: Real>(&self) -> Result<SquareMatrix<T>> {
        if self.re.len() != self.im.len() {
            return Err(Error::DimensionMismatch(format!(
                "re has {} entries but im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        let data = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| Complex::new(T::lit(*r), T::lit(*i)))
            .collect();
        SquareMatrix::from_row_major(self.dim, data)
    }
}

impl<T: Real> From<&SquareMatrix<T>> for MatrixJson {
    fn from(m: &SquareMatrix<T>) -> Self {
        Self {
            dim: m.dim(),
            re: m.as_slice().iter().map(|z| z.re.as_f64()).collect(),
            im: m.as_slice().iter().map(|z| z.im.as_f64()).collect(),
        }
    }
}

impl<T: Real> Serialize for SquareMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for SquareMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(d)?
            .to_matrix()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn round_trip() {
        let m = SquareMatrix::<f64>::from_fn(2, |i, j| cx(i as f64, j as f64 - 0.5));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"re":[0.0,0.0,1.0,1.0],"im":[-0.5,0.5,-0.5,0.5]}"#);
        let back: SquareMatrix<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_shape() {
        let r: std::result::Result<SquareMatrix<f64>, _> =
            serde_json::from_str(r#"{"dim":2,"re":[1,2,3],"im":[0,0,0]}"#);
        assert!(r.is_err());
    }
}
