//! Matrix JSON: `{"n": 2, "field": "real", "data": [..row-major..]}` with complex
//! entries written as `[re, im]`. Nested rows are accepted on input.

use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, SpdMatrix, C64, DEFAULT_HERM_TOL};
use super::ScalarField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixData {
    Flat(Vec<Entry>),
    Rows(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub field: ScalarField,
    pub data: MatrixData,
}

impl MatrixJson {
    /// Writes `field: "real"` exactly when every imaginary part is zero.
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let real = m.iter().all(|z| z.im == 0.0);
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                data.push(if real { Entry::Real(z.re) } else { Entry::Complex([z.re, z.im]) });
            }
        }
        MatrixJson { n, field: if real { ScalarField::Real } else { ScalarField::Complex }, data: MatrixData::Flat(data) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Format("matrix dimension must be positive".into()));
        }
        let flat: Vec<Entry> = match &self.data {
            // For n = 2 a row of two reals also parses as one complex entry.
            MatrixData::Flat(v) if n == 2 && v.len() == 2 && v.iter().all(|e| matches!(e, Entry::Complex(_))) => v
                .iter()
                .flat_map(|e| match e {
                    Entry::Complex([x, y]) => [Entry::Real(*x), Entry::Real(*y)],
                    Entry::Real(_) => unreachable!(),
                })
                .collect(),
            MatrixData::Flat(v) => v.clone(),
            MatrixData::Rows(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Format(format!("expected {n} rows of {n} entries")));
                }
                rows.iter().flatten().copied().collect()
            }
        };
        if flat.len() != n * n {
            return Err(Error::Format(format!("expected {} entries, found {}", n * n, flat.len())));
        }
        let mut out = CMatrix::zeros(n, n);
        for (idx, e) in flat.iter().enumerate() {
            out[(idx / n, idx % n)] = match (self.field, e) {
                (_, Entry::Real(x)) => C64::from(*x),
                (ScalarField::Complex, Entry::Complex([re, im])) => C64::new(*re, *im),
                (ScalarField::Real, Entry::Complex(_)) => return Err(Error::Format("complex entry in a real matrix".into())),
            };
        }
        Ok(out)
    }

    pub fn to_spd(&self) -> Result<SpdMatrix> {
        SpdMatrix::new(self.to_matrix()?, DEFAULT_HERM_TOL)
    }
}

impl Serialize for SpdMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpdMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(d)?.to_spd().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip() {
        let a = SpdMatrix::from_real_rows(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"n":2,"field":"real","data":[2.0,1.0,1.0,3.0]}"#);
        let b: SpdMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn complex_entries_and_nested_rows() {
        let s = r#"{"n":2,"field":"complex","data":[[[2,0],[0,1]],[[0,-1],[2,0]]]}"#;
        let a: SpdMatrix = serde_json::from_str(s).unwrap();
        assert_eq!(a.matrix()[(0, 1)], C64::new(0.0, 1.0));
        let out = serde_json::to_value(&a).unwrap();
        assert_eq!(out["field"], "complex");
        assert_eq!(out["data"][1], serde_json::json!([0.0, 1.0]));
    }

    #[test]
    fn nested_real_rows_of_two() {
        let a: SpdMatrix = serde_json::from_str(r#"{"n":2,"field":"real","data":[[2,1],[1,3]]}"#).unwrap();
        assert_eq!(a.matrix(), SpdMatrix::from_real_rows(2, &[2.0, 1.0, 1.0, 3.0]).unwrap().matrix());
        let b: SpdMatrix = serde_json::from_str(r#"{"n":2,"field":"complex","data":[[2,1],[1,3]]}"#).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn malformed_inputs() {
        for s in [
            r#"{"n":2,"field":"real","data":[1,0,0]}"#,
            r#"{"n":2,"field":"real","data":[[1,0],[0]]}"#,
            r#"{"n":1,"field":"real","data":[[1,2]]}"#,
            r#"{"n":2,"field":"real","data":[1,5,0,1]}"#,
            r#"{"n":2,"field":"quaternion","data":[1,0,0,1]}"#,
            r#"{"n":2,"field":"real","data":[1,0,0,"#,
        ] {
            assert!(serde_json::from_str::<SpdMatrix>(s).is_err(), "{s}");
        }
    }
}
