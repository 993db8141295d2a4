//! Plain-data forms of matrices and operators for serialization.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator};
use crate::structure::{Ordering, PartyStructure};

/// A complex matrix as real and imaginary row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { dim: m.nrows(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    /// Missing imaginary part means a real matrix.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        let bad = |what: &str| Error::ShapeMismatch(format!("{what} part is not {n}x{n}"));
        if self.re.len() != n || self.re.iter().any(|r| r.len() != n) {
            return Err(bad("real"));
        }
        if !self.im.is_empty() && (self.im.len() != n || self.im.iter().any(|r| r.len() != n)) {
            return Err(bad("imaginary"));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.re[i][j], self.im.get(i).map_or(0.0, |r| r[j]))
        }))
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRecord {
    party_dims: Vec<usize>,
    steps: usize,
    ordering: Ordering,
    matrix: MatrixRecord,
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let s = self.structure();
        OperatorRecord {
            party_dims: s.party_dims().to_vec(),
            steps: s.steps(),
            ordering: s.ordering(),
            matrix: MatrixRecord::from_matrix(self.matrix()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = OperatorRecord::deserialize(deserializer)?;
        let structure = PartyStructure::new(rec.party_dims, rec.steps, rec.ordering).map_err(serde::de::Error::custom)?;
        let matrix = rec.matrix.to_matrix().map_err(serde::de::Error::custom)?;
        HermitianOperator::from_matrix(structure, matrix).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "cmatrix_list")]` for `Vec<CMatrix>`.
pub mod cmatrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(list: &[CMatrix], serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<MatrixRecord> = list.iter().map(MatrixRecord::from_matrix).collect();
        records.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Vec<CMatrix>, D::Error> {
        let records = Vec::<MatrixRecord>::deserialize(deserializer)?;
        records.iter().map(|r| r.to_matrix().map_err(serde::de::Error::custom)).collect()
    }
}

impl Serialize for crate::product::ProductPureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        crate::product::ProductStateRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for crate::product::ProductPureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = crate::product::ProductStateRecord::deserialize(deserializer)?;
        Self::try_from(&rec).map_err(serde::de::Error::custom)
    }
}

impl Serialize for crate::ensemble::Measurement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.operators().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for crate::ensemble::Measurement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let ops = Vec::<HermitianOperator>::deserialize(deserializer)?;
        Self::new(ops).map_err(serde::de::Error::custom)
    }
}
