//! Square complex matrices with a stable JSON wire format.
//!
//! Entries serialize as `[re, im]` pairs in row-major order:
//!
//! ```json
//! {"dim": 2, "entries": [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
//! ```

use ndarray::{Array2, ArrayView2};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::C64;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entry ({row},{col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("matrix must have at least one row")]
    Empty,
}

/// A square matrix over ℂ with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Array2<C64>,
}

impl ComplexMatrix {
    pub fn new(data: Array2<C64>) -> Result<Self, MatrixError> {
        let (rows, cols) = data.dim();
        if rows != cols {
            return Err(MatrixError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(MatrixError::Empty);
        }
        for ((r, c), z) in data.indexed_iter() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(MatrixError::NonFinite { row: r, col: c });
            }
        }
        Ok(Self { data })
    }

    /// Builds from row-major complex rows; all rows must have length `rows.len()`.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut data = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::NotSquare { rows: n, cols: row.len() });
            }
            for (j, z) in row.iter().enumerate() {
                data[(i, j)] = *z;
            }
        }
        Self::new(data)
    }

    /// Builds from real entries (imaginary parts zero).
    pub fn from_real_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self { data: Array2::eye(n) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> ArrayView2<'_, C64> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self { data: crate::linalg::adjoint(&self.data.view()) }
    }
}

// ---- wire format ----

#[derive(Serialize, Deserialize)]
struct Wire {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries = self
            .data
            .rows()
            .into_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        Wire { dim: self.dim(), entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = Wire::deserialize(deserializer)?;
        if wire.entries.len() != wire.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} but {} rows present",
                wire.dim,
                wire.entries.len()
            )));
        }
        let rows = wire
            .entries
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        Self::from_rows(rows).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let m = ComplexMatrix::from_rows(vec![
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, -0.5), C64::new(0.25, 0.0)],
        ])
        .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(ComplexMatrix::new(Array2::zeros((2, 3))).is_err());
        let mut bad = Array2::<C64>::zeros((2, 2));
        bad[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexMatrix::new(bad),
            Err(MatrixError::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn rejects_mismatched_wire_dim() {
        let text = r#"{"dim": 3, "entries": [[[0.0,0.0]]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(text).is_err());
    }
}
