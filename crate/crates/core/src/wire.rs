//! JSON wire schema for matrices, states, and channels.
//!
//! A matrix travels as `{"dim": n, "re": [[...]], "im": [[...]]}` with
//! row-major nested arrays. Channels are a list of such documents under
//! `"kraus"`. Round trips preserve values to full f64 fidelity (serde_json
//! prints shortest-round-trip decimals).

use crate::error::{Error, Result};
use crate::matrix::HermitianOperator;
use crate::states::{DensityState, QuantumChannel};
use crate::{CMatrix, C64};
use serde::{Deserialize, Serialize};

/// Wire form of one complex matrix.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixDoc {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let re = (0..rows)
            .map(|i| (0..cols).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..rows)
            .map(|i| (0..cols).map(|j| m[(i, j)].im).collect())
            .collect();
        Self { dim: rows, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        if rows == 0 || self.im.len() != rows {
            return Err(Error::InvalidParameter(
                "matrix document has inconsistent row counts".into(),
            ));
        }
        let cols = self.re[0].len();
        for r in self.re.iter().chain(self.im.iter()) {
            if r.len() != cols {
                return Err(Error::InvalidParameter(
                    "matrix document has ragged rows".into(),
                ));
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            C64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

impl From<&HermitianOperator> for MatrixDoc {
    fn from(op: &HermitianOperator) -> Self {
        Self::from_matrix(op.matrix())
    }
}

/// Wire form of a channel: its Kraus operators.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChannelDoc {
    pub kraus: Vec<MatrixDoc>,
}

impl ChannelDoc {
    pub fn from_channel(c: &QuantumChannel) -> Self {
        Self {
            kraus: c.kraus().iter().map(MatrixDoc::from_matrix).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = self
            .kraus
            .iter()
            .map(|d| d.to_matrix())
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(kraus)
    }
}

pub fn state_to_doc(state: &DensityState) -> MatrixDoc {
    MatrixDoc::from(state.op())
}

pub fn doc_to_state(doc: &MatrixDoc) -> Result<DensityState> {
    DensityState::new(HermitianOperator::new(doc.to_matrix()?)?)
}

pub fn doc_to_hermitian(doc: &MatrixDoc) -> Result<HermitianOperator> {
    HermitianOperator::new(doc.to_matrix()?)
}
