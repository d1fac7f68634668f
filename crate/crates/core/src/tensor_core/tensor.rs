//! Dense component arrays with a fixed valence.
//!
//! Components are stored row-major with all upper indices first, then the
//! lower ones.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};

/// Number of upper (contravariant) and lower (covariant) indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Valence {
    pub upper: usize,
    pub lower: usize,
}

impl Valence {
    pub const SCALAR: Valence = Valence { upper: 0, lower: 0 };
    pub const ONE_FORM: Valence = Valence { upper: 0, lower: 1 };
    pub const COVARIANT2: Valence = Valence { upper: 0, lower: 2 };

    pub fn covariant(lower: usize) -> Self {
        Valence { upper: 0, lower }
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }
}

impl std::fmt::Display for Valence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.upper, self.lower)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    valence: Valence,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, valence: Valence) -> Self {
        let len = dim.pow(valence.rank() as u32);
        Tensor { dim, valence, data: vec![0.0; len] }
    }

    pub fn from_data(dim: usize, valence: Valence, data: Vec<f64>) -> Result<Self> {
        let len = dim.pow(valence.rank() as u32);
        if data.len() != len {
            return Err(GeomError::DimensionMismatch { expected: len, found: data.len() });
        }
        Ok(Tensor { dim, valence, data })
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Tensor { dim, valence: Valence::SCALAR, data: vec![value] }
    }

    pub fn one_form(components: &[f64]) -> Self {
        Tensor { dim: components.len(), valence: Valence::ONE_FORM, data: components.to_vec() }
    }

    /// Covariant 2-tensor from a square matrix (entry (i, j) is T_ij).
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = m[(i, j)];
            }
        }
        Tensor { dim, valence: Valence::COVARIANT2, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn rank(&self) -> usize {
        self.valence.rank()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    /// Decompose a flat offset into a multi-index.
    pub fn multi_index(&self, mut offset: usize) -> Vec<usize> {
        let r = self.rank();
        let mut idx = vec![0; r];
        for slot in (0..r).rev() {
            idx[slot] = offset % self.dim;
            offset /= self.dim;
        }
        idx
    }

    pub fn value(&self) -> f64 {
        self.data[0]
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.rank() != 2 {
            return Err(GeomError::ValenceMismatch { expected: "rank 2".into(), found: self.valence.to_string() });
        }
        Ok(DMatrix::from_row_slice(self.dim, self.dim, &self.data))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.valence != other.valence {
            return Err(GeomError::ValenceMismatch {
                expected: self.valence.to_string(),
                found: other.valence.to_string(),
            });
        }
        if self.dim != other.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Tensor) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Tensor) -> Result<Self> {
        self.axpy(1.0, other)
    }

    /// Largest |T_ij - T_ji| for a rank-2 tensor.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rank(), 2, "asymmetry needs rank 2");
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..i {
                worst = worst.max((self.data[i * m + j] - self.data[j * m + i]).abs());
            }
        }
        worst
    }

    /// Contract slot `slot` with the matrix `mat`: T'_{..i..} = sum_j mat[i][j] T_{..j..}.
    pub fn transform_slot(&self, slot: usize, mat: &DMatrix<f64>) -> Self {
        let m = self.dim;
        let r = self.rank();
        let stride = m.pow((r - 1 - slot) as u32);
        let mut out = Tensor::zeros(m, self.valence);
        for off in 0..self.data.len() {
            let i = (off / stride) % m;
            let base = off - i * stride;
            let mut acc = 0.0;
            for j in 0..m {
                acc += mat[(i, j)] * self.data[base + j * stride];
            }
            out.data[off] = acc;
        }
        out
    }

    /// Plain Euclidean contraction of all components.
    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_round_trip() {
        let t = Tensor::zeros(3, Valence { upper: 1, lower: 2 });
        for off in 0..27 {
            assert_eq!(t.offset(&t.multi_index(off)), off);
        }
    }

    #[test]
    fn transform_slot_matches_matrix_product() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let t = Tensor::from_matrix(&a);
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let first = t.transform_slot(0, &p).to_matrix().unwrap();
        assert_eq!(first, &p * &a);
        let second = t.transform_slot(1, &p).to_matrix().unwrap();
        assert_eq!(second, &a * p.transpose());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Tensor::zeros(2, Valence::ONE_FORM);
        let b = Tensor::zeros(2, Valence::COVARIANT2);
        assert!(matches!(a.dot(&b), Err(GeomError::ValenceMismatch { .. })));
    }
}
