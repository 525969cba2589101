//! Dense LU solves with a reciprocal condition estimate.
//!
//! The systems here are at most a few dozen unknowns, so the condition number
//! is computed exactly in the 1-norm from the explicit inverse.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};

#[derive(Debug, Clone)]
pub struct Lu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
    singular: bool,
    norm1: f64,
}

impl Lu {
    /// Gaussian elimination with partial pivoting.
    pub fn factor(a: &Array2<f64>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let m = DMatrix::from_fn(n, n, |r, c| a[[r, c]]);
        let singular = !m.iter().all(|x| x.is_finite());
        let lu = m.lu();
        let singular = singular || !lu.is_invertible();
        Self { lu, n, singular, norm1: norm1(a) }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[f64]) -> Option<Array1<f64>> {
        if self.singular {
            return None;
        }
        let x = self.lu.solve(&nalgebra::DVector::from_column_slice(b))?;
        x.iter().all(|v| v.is_finite()).then(|| Array1::from_iter(x.iter().copied()))
    }

    /// Solves for every column of `b`.
    pub fn solve_matrix(&self, b: &Array2<f64>) -> Option<Array2<f64>> {
        if self.singular {
            return None;
        }
        let rhs = DMatrix::from_fn(b.nrows(), b.ncols(), |r, c| b[[r, c]]);
        let x = self.lu.solve(&rhs)?;
        x.iter()
            .all(|v| v.is_finite())
            .then(|| Array2::from_shape_fn(b.dim(), |(r, c)| x[(r, c)]))
    }

    pub fn inverse(&self) -> Option<Array2<f64>> {
        self.solve_matrix(&Array2::eye(self.n))
    }

    /// `1 / (‖A‖₁ ‖A⁻¹‖₁)`, zero when singular.
    pub fn rcond(&self) -> f64 {
        match self.inverse() {
            Some(inv) if self.norm1 > 0.0 => 1.0 / (self.norm1 * norm1(&inv)),
            _ => 0.0,
        }
    }
}

/// Maximum absolute column sum.
pub fn norm1(a: &Array2<f64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
