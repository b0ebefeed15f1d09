use nalgebra::{DMatrix, DVector};

use crate::error::{AsprError, Result};

/// Symmetric positive-definite matrix with its lower Cholesky factor cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_det: f64,
}

const SYMMETRY_RTOL: f64 = 1e-12;

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(AsprError::NotSpd {
                reason: format!("not square ({}x{})", matrix.nrows(), matrix.ncols()),
                matrix,
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(AsprError::NotSpd {
                reason: "non-finite entry".into(),
                matrix,
            });
        }
        let scale = matrix
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let s = matrix.nrows();
        for i in 0..s {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                    return Err(AsprError::NotSpd {
                        reason: format!("asymmetric at ({i},{j})"),
                        matrix,
                    });
                }
            }
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        match sym.clone().cholesky() {
            Some(c) => {
                let chol = c.unpack();
                if (0..s).any(|i| !(chol[(i, i)] > 0.0)) {
                    return Err(AsprError::NotSpd {
                        reason: "zero pivot".into(),
                        matrix,
                    });
                }
                let log_det = 2.0 * (0..s).map(|i| chol[(i, i)].ln()).sum::<f64>();
                Ok(SpdMatrix {
                    matrix: sym,
                    chol,
                    log_det,
                })
            }
            None => Err(AsprError::NotSpd {
                reason: "Cholesky failed".into(),
                matrix,
            }),
        }
    }

    /// Builds from a lower-triangular factor `L`, storing `L Lᵀ`.
    pub fn from_cholesky(chol: DMatrix<f64>) -> Result<Self> {
        let m = &chol * chol.transpose();
        Self::new(m)
    }

    pub fn identity(s: usize) -> Self {
        SpdMatrix {
            matrix: DMatrix::identity(s, s),
            chol: DMatrix::identity(s, s),
            log_det: 0.0,
        }
    }

    pub fn from_row_slice(s: usize, values: &[f64]) -> Result<Self> {
        if values.len() != s * s {
            return Err(AsprError::dim(format!(
                "expected {} entries, got {}",
                s * s,
                values.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(s, s, values))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Solves `L w = v` for the cached lower factor.
    pub fn solve_lower(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol
            .solve_lower_triangular(v)
            .expect("Cholesky diagonal is strictly positive")
    }

    /// Quadratic form `vᵀ M⁻¹ v`.
    pub fn inv_quad(&self, v: &DVector<f64>) -> f64 {
        self.solve_lower(v).norm_squared()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let s = self.dim();
        let linv = self
            .chol
            .solve_lower_triangular(&DMatrix::identity(s, s))
            .expect("Cholesky diagonal is strictly positive");
        linv.transpose() * linv
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.matrix * factor)
    }
}
