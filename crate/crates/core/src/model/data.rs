use nalgebra::{DMatrix, DVector};

use crate::error::{AsprError, Result};

/// Outcomes and predictors for one analysis. Predictors are stored centered;
/// the column means removed at construction are kept in `x_offsets`.
#[derive(Debug, Clone)]
pub struct AsprData {
    y: DMatrix<f64>,
    x: DMatrix<f64>,
    outcome_names: Vec<String>,
    predictor_names: Vec<String>,
    x_offsets: DVector<f64>,
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Err(AsprError::Data(format!(
                    "{what} has a non-finite value at row {}, column {}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

impl AsprData {
    pub fn new(
        y: DMatrix<f64>,
        x_raw: DMatrix<f64>,
        outcome_names: Vec<String>,
        predictor_names: Vec<String>,
    ) -> Result<Self> {
        if y.nrows() != x_raw.nrows() {
            return Err(AsprError::dim(format!(
                "outcomes have {} rows, predictors {}",
                y.nrows(),
                x_raw.nrows()
            )));
        }
        if outcome_names.len() != y.ncols() || predictor_names.len() != x_raw.ncols() {
            return Err(AsprError::dim("column names do not match matrix widths"));
        }
        if y.ncols() == 0 || y.nrows() == 0 {
            return Err(AsprError::Data(
                "need at least one outcome and one subject".into(),
            ));
        }
        check_finite(&y, "outcomes")?;
        check_finite(&x_raw, "predictors")?;
        let offsets = if x_raw.ncols() == 0 {
            DVector::zeros(0)
        } else {
            x_raw.row_mean().transpose()
        };
        let mut x = x_raw;
        for j in 0..x.ncols() {
            let m = offsets[j];
            x.column_mut(j).add_scalar_mut(-m);
        }
        Ok(AsprData {
            y,
            x,
            outcome_names,
            predictor_names,
            x_offsets: offsets,
        })
    }

    /// Unnamed columns get `y1.., x1..`.
    pub fn from_matrices(y: DMatrix<f64>, x_raw: DMatrix<f64>) -> Result<Self> {
        let on = (1..=y.ncols()).map(|k| format!("y{k}")).collect();
        let pn = (1..=x_raw.ncols()).map(|k| format!("x{k}")).collect();
        Self::new(y, x_raw, on, pn)
    }

    /// Same predictors, new outcomes.
    pub fn with_outcomes(&self, y: DMatrix<f64>) -> Result<Self> {
        if y.nrows() != self.n() || y.ncols() != self.s() {
            return Err(AsprError::dim("replacement outcomes have the wrong shape"));
        }
        check_finite(&y, "outcomes")?;
        Ok(AsprData { y, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn s(&self) -> usize {
        self.y.ncols()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// Centered predictors.
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn x_offsets(&self) -> &DVector<f64> {
        &self.x_offsets
    }

    pub fn outcome_names(&self) -> &[String] {
        &self.outcome_names
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    pub fn y_row(&self, i: usize) -> Vec<f64> {
        self.y.row(i).iter().copied().collect()
    }

    /// Predictors on their original (uncentered) scale.
    pub fn x_raw(&self) -> DMatrix<f64> {
        let mut x = self.x.clone();
        for j in 0..x.ncols() {
            let m = self.x_offsets[j];
            x.column_mut(j).add_scalar_mut(m);
        }
        x
    }
}

/// Appends product columns `a*b` for each named pair of raw predictors.
pub fn add_interactions(
    x_raw: &DMatrix<f64>,
    names: &[String],
    pairs: &[(String, String)],
) -> Result<(DMatrix<f64>, Vec<String>)> {
    let index = |name: &str| {
        names.iter().position(|n| n == name).ok_or_else(|| {
            AsprError::Data(format!("interaction references unknown predictor '{name}'"))
        })
    };
    let n = x_raw.nrows();
    let p = x_raw.ncols();
    let mut out = x_raw.clone().resize_horizontally(p + pairs.len(), 0.0);
    let mut out_names = names.to_vec();
    for (k, (a, b)) in pairs.iter().enumerate() {
        let (ia, ib) = (index(a)?, index(b)?);
        for i in 0..n {
            out[(i, p + k)] = x_raw[(i, ia)] * x_raw[(i, ib)];
        }
        out_names.push(format!("{a}*{b}"));
    }
    Ok((out, out_names))
}
