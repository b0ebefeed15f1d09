use nalgebra::DMatrix;

use crate::error::{AsprError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Adverse when the outcome is below the threshold.
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cutoff {
    pub outcome: usize,
    pub threshold: f64,
    pub direction: Direction,
}

impl Cutoff {
    pub fn violated(&self, value: f64) -> bool {
        match self.direction {
            Direction::Below => value < self.threshold,
            Direction::Above => value > self.threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    /// Adverse if any cutoff is violated.
    #[default]
    Union,
    /// Adverse only if every cutoff is violated.
    Intersection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffRule {
    pub cutoffs: Vec<Cutoff>,
    pub combine: Combine,
}

impl CutoffRule {
    /// Parses `"gest<259,bw<2500"`; names are resolved against `outcome_names`.
    pub fn parse(text: &str, outcome_names: &[String], combine: Combine) -> Result<Self> {
        let mut cutoffs = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (pos, direction) = match (part.find('<'), part.find('>')) {
                (Some(i), None) => (i, Direction::Below),
                (None, Some(i)) => (i, Direction::Above),
                _ => {
                    return Err(AsprError::Parse(format!(
                        "cutoff '{part}' needs exactly one '<' or '>'"
                    )))
                }
            };
            let name = part[..pos].trim();
            let outcome = outcome_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| {
                    AsprError::Parse(format!("cutoff names unknown outcome '{name}'"))
                })?;
            let threshold: f64 = part[pos + 1..].trim().parse().map_err(|_| {
                AsprError::Parse(format!("cutoff '{part}' has a non-numeric threshold"))
            })?;
            cutoffs.push(Cutoff {
                outcome,
                threshold,
                direction,
            });
        }
        if cutoffs.is_empty() {
            return Err(AsprError::Parse("no cutoffs given".into()));
        }
        Ok(CutoffRule { cutoffs, combine })
    }
}

pub fn dichotomize_cutoff(y: &DMatrix<f64>, rule: &CutoffRule) -> Result<Vec<bool>> {
    if rule.cutoffs.is_empty() {
        return Err(AsprError::param("cutoff rule is empty"));
    }
    if let Some(c) = rule.cutoffs.iter().find(|c| c.outcome >= y.ncols()) {
        return Err(AsprError::dim(format!(
            "cutoff refers to outcome {} of {}",
            c.outcome + 1,
            y.ncols()
        )));
    }
    Ok((0..y.nrows())
        .map(|i| {
            let mut hits = rule.cutoffs.iter().map(|c| c.violated(y[(i, c.outcome)]));
            match rule.combine {
                Combine::Union => hits.any(|h| h),
                Combine::Intersection => hits.all(|h| h),
            }
        })
        .collect())
}
