//! The six model families and their basis expansions.
//!
//! Every family is linear in its coefficients: a row of features is mapped to a
//! basis vector `[1, z1, .., zk]` and the model value is the dot product of that
//! vector with the coefficients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest accepted polynomial order.
pub const MAX_ORDER: u32 = 10;

/// Polynomial order used when the caller does not pick one.
pub const DEFAULT_ORDER: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    #[serde(rename = "simple")]
    SimpleLinear,
    #[serde(rename = "multiple")]
    MultipleLinear,
    Polynomial,
    Logarithmic,
    Exponential,
    Sinusoidal,
}

impl ModelFamily {
    /// All families in tie-break precedence order.
    pub const ALL: [ModelFamily; 6] = [
        ModelFamily::SimpleLinear,
        ModelFamily::MultipleLinear,
        ModelFamily::Polynomial,
        ModelFamily::Logarithmic,
        ModelFamily::Exponential,
        ModelFamily::Sinusoidal,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ModelFamily::SimpleLinear => "simple",
            ModelFamily::MultipleLinear => "multiple",
            ModelFamily::Polynomial => "polynomial",
            ModelFamily::Logarithmic => "logarithmic",
            ModelFamily::Exponential => "exponential",
            ModelFamily::Sinusoidal => "sinusoidal",
        }
    }

    /// Families that only look at the first selected feature.
    pub fn is_single_variable(self) -> bool {
        matches!(
            self,
            ModelFamily::SimpleLinear | ModelFamily::Polynomial | ModelFamily::Sinusoidal
        )
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFamily(pub String);

impl fmt::Display for UnknownFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown model family `{}`", self.0)
    }
}

impl std::error::Error for UnknownFamily {}

impl FromStr for ModelFamily {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelFamily::ALL
            .into_iter()
            .find(|f| f.token() == s)
            .ok_or_else(|| UnknownFamily(s.to_owned()))
    }
}

/// A family together with the polynomial order (ignored by other families).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyConfig {
    family: ModelFamily,
    order: u32,
}

impl FamilyConfig {
    pub fn new(family: ModelFamily, order: u32) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidOrder(order));
        }
        Ok(Self { family, order })
    }

    /// Shorthand for families where the order does not matter.
    pub fn of(family: ModelFamily) -> Self {
        Self {
            family,
            order: DEFAULT_ORDER,
        }
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Number of basis functions, intercept included.
    pub fn basis_dimension(&self, feature_count: usize) -> usize {
        match self.family {
            ModelFamily::SimpleLinear => 2,
            ModelFamily::Polynomial => self.order as usize + 1,
            ModelFamily::Sinusoidal => 3,
            ModelFamily::MultipleLinear | ModelFamily::Logarithmic | ModelFamily::Exponential => {
                feature_count + 1
            }
        }
    }

    /// How many leading features of a row the family reads.
    pub fn features_used(&self, feature_count: usize) -> usize {
        if self.family.is_single_variable() {
            feature_count.min(1)
        } else {
            feature_count
        }
    }

    /// Maps one feature row to its basis vector.
    pub fn expand(&self, row: &[f64]) -> Result<BasisVector> {
        let Some(&first) = row.first() else {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        };
        let mut z = Vec::with_capacity(self.basis_dimension(row.len()));
        z.push(1.0);
        match self.family {
            ModelFamily::SimpleLinear => z.push(first),
            ModelFamily::MultipleLinear => z.extend_from_slice(row),
            ModelFamily::Polynomial => {
                let mut p = 1.0;
                for _ in 0..self.order {
                    p *= first;
                    z.push(p);
                }
            }
            ModelFamily::Logarithmic => {
                for &x in row {
                    if x <= 0.0 {
                        return Err(Error::Domain {
                            family: self.family,
                            value: x,
                        });
                    }
                    z.push(x.ln());
                }
            }
            ModelFamily::Exponential => {
                for &x in row {
                    z.push(x.exp());
                }
            }
            ModelFamily::Sinusoidal => {
                z.push(first.sin());
                z.push(first.cos());
            }
        }
        if let Some(bad) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::Overflow(format!(
                "{} basis term {bad} is not finite for input {:?}",
                self.family, row
            )));
        }
        Ok(BasisVector(z))
    }
}

pub fn basis_dimension(cfg: &FamilyConfig, feature_count: usize) -> usize {
    cfg.basis_dimension(feature_count)
}

pub fn expand_basis(cfg: &FamilyConfig, row: &[f64]) -> Result<BasisVector> {
    cfg.expand(row)
}

/// Basis values `[1, z1, .., zk]` for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector(Vec<f64>);

impl BasisVector {
    /// Wraps raw basis values; the first must be the intercept term 1.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        match values.first() {
            Some(1.0) => {}
            _ => {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: 0,
                })
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("basis value is not finite".into()));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, coefficients: &[f64]) -> f64 {
        self.0.iter().zip(coefficients).map(|(z, a)| z * a).sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for BasisVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
