//! Normal-equation assembly and dense solve.
//!
//! For basis rows `z_i` and labels `y_i` the least-squares coefficients satisfy
//! `Z a = Y` with `Z[p][q] = Σ z_pi z_qi` and `Y[p] = Σ z_pi y_i`. The system is
//! solved by Gaussian elimination with partial pivoting rather than by forming
//! an explicit inverse.

use crate::error::{Error, Result};
use crate::model::BasisVector;

/// A pivot smaller than this fraction of its column's largest original entry
/// marks the system as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalSystem {
    k: usize,
    /// Row-major `k × k`.
    z: Vec<f64>,
    y: Vec<f64>,
}

impl NormalSystem {
    /// Builds a system from explicit rows of `Z` and the right-hand side.
    pub fn new(z: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let k = y.len();
        if z.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: z.len(),
            });
        }
        if let Some(row) = z.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: row.len(),
            });
        }
        let sys = Self {
            k,
            z: z.into_iter().flatten().collect(),
            y,
        };
        sys.check_finite()?;
        Ok(sys)
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn z(&self, p: usize, q: usize) -> f64 {
        self.z[p * self.k + q]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z_rows(&self) -> Vec<Vec<f64>> {
        self.z.chunks(self.k.max(1)).map(<[f64]>::to_vec).collect()
    }

    fn check_finite(&self) -> Result<()> {
        if self.z.iter().chain(&self.y).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Overflow(
                "normal equations overflowed double precision".into(),
            ))
        }
    }
}

/// Sums basis cross products and basis-label products over all rows.
pub fn accumulate_normal_equations(
    basis_rows: &[BasisVector],
    labels: &[f64],
) -> Result<NormalSystem> {
    if basis_rows.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: basis_rows.len(),
            found: labels.len(),
        });
    }
    let Some(first) = basis_rows.first() else {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    };
    let k = first.len();
    let mut z = vec![0.0; k * k];
    let mut y = vec![0.0; k];
    for (row, &label) in basis_rows.iter().zip(labels) {
        if row.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: row.len(),
            });
        }
        let b = row.as_slice();
        for p in 0..k {
            for q in 0..=p {
                z[p * k + q] += b[p] * b[q];
            }
            y[p] += b[p] * label;
        }
    }
    // lower triangle holds the sums; mirror them so both halves are identical
    for p in 0..k {
        for q in 0..p {
            z[q * k + p] = z[p * k + q];
        }
    }
    let sys = NormalSystem { k, z, y };
    sys.check_finite()?;
    Ok(sys)
}

/// Least-squares coefficients `a0 ..= a(k-1)`, intercept first.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients(Vec<f64>);

impl Coefficients {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(Error::Overflow("coefficients are not finite".into()))
        }
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
}

impl std::ops::Index<usize> for Coefficients {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn solve_system(sys: &NormalSystem) -> Result<Coefficients> {
    let k = sys.k;
    let mut a = sys.z.clone();
    let mut b = sys.y.clone();

    let column_max: Vec<f64> = (0..k)
        .map(|j| (0..k).map(|i| a[i * k + j].abs()).fold(0.0, f64::max))
        .collect();

    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&r, &s| a[r * k + col].abs().total_cmp(&a[s * k + col].abs()))
            .unwrap_or(col);
        let pivot = a[pivot_row * k + col];
        if column_max[col] == 0.0 || pivot.abs() < SINGULAR_PIVOT_RATIO * column_max[col] {
            return Err(Error::SingularSystem { pivot: col });
        }
        if pivot_row != col {
            for j in 0..k {
                a.swap(col * k + j, pivot_row * k + j);
            }
            b.swap(col, pivot_row);
        }
        for r in col + 1..k {
            let factor = a[r * k + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[r * k + col] = 0.0;
            for j in col + 1..k {
                a[r * k + j] -= factor * a[col * k + j];
            }
            b[r] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let tail: f64 = (row + 1..k).map(|j| a[row * k + j] * x[j]).sum();
        x[row] = (b[row] - tail) / a[row * k + row];
    }
    Coefficients::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FamilyConfig, ModelFamily};

    fn line_basis(xs: &[f64]) -> Vec<BasisVector> {
        let cfg = FamilyConfig::of(ModelFamily::SimpleLinear);
        xs.iter().map(|&x| cfg.expand(&[x]).unwrap()).collect()
    }

    #[test]
    fn accumulates_hand_sums() {
        // Σ1 = 3, Σx = 3, Σx² = 5, Σy = 9, Σxy = 13
        let sys =
            accumulate_normal_equations(&line_basis(&[0.0, 1.0, 2.0]), &[1.0, 3.0, 5.0]).unwrap();
        assert_eq!(sys.z_rows(), vec![vec![3.0, 3.0], vec![3.0, 5.0]]);
        assert_eq!(sys.y(), [9.0, 13.0]);
    }

    #[test]
    fn single_point_intercept_only() {
        let rows = vec![BasisVector::new(vec![1.0]).unwrap()];
        let sys = accumulate_normal_equations(&rows, &[7.0]).unwrap();
        assert_eq!(sys.z_rows(), vec![vec![1.0]]);
        assert_eq!(sys.y(), [7.0]);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(matches!(
            accumulate_normal_equations(&line_basis(&[0.0, 1.0]), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            accumulate_normal_equations(&[], &[]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut rows = line_basis(&[0.0]);
        rows.push(
            FamilyConfig::of(ModelFamily::Sinusoidal)
                .expand(&[0.0])
                .unwrap(),
        );
        assert!(matches!(
            accumulate_normal_equations(&rows, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn overflowing_sums_are_rejected() {
        let rows = line_basis(&[1e200, 2e200]);
        assert_eq!(
            accumulate_normal_equations(&rows, &[1.0, 2.0])
                .unwrap_err()
                .code(),
            "overflow_error"
        );
    }

    #[test]
    fn identity_system() {
        let sys = NormalSystem::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![4.0, 7.0]).unwrap();
        assert_eq!(solve_system(&sys).unwrap().as_slice(), [4.0, 7.0]);
    }

    #[test]
    fn cramer_example() {
        // det 6, a0 = (45 - 39) / 6, a1 = (39 - 27) / 6
        let sys = NormalSystem::new(vec![vec![3.0, 3.0], vec![3.0, 5.0]], vec![9.0, 13.0]).unwrap();
        let a = solve_system(&sys).unwrap();
        assert!((a[0] - 1.0).abs() < 1e-15 && (a[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_is_singular() {
        let sys = NormalSystem::new(vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![1.0, 2.0]).unwrap();
        assert_eq!(solve_system(&sys), Err(Error::SingularSystem { pivot: 1 }));
        let zero = NormalSystem::new(vec![vec![0.0]], vec![1.0]).unwrap();
        assert!(solve_system(&zero).is_err());
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let sys = NormalSystem::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![2.0, 3.0]).unwrap();
        assert_eq!(solve_system(&sys).unwrap().as_slice(), [3.0, 2.0]);
    }

    #[test]
    fn too_few_points_is_singular() {
        // one point cannot pin down a line
        let sys = accumulate_normal_equations(&line_basis(&[2.0]), &[1.0]).unwrap();
        assert!(matches!(
            solve_system(&sys),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(NormalSystem::new(vec![vec![1.0, 2.0]], vec![1.0]).is_err());
        assert!(NormalSystem::new(vec![vec![1.0]], vec![1.0, 2.0]).is_err());
        assert!(NormalSystem::new(vec![vec![f64::NAN]], vec![1.0]).is_err());
    }
}
