//! Fitting, scoring and the fit-everything-then-rank driver.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset::{DataSplit, SplitView};
use crate::error::{Error, Result};
use crate::model::{FamilyConfig, ModelFamily};
use crate::solver::{accumulate_normal_equations, solve_system, Coefficients};

/// Residual sums at or below this fraction of `max(1, s_t)` count as a perfect fit.
pub const PERFECT_FIT_RATIO: f64 = 1e-12;

/// A family with solved coefficients bound to named features.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    config: FamilyConfig,
    coefficients: Coefficients,
    bound_features: Vec<String>,
    feature_count: usize,
}

impl FittedModel {
    pub fn config(&self) -> FamilyConfig {
        self.config
    }

    pub fn family(&self) -> ModelFamily {
        self.config.family()
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// Names of the features the basis actually reads.
    pub fn bound_features(&self) -> &[String] {
        &self.bound_features
    }

    /// Width of the feature rows this model was trained on.
    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    /// Evaluates the model on a full selection row.
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                found: row.len(),
            });
        }
        let used = self.config.features_used(row.len());
        let z = self.config.expand(&row[..used])?;
        Ok(z.dot(self.coefficients.as_slice()))
    }

    /// Amplitude and phase form, for sinusoidal models only.
    pub fn sinusoidal(&self) -> Option<SinusoidalParams> {
        match (self.family(), self.coefficients.as_slice()) {
            (ModelFamily::Sinusoidal, &[a0, a1, a2]) => Some(sinusoidal_params(a0, a1, a2)),
            _ => None,
        }
    }
}

/// Solves the least-squares problem for one family on training rows.
pub fn fit_model<S: AsRef<str>>(
    cfg: FamilyConfig,
    train_x: &[Vec<f64>],
    train_y: &[f64],
    feature_names: &[S],
) -> Result<FittedModel> {
    if train_x.len() != train_y.len() {
        return Err(Error::DimensionMismatch {
            expected: train_x.len(),
            found: train_y.len(),
        });
    }
    if train_x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let width = feature_names.len();
    if width == 0 {
        return Err(Error::NoFeatures);
    }
    if let Some(row) = train_x.iter().find(|r| r.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            found: row.len(),
        });
    }
    let used = cfg.features_used(width);
    let basis = train_x
        .iter()
        .map(|row| cfg.expand(&row[..used]))
        .collect::<Result<Vec<_>>>()?;
    let system = accumulate_normal_equations(&basis, train_y)?;
    let coefficients = solve_system(&system)?;
    Ok(FittedModel {
        config: cfg,
        coefficients,
        bound_features: feature_names[..used]
            .iter()
            .map(|s| s.as_ref().to_owned())
            .collect(),
        feature_count: width,
    })
}

pub fn predict(model: &FittedModel, row: &[f64]) -> Result<f64> {
    model.predict(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Total sum of squares about the label mean.
    pub s_t: f64,
    /// Residual sum of squares.
    pub s_r: f64,
    pub r2: f64,
}

/// Coefficient of determination of `predictions` against `labels`.
pub fn r_squared(predictions: &[f64], labels: &[f64]) -> Result<ScoreReport> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mean = labels.iter().sum::<f64>() / labels.len() as f64;
    let s_t: f64 = labels.iter().map(|y| (y - mean).powi(2)).sum();
    let s_r: f64 = labels
        .iter()
        .zip(predictions)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    if !(s_t.is_finite() && s_r.is_finite()) {
        return Err(Error::Overflow("sum of squares is not finite".into()));
    }
    let r2 = if s_r <= PERFECT_FIT_RATIO * s_t.max(1.0) {
        1.0
    } else if s_t == 0.0 {
        return Err(Error::ConstantLabel);
    } else {
        (s_t - s_r) / s_t
    };
    Ok(ScoreReport { s_t, s_r, r2 })
}

/// Scores a model against every row of a view.
pub fn score(model: &FittedModel, view: &SplitView) -> Result<ScoreReport> {
    let predictions = view
        .features
        .iter()
        .map(|row| model.predict(row))
        .collect::<Result<Vec<_>>>()?;
    r_squared(&predictions, &view.labels)
}

/// `y = a0 + c1·sin(x + theta)`, recovered from `a0 + a1·sin x + a2·cos x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidalParams {
    pub a0: f64,
    pub c1: f64,
    /// Phase in radians, normalised to (−π, π].
    pub theta: f64,
    /// Set when both trigonometric coefficients are zero; the phase is then 0 by convention.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero_amplitude: bool,
}

pub fn sinusoidal_params(a0: f64, a1: f64, a2: f64) -> SinusoidalParams {
    if a1 == 0.0 && a2 == 0.0 {
        return SinusoidalParams {
            a0,
            c1: 0.0,
            theta: 0.0,
            zero_amplitude: true,
        };
    }
    let mut theta = a2.atan2(a1);
    if theta <= -PI {
        theta = PI;
    }
    SinusoidalParams {
        a0,
        c1: a1.hypot(a2),
        theta,
        zero_amplitude: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitOutcome {
    Fitted {
        model: FittedModel,
        train: ScoreReport,
        /// Absent when the test split is empty or could not be scored.
        test: Option<ScoreReport>,
        test_error: Option<Error>,
    },
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub family: ModelFamily,
    pub outcome: FitOutcome,
}

impl RankedEntry {
    pub fn model(&self) -> Option<&FittedModel> {
        match &self.outcome {
            FitOutcome::Fitted { model, .. } => Some(model),
            FitOutcome::Failed(_) => None,
        }
    }

    pub fn train(&self) -> Option<&ScoreReport> {
        match &self.outcome {
            FitOutcome::Fitted { train, .. } => Some(train),
            FitOutcome::Failed(_) => None,
        }
    }

    pub fn test(&self) -> Option<&ScoreReport> {
        match &self.outcome {
            FitOutcome::Fitted { test, .. } => test.as_ref(),
            FitOutcome::Failed(_) => None,
        }
    }

    pub fn error(&self) -> Option<&Error> {
        match &self.outcome {
            FitOutcome::Fitted { .. } => None,
            FitOutcome::Failed(e) => Some(e),
        }
    }
}

/// One entry per family, best training r² first, failures last.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedModels {
    pub entries: Vec<RankedEntry>,
}

impl RankedModels {
    pub fn best(&self) -> Option<&RankedEntry> {
        self.entries.first().filter(|e| e.model().is_some())
    }

    pub fn get(&self, family: ModelFamily) -> Option<&RankedEntry> {
        self.entries.iter().find(|e| e.family == family)
    }

    /// Orders entries by descending training r², ties and failures by family precedence.
    fn sort(entries: &mut [RankedEntry]) {
        entries.sort_by(|a, b| match (a.train(), b.train()) {
            (Some(x), Some(y)) => y.r2.total_cmp(&x.r2).then(a.family.cmp(&b.family)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => a.family.cmp(&b.family),
        });
    }
}

fn train_family(cfg: FamilyConfig, split: &DataSplit) -> FitOutcome {
    let train = &split.train;
    let fitted = fit_model(cfg, &train.features, &train.labels, &train.feature_names)
        .and_then(|model| score(&model, train).map(|score| (model, score)));
    let (model, train_score) = match fitted {
        Ok(ok) => ok,
        Err(e) => return FitOutcome::Failed(e),
    };
    let (test, test_error) = if split.test.is_empty() {
        (None, None)
    } else {
        match score(&model, &split.test) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e)),
        }
    };
    FitOutcome::Fitted {
        model,
        train: train_score,
        test,
        test_error,
    }
}

/// Fits all six families on the training rows and ranks them.
pub fn auto_train(split: &DataSplit, order: u32) -> Result<RankedModels> {
    if split.train.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let configs = ModelFamily::ALL
        .into_iter()
        .map(|f| FamilyConfig::new(f, order))
        .collect::<Result<Vec<_>>>()?;

    let outcomes: Vec<FitOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|&cfg| scope.spawn(move || train_family(cfg, split)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("family fit panicked"))
            .collect()
    });

    let mut entries: Vec<RankedEntry> = configs
        .iter()
        .zip(outcomes)
        .map(|(cfg, outcome)| RankedEntry {
            family: cfg.family(),
            outcome,
        })
        .collect();

    if entries.iter().all(|e| e.model().is_none()) {
        return Err(Error::AllFamiliesFailed(
            entries
                .iter()
                .filter_map(|e| Some((e.family, e.error()?.clone())))
                .collect(),
        ));
    }
    RankedModels::sort(&mut entries);
    Ok(RankedModels { entries })
}
