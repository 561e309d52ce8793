//! Human-readable equations, the JSON result document and plot series.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{DataSplit, Dataset, SplitView};
use crate::error::{Error, Result};
use crate::fitting::{FitOutcome, FittedModel, RankedModels, SinusoidalParams};
use crate::model::ModelFamily;

/// Value of the `curfit_schema` field written into every document.
pub const SCHEMA_VERSION: u32 = 1;

/// Points on each fitted curve.
pub const CURVE_POINTS: usize = 200;

const MINUS: char = '\u{2212}';

/// A fitted model rendered in its family's canonical form, 3 decimals per number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EquationString(pub String);

impl fmt::Display for EquationString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Splits a number into (is_negative, magnitude at 3 decimals); values that
/// round to zero are never negative.
fn signed3(v: f64) -> (bool, String) {
    let mag = format!("{:.3}", v.abs());
    let negative = v.is_sign_negative() && mag.bytes().any(|b| matches!(b, b'1'..=b'9'));
    (negative, mag)
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .bytes()
        .map(|b| DIGITS[(b - b'0') as usize])
        .collect()
}

fn render(intercept: f64, terms: impl IntoIterator<Item = (f64, String)>) -> String {
    let (neg, mag) = signed3(intercept);
    let mut out = String::from("y = ");
    if neg {
        out.push(MINUS);
    }
    out.push_str(&mag);
    for (coef, symbol) in terms {
        let (neg, mag) = signed3(coef);
        out.push(' ');
        out.push(if neg { MINUS } else { '+' });
        out.push(' ');
        out.push_str(&mag);
        out.push('·');
        out.push_str(&symbol);
    }
    out
}

pub fn format_equation(model: &FittedModel) -> EquationString {
    let a = model.coefficients().as_slice();
    let tail = a
        .iter()
        .copied()
        .skip(1)
        .enumerate()
        .map(|(i, c)| (i + 1, c));
    let text = match model.family() {
        ModelFamily::SimpleLinear => render(a[0], tail.map(|(_, c)| (c, "x".to_owned()))),
        ModelFamily::MultipleLinear => render(a[0], tail.map(|(j, c)| (c, format!("x{j}")))),
        ModelFamily::Polynomial => render(
            a[0],
            tail.map(|(j, c)| match j {
                1 => (c, "x".to_owned()),
                _ => (c, format!("x{}", superscript(j as u32))),
            }),
        ),
        ModelFamily::Logarithmic => render(a[0], tail.map(|(j, c)| (c, format!("ln(x{j})")))),
        ModelFamily::Exponential => render(a[0], tail.map(|(j, c)| (c, format!("e^(x{j})")))),
        ModelFamily::Sinusoidal => {
            let p = model
                .sinusoidal()
                .expect("sinusoidal model has three coefficients");
            let (neg, phase) = signed3(p.theta);
            let sign = if neg { MINUS } else { '+' };
            render(p.a0, [(p.c1, format!("sin(x {sign} {phase})"))])
        }
    };
    EquationString(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub rows: usize,
    pub dropped_rows: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub features: Vec<String>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub test_percent: f64,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub family: ModelFamily,
    /// Features the family's basis reads; single-variable families bind the first.
    pub features: Vec<String>,
    pub equation: Option<EquationString>,
    pub coefficients: Vec<f64>,
    pub train_r2: Option<f64>,
    pub test_r2: Option<f64>,
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sinusoidal: Option<SinusoidalParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub curfit_schema: u32,
    pub dataset: DatasetSummary,
    pub selection: SelectionSummary,
    pub split: SplitSummary,
    pub order: u32,
    pub models: Vec<ModelEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<BTreeMap<ModelFamily, PlotSeries>>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document fields are always serialisable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Everything about a run that is not in the ranked models themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentContext {
    pub dataset: DatasetSummary,
    pub selection: SelectionSummary,
    pub split: SplitSummary,
    pub order: u32,
}

impl DocumentContext {
    pub fn new(name: impl Into<String>, ds: &Dataset, split: &DataSplit, order: u32) -> Self {
        Self {
            dataset: DatasetSummary {
                name: name.into(),
                rows: ds.n_rows(),
                dropped_rows: ds.dropped_row_count(),
                skipped_columns: ds.skipped_columns().to_vec(),
            },
            selection: SelectionSummary {
                features: split.train.feature_names.clone(),
                label: split.train.label_name.clone(),
            },
            split: SplitSummary {
                test_percent: split.test_percent,
                seed: split.seed,
                train_rows: split.train.len(),
                test_rows: split.test.len(),
            },
            order,
        }
    }
}

pub fn build_result_document(ranked: &RankedModels, ctx: &DocumentContext) -> ResultDocument {
    let models = ranked
        .entries
        .iter()
        .map(|entry| match &entry.outcome {
            FitOutcome::Fitted {
                model,
                train,
                test,
                test_error,
            } => ModelEntry {
                family: entry.family,
                features: model.bound_features().to_vec(),
                equation: Some(format_equation(model)),
                coefficients: model.coefficients().as_slice().to_vec(),
                train_r2: Some(train.r2),
                test_r2: test.map(|t| t.r2),
                error: None,
                error_code: None,
                test_error: test_error.as_ref().map(ToString::to_string),
                sinusoidal: model.sinusoidal(),
            },
            FitOutcome::Failed(err) => ModelEntry {
                family: entry.family,
                features: Vec::new(),
                equation: None,
                coefficients: Vec::new(),
                train_r2: None,
                test_r2: None,
                error: Some(err.to_string()),
                error_code: Some(err.code().to_owned()),
                test_error: None,
                sinusoidal: None,
            },
        })
        .collect();
    ResultDocument {
        curfit_schema: SCHEMA_VERSION,
        dataset: ctx.dataset.clone(),
        selection: ctx.selection.clone(),
        split: ctx.split.clone(),
        order: ctx.order,
        models,
        plot: None,
    }
}

/// Data points and fitted curve against the model's first feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub family: ModelFamily,
    /// Horizontal axis: the first selected feature.
    pub feature: String,
    pub label: String,
    pub scatter: Vec<[f64; 2]>,
    pub curve: Vec<[f64; 2]>,
    /// Other features, frozen at their means over the plotted rows.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub held_at_mean: BTreeMap<String, f64>,
    /// Grid points dropped because the model is undefined there.
    pub skipped_points: usize,
    /// The feature has no spread, so every grid point is the same x.
    pub degenerate: bool,
}

pub fn plot_series(model: &FittedModel, data: &SplitView) -> Result<PlotSeries> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let width = data.feature_names.len();
    if width != model.feature_count() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_count(),
            found: width,
        });
    }

    let scatter: Vec<[f64; 2]> = data
        .features
        .iter()
        .zip(&data.labels)
        .map(|(row, &y)| [row[0], y])
        .collect();

    let n = data.len() as f64;
    let means: Vec<f64> = (1..width)
        .map(|j| data.features.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();

    let (lo, hi) = scatter
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[0]), hi.max(p[0]))
        });
    let degenerate = lo == hi;
    let step = (hi - lo) / (CURVE_POINTS - 1) as f64;

    let mut curve = Vec::with_capacity(CURVE_POINTS);
    let mut skipped_points = 0;
    let mut row = Vec::with_capacity(width);
    for i in 0..CURVE_POINTS {
        let x = if i == CURVE_POINTS - 1 {
            hi
        } else {
            lo + step * i as f64
        };
        row.clear();
        row.push(x);
        row.extend_from_slice(&means);
        match model.predict(&row) {
            Ok(y) if y.is_finite() => curve.push([x, y]),
            _ => skipped_points += 1,
        }
    }

    Ok(PlotSeries {
        family: model.family(),
        feature: data.feature_names[0].clone(),
        label: data.label_name.clone(),
        scatter,
        curve,
        held_at_mean: data.feature_names[1..].iter().cloned().zip(means).collect(),
        skipped_points,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{select_columns, split_dataset};
    use crate::fitting::{auto_train, fit_model};
    use crate::model::FamilyConfig;

    fn model(family: ModelFamily, order: u32, xs: &[Vec<f64>], ys: &[f64]) -> FittedModel {
        let names: Vec<String> = (1..=xs[0].len()).map(|i| format!("x{i}")).collect();
        fit_model(FamilyConfig::new(family, order).unwrap(), xs, ys, &names).unwrap()
    }

    fn line(intercept: f64, slope: f64) -> FittedModel {
        let xs: Vec<Vec<f64>> = (0..=10).map(|i| vec![i as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| intercept + slope * r[0]).collect();
        model(ModelFamily::SimpleLinear, 2, &xs, &ys)
    }

    #[test]
    fn simple_equation() {
        assert_eq!(format_equation(&line(2.0, 3.0)).0, "y = 2.000 + 3.000·x");
        assert_eq!(
            format_equation(&line(-1.5, -0.25)).0,
            "y = −1.500 − 0.250·x"
        );
    }

    #[test]
    fn multiple_equation_folds_signs() {
        let truth = [14.805, 8.874, -5.842];
        let xs: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64])
            .collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|r| truth[0] + truth[1] * r[0] + truth[2] * r[1])
            .collect();
        let m = model(ModelFamily::MultipleLinear, 2, &xs, &ys);
        assert_eq!(format_equation(&m).0, "y = 14.805 + 8.874·x1 − 5.842·x2");
    }

    #[test]
    fn polynomial_log_exp_symbols() {
        let xs: Vec<Vec<f64>> = (1..=8).map(|i| vec![i as f64]).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|r| 3.0 + 4.0 * r[0] + 8.0 * r[0] * r[0])
            .collect();
        let m = model(ModelFamily::Polynomial, 2, &xs, &ys);
        assert_eq!(format_equation(&m).0, "y = 3.000 + 4.000·x + 8.000·x²");

        let ys: Vec<f64> = xs.iter().map(|r| 1.0 + 2.0 * r[0].ln()).collect();
        let m = model(ModelFamily::Logarithmic, 2, &xs, &ys);
        assert_eq!(format_equation(&m).0, "y = 1.000 + 2.000·ln(x1)");

        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.25]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| 2.0 + 3.0 * r[0].exp()).collect();
        let m = model(ModelFamily::Exponential, 2, &xs, &ys);
        assert_eq!(format_equation(&m).0, "y = 2.000 + 3.000·e^(x1)");
    }

    #[test]
    fn sinusoidal_equation_uses_phase_form() {
        let xs: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 * 0.2]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| 3.0 + 4.0 * (r[0] + 5.0).sin()).collect();
        let m = model(ModelFamily::Sinusoidal, 2, &xs, &ys);
        assert_eq!(format_equation(&m).0, "y = 3.000 + 4.000·sin(x − 1.283)");
    }

    #[test]
    fn tiny_negative_rounds_to_plain_zero() {
        assert_eq!(signed3(-0.0004), (false, "0.000".to_owned()));
        assert!(signed3(-0.0005).0);
        assert_eq!(superscript(10), "¹⁰");
    }

    fn run(pct: f64, with_zero: bool) -> (ResultDocument, RankedModels) {
        let start = if with_zero { 0 } else { 1 };
        let ds = Dataset::new(
            vec!["x".into(), "y".into()],
            (start..40)
                .map(|i| vec![i as f64 * 0.1, 1.0 + 0.5 * i as f64])
                .collect(),
        )
        .unwrap();
        let sel = select_columns(&ds, &["x"], "y").unwrap();
        let split = split_dataset(&ds, &sel, pct, 42).unwrap();
        let ranked = auto_train(&split, 2).unwrap();
        let ctx = DocumentContext::new("lin.csv", &ds, &split, 2);
        (build_result_document(&ranked, &ctx), ranked)
    }

    #[test]
    fn document_mirrors_ranking() {
        let (doc, ranked) = run(10.0, false);
        assert_eq!(doc.curfit_schema, 1);
        assert_eq!(doc.models.len(), 6);
        let order: Vec<_> = doc.models.iter().map(|m| m.family).collect();
        let want: Vec<_> = ranked.entries.iter().map(|e| e.family).collect();
        assert_eq!(order, want);
        assert!(doc.models.iter().all(|m| m.test_r2.is_some()));
        assert_eq!((doc.split.train_rows, doc.split.test_rows), (35, 4));
    }

    #[test]
    fn failed_family_has_note_and_null_scores() {
        let (doc, _) = run(10.0, true);
        let last = doc.models.last().unwrap();
        assert_eq!(last.family, ModelFamily::Logarithmic);
        assert!(last.error.is_some());
        assert_eq!(last.error_code.as_deref(), Some("domain_error"));
        assert!(last.train_r2.is_none() && last.test_r2.is_none() && last.equation.is_none());
    }

    #[test]
    fn empty_test_split_gives_null_test_scores() {
        let (doc, _) = run(0.0, false);
        assert!(doc.models.iter().all(|m| m.test_r2.is_none()));
        let json = doc.to_json();
        assert!(json.contains("\"test_r2\": null"));
        assert!(json.contains("\"curfit_schema\": 1"));
    }

    #[test]
    fn document_json_round_trip() {
        let (mut doc, ranked) = run(10.0, true);
        let view = SplitView {
            feature_names: vec!["x".into()],
            label_name: "y".into(),
            features: vec![vec![1.0], vec![2.0]],
            labels: vec![1.5, 2.0],
            row_indices: vec![0, 1],
        };
        let best = ranked.best().unwrap().model().unwrap();
        doc.plot = Some(BTreeMap::from([(
            best.family(),
            plot_series(best, &view).unwrap(),
        )]));
        let back = ResultDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn identity_line_plot() {
        let m = line(0.0, 1.0);
        let view = SplitView {
            feature_names: vec!["x".into()],
            label_name: "y".into(),
            features: (0..=10).map(|i| vec![i as f64]).collect(),
            labels: (0..=10).map(f64::from).collect(),
            row_indices: (0..=10).collect(),
        };
        let p = plot_series(&m, &view).unwrap();
        assert_eq!(p.curve.len(), CURVE_POINTS);
        assert_eq!(p.scatter.len(), 11);
        let first = p.curve[0];
        let last = p.curve[CURVE_POINTS - 1];
        assert_eq!(first[0], 0.0);
        assert_eq!(last[0], 10.0);
        assert!(first[1].abs() < 1e-12 && (last[1] - 10.0).abs() < 1e-12);
        assert!(!p.degenerate);
        for pt in &p.curve {
            assert_eq!(pt[1].to_bits(), m.predict(&[pt[0]]).unwrap().to_bits());
        }
    }

    #[test]
    fn degenerate_range_repeats_one_point() {
        let m = line(1.0, 2.0);
        let view = SplitView {
            feature_names: vec!["x".into()],
            label_name: "y".into(),
            features: vec![vec![3.0]; 4],
            labels: vec![7.0; 4],
            row_indices: (0..4).collect(),
        };
        let p = plot_series(&m, &view).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.curve.len(), CURVE_POINTS);
        assert!(p.curve.iter().all(|pt| *pt == p.curve[0]));
    }

    #[test]
    fn log_plot_skips_non_positive_grid_points() {
        let xs: Vec<Vec<f64>> = (1..=10).map(|i| vec![i as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| 2.0 + r[0].ln()).collect();
        let m = model(ModelFamily::Logarithmic, 2, &xs, &ys);
        let view = SplitView {
            feature_names: vec!["x1".into()],
            label_name: "y".into(),
            features: vec![vec![-1.0], vec![0.0], vec![1.0]],
            labels: vec![0.0, 0.0, 2.0],
            row_indices: vec![0, 1, 2],
        };
        let p = plot_series(&m, &view).unwrap();
        assert!(p.skipped_points > 0);
        assert_eq!(p.curve.len() + p.skipped_points, CURVE_POINTS);
        assert!(p.curve.iter().all(|pt| pt[0] > 0.0 && pt[1].is_finite()));
    }

    #[test]
    fn multi_feature_plot_holds_others_at_mean() {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i % 4) as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| 1.0 + r[0] + 2.0 * r[1]).collect();
        let m = model(ModelFamily::MultipleLinear, 2, &xs, &ys);
        let view = SplitView {
            feature_names: vec!["a".into(), "b".into()],
            label_name: "y".into(),
            features: xs.clone(),
            labels: ys,
            row_indices: (0..12).collect(),
        };
        let p = plot_series(&m, &view).unwrap();
        assert_eq!(p.held_at_mean, BTreeMap::from([("b".to_owned(), 1.5)]));
        assert!((p.curve[0][1] - 4.0).abs() < 1e-9);
    }
}
