//! Least-squares curve fitting over six linear-regression model families.
//!
//! A typical run parses a CSV, picks feature and label columns, splits the rows,
//! fits every family and ranks the results by training r²:
//!
//! ```
//! use curfit_core::{auto_train, parse_csv, select_columns, split_dataset, ModelFamily};
//!
//! let ds = parse_csv(b"x,y\n0,2\n1,5\n2,8\n3,11\n4,14\n").unwrap();
//! let sel = select_columns(&ds, &["x"], "y").unwrap();
//! let split = split_dataset(&ds, &sel, 0.0, 42).unwrap();
//! let ranked = auto_train(&split, 2).unwrap();
//! assert_eq!(ranked.best().unwrap().family, ModelFamily::SimpleLinear);
//! ```

pub mod dataset;
pub mod error;
pub mod fitting;
pub mod model;
pub mod report;
pub mod solver;

pub use dataset::{
    parse_csv, select_columns, split_dataset, ColumnSelection, DataSplit, Dataset, SplitView,
    DEFAULT_SEED, DEFAULT_TEST_PERCENT,
};
pub use error::{Error, Result};
pub use fitting::{
    auto_train, fit_model, predict, r_squared, sinusoidal_params, FitOutcome, FittedModel,
    RankedEntry, RankedModels, ScoreReport, SinusoidalParams,
};
pub use model::{
    basis_dimension, expand_basis, BasisVector, FamilyConfig, ModelFamily, DEFAULT_ORDER, MAX_ORDER,
};
pub use report::{
    build_result_document, format_equation, plot_series, DocumentContext, EquationString,
    PlotSeries, ResultDocument,
};
pub use solver::{accumulate_normal_equations, solve_system, Coefficients, NormalSystem};
