//! Cellwise-robust regularized discriminant analysis.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`robust_cov`] estimates per-group centers and covariances, either
//!    classically or from pairwise Qn scales and Kendall correlations.
//! 2. [`precision`] turns the covariances into precision matrices with the
//!    graphical lasso, the joint graphical lasso or RDA shrinkage.
//! 3. [`model_select`] picks the penalty on a small grid by BIC.
//! 4. [`discriminant`] classifies new observations and [`outlier`] flags
//!    suspicious rows and cells of the training data.
//!
//! [`sim_bench`] reproduces the Monte Carlo comparison of all twelve method
//! variants.
//!
//! ```
//! use cellshield::{select_model, LabeledDataset, MethodSpec, SelectOptions};
//! use nalgebra::DMatrix;
//!
//! let x = DMatrix::from_row_slice(8, 2, &[
//!     0.0, 0.1, 0.3, -0.2, -0.1, 0.2, 0.2, 0.0,
//!     3.0, 3.1, 3.2, 2.9, 2.8, 3.0, 3.1, 3.3,
//! ]);
//! let data = LabeledDataset::new(x, vec![0, 0, 0, 0, 1, 1, 1, 1], 2).unwrap();
//! let model = select_model("s-lda".parse::<MethodSpec>().unwrap(), &data, &SelectOptions::default()).unwrap();
//! let report = cellshield::classify(data.values(), &model).unwrap();
//! assert_eq!(report.predicted, data.labels());
//! ```

pub mod discriminant;
pub mod error;
pub mod linalg;
pub mod method;
pub mod model_select;
pub mod outlier;
pub mod precision;
pub mod robust_cov;
pub mod sim_bench;

pub use discriminant::{
    classify, correct_classification, discriminant_scores, kl_distance, ClassificationReport, DiscriminantModel,
};
pub use error::{Error, Result};
pub use method::{Method, MethodSpec};
pub use model_select::{select_model, SelectOptions};
pub use outlier::{detect, OutlierReport};
pub use precision::{PrecisionSet, Regularization, SolverOptions};
pub use robust_cov::{group_summaries, EstimatorKind, GroupSummaries, LabeledDataset};
pub use sim_bench::{run_bench, BenchResult, Scenario, ScenarioSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/robust-covariance.md")]
    mod robust_covariance {}
    #[doc = include_str!("../../../book/src/precision.md")]
    mod precision {}
    #[doc = include_str!("../../../book/src/model-selection.md")]
    mod model_selection {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/outliers.md")]
    mod outliers {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
