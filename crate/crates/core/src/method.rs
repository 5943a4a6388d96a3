use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::robust_cov::EstimatorKind;

/// How the precision matrices of a discriminant rule are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Inverse of the pooled covariance, shared by all groups.
    Lda,
    /// Inverse of each group covariance.
    Qda,
    /// Graphical lasso on the pooled covariance.
    GlLda,
    /// Graphical lasso per group.
    GlQda,
    /// Joint graphical lasso across groups.
    Jgl,
    /// Friedman's regularized discriminant analysis.
    Rda,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Lda, Method::Qda, Method::GlLda, Method::GlQda, Method::Jgl, Method::Rda];

    /// Methods that share one precision matrix across groups.
    pub fn is_pooled(self) -> bool {
        matches!(self, Method::Lda | Method::GlLda)
    }

    /// Methods that select their penalty over a grid.
    pub fn is_regularized(self) -> bool {
        matches!(self, Method::GlLda | Method::GlQda | Method::Jgl | Method::Rda)
    }
}

/// A method together with the covariance estimator feeding it, e.g.
/// `rjgl` = joint graphical lasso on cellwise-robust covariances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub kind: EstimatorKind,
}

impl MethodSpec {
    pub fn new(method: Method, kind: EstimatorKind) -> Self {
        Self { method, kind }
    }

    /// All twelve combinations, classical first.
    pub fn all() -> Vec<MethodSpec> {
        [EstimatorKind::Classical, EstimatorKind::CellwiseRobust]
            .iter()
            .flat_map(|&kind| Method::ALL.iter().map(move |&method| MethodSpec { method, kind }))
            .collect()
    }

    /// Command-line name such as `s-lda`, `gl-qda` or `rjgl`.
    pub fn cli_name(&self) -> &'static str {
        use EstimatorKind::*;
        use Method::*;
        match (self.kind, self.method) {
            (Classical, Lda) => "s-lda",
            (Classical, Qda) => "s-qda",
            (Classical, GlLda) => "gl-lda",
            (Classical, GlQda) => "gl-qda",
            (Classical, Jgl) => "jgl",
            (Classical, Rda) => "rda",
            (CellwiseRobust, Lda) => "r-lda",
            (CellwiseRobust, Qda) => "r-qda",
            (CellwiseRobust, GlLda) => "rgl-lda",
            (CellwiseRobust, GlQda) => "rgl-qda",
            (CellwiseRobust, Jgl) => "rjgl",
            (CellwiseRobust, Rda) => "rrda",
        }
    }

    /// Name used in result tables, e.g. `rJGL-DA`.
    pub fn display_name(&self) -> &'static str {
        use EstimatorKind::*;
        use Method::*;
        match (self.kind, self.method) {
            (Classical, Lda) => "s-LDA",
            (Classical, Qda) => "s-QDA",
            (Classical, GlLda) => "GL-LDA",
            (Classical, GlQda) => "GL-QDA",
            (Classical, Jgl) => "JGL-DA",
            (Classical, Rda) => "RDA",
            (CellwiseRobust, Lda) => "r-LDA",
            (CellwiseRobust, Qda) => "r-QDA",
            (CellwiseRobust, GlLda) => "rGL-LDA",
            (CellwiseRobust, GlQda) => "rGL-QDA",
            (CellwiseRobust, Jgl) => "rJGL-DA",
            (CellwiseRobust, Rda) => "rRDA",
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase();
        MethodSpec::all()
            .into_iter()
            .find(|m| m.cli_name() == wanted || m.display_name().to_ascii_lowercase() == wanted)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method `{s}`")))
    }
}
