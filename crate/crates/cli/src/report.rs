//! Report files: matrices as row-major nested arrays, labels, diagnostics.

use qfim_core::qfim::{Diagnostics, PairCompatibility};
use qfim_core::RealMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::scene_file::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: u32,
    pub labels: Vec<String>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "Gamma")]
    pub gamma: Vec<Vec<f64>>,
    pub compatibility: Vec<PairCompatibility>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormComparison>,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
}

/// Numerical matrices next to their lowest-order analytic counterparts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormComparison {
    /// `two_source` or `three_source_intensity`.
    pub kind: String,
    pub labels: Vec<String>,
    #[serde(rename = "H_numerical")]
    pub h_numerical: Vec<Vec<f64>>,
    #[serde(rename = "closed_form_H")]
    pub h: Vec<Vec<f64>>,
    /// `|num − cf| / |cf|` where the closed form is nonzero; where it is zero,
    /// `|num|` over the largest closed-form entry of the same block column.
    #[serde(rename = "H_deviation")]
    pub h_deviation: Vec<Vec<f64>>,
    #[serde(rename = "Gamma_numerical")]
    pub gamma_numerical: Vec<Vec<f64>>,
    #[serde(rename = "closed_form_Gamma", default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<f64>>>,
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain only finite numbers");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let report: ReportFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse {
                path: origin.to_string(),
                message: format!("unsupported schema_version {}", report.schema_version),
            });
        }
        let n = report.labels.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !square(&report.h) || !square(&report.gamma) {
            return Err(CliError::Parse {
                path: origin.to_string(),
                message: format!("matrices must be {n}x{n} to match the labels"),
            });
        }
        Ok(report)
    }

    pub fn h_matrix(&self) -> RealMatrix {
        RealMatrix::from_rows(&self.h).expect("validated square")
    }

    pub fn gamma_matrix(&self) -> RealMatrix {
        RealMatrix::from_rows(&self.gamma).expect("validated square")
    }
}

/// Entrywise deviation as documented on [`ClosedFormComparison::h_deviation`].
pub fn deviation(num: &RealMatrix, cf: &RealMatrix, column_blocks: &[(usize, usize)]) -> RealMatrix {
    let mut out = RealMatrix::zeros(cf.rows(), cf.cols());
    for &(c0, nc) in column_blocks {
        let scale = (0..cf.rows())
            .flat_map(|i| (c0..c0 + nc).map(move |j| (i, j)))
            .map(|(i, j)| cf[(i, j)].abs())
            .fold(0.0, f64::max);
        for i in 0..cf.rows() {
            for j in c0..c0 + nc {
                out[(i, j)] = if cf[(i, j)] != 0.0 {
                    (num[(i, j)] - cf[(i, j)]).abs() / cf[(i, j)].abs()
                } else if scale > 0.0 {
                    num[(i, j)].abs() / scale
                } else {
                    num[(i, j)].abs()
                };
            }
        }
    }
    out
}
