//! Evaluation report shared by `fit` and `evaluate`.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use spabm::ndarray::Array2;
use serde::Serialize;
use spabm::io;
use spabm::net::Clustering;

use crate::errors::{CliError, CliResult};

/// Evaluation against supplied ground truth, serialized as JSON.
#[derive(Serialize)]
pub struct Report {
    pub clustering_error: f64,
    /// 1-based true community matched to each estimated community; `null`
    /// marks an estimated community with no partner.
    pub matched_true_community: Vec<Option<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimation_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub false_positive_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub false_negative_error: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("serializing report: {e}")))
    }
}

pub fn permutation_1based(permutation: &[usize], true_k: usize) -> Vec<Option<usize>> {
    permutation
        .iter()
        .map(|&v| (v < true_k).then_some(v + 1))
        .collect()
}

pub fn read_labels_file(path: &Path) -> CliResult<Clustering> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("opening {}: {e}", path.display())))?;
    io::read_labels(BufReader::new(file))
        .map(|(z, _)| z)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))
}

pub fn read_matrix_file(path: &Path) -> CliResult<Array2<f64>> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("opening {}: {e}", path.display())))?;
    io::read_matrix(BufReader::new(file))
        .map(|(m, _)| m)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))
}

/// Zeroes every entry with magnitude at or below `eps`.
pub fn threshold_zeros(m: &mut Array2<f64>, eps: f64) {
    if eps > 0.0 {
        m.mapv_inplace(|x| if x.abs() <= eps { 0.0 } else { x });
    }
}
