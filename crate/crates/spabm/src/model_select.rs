//! Penalized selection of the number of communities.
//!
//! Every candidate `K` gets a full fit (subspace clustering, visible
//! support, block estimation), and is scored by the squared Frobenius
//! distance between the assembled probability estimate and the adjacency
//! matrix plus the complexity penalty. The subspace-clustering prefix
//! (self-representation and Laplacian spectrum) does not depend on `K`, so
//! it is computed once, and only the embedding and k-means rerun per
//! candidate. Experiments select with the empirical penalty variant; the
//! theoretical variants stay available through the same parameter.

use crate::error::{Result, SpabmError};
use crate::estimator::penalty::{penalty, PenaltyParams};
use crate::estimator::{fit_with_clustering, FitResult};
use crate::net::AdjacencyMatrix;
use crate::scalar::Scalar;
use crate::ssc::{prepare_pipeline, SscConfig};

/// Score sheet for one candidate `K`.
#[derive(Debug, Clone)]
pub struct KScore<T> {
    pub k: usize,
    /// Squared Frobenius distance between the clipped probability estimate
    /// and the adjacency matrix, diagonal included.
    pub residual: T,
    pub penalty: T,
    /// `residual + penalty`, the selection criterion.
    pub score: T,
}

/// Outcome of [`select_k`].
#[derive(Debug, Clone)]
pub struct SelectionResult<T> {
    /// Candidate with the smallest score; ties go to the smallest `K`.
    pub k_hat: usize,
    /// Scores of the candidates that fitted, in ascending `K`.
    pub scores: Vec<KScore<T>>,
    /// Fits matching `scores` entry for entry.
    pub fits: Vec<FitResult<T>>,
    /// Candidates that failed, each with the failure text.
    pub failures: Vec<(usize, String)>,
}

impl<T> SelectionResult<T> {
    /// The fit belonging to the selected `K`.
    pub fn best_fit(&self) -> &FitResult<T> {
        let at = self
            .scores
            .iter()
            .position(|s| s.k == self.k_hat)
            .expect("k_hat comes from scores");
        &self.fits[at]
    }
}

/// Default candidate range `2..=min(10, n/10)`, kept nonempty by clamping
/// the upper end to at least 2. `K = 1` is excluded: the empirical penalty
/// vanishes there, so it would win every comparison.
pub fn default_k_range(n: usize) -> std::ops::RangeInclusive<usize> {
    2..=(n / 10).min(10).max(2)
}

fn frobenius2_diff<T: Scalar>(a: &AdjacencyMatrix<T>, p: &ndarray::Array2<T>) -> T {
    let e = a.entries();
    let mut acc = T::zero();
    for i in 0..a.n() {
        for j in 0..a.n() {
            let d = e[[i, j]] - p[[i, j]];
            acc += d * d;
        }
    }
    acc
}

/// Fits every `K` in `k_range` and returns the penalized-score minimizer.
///
/// Candidates are deduplicated and visited in ascending order; a candidate
/// whose fit fails is recorded and skipped. Deterministic for a fixed seed;
/// different seeds may select different `K` on hard instances.
pub fn select_k<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    k_range: impl IntoIterator<Item = usize>,
    params: &PenaltyParams<T>,
    seed: u64,
    config: &SscConfig<T>,
) -> Result<SelectionResult<T>> {
    let mut candidates: Vec<usize> = k_range.into_iter().collect();
    candidates.sort_unstable();
    candidates.dedup();
    if candidates.is_empty() {
        return Err(SpabmError::InvalidParameter(
            "candidate range for K is empty".into(),
        ));
    }
    let pipeline = prepare_pipeline(a, config)?;
    let mut scores = Vec::new();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for k in candidates {
        let outcome = pipeline
            .cluster(k, seed, config)
            .and_then(|z| fit_with_clustering(a, &z));
        match outcome {
            Ok(fitted) => {
                let residual = frobenius2_diff(a, fitted.probability.entries());
                let pen = penalty(
                    &fitted.clustering.sizes(),
                    &fitted.support,
                    params,
                    a.density(),
                )?;
                scores.push(KScore {
                    k,
                    residual,
                    penalty: pen,
                    score: residual + pen,
                });
                fits.push(fitted);
            }
            Err(err) => failures.push((k, err.to_string())),
        }
    }
    if scores.is_empty() {
        let summary = failures
            .iter()
            .map(|(k, msg)| format!("K = {k}: {msg}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(SpabmError::EmptyCommunity(format!(
            "every candidate K failed ({summary})"
        )));
    }
    // Ascending K plus strict improvement gives the smallest K on ties.
    let mut k_hat = scores[0].k;
    let mut best = scores[0].score;
    for s in &scores[1..] {
        if s.score < best {
            best = s.score;
            k_hat = s.k;
        }
    }
    Ok(SelectionResult {
        k_hat,
        scores,
        fits,
        failures,
    })
}
