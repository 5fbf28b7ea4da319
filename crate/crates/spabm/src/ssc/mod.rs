//! Sparse subspace clustering of network nodes.
//!
//! Pipeline: elastic-net self-representation, symmetric affinity, normalized
//! Laplacian, embedding by the eigenvectors of the smallest eigenvalues,
//! then seeded k-means on the embedding rows. Everything before the choice
//! of `k` is independent of it, so [`SpectralPipeline`] exposes the shared
//! prefix for callers that sweep over several community counts.

pub mod elastic_net;
pub mod kmeans;
pub mod spectral;

use ndarray::{Array1, Array2};

use crate::error::Result;
use crate::net::{AdjacencyMatrix, Clustering};
use crate::scalar::Scalar;

use elastic_net::{default_gammas, solve_self_representation, SelfRepresentation};
use kmeans::kmeans;
use spectral::{affinity, laplacian_spectrum, spectral_embedding};

/// Tunables for the clustering pipeline. `gamma1`/`gamma2` default to the
/// density-driven weights when absent.
#[derive(Debug, Clone)]
pub struct SscConfig<T> {
    pub gamma1: Option<T>,
    pub gamma2: Option<T>,
    /// Coordinate-descent iterate and stationarity tolerance.
    pub tol: T,
    pub max_sweeps: usize,
    /// Normalize embedding rows before k-means.
    pub row_normalize: bool,
    pub restarts: usize,
    pub kmeans_iters: usize,
}

impl<T: Scalar> Default for SscConfig<T> {
    fn default() -> Self {
        Self {
            gamma1: None,
            gamma2: None,
            tol: T::real(elastic_net::DEFAULT_TOL),
            max_sweeps: elastic_net::DEFAULT_MAX_SWEEPS,
            row_normalize: true,
            restarts: 20,
            kmeans_iters: 300,
        }
    }
}

/// The `k`-independent prefix of the pipeline: representation weights and
/// the full Laplacian spectrum, reusable across community counts.
#[derive(Debug, Clone)]
pub struct SpectralPipeline<T> {
    pub representation: SelfRepresentation<T>,
    pub eigenvalues: Array1<T>,
    pub eigenvectors: Array2<T>,
}

impl<T: Scalar> SpectralPipeline<T> {
    /// Runs the `k`-dependent tail: embedding plus seeded k-means.
    pub fn cluster(&self, k: usize, seed: u64, config: &SscConfig<T>) -> Result<Clustering> {
        let embedding = spectral_embedding(&self.eigenvectors.view(), k, config.row_normalize)?;
        let result = kmeans(
            &embedding.view(),
            k,
            config.restarts,
            config.kmeans_iters,
            seed,
        )?;
        Clustering::new(result.labels, k)
    }
}

/// Computes the shared pipeline prefix for an adjacency matrix.
pub fn prepare_pipeline<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    config: &SscConfig<T>,
) -> Result<SpectralPipeline<T>> {
    let (g1_default, g2_default) = default_gammas(a.density());
    let gamma1 = config.gamma1.unwrap_or(g1_default);
    let gamma2 = config.gamma2.unwrap_or(g2_default);
    let representation =
        solve_self_representation(a, gamma1, gamma2, config.tol, config.max_sweeps)?;
    let s = affinity(&representation.weights.view())?;
    let (eigenvalues, eigenvectors) = laplacian_spectrum(&s.view())?;
    Ok(SpectralPipeline {
        representation,
        eigenvalues,
        eigenvectors,
    })
}

/// Full clustering pass: pipeline prefix plus the `k`-dependent tail.
pub fn cluster_network<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    k: usize,
    seed: u64,
    config: &SscConfig<T>,
) -> Result<(Clustering, SpectralPipeline<T>)> {
    let pipeline = prepare_pipeline(a, config)?;
    let clustering = pipeline.cluster(k, seed, config)?;
    Ok((clustering, pipeline))
}
