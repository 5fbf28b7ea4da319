//! Synthetic instance generation with reproducible randomness.
//!
//! One seeded ChaCha8 stream drives every draw, in a documented order, so
//! equal configurations produce byte-identical instances:
//!
//! 1. community labels: a near-balanced label vector is shuffled;
//! 2. popularity entries: all `n * K` values drawn uniformly from `[0, 1)`
//!    in row-major order;
//! 3. sparsification (no draws): the globally smallest cross-community
//!    entries are zeroed, ties broken by row then column;
//! 4. cross-community scaling (no draws): survivors are multiplied by
//!    `omega`;
//! 5. edges: the strict lower triangle is drawn row-major, one uniform per
//!    pair, then mirrored.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ndarray::Array2;

use crate::error::{Result, SpabmError};
use crate::net::{
    lambda_support, probability_from_lambda, AdjacencyMatrix, Clustering, PopularityMatrix,
    ProbabilityMatrix, SupportFamily,
};

/// Stream cipher behind every generator draw; recorded in file headers so
/// runs can state their randomness source.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Parameters of one synthetic instance.
///
/// `sigma` is the fraction of cross-community popularity entries kept
/// nonzero; `omega` scales the survivors. Both live in `[0, 1]`. When
/// `sizes` is absent, communities are near-balanced: the first `n mod k`
/// communities get one extra node.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub k: usize,
    pub sigma: f64,
    pub omega: f64,
    pub seed: u64,
    pub sizes: Option<Vec<usize>>,
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return Err(SpabmError::InvalidParameter(format!(
                "need 1 <= K <= n, got n = {}, K = {}",
                self.n, self.k
            )));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(SpabmError::InvalidParameter(format!(
                "sigma must lie in [0, 1], got {}",
                self.sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(SpabmError::InvalidParameter(format!(
                "omega must lie in [0, 1], got {}",
                self.omega
            )));
        }
        if let Some(sizes) = &self.sizes {
            if sizes.len() != self.k
                || sizes.iter().any(|&s| s == 0)
                || sizes.iter().sum::<usize>() != self.n
            {
                return Err(SpabmError::InvalidParameter(format!(
                    "sizes must be {} positive counts summing to {}",
                    self.k, self.n
                )));
            }
        }
        Ok(())
    }

    /// Community sizes this configuration describes.
    pub fn community_sizes(&self) -> Vec<usize> {
        match &self.sizes {
            Some(sizes) => sizes.clone(),
            None => {
                let per = self.n / self.k;
                let extra = self.n % self.k;
                (0..self.k)
                    .map(|c| per + usize::from(c < extra))
                    .collect()
            }
        }
    }
}

/// One generated network together with everything that produced it.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub lambda: PopularityMatrix<f64>,
    pub probability: ProbabilityMatrix<f64>,
    pub adjacency: AdjacencyMatrix<f64>,
    /// Structural support declared by the zero pattern of `lambda`.
    pub support: SupportFamily,
}

impl SyntheticInstance {
    pub fn clustering(&self) -> &Clustering {
        self.lambda.clustering()
    }
}

/// Stages 1 and 2 plus the deterministic stages 3 and 4: labels, raw
/// popularity entries, sparsification, scaling.
fn lambda_with_rng(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<PopularityMatrix<f64>> {
    let sizes = config.community_sizes();
    let mut labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat(c).take(s))
        .collect();
    labels.shuffle(rng);
    let clustering = Clustering::new(labels, config.k)?;

    let mut entries = Array2::zeros((config.n, config.k));
    for i in 0..config.n {
        for l in 0..config.k {
            entries[[i, l]] = rng.random::<f64>();
        }
    }

    // Zero the floor(n (K-1) (1 - sigma)) smallest cross-community entries.
    let mut cross: Vec<(f64, usize, usize)> = Vec::with_capacity(config.n * (config.k - 1));
    for i in 0..config.n {
        for l in 0..config.k {
            if l != clustering.label(i) {
                cross.push((entries[[i, l]], i, l));
            }
        }
    }
    let kill = ((config.n * (config.k - 1)) as f64 * (1.0 - config.sigma)).floor() as usize;
    let kill = kill.min(cross.len());
    cross.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for &(_, i, l) in &cross[..kill] {
        entries[[i, l]] = 0.0;
    }
    for &(_, i, l) in &cross[kill..] {
        entries[[i, l]] *= config.omega;
    }

    PopularityMatrix::new(entries, clustering)
}

/// Popularity matrix alone, using the same stream prefix as
/// [`generate_instance`]; the two agree entry for entry at equal seeds.
pub fn generate_lambda(config: &GeneratorConfig) -> Result<PopularityMatrix<f64>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    lambda_with_rng(config, &mut rng)
}

fn adjacency_with_rng(
    p: &ProbabilityMatrix<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<AdjacencyMatrix<f64>> {
    let n = p.n();
    let p = p.entries();
    let mut a = Array2::zeros((n, n));
    for i in 1..n {
        for j in 0..i {
            if rng.random::<f64>() < p[[i, j]] {
                a[[i, j]] = 1.0;
                a[[j, i]] = 1.0;
            }
        }
    }
    AdjacencyMatrix::new(a)
}

/// Samples a symmetric hollow network from explicit edge probabilities,
/// drawing the strict lower triangle row-major as stage 5 does.
pub fn sample_adjacency(
    probability: &ProbabilityMatrix<f64>,
    seed: u64,
) -> Result<AdjacencyMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    adjacency_with_rng(probability, &mut rng)
}

/// Full instance: popularity matrix, induced probabilities, sampled
/// adjacency matrix, and the declared support.
pub fn generate_instance(config: &GeneratorConfig) -> Result<SyntheticInstance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lambda = lambda_with_rng(config, &mut rng)?;
    let probability = probability_from_lambda(&lambda);
    let support = lambda_support(&lambda);
    let adjacency = adjacency_with_rng(&probability, &mut rng)?;
    Ok(SyntheticInstance {
        lambda,
        probability,
        adjacency,
        support,
    })
}
