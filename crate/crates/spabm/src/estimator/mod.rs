//! Block-wise rank-one estimation of connection probabilities.
//!
//! Given an adjacency matrix, a clustering, and a support family, each block
//! of the rearranged adjacency matrix is projected onto its rectangular
//! support and replaced by its best rank-one approximation. Diagonal blocks
//! go through the symmetric route so the assembled matrix is exactly
//! symmetric; off-diagonal pairs are estimated once and mirrored.

pub mod penalty;
pub mod rank_one;

use ndarray::Array2;

use crate::error::{Result, SpabmError};
use crate::net::{
    block, breve_support, project_support, AdjacencyMatrix, Clustering, ProbabilityMatrix,
    SupportFamily,
};
use crate::scalar::Scalar;

/// Iterate-change tolerance for the block power iterations. Chosen near
/// machine precision; the sigma-plateau rule inside the iteration covers
/// matrices whose leading singular values are too close for this to fire.
fn power_tol<T: Scalar>() -> T {
    T::epsilon() * T::real(32.0)
}

const POWER_MAX_ITER: usize = 20_000;

/// Rank-one block estimates for a fixed clustering and support.
///
/// Blocks are stored raw (no clipping) in community order; entries outside
/// the support are exact zeros, and `blocks[l][k]` is exactly the transpose
/// of `blocks[k][l]`.
#[derive(Debug, Clone)]
pub struct BlockEstimate<T> {
    clustering: Clustering,
    support: SupportFamily,
    blocks: Vec<Vec<Array2<T>>>,
}

impl<T: Scalar> BlockEstimate<T> {
    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub fn support(&self) -> &SupportFamily {
        &self.support
    }

    /// Raw estimated block `(k, l)`, shaped community-k rows by
    /// community-l columns.
    pub fn block(&self, k: usize, l: usize) -> &Array2<T> {
        &self.blocks[k][l]
    }

    /// Support visible in the estimate: within-community positions of rows
    /// that kept at least one exactly nonzero entry.
    pub fn recovered_support(&self) -> SupportFamily {
        let k = self.clustering.k();
        let sets = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        let m = &self.blocks[a][b];
                        (0..m.nrows())
                            .filter(|&i| (0..m.ncols()).any(|j| m[[i, j]] != T::zero()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        SupportFamily::new(sets).expect("row positions are ascending by construction")
    }

    /// Estimated connection probabilities in original node order, with
    /// entries clipped to `[0, 1]`.
    pub fn assemble(&self) -> ProbabilityMatrix<T> {
        let raw = self.assemble_raw();
        let clipped = raw.mapv(|x| x.max(T::zero()).min(T::one()));
        ProbabilityMatrix::new(clipped)
            .expect("mirrored blocks assemble into a symmetric matrix")
    }

    /// Unclipped assembled estimate in original node order.
    pub fn assemble_raw(&self) -> Array2<T> {
        let n = self.clustering.n();
        let labels = self.clustering.labels();
        let pos = self.clustering.within_positions();
        Array2::from_shape_fn((n, n), |(i, j)| {
            self.blocks[labels[i]][labels[j]][[pos[i], pos[j]]]
        })
    }

    /// Squared Frobenius distance between the adjacency matrix and the raw
    /// assembled estimate, diagonal included. Equals the sum of per-block
    /// residuals of the rearranged matrix.
    pub fn residual(&self, a: &AdjacencyMatrix<T>) -> Result<T> {
        if a.n() != self.clustering.n() {
            return Err(SpabmError::DimensionMismatch(format!(
                "adjacency has n = {}, estimate has n = {}",
                a.n(),
                self.clustering.n()
            )));
        }
        let raw = self.assemble_raw();
        let e = a.entries();
        let mut acc = T::zero();
        for i in 0..a.n() {
            for j in 0..a.n() {
                let d = e[[i, j]] - raw[[i, j]];
                acc += d * d;
            }
        }
        Ok(acc)
    }
}

/// Estimates every block of the rearranged adjacency matrix: project onto
/// the rectangular support, then take the best rank-one approximation.
pub fn estimate_theta<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    z: &Clustering,
    support: &SupportFamily,
) -> Result<BlockEstimate<T>> {
    if a.n() != z.n() {
        return Err(SpabmError::DimensionMismatch(format!(
            "adjacency has n = {}, clustering has n = {}",
            a.n(),
            z.n()
        )));
    }
    support.validate_against(z)?;
    let k = z.k();
    let tol = power_tol::<T>();
    let view = a.entries().view();
    let mut blocks: Vec<Vec<Array2<T>>> = vec![vec![Array2::zeros((0, 0)); k]; k];
    for kk in 0..k {
        for ll in kk..k {
            let raw = block(&view, z, kk, ll)?.values;
            let (rows, cols) = support.rect(kk, ll);
            let projected = project_support(&raw.view(), rows, cols)?;
            let approx = if kk == ll {
                rank_one::rank_one_approx_symmetric(&projected.view(), tol, POWER_MAX_ITER)?
            } else {
                rank_one::rank_one_approx(&projected.view(), tol, POWER_MAX_ITER)?
            }
            .matrix();
            if kk != ll {
                blocks[ll][kk] = approx.t().to_owned();
            }
            blocks[kk][ll] = approx;
        }
    }
    Ok(BlockEstimate {
        clustering: z.clone(),
        support: support.clone(),
        blocks,
    })
}

/// Penalized block-model objective: the rank-one residual of the fit on
/// `support` plus the complexity penalty for `(z, support)`.
pub fn objective<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    z: &Clustering,
    support: &SupportFamily,
    params: &penalty::PenaltyParams<T>,
) -> Result<T> {
    let est = estimate_theta(a, z, support)?;
    let res = est.residual(a)?;
    let pen = penalty::penalty(&z.sizes(), support, params, a.density())?;
    Ok(res + pen)
}

/// Everything one full fitting pass produces.
#[derive(Debug, Clone)]
pub struct FitResult<T> {
    /// Recovered community assignment.
    pub clustering: Clustering,
    /// Support read off the rearranged adjacency matrix (nonzero block
    /// rows), which the estimation step then respects.
    pub support: SupportFamily,
    /// Raw per-block rank-one estimates.
    pub estimate: BlockEstimate<T>,
    /// Assembled, clipped connection-probability estimate in original node
    /// order.
    pub probability: ProbabilityMatrix<T>,
}

/// Support recovery and block estimation on top of a fixed clustering.
///
/// The support is not searched for: the nonzero rows of each rearranged
/// block are taken as-is, which any penalty nondecreasing in the support
/// size also selects.
pub fn fit_with_clustering<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    z: &Clustering,
) -> Result<FitResult<T>> {
    let support = breve_support(&a.entries().view(), z)?;
    let estimate = estimate_theta(a, z, &support)?;
    let probability = estimate.assemble();
    Ok(FitResult {
        clustering: z.clone(),
        support,
        estimate,
        probability,
    })
}

/// Full fitting pass: subspace clustering into `k` communities, visible
/// support recovery, block-wise rank-one estimation, assembly.
pub fn fit<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    k: usize,
    seed: u64,
    config: &crate::ssc::SscConfig<T>,
) -> Result<FitResult<T>> {
    let (clustering, _) = crate::ssc::cluster_network(a, k, seed, config)?;
    fit_with_clustering(a, &clustering)
}
