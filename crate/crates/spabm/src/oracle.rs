//! Brute-force exact solvers for toy instances.
//!
//! These enumerate candidate clusterings, supports, or label permutations
//! outright and keep the best, so they are usable as ground truth in tests
//! of the scalable pipeline. Every routine guards its search-space size and
//! refuses instances past the cap. The objective evaluation here is written
//! independently of the estimator module (eigensolver instead of power
//! iteration, penalty arithmetic spelled out again) so the two routes can
//! check each other.

use ndarray::Array2;

use crate::eig::sym_eigen;
use crate::error::{Result, SpabmError};
use crate::estimator::penalty::{PenaltyParams, PenaltyVariant};
use crate::net::{block, breve_support, AdjacencyMatrix, Clustering, SupportFamily};
use crate::scalar::Scalar;

/// Cap on `K^n / K!`, the number of candidate clusterings before canonical
/// labeling is applied.
pub const MAX_CLUSTERING_CANDIDATES: f64 = 1e6;
/// Support search enumerates every subset of every community per block, so
/// communities are capped hard.
pub const MAX_SUPPORT_COMMUNITY: usize = 4;
pub const MAX_SUPPORT_K: usize = 2;
/// Permutation matching enumerates `K!` label bijections.
pub const MAX_PERMUTATION_K: usize = 8;

/// Result of an exhaustive clustering search.
#[derive(Debug, Clone)]
pub struct ExactSolution<T> {
    /// Minimizing clustering, in canonical labels (node 0 in community 0,
    /// each later community first used in node order).
    pub best_clustering: Clustering,
    /// Visible support of the minimizer.
    pub best_support: SupportFamily,
    /// Minimized penalized objective.
    pub best_objective: T,
    /// Number of candidate clusterings evaluated.
    pub enumeration_count: usize,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Every clustering of `n` nodes into exactly `k` nonempty communities, one
/// representative per label permutation, in lexicographic label order.
///
/// Test-support enumeration; refuses instances where `k^n / k!` passes
/// [`MAX_CLUSTERING_CANDIDATES`].
pub fn surjective_clusterings(n: usize, k: usize) -> Result<Vec<Clustering>> {
    if k == 0 || k > n {
        return Err(SpabmError::InvalidParameter(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let bound = (k as f64).powi(n as i32) / factorial(k);
    if bound > MAX_CLUSTERING_CANDIDATES {
        return Err(SpabmError::SearchSpaceTooLarge(format!(
            "about {bound:.3e} candidate clusterings, cap is {MAX_CLUSTERING_CANDIDATES:e}"
        )));
    }
    // Restricted-growth labels: node 0 gets 0, and a node may open community
    // c only when communities 0..c are already in use. Depth-first in label
    // order is lexicographic order of the label vectors.
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn walk(
        labels: &mut Vec<usize>,
        pos: usize,
        used: usize,
        n: usize,
        k: usize,
        out: &mut Vec<Clustering>,
    ) {
        if pos == n {
            if used == k {
                out.push(
                    Clustering::new(labels.clone(), k).expect("enumerated labels are valid"),
                );
            }
            return;
        }
        // Prune: remaining nodes must be able to open the missing communities.
        if k - used > n - pos {
            return;
        }
        let top = (used + 1).min(k);
        for c in 0..top {
            labels[pos] = c;
            walk(labels, pos + 1, used.max(c + 1), n, k, out);
        }
    }
    walk(&mut labels, 1, 1, n, k, &mut out);
    Ok(out)
}

/// Squared Frobenius residual of the best rank-one fit on `support`, summed
/// over all blocks, evaluated through the dense eigensolver.
fn residual_by_eigen<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    z: &Clustering,
    support: &SupportFamily,
) -> Result<T> {
    let view = a.entries().view();
    let k = z.k();
    let mut total = T::zero();
    for kk in 0..k {
        for ll in kk..k {
            let b = block(&view, z, kk, ll)?.values;
            let (rows, cols) = support.rect(kk, ll);
            let frob2: T = b.iter().map(|&x| x * x).sum();
            let sigma2 = if rows.is_empty() || cols.is_empty() {
                T::zero()
            } else {
                let sub = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| {
                    b[[rows[i], cols[j]]]
                });
                let gram = sub.t().dot(&sub);
                let (vals, _) = sym_eigen(&gram.view())?;
                vals[vals.len() - 1].max(T::zero())
            };
            let r = frob2 - sigma2;
            total += if kk == ll { r } else { r + r };
        }
    }
    Ok(total)
}

/// The complexity penalty, written out directly from the formulas.
fn penalty_by_formula<T: Scalar>(
    z: &Clustering,
    support: &SupportFamily,
    params: &PenaltyParams<T>,
    density: T,
) -> T {
    let n = z.n();
    let k = z.k();
    let nf = T::count(n);
    let kf = T::count(k);
    match params.variant {
        PenaltyVariant::Empirical => density * nf * kf * (nf.ln() * kf.ln().powi(3)).sqrt(),
        PenaltyVariant::Separable => {
            let sizes = z.sizes();
            let e = T::one().exp();
            let mut support_term = T::zero();
            for kk in 0..k {
                for ll in 0..k {
                    let c = support.set(kk, ll).len();
                    if c > 0 {
                        let cf = T::count(c);
                        support_term += cf * (T::count(sizes[kk]) * e / cf).ln();
                    }
                }
            }
            let size_term: T = sizes.iter().map(|&s| T::count(s).ln()).sum();
            params.beta1 * support_term
                + params.beta2 * kf * size_term
                + params.beta2 * (nf * kf.ln() + nf.ln())
        }
        PenaltyVariant::NonSeparable => {
            let j = support.total();
            let support_term = if j > 0 {
                let jf = T::count(j);
                jf * (nf * kf * T::one().exp() / jf).ln()
            } else {
                T::zero()
            };
            params.beta1 * support_term
                + T::real(2.0) * params.beta2 * nf.ln()
                + params.beta2 * (nf * kf.ln() + nf.ln())
        }
    }
}

/// Independent evaluation of the penalized objective for one candidate.
pub fn oracle_objective<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    z: &Clustering,
    support: &SupportFamily,
    params: &PenaltyParams<T>,
) -> Result<T> {
    support.validate_against(z)?;
    let res = residual_by_eigen(a, z, support)?;
    Ok(res + penalty_by_formula(z, support, params, a.density()))
}

/// Exhaustive minimization of the penalized objective over all clusterings
/// into `k` nonempty communities, each paired with its visible support.
/// Ties go to the lexicographically smallest canonical label vector.
pub fn exact_clustering_search<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    k: usize,
    params: &PenaltyParams<T>,
) -> Result<ExactSolution<T>> {
    let candidates = surjective_clusterings(a.n(), k)?;
    let mut best: Option<ExactSolution<T>> = None;
    for z in candidates.iter() {
        let support = breve_support(&a.entries().view(), z)?;
        let objective = oracle_objective(a, z, &support, params)?;
        if best.as_ref().is_none_or(|b| objective < b.best_objective) {
            best = Some(ExactSolution {
                best_clustering: z.clone(),
                best_support: support,
                best_objective: objective,
                enumeration_count: 0,
            });
        }
    }
    let mut solution = best.expect("k <= n guarantees at least one candidate");
    solution.enumeration_count = candidates.len();
    Ok(solution)
}

fn masks_to_sets(masks: &[u32], sizes: &[usize], k: usize) -> Vec<Vec<Vec<usize>>> {
    (0..k)
        .map(|kk| {
            (0..k)
                .map(|ll| {
                    let m = masks[kk * k + ll];
                    (0..sizes[kk]).filter(|&i| m & (1 << i) != 0).collect()
                })
                .collect()
        })
        .collect()
}

/// Exhaustive minimization of the penalized objective over every support
/// family for a fixed clustering. Ties prefer fewer support rows, then the
/// lexicographically smaller family.
pub fn exact_support_search<T: Scalar>(
    a: &AdjacencyMatrix<T>,
    z: &Clustering,
    params: &PenaltyParams<T>,
) -> Result<(SupportFamily, T)> {
    let k = z.k();
    let sizes = z.sizes();
    if k > MAX_SUPPORT_K || sizes.iter().any(|&s| s > MAX_SUPPORT_COMMUNITY) {
        return Err(SpabmError::SearchSpaceTooLarge(format!(
            "support search handles K <= {MAX_SUPPORT_K} and communities of \
             at most {MAX_SUPPORT_COMMUNITY} nodes"
        )));
    }
    let cells = k * k;
    let mut masks = vec![0u32; cells];
    let mut best: Option<(SupportFamily, T, usize, Vec<Vec<Vec<usize>>>)> = None;
    loop {
        let sets = masks_to_sets(&masks, &sizes, k);
        let support = SupportFamily::new(sets.clone())?;
        let objective = oracle_objective(a, z, &support, params)?;
        let total = support.total();
        let better = match &best {
            None => true,
            Some((_, obj, tot, best_sets)) => {
                objective < *obj
                    || (objective == *obj && total < *tot)
                    || (objective == *obj && total == *tot && sets < *best_sets)
            }
        };
        if better {
            best = Some((support, objective, total, sets));
        }
        // Odometer over the per-cell subset masks, last cell fastest.
        let mut cell = cells;
        loop {
            if cell == 0 {
                break;
            }
            cell -= 1;
            let limit = 1u32 << sizes[cell / k];
            masks[cell] += 1;
            if masks[cell] < limit {
                break;
            }
            masks[cell] = 0;
            if cell == 0 {
                let (support, objective, _, _) = best.expect("searched at least one family");
                return Ok((support, objective));
            }
        }
    }
}

/// Minimum disagreement fraction between two clusterings over all `K!`
/// relabelings, computed literally on membership matrices: the entrywise L1
/// distance of the permuted membership matrix, divided by `2n`.
pub fn exact_permutation_match(est: &Clustering, truth: &Clustering) -> Result<f64> {
    if est.n() != truth.n() || est.k() != truth.k() {
        return Err(SpabmError::DimensionMismatch(format!(
            "clusterings are ({} nodes, {} communities) vs ({}, {})",
            est.n(),
            est.k(),
            truth.n(),
            truth.k()
        )));
    }
    let k = est.k();
    if k > MAX_PERMUTATION_K {
        return Err(SpabmError::SearchSpaceTooLarge(format!(
            "permutation matching enumerates K! and is capped at K = {MAX_PERMUTATION_K}"
        )));
    }
    let n = est.n();
    let membership = |z: &Clustering| {
        let mut m = vec![vec![0u8; k]; n];
        for i in 0..n {
            m[i][z.label(i)] = 1;
        }
        m
    };
    let me = membership(est);
    let mt = membership(truth);

    // Heap's algorithm over column permutations of the estimated matrix.
    let mut perm: Vec<usize> = (0..k).collect();
    let mut stack = vec![0usize; k];
    let mut best = u64::MAX;
    let l1 = |perm: &[usize]| -> u64 {
        let mut acc = 0u64;
        for i in 0..n {
            for c in 0..k {
                acc += u64::from(me[i][perm[c]].abs_diff(mt[i][c]));
            }
        }
        acc
    };
    best = best.min(l1(&perm));
    let mut idx = 0;
    while idx < k {
        if stack[idx] < idx {
            if idx % 2 == 0 {
                perm.swap(0, idx);
            } else {
                perm.swap(stack[idx], idx);
            }
            best = best.min(l1(&perm));
            stack[idx] += 1;
            idx = 0;
        } else {
            stack[idx] = 0;
            idx += 1;
        }
    }
    Ok(best as f64 / (2 * n) as f64)
}
