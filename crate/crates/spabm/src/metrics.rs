//! Quality metrics for recovered clusterings and probability estimates.
//!
//! Clustering error matches estimated to true communities by an exact
//! assignment over label permutations (dynamic programming over label
//! subsets, so factorial enumeration is never needed). Matrix metrics use
//! exact-zero semantics: an entry is a "positive" when it is not exactly
//! zero. Callers comparing thresholded data should zero small entries
//! before calling.

use ndarray::ArrayView2;

use crate::error::{Result, SpabmError};
use crate::net::Clustering;
use crate::scalar::Scalar;

/// Subset DP is quadratic in `2^K`; past this the table stops being cheap.
pub const MAX_MATCH_K: usize = 20;

/// Everything [`evaluate`] measures about one fit.
#[derive(Debug, Clone)]
pub struct EvaluationReport<T> {
    /// Fraction of nodes misassigned under the best label matching.
    pub clustering_error: f64,
    /// `permutation[a]` is the true community matched to estimated
    /// community `a`. Values at or beyond the true count mark estimated
    /// communities that found no partner.
    pub permutation: Vec<usize>,
    /// Mean squared entry error `n^{-2} ||P_hat - P_star||_F^2`.
    pub estimation_error: T,
    /// Fraction of off-diagonal exact zeros of the reference that the
    /// estimate filled in.
    pub false_positive_rate: T,
    /// Fraction of off-diagonal reference mass the estimate zeroed out.
    pub false_negative_error: T,
}

/// Count matrix: `c[a][b]` is the number of nodes with estimated label `a`
/// and true label `b`, zero-padded to a square of side `max(K_est, K_true)`.
pub fn confusion_matrix(est: &Clustering, truth: &Clustering) -> Result<Vec<Vec<usize>>> {
    if est.n() != truth.n() {
        return Err(SpabmError::DimensionMismatch(format!(
            "clusterings describe {} and {} nodes",
            est.n(),
            truth.n()
        )));
    }
    let k = est.k().max(truth.k());
    let mut c = vec![vec![0usize; k]; k];
    for i in 0..est.n() {
        c[est.label(i)][truth.label(i)] += 1;
    }
    Ok(c)
}

/// Misassignment fraction under the best one-to-one matching of estimated
/// to true communities, plus the matching itself (`result.1[a]` is the true
/// label assigned to estimated label `a`).
pub fn clustering_error(est: &Clustering, truth: &Clustering) -> Result<(f64, Vec<usize>)> {
    let c = confusion_matrix(est, truth)?;
    let k = c.len();
    if k > MAX_MATCH_K {
        return Err(SpabmError::SearchSpaceTooLarge(format!(
            "label matching supports up to {MAX_MATCH_K} communities, got {k}"
        )));
    }
    // dp[mask]: best matched count using estimated labels 0..popcount(mask),
    // with `mask` the set of true labels already taken.
    let full = 1usize << k;
    let mut dp = vec![0usize; full];
    for mask in 0..full - 1 {
        let a = mask.count_ones() as usize;
        for b in 0..k {
            if mask & (1 << b) == 0 {
                let cand = dp[mask] + c[a][b];
                let next = mask | (1 << b);
                if cand > dp[next] {
                    dp[next] = cand;
                }
            }
        }
    }
    // Walk the table backwards to recover one optimal matching.
    let mut permutation = vec![0usize; k];
    let mut mask = full - 1;
    for a in (0..k).rev() {
        for b in 0..k {
            if mask & (1 << b) != 0 && dp[mask] == dp[mask ^ (1 << b)] + c[a][b] {
                permutation[a] = b;
                mask ^= 1 << b;
                break;
            }
        }
    }
    let matched = dp[full - 1];
    permutation.truncate(est.k());
    // Integer count divided once, so independent routes agree bit for bit.
    Ok((
        (est.n() - matched) as f64 / est.n() as f64,
        permutation,
    ))
}

fn check_same_square<T>(a: &ArrayView2<'_, T>, b: &ArrayView2<'_, T>) -> Result<usize> {
    let (r1, c1) = a.dim();
    let (r2, c2) = b.dim();
    if r1 != c1 || r2 != c2 || r1 != r2 {
        return Err(SpabmError::DimensionMismatch(format!(
            "need equal square matrices, got {r1}x{c1} and {r2}x{c2}"
        )));
    }
    Ok(r1)
}

/// Mean squared entry difference `n^{-2} ||P_hat - P_star||_F^2`, diagonal
/// included.
pub fn estimation_error<T: Scalar>(
    p_hat: &ArrayView2<'_, T>,
    p_star: &ArrayView2<'_, T>,
) -> Result<T> {
    let n = check_same_square(p_hat, p_star)?;
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            let d = p_hat[[i, j]] - p_star[[i, j]];
            acc += d * d;
        }
    }
    Ok(acc / (T::count(n) * T::count(n)))
}

/// Among off-diagonal entries that are exactly zero in the reference, the
/// fraction the estimate made nonzero. Zero when the reference has no
/// off-diagonal zeros.
pub fn false_positive_rate<T: Scalar>(
    p_hat: &ArrayView2<'_, T>,
    p_star: &ArrayView2<'_, T>,
) -> Result<T> {
    let n = check_same_square(p_hat, p_star)?;
    let mut zeros = 0usize;
    let mut filled = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i != j && p_star[[i, j]] == T::zero() {
                zeros += 1;
                if p_hat[[i, j]] != T::zero() {
                    filled += 1;
                }
            }
        }
    }
    if zeros == 0 {
        return Ok(T::zero());
    }
    Ok(T::count(filled) / T::count(zeros))
}

/// Off-diagonal reference mass `sum p_star^2` that the estimate zeroed,
/// relative to all off-diagonal reference mass. One when the estimate is
/// identically zero off the diagonal, zero when the reference is.
pub fn false_negative_error<T: Scalar>(
    p_hat: &ArrayView2<'_, T>,
    p_star: &ArrayView2<'_, T>,
) -> Result<T> {
    let n = check_same_square(p_hat, p_star)?;
    let mut missed = T::zero();
    let mut total = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mass = p_star[[i, j]] * p_star[[i, j]];
                total += mass;
                if p_hat[[i, j]] == T::zero() {
                    missed += mass;
                }
            }
        }
    }
    if total == T::zero() {
        return Ok(T::zero());
    }
    Ok(missed / total)
}

/// Bundles every metric for one fit against the ground truth.
pub fn evaluate<T: Scalar>(
    p_hat: &ArrayView2<'_, T>,
    p_star: &ArrayView2<'_, T>,
    est: &Clustering,
    truth: &Clustering,
) -> Result<EvaluationReport<T>> {
    let n = check_same_square(p_hat, p_star)?;
    if n != est.n() || n != truth.n() {
        return Err(SpabmError::DimensionMismatch(format!(
            "matrices are {n}x{n}, clusterings have {} and {} nodes",
            est.n(),
            truth.n()
        )));
    }
    let (clustering_error, permutation) = clustering_error(est, truth)?;
    Ok(EvaluationReport {
        clustering_error,
        permutation,
        estimation_error: estimation_error(p_hat, p_star)?,
        false_positive_rate: false_positive_rate(p_hat, p_star)?,
        false_negative_error: false_negative_error(p_hat, p_star)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn z(labels: Vec<usize>, k: usize) -> Clustering {
        Clustering::new(labels, k).unwrap()
    }

    #[test]
    fn identical_clusterings_have_zero_error() {
        let a = z(vec![0, 0, 1, 1, 2, 2], 3);
        let (err, perm) = clustering_error(&a, &a).unwrap();
        assert_eq!(err, 0.0);
        assert_eq!(perm, vec![0, 1, 2]);
    }

    #[test]
    fn relabeling_is_free() {
        let a = z(vec![0, 0, 1, 1, 2, 2], 3);
        let b = z(vec![2, 2, 0, 0, 1, 1], 3);
        let (err, perm) = clustering_error(&b, &a).unwrap();
        assert_eq!(err, 0.0);
        // Estimated 2 holds true 0's nodes, and so on.
        assert_eq!(perm, vec![1, 2, 0]);
    }

    #[test]
    fn single_misassignment_counts_once() {
        let truth = z(vec![0, 1, 1, 1, 1], 2);
        let est = z(vec![0, 0, 1, 1, 1], 2);
        let (err, perm) = clustering_error(&est, &truth).unwrap();
        assert!((err - 0.2).abs() < 1e-12);
        assert_eq!(perm, vec![0, 1]);
    }

    #[test]
    fn matches_brute_force_on_random_labelings() {
        let mut state = 99u64;
        let mut next = move |m: usize| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as usize % m
        };
        for _ in 0..200 {
            let k = 2 + next(3);
            let n = k + 2 + next(8);
            // Build label vectors covering every community.
            let mut a_labels: Vec<usize> = (0..k).collect();
            let mut b_labels: Vec<usize> = (0..k).collect();
            for _ in k..n {
                a_labels.push(next(k));
                b_labels.push(next(k));
            }
            let a = z(a_labels.clone(), k);
            let b = z(b_labels.clone(), k);
            let (err, _) = clustering_error(&a, &b).unwrap();

            // Factorial enumeration as the independent route.
            let mut perms: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..k {
                let mut grown = Vec::new();
                for p in &perms {
                    for c in 0..k {
                        if !p.contains(&c) {
                            let mut q = p.clone();
                            q.push(c);
                            grown.push(q);
                        }
                    }
                }
                perms = grown;
            }
            let best = perms
                .iter()
                .map(|p| {
                    (0..n)
                        .filter(|&i| p[a_labels[i]] == b_labels[i])
                        .count()
                })
                .max()
                .unwrap();
            let expect = 1.0 - best as f64 / n as f64;
            assert!((err - expect).abs() < 1e-12, "n={n} k={k}: {err} vs {expect}");
        }
    }

    #[test]
    fn rectangular_community_counts() {
        // Two estimated communities explain a three-community truth: the
        // nodes of the unmatched community are all errors.
        let truth = z(vec![0, 0, 1, 1, 2, 2], 3);
        let est = z(vec![0, 0, 1, 1, 1, 1], 2);
        let (err, perm) = clustering_error(&est, &truth).unwrap();
        assert!((err - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(perm.len(), 2);
        // More estimated communities than true ones: the extra one maps to
        // a padded slot.
        let est3 = z(vec![0, 0, 1, 1, 2, 2], 3);
        let truth2 = z(vec![0, 0, 0, 0, 1, 1], 2);
        let (err, perm) = clustering_error(&est3, &truth2).unwrap();
        assert!((err - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(perm.len(), 3);
        assert!(perm.iter().any(|&b| b >= 2));
    }

    #[test]
    fn too_many_communities_rejected() {
        let labels: Vec<usize> = (0..21).collect();
        let big = z(labels.clone(), 21);
        let err = clustering_error(&big, &big);
        assert!(matches!(err, Err(SpabmError::SearchSpaceTooLarge(_))));
    }

    #[test]
    fn estimation_error_scales_by_n_squared() {
        let a: Array2<f64> = array![[0.0, 1.0], [1.0, 0.0]];
        let b: Array2<f64> = array![[0.0, 0.5], [0.5, 0.0]];
        let e = estimation_error(&a.view(), &b.view()).unwrap();
        assert!((e - 2.0 * 0.25 / 4.0).abs() < 1e-14);
        let same = estimation_error(&a.view(), &a.view()).unwrap();
        assert_eq!(same, 0.0);
    }

    #[test]
    fn false_positive_rate_counts_filled_zeros() {
        let p_star: Array2<f64> = array![[0.0, 0.0, 0.5], [0.0, 0.0, 0.0], [0.5, 0.0, 0.0]];
        let p_hat = array![[0.0, 0.3, 0.5], [0.3, 0.0, 0.0], [0.5, 0.0, 0.0]];
        // Off-diagonal zeros of the reference: (0,1),(1,0),(1,2),(2,1).
        let r = false_positive_rate(&p_hat.view(), &p_star.view()).unwrap();
        assert!((r - 0.5).abs() < 1e-14);
        // No off-diagonal zeros: rate is zero by convention.
        let dense = Array2::from_elem((3, 3), 0.5);
        let r = false_positive_rate(&p_hat.view(), &dense.view()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn false_negative_error_extremes() {
        let p_star: Array2<f64> = array![[0.9, 0.4], [0.4, 0.9]];
        let zero = Array2::<f64>::zeros((2, 2));
        assert_eq!(
            false_negative_error(&zero.view(), &p_star.view()).unwrap(),
            1.0
        );
        assert_eq!(
            false_negative_error(&p_star.view(), &p_star.view()).unwrap(),
            0.0
        );
        // All-zero reference: nothing to miss.
        assert_eq!(
            false_negative_error(&p_star.view(), &zero.view()).unwrap(),
            0.0
        );
    }

    #[test]
    fn false_negative_error_weights_by_squared_mass() {
        let p_star: Array2<f64> = array![[0.0, 0.8, 0.2], [0.8, 0.0, 0.0], [0.2, 0.0, 0.0]];
        let p_hat = array![[0.0, 0.7, 0.0], [0.7, 0.0, 0.0], [0.0, 0.0, 0.0]];
        // Missed mass: the two 0.2 entries; total: 2*(0.64 + 0.04).
        let e = false_negative_error(&p_hat.view(), &p_star.view()).unwrap();
        assert!((e - 0.04 / 0.68).abs() < 1e-12);
    }

    #[test]
    fn evaluate_bundles_everything() {
        let p_star: Array2<f64> = array![
            [0.25, 0.5, 0.0, 0.0],
            [0.5, 0.25, 0.0, 0.0],
            [0.0, 0.0, 0.25, 0.5],
            [0.0, 0.0, 0.5, 0.25]
        ];
        let p_hat = array![
            [0.25, 0.4, 0.0, 0.0],
            [0.4, 0.25, 0.0, 0.0],
            [0.0, 0.0, 0.25, 0.5],
            [0.0, 0.0, 0.5, 0.25]
        ];
        let truth = z(vec![0, 0, 1, 1], 2);
        let est = z(vec![1, 1, 0, 0], 2);
        let report = evaluate(&p_hat.view(), &p_star.view(), &est, &truth).unwrap();
        assert_eq!(report.clustering_error, 0.0);
        assert_eq!(report.permutation, vec![1, 0]);
        assert!((report.estimation_error - 2.0 * 0.01 / 16.0).abs() < 1e-14);
        assert_eq!(report.false_positive_rate, 0.0);
        assert_eq!(report.false_negative_error, 0.0);
    }

    #[test]
    fn dimension_mismatches_error() {
        let a = Array2::<f64>::zeros((3, 3));
        let b = Array2::<f64>::zeros((4, 4));
        assert!(estimation_error(&a.view(), &b.view()).is_err());
        let za = z(vec![0, 1, 0], 2);
        let zb = z(vec![0, 1], 2);
        assert!(clustering_error(&za, &zb).is_err());
    }
}
