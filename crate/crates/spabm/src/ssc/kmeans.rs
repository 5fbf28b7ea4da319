//! Seeded k-means over embedding rows.
//!
//! Determinism contract: one sequential ChaCha8 stream drives every restart,
//! distance ties go to the lowest cluster index, and among restarts the
//! lowest within-cluster sum of squares wins with earlier restarts breaking
//! exact ties. A restart that produces an empty cluster is discarded.

use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpabmError};
use crate::scalar::Scalar;

/// Labels of the winning restart plus its score and index.
#[derive(Debug, Clone)]
pub struct KMeansResult<T> {
    pub labels: Vec<usize>,
    pub wcss: T,
    pub restart: usize,
}

fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
}

/// Picks an index by walking the cumulative sum of `weights` to a uniform
/// fraction of the total. Returns `None` when all weights vanish.
fn weighted_pick<T: Scalar>(weights: &[T], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total = weights.iter().copied().sum::<T>();
    if !(total > T::zero()) {
        return None;
    }
    let target = T::real(rng.random::<f64>()) * total;
    let mut cum = T::zero();
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > T::zero() {
            cum += w;
            last = Some(i);
            if cum > target {
                return Some(i);
            }
        }
    }
    last
}

fn seed_centers<T: Scalar>(
    points: &ArrayView2<'_, T>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Vec<T>>> {
    let n = points.nrows();
    let uniform = vec![T::one(); n];
    let first = weighted_pick(&uniform, rng)?;
    let mut centers = vec![points.row(first).to_vec()];
    let mut d2: Vec<T> = (0..n)
        .map(|i| dist2(&points.row(i).to_vec(), &centers[0]))
        .collect();
    while centers.len() < k {
        // Farther points are proportionally more likely to seed the next
        // center; all-zero distances mean fewer distinct points than k.
        let next = weighted_pick(&d2, rng)?;
        let center = points.row(next).to_vec();
        for i in 0..n {
            let d = dist2(&points.row(i).to_vec(), &center);
            if d < d2[i] {
                d2[i] = d;
            }
        }
        centers.push(center);
    }
    Some(centers)
}

fn lloyd<T: Scalar>(
    points: &ArrayView2<'_, T>,
    mut centers: Vec<Vec<T>>,
    max_iter: usize,
) -> Option<(Vec<usize>, T)> {
    let n = points.nrows();
    let d = points.ncols();
    let k = centers.len();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let row = points.row(i);
            let mut best = 0usize;
            let mut best_d = T::infinity();
            for (c, center) in centers.iter().enumerate() {
                let dist = row
                    .iter()
                    .zip(center)
                    .map(|(&x, &y)| (x - y) * (x - y))
                    .sum::<T>();
                if dist < best_d {
                    best_d = dist;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![T::zero(); d]; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (slot, &x) in sums[labels[i]].iter_mut().zip(points.row(i)) {
                *slot += x;
            }
        }
        if counts.iter().any(|&c| c == 0) {
            return None;
        }
        for c in 0..k {
            for x in sums[c].iter_mut() {
                *x /= T::count(counts[c]);
            }
        }
        centers = sums;
        if !changed {
            break;
        }
    }
    let wcss = (0..n)
        .map(|i| dist2(&points.row(i).to_vec(), &centers[labels[i]]))
        .sum::<T>();
    Some((labels, wcss))
}

/// Clusters the rows of `points` into `k` groups.
pub fn kmeans<T: Scalar>(
    points: &ArrayView2<'_, T>,
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<KMeansResult<T>> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(SpabmError::InvalidParameter(format!(
            "need 1 <= k <= {n} clusters, got {k}"
        )));
    }
    if restarts == 0 || max_iter == 0 {
        return Err(SpabmError::InvalidParameter(
            "need at least one restart and one iteration".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult<T>> = None;
    for restart in 0..restarts {
        let Some(centers) = seed_centers(points, k, &mut rng) else {
            continue;
        };
        let Some((labels, wcss)) = lloyd(points, centers, max_iter) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| wcss < b.wcss) {
            best = Some(KMeansResult {
                labels,
                wcss,
                restart,
            });
        }
    }
    best.ok_or_else(|| {
        SpabmError::EmptyCommunity(format!(
            "no k-means restart filled all {k} clusters; the embedding has too few distinct rows"
        ))
    })
}
