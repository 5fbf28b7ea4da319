//! Spectral clustering on the self-representation affinity.
//!
//! The affinity symmetrizes the weight matrix, the normalized Laplacian is
//! built exactly symmetric (one triangle computed, then mirrored), and the
//! embedding takes the eigenvectors of the smallest eigenvalues. Nodes with
//! zero affinity degree get an identity Laplacian row, which keeps them
//! well-defined without touching the rest of the spectrum.

use ndarray::{Array1, Array2, ArrayView2};

use crate::eig::sym_eigen;
use crate::error::{Result, SpabmError};
use crate::net::Clustering;
use crate::scalar::Scalar;

/// Symmetric affinity `|W| + |W^T|` of a weight matrix.
pub fn affinity<T: Scalar>(w: &ArrayView2<'_, T>) -> Result<Array2<T>> {
    let (r, c) = w.dim();
    if r != c {
        return Err(SpabmError::DimensionMismatch(format!(
            "weight matrix must be square, got {r}x{c}"
        )));
    }
    Ok(Array2::from_shape_fn((r, r), |(i, j)| {
        w[[i, j]].abs() + w[[j, i]].abs()
    }))
}

/// Symmetric normalized Laplacian `I - D^{-1/2} S D^{-1/2}` of a symmetric
/// nonnegative affinity, with identity rows for zero-degree nodes.
pub fn normalized_laplacian<T: Scalar>(s: &ArrayView2<'_, T>) -> Result<Array2<T>> {
    let (r, c) = s.dim();
    if r != c || r == 0 {
        return Err(SpabmError::DimensionMismatch(format!(
            "affinity must be square and nonempty, got {r}x{c}"
        )));
    }
    for i in 0..r {
        for j in 0..r {
            if s[[i, j]] < T::zero() || s[[i, j]] != s[[j, i]] {
                return Err(SpabmError::InvalidMatrix(
                    "affinity must be symmetric with nonnegative entries".into(),
                ));
            }
        }
    }
    let degrees: Vec<T> = (0..r)
        .map(|i| (0..r).map(|j| s[[i, j]]).sum::<T>())
        .collect();
    let inv_sqrt: Vec<T> = degrees
        .iter()
        .map(|&d| if d > T::zero() { d.sqrt().recip() } else { T::zero() })
        .collect();
    let mut l = Array2::zeros((r, r));
    for i in 0..r {
        l[[i, i]] = if degrees[i] > T::zero() {
            T::one() - s[[i, i]] * inv_sqrt[i] * inv_sqrt[i]
        } else {
            T::one()
        };
        for j in 0..i {
            let v = -(s[[i, j]] * (inv_sqrt[i] * inv_sqrt[j]));
            l[[i, j]] = v;
            l[[j, i]] = v;
        }
    }
    Ok(l)
}

/// Full spectrum of the normalized Laplacian, eigenvalues ascending.
pub fn laplacian_spectrum<T: Scalar>(
    s: &ArrayView2<'_, T>,
) -> Result<(Array1<T>, Array2<T>)> {
    let l = normalized_laplacian(s)?;
    sym_eigen(&l.view())
}

/// Embedding rows: the first `k` eigenvector columns, optionally normalized
/// to unit row norm (rows that are entirely zero stay zero).
pub fn spectral_embedding<T: Scalar>(
    eigenvectors: &ArrayView2<'_, T>,
    k: usize,
    row_normalize: bool,
) -> Result<Array2<T>> {
    let (n, cols) = eigenvectors.dim();
    if k == 0 || k > cols {
        return Err(SpabmError::InvalidParameter(format!(
            "need 1 <= k <= {cols} embedding columns, got {k}"
        )));
    }
    let mut u = Array2::zeros((n, k));
    for i in 0..n {
        for j in 0..k {
            u[[i, j]] = eigenvectors[[i, j]];
        }
    }
    if row_normalize {
        for i in 0..n {
            let norm = (0..k).map(|j| u[[i, j]] * u[[i, j]]).sum::<T>().sqrt();
            if norm > T::zero() {
                for j in 0..k {
                    u[[i, j]] /= norm;
                }
            }
        }
    }
    Ok(u)
}

/// Normalized cut of a clustering on an affinity: the sum over communities
/// of boundary weight divided by volume. Zero-volume communities add zero.
pub fn normalized_cut<T: Scalar>(s: &ArrayView2<'_, T>, z: &Clustering) -> Result<T> {
    let (r, c) = s.dim();
    if r != c || r != z.n() {
        return Err(SpabmError::DimensionMismatch(format!(
            "affinity is {r}x{c}, clustering has n = {}",
            z.n()
        )));
    }
    let mut cut = vec![T::zero(); z.k()];
    let mut vol = vec![T::zero(); z.k()];
    for i in 0..r {
        let li = z.label(i);
        for j in 0..r {
            vol[li] += s[[i, j]];
            if z.label(j) != li {
                cut[li] += s[[i, j]];
            }
        }
    }
    Ok(cut
        .iter()
        .zip(&vol)
        .map(|(&ct, &v)| if v > T::zero() { ct / v } else { T::zero() })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_clique_affinity(m: usize) -> Array2<f64> {
        let n = 2 * m;
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i != j && (i < m) == (j < m) {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn affinity_symmetrizes_signed_weights() {
        let w = array![[0.0, -0.5, 0.0], [0.25, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let s = affinity(&w.view()).unwrap();
        assert_eq!(s[[0, 1]], 0.75);
        assert_eq!(s[[1, 0]], 0.75);
        assert_eq!(s[[0, 2]], 1.0);
        assert_eq!(s[[2, 2]], 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s[[i, j]], s[[j, i]]);
            }
        }
    }

    #[test]
    fn laplacian_of_disjoint_cliques_has_double_zero_eigenvalue() {
        let s = two_clique_affinity(4);
        let (vals, _) = laplacian_spectrum(&s.view()).unwrap();
        assert!(vals[0].abs() < 1e-10);
        assert!(vals[1].abs() < 1e-10);
        assert!(vals[2] > 0.1);
    }

    #[test]
    fn laplacian_is_exactly_symmetric_with_isolated_node() {
        let mut s = two_clique_affinity(3);
        for j in 0..6 {
            s[[5, j]] = 0.0;
            s[[j, 5]] = 0.0;
        }
        let l = normalized_laplacian(&s.view()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(l[[i, j]], l[[j, i]]);
                assert!(l[[i, j]].is_finite());
            }
        }
        assert_eq!(l[[5, 5]], 1.0);
        for j in 0..5 {
            assert_eq!(l[[5, j]], 0.0);
        }
    }

    #[test]
    fn embedding_rows_unit_or_zero() {
        let s = two_clique_affinity(3);
        let (_, vecs) = laplacian_spectrum(&s.view()).unwrap();
        let u = spectral_embedding(&vecs.view(), 2, true).unwrap();
        for i in 0..6 {
            let norm: f64 = (0..2).map(|j| u[[i, j]] * u[[i, j]]).sum();
            assert!((norm - 1.0).abs() < 1e-10 || norm == 0.0);
        }
        // Same-clique rows coincide in the normalized embedding.
        for i in 1..3 {
            for j in 0..2 {
                assert!((u[[i, j]] - u[[0, j]]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn normalized_cut_zero_on_disconnected_partition() {
        let s = two_clique_affinity(4);
        let aligned = Clustering::new(
            (0..8).map(|i| usize::from(i >= 4)).collect(),
            2,
        )
        .unwrap();
        let cut = normalized_cut(&s.view(), &aligned).unwrap();
        assert_eq!(cut, 0.0);

        let crossing = Clustering::new((0..8).map(|i| i % 2).collect(), 2).unwrap();
        let cut = normalized_cut(&s.view(), &crossing).unwrap();
        assert!(cut > 0.5);
    }

    #[test]
    fn rejects_malformed_inputs() {
        let w = array![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
        assert!(affinity(&w.view()).is_err());
        let asym = array![[0.0, 1.0], [0.5, 0.0]];
        assert!(normalized_laplacian(&asym.view()).is_err());
        let neg = array![[0.0, -1.0], [-1.0, 0.0]];
        assert!(normalized_laplacian(&neg.view()).is_err());
    }
}
