//! Dense symmetric eigendecomposition: Householder reduction to
//! tridiagonal form followed by the implicit-shift QL iteration, with the
//! orthogonal transform accumulated so eigenvectors come out directly.
//!
//! Used for the spectral embedding of affinity Laplacians and as the
//! algebraic route of the brute-force objective oracle. Deterministic:
//! no randomness, no architecture-dependent branching.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Result, SpabmError};
use crate::scalar::Scalar;

const MAX_QL_SWEEPS: usize = 64;

/// Magnitude of `a` carrying the sign of `b`.
fn sign_mag<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Householder reduction of a symmetric matrix held in row-major `a`.
///
/// On return `a` holds the accumulated orthogonal transform Q (such that
/// Q^T M Q is tridiagonal), `d` the diagonal and `e` the subdiagonal
/// (`e[0]` unused).
fn tred2<T: Scalar>(a: &mut [T], n: usize, d: &mut [T], e: &mut [T]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let mut scale = T::zero();
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == T::zero() {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] = a[i * n + k] / scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut fsum = T::zero();
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g = T::zero();
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    fsum += e[j] * a[i * n + j];
                }
                let hh = fsum / (h + h);
                for j in 0..=l {
                    let fj = a[i * n + j];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        a[j * n + k] = a[j * n + k] - (fj * e[k] + gj * a[i * n + k]);
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = T::zero();
    e[0] = T::zero();
    for i in 0..n {
        if d[i] != T::zero() {
            for j in 0..i {
                let mut g = T::zero();
                for k in 0..i {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..i {
                    a[k * n + j] = a[k * n + j] - g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = T::one();
        for j in 0..i {
            a[j * n + i] = T::zero();
            a[i * n + j] = T::zero();
        }
    }
}

/// Implicit-shift QL iteration on the tridiagonal (`d`, `e`), rotating the
/// rows of `zt` (the transposed transform) alongside; row `i` of `zt` ends
/// up as the eigenvector of `d[i]`.
fn tqli<T: Scalar>(d: &mut [T], e: &mut [T], n: usize, zt: &mut [T]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    for l in 0..n {
        let mut sweeps = 0usize;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(SpabmError::NonConvergence {
                    iterations: MAX_QL_SWEEPS,
                    residual: e[l].abs().to_f64().unwrap_or(f64::NAN),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (e[l] + e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + sign_mag(r, g));
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + (c + c) * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = zt.split_at_mut((i + 1) * n);
                let row_i = &mut lo[i * n..(i + 1) * n];
                let row_i1 = &mut hi[..n];
                for k in 0..n {
                    f = row_i1[k];
                    row_i1[k] = s * row_i[k] + c * f;
                    row_i[k] = c * row_i[k] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. Small asymmetries (up to `1e-6` of the largest
/// magnitude) are averaged out; larger ones are rejected.
pub fn sym_eigen<T: Scalar>(m: &ArrayView2<'_, T>) -> Result<(Array1<T>, Array2<T>)> {
    let (r, c) = m.dim();
    if r != c {
        return Err(SpabmError::InvalidMatrix(format!(
            "eigendecomposition needs a square matrix, got {r}x{c}"
        )));
    }
    let n = r;
    if n == 0 {
        return Err(SpabmError::InvalidMatrix("empty matrix".into()));
    }
    let mut scale = T::zero();
    for &x in m.iter() {
        if !x.is_finite() {
            return Err(SpabmError::InvalidMatrix("non-finite entry".into()));
        }
        scale = scale.max(x.abs());
    }
    let half = T::real(0.5);
    let tol = T::real(1e-6) * scale.max(T::one());
    let mut a = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let diff = (m[[i, j]] - m[[j, i]]).abs();
            if diff > tol {
                return Err(SpabmError::InvalidMatrix(format!(
                    "asymmetry {diff} at ({i},{j})"
                )));
            }
            a[i * n + j] = (m[[i, j]] + m[[j, i]]) * half;
        }
    }

    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut a, n, &mut d, &mut e);

    // Rotations in tqli touch pairs of eigenvectors; keeping them as rows
    // makes those sweeps contiguous.
    let mut zt = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            zt[j * n + i] = a[i * n + j];
        }
    }
    tqli(&mut d, &mut e, n, &mut zt)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].partial_cmp(&d[y]).expect("finite eigenvalues"));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let vectors = Array2::from_shape_fn((n, n), |(row, col)| zt[order[col] * n + row]);
    Ok((values, vectors))
}
