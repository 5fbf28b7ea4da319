//! Best rank-one approximation via power iteration on `M^T M`.
//!
//! The alternating iteration is the production route for every block
//! estimate; a full eigendecomposition is used only by tests and the
//! brute-force oracle as an independent cross-check.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Result, SpabmError};
use crate::scalar::Scalar;

/// Iterations the leading singular value must stall (to machine precision)
/// before a slow-moving iterate is accepted. Near-tied leading singular
/// values make the direction drift arbitrarily slowly between equally good
/// factors; once sigma stops improving, the residual is final.
const PLATEAU_RUN: usize = 8;

/// Leading singular triple of a matrix: `sigma * u * v^T` is the closest
/// rank-one matrix in Frobenius norm. `u` and `v` have unit norm except for
/// the zero matrix, where both are zero and `sigma == 0`.
#[derive(Debug, Clone)]
pub struct RankOneFactor<T> {
    pub u: Array1<T>,
    pub v: Array1<T>,
    pub sigma: T,
}

impl<T: Scalar> RankOneFactor<T> {
    /// Materializes `sigma * u * v^T`.
    pub fn matrix(&self) -> Array2<T> {
        let (r, c) = (self.u.len(), self.v.len());
        // sigma * (u_i * v_j): grouping the factor product first keeps the
        // result exactly symmetric when u and v coincide.
        Array2::from_shape_fn((r, c), |(i, j)| self.sigma * (self.u[i] * self.v[j]))
    }

    fn zero(r: usize, c: usize) -> Self {
        Self {
            u: Array1::zeros(r),
            v: Array1::zeros(c),
            sigma: T::zero(),
        }
    }
}

fn normalize<T: Scalar>(v: &mut [T]) -> T {
    let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Deterministic perturbed restart used when the plain start stalls.
fn perturbed_start<T: Scalar>(len: usize) -> Vec<T> {
    let mut state = 0x9e3779b97f4a7c15u64;
    (0..len)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            T::one() + T::real(((state >> 11) as f64 / (1u64 << 53) as f64) * 0.5)
        })
        .collect()
}

fn iterate_general<T: Scalar>(
    m: &ArrayView2<'_, T>,
    mut v: Vec<T>,
    tol: T,
    max_iter: usize,
    frob2: T,
) -> std::result::Result<Vec<T>, (Vec<T>, T)> {
    let (rows, cols) = m.dim();
    let mut mv = vec![T::zero(); rows];
    let mut w = vec![T::zero(); cols];
    let mut delta = T::infinity();
    let stall_tol = T::epsilon() * T::real(4.0) * frob2;
    let mut prev_sigma2 = T::nan();
    let mut stalled = 0usize;
    for _ in 0..max_iter {
        let mut sigma2 = T::zero();
        for (i, slot) in mv.iter_mut().enumerate() {
            let mut acc = T::zero();
            for j in 0..cols {
                acc += m[[i, j]] * v[j];
            }
            *slot = acc;
            sigma2 += acc * acc;
        }
        for (j, slot) in w.iter_mut().enumerate() {
            let mut acc = T::zero();
            for i in 0..rows {
                acc += m[[i, j]] * mv[i];
            }
            *slot = acc;
        }
        if normalize(&mut w) == T::zero() {
            // Start lay in the null space; restart from the first nonzero
            // column's canonical vector.
            let j0 = (0..cols)
                .find(|&j| (0..rows).any(|i| m[[i, j]] != T::zero()))
                .expect("nonzero matrix has a nonzero column");
            v.iter_mut().for_each(|x| *x = T::zero());
            v[j0] = T::one();
            prev_sigma2 = T::nan();
            stalled = 0;
            continue;
        }
        delta = v
            .iter()
            .zip(&w)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        std::mem::swap(&mut v, &mut w);
        if delta < tol {
            return Ok(v);
        }
        // sigma^2 on the unit iterate is monotone under this recurrence, so
        // a machine-precision stall means no further residual improvement.
        if (sigma2 - prev_sigma2).abs() <= stall_tol {
            stalled += 1;
            if stalled >= PLATEAU_RUN {
                return Ok(v);
            }
        } else {
            stalled = 0;
        }
        prev_sigma2 = sigma2;
    }
    Err((v, delta))
}

/// Best rank-one approximation of an arbitrary rectangular matrix.
///
/// Power iteration on `M^T M` starting from the normalized all-ones vector
/// restricted to nonzero columns, falling back to a canonical vector and a
/// deterministic perturbed restart before reporting non-convergence.
/// Stops once the iterate moves by less than `tol` in max norm or the
/// leading singular value stalls at machine precision.
pub fn rank_one_approx<T: Scalar>(
    m: &ArrayView2<'_, T>,
    tol: T,
    max_iter: usize,
) -> Result<RankOneFactor<T>> {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Err(SpabmError::InvalidMatrix("empty block".into()));
    }
    if m.iter().all(|&x| x == T::zero()) {
        return Ok(RankOneFactor::zero(rows, cols));
    }
    let frob2 = m.iter().map(|&x| x * x).sum::<T>();
    let mut start = vec![T::zero(); cols];
    for j in 0..cols {
        if (0..rows).any(|i| m[[i, j]] != T::zero()) {
            start[j] = T::one();
        }
    }
    normalize(&mut start);

    let v = match iterate_general(m, start, tol, max_iter, frob2) {
        Ok(v) => v,
        Err(_) => {
            let mut retry = perturbed_start::<T>(cols);
            normalize(&mut retry);
            match iterate_general(m, retry, tol, max_iter, frob2) {
                Ok(v) => v,
                Err((_, delta)) => {
                    return Err(SpabmError::NonConvergence {
                        iterations: 2 * max_iter,
                        residual: delta.to_f64().unwrap_or(f64::NAN),
                    })
                }
            }
        }
    };

    let mut u = vec![T::zero(); rows];
    for (i, slot) in u.iter_mut().enumerate() {
        let mut acc = T::zero();
        for j in 0..cols {
            acc += m[[i, j]] * v[j];
        }
        *slot = acc;
    }
    let sigma = normalize(&mut u);
    if sigma == T::zero() {
        return Ok(RankOneFactor::zero(rows, cols));
    }
    Ok(RankOneFactor {
        u: Array1::from_vec(u),
        v: Array1::from_vec(v),
        sigma,
    })
}

/// Best rank-one approximation of a symmetric entrywise-nonnegative matrix,
/// returned in exactly symmetric form `lambda * w * w^T` with exact zeros on
/// zero rows.
///
/// For such matrices the spectral radius is attained at a nonnegative
/// eigenvalue, so power iteration on `M + I` (the shift breaks paired
/// `±lambda` spectra) converges to the optimal factor.
pub fn rank_one_approx_symmetric<T: Scalar>(
    m: &ArrayView2<'_, T>,
    tol: T,
    max_iter: usize,
) -> Result<RankOneFactor<T>> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(SpabmError::InvalidMatrix(format!(
            "symmetric rank-one approximation needs a square block, got {rows}x{cols}"
        )));
    }
    let n = rows;
    if n == 0 {
        return Err(SpabmError::InvalidMatrix("empty block".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if m[[i, j]] < T::zero() || m[[i, j]] != m[[j, i]] {
                return Err(SpabmError::InvalidMatrix(
                    "symmetric rank-one approximation needs symmetric nonnegative entries".into(),
                ));
            }
        }
    }
    if m.iter().all(|&x| x == T::zero()) {
        return Ok(RankOneFactor::zero(n, n));
    }
    let frob = m.iter().map(|&x| x * x).sum::<T>().sqrt();
    let stall_tol = T::epsilon() * T::real(4.0) * (frob + T::one());

    let iterate = |mut w: Vec<T>| -> std::result::Result<Vec<T>, (Vec<T>, T)> {
        let mut next = vec![T::zero(); n];
        let mut delta = T::infinity();
        let mut prev_lambda = T::nan();
        let mut stalled = 0usize;
        for _ in 0..max_iter {
            let mut quad = T::zero(); // w . (M + I) w == lambda + 1
            for (i, slot) in next.iter_mut().enumerate() {
                let mut acc = w[i]; // the +I shift
                for j in 0..n {
                    acc += m[[i, j]] * w[j];
                }
                *slot = acc;
                quad += acc * w[i];
            }
            normalize(&mut next);
            delta = w
                .iter()
                .zip(&next)
                .map(|(&a, &b)| (a - b).abs())
                .fold(T::zero(), T::max);
            std::mem::swap(&mut w, &mut next);
            if delta < tol {
                return Ok(w);
            }
            if (quad - prev_lambda).abs() <= stall_tol {
                stalled += 1;
                if stalled >= PLATEAU_RUN {
                    return Ok(w);
                }
            } else {
                stalled = 0;
            }
            prev_lambda = quad;
        }
        Err((w, delta))
    };

    let mut start = vec![T::zero(); n];
    for i in 0..n {
        if (0..n).any(|j| m[[i, j]] != T::zero()) {
            start[i] = T::one();
        }
    }
    normalize(&mut start);
    let mut w = match iterate(start) {
        Ok(w) => w,
        Err(_) => {
            let mut retry = perturbed_start::<T>(n);
            normalize(&mut retry);
            match iterate(retry) {
                Ok(w) => w,
                Err((_, delta)) => {
                    return Err(SpabmError::NonConvergence {
                        iterations: 2 * max_iter,
                        residual: delta.to_f64().unwrap_or(f64::NAN),
                    })
                }
            }
        }
    };

    // A zero row forces a zero eigenvector entry whenever lambda > 0; pin
    // those entries so downstream support checks see exact zeros.
    for i in 0..n {
        if (0..n).all(|j| m[[i, j]] == T::zero()) {
            w[i] = T::zero();
        }
    }
    if normalize(&mut w) == T::zero() {
        return Ok(RankOneFactor::zero(n, n));
    }
    let mut lambda = T::zero();
    for i in 0..n {
        for j in 0..n {
            lambda += w[i] * m[[i, j]] * w[j];
        }
    }
    let w = Array1::from_vec(w);
    Ok(RankOneFactor {
        u: w.clone(),
        v: w,
        sigma: lambda.max(T::zero()),
    })
}
