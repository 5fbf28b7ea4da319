//! Complexity penalties for penalized model selection.
//!
//! Each variant charges for the clustering (a per-node label plus the choice
//! of community sizes) and for the support of the popularity blocks. The
//! separable form prices each block's nonzero rows within its own community,
//! the non-separable form prices the total count across all blocks at once,
//! and the empirical form replaces the whole expression with a density-scaled
//! surrogate that behaves better at the sample sizes used in experiments.

use crate::error::{Result, SpabmError};
use crate::net::SupportFamily;
use crate::scalar::Scalar;

/// Which penalty expression [`penalty`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyVariant {
    /// Per-block code length: each support set is priced against its own
    /// community size.
    #[default]
    Separable,
    /// Joint code length: one term for the total support cardinality.
    NonSeparable,
    /// `density * n * K * sqrt(ln n * (ln K)^3)`; zero at `K = 1`.
    Empirical,
}

/// Weights and variant for [`penalty`]. `beta1` scales the support terms,
/// `beta2` the clustering terms; both default to one.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyParams<T> {
    pub beta1: T,
    pub beta2: T,
    pub variant: PenaltyVariant,
}

impl<T: Scalar> Default for PenaltyParams<T> {
    fn default() -> Self {
        Self {
            beta1: T::one(),
            beta2: T::one(),
            variant: PenaltyVariant::default(),
        }
    }
}

impl<T: Scalar> PenaltyParams<T> {
    pub fn with_variant(variant: PenaltyVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }
}

/// `count * ln(whole * e / count)` with the `0 * ln(. / 0) = 0` convention.
fn code_length<T: Scalar>(count: usize, whole: T) -> T {
    if count == 0 {
        return T::zero();
    }
    let c = T::count(count);
    c * (whole * T::one().exp() / c).ln()
}

/// Evaluates the complexity penalty for a clustering with community sizes
/// `sizes` and popularity support `support`.
///
/// `density` is the observed edge density of the network; only the empirical
/// variant reads it. Community sizes must be positive and each support set
/// must fit inside its row community.
pub fn penalty<T: Scalar>(
    sizes: &[usize],
    support: &SupportFamily,
    params: &PenaltyParams<T>,
    density: T,
) -> Result<T> {
    let k = sizes.len();
    if k == 0 || sizes.iter().any(|&s| s == 0) {
        return Err(SpabmError::InvalidParameter(
            "community sizes must be nonempty and positive".into(),
        ));
    }
    if support.k() != k {
        return Err(SpabmError::DimensionMismatch(format!(
            "support family has {} communities, sizes describe {}",
            support.k(),
            k
        )));
    }
    for kk in 0..k {
        for ll in 0..k {
            let set = support.set(kk, ll);
            if let Some(&last) = set.last() {
                if last >= sizes[kk] {
                    return Err(SpabmError::InvalidSupport(format!(
                        "support row {} exceeds community {} of size {}",
                        last + 1,
                        kk + 1,
                        sizes[kk]
                    )));
                }
            }
        }
    }
    let n: usize = sizes.iter().sum();
    let nf = T::count(n);
    let kf = T::count(k);

    if params.variant == PenaltyVariant::Empirical {
        if density < T::zero() || density > T::one() {
            return Err(SpabmError::InvalidParameter(format!(
                "density must lie in [0, 1], got {density}"
            )));
        }
        let ln_n = nf.ln();
        let ln_k = kf.ln();
        return Ok(density * nf * kf * (ln_n * ln_k * ln_k * ln_k).sqrt());
    }

    // Clustering cost shared by both code-length variants.
    let base = params.beta2 * (nf * kf.ln() + nf.ln());
    let support_term = match params.variant {
        PenaltyVariant::Separable => {
            let mut acc = T::zero();
            for kk in 0..k {
                let nk = T::count(sizes[kk]);
                for ll in 0..k {
                    acc += code_length(support.set(kk, ll).len(), nk);
                }
            }
            acc
        }
        PenaltyVariant::NonSeparable => code_length(support.total(), nf * kf),
        PenaltyVariant::Empirical => unreachable!(),
    };
    let size_term = match params.variant {
        PenaltyVariant::Separable => {
            params.beta2 * kf * sizes.iter().map(|&s| T::count(s).ln()).sum::<T>()
        }
        PenaltyVariant::NonSeparable => params.beta2 * (T::one() + T::one()) * nf.ln(),
        PenaltyVariant::Empirical => unreachable!(),
    };
    Ok(params.beta1 * support_term + size_term + base)
}
