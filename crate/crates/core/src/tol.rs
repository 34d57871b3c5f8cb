//! Numerical tolerances shared across the crate.

use crate::scalar::Scalar;

/// Eigenvalues closer than this factor times the matching tolerance make
/// partition recovery ill-conditioned; validation warns about such specs.
pub const EIGEN_SEPARATION_FACTOR: f64 = 100.0;

/// One knob per kind of numeric check.
///
/// `construction` bounds self-adjointness defects of freshly built operators,
/// `unitarity` bounds deviations of bases from unitarity, `predicate` is the
/// default threshold for commutation/orthogonality predicates, `eigen` is the
/// eigenvalue matching tolerance for partition recovery, and `decompose` is
/// the acceptance residual for map decompositions.
#[derive(Clone, Copy, Debug)]
pub struct ToleranceConfig<T> {
    pub construction: T,
    pub unitarity: T,
    pub predicate: T,
    pub eigen: T,
    pub decompose: T,
}

impl<T: Scalar> Default for ToleranceConfig<T> {
    fn default() -> Self {
        ToleranceConfig {
            construction: T::from_f64_lossy(1e-12),
            unitarity: T::from_f64_lossy(1e-10),
            predicate: T::from_f64_lossy(1e-8),
            eigen: T::from_f64_lossy(1e-9),
            decompose: T::from_f64_lossy(1e-6),
        }
    }
}

impl<T: Scalar> ToleranceConfig<T> {
    /// Override the predicate threshold, keeping everything else at defaults.
    pub fn with_predicate(predicate: T) -> Self {
        ToleranceConfig {
            predicate,
            ..Self::default()
        }
    }
}
