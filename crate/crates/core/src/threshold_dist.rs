//! Prior distribution of the classification threshold.
//!
//! The threshold τ is treated as a continuous random variable supported on
//! `[a, b] ⊆ [0, 1]`. Averaging indicator functions over τ replaces them by
//! the cdf, which is what makes the expected confusion matrix smooth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WsolError};
use crate::num::Scalar;
use crate::special::{ln_beta, reg_inc_beta_normed};

const QUANTILE_TOL: f64 = 1e-14;
const QUANTILE_MAX_ITER: usize = 200;

/// Shape of a threshold prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionKind<T> {
    Uniform { a: T, b: T },
    Beta { alpha: T, beta: T },
}

/// Threshold prior: `Uniform(a, b)` or `Beta(alpha, beta)` on `[0, 1]`.
///
/// Immutable once built; construction validates every parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionKind<T>", into = "DistributionKind<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ThresholdDistribution<T: Scalar> {
    kind: DistributionKind<T>,
    // ln B(alpha, beta) for Beta, unused for Uniform
    ln_norm: T,
}

impl<T: Scalar> TryFrom<DistributionKind<T>> for ThresholdDistribution<T> {
    type Error = WsolError;

    fn try_from(kind: DistributionKind<T>) -> Result<Self> {
        match kind {
            DistributionKind::Uniform { a, b } => Self::uniform(a, b),
            DistributionKind::Beta { alpha, beta } => Self::beta(alpha, beta),
        }
    }
}

impl<T: Scalar> From<ThresholdDistribution<T>> for DistributionKind<T> {
    fn from(d: ThresholdDistribution<T>) -> Self {
        d.kind
    }
}

impl<T: Scalar> Default for ThresholdDistribution<T> {
    fn default() -> Self {
        Self {
            kind: DistributionKind::Uniform {
                a: T::zero(),
                b: T::one(),
            },
            ln_norm: T::zero(),
        }
    }
}

impl<T: Scalar> ThresholdDistribution<T> {
    pub fn uniform(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < T::zero() || b > T::one() || a >= b {
            return Err(WsolError::InvalidDistribution(format!(
                "uniform support must satisfy 0 <= a < b <= 1, got a={a}, b={b}"
            )));
        }
        Ok(Self {
            kind: DistributionKind::Uniform { a, b },
            ln_norm: T::zero(),
        })
    }

    /// Standard uniform prior on `[0, 1]`.
    pub fn standard_uniform() -> Self {
        Self::default()
    }

    pub fn beta(alpha: T, beta: T) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha <= T::zero() || beta <= T::zero() {
            return Err(WsolError::InvalidDistribution(format!(
                "beta shapes must be positive and finite, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self {
            kind: DistributionKind::Beta { alpha, beta },
            ln_norm: ln_beta(alpha, beta),
        })
    }

    pub fn kind(&self) -> DistributionKind<T> {
        self.kind
    }

    /// Support bounds `(a, b)`.
    pub fn support(&self) -> (T, T) {
        match self.kind {
            DistributionKind::Uniform { a, b } => (a, b),
            DistributionKind::Beta { .. } => (T::zero(), T::one()),
        }
    }

    /// True when the support is the whole unit interval.
    pub fn is_full_support(&self) -> bool {
        let (a, b) = self.support();
        a == T::zero() && b == T::one()
    }

    /// True for the `Uniform(0, 1)` prior, the only one under which the
    /// cross-entropy weights have a closed-form expectation.
    pub fn is_standard_uniform(&self) -> bool {
        matches!(self.kind, DistributionKind::Uniform { a, b } if a == T::zero() && b == T::one())
    }

    pub fn pdf(&self, x: T) -> T {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return T::zero();
        }
        match self.kind {
            DistributionKind::Uniform { a, b } => (b - a).recip(),
            DistributionKind::Beta { alpha, beta } => {
                let one = T::one();
                x.powf(alpha - one) * (one - x).powf(beta - one) / self.ln_norm.exp()
            }
        }
    }

    /// F(x) = ∫_a^x f; 0 at or below `a`, 1 at or above `b`.
    pub fn cdf(&self, x: T) -> T {
        let (lo, hi) = self.support();
        if x <= lo {
            return T::zero();
        }
        if x >= hi {
            return T::one();
        }
        match self.kind {
            DistributionKind::Uniform { a, b } => (x - a) / (b - a),
            DistributionKind::Beta { alpha, beta } => reg_inc_beta_normed(alpha, beta, x, self.ln_norm),
        }
    }

    pub fn mean(&self) -> T {
        match self.kind {
            DistributionKind::Uniform { a, b } => (a + b) * T::lit(0.5),
            DistributionKind::Beta { alpha, beta } => alpha / (alpha + beta),
        }
    }

    /// Inverse cdf. For Beta this is a safeguarded Newton iteration on
    /// [`Self::cdf`], so sampling and the cdf share one definition.
    pub fn quantile(&self, u: T) -> T {
        let (lo, hi) = self.support();
        let u = u.max(T::zero()).min(T::one());
        match self.kind {
            DistributionKind::Uniform { a, b } => a + (b - a) * u,
            DistributionKind::Beta { .. } => {
                if u <= T::zero() {
                    return lo;
                }
                if u >= T::one() {
                    return hi;
                }
                let tol = T::lit(QUANTILE_TOL).max(T::epsilon() * T::lit(4.0));
                let (mut left, mut right) = (lo, hi);
                let mut x = self.mean();
                for _ in 0..QUANTILE_MAX_ITER {
                    let err = self.cdf(x) - u;
                    if err > T::zero() {
                        right = x;
                    } else {
                        left = x;
                    }
                    let density = self.pdf(x);
                    let newton = x - err / density;
                    let next = if density > T::zero()
                        && newton.is_finite()
                        && newton > left
                        && newton < right
                    {
                        newton
                    } else {
                        (left + right) * T::lit(0.5)
                    };
                    let step = (next - x).abs();
                    x = next;
                    if step <= tol || right - left <= tol {
                        break;
                    }
                }
                x
            }
        }
    }

    /// One draw by inverse-cdf sampling, so draws and [`Self::cdf`] agree.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.gen();
        self.quantile(T::lit(u))
    }
}
