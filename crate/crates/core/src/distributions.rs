//! Congestion-sensitivity distributions on the normalized support `[0, 1]`.
//!
//! Every non-uniform family is truncated to `[0, 1]` and renormalized by the
//! mass it places there, so `cdf(0) == 0` and `cdf(1) == 1` hold exactly and
//! the density stays continuous (no endpoint atoms).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{check_unit, Error, Result};

/// Inverse-CDF bisection stops once the bracket is this narrow.
pub const INVERSE_CDF_WIDTH: f64 = 1e-12;

/// Serialized form of a distribution: `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    TruncatedNormal {
        mean: f64,
        stdev: f64,
    },
    TruncatedExponential {
        rate: f64,
    },
    /// Pareto type II (Lomax) density `∝ (1 + θ/scale)^-(shape+1)`, which
    /// starts at zero and is non-increasing on the whole support.
    TruncatedPareto {
        shape: f64,
        scale: f64,
    },
}

/// Distribution of the user congestion sensitivity θ.
///
/// Normalizing constants are computed once at construction so the hot
/// `cdf`/`pdf` paths cost a single special-function call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionKind", into = "DistributionKind")]
pub struct SensitivityDistribution {
    kind: DistributionKind,
    /// Lower-tail offset subtracted before normalization.
    offset: f64,
    /// Mass of the parent distribution on `[0, 1]`.
    mass: f64,
}

impl SensitivityDistribution {
    pub fn uniform() -> Self {
        Self {
            kind: DistributionKind::Uniform,
            offset: 0.0,
            mass: 1.0,
        }
    }

    pub fn truncated_normal(mean: f64, stdev: f64) -> Result<Self> {
        DistributionKind::TruncatedNormal { mean, stdev }.try_into()
    }

    pub fn truncated_exponential(rate: f64) -> Result<Self> {
        DistributionKind::TruncatedExponential { rate }.try_into()
    }

    pub fn truncated_pareto(shape: f64, scale: f64) -> Result<Self> {
        DistributionKind::TruncatedPareto { shape, scale }.try_into()
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DistributionKind::Uniform)
    }

    /// Whether the density is non-increasing on `[0, 1]`, the hypothesis
    /// under which the benchmark price has a closed form.
    pub fn has_nonincreasing_pdf(&self) -> bool {
        match self.kind {
            DistributionKind::Uniform
            | DistributionKind::TruncatedExponential { .. }
            | DistributionKind::TruncatedPareto { .. } => true,
            DistributionKind::TruncatedNormal { mean, .. } => mean <= 0.0,
        }
    }

    /// Cumulative probability `F(θ)`.
    pub fn cdf(&self, theta: f64) -> Result<f64> {
        check_unit("theta", theta)?;
        Ok(self.cdf_clamped(theta))
    }

    /// Density `f(θ)`.
    pub fn pdf(&self, theta: f64) -> Result<f64> {
        check_unit("theta", theta)?;
        Ok(self.pdf_clamped(theta))
    }

    /// `F(θ)` with θ clamped into the support; used by the solvers' inner loops.
    #[inline]
    pub fn cdf_clamped(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= 1.0 {
            return 1.0;
        }
        let raw = match self.kind {
            DistributionKind::Uniform => return theta,
            DistributionKind::TruncatedNormal { mean, stdev } => std_normal_cdf((theta - mean) / stdev) - self.offset,
            DistributionKind::TruncatedExponential { rate } => -(-rate * theta).exp_m1(),
            DistributionKind::TruncatedPareto { shape, scale } => -(-shape * (theta / scale).ln_1p()).exp_m1(),
        };
        (raw / self.mass).clamp(0.0, 1.0)
    }

    /// `f(θ)` with θ clamped into the support.
    #[inline]
    pub fn pdf_clamped(&self, theta: f64) -> f64 {
        let theta = theta.clamp(0.0, 1.0);
        match self.kind {
            DistributionKind::Uniform => 1.0,
            DistributionKind::TruncatedNormal { mean, stdev } => {
                let z = (theta - mean) / stdev;
                (-0.5 * z * z).exp() / (stdev * (2.0 * std::f64::consts::PI).sqrt()) / self.mass
            }
            DistributionKind::TruncatedExponential { rate } => rate * (-rate * theta).exp() / self.mass,
            DistributionKind::TruncatedPareto { shape, scale } => {
                shape / scale * (-(shape + 1.0) * (theta / scale).ln_1p()).exp() / self.mass
            }
        }
    }

    /// Quantile `F⁻¹(q)`: exact for the uniform law, bisection otherwise.
    pub fn inverse_cdf(&self, q: f64) -> Result<f64> {
        check_unit("q", q)?;
        Ok(self.inverse_cdf_clamped(q))
    }

    pub fn inverse_cdf_clamped(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return 1.0;
        }
        if self.is_uniform() {
            return q;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > INVERSE_CDF_WIDTH {
            let mid = 0.5 * (lo + hi);
            if self.cdf_clamped(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse-transform sample of `count` sensitivities; deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidParameter {
                field: "count",
                reason: "must be at least 1".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count).map(|_| self.inverse_cdf_clamped(rng.gen::<f64>())).collect())
    }
}

impl Default for SensitivityDistribution {
    fn default() -> Self {
        Self::uniform()
    }
}

impl TryFrom<DistributionKind> for SensitivityDistribution {
    type Error = Error;

    fn try_from(kind: DistributionKind) -> Result<Self> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and positive, got {v}"),
                })
            }
        };
        let (offset, mass) = match kind {
            DistributionKind::Uniform => (0.0, 1.0),
            DistributionKind::TruncatedNormal { mean, stdev } => {
                positive("stdev", stdev)?;
                if !mean.is_finite() {
                    return Err(Error::InvalidParameter {
                        field: "mean",
                        reason: "must be finite".into(),
                    });
                }
                let lo = std_normal_cdf(-mean / stdev);
                let hi = std_normal_cdf((1.0 - mean) / stdev);
                (lo, hi - lo)
            }
            DistributionKind::TruncatedExponential { rate } => {
                positive("rate", rate)?;
                (0.0, -(-rate).exp_m1())
            }
            DistributionKind::TruncatedPareto { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
                (0.0, -(-shape * (1.0 / scale).ln_1p()).exp_m1())
            }
        };
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter {
                field: "kind",
                reason: "distribution places no mass on [0, 1]".into(),
            });
        }
        Ok(Self { kind, offset, mass })
    }
}

impl From<SensitivityDistribution> for DistributionKind {
    fn from(d: SensitivityDistribution) -> Self {
        d.kind
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}
