//! Polynomial Stage II solver for uniform sensitivity with equal benefits and
//! uncongested WiFi.
//!
//! With `F(θ) = θ` both candidate families reduce to one polynomial in `x2`:
//! a quartic when the whole market subscribes and a cubic when the marginal
//! WiFi user is indifferent to leaving. Roots are isolated exactly between
//! critical points, so close root pairs are never merged.

use super::{check_prices, no_wifi_candidate, Candidate, Family, Regime, SubscriptionEquilibrium};
use crate::distributions::SensitivityDistribution;
use crate::error::{Error, Result};
use crate::model::{MarketParams, SubscriptionState};
use crate::roots::Polynomial;

/// Rounding allowance on `x1 ≥ 0` for interior roots; a root with `x1 = 0`
/// exactly (free WiFi) is otherwise lost to cancellation in `s − x + αx²`.
const X1_SLACK: f64 = 1e-12;

/// `αk·x(1 − αx²)(1 − x) − p2`, whose roots give full-market splits.
pub fn boundary_polynomial(params: &MarketParams, p2: f64) -> Polynomial {
    let (a, k) = (params.alpha(), params.k());
    Polynomial::new(vec![-p2, a * k, -a * k, -a * a * k, a * a * k])
}

/// `αks·x(s − x + αx²) − p2` with `s = √((V1 − ū − p1)/k)`, whose roots give
/// interior splits. `None` when `p1 ≥ V1 − ū`.
pub fn interior_polynomial(params: &MarketParams, p1: f64, p2: f64) -> Option<(Polynomial, f64)> {
    let (a, k) = (params.alpha(), params.k());
    let slack = params.margin() - p1;
    if slack <= 0.0 {
        return None;
    }
    let s = (slack / k).sqrt();
    let poly = Polynomial::new(vec![-p2, a * k * s * s, -a * k * s, a * a * k * s]);
    Some((poly, s))
}

/// Stage II equilibrium for uniform θ, `V1 = V2` and `β = 0`.
pub fn equilibrium_uniform(params: &MarketParams, p1: f64, p2: f64) -> Result<SubscriptionEquilibrium> {
    if !params.is_baseline() {
        return Err(Error::Unsupported(
            "the polynomial solver needs V1 = V2 and beta = 0".into(),
        ));
    }
    check_prices(p1, p2)?;
    let uniform = SensitivityDistribution::uniform();
    let mut candidates = vec![no_wifi_candidate(params, &uniform, p1)];
    let (a, k, m) = (params.alpha(), params.k(), params.margin());
    if a == 0.0 || p1 >= m {
        return Ok(SubscriptionEquilibrium::select(candidates));
    }

    let quartic = boundary_polynomial(params, p2);
    let boundary = quartic
        .real_roots_in(0.0, 1.0)
        .into_iter()
        .rfind(|&x| x > 0.0 && k * (1.0 - a * x * x).powi(2) <= m - p1);
    if let Some(x) = boundary {
        candidates.push(Candidate {
            family: Family::Boundary,
            state: SubscriptionState { x1: 1.0 - x, x2: x },
            cut_low: 1.0 - x,
            cut_high: 1.0,
            regime: Regime::FullMarketSplit,
            residual: quartic.eval(x).abs() / k,
        });
    }

    if let Some((cubic, s)) = interior_polynomial(params, p1, p2) {
        let interior = cubic
            .real_roots_in(0.0, 1.0)
            .into_iter()
            .rfind(|&x| x > 0.0 && s - x + a * x * x >= -X1_SLACK && s + a * x * x < 1.0);
        if let Some(x) = interior {
            let x1 = (s - x + a * x * x).max(0.0);
            candidates.push(Candidate {
                family: Family::Interior,
                state: SubscriptionState { x1, x2: x },
                cut_low: x1,
                cut_high: x1 + x,
                regime: Regime::InteriorSplit,
                residual: cubic.eval(x).abs() / k,
            });
        }
    }
    Ok(SubscriptionEquilibrium::select(candidates))
}
