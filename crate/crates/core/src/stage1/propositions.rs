//! Closed-form thresholds on capacity, coverage and WiFi cost, and the
//! predicates built from them.
//!
//! All of them describe the uniform-sensitivity market with equal benefits
//! and uncongested WiFi. The predicates return `false` for any other
//! parameter record; the sensitivity distribution is the caller's concern.

use crate::error::Result;
use crate::model::MarketParams;
use crate::stage2::solve_x2_hat;

/// `((1 − r)/3)·k·s·(s − ((1 − r)/(3α))(1 − (1 − r)/3))` with
/// `r = √(1 − 3αs)`; `None` when `3αs > 1` or `α = 0`.
fn cost_bound(alpha: f64, k: f64, s: f64) -> Option<f64> {
    if alpha <= 0.0 || 3.0 * alpha * s > 1.0 {
        return None;
    }
    let r = (1.0 - 3.0 * alpha * s).sqrt();
    let third = (1.0 - r) / 3.0;
    Some(third * k * s * (s - third / alpha * (1.0 - third)))
}

/// WiFi cost below which WiFi draws users at the pre-WiFi 5G price when
/// capacity is small.
pub fn small_capacity_cost_threshold(params: &MarketParams) -> Option<f64> {
    let (m, k) = (params.margin(), params.k());
    cost_bound(params.alpha(), k, (m / (3.0 * k)).sqrt())
}

/// Open interval of "non-small" WiFi cost for the small-capacity regime.
pub fn small_capacity_cost_interval(params: &MarketParams) -> Option<(f64, f64)> {
    let (m, k) = (params.margin(), params.k());
    let lo = cost_bound(params.alpha(), k, (m / (3.0 * k)).sqrt())?;
    let hi = cost_bound(params.alpha(), k, (m / k).sqrt())?;
    Some((lo, hi))
}

/// `αx̂2·k(1 − αx̂2²)(1 − x̂2)`, the WiFi cost bound for large capacity.
pub fn large_capacity_cost_threshold(params: &MarketParams) -> Result<f64> {
    let a = params.alpha();
    let x = solve_x2_hat(a)?;
    Ok(a * x * params.k() * (1.0 - a * x * x) * (1.0 - x))
}

/// Coverage above which medium capacity still raises the 5G price:
/// `(2√(1 − s)(1 − 2s)/(2 − 3s))²` with `s = √((V1 − ū)/(3N/Q))`.
pub fn medium_capacity_alpha_threshold(params: &MarketParams) -> f64 {
    let s = (params.margin() / (3.0 * params.k())).sqrt();
    (2.0 * (1.0 - s).sqrt() * (1.0 - 2.0 * s) / (2.0 - 3.0 * s)).powi(2)
}

/// Capacity `3N/(V1 − ū)` from which the pre-WiFi market is fully served.
pub fn large_capacity_bound(params: &MarketParams) -> f64 {
    3.0 * params.n() / params.margin()
}

/// Capacity `N/(V1 − ū)` below which capacity counts as small.
pub fn small_capacity_bound(params: &MarketParams) -> f64 {
    params.n() / params.margin()
}

/// Open capacity range `(3((√17 + 23)/32)²·N/(V1 − ū), 3N/(V1 − ū))`.
pub fn medium_capacity_range(params: &MarketParams) -> (f64, f64) {
    let r = (17f64.sqrt() + 23.0) / 32.0;
    let big = large_capacity_bound(params);
    (big * r * r, big)
}

/// Coverage bound `1 − √((V1 − ū)/(N/Q))` of the small-capacity regime.
pub fn small_alpha_bound(params: &MarketParams) -> f64 {
    1.0 - (params.margin() / params.k()).sqrt()
}

fn baseline(params: &MarketParams) -> bool {
    params.is_baseline() && params.alpha() > 0.0
}

fn cheap_for_large(params: &MarketParams) -> bool {
    large_capacity_cost_threshold(params).is_ok_and(|t| params.c() <= t)
}

/// Small capacity and cheap WiFi: the 5G profit rises strictly.
pub fn small_capacity_profit_gain(params: &MarketParams) -> bool {
    baseline(params)
        && params.q() < large_capacity_bound(params)
        && small_capacity_cost_threshold(params).is_some_and(|t| params.c() <= t)
}

/// Large capacity and cheap WiFi: the 5G price rises strictly. The same
/// conditions give a strict profit gain and lower payoffs for every user.
pub fn large_capacity_price_rise(params: &MarketParams) -> bool {
    baseline(params) && params.q() >= large_capacity_bound(params) && cheap_for_large(params)
}

/// Strict profit gain for large capacity; same conditions as [`large_capacity_price_rise`].
pub fn large_capacity_profit_gain(params: &MarketParams) -> bool {
    large_capacity_price_rise(params)
}

/// Every user loses; same conditions as [`large_capacity_price_rise`].
pub fn large_capacity_payoff_loss(params: &MarketParams) -> bool {
    large_capacity_price_rise(params)
}

/// Medium capacity, enough coverage and cheap WiFi: the 5G price rises.
pub fn medium_capacity_price_rise(params: &MarketParams) -> bool {
    let (lo, hi) = medium_capacity_range(params);
    baseline(params)
        && params.q() > lo
        && params.q() < hi
        && params.alpha() > medium_capacity_alpha_threshold(params)
        && cheap_for_large(params)
}

/// Small capacity, small coverage and moderately priced WiFi: the 5G price
/// falls.
pub fn small_capacity_price_cut(params: &MarketParams) -> bool {
    baseline(params)
        && params.q() < small_capacity_bound(params)
        && params.alpha() < small_alpha_bound(params)
        && small_capacity_cost_interval(params).is_some_and(|(lo, hi)| params.c() > lo && params.c() < hi)
}
