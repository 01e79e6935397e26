//! Pre-WiFi market: user cutoff for a given 5G price and the monopoly price.

use serde::{Deserialize, Serialize};

use crate::distributions::SensitivityDistribution;
use crate::error::{Error, Result};
use crate::model::MarketParams;
use crate::roots::{bisect, golden_max};

/// Which piece of the subscription map an outcome lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkBranch {
    Interior,
    FullMarket,
    Empty,
}

/// How an optimal price was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionPath {
    /// Uniform sensitivity, explicit formulas.
    Uniform,
    /// First-order condition for a non-increasing density.
    FirstOrder,
    /// Grid search with golden-section refinement.
    Numeric,
}

/// User response to a single 5G price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSubscription {
    pub x1_bar: f64,
    pub theta_cut: f64,
    pub branch: BenchmarkBranch,
}

/// Optimal pre-WiFi price and the market it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEquilibrium {
    pub p1_bar: f64,
    pub x1_bar: f64,
    pub theta_cut: f64,
    pub profit: f64,
    pub branch: BenchmarkBranch,
    pub path: SolutionPath,
}

/// Bracket width for the cutoff and first-order-condition bisections.
const THETA_TOL: f64 = 1e-12;
/// Golden-section tolerance of the numeric price search.
const PRICE_TOL: f64 = 1e-8;
/// Price grid points of the numeric search over `[0, V1 − ū]`.
pub const BENCHMARK_GRID: usize = 2000;

/// Subscription fraction and cutoff θ̄ induced by the price `p1_bar`.
pub fn subscription_given_price(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1_bar: f64,
) -> Result<BenchmarkSubscription> {
    if !(p1_bar >= 0.0) {
        return Err(Error::Domain {
            what: "p1_bar",
            value: p1_bar,
            domain: "[0, ∞)",
        });
    }
    Ok(subscription_unchecked(params, dist, p1_bar))
}

pub(crate) fn subscription_unchecked(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1_bar: f64,
) -> BenchmarkSubscription {
    let (m, k) = (params.margin(), params.k());
    if p1_bar <= m - k {
        return BenchmarkSubscription {
            x1_bar: 1.0,
            theta_cut: 1.0,
            branch: BenchmarkBranch::FullMarket,
        };
    }
    if p1_bar >= m {
        return BenchmarkSubscription {
            x1_bar: 0.0,
            theta_cut: 0.0,
            branch: BenchmarkBranch::Empty,
        };
    }
    let slack = m - p1_bar;
    let theta = if dist.is_uniform() {
        (slack / k).sqrt()
    } else {
        bisect(|t| slack - k * dist.cdf_clamped(t) * t, 0.0, 1.0, THETA_TOL)
            .expect("cutoff equation changes sign on [0, 1]")
    };
    BenchmarkSubscription {
        x1_bar: dist.cdf_clamped(theta),
        theta_cut: theta,
        branch: BenchmarkBranch::Interior,
    }
}

/// Pre-WiFi revenue `N x̄1 p̄1` at a given price.
pub fn benchmark_profit(params: &MarketParams, dist: &SensitivityDistribution, p1_bar: f64) -> f64 {
    params.n() * subscription_unchecked(params, dist, p1_bar.max(0.0)).x1_bar * p1_bar
}

/// Capacity at and above which the optimal benchmark price serves everyone,
/// `(2 + 1/f(1))·N/(V1 − ū)`; `None` when `f(1) = 0`.
pub fn full_market_capacity(params: &MarketParams, dist: &SensitivityDistribution) -> Option<f64> {
    let f1 = dist.pdf_clamped(1.0);
    (f1 > 0.0).then(|| (2.0 + 1.0 / f1) * params.n() / params.margin())
}

/// Profit-maximizing pre-WiFi price.
///
/// Uniform sensitivity uses the explicit formulas, other non-increasing
/// densities solve the first-order condition, and everything else (or a
/// density vanishing at θ = 1) falls back to [`numeric_optimal_price`].
pub fn optimal_price(params: &MarketParams, dist: &SensitivityDistribution) -> BenchmarkEquilibrium {
    let (m, k, n) = (params.margin(), params.k(), params.n());
    let full = |path| BenchmarkEquilibrium {
        p1_bar: m - k,
        x1_bar: 1.0,
        theta_cut: 1.0,
        profit: n * 1.0 * (m - k),
        branch: BenchmarkBranch::FullMarket,
        path,
    };
    if dist.is_uniform() {
        if params.q() >= 3.0 * n / m {
            return full(SolutionPath::Uniform);
        }
        let p = 2.0 / 3.0 * m;
        let x = (m / (3.0 * k)).sqrt();
        return BenchmarkEquilibrium {
            p1_bar: p,
            x1_bar: x,
            theta_cut: x,
            profit: n * x * p,
            branch: BenchmarkBranch::Interior,
            path: SolutionPath::Uniform,
        };
    }
    if dist.has_nonincreasing_pdf() {
        if let Some(q_full) = full_market_capacity(params, dist) {
            if params.q() >= q_full {
                return full(SolutionPath::FirstOrder);
            }
            let foc = |t: f64| {
                let f = dist.cdf_clamped(t);
                dist.pdf_clamped(t) * (m - 2.0 * k * f * t) - k * f * f
            };
            if let Ok(t) = bisect(foc, 0.0, 1.0, THETA_TOL) {
                let x = dist.cdf_clamped(t);
                let p = m - k * t * x;
                return BenchmarkEquilibrium {
                    p1_bar: p,
                    x1_bar: x,
                    theta_cut: t,
                    profit: n * x * p,
                    branch: BenchmarkBranch::Interior,
                    path: SolutionPath::FirstOrder,
                };
            }
        }
    }
    numeric_optimal_price(params, dist)
}

/// Grid search over `[0, V1 − ū]` with [`BENCHMARK_GRID`] cells, refined by
/// golden section inside the winning cell.
pub fn numeric_optimal_price(params: &MarketParams, dist: &SensitivityDistribution) -> BenchmarkEquilibrium {
    let m = params.margin();
    let step = m / BENCHMARK_GRID as f64;
    let profit = |p: f64| benchmark_profit(params, dist, p);
    let mut best = (0.0, profit(0.0));
    for i in 1..=BENCHMARK_GRID {
        let p = step * i as f64;
        let v = profit(p);
        if v > best.1 {
            best = (p, v);
        }
    }
    let (lo, hi) = ((best.0 - step).max(0.0), (best.0 + step).min(m));
    let refined = golden_max(profit, lo, hi, PRICE_TOL);
    let p = if refined.1 > best.1 { refined.0 } else { best.0 };
    let sub = subscription_unchecked(params, dist, p);
    BenchmarkEquilibrium {
        p1_bar: p,
        x1_bar: sub.x1_bar,
        theta_cut: sub.theta_cut,
        profit: params.n() * sub.x1_bar * p,
        branch: sub.branch,
        path: SolutionPath::Numeric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(q: f64) -> MarketParams {
        MarketParams::default().with(|r| r.q = q).unwrap()
    }

    #[test]
    fn price_branches() {
        let p = params(30.0);
        let u = SensitivityDistribution::uniform();
        let empty = subscription_given_price(&p, &u, 2000.0).unwrap();
        assert_eq!((empty.x1_bar, empty.branch), (0.0, BenchmarkBranch::Empty));
        let p = params(180.0);
        let full = subscription_given_price(&p, &u, 2000.0 - 1e5 / 180.0).unwrap();
        assert_eq!((full.x1_bar, full.branch), (1.0, BenchmarkBranch::FullMarket));
        assert!(subscription_given_price(&p, &u, -1.0).is_err());
    }

    #[test]
    fn uniform_cutoff_quadratic() {
        let p = params(30.0);
        let u = SensitivityDistribution::uniform();
        let s = subscription_given_price(&p, &u, 4000.0 / 3.0).unwrap();
        assert_relative_eq!(s.theta_cut, 0.2f64.sqrt(), max_relative = 1e-14);
        // Same equation solved generically through a nearly flat normal.
        let flat = SensitivityDistribution::truncated_normal(0.5, 1e6).unwrap();
        let g = subscription_given_price(&p, &flat, 4000.0 / 3.0).unwrap();
        assert_relative_eq!(g.theta_cut, 0.2f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn uniform_closed_forms() {
        let u = SensitivityDistribution::uniform();
        let small = optimal_price(&params(30.0), &u);
        assert_relative_eq!(small.p1_bar, 4000.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(small.x1_bar, 0.2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(small.profit, 5.9628e7, max_relative = 1e-4);
        let big = optimal_price(&params(180.0), &u);
        assert_eq!(big.branch, BenchmarkBranch::FullMarket);
        assert_relative_eq!(big.p1_bar, 2000.0 - 1e5 / 180.0, max_relative = 1e-15);
        assert_relative_eq!(big.profit, 1.4444e8, max_relative = 1e-4);
    }

    #[test]
    fn numeric_agrees_with_closed_forms() {
        for dist in [
            SensitivityDistribution::uniform(),
            SensitivityDistribution::truncated_exponential(1.5).unwrap(),
            SensitivityDistribution::truncated_pareto(2.0, 0.5).unwrap(),
        ] {
            for q in [20.0, 30.0, 90.0, 140.0, 180.0, 300.0] {
                let p = params(q);
                let a = optimal_price(&p, &dist);
                let b = numeric_optimal_price(&p, &dist);
                assert!(a.profit >= b.profit * (1.0 - 1e-9), "{dist:?} Q={q}: {a:?} {b:?}");
                assert_relative_eq!(a.profit, b.profit, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn first_order_condition_holds() {
        let d = SensitivityDistribution::truncated_exponential(1.5).unwrap();
        let p = params(30.0);
        let e = optimal_price(&p, &d);
        assert_eq!(e.path, SolutionPath::FirstOrder);
        let (m, k) = (p.margin(), p.k());
        let (t, f) = (e.theta_cut, e.x1_bar);
        let foc = d.pdf(t).unwrap() * (m - 2.0 * k * f * t) - k * f * f;
        assert!(foc.abs() < 1e-6, "{foc}");
    }

    #[test]
    fn normal_uses_numeric_path() {
        let d = SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap();
        assert_eq!(optimal_price(&params(30.0), &d).path, SolutionPath::Numeric);
    }

    #[test]
    fn uniform_outcomes_grow_with_capacity() {
        let u = SensitivityDistribution::uniform();
        let mut prev = optimal_price(&params(5.0), &u);
        for i in 1..50 {
            let e = optimal_price(&params(5.0 + 6.0 * i as f64), &u);
            assert!(e.p1_bar >= prev.p1_bar - 1e-9);
            assert!(e.x1_bar >= prev.x1_bar);
            assert!(e.profit >= prev.profit);
            prev = e;
        }
    }

    proptest::proptest! {
        #[test]
        fn subscription_monotone(p1 in 0.0..2500.0f64, dp in 0.0..300.0f64, q in 5.0..400.0f64, dq in 0.0..50.0f64) {
            let d = SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap();
            let base = subscription_given_price(&params(q), &d, p1).unwrap().x1_bar;
            let dearer = subscription_given_price(&params(q), &d, p1 + dp).unwrap().x1_bar;
            let bigger = subscription_given_price(&params(q + dq), &d, p1).unwrap().x1_bar;
            proptest::prop_assert!(dearer <= base + 1e-12);
            proptest::prop_assert!(bigger >= base - 1e-12);
        }
    }
}
