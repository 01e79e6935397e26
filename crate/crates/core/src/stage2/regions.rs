//! Price thresholds that split the Stage II price plane into regimes
//! (uniform sensitivity, equal benefits, uncongested WiFi).

use serde::{Deserialize, Serialize};

use super::{equilibrium_uniform, Regime};
use crate::distributions::SensitivityDistribution;
use crate::error::{Error, Result};
use crate::model::MarketParams;
use crate::roots::{bisect, scan_roots, Polynomial};

/// Thresholds of the regime map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionThresholds {
    /// Maximizer of `x(1 − x)(1 − αx²)`.
    pub x2_hat: f64,
    /// Largest WiFi price that still supports a full-market split.
    pub p2_hat: f64,
    /// Interior-split WiFi price at `p1_hat`; absent with `p1_hat`.
    pub p2_hat_prime: Option<f64>,
    /// 5G price where the two WiFi boundaries of the map meet; absent when
    /// the defining equation has no root in its interval.
    pub p1_hat: Option<f64>,
    /// Interval `[V1 − ū − k(1 − αx̂2²)², V1 − ū − k(1 − α)²)` for `p1_hat`.
    pub p1_hat_interval: (f64, f64),
}

/// `4αx³ − 3αx² − 2x + 1`, the derivative of `x(1 − x)(1 − αx²)`.
pub fn x2_hat_polynomial(alpha: f64) -> Polynomial {
    Polynomial::new(vec![1.0, -2.0, -3.0 * alpha, 4.0 * alpha])
}

/// Unique root in `[0, 1]` of `4αx³ − 3αx² − 2x + 1`.
pub fn solve_x2_hat(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
            domain: "(0, 1)",
        });
    }
    let h = x2_hat_polynomial(alpha);
    let roots = scan_roots(|x| h.eval(x), 0.0, 1.0, 1e-3, 1e-12);
    roots.first().copied().ok_or(Error::NoBracket { lo: 0.0, hi: 1.0 })
}

/// Left-hand side of the equation defining `p1_hat`, written in
/// `t = √((V1 − ū − p1)/k)`. NaN where `3αt > 1` or `t > 1`.
pub fn p1_hat_residual_t(alpha: f64, t: f64) -> f64 {
    let y2 = (1.0 - t) / alpha;
    let r = (1.0 - 3.0 * alpha * t).sqrt();
    let x_m = (1.0 - r) / (3.0 * alpha);
    y2 + x_m * (t - (1.0 + 3.0 * alpha * t - r) / (9.0 * alpha)) - y2.sqrt()
}

/// All thresholds of the regime map for the given market.
pub fn region_thresholds(params: &MarketParams) -> Result<RegionThresholds> {
    let (a, k, m) = (params.alpha(), params.k(), params.margin());
    let x = solve_x2_hat(a)?;
    let p2_hat = a * x * k * (1.0 - a * x * x) * (1.0 - x);
    let t_lo = 1.0 - a;
    let t_hi = (1.0 - a * x * x).min(1.0 / (3.0 * a));
    let interval = (m - k * (1.0 - a * x * x).powi(2), m - k * (1.0 - a).powi(2));

    let mut t_root = None;
    if t_hi > t_lo {
        let f = |t: f64| p1_hat_residual_t(a, t);
        let n = 1000;
        let mut prev = (t_lo, f(t_lo));
        for i in 1..=n {
            let t = t_lo + (t_hi - t_lo) * i as f64 / n as f64;
            let v = f(t);
            if v == 0.0 {
                t_root = Some(t);
                break;
            }
            if prev.1.is_finite() && v.is_finite() && prev.1.signum() != v.signum() && prev.0 > t_lo {
                t_root = bisect(f, prev.0, t, 0.0).ok();
                break;
            }
            prev = (t, v);
        }
    }
    let p1_hat = t_root.map(|t| m - k * t * t);
    let p2_hat_prime = t_root.map(|t| {
        let y = ((1.0 - t) / a).sqrt();
        a * k * t * y * (1.0 - y)
    });
    Ok(RegionThresholds {
        x2_hat: x,
        p2_hat,
        p2_hat_prime,
        p1_hat,
        p1_hat_interval: interval,
    })
}

/// Regime at `(p1, p2)` together with the map thresholds.
pub fn region_classify(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
) -> Result<(Regime, RegionThresholds)> {
    if !dist.is_uniform() || !params.is_baseline() || params.alpha() == 0.0 {
        return Err(Error::Unsupported(
            "the regime map needs uniform sensitivity, V1 = V2, beta = 0 and alpha > 0".into(),
        ));
    }
    let eq = equilibrium_uniform(params, p1, p2)?;
    Ok((eq.regime, region_thresholds(params)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, alpha: f64) -> MarketParams {
        MarketParams::default()
            .with(|r| {
                r.q = q;
                r.alpha = alpha;
            })
            .unwrap()
    }

    #[test]
    fn x2_hat_limits_and_sign_pattern() {
        assert!((solve_x2_hat(1e-9).unwrap() - 0.5).abs() < 1e-8);
        for alpha in [0.1, 0.5, 0.9] {
            let x = solve_x2_hat(alpha).unwrap();
            let h = x2_hat_polynomial(alpha);
            assert!(h.eval(x).abs() < 1e-10);
            for i in 0..=1000 {
                let t = i as f64 / 1000.0;
                if t < x - 1e-9 {
                    assert!(h.eval(t) >= 0.0);
                } else if t > x + 1e-9 {
                    assert!(h.eval(t) < 0.0);
                }
            }
        }
        assert!(solve_x2_hat(0.0).is_err());
        assert!(solve_x2_hat(1.0).is_err());
    }

    #[test]
    fn x2_hat_maximizes_full_market_price() {
        let alpha = 0.5;
        let x = solve_x2_hat(alpha).unwrap();
        let g = |x: f64| x * (1.0 - x) * (1.0 - alpha * x * x);
        for i in 0..=1000 {
            assert!(g(i as f64 / 1000.0) <= g(x) + 1e-15);
        }
    }

    #[test]
    fn p1_hat_in_interval_when_present() {
        for alpha in [0.5, 0.6, 0.8, 0.95] {
            let th = region_thresholds(&params(30.0, alpha)).unwrap();
            let p = th.p1_hat.expect("root exists for this alpha");
            let (lo, hi) = th.p1_hat_interval;
            assert!(p >= lo && p < hi, "{alpha}: {p} not in [{lo}, {hi})");
        }
        assert!(region_thresholds(&params(30.0, 0.2)).unwrap().p1_hat.is_none());
    }

    #[test]
    fn low_prices_fill_the_market() {
        let p = params(60.0, 0.5);
        let th = region_thresholds(&p).unwrap();
        let u = SensitivityDistribution::uniform();
        let (r, _) = region_classify(&p, &u, p.margin() - p.k(), 0.9 * th.p2_hat).unwrap();
        assert_eq!(r, Regime::FullMarketSplit);
        let (r, _) = region_classify(&p, &u, 2000.0, 3000.0).unwrap();
        assert_eq!(r, Regime::Empty);
        let bad = SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap();
        assert!(region_classify(&p, &bad, 0.0, 0.0).is_err());
    }

    #[test]
    fn small_capacity_small_coverage_leaves_users_out() {
        // Q < N/(V1 − ū) and α < 1 − √((V1 − ū)/k).
        let p = params(30.0, 0.2);
        let u = SensitivityDistribution::uniform();
        let mut seen = false;
        for i in 0..40 {
            for j in 1..40 {
                let (r, _) = region_classify(&p, &u, 50.0 * i as f64, 10.0 * j as f64).unwrap();
                assert_ne!(r, Regime::FullMarketSplit);
                seen |= r == Regime::InteriorSplit;
            }
        }
        assert!(seen);
    }
}
