//! Stage II: which users subscribe to 5G only, add WiFi, or stay out, for a
//! given pair of prices.
//!
//! Candidates come from three families: an interior split (the marginal
//! WiFi user is indifferent to leaving), a full-market split (every user
//! subscribes), and the WiFi-free outcome, which is always self-consistent.
//! The selected equilibrium is the candidate with the most WiFi users.

mod general;
mod regions;
mod uniform;

use serde::{Deserialize, Serialize};

pub use general::{equilibrium_general, equilibrium_general_with, Stage2Options, WifiPriceSlice, DEFAULT_SCAN_STEP};
pub use regions::{
    p1_hat_residual_t, region_classify, region_thresholds, solve_x2_hat, x2_hat_polynomial, RegionThresholds,
};
pub use uniform::{boundary_polynomial, equilibrium_uniform, interior_polynomial};

use crate::benchmark::{subscription_unchecked, BenchmarkBranch};
use crate::distributions::SensitivityDistribution;
use crate::error::{check_unit, Error, Result};
use crate::model::{five_g_line, wifi_line, ChoiceLabel, MarketParams, SubscriptionState};

/// Shape of a Stage II outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Everyone subscribes; some users add WiFi.
    FullMarketSplit,
    /// Some users add WiFi, the least tolerant users stay out.
    InteriorSplit,
    /// Everyone subscribes to 5G only.
    FiveGOnlyFull,
    /// Part of the market takes 5G only, nobody adds WiFi.
    FiveGOnlyInterior,
    Empty,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FullMarketSplit => "full_market_split",
            Regime::InteriorSplit => "interior_split",
            Regime::FiveGOnlyFull => "five_g_only_full",
            Regime::FiveGOnlyInterior => "five_g_only_interior",
            Regime::Empty => "empty",
        }
    }

    pub fn has_wifi(self) -> bool {
        matches!(self, Regime::FullMarketSplit | Regime::InteriorSplit)
    }
}

/// Candidate family an equilibrium was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Interior,
    Boundary,
    NoWifi,
}

/// One self-consistent solution of a candidate family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub family: Family,
    pub state: SubscriptionState,
    pub cut_low: f64,
    pub cut_high: f64,
    pub regime: Regime,
    pub residual: f64,
}

/// Selected Stage II equilibrium plus every candidate that was considered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubscriptionEquilibrium {
    pub state: SubscriptionState,
    /// θ of the user indifferent between 5G only and adding WiFi.
    pub cut_low: f64,
    /// θ above which users stay out.
    pub cut_high: f64,
    pub regime: Regime,
    /// Largest defect of the defining equations, scaled by `N/Q`.
    pub residual: f64,
    pub candidates: Vec<Candidate>,
    /// Set when two families tied on `x2` and the larger `x1` was kept.
    pub x1_tie_break: bool,
}

impl SubscriptionEquilibrium {
    pub(crate) fn select(candidates: Vec<Candidate>) -> Self {
        let mut best = 0;
        let mut tie = false;
        for (i, c) in candidates.iter().enumerate().skip(1) {
            let b = &candidates[best];
            if c.state.x2 > b.state.x2 {
                best = i;
                tie = false;
            } else if c.state.x2 == b.state.x2 && c.state.x2 > 0.0 {
                tie = true;
                if c.state.x1 > b.state.x1 {
                    best = i;
                }
            }
        }
        let c = candidates[best];
        Self {
            state: c.state,
            cut_low: c.cut_low,
            cut_high: c.cut_high,
            regime: c.regime,
            residual: c.residual,
            candidates,
            x1_tie_break: tie,
        }
    }
}

/// WiFi-free candidate: the pre-WiFi cutoff at price `p1`.
pub(crate) fn no_wifi_candidate(params: &MarketParams, dist: &SensitivityDistribution, p1: f64) -> Candidate {
    let sub = subscription_unchecked(params, dist, p1);
    let (regime, residual) = match sub.branch {
        BenchmarkBranch::FullMarket => (Regime::FiveGOnlyFull, 0.0),
        BenchmarkBranch::Empty => (Regime::Empty, 0.0),
        BenchmarkBranch::Interior => {
            let k = params.k();
            let gap = params.margin() - p1 - k * sub.x1_bar * sub.theta_cut;
            (Regime::FiveGOnlyInterior, gap.abs() / k)
        }
    };
    Candidate {
        family: Family::NoWifi,
        state: SubscriptionState {
            x1: sub.x1_bar,
            x2: 0.0,
        },
        cut_low: sub.theta_cut,
        cut_high: sub.theta_cut,
        regime,
        residual,
    }
}

/// Price above which no user can be attracted to WiFi at any `x2`:
/// `α·max_x x(k(1 − αx²) − β)`.
pub fn wifi_price_ceiling(params: &MarketParams) -> f64 {
    let (k, a, b) = (params.k(), params.alpha(), params.beta());
    if a == 0.0 || b >= k {
        return 0.0;
    }
    let x = ((k - b) / (3.0 * k * a)).sqrt().min(1.0);
    a * x * (k * (1.0 - a * x * x) - b)
}

pub(crate) fn check_prices(p1: f64, p2: f64) -> Result<()> {
    for (what, v) in [("p1", p1), ("p2", p2)] {
        if !(v >= 0.0) {
            return Err(Error::Domain {
                what,
                value: v,
                domain: "[0, ∞)",
            });
        }
    }
    Ok(())
}

/// Whether the polynomial solver applies: uniform sensitivity, equal
/// benefits and uncongested WiFi.
pub fn uniform_solver_applies(params: &MarketParams, dist: &SensitivityDistribution) -> bool {
    dist.is_uniform() && params.is_baseline()
}

/// Stage II equilibrium with the fastest applicable solver.
pub fn equilibrium(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
) -> Result<SubscriptionEquilibrium> {
    if uniform_solver_applies(params, dist) {
        equilibrium_uniform(params, p1, p2)
    } else {
        equilibrium_general(params, dist, p1, p2)
    }
}

/// Service choice of a user with sensitivity θ at a computed equilibrium.
/// Ties go to the cheaper option: 5G only over adding WiFi, and joining
/// over staying out.
pub fn choice_of(
    params: &MarketParams,
    theta: f64,
    eq: &SubscriptionEquilibrium,
    p1: f64,
    p2: f64,
) -> Result<ChoiceLabel> {
    check_unit("theta", theta)?;
    let u_bar = params.u_bar();
    if theta <= eq.cut_low && five_g_line(params, &eq.state, p1).at(theta) >= u_bar {
        return Ok(ChoiceLabel::FiveGOnly);
    }
    if theta > eq.cut_low && theta <= eq.cut_high && wifi_line(params, &eq.state, p1, p2).at(theta) >= u_bar {
        return Ok(ChoiceLabel::FiveGPlusWiFi);
    }
    Ok(ChoiceLabel::Neither)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceiling_bounds_wifi_demand() {
        let p = MarketParams::default().with(|r| r.q = 60.0).unwrap();
        let u = SensitivityDistribution::uniform();
        let cap = wifi_price_ceiling(&p);
        let mut best = 0.0f64;
        for i in 0..=200 {
            let p1 = 10.0 * i as f64;
            let above = equilibrium_uniform(&p, p1, cap * 1.000001).unwrap();
            assert_eq!(above.state.x2, 0.0);
            for j in 0..50 {
                let p2 = cap * j as f64 / 50.0;
                if equilibrium_uniform(&p, p1, p2).unwrap().state.x2 > 0.0 {
                    best = best.max(p2);
                }
            }
        }
        assert!(best > 0.0 && best < cap, "{best} vs {cap}");
        let g = equilibrium_general(&p, &u, 1000.0, cap * 1.000001).unwrap();
        assert_eq!(g.state.x2, 0.0);
    }

    #[test]
    fn choice_pattern_over_grid() {
        let p = MarketParams::default().with(|r| r.q = 30.0).unwrap();
        let eq = equilibrium_uniform(&p, 1200.0, 30.0).unwrap();
        assert_eq!(eq.regime, Regime::InteriorSplit);
        let labels: Vec<u8> = (0..1000)
            .map(|i| choice_of(&p, i as f64 / 999.0, &eq, 1200.0, 30.0).unwrap().code())
            .collect();
        let rank = |c: u8| match c {
            1 => 0,
            2 => 1,
            _ => 2,
        };
        assert!(labels.windows(2).all(|w| rank(w[0]) <= rank(w[1])));
        assert_eq!(labels[0], 1);
        assert!(labels.contains(&2));
        assert_eq!(*labels.last().unwrap(), 0);
        let just_above = (eq.cut_high + 1e-6).min(1.0);
        assert_eq!(
            choice_of(&p, just_above, &eq, 1200.0, 30.0).unwrap(),
            ChoiceLabel::Neither
        );
    }

    #[test]
    fn lowest_sensitivity_never_adds_wifi() {
        let p = MarketParams::default().with(|r| r.q = 120.0).unwrap();
        for p2 in [1.0, 50.0, 150.0] {
            let eq = equilibrium_uniform(&p, 500.0, p2).unwrap();
            assert_ne!(choice_of(&p, 0.0, &eq, 500.0, p2).unwrap(), ChoiceLabel::FiveGPlusWiFi);
        }
    }
}
