use netext_core::oracle::{cutoff_labels, labels_follow_cutoffs};
use netext_core::stage2::{choice_of, equilibrium, equilibrium_general, equilibrium_uniform, wifi_price_ceiling};
use netext_core::{ChoiceLabel, MarketParams, SensitivityDistribution};
use proptest::prelude::*;

fn market(q: f64, alpha: f64, beta_share: f64) -> MarketParams {
    MarketParams::default()
        .with(|r| {
            r.q = q;
            r.alpha = alpha;
            r.beta = beta_share * 1e5 / q;
        })
        .unwrap()
}

fn dist(kind: u8) -> SensitivityDistribution {
    match kind {
        0 => SensitivityDistribution::uniform(),
        1 => SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap(),
        2 => SensitivityDistribution::truncated_exponential(1.5).unwrap(),
        _ => SensitivityDistribution::truncated_pareto(2.0, 0.5).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solvers_agree_on_uniform(q in 20.0..250.0f64, alpha in 0.05..0.95f64, p1 in 0.0..2000.0f64, p2 in 0.0..600.0f64) {
        let p = market(q, alpha, 0.0);
        let u = SensitivityDistribution::uniform();
        let a = equilibrium_uniform(&p, p1, p2).unwrap();
        let b = equilibrium_general(&p, &u, p1, p2).unwrap();
        prop_assert!((a.state.x1 - b.state.x1).abs() < 1e-8, "{:?} {:?}", a.state, b.state);
        prop_assert!((a.state.x2 - b.state.x2).abs() < 1e-8, "{:?} {:?}", a.state, b.state);
    }

    #[test]
    fn equilibrium_is_consistent(
        q in 20.0..250.0f64,
        alpha in 0.0..0.95f64,
        beta_share in 0.0..1.2f64,
        kind in 0u8..4,
        p1 in 0.0..2100.0f64,
        p2 in 0.0..700.0f64,
    ) {
        let p = market(q, alpha, beta_share);
        let d = dist(kind);
        let eq = equilibrium(&p, &d, p1, p2).unwrap();
        let s = eq.state;
        prop_assert!(s.x1 >= 0.0 && s.x2 >= 0.0 && s.x1 + s.x2 <= 1.0 + 1e-12);
        prop_assert!(eq.residual <= 1e-7, "{eq:?}");
        if p2 > wifi_price_ceiling(&p) || beta_share >= 1.0 || alpha == 0.0 {
            prop_assert_eq!(s.x2, 0.0);
        }
        if s.x2 > 0.0 {
            prop_assert!((d.cdf(eq.cut_low).unwrap() - s.x1).abs() < 1e-9);
            prop_assert!((d.cdf(eq.cut_high).unwrap() - s.x1 - s.x2).abs() < 1e-9);
        }
        // Lowest sensitivity never prefers WiFi.
        prop_assert_ne!(choice_of(&p, 0.0, &eq, p1, p2).unwrap(), ChoiceLabel::FiveGPlusWiFi);
        let labels = cutoff_labels(&p, &d, p1, p2, 120).unwrap();
        prop_assert!(labels_follow_cutoffs(&labels));
    }

    #[test]
    fn wifi_demand_falls_with_its_price(q in 20.0..250.0f64, alpha in 0.05..0.95f64, p1 in 0.0..2000.0f64, p2 in 0.0..500.0f64, dp in 0.0..100.0f64) {
        let p = market(q, alpha, 0.0);
        let lo = equilibrium_uniform(&p, p1, p2).unwrap();
        let hi = equilibrium_uniform(&p, p1, p2 + dp).unwrap();
        prop_assert!(hi.state.x2 <= lo.state.x2 + 1e-12);
    }
}

#[test]
fn congestion_at_capacity_kills_wifi_for_every_family() {
    for kind in 0..4 {
        let p = market(90.0, 0.8, 1.0);
        let d = dist(kind);
        for p1 in [0.0, 700.0, 1400.0] {
            assert_eq!(equilibrium(&p, &d, p1, 0.0).unwrap().state.x2, 0.0);
        }
    }
}
