use netext_core::stage1::propositions::{large_capacity_cost_threshold, large_capacity_price_rise};
use netext_core::stage1::{best_response_5g, best_response_wifi, default_starts, nash_equilibrium};
use netext_core::{optimal_price, MarketParams, SensitivityDistribution, SolverConfig};
use proptest::prelude::*;

fn market(q: f64, alpha: f64, c: f64, beta_share: f64) -> MarketParams {
    MarketParams::default()
        .with(|r| {
            r.q = q;
            r.alpha = alpha;
            r.c = c;
            r.beta = beta_share * 1e5 / q;
        })
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // The 5G operator can always ignore WiFi, so it never earns less.
    #[test]
    fn entry_never_hurts_5g(q in 20.0..250.0f64, alpha in 0.0..0.95f64, c in 0.0..150.0f64, beta_share in 0.0..1.2f64) {
        let p = market(q, alpha, c, beta_share);
        let u = SensitivityDistribution::uniform();
        let cfg = SolverConfig::for_params(&p);
        let e = nash_equilibrium(&p, &u, &cfg, &default_starts(&p)).unwrap();
        let b = optimal_price(&p, &u);
        if e.converged {
            prop_assert!(e.profit_5g >= b.profit * (1.0 - 1e-6), "{e:?} {b:?}");
        }
        if beta_share >= 1.0 {
            prop_assert_eq!(e.profit_5g, b.profit);
        }
        prop_assert!(e.p2_star >= p.c());
        prop_assert!(e.profit_wifi >= 0.0);
    }
}

#[test]
fn converged_equilibria_are_mutual_best_responses() {
    let tn = SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap();
    for (q, alpha, c) in [(30.0, 0.5, 50.0), (120.0, 0.8, 100.0), (210.0, 0.5, 50.0)] {
        let p = market(q, alpha, c, 0.0);
        let cfg = SolverConfig::for_params(&p);
        let e = nash_equilibrium(&p, &tn, &cfg, &default_starts(&p)).unwrap();
        assert!(e.converged, "Q={q}");
        let b1 = best_response_5g(&p, &tn, e.p2_star, &cfg).unwrap();
        let b2 = best_response_wifi(&p, &tn, e.p1_star, &cfg).unwrap();
        assert!(
            (b1.price - e.p1_star).abs() <= cfg.eps1,
            "Q={q}: {b1:?} vs {}",
            e.p1_star
        );
        assert!(
            (b2.price - e.p2_star).abs() <= cfg.eps2,
            "Q={q}: {b2:?} vs {}",
            e.p2_star
        );
    }
}

#[test]
fn cheap_wifi_with_large_capacity_raises_5g_price() {
    let u = SensitivityDistribution::uniform();
    for q in [150.0, 200.0, 240.0] {
        let base = market(q, 0.6, 0.0, 0.0);
        let p = base
            .with(|r| r.c = 0.5 * large_capacity_cost_threshold(&base).unwrap())
            .unwrap();
        assert!(large_capacity_price_rise(&p));
        let e = nash_equilibrium(&p, &u, &SolverConfig::for_params(&p), &default_starts(&p)).unwrap();
        let b = optimal_price(&p, &u);
        assert!(e.p1_star > b.p1_bar, "Q={q}: {} vs {}", e.p1_star, b.p1_bar);
        assert!(e.profit_5g > b.profit);
    }
}
