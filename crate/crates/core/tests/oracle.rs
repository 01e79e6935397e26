use netext_core::oracle::{brute_force_benchmark_price, simulate_from, AgentPopulation, Start, UpdateRule};
use netext_core::stage2::equilibrium;
use netext_core::{optimal_price, MarketParams, SensitivityDistribution};

#[test]
fn grid_search_matches_optimal_price_for_every_family() {
    let families = [
        SensitivityDistribution::uniform(),
        SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap(),
        SensitivityDistribution::truncated_exponential(1.5).unwrap(),
        SensitivityDistribution::truncated_pareto(2.0, 0.5).unwrap(),
    ];
    for d in &families {
        for q in [30.0, 90.0, 180.0] {
            let p = MarketParams::default().with(|r| r.q = q).unwrap();
            let step = 1.0;
            let (price, profit) = brute_force_benchmark_price(&p, d, step).unwrap();
            let exact = optimal_price(&p, d);
            assert!(
                (price - exact.p1_bar).abs() <= step,
                "{d:?} Q={q}: {price} vs {}",
                exact.p1_bar
            );
            assert!(profit <= exact.profit * (1.0 + 1e-9));
        }
    }
}

#[test]
fn update_order_does_not_matter() {
    let n = 20_000;
    let tol = 3.0 / (n as f64).sqrt();
    let d = SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap();
    let p = MarketParams::default().with(|r| r.q = 60.0).unwrap();
    for (p1, p2) in [(300.0, 100.0), (900.0, 40.0), (1500.0, 10.0)] {
        let eq = equilibrium(&p, &d, p1, p2).unwrap();
        let outcomes: Vec<_> = [UpdateRule::Synchronous, UpdateRule::RandomSequential]
            .into_iter()
            .map(|rule| simulate_from(&p, &d, p1, p2, n, 5, rule, Start::Equilibrium(&eq)).unwrap())
            .collect();
        assert!(outcomes.iter().all(|o| o.converged));
        assert!((outcomes[0].x1 - outcomes[1].x1).abs() <= tol, "{outcomes:?}");
        assert!((outcomes[0].x2 - outcomes[1].x2).abs() <= tol, "{outcomes:?}");
    }
}

#[test]
fn wifi_free_outcome_is_reached_from_an_empty_market() {
    // A lone WiFi adopter adds no coverage, so WiFi never takes off from
    // nobody subscribing; the population settles on the WiFi-free outcome.
    let n = 20_000;
    let u = SensitivityDistribution::uniform();
    let p = MarketParams::default().with(|r| r.q = 60.0).unwrap();
    let mut pop = AgentPopulation::sample(&u, n, 9).unwrap();
    let o = pop.run(&p, 800.0, 60.0, UpdateRule::RandomSequential);
    let eq = equilibrium(&p, &u, 800.0, 60.0).unwrap();
    assert!(o.converged);
    assert_eq!(o.x2, 0.0);
    assert!((o.x1 - eq.candidates[0].state.x1).abs() <= 3.0 / (n as f64).sqrt());
}
