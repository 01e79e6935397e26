//! Brute-force checks of the analytic solvers: a finite population of users
//! best-responding to each other, a grid search for the pre-WiFi price and
//! an audit of the cutoff pattern.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benchmark::benchmark_profit;
use crate::distributions::SensitivityDistribution;
use crate::error::{Error, Result};
use crate::model::{ChoiceLabel, MarketParams};
use crate::stage2::{choice_of, equilibrium, SubscriptionEquilibrium};

/// Round limit of [`simulate_choices`].
pub const MAX_ROUNDS: usize = 10_000;
/// Smallest population accepted by the simulation.
pub const MIN_AGENTS: usize = 100;

/// Order in which agents revise their choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Everyone reacts to the same snapshot of fractions; each agent acts on
    /// its new choice with probability 1/2, so the population does not
    /// jump back and forth as one block.
    Synchronous,
    /// One agent at a time in a fresh random order each round, fractions
    /// updated after every switch.
    RandomSequential,
}

/// Choices the population starts from.
#[derive(Debug, Clone, Copy)]
pub enum Start<'a> {
    AllNeither,
    AllWifi,
    /// Labels read off a computed Stage II equilibrium.
    Equilibrium(&'a SubscriptionEquilibrium),
}

/// A finite population of users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPopulation {
    pub thetas: Vec<f64>,
    pub choices: Vec<ChoiceLabel>,
    pub seed: u64,
}

/// Outcome of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub x1: f64,
    pub x2: f64,
    /// A full round ended with no agent wanting to switch.
    pub converged: bool,
    pub rounds: usize,
}

/// Payoff terms that do not depend on the agent.
struct Payoffs {
    v1: f64,
    gap: f64,
    k: f64,
    alpha: f64,
    beta: f64,
    u_bar: f64,
    p1: f64,
    p2: f64,
}

impl Payoffs {
    fn new(params: &MarketParams, p1: f64, p2: f64) -> Self {
        Self {
            v1: params.v1(),
            gap: params.benefit_gap(),
            k: params.k(),
            alpha: params.alpha(),
            beta: params.beta(),
            u_bar: params.u_bar(),
            p1,
            p2,
        }
    }

    /// Best option for an agent with sensitivity `theta` when `n1`, `n2`
    /// other agents out of `n` take 5G only and 5G+WiFi. The agent's own
    /// choice is counted in each option it weighs.
    fn best(&self, theta: f64, n1: usize, n2: usize, n: f64) -> ChoiceLabel {
        let u1 = {
            let (x1, x2) = ((n1 + 1) as f64 / n, n2 as f64 / n);
            let load = x1 + x2 * (1.0 - self.alpha * x2);
            self.v1 - self.k * load * theta - self.p1
        };
        let u2 = {
            let (x1, x2) = (n1 as f64 / n, (n2 + 1) as f64 / n);
            let ax = self.alpha * x2;
            let load = x1 + x2 * (1.0 - ax);
            self.v1 - ax * self.gap - self.p1 - self.p2 - (1.0 - ax) * self.k * load * theta - ax * self.beta * theta
        };
        if u1 >= u2 && u1 >= self.u_bar {
            ChoiceLabel::FiveGOnly
        } else if u2 > u1 && u2 >= self.u_bar {
            ChoiceLabel::FiveGPlusWiFi
        } else {
            ChoiceLabel::Neither
        }
    }
}

fn counts(choices: &[ChoiceLabel]) -> (usize, usize) {
    choices.iter().fold((0, 0), |(a, b), c| match c {
        ChoiceLabel::FiveGOnly => (a + 1, b),
        ChoiceLabel::FiveGPlusWiFi => (a, b + 1),
        ChoiceLabel::Neither => (a, b),
    })
}

/// Removes `c` from the counts.
fn without(c: ChoiceLabel, (n1, n2): (usize, usize)) -> (usize, usize) {
    match c {
        ChoiceLabel::FiveGOnly => (n1 - 1, n2),
        ChoiceLabel::FiveGPlusWiFi => (n1, n2 - 1),
        ChoiceLabel::Neither => (n1, n2),
    }
}

fn with(c: ChoiceLabel, (n1, n2): (usize, usize)) -> (usize, usize) {
    match c {
        ChoiceLabel::FiveGOnly => (n1 + 1, n2),
        ChoiceLabel::FiveGPlusWiFi => (n1, n2 + 1),
        ChoiceLabel::Neither => (n1, n2),
    }
}

impl AgentPopulation {
    /// `n_agents` sensitivities drawn from `dist`, everyone starting out.
    pub fn sample(dist: &SensitivityDistribution, n_agents: usize, seed: u64) -> Result<Self> {
        if n_agents < MIN_AGENTS {
            return Err(Error::InvalidParameter {
                field: "n_agents",
                reason: format!("must be at least {MIN_AGENTS}, got {n_agents}"),
            });
        }
        let thetas = dist.sample(n_agents, seed)?;
        Ok(Self {
            choices: vec![ChoiceLabel::Neither; thetas.len()],
            thetas,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// Current `(x1, x2)`.
    pub fn fractions(&self) -> (f64, f64) {
        let (n1, n2) = counts(&self.choices);
        let n = self.len() as f64;
        (n1 as f64 / n, n2 as f64 / n)
    }

    /// Resets every choice according to `start`.
    pub fn reset(&mut self, params: &MarketParams, start: Start, p1: f64, p2: f64) -> Result<()> {
        match start {
            Start::AllNeither => self.choices.fill(ChoiceLabel::Neither),
            Start::AllWifi => self.choices.fill(ChoiceLabel::FiveGPlusWiFi),
            Start::Equilibrium(eq) => {
                for (c, &t) in self.choices.iter_mut().zip(&self.thetas) {
                    *c = choice_of(params, t, eq, p1, p2)?;
                }
            }
        }
        Ok(())
    }

    /// Number of agents whose best response differs from their choice.
    pub fn unhappy(&self, params: &MarketParams, p1: f64, p2: f64) -> usize {
        let pay = Payoffs::new(params, p1, p2);
        let n = self.len() as f64;
        let total = counts(&self.choices);
        self.choices
            .iter()
            .zip(&self.thetas)
            .filter(|&(&c, &t)| {
                let (n1, n2) = without(c, total);
                pay.best(t, n1, n2, n) != c
            })
            .count()
    }

    /// Best-response dynamics from the current choices.
    pub fn run(&mut self, params: &MarketParams, p1: f64, p2: f64, rule: UpdateRule) -> SimulationOutcome {
        let pay = Payoffs::new(params, p1, p2);
        let n = self.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mut want = vec![ChoiceLabel::Neither; self.len()];
        for round in 1..=MAX_ROUNDS {
            let mut moved = 0usize;
            match rule {
                UpdateRule::RandomSequential => {
                    order.shuffle(&mut rng);
                    let mut total = counts(&self.choices);
                    for &i in &order {
                        let c = self.choices[i];
                        let (n1, n2) = without(c, total);
                        let b = pay.best(self.thetas[i], n1, n2, n);
                        if b != c {
                            total = with(b, (n1, n2));
                            self.choices[i] = b;
                            moved += 1;
                        }
                    }
                }
                UpdateRule::Synchronous => {
                    let total = counts(&self.choices);
                    let mut unhappy = 0usize;
                    for (i, w) in want.iter_mut().enumerate() {
                        let c = self.choices[i];
                        let (n1, n2) = without(c, total);
                        *w = pay.best(self.thetas[i], n1, n2, n);
                        unhappy += usize::from(*w != c);
                    }
                    if unhappy == 0 {
                        return self.outcome(true, round);
                    }
                    for (c, &w) in self.choices.iter_mut().zip(&want) {
                        if w != *c && rng.gen::<bool>() {
                            *c = w;
                            moved += 1;
                        }
                    }
                    // Keep going while anyone wants to switch, even if the
                    // coin flips happened to freeze everyone this round.
                    moved = moved.max(1);
                }
            }
            if moved == 0 {
                return self.outcome(true, round);
            }
        }
        self.outcome(false, MAX_ROUNDS)
    }

    fn outcome(&self, converged: bool, rounds: usize) -> SimulationOutcome {
        let (x1, x2) = self.fractions();
        SimulationOutcome {
            x1,
            x2,
            converged,
            rounds,
        }
    }
}

/// Empirical Stage II fractions reached by `n_agents` sampled users who
/// start out of the market and repeatedly best-respond.
#[allow(clippy::too_many_arguments)]
pub fn simulate_choices(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
    n_agents: usize,
    seed: u64,
    rule: UpdateRule,
) -> Result<SimulationOutcome> {
    simulate_from(params, dist, p1, p2, n_agents, seed, rule, Start::AllNeither)
}

/// [`simulate_choices`] from a chosen starting configuration.
#[allow(clippy::too_many_arguments)]
pub fn simulate_from(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
    n_agents: usize,
    seed: u64,
    rule: UpdateRule,
    start: Start,
) -> Result<SimulationOutcome> {
    for (what, v) in [("p1", p1), ("p2", p2)] {
        if !(v >= 0.0) {
            return Err(Error::Domain {
                what,
                value: v,
                domain: "[0, ∞)",
            });
        }
    }
    let mut pop = AgentPopulation::sample(dist, n_agents, seed)?;
    pop.reset(params, start, p1, p2)?;
    Ok(pop.run(params, p1, p2, rule))
}

/// Grid argmax of the pre-WiFi profit over `[0, V1 − ū]`; ties to the
/// lower price.
pub fn brute_force_benchmark_price(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    grid_step: f64,
) -> Result<(f64, f64)> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "grid_step",
            reason: format!("must be positive and finite, got {grid_step}"),
        });
    }
    let m = params.margin();
    let steps = (m / grid_step).floor() as usize;
    let mut best = (0.0, benchmark_profit(params, dist, 0.0));
    for i in 1..=steps + 1 {
        let p = (grid_step * i as f64).min(m);
        let v = benchmark_profit(params, dist, p);
        if v > best.1 {
            best = (p, v);
        }
    }
    Ok(best)
}

/// Whether the labels along `n_grid` evenly spaced θ read `1*2*0*` at the
/// computed equilibrium for `(p1, p2)`.
pub fn cutoff_structure_audit(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
    n_grid: usize,
) -> Result<bool> {
    Ok(labels_follow_cutoffs(&cutoff_labels(params, dist, p1, p2, n_grid)?))
}

/// Labels along `n_grid` evenly spaced θ in `[0, 1]` at the computed
/// equilibrium.
pub fn cutoff_labels(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
    n_grid: usize,
) -> Result<Vec<ChoiceLabel>> {
    if n_grid < 100 {
        return Err(Error::InvalidParameter {
            field: "n_grid",
            reason: format!("must be at least 100, got {n_grid}"),
        });
    }
    let eq = equilibrium(params, dist, p1, p2)?;
    (0..n_grid)
        .map(|i| choice_of(params, i as f64 / (n_grid - 1) as f64, &eq, p1, p2))
        .collect()
}

/// `1*2*0*`: 5G only, then 5G+WiFi, then out, each block possibly empty.
pub fn labels_follow_cutoffs(labels: &[ChoiceLabel]) -> bool {
    let rank = |c: &ChoiceLabel| match c {
        ChoiceLabel::FiveGOnly => 0,
        ChoiceLabel::FiveGPlusWiFi => 1,
        ChoiceLabel::Neither => 2,
    };
    labels.windows(2).all(|w| rank(&w[0]) <= rank(&w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{optimal_price, subscription_given_price};
    use crate::stage2::{equilibrium_uniform, Regime};

    fn params(edit: impl FnOnce(&mut crate::model::ParamRecord)) -> MarketParams {
        MarketParams::default().with(edit).unwrap()
    }

    #[test]
    fn priced_out_market_stays_empty() {
        let p = MarketParams::default();
        let u = SensitivityDistribution::uniform();
        for rule in [UpdateRule::Synchronous, UpdateRule::RandomSequential] {
            let o = simulate_choices(&p, &u, 2000.0, 3000.0, 1000, 1, rule).unwrap();
            assert_eq!((o.x1, o.x2), (0.0, 0.0));
            assert!(o.converged);
        }
    }

    #[test]
    fn no_coverage_matches_benchmark() {
        let p = params(|r| {
            r.alpha = 0.0;
            r.q = 60.0;
        });
        let d = SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap();
        let n = 20_000;
        let want = subscription_given_price(&p, &d, 1200.0).unwrap().x1_bar;
        let o = simulate_choices(&p, &d, 1200.0, 10.0, n, 7, UpdateRule::RandomSequential).unwrap();
        assert_eq!(o.x2, 0.0);
        assert!((o.x1 - want).abs() <= 2.0 / (n as f64).sqrt(), "{} vs {want}", o.x1);
    }

    #[test]
    fn equilibrium_start_is_nearly_stationary() {
        let p = params(|r| r.q = 60.0);
        let u = SensitivityDistribution::uniform();
        let eq = equilibrium_uniform(&p, 300.0, 100.0).unwrap();
        assert_eq!(eq.regime, Regime::FullMarketSplit);
        let n = 20_000;
        let o = simulate_from(
            &p,
            &u,
            300.0,
            100.0,
            n,
            3,
            UpdateRule::RandomSequential,
            Start::Equilibrium(&eq),
        )
        .unwrap();
        assert!(o.converged);
        let tol = 3.0 / (n as f64).sqrt();
        assert!(
            (o.x1 - eq.state.x1).abs() <= tol && (o.x2 - eq.state.x2).abs() <= tol,
            "{o:?} {eq:?}"
        );
    }

    #[test]
    fn deterministic_under_seed() {
        let p = params(|r| r.q = 30.0);
        let u = SensitivityDistribution::uniform();
        let a = simulate_choices(&p, &u, 1000.0, 40.0, 5000, 11, UpdateRule::Synchronous).unwrap();
        let b = simulate_choices(&p, &u, 1000.0, 40.0, 5000, 11, UpdateRule::Synchronous).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn population_validation() {
        let u = SensitivityDistribution::uniform();
        assert!(AgentPopulation::sample(&u, 99, 0).is_err());
        let pop = AgentPopulation::sample(&u, 100, 0).unwrap();
        assert_eq!(pop.len(), pop.choices.len());
        assert!(pop.thetas.iter().all(|t| (0.0..=1.0).contains(t)));
    }

    #[test]
    fn grid_price_near_closed_form() {
        let u = SensitivityDistribution::uniform();
        for q in [30.0, 180.0] {
            let p = params(|r| r.q = q);
            let (price, profit) = brute_force_benchmark_price(&p, &u, 0.5).unwrap();
            let exact = optimal_price(&p, &u);
            assert!(
                (price - exact.p1_bar).abs() <= 0.5,
                "Q={q}: {price} vs {}",
                exact.p1_bar
            );
            assert!(profit <= exact.profit * (1.0 + 1e-12));
        }
        assert!(brute_force_benchmark_price(&MarketParams::default(), &u, 0.0).is_err());
    }

    #[test]
    fn cutoff_patterns() {
        let u = SensitivityDistribution::uniform();
        let p = params(|r| r.q = 60.0);
        assert!(cutoff_structure_audit(&p, &u, 300.0, 100.0, 200).unwrap());
        let labels = cutoff_labels(&p, &u, 300.0, 100.0, 200).unwrap();
        assert!(!labels.contains(&ChoiceLabel::Neither));

        let congested = params(|r| {
            r.q = 60.0;
            r.beta = 1e5 / 60.0;
        });
        let labels = cutoff_labels(&congested, &u, 800.0, 10.0, 200).unwrap();
        assert!(labels_follow_cutoffs(&labels));
        assert!(!labels.contains(&ChoiceLabel::FiveGPlusWiFi));

        let labels = cutoff_labels(&p, &u, 2500.0, 10.0, 100).unwrap();
        assert!(labels.iter().all(|&c| c == ChoiceLabel::Neither));
        assert!(cutoff_labels(&p, &u, 0.0, 0.0, 99).is_err());

        use ChoiceLabel::*;
        assert!(labels_follow_cutoffs(&[FiveGOnly, FiveGPlusWiFi, Neither]));
        assert!(!labels_follow_cutoffs(&[FiveGPlusWiFi, FiveGOnly]));
    }
}
