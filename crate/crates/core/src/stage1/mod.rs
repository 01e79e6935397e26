//! Stage I: operator best responses and the simultaneous-pricing Nash
//! equilibrium, each price response re-solving Stage II at every candidate.

pub mod propositions;
mod simplified;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use simplified::pi1_simplified;

use crate::benchmark::{optimal_price, BenchmarkBranch, BenchmarkEquilibrium};
use crate::distributions::SensitivityDistribution;
use crate::error::{Error, Result};
use crate::model::{MarketParams, SubscriptionState};
use crate::roots::golden_max;
use crate::stage2::{
    equilibrium_general_with, equilibrium_uniform, uniform_solver_applies, wifi_price_ceiling, Candidate, Family,
    Regime, Stage2Options, SubscriptionEquilibrium, WifiPriceSlice, DEFAULT_SCAN_STEP,
};

/// Rounds of refined best responses after the grid iteration settles.
const POLISH_ROUNDS: usize = 6;
/// Relative width at which golden-section refinement of a price stops.
const REFINE_REL_TOL: f64 = 1e-7;

/// Discretization and stopping rules of the Stage I search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sampling step of the Stage II candidate scans.
    pub eps0: f64,
    /// 5G price grid step.
    pub eps1: f64,
    /// WiFi price grid step.
    pub eps2: f64,
    pub max_br_iterations: usize,
    /// Largest price move still counted as standing still.
    pub fixed_point_tol: f64,
}

impl SolverConfig {
    /// Defaults scaled to the benefit levels of `params`.
    pub fn for_params(params: &MarketParams) -> Self {
        let eps1 = params.v1() / 2000.0;
        let eps2 = params.v2() / 2000.0;
        Self {
            eps0: DEFAULT_SCAN_STEP,
            eps1,
            eps2,
            max_br_iterations: 200,
            fixed_point_tol: 2.0 * eps1.max(eps2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("eps0", self.eps0),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("fixed_point_tol", self.fixed_point_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if self.eps0 > 0.5 {
            return Err(Error::InvalidParameter {
                field: "eps0",
                reason: format!("must be at most 0.5, got {}", self.eps0),
            });
        }
        if self.max_br_iterations == 0 {
            return Err(Error::InvalidParameter {
                field: "max_br_iterations",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn stage2_options(&self) -> Stage2Options {
        Stage2Options { scan_step: self.eps0 }
    }
}

/// A best-response price and the profit it earns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub price: f64,
    pub profit: f64,
}

/// End point of the search from one start (or the best point of a cycle).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashCandidate {
    pub p1: f64,
    pub p2: f64,
    pub profit_5g: f64,
    pub profit_wifi: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Outcome of the Stage I search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingEquilibrium {
    pub p1_star: f64,
    pub p2_star: f64,
    pub stage2: SubscriptionEquilibrium,
    pub profit_5g: f64,
    pub profit_wifi: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Distinct end points over all starts; the primary one is the converged
    /// point with the largest joint profit.
    pub candidates: Vec<NashCandidate>,
}

/// Stage II evaluation for one market, picking the applicable solver.
struct Market<'a> {
    params: &'a MarketParams,
    dist: &'a SensitivityDistribution,
    opts: Stage2Options,
    uniform: bool,
    ceiling: f64,
}

impl<'a> Market<'a> {
    fn new(params: &'a MarketParams, dist: &'a SensitivityDistribution, cfg: &SolverConfig) -> Self {
        Self {
            params,
            dist,
            opts: cfg.stage2_options(),
            uniform: uniform_solver_applies(params, dist),
            ceiling: wifi_price_ceiling(params),
        }
    }

    fn solve(&self, p1: f64, p2: f64) -> Result<SubscriptionEquilibrium> {
        if self.uniform {
            equilibrium_uniform(self.params, p1, p2)
        } else {
            equilibrium_general_with(self.params, self.dist, p1, p2, &self.opts)
        }
    }

    /// WiFi attracts nobody at this `p2`, whatever the 5G price.
    fn wifi_dead(&self, p2: f64) -> bool {
        self.params.wifi_inert() || p2 > self.ceiling
    }

    /// Total subscription `x1 + x2` as a function of `p1` at fixed `p2`.
    fn demand_5g(&self, p2: f64) -> Result<Box<dyn Fn(f64) -> f64 + '_>> {
        let m = self.params.margin();
        if self.uniform {
            let params = self.params;
            return Ok(Box::new(move |p1| {
                if p1 >= m {
                    return 0.0;
                }
                equilibrium_uniform(params, p1, p2).map_or(0.0, |e| e.state.total())
            }));
        }
        let slice = WifiPriceSlice::new(self.params, self.dist, p2, &self.opts)?;
        Ok(Box::new(move |p1| {
            if p1 >= m {
                return 0.0;
            }
            slice.solve(p1).map_or(0.0, |e| e.state.total())
        }))
    }

    fn wifi_demand(&self, p1: f64, p2: f64) -> f64 {
        if p1 >= self.params.margin() || self.wifi_dead(p2) {
            return 0.0;
        }
        self.solve(p1, p2).map_or(0.0, |e| e.state.x2)
    }
}

struct Grid {
    lo: f64,
    hi: f64,
    step: f64,
    len: usize,
}

impl Grid {
    fn new(lo: f64, hi: f64, step: f64) -> Self {
        let len = if hi > lo {
            ((hi - lo) / step - 1e-9).ceil() as usize + 1
        } else {
            1
        };
        Self { lo, hi, step, len }
    }

    fn at(&self, i: usize) -> f64 {
        (self.lo + self.step * i as f64).min(self.hi)
    }

    fn snap(&self, p: f64) -> usize {
        (((p - self.lo) / self.step).round().max(0.0) as usize).min(self.len - 1)
    }
}

fn check_rival(params: &MarketParams, p2: f64) -> Result<()> {
    if !(p2 >= params.c()) {
        return Err(Error::Domain {
            what: "p2",
            value: p2,
            domain: "[c, ∞)",
        });
    }
    Ok(())
}

/// Grid argmax of the 5G profit at WiFi price `p2`, scanning down from `V1`
/// and stopping once `N·p1` cannot beat the best value found. Ties go to
/// the lower price.
fn scan_5g(m: &Market, grid: &Grid, p2: f64) -> Result<(usize, f64)> {
    let n = m.params.n();
    let demand = m.demand_5g(p2)?;
    let mut best = (grid.len - 1, f64::NEG_INFINITY);
    for i in (0..grid.len).rev() {
        let p1 = grid.at(i);
        if n * p1 < best.1 {
            break;
        }
        let v = n * demand(p1) * p1;
        if v >= best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// Grid argmax of the WiFi profit at 5G price `p1`; ties to the lower price.
fn scan_wifi(m: &Market, grid: &Grid, p1: f64) -> (usize, f64) {
    let (n, c) = (m.params.n(), m.params.c());
    let mut best = (0, 0.0);
    if p1 >= m.params.margin() || m.params.wifi_inert() {
        return best;
    }
    for j in 1..grid.len {
        let p2 = grid.at(j);
        if m.wifi_dead(p2) {
            break;
        }
        let v = n * m.wifi_demand(p1, p2) * (p2 - c);
        if v > best.1 {
            best = (j, v);
        }
    }
    best
}

fn p1_grid(params: &MarketParams, cfg: &SolverConfig) -> Grid {
    Grid::new(0.0, params.v1(), cfg.eps1)
}

fn p2_grid(params: &MarketParams, cfg: &SolverConfig) -> Grid {
    Grid::new(params.c(), params.v2().max(params.c()), cfg.eps2)
}

fn refine(profit: impl Fn(f64) -> f64, at: f64, value: f64, lo: f64, hi: f64) -> BestResponse {
    if hi <= lo {
        return BestResponse {
            price: at,
            profit: value,
        };
    }
    let (x, v) = golden_max(&profit, lo, hi, (hi - lo) * REFINE_REL_TOL);
    if v > value {
        BestResponse { price: x, profit: v }
    } else {
        BestResponse {
            price: at,
            profit: value,
        }
    }
}

fn br_5g(m: &Market, grid: &Grid, p2: f64) -> Result<BestResponse> {
    if m.wifi_dead(p2) {
        let b = optimal_price(m.params, m.dist);
        return Ok(BestResponse {
            price: b.p1_bar,
            profit: b.profit,
        });
    }
    let (i, v) = scan_5g(m, grid, p2)?;
    let p = grid.at(i);
    let demand = m.demand_5g(p2)?;
    let n = m.params.n();
    Ok(refine(
        |p1| n * demand(p1) * p1,
        p,
        v,
        (p - grid.step).max(0.0),
        (p + grid.step).min(grid.hi),
    ))
}

fn br_wifi(m: &Market, grid: &Grid, p1: f64) -> BestResponse {
    let (j, v) = scan_wifi(m, grid, p1);
    let p = grid.at(j);
    if v <= 0.0 {
        return BestResponse { price: p, profit: v };
    }
    let (n, c) = (m.params.n(), m.params.c());
    refine(
        |p2| n * m.wifi_demand(p1, p2) * (p2 - c),
        p,
        v,
        (p - grid.step).max(grid.lo),
        (p + grid.step).min(grid.hi),
    )
}

/// 5G operator's best price against WiFi price `p2`: grid argmax over
/// `{0, ε1, …, V1}` refined by golden section inside the winning cell.
/// When WiFi cannot attract anyone at `p2` this is the pre-WiFi optimum.
pub fn best_response_5g(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p2: f64,
    cfg: &SolverConfig,
) -> Result<BestResponse> {
    cfg.validate()?;
    check_rival(params, p2)?;
    let m = Market::new(params, dist, cfg);
    br_5g(&m, &p1_grid(params, cfg), p2)
}

/// WiFi operator's best price against 5G price `p1`: grid argmax over
/// `{c, c + ε2, …, V2}` refined inside the winning cell. Returns `c` with
/// zero profit when no price attracts a WiFi user.
pub fn best_response_wifi(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    cfg: &SolverConfig,
) -> Result<BestResponse> {
    cfg.validate()?;
    if !(p1 >= 0.0) {
        return Err(Error::Domain {
            what: "p1",
            value: p1,
            domain: "[0, ∞)",
        });
    }
    let m = Market::new(params, dist, cfg);
    Ok(br_wifi(&m, &p2_grid(params, cfg), p1))
}

/// Corners and center of the price box `[0, V1] × [c, V2]`.
pub fn default_starts(params: &MarketParams) -> Vec<(f64, f64)> {
    let (v1, c, v2) = (params.v1(), params.c(), params.v2().max(params.c()));
    vec![(0.0, c), (v1, c), (0.0, v2), (v1, v2), (0.5 * v1, 0.5 * (c + v2))]
}

struct Search<'a> {
    m: Market<'a>,
    cfg: SolverConfig,
    g1: Grid,
    g2: Grid,
    memo_5g: HashMap<usize, usize>,
    memo_wifi: HashMap<usize, usize>,
    polished: HashMap<(usize, usize), (f64, f64, bool)>,
}

enum GridOutcome {
    Settled(usize, usize, usize),
    Stuck(Vec<(usize, usize)>, usize),
}

impl Search<'_> {
    fn br1(&mut self, j: usize) -> Result<usize> {
        if let Some(&i) = self.memo_5g.get(&j) {
            return Ok(i);
        }
        let p2 = self.g2.at(j);
        let i = if self.m.wifi_dead(p2) {
            self.g1.snap(optimal_price(self.m.params, self.m.dist).p1_bar)
        } else {
            scan_5g(&self.m, &self.g1, p2)?.0
        };
        self.memo_5g.insert(j, i);
        Ok(i)
    }

    fn br2(&mut self, i: usize) -> usize {
        *self
            .memo_wifi
            .entry(i)
            .or_insert_with(|| scan_wifi(&self.m, &self.g2, self.g1.at(i)).0)
    }

    fn close(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < self.cfg.fixed_point_tol && (a.1 - b.1).abs() < self.cfg.fixed_point_tol
    }

    /// Alternating grid best responses, 5G moving first.
    fn grid_run(&mut self, start: (f64, f64)) -> Result<GridOutcome> {
        let (mut i, mut j) = (self.g1.snap(start.0), self.g2.snap(start.1));
        let mut path = vec![(i, j)];
        for it in 1..=self.cfg.max_br_iterations {
            let ni = self.br1(j)?;
            let nj = self.br2(ni);
            if self.close((self.g1.at(i), self.g2.at(j)), (self.g1.at(ni), self.g2.at(nj))) {
                return Ok(GridOutcome::Settled(ni, nj, it));
            }
            if let Some(pos) = path.iter().position(|&s| s == (ni, nj)) {
                return Ok(GridOutcome::Stuck(path.split_off(pos), it));
            }
            path.push((ni, nj));
            (i, j) = (ni, nj);
        }
        let keep = path.len().min(8);
        Ok(GridOutcome::Stuck(
            path.split_off(path.len() - keep),
            self.cfg.max_br_iterations,
        ))
    }

    /// Refined best responses from a settled grid point.
    fn polish(&mut self, i: usize, j: usize) -> Result<(f64, f64, bool)> {
        if let Some(&r) = self.polished.get(&(i, j)) {
            return Ok(r);
        }
        let (mut p1, mut p2) = (self.g1.at(i), self.g2.at(j));
        let mut ok = false;
        for _ in 0..POLISH_ROUNDS {
            let n1 = br_5g(&self.m, &self.g1, p2)?.price;
            let n2 = br_wifi(&self.m, &self.g2, n1).price;
            let still = self.close((p1, p2), (n1, n2));
            (p1, p2) = (n1, n2);
            if still {
                ok = true;
                break;
            }
        }
        self.polished.insert((i, j), (p1, p2, ok));
        Ok((p1, p2, ok))
    }

    fn candidate(&self, p1: f64, p2: f64, converged: bool, iterations: usize) -> Result<NashCandidate> {
        let eq = self.m.solve(p1, p2)?;
        let (n, c) = (self.m.params.n(), self.m.params.c());
        Ok(NashCandidate {
            p1,
            p2,
            profit_5g: n * eq.state.total() * p1,
            profit_wifi: n * eq.state.x2 * (p2 - c),
            converged,
            iterations,
        })
    }
}

fn joint(c: &NashCandidate) -> f64 {
    c.profit_5g + c.profit_wifi
}

/// Stage II outcome of the pre-WiFi optimum, carried over unchanged.
fn benchmark_stage2(b: &BenchmarkEquilibrium) -> SubscriptionEquilibrium {
    let regime = match b.branch {
        BenchmarkBranch::Interior => Regime::FiveGOnlyInterior,
        BenchmarkBranch::FullMarket => Regime::FiveGOnlyFull,
        BenchmarkBranch::Empty => Regime::Empty,
    };
    let c = Candidate {
        family: Family::NoWifi,
        state: SubscriptionState { x1: b.x1_bar, x2: 0.0 },
        cut_low: b.theta_cut,
        cut_high: b.theta_cut,
        regime,
        residual: 0.0,
    };
    SubscriptionEquilibrium {
        state: c.state,
        cut_low: c.cut_low,
        cut_high: c.cut_high,
        regime,
        residual: 0.0,
        candidates: vec![c],
        x1_tie_break: false,
    }
}

/// Simultaneous-pricing equilibrium by alternating best responses.
///
/// Each start is iterated on the price grids (5G moving first) until the
/// prices stand still within `fixed_point_tol` or revisit an earlier pair;
/// settled points are then polished with refined best responses. A start
/// that cycles contributes its best visited pair with `converged = false`.
/// When WiFi can never attract a user the pre-WiFi optimum is returned with
/// `p2 = c`.
pub fn nash_equilibrium(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    cfg: &SolverConfig,
    starts: &[(f64, f64)],
) -> Result<PricingEquilibrium> {
    cfg.validate()?;
    if starts.is_empty() {
        return Err(Error::InvalidParameter {
            field: "starts",
            reason: "at least one start is required".into(),
        });
    }
    let m = Market::new(params, dist, cfg);
    if m.wifi_dead(params.c()) {
        let b = optimal_price(params, dist);
        let cand = NashCandidate {
            p1: b.p1_bar,
            p2: params.c(),
            profit_5g: b.profit,
            profit_wifi: 0.0,
            converged: true,
            iterations: 1,
        };
        return Ok(PricingEquilibrium {
            p1_star: b.p1_bar,
            p2_star: params.c(),
            stage2: benchmark_stage2(&b),
            profit_5g: b.profit,
            profit_wifi: 0.0,
            converged: true,
            iterations: 1,
            candidates: vec![cand],
        });
    }
    let mut s = Search {
        g1: p1_grid(params, cfg),
        g2: p2_grid(params, cfg),
        m,
        cfg: *cfg,
        memo_5g: HashMap::new(),
        memo_wifi: HashMap::new(),
        polished: HashMap::new(),
    };
    let mut candidates: Vec<NashCandidate> = Vec::new();
    for &start in starts {
        let cand = match s.grid_run(start)? {
            GridOutcome::Settled(i, j, it) => {
                let (p1, p2, ok) = s.polish(i, j)?;
                s.candidate(p1, p2, ok, it)?
            }
            GridOutcome::Stuck(cycle, it) => {
                let mut best: Option<NashCandidate> = None;
                for (i, j) in cycle {
                    let c = s.candidate(s.g1.at(i), s.g2.at(j), false, it)?;
                    if best.is_none_or(|b| joint(&c) > joint(&b)) {
                        best = Some(c);
                    }
                }
                best.expect("a cycle visits at least one pair")
            }
        };
        let dup = candidates
            .iter()
            .any(|c| c.converged == cand.converged && s.close((c.p1, c.p2), (cand.p1, cand.p2)));
        if !dup {
            candidates.push(cand);
        }
    }
    let pick = |conv: bool| {
        candidates
            .iter()
            .filter(|c| c.converged || !conv)
            .fold(None::<&NashCandidate>, |b, c| match b {
                Some(b) if joint(b) >= joint(c) => Some(b),
                _ => Some(c),
            })
            .copied()
    };
    let primary = pick(true).or_else(|| pick(false)).expect("at least one start");
    let stage2 = s.m.solve(primary.p1, primary.p2)?;
    Ok(PricingEquilibrium {
        p1_star: primary.p1,
        p2_star: primary.p2,
        stage2,
        profit_5g: primary.profit_5g,
        profit_wifi: primary.profit_wifi,
        converged: primary.converged,
        iterations: primary.iterations,
        candidates,
    })
}
