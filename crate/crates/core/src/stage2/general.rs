//! Stage II solver for any sensitivity distribution, unequal benefits and
//! congested WiFi.
//!
//! Both WiFi families are written in terms of cutoffs rather than fractions,
//! so the inverse CDF never enters the search. For a trial `x2` the inner
//! cutoff `a` is the smallest θ at which adding WiFi becomes weakly better;
//! the outer cutoff `b` where the WiFi payoff meets `ū` is then explicit.
//! Neither `a` nor the full-market family depends on the 5G price, so a
//! [`WifiPriceSlice`] computes them once and serves many values of `p1`.

use super::{check_prices, no_wifi_candidate, wifi_price_ceiling, Candidate, Family, Regime, SubscriptionEquilibrium};
use crate::distributions::SensitivityDistribution;
use crate::error::Result;
use crate::model::{five_g_line, wifi_line, MarketParams, SubscriptionState};
use crate::roots::{sampled_roots, sampled_roots_from};

/// Default sampling step of the candidate scans.
pub const DEFAULT_SCAN_STEP: f64 = 1.0 / 256.0;

/// Cutoff accuracy while scanning and for the returned equilibrium.
const SCAN_TOL: f64 = 1e-13;
const FINAL_TOL: f64 = 1e-15;

/// Tunables of [`equilibrium_general_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage2Options {
    /// Spacing of the sample points in `x2` (interior family) and in θ
    /// (full-market family) before root refinement.
    pub scan_step: f64,
}

impl Default for Stage2Options {
    fn default() -> Self {
        Self {
            scan_step: DEFAULT_SCAN_STEP,
        }
    }
}

struct Ctx<'a> {
    dist: &'a SensitivityDistribution,
    k: f64,
    alpha: f64,
    beta: f64,
    gap: f64,
    v1: f64,
    p2: f64,
    u_bar: f64,
}

impl Ctx<'_> {
    /// Smallest θ in `[0, 1]` where adding WiFi is weakly better than 5G
    /// only, given that `x2` users add WiFi and everyone below θ takes 5G
    /// only. `None` when no such θ exists.
    fn inner_cut(&self, x2: f64, hint: Option<f64>, tol: f64) -> Option<f64> {
        let ax = self.alpha * x2;
        let w = x2 * (1.0 - ax);
        let need = self.p2 + ax * self.gap;
        if need <= 0.0 {
            return (self.k * w - self.beta > 0.0).then_some(0.0);
        }
        let g = |t: f64, f: f64| ax * (self.k * (f + w) - self.beta) * t - need;
        if g(1.0, 1.0) < 0.0 {
            return None;
        }
        // g < 0 on [0, lo), g >= 0 on [hi, 1]; the predicate is monotone.
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x = hint.filter(|h| *h > 0.0 && *h < 1.0).unwrap_or(0.5);
        for _ in 0..200 {
            let f = self.dist.cdf_clamped(x);
            let gx = g(x, f);
            if gx >= 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= tol {
                return Some(hi);
            }
            let dg = ax * (self.k * (f + w) - self.beta + self.k * self.dist.pdf_clamped(x) * x);
            let mut next = if dg > 0.0 { x - gx / dg } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 0.5 * tol {
                return Some(next);
            }
            x = next;
        }
        Some(hi)
    }

    /// Outer cutoff where the WiFi payoff equals `ū`.
    fn outer_cut(&self, p1: f64, x1: f64, x2: f64) -> f64 {
        let ax = self.alpha * x2;
        let load = x1 + x2 * (1.0 - ax);
        let intercept = self.v1 - ax * self.gap - p1 - self.p2 - self.u_bar;
        intercept / ((1.0 - ax) * self.k * load + ax * self.beta)
    }

    /// Mass defect of the interior family at `x2` given `F(a)`.
    fn defect_given(&self, p1: f64, x2: f64, fa: f64) -> f64 {
        self.dist.cdf_clamped(self.outer_cut(p1, fa, x2)) - fa - x2
    }

    /// Indifference defect at θ = `a` when everyone subscribes and the users
    /// above `a` add WiFi.
    fn boundary_defect(&self, a: f64) -> f64 {
        let x2 = 1.0 - self.dist.cdf_clamped(a);
        let ax = self.alpha * x2;
        ax * (self.k * (1.0 - ax * x2) - self.beta) * a - self.p2 - ax * self.gap
    }
}

/// Stage II equilibrium for any supported configuration with default options.
pub fn equilibrium_general(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
) -> Result<SubscriptionEquilibrium> {
    equilibrium_general_with(params, dist, p1, p2, &Stage2Options::default())
}

/// Stage II equilibrium for any supported configuration.
///
/// Returns the WiFi-free outcome directly when WiFi cannot attract anyone
/// (no coverage, `β ≥ N/Q`, 5G priced out, or `p2` above
/// [`wifi_price_ceiling`]). Otherwise every family is scanned and the
/// candidate with the largest `x2` is selected, ties going to larger `x1`.
pub fn equilibrium_general_with(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    p1: f64,
    p2: f64,
    opts: &Stage2Options,
) -> Result<SubscriptionEquilibrium> {
    check_prices(p1, p2)?;
    if params.wifi_inert() || p1 >= params.margin() || p2 > wifi_price_ceiling(params) {
        return Ok(SubscriptionEquilibrium::select(vec![no_wifi_candidate(
            params, dist, p1,
        )]));
    }
    WifiPriceSlice::new(params, dist, p2, opts)?.solve(p1)
}

/// Stage II at a fixed WiFi price, prepared for repeated 5G prices.
///
/// Gives the same answers as [`equilibrium_general_with`] at the same
/// options.
pub struct WifiPriceSlice<'a> {
    params: &'a MarketParams,
    ctx: Ctx<'a>,
    /// WiFi cannot attract anyone at this `p2` whatever `p1` is.
    inert: bool,
    xs: Vec<f64>,
    /// `F(a(x2))` on `xs`, 1 where no inner cutoff exists.
    fa: Vec<f64>,
    /// Inner cutoffs on `xs`, used as Newton starts during refinement.
    cuts: Vec<Option<f64>>,
    boundary: Vec<f64>,
}

impl<'a> WifiPriceSlice<'a> {
    pub fn new(
        params: &'a MarketParams,
        dist: &'a SensitivityDistribution,
        p2: f64,
        opts: &Stage2Options,
    ) -> Result<Self> {
        check_prices(0.0, p2)?;
        let ctx = Ctx {
            dist,
            k: params.k(),
            alpha: params.alpha(),
            beta: params.beta(),
            gap: params.benefit_gap(),
            v1: params.v1(),
            p2,
            u_bar: params.u_bar(),
        };
        let inert = params.wifi_inert() || p2 > wifi_price_ceiling(params);
        let mut slice = Self {
            params,
            ctx,
            inert,
            xs: Vec::new(),
            fa: Vec::new(),
            cuts: Vec::new(),
            boundary: Vec::new(),
        };
        if inert {
            return Ok(slice);
        }
        let n = ((1.0 / opts.scan_step).ceil() as usize).max(2);
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        slice.boundary = sampled_roots(|a| slice.ctx.boundary_defect(a), &grid, 1e-15);

        slice.xs.push(1e-9);
        slice.xs.extend_from_slice(&grid[1..]);
        let mut hint = None;
        for &x2 in &slice.xs {
            let a = slice.ctx.inner_cut(x2, hint, SCAN_TOL);
            hint = a;
            slice.cuts.push(a);
            slice.fa.push(a.map_or(1.0, |a| dist.cdf_clamped(a)));
        }
        Ok(slice)
    }

    pub fn p2(&self) -> f64 {
        self.ctx.p2
    }

    /// Stage II equilibrium at 5G price `p1`.
    pub fn solve(&self, p1: f64) -> Result<SubscriptionEquilibrium> {
        check_prices(p1, self.ctx.p2)?;
        let mut candidates = vec![no_wifi_candidate(self.params, self.ctx.dist, p1)];
        if self.inert || p1 >= self.params.margin() {
            return Ok(SubscriptionEquilibrium::select(candidates));
        }
        if let Some(c) = self.boundary_candidate(p1) {
            candidates.push(c);
        }
        if let Some(c) = self.interior_candidate(p1) {
            candidates.push(c);
        }
        Ok(SubscriptionEquilibrium::select(candidates))
    }

    fn boundary_candidate(&self, p1: f64) -> Option<Candidate> {
        let ctx = &self.ctx;
        // Smallest admissible cutoff = largest x2.
        self.boundary.iter().find_map(|&a| {
            let x2 = 1.0 - ctx.dist.cdf_clamped(a);
            if x2 <= 0.0 {
                return None;
            }
            let s = SubscriptionState { x1: 1.0 - x2, x2 };
            let load = s.load(ctx.alpha);
            if ctx.k * load - ctx.beta <= 0.0 {
                return None;
            }
            if wifi_line(self.params, &s, p1, ctx.p2).at(1.0) < ctx.u_bar {
                return None;
            }
            Some(Candidate {
                family: Family::Boundary,
                state: s,
                cut_low: a,
                cut_high: 1.0,
                regime: Regime::FullMarketSplit,
                residual: residual(self.params, &s, p1, ctx.p2, a, None),
            })
        })
    }

    fn interior_candidate(&self, p1: f64) -> Option<Candidate> {
        let ctx = &self.ctx;
        let vs: Vec<f64> = self
            .xs
            .iter()
            .zip(&self.fa)
            .map(|(&x2, &fa)| ctx.defect_given(p1, x2, fa))
            .collect();
        let nearest_cut = |x2: f64| {
            let i = self.xs.partition_point(|&x| x < x2).min(self.xs.len() - 1);
            self.cuts[i]
        };
        let f = |x2: f64| {
            let a = ctx.inner_cut(x2, nearest_cut(x2), SCAN_TOL);
            ctx.defect_given(p1, x2, a.map_or(1.0, |a| ctx.dist.cdf_clamped(a)))
        };
        let roots = sampled_roots_from(f, &self.xs, &vs, 1e-15);
        roots.into_iter().rev().find_map(|x2| {
            let a = ctx.inner_cut(x2, None, FINAL_TOL)?;
            let x1 = ctx.dist.cdf_clamped(a);
            if x1 + x2 >= 1.0 {
                return None;
            }
            let b = ctx.outer_cut(p1, x1, x2);
            if !(b > a && b < 1.0) {
                return None;
            }
            let s = SubscriptionState { x1, x2 };
            Some(Candidate {
                family: Family::Interior,
                state: s,
                cut_low: a,
                cut_high: b,
                regime: Regime::InteriorSplit,
                residual: residual(self.params, &s, p1, ctx.p2, a, Some(b))
                    .max((ctx.dist.cdf_clamped(b) - x1 - x2).abs()),
            })
        })
    }
}

fn residual(params: &MarketParams, s: &SubscriptionState, p1: f64, p2: f64, a: f64, b: Option<f64>) -> f64 {
    let (l1, l2) = (five_g_line(params, s, p1), wifi_line(params, s, p1, p2));
    let mut r = (l1.at(a) - l2.at(a)).abs();
    if let Some(b) = b {
        r = r.max((l2.at(b) - params.u_bar()).abs());
    }
    r / params.k()
}
