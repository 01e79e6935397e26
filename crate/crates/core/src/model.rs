//! Market parameters, user payoffs, operator profits and social welfare.

use serde::{Deserialize, Serialize};

use crate::distributions::SensitivityDistribution;
use crate::error::{check_unit, Error, Result};

/// Raw parameter record as it appears in configuration files. Missing
/// fields take their default values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamRecord {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
    pub u_bar: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub alpha: f64,
    pub c: f64,
    pub beta: f64,
}

impl Default for ParamRecord {
    fn default() -> Self {
        Self {
            n: 1e5,
            v1: 3000.0,
            v2: 3000.0,
            u_bar: 1000.0,
            q: 30.0,
            alpha: 0.5,
            c: 50.0,
            beta: 0.0,
        }
    }
}

/// Validated exogenous constants of the game.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "ParamRecord", into = "ParamRecord")]
pub struct MarketParams {
    rec: ParamRecord,
}

impl TryFrom<ParamRecord> for MarketParams {
    type Error = Error;

    fn try_from(rec: ParamRecord) -> Result<Self> {
        let bad = |field: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                field,
                reason: reason.to_string(),
            })
        };
        let fields = [
            ("N", rec.n),
            ("V1", rec.v1),
            ("V2", rec.v2),
            ("u_bar", rec.u_bar),
            ("Q", rec.q),
            ("alpha", rec.alpha),
            ("c", rec.c),
            ("beta", rec.beta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        if rec.n <= 0.0 {
            return bad("N", "must be positive");
        }
        if rec.q <= 0.0 {
            return bad("Q", "must be positive");
        }
        if rec.v2 < 0.0 || rec.u_bar < 0.0 || rec.c < 0.0 || rec.beta < 0.0 {
            return bad("V2/u_bar/c/beta", "must be non-negative");
        }
        if rec.v1 < rec.v2 {
            return bad("V1", "must be at least V2");
        }
        if rec.v1 <= rec.u_bar {
            return bad("V1", "must exceed u_bar, otherwise nobody subscribes");
        }
        if !(0.0..1.0).contains(&rec.alpha) {
            return bad("alpha", "must lie in [0, 1)");
        }
        Ok(Self { rec })
    }
}

impl From<MarketParams> for ParamRecord {
    fn from(p: MarketParams) -> Self {
        p.rec
    }
}

impl MarketParams {
    pub fn new(rec: ParamRecord) -> Result<Self> {
        rec.try_into()
    }

    /// Copy of the underlying record, for building modified parameter sets.
    pub fn record(&self) -> ParamRecord {
        self.rec
    }

    /// Re-validated copy with `edit` applied to the record.
    pub fn with(&self, edit: impl FnOnce(&mut ParamRecord)) -> Result<Self> {
        let mut rec = self.rec;
        edit(&mut rec);
        rec.try_into()
    }

    pub fn n(&self) -> f64 {
        self.rec.n
    }
    pub fn v1(&self) -> f64 {
        self.rec.v1
    }
    pub fn v2(&self) -> f64 {
        self.rec.v2
    }
    pub fn u_bar(&self) -> f64 {
        self.rec.u_bar
    }
    pub fn q(&self) -> f64 {
        self.rec.q
    }
    pub fn alpha(&self) -> f64 {
        self.rec.alpha
    }
    pub fn c(&self) -> f64 {
        self.rec.c
    }
    pub fn beta(&self) -> f64 {
        self.rec.beta
    }

    /// Congestion scale `N/Q`.
    #[inline]
    pub fn k(&self) -> f64 {
        self.rec.n / self.rec.q
    }

    /// Net benefit margin `V1 − ū`.
    #[inline]
    pub fn margin(&self) -> f64 {
        self.rec.v1 - self.rec.u_bar
    }

    /// Benefit gap `V1 − V2`.
    #[inline]
    pub fn benefit_gap(&self) -> f64 {
        self.rec.v1 - self.rec.v2
    }

    /// True for the configuration in which the closed forms were derived:
    /// equal benefits and uncongested WiFi.
    pub fn is_baseline(&self) -> bool {
        self.rec.v1 == self.rec.v2 && self.rec.beta == 0.0
    }

    /// WiFi can never attract a user: no coverage, or WiFi congests at least
    /// as fast as a fully loaded 5G network.
    pub fn wifi_inert(&self) -> bool {
        self.rec.alpha == 0.0 || self.rec.beta >= self.k()
    }
}

/// Fractions of users on 5G only (`x1`) and on 5G plus WiFi (`x2`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubscriptionState {
    pub x1: f64,
    pub x2: f64,
}

impl SubscriptionState {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        check_unit("x1", x1)?;
        check_unit("x2", x2)?;
        if x1 + x2 > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter {
                field: "x1 + x2",
                reason: format!("{} exceeds 1", x1 + x2),
            });
        }
        Ok(Self { x1, x2 })
    }

    /// Effective 5G load `x1 + x2(1 − αx2)`.
    #[inline]
    pub fn load(&self, alpha: f64) -> f64 {
        self.x1 + self.x2 * (1.0 - alpha * self.x2)
    }

    pub fn total(&self) -> f64 {
        self.x1 + self.x2
    }
}

/// Service choice of a single user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiceLabel {
    Neither = 0,
    FiveGOnly = 1,
    #[serde(rename = "five_g_plus_wifi")]
    FiveGPlusWiFi = 2,
}

impl ChoiceLabel {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// A payoff that is affine in θ: `intercept − slope·θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
}

impl Line {
    #[inline]
    pub fn at(&self, theta: f64) -> f64 {
        self.intercept - self.slope * theta
    }

    /// θ where two lines cross, if they are not parallel.
    pub fn crossing(&self, other: &Line) -> Option<f64> {
        let ds = self.slope - other.slope;
        (ds != 0.0).then(|| (self.intercept - other.intercept) / ds)
    }
}

/// Benchmark (pre-WiFi) 5G payoff as a line in θ.
pub fn benchmark_line(params: &MarketParams, x1_bar: f64, p1_bar: f64) -> Line {
    Line {
        intercept: params.v1() - p1_bar,
        slope: params.k() * x1_bar,
    }
}

/// 5G-only payoff as a line in θ.
pub fn five_g_line(params: &MarketParams, s: &SubscriptionState, p1: f64) -> Line {
    Line {
        intercept: params.v1() - p1,
        slope: params.k() * s.load(params.alpha()),
    }
}

/// 5G-plus-WiFi payoff as a line in θ.
pub fn wifi_line(params: &MarketParams, s: &SubscriptionState, p1: f64, p2: f64) -> Line {
    let cov = params.alpha() * s.x2;
    Line {
        intercept: (1.0 - cov) * params.v1() + cov * params.v2() - p1 - p2,
        slope: (1.0 - cov) * params.k() * s.load(params.alpha()) + cov * params.beta(),
    }
}

/// Pre-WiFi payoff `V1 − (N x̄1/Q)θ − p̄1`.
pub fn payoff_benchmark(params: &MarketParams, theta: f64, x1_bar: f64, p1_bar: f64) -> Result<f64> {
    check_unit("theta", theta)?;
    Ok(benchmark_line(params, x1_bar, p1_bar).at(theta))
}

/// Payoff of subscribing to 5G only.
pub fn payoff_5g_only(params: &MarketParams, theta: f64, s: &SubscriptionState, p1: f64) -> Result<f64> {
    check_unit("theta", theta)?;
    Ok(five_g_line(params, s, p1).at(theta))
}

/// Payoff of subscribing to 5G and adding WiFi, including the WiFi
/// congestion cost `αx2βθ`.
pub fn payoff_5g_wifi(params: &MarketParams, theta: f64, s: &SubscriptionState, p1: f64, p2: f64) -> Result<f64> {
    check_unit("theta", theta)?;
    Ok(wifi_line(params, s, p1, p2).at(theta))
}

/// 5G operator revenue `N(x1 + x2)p1`.
pub fn profit_5g(params: &MarketParams, s: &SubscriptionState, p1: f64) -> f64 {
    params.n() * (s.x1 + s.x2) * p1
}

/// WiFi operator profit `N x2 (p2 − c)`.
pub fn profit_wifi(params: &MarketParams, s: &SubscriptionState, p2: f64) -> Result<f64> {
    if p2 < params.c() {
        return Err(Error::Domain {
            what: "p2",
            value: p2,
            domain: "[c, ∞)",
        });
    }
    Ok(params.n() * s.x2 * (p2 - params.c()))
}

/// Which side of WiFi entry a welfare figure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareRegime {
    PreWifi,
    PostWifi,
}

/// Number of uniform nodes in the welfare quadrature.
pub const WELFARE_NODES: usize = 10_000;

/// Operator profits plus the population integral of realized user payoffs.
///
/// For `PreWifi`, `s.x1` is the benchmark fraction, `p1` the benchmark price
/// and `p2` is ignored. The θ-integral is a trapezoid rule in `dF` whose node
/// set includes every crossing of the payoff lines, so the piecewise-affine
/// integrand is integrated exactly when F is uniform.
pub fn social_welfare(
    params: &MarketParams,
    dist: &SensitivityDistribution,
    s: &SubscriptionState,
    p1: f64,
    p2: f64,
    regime: WelfareRegime,
) -> f64 {
    let reserve = Line {
        intercept: params.u_bar(),
        slope: 0.0,
    };
    let (lines, profits) = match regime {
        WelfareRegime::PreWifi => (vec![benchmark_line(params, s.x1, p1), reserve], params.n() * s.x1 * p1),
        WelfareRegime::PostWifi => (
            vec![five_g_line(params, s, p1), wifi_line(params, s, p1, p2), reserve],
            profit_5g(params, s, p1) + params.n() * s.x2 * (p2 - params.c()),
        ),
    };
    let best = |theta: f64| lines.iter().map(|l| l.at(theta)).fold(f64::NEG_INFINITY, f64::max);

    let mut nodes: Vec<f64> = (0..=WELFARE_NODES).map(|i| i as f64 / WELFARE_NODES as f64).collect();
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if let Some(t) = a.crossing(b) {
                if t > 0.0 && t < 1.0 {
                    nodes.push(t);
                }
            }
        }
    }
    nodes.sort_by(f64::total_cmp);

    let mut integral = 0.0;
    let mut prev_theta = nodes[0];
    let mut prev_f = dist.cdf_clamped(prev_theta);
    let mut prev_g = best(prev_theta);
    for &theta in &nodes[1..] {
        let f = dist.cdf_clamped(theta);
        let g = best(theta);
        integral += 0.5 * (g + prev_g) * (f - prev_f);
        prev_theta = theta;
        prev_f = f;
        prev_g = g;
    }
    debug_assert_eq!(prev_theta, 1.0);
    profits + params.n() * integral
}
