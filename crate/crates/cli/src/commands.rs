//! Subcommand bodies. Each returns an [`Output`]; writing it is the caller's
//! business.

use netext_core::benchmark::optimal_price;
use netext_core::model::{payoff_5g_only, payoff_5g_wifi, payoff_benchmark, social_welfare};
use netext_core::stage1::default_starts;
use netext_core::stage2::{choice_of, equilibrium};
use netext_core::{
    nash_equilibrium, MarketParams, PricingEquilibrium, SensitivityDistribution, SubscriptionState, WelfareRegime,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, PayoffMode, RunConfig};
use crate::table::{Cell, Table};
use crate::CliError;

/// Columns of `sweep` and of the equilibrium figures.
pub const SWEEP_HEADER: [&str; 15] = [
    "Q",
    "alpha",
    "c",
    "beta",
    "p1_star",
    "p2_star",
    "x1",
    "x2",
    "pi1",
    "pi2",
    "pi1_benchmark",
    "p1_benchmark",
    "sw",
    "sw_benchmark",
    "converged",
];

pub const BENCHMARK_HEADER: [&str; 6] = ["Q", "p1_bar", "x1_bar", "theta_cut", "profit", "branch"];
pub const MAP_HEADER: [&str; 5] = ["p1", "p2", "regime", "x1", "x2"];
pub const PAYOFF_HEADER: [&str; 5] = ["theta", "u_benchmark", "u_post", "choice", "payoff"];
/// θ grid of `payoffs`.
pub const PAYOFF_POINTS: usize = 200;

/// What a command produced: a table, or a single object that also has a
/// one-row tabular form.
#[derive(Debug, Clone)]
pub enum Output {
    Table(Table),
    Object { json: Value, row: Table },
}

impl Output {
    pub fn default_format(&self) -> Format {
        match self {
            Output::Table(_) => Format::Csv,
            Output::Object { .. } => Format::Json,
        }
    }

    pub fn write<W: std::io::Write>(&self, format: Format, mut out: W) -> Result<(), CliError> {
        match (self, format) {
            (Output::Table(t), Format::Csv) | (Output::Object { row: t, .. }, Format::Csv) => t.write_csv(out),
            (Output::Table(t), Format::Json) => write_json(&t.to_json(), &mut out),
            (Output::Object { json, .. }, Format::Json) => write_json(json, &mut out),
        }
    }

    pub fn table(&self) -> &Table {
        match self {
            Output::Table(t) | Output::Object { row: t, .. } => t,
        }
    }
}

fn write_json<W: std::io::Write>(v: &Value, out: &mut W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

/// snake_case name of a serializable unit enum.
fn label<T: Serialize>(t: &T) -> String {
    match serde_json::to_value(t) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

pub fn benchmark(cfg: &RunConfig) -> Result<Output, CliError> {
    let qs = cfg
        .sweep
        .as_ref()
        .and_then(|s| s.q.clone())
        .unwrap_or_else(|| vec![cfg.params.q()]);
    let mut t = Table::new(&BENCHMARK_HEADER);
    for q in qs {
        let p = cfg.params.with(|r| r.q = q)?;
        let b = optimal_price(&p, &cfg.dist);
        t.push(vec![
            q.into(),
            b.p1_bar.into(),
            b.x1_bar.into(),
            b.theta_cut.into(),
            b.profit.into(),
            label(&b.branch).into(),
        ]);
    }
    Ok(Output::Table(t))
}

pub fn stage2(cfg: &RunConfig) -> Result<Output, CliError> {
    let pr = cfg
        .prices
        .ok_or_else(|| CliError::Config("stage2 needs prices (--p1 and --p2, or `prices` in the config)".into()))?;
    let eq = equilibrium(&cfg.params, &cfg.dist, pr.p1, pr.p2)?;
    let mut json = serde_json::to_value(&eq)?;
    if let Value::Object(m) = &mut json {
        m.insert("p1".into(), pr.p1.into());
        m.insert("p2".into(), pr.p2.into());
    }
    let mut row = Table::new(&MAP_HEADER);
    row.push(vec![
        pr.p1.into(),
        pr.p2.into(),
        eq.regime.as_str().into(),
        eq.state.x1.into(),
        eq.state.x2.into(),
    ]);
    Ok(Output::Object { json, row })
}

pub fn stage2_map(cfg: &RunConfig) -> Result<Output, CliError> {
    let map = cfg.price_map();
    let (p1s, p2s) = (map.p1.values(), map.p2.values());
    let rows: Vec<Vec<Cell>> = p1s
        .par_iter()
        .map(|&p1| {
            p2s.iter()
                .map(|&p2| {
                    let eq = equilibrium(&cfg.params, &cfg.dist, p1, p2)?;
                    Ok(vec![
                        p1.into(),
                        p2.into(),
                        eq.regime.as_str().into(),
                        eq.state.x1.into(),
                        eq.state.x2.into(),
                    ])
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut t = Table::new(&MAP_HEADER);
    for r in rows {
        t.push(r);
    }
    Ok(Output::Table(t))
}

/// Pricing equilibrium of one market together with the pre-WiFi figures.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub params: MarketParams,
    pub eq: PricingEquilibrium,
    pub p1_benchmark: f64,
    pub pi1_benchmark: f64,
    pub sw: f64,
    pub sw_benchmark: f64,
}

impl CellResult {
    pub fn row(&self) -> Vec<Cell> {
        let (p, e) = (&self.params, &self.eq);
        vec![
            p.q().into(),
            p.alpha().into(),
            p.c().into(),
            p.beta().into(),
            e.p1_star.into(),
            e.p2_star.into(),
            e.stage2.state.x1.into(),
            e.stage2.state.x2.into(),
            e.profit_5g.into(),
            e.profit_wifi.into(),
            self.pi1_benchmark.into(),
            self.p1_benchmark.into(),
            self.sw.into(),
            self.sw_benchmark.into(),
            e.converged.into(),
        ]
    }
}

pub fn solve_cell(
    cfg: &RunConfig,
    params: &MarketParams,
    dist: &SensitivityDistribution,
) -> Result<CellResult, CliError> {
    let solver = cfg.solver_for(params);
    let eq = nash_equilibrium(params, dist, &solver, &default_starts(params))?;
    let b = optimal_price(params, dist);
    let sw = social_welfare(
        params,
        dist,
        &eq.stage2.state,
        eq.p1_star,
        eq.p2_star,
        WelfareRegime::PostWifi,
    );
    let pre = SubscriptionState { x1: b.x1_bar, x2: 0.0 };
    let sw_benchmark = social_welfare(params, dist, &pre, b.p1_bar, 0.0, WelfareRegime::PreWifi);
    Ok(CellResult {
        params: *params,
        eq,
        p1_benchmark: b.p1_bar,
        pi1_benchmark: b.profit,
        sw,
        sw_benchmark,
    })
}

pub fn equilibrium_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let cell = solve_cell(cfg, &cfg.params, &cfg.dist)?;
    let json = serde_json::to_value(&cell.eq)?;
    let mut row = Table::new(&SWEEP_HEADER);
    row.push(cell.row());
    Ok(Output::Object { json, row })
}

/// Solves every sweep cell; results keep grid order whatever the pool does.
pub fn sweep_cells(cfg: &RunConfig) -> Result<Vec<CellResult>, CliError> {
    cfg.cells()?.par_iter().map(|p| solve_cell(cfg, p, &cfg.dist)).collect()
}

pub fn sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut t = Table::new(&SWEEP_HEADER);
    for c in sweep_cells(cfg)? {
        t.push(c.row());
    }
    Ok(Output::Table(t))
}

pub fn payoffs(cfg: &RunConfig) -> Result<Output, CliError> {
    let (params, dist) = (&cfg.params, &cfg.dist);
    let (p1, p2) = match cfg.payoffs {
        PayoffMode::Explicit { p1, p2 } => (p1, p2),
        PayoffMode::AnalyticEquilibrium => {
            let eq = nash_equilibrium(params, dist, &cfg.solver(), &default_starts(params))?;
            (eq.p1_star, eq.p2_star)
        }
    };
    let eq = equilibrium(params, dist, p1, p2)?;
    let b = optimal_price(params, dist);
    let mut t = Table::new(&PAYOFF_HEADER);
    for i in 0..PAYOFF_POINTS {
        let theta = i as f64 / (PAYOFF_POINTS - 1) as f64;
        let ub = payoff_benchmark(params, theta, b.x1_bar, b.p1_bar)?;
        let u1 = payoff_5g_only(params, theta, &eq.state, p1)?;
        let u2 = payoff_5g_wifi(params, theta, &eq.state, p1, p2)?;
        let choice = choice_of(params, theta, &eq, p1, p2)?;
        let realized = match choice {
            netext_core::ChoiceLabel::FiveGOnly => u1,
            netext_core::ChoiceLabel::FiveGPlusWiFi => u2,
            netext_core::ChoiceLabel::Neither => params.u_bar(),
        };
        t.push(vec![
            theta.into(),
            ub.into(),
            u1.max(u2).into(),
            label(&choice).into(),
            realized.into(),
        ]);
    }
    Ok(Output::Table(t))
}
