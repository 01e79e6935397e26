//! `verify`: the oracle audit suite run against the configured market.

use netext_core::benchmark::{numeric_optimal_price, optimal_price};
use netext_core::oracle::{brute_force_benchmark_price, cutoff_structure_audit, simulate_from, Start, UpdateRule};
use netext_core::stage2::{
    equilibrium, equilibrium_general, equilibrium_uniform, solve_x2_hat, uniform_solver_applies, wifi_price_ceiling,
    x2_hat_polynomial,
};
use netext_core::{SensitivityDistribution, SubscriptionEquilibrium};
use serde::{Deserialize, Serialize};

use crate::config::{Axis, RunConfig};
use crate::table::Table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The check does not apply to the configured market.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name: name.into(),
            status,
            residual,
            tolerance,
            detail,
        }
    }

    fn skip(name: &str, detail: &str) -> Self {
        Self {
            name: name.into(),
            status: Status::Skip,
            residual: 0.0,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub seed: u64,
    pub n_agents: usize,
    pub checks: Vec<Check>,
}

impl VerifySummary {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "status", "residual", "tolerance", "detail"]);
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Skip => "skip",
            };
            t.push(vec![
                c.name.clone().into(),
                status.into(),
                c.residual.into(),
                c.tolerance.into(),
                c.detail.clone().into(),
            ]);
        }
        t
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Interior points of `[lo, hi]`: `n` values with the ends left out.
fn inner(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let a = Axis {
        start: lo,
        stop: hi,
        points: n + 2,
    };
    let v = a.values();
    v[1..=n].to_vec()
}

fn families() -> Result<Vec<(&'static str, SensitivityDistribution)>, CliError> {
    Ok(vec![
        ("uniform", SensitivityDistribution::uniform()),
        ("truncated_normal", SensitivityDistribution::truncated_normal(0.5, 1.0)?),
        (
            "truncated_exponential",
            SensitivityDistribution::truncated_exponential(2.0)?,
        ),
        ("truncated_pareto", SensitivityDistribution::truncated_pareto(1.5, 0.5)?),
    ])
}

fn nearest(eq: &SubscriptionEquilibrium, x1: f64, x2: f64) -> f64 {
    eq.candidates
        .iter()
        .map(|c| (c.state.x1 - x1).abs().max((c.state.x2 - x2).abs()))
        .fold(f64::INFINITY, f64::min)
}

pub fn run(cfg: &RunConfig) -> Result<VerifySummary, CliError> {
    let (params, dist) = (&cfg.params, &cfg.dist);
    let mut checks = Vec::new();

    let b = optimal_price(params, dist);
    let nb = numeric_optimal_price(params, dist);
    checks.push(Check::new(
        "benchmark_numeric_path",
        rel(nb.profit, b.profit),
        1e-6,
        format!("price {} vs {}", nb.p1_bar, b.p1_bar),
    ));

    let step = 1.0;
    for (name, d) in families()? {
        let b = optimal_price(params, &d);
        let (p, v) = brute_force_benchmark_price(params, &d, step)?;
        // A grid profit above the optimum would mean the optimum is wrong.
        let gap = if v <= b.profit * (1.0 + 1e-9) {
            (p - b.p1_bar).abs() / step
        } else {
            f64::INFINITY
        };
        checks.push(Check::new(
            &format!("benchmark_grid_{name}"),
            gap,
            1.0,
            format!("grid argmax {p} vs {}", b.p1_bar),
        ));
    }

    if uniform_solver_applies(params, dist) {
        let g = cfg.verify.solver_grid;
        let mut worst: f64 = 0.0;
        for p1 in inner(0.0, params.v1(), g) {
            for p2 in inner(0.0, params.v2(), g) {
                let u = equilibrium_uniform(params, p1, p2)?;
                let v = equilibrium_general(params, dist, p1, p2)?;
                worst = worst
                    .max((u.state.x1 - v.state.x1).abs())
                    .max((u.state.x2 - v.state.x2).abs());
            }
        }
        checks.push(Check::new(
            "solver_agreement",
            worst,
            1e-8,
            format!("{g}x{g} price grid"),
        ));
    } else {
        checks.push(Check::skip(
            "solver_agreement",
            "needs uniform sensitivity, V1 = V2 and beta = 0",
        ));
    }

    if params.alpha() > 0.0 {
        let x = solve_x2_hat(params.alpha())?;
        checks.push(Check::new(
            "x2_hat_quartic",
            x2_hat_polynomial(params.alpha()).eval(x).abs(),
            1e-10,
            format!("x2_hat = {x}"),
        ));
    } else {
        checks.push(Check::skip("x2_hat_quartic", "alpha = 0"));
    }

    let n = cfg.verify.n_agents;
    let tol = 3.0 / (n as f64).sqrt();
    // The ceiling is loose; most WiFi demand sits well below it.
    let ceiling = wifi_price_ceiling(params);
    let p2_hi = if ceiling > 0.0 { 0.4 * ceiling } else { params.v2() };
    let p1s = inner(0.0, params.margin(), cfg.verify.grid);
    let p2s = inner(0.0, p2_hi, cfg.verify.grid);
    let (mut stay, mut fresh, mut cuts) = (0.0f64, 0.0f64, 0usize);
    let (mut skipped, mut cells, mut with_wifi) = (0usize, 0usize, 0usize);
    let mut order_cell = None;
    for &p1 in &p1s {
        for &p2 in &p2s {
            cells += 1;
            let eq = equilibrium(params, dist, p1, p2)?;
            if eq.state.x2 > 0.0 {
                with_wifi += 1;
                order_cell.get_or_insert((p1, p2));
            }
            let seed = cfg.seed.wrapping_add(cells as u64);
            let rule = UpdateRule::RandomSequential;
            let a = simulate_from(params, dist, p1, p2, n, seed, rule, Start::Equilibrium(&eq))?;
            let z = simulate_from(params, dist, p1, p2, n, seed, rule, Start::AllNeither)?;
            if !(a.converged && z.converged) {
                skipped += 1;
                continue;
            }
            stay = stay.max((a.x1 - eq.state.x1).abs()).max((a.x2 - eq.state.x2).abs());
            fresh = fresh.max(nearest(&eq, z.x1, z.x2));
            if !cutoff_structure_audit(params, dist, p1, p2, 200)? {
                cuts += 1;
            }
        }
    }
    let note = format!("{cells} cells, {with_wifi} with WiFi users, {skipped} without agent convergence");
    checks.push(Check::new("agents_stay_at_equilibrium", stay, tol, note.clone()));
    checks.push(Check::new("agents_from_empty_market", fresh, tol, note));
    checks.push(Check::new(
        "cutoff_structure",
        cuts as f64,
        0.0,
        format!("{cuts} of {cells} cells break the 1*2*0* pattern"),
    ));

    let (p1, p2) = order_cell.unwrap_or((p1s[p1s.len() / 2], p2s[p2s.len() / 2]));
    let eq = equilibrium(params, dist, p1, p2)?;
    let start = Start::Equilibrium(&eq);
    let s = simulate_from(params, dist, p1, p2, n, cfg.seed, UpdateRule::Synchronous, start)?;
    let r = simulate_from(params, dist, p1, p2, n, cfg.seed, UpdateRule::RandomSequential, start)?;
    let diff = if s.converged && r.converged {
        (s.x1 - r.x1).abs().max((s.x2 - r.x2).abs())
    } else {
        f64::INFINITY
    };
    checks.push(Check::new("update_order", diff, tol, format!("p1 = {p1}, p2 = {p2}")));

    let passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(VerifySummary {
        passed,
        seed: cfg.seed,
        n_agents: n,
        checks,
    })
}
