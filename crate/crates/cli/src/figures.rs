//! Named presets for the standard figure series.
//!
//! Every preset fixes `N = 1e5`, `V1 = 3000` and `ū = 1000`; the rest is
//! listed per figure below. The truncated normal is `N(0.5, 1)` restricted
//! to `[0, 1]`.

use serde_json::{json, Value};

use crate::commands::{self, Output};
use crate::config::RunConfig;
use crate::CliError;

enum Kind {
    Benchmark,
    Map,
    Payoffs,
    Sweep,
}

struct Preset {
    id: &'static str,
    kind: Kind,
    about: &'static str,
    doc: fn() -> Value,
}

fn q_grid() -> Value {
    json!([30, 60, 90, 120, 150, 180, 210, 240])
}

fn tn() -> Value {
    json!({"kind": "truncated_normal", "params": {"mean": 0.5, "stdev": 1.0}})
}

fn uniform() -> Value {
    json!({"kind": "uniform"})
}

fn market(q: f64, alpha: f64, c: f64) -> Value {
    json!({"N": 1e5, "V1": 3000, "V2": 3000, "u_bar": 1000, "Q": q, "alpha": alpha, "c": c, "beta": 0})
}

const PRESETS: &[Preset] = &[
    Preset {
        id: "benchmark_vs_Q",
        kind: Kind::Benchmark,
        about: "pre-WiFi price and subscription versus capacity, uniform",
        doc: || {
            let qs: Vec<f64> = (1..=24).map(|i| 10.0 * i as f64).collect();
            json!({"params": market(30.0, 0.5, 50.0), "dist": uniform(), "sweep": {"Q": qs}})
        },
    },
    Preset {
        id: "region_map",
        kind: Kind::Map,
        about: "Stage II regime over the price plane, uniform, Q=30, alpha=0.5",
        doc: || json!({"params": market(30.0, 0.5, 50.0), "dist": uniform()}),
    },
    Preset {
        id: "payoffs_Q30",
        kind: Kind::Payoffs,
        about: "user payoffs before and after entry, Q=30, alpha=0.5, c=50, truncated normal",
        doc: || json!({"params": market(30.0, 0.5, 50.0), "dist": tn()}),
    },
    Preset {
        id: "payoffs_Q120",
        kind: Kind::Payoffs,
        about: "user payoffs before and after entry, Q=120, alpha=0.5, c=50, truncated normal",
        doc: || json!({"params": market(120.0, 0.5, 50.0), "dist": tn()}),
    },
    Preset {
        id: "payoffs_Q180",
        kind: Kind::Payoffs,
        about: "user payoffs before and after entry, Q=180, alpha=0.5, c=50, truncated normal",
        doc: || json!({"params": market(180.0, 0.5, 50.0), "dist": tn()}),
    },
    Preset {
        id: "price_vs_Q",
        kind: Kind::Sweep,
        about: "5G price versus capacity for alpha in {0.5, 0.8}, c=100, truncated normal",
        doc: alpha_sweep,
    },
    Preset {
        id: "x2_vs_Q",
        kind: Kind::Sweep,
        about: "subscription fractions versus capacity, alpha=0.8, c=100, truncated normal",
        doc: || json!({"params": market(30.0, 0.8, 100.0), "dist": tn(), "sweep": {"Q": q_grid()}}),
    },
    Preset {
        id: "profit_vs_Q",
        kind: Kind::Sweep,
        about: "5G profit versus capacity for alpha in {0.5, 0.8}, c=100, truncated normal",
        doc: alpha_sweep,
    },
    Preset {
        id: "welfare_vs_Q",
        kind: Kind::Sweep,
        about: "social welfare versus capacity for alpha in {0.5, 0.8}, c=100, truncated normal",
        doc: alpha_sweep,
    },
    Preset {
        id: "price_vs_V2",
        kind: Kind::Sweep,
        about: "5G price versus capacity for V2 in {2000, 2500, 3000}, alpha=0.5, c=50, truncated normal",
        doc: v2_sweep,
    },
    Preset {
        id: "profit_vs_V2",
        kind: Kind::Sweep,
        about: "5G profit versus capacity for V2 in {2000, 2500, 3000}, alpha=0.5, c=50, truncated normal",
        doc: v2_sweep,
    },
    Preset {
        id: "beta_price",
        kind: Kind::Sweep,
        about: "5G price versus capacity for beta in {0, 1/4, 1/2, 1} x N/Q, alpha=0.5, c=50, uniform",
        doc: beta_sweep,
    },
    Preset {
        id: "beta_profit",
        kind: Kind::Sweep,
        about: "5G profit versus capacity for beta in {0, 1/4, 1/2, 1} x N/Q, alpha=0.5, c=50, uniform",
        doc: beta_sweep,
    },
];

fn alpha_sweep() -> Value {
    json!({"params": market(30.0, 0.5, 100.0), "dist": tn(), "sweep": {"Q": q_grid(), "alpha": [0.5, 0.8]}})
}

fn v2_sweep() -> Value {
    json!({"params": market(30.0, 0.5, 50.0), "dist": tn(), "sweep": {"Q": q_grid(), "V2": [2000, 2500, 3000]}})
}

fn beta_sweep() -> Value {
    json!({
        "params": market(30.0, 0.5, 50.0),
        "dist": uniform(),
        "sweep": {"Q": q_grid(), "beta_scaled": [0.0, 0.25, 0.5, 1.0]}
    })
}

/// Supported figure ids with a one-line description each.
pub fn list() -> Vec<(&'static str, &'static str)> {
    PRESETS.iter().map(|p| (p.id, p.about)).collect()
}

/// Configuration a preset runs with: the preset's market, distribution and
/// grids; solver settings and seed come from `base`.
pub fn preset_config(base: &RunConfig, id: &str) -> Result<RunConfig, CliError> {
    let p = find(id)?;
    let mut doc = (p.doc)();
    if let Some(s) = base.solver {
        doc["solver"] = serde_json::to_value(s)?;
    }
    doc["seed"] = base.seed.into();
    RunConfig::from_value(doc)
}

fn find(id: &str) -> Result<&'static Preset, CliError> {
    PRESETS.iter().find(|p| p.id == id).ok_or_else(|| {
        let ids: Vec<&str> = PRESETS.iter().map(|p| p.id).collect();
        CliError::Config(format!("unknown figure `{id}`; supported: {}", ids.join(", ")))
    })
}

pub fn figure(base: &RunConfig, id: &str) -> Result<Output, CliError> {
    let cfg = preset_config(base, id)?;
    match find(id)?.kind {
        Kind::Benchmark => commands::benchmark(&cfg),
        Kind::Map => commands::stage2_map(&cfg),
        Kind::Payoffs => commands::payoffs(&cfg),
        Kind::Sweep => commands::sweep(&cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_a_valid_config() {
        let base = RunConfig::default();
        for (id, _) in list() {
            let cfg = preset_config(&base, id).unwrap();
            assert_eq!(cfg.params.n(), 1e5, "{id}");
            assert!(!cfg.cells().unwrap().is_empty());
        }
        assert!(preset_config(&base, "nope").is_err());
    }

    #[test]
    fn benchmark_series_is_flat_then_falls() {
        let out = figure(&RunConfig::default(), "benchmark_vs_Q").unwrap();
        let t = out.table();
        for row in &t.rows {
            let (q, p, x) = match (&row[0], &row[1], &row[2]) {
                (crate::table::Cell::Num(q), crate::table::Cell::Num(p), crate::table::Cell::Num(x)) => (*q, *p, *x),
                _ => unreachable!(),
            };
            if q < 150.0 {
                assert!((p - 2000.0 * 2.0 / 3.0).abs() < 1e-9);
                assert!(x < 1.0);
            } else {
                assert!((p - (2000.0 - 1e5 / q)).abs() < 1e-9);
                assert_eq!(x, 1.0);
            }
        }
    }
}
