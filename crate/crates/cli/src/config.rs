//! Run configuration: one JSON document plus `--set key=value` overrides.

use std::path::Path;

use netext_core::{MarketParams, SensitivityDistribution, SolverConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format `{s}`, expected csv or json"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Command default when absent (JSON for single objects, CSV for tables).
    #[serde(default)]
    pub format: Option<Format>,
    /// Standard output when absent.
    #[serde(default)]
    pub path: Option<String>,
}

/// Per-field value lists; a missing list keeps the base value. Cells are the
/// Cartesian product in the order Q, alpha, c, beta, V2 (last varies
/// fastest).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "Q", default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub c: Option<Vec<f64>>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    /// β as a multiple of `N/Q`; exclusive with `beta`.
    #[serde(default)]
    pub beta_scaled: Option<Vec<f64>>,
    #[serde(rename = "V2", default)]
    pub v2: Option<Vec<f64>>,
}

/// Evenly spaced axis `start, …, stop` with `points` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }
}

/// Price grid of `stage2-map`. A missing axis defaults to `[0, V1]` or
/// `[0, V2]` at 41 points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub p1: Option<Axis>,
    pub p2: Option<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceMap {
    pub p1: Axis,
    pub p2: Axis,
}

/// Prices for `stage2` and explicit `payoffs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prices {
    pub p1: f64,
    pub p2: f64,
}

/// Which prices `payoffs` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffMode {
    AnalyticEquilibrium,
    Explicit { p1: f64, p2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub n_agents: usize,
    /// Price points per axis of the agent and cutoff audits.
    pub grid: usize,
    /// Price points per axis of the solver cross-check.
    pub solver_grid: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            n_agents: 100_000,
            grid: 4,
            solver_grid: 20,
        }
    }
}

/// Everything a subcommand needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: MarketParams,
    #[serde(default)]
    pub dist: SensitivityDistribution,
    /// Defaults scaled to `params` when absent.
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub prices: Option<Prices>,
    #[serde(default)]
    pub map: Option<MapSpec>,
    #[serde(default = "default_payoff_mode")]
    pub payoffs: PayoffMode,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_payoff_mode() -> PayoffMode {
    PayoffMode::AnalyticEquilibrium
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: MarketParams::default(),
            dist: SensitivityDistribution::default(),
            solver: None,
            sweep: None,
            output: OutputSpec::default(),
            prices: None,
            map: None,
            payoffs: default_payoff_mode(),
            verify: VerifySpec::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Reads `path` (or starts from an empty document), applies overrides in
    /// order and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str::<Value>(&text).map_err(|e| {
                    CliError::Config(format!(
                        "{}: line {}, column {}: {e}",
                        p.display(),
                        e.line(),
                        e.column()
                    ))
                })?
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_value(doc)
    }

    pub fn from_value(doc: Value) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_path_to_error::deserialize(doc)
            .map_err(|e| CliError::Config(format!("field `{}`: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.solver().validate()?;
        if let Some(s) = &self.sweep {
            let lists = [
                ("sweep.Q", &s.q),
                ("sweep.alpha", &s.alpha),
                ("sweep.c", &s.c),
                ("sweep.beta", &s.beta),
                ("sweep.beta_scaled", &s.beta_scaled),
                ("sweep.V2", &s.v2),
            ];
            for (name, l) in lists {
                if l.as_ref().is_some_and(|v| v.is_empty()) {
                    return Err(CliError::Config(format!("{name} must not be empty")));
                }
            }
            if s.beta.is_some() && s.beta_scaled.is_some() {
                return Err(CliError::Config(
                    "sweep.beta and sweep.beta_scaled are exclusive".into(),
                ));
            }
        }
        if let Some(m) = &self.map {
            for (name, a) in [("map.p1", m.p1), ("map.p2", m.p2)] {
                let Some(a) = a else { continue };
                if a.points == 0 || !(a.start >= 0.0) || !(a.stop >= a.start) || !a.stop.is_finite() {
                    return Err(CliError::Config(format!(
                        "{name} needs points > 0 and 0 <= start <= stop"
                    )));
                }
            }
        }
        if self.verify.n_agents < netext_core::oracle::MIN_AGENTS {
            return Err(CliError::Config(format!(
                "verify.n_agents must be at least {}",
                netext_core::oracle::MIN_AGENTS
            )));
        }
        if self.verify.grid == 0 || self.verify.solver_grid == 0 {
            return Err(CliError::Config("verify grids need at least one point".into()));
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver.unwrap_or_else(|| SolverConfig::for_params(&self.params))
    }

    /// Solver settings for a cell of a sweep: explicit settings are kept,
    /// defaults are rescaled to the cell.
    pub fn solver_for(&self, params: &MarketParams) -> SolverConfig {
        self.solver.unwrap_or_else(|| SolverConfig::for_params(params))
    }

    /// Parameter records of every sweep cell, in output order.
    pub fn cells(&self) -> Result<Vec<MarketParams>, CliError> {
        let base = self.params.record();
        let s = self.sweep.clone().unwrap_or_default();
        let one = |l: &Option<Vec<f64>>, v: f64| l.clone().unwrap_or_else(|| vec![v]);
        let qs = one(&s.q, base.q);
        let alphas = one(&s.alpha, base.alpha);
        let cs = one(&s.c, base.c);
        let betas = match (&s.beta, &s.beta_scaled) {
            (_, Some(b)) => b.iter().map(|&b| (b, true)).collect(),
            (b, None) => one(b, base.beta).into_iter().map(|b| (b, false)).collect::<Vec<_>>(),
        };
        let v2s = one(&s.v2, base.v2);
        let mut out = Vec::with_capacity(qs.len() * alphas.len() * cs.len() * betas.len() * v2s.len());
        for &q in &qs {
            for &alpha in &alphas {
                for &c in &cs {
                    for &(b, scaled) in &betas {
                        for &v2 in &v2s {
                            let p = self.params.with(|r| {
                                r.q = q;
                                r.alpha = alpha;
                                r.c = c;
                                r.beta = if scaled { b * r.n / q } else { b };
                                r.v2 = v2;
                            })?;
                            out.push(p);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn price_map(&self) -> PriceMap {
        let m = self.map.unwrap_or_default();
        let axis = |stop| Axis {
            start: 0.0,
            stop,
            points: 41,
        };
        PriceMap {
            p1: m.p1.unwrap_or_else(|| axis(self.params.v1())),
            p2: m.p2.unwrap_or_else(|| axis(self.params.v2())),
        }
    }
}

/// Sets `key=value` at a dot path. The value is parsed as JSON and taken as
/// a plain string when that fails, so `dist.kind=uniform` works unquoted.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("override `{spec}` has an empty key segment")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(m) => m,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().unwrap()
            }
            _ => {
                return Err(CliError::Config(format!(
                    "override `{key}`: `{}` is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split always yields a segment")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_document_is_the_default_market() {
        let cfg = RunConfig::from_value(json!({})).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.cells().unwrap(), vec![MarketParams::default()]);
    }

    #[test]
    fn overrides_follow_dot_paths() {
        let mut doc = json!({"params": {"Q": 30}});
        apply_override(&mut doc, "params.Q=180").unwrap();
        apply_override(&mut doc, "dist.kind=truncated_normal").unwrap();
        apply_override(&mut doc, "dist.params.mean=0.5").unwrap();
        apply_override(&mut doc, "dist.params.stdev=1").unwrap();
        apply_override(&mut doc, "sweep.alpha=[0.2,0.5]").unwrap();
        let cfg = RunConfig::from_value(doc).unwrap();
        assert_eq!(cfg.params.q(), 180.0);
        assert!(!cfg.dist.is_uniform());
        assert_eq!(cfg.cells().unwrap().len(), 2);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        let mut doc = json!({"params": 3});
        assert!(apply_override(&mut doc, "params.Q=1").is_err());
        assert!(apply_override(&mut doc, "noequals").is_err());
        assert!(apply_override(&mut doc, "a..b=1").is_err());
    }

    #[test]
    fn field_errors_name_the_path() {
        let err = RunConfig::from_value(json!({"params": {"Q": "x"}})).unwrap_err();
        assert!(err.to_string().contains("params"), "{err}");
        let err = RunConfig::from_value(json!({"sweep": {"Q": []}})).unwrap_err();
        assert!(err.to_string().contains("sweep.Q"), "{err}");
        assert!(RunConfig::from_value(json!({"bogus": 1})).is_err());
        assert!(RunConfig::from_value(json!({"params": {"alpha": 1.5}})).is_err());
    }

    #[test]
    fn scaled_beta_tracks_capacity() {
        let cfg = RunConfig::from_value(json!({
            "sweep": {"Q": [50, 100], "beta_scaled": [0, 0.5, 1]}
        }))
        .unwrap();
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[2].beta(), 1e5 / 50.0);
        assert_eq!(cells[4].beta(), 0.5 * 1e5 / 100.0);
        assert_eq!(cells[3].q(), 100.0);
    }

    #[test]
    fn axis_hits_both_ends() {
        let a = Axis {
            start: 0.0,
            stop: 3000.0,
            points: 7,
        };
        let v = a.values();
        assert_eq!(v.len(), 7);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[6], 3000.0);
        assert_eq!(v[1], 500.0);
    }
}
