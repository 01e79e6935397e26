//! Equilibrium engine for a congestible 5G network with a crowdsourced WiFi
//! add-on: user subscription (Stage II), operator pricing (Stage I), and an
//! agent-based cross-check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod distributions;
pub mod error;
pub mod model;
pub mod oracle;
pub mod roots;
pub mod stage1;
pub mod stage2;

pub use benchmark::{optimal_price, subscription_given_price, BenchmarkBranch, BenchmarkEquilibrium};
pub use distributions::{DistributionKind, SensitivityDistribution};
pub use error::{Error, Result};
pub use model::{ChoiceLabel, MarketParams, ParamRecord, SubscriptionState, WelfareRegime};
pub use stage1::{nash_equilibrium, PricingEquilibrium, SolverConfig};
pub use stage2::{Regime, SubscriptionEquilibrium};
