use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netext_cli::commands::{self, Output};
use netext_cli::config::{PayoffMode, Prices};
use netext_cli::{emit, figures, verify, CliError, Format, RunConfig, EXIT_OK, EXIT_VERIFY_FAILED};

#[derive(Parser)]
#[command(name = "netext", version, about = "5G pricing with a crowdsourced WiFi add-on")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration field by dot path, e.g. `params.Q=180`.
    #[arg(long = "set", value_name = "K=V", global = true)]
    set: Vec<String>,
    /// Worker threads for grid evaluations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Output file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pre-WiFi optimum for each Q of `sweep.Q` (or `params.Q`).
    Benchmark,
    /// User subscription equilibrium at fixed prices.
    Stage2 {
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
    },
    /// Regime over a price grid (`map` in the config).
    #[command(name = "stage2-map")]
    Stage2Map,
    /// Pricing equilibrium of the configured market.
    Equilibrium,
    /// Pricing equilibria over the `sweep` grid.
    Sweep,
    /// User payoffs along θ at the pricing equilibrium or at given prices.
    Payoffs {
        #[arg(long, requires = "p2")]
        p1: Option<f64>,
        #[arg(long, requires = "p1")]
        p2: Option<f64>,
    },
    /// Data series behind a named figure.
    Figures {
        id: Option<String>,
        /// Print the supported ids.
        #[arg(long)]
        list: bool,
    },
    /// Oracle audit of the configured market.
    Verify,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.set)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let format = match &cli.format {
        Some(f) => Some(f.parse::<Format>()?),
        None => cfg.output.format,
    };
    let out_path = cli.out.clone().or_else(|| cfg.output.path.clone().map(PathBuf::from));
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let output: Output = match cli.cmd {
        Cmd::Benchmark => commands::benchmark(&cfg)?,
        Cmd::Stage2 { p1, p2 } => {
            if let (Some(p1), Some(p2)) = (p1.or(cfg.prices.map(|p| p.p1)), p2.or(cfg.prices.map(|p| p.p2))) {
                cfg.prices = Some(Prices { p1, p2 });
            }
            commands::stage2(&cfg)?
        }
        Cmd::Stage2Map => commands::stage2_map(&cfg)?,
        Cmd::Equilibrium => commands::equilibrium_cmd(&cfg)?,
        Cmd::Sweep => commands::sweep(&cfg)?,
        Cmd::Payoffs { p1, p2 } => {
            if let (Some(p1), Some(p2)) = (p1, p2) {
                cfg.payoffs = PayoffMode::Explicit { p1, p2 };
            }
            commands::payoffs(&cfg)?
        }
        Cmd::Figures { id, list } => {
            if list || id.is_none() {
                for (id, about) in figures::list() {
                    println!("{id}\t{about}");
                }
                return Ok(EXIT_OK);
            }
            figures::figure(&cfg, id.as_deref().unwrap())?
        }
        Cmd::Verify => {
            let summary = verify::run(&cfg)?;
            let json = serde_json::to_value(&summary)?;
            let out = Output::Object {
                json: json.clone(),
                row: summary.table(),
            };
            let format = format.unwrap_or(Format::Csv);
            emit(&out, format, out_path.as_deref())?;
            if format == Format::Csv {
                let text = serde_json::to_string_pretty(&json)?;
                match &out_path {
                    Some(p) => std::fs::write(p.with_extension("json"), text + "\n")?,
                    None => eprintln!("{text}"),
                }
            }
            return Ok(if summary.passed { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
    };
    let format = format.unwrap_or_else(|| output.default_format());
    emit(&output, format, out_path.as_deref())?;
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("netext: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
