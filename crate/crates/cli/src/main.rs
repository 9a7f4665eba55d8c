use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qwalk_cli::commands::{self, Prediction, PredictParams};
use qwalk_cli::config::{self, Engine, Output};
use qwalk_cli::{simulate_all, table, CliError, Result};
use qwalk_core::Metric;
use toml::Value;

/// Coined quantum walk simulator.
#[derive(Parser)]
#[command(name = "qwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configured simulations.
    Simulate(SimulateArgs),
    /// Write the dispersion curve omega(k) and group velocity as CSV.
    Dispersion {
        /// Coin angle, e.g. 0.785 or "pi/4".
        #[arg(long, default_value = "pi/4")]
        theta: String,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a closed-form prediction: gaussian-width, flat-top or talbot.
    Predict {
        kind: Prediction,
        #[arg(long, default_value = "pi/4")]
        theta: String,
        #[arg(long)]
        sigma0: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Distance between two distribution CSV files.
    Compare {
        file_a: PathBuf,
        file_b: PathBuf,
        /// l1 or linf.
        #[arg(long, default_value = "l1")]
        metric: Metric,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: fig1, fig2a, fig2b or fig2c.
    #[arg(long)]
    preset: Option<String>,
    /// Evaluate the runs of a sweep concurrently.
    #[arg(long)]
    parallel: bool,
    /// Directory that relative output paths are resolved against.
    #[arg(long)]
    out_dir: Option<PathBuf>,

    #[arg(long)]
    theta: Option<String>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long)]
    t_max: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    sample_times: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    outputs: Option<Vec<OutputArg>>,
    #[arg(long)]
    output_path: Option<String>,
    /// 1, 2, 3 or exact.
    #[arg(long)]
    truncation: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    dispersion_samples: Option<usize>,

    /// Envelope family: delta, gaussian, sinc, sinc_gaussian or periodic.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long = "sigma-g")]
    sigma_g: Option<f64>,
    #[arg(long)]
    lambda: Option<u32>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    quad_phase: Option<f64>,
    #[arg(long)]
    half_width: Option<u64>,
    /// Carrier wavenumber.
    #[arg(long)]
    k0: Option<String>,
    /// Start on the eigenspinor at this wavenumber.
    #[arg(long, conflicts_with = "spinor")]
    coin_k0: Option<String>,
    /// Eigenspinor branch, 1 or -1.
    #[arg(long, requires = "coin_k0", allow_negative_numbers = true)]
    branch: Option<i8>,
    /// Explicit coin spinor as re_R,im_R,re_L,im_L.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    spinor: Option<Vec<f64>>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EngineArg {
    Map,
    Spectral,
    Continuum,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum OutputArg {
    Distribution,
    Moments,
    Flatness,
    Dispersion,
    Packets,
}

fn to_value<T: serde::Serialize>(v: T) -> Value {
    Value::try_from(v).expect("flag values convert to TOML")
}

impl SimulateArgs {
    /// Flags as a TOML table using the config file's field names.
    fn overrides(&self) -> Result<toml::Table> {
        let mut top = toml::Table::new();
        let set = |table: &mut toml::Table, key: &str, value: Option<Value>| {
            if let Some(v) = value {
                table.insert(key.into(), v);
            }
        };
        set(&mut top, "theta", self.theta.clone().map(Value::String));
        set(
            &mut top,
            "engine",
            self.engine.map(|e| {
                to_value(match e {
                    EngineArg::Map => Engine::Map,
                    EngineArg::Spectral => Engine::Spectral,
                    EngineArg::Continuum => Engine::Continuum,
                })
            }),
        );
        set(&mut top, "t_max", self.t_max.map(to_value));
        set(&mut top, "sample_times", self.sample_times.clone().map(to_value));
        set(
            &mut top,
            "outputs",
            self.outputs.as_ref().map(|outs| {
                to_value(
                    outs.iter()
                        .map(|o| match o {
                            OutputArg::Distribution => Output::Distribution,
                            OutputArg::Moments => Output::Moments,
                            OutputArg::Flatness => Output::Flatness,
                            OutputArg::Dispersion => Output::Dispersion,
                            OutputArg::Packets => Output::Packets,
                        })
                        .collect::<Vec<_>>(),
                )
            }),
        );
        set(&mut top, "output_path", self.output_path.clone().map(Value::String));
        let truncation = match self.truncation.as_deref() {
            None => None,
            Some("exact") => Some(Value::String("exact".into())),
            Some(order) => Some(Value::Integer(order.parse().map_err(|_| {
                CliError::Usage(format!("--truncation must be 1, 2, 3 or exact, got {order:?}"))
            })?)),
        };
        set(&mut top, "truncation", truncation);
        set(&mut top, "rho", self.rho.map(to_value));
        set(&mut top, "dispersion_samples", self.dispersion_samples.map(to_value));

        let mut envelope = toml::Table::new();
        set(&mut envelope, "family", self.family.clone().map(Value::String));
        set(&mut envelope, "sigma0", self.sigma0.map(to_value));
        set(&mut envelope, "sigmaG", self.sigma_g.map(to_value));
        set(&mut envelope, "lambda", self.lambda.map(to_value));
        set(&mut envelope, "x0", self.x0.map(to_value));
        set(&mut envelope, "quad_phase", self.quad_phase.map(to_value));
        set(&mut envelope, "half_width", self.half_width.map(to_value));

        let mut initial = toml::Table::new();
        if !envelope.is_empty() {
            initial.insert("envelope".into(), Value::Table(envelope));
        }
        set(&mut initial, "carrier_k0", self.k0.clone().map(Value::String));
        let coin = match (&self.coin_k0, &self.spinor) {
            (Some(k0), _) => {
                let mut eigen = toml::Table::new();
                eigen.insert("k0".into(), Value::String(k0.clone()));
                eigen.insert("s".into(), Value::Integer(self.branch.unwrap_or(1).into()));
                Some(toml::Table::from_iter([("eigenspinor".to_string(), Value::Table(eigen))]))
            }
            (None, Some(v)) if v.len() != 4 => {
                return Err(CliError::Usage(format!("--spinor needs 4 numbers, got {}", v.len())));
            }
            (None, Some(v)) => Some(toml::Table::from_iter([(
                "spinor".to_string(),
                to_value([[v[0], v[1]], [v[2], v[3]]]),
            )])),
            (None, None) => None,
        };
        set(&mut initial, "coin", coin.map(Value::Table));
        if !initial.is_empty() {
            top.insert("initial".into(), Value::Table(initial));
        }
        Ok(top)
    }
}

fn angle(text: &str) -> Result<f64> {
    qwalk_core::angle::parse(text).ok_or_else(|| CliError::Usage(format!("cannot parse angle {text:?}")))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let overrides = args.overrides()?;
            let runs = match (&args.config, &args.preset) {
                (Some(path), _) => config::load(path, &overrides)?,
                (None, Some(name)) => config::preset(name, &overrides)?,
                (None, None) => config::parse_with_overrides("", &overrides)?,
            };
            let records = simulate_all(&runs, args.out_dir.as_deref(), args.parallel)?;
            match records.as_slice() {
                [single] => print_json(single),
                many => print_json(&many),
            }
        }
        Command::Dispersion { theta, samples, output } => {
            let curve = commands::dispersion(angle(&theta)?, samples)?;
            match output {
                Some(path) => table::write_dispersion(&path, &curve)?,
                None => {
                    let mut out = std::io::stdout().lock();
                    table::write_dispersion_to(&mut out, &curve)
                        .map_err(|e| CliError::io("<stdout>", std::io::Error::other(e)))?;
                    out.flush().map_err(|e| CliError::io("<stdout>", e))?;
                }
            }
        }
        Command::Predict {
            kind,
            theta,
            sigma0,
            t,
            lambda,
        } => print_json(&commands::predict(kind, angle(&theta)?, &PredictParams { sigma0, t, lambda })?),
        Command::Compare { file_a, file_b, metric } => print_json(&commands::compare(&file_a, &file_b, metric)?),
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("{}", err.to_json());
        std::process::exit(err.exit_code());
    }
}
