use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};
use xyecho_cli::{run_with_threads, validate_config, write_rows, ConfigError, SweepConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "xyecho",
    version,
    about = "Loschmidt echo and Berry phase sweeps for a central spin coupled to an XY chain"
)]
struct Cli {
    /// Worker threads (0 = one per core); ECHO_THREADS overrides this
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Loschmidt echo over (gamma, lambda, N, t)
    Le {
        #[arg(long, default_value = "le_time_lambda",
              value_parser = ["le_time_lambda", "le_time_sizes", "le_time_gammas"])]
        experiment: String,
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        spin: SpinArgs,
        /// t or lo,hi,step
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        time: Option<Vec<f64>>,
    },
    /// Ground-state Berry phase of the central spin
    Berry {
        #[arg(long, default_value = "berry_surface", value_parser = ["berry_surface", "berry_xx_sizes"])]
        experiment: String,
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        spin: SpinArgs,
        #[arg(long, value_parser = ["beta", "dbeta", "f", "df"])]
        quantity: Option<String>,
        /// Include the thermodynamic limit
        #[arg(long)]
        thermodynamic: Option<bool>,
    },
    /// Peak positions of the lambda-derivatives and their size scaling
    Scaling {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        spin: SpinArgs,
        #[arg(long, value_parser = ["beta", "dbeta", "f", "df"])]
        quantity: Option<String>,
        /// lo,hi
        #[arg(long, value_delimiter = ',')]
        bracket: Option<Vec<f64>>,
    },
    /// Product formula against direct 2x2 evolution on random instances
    Oracle {
        #[arg(long)]
        samples: Option<i64>,
        #[arg(long)]
        seed: Option<i64>,
    },
    /// Run a TOML config file
    Run { config: PathBuf },
}

#[derive(Args, Debug)]
struct ChainArgs {
    /// Comma-separated list
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// lambda or lo,hi,step
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Option<Vec<f64>>,
    /// Comma-separated list
    #[arg(long, value_delimiter = ',')]
    n_sites: Option<Vec<i64>>,
}

#[derive(Args, Debug)]
struct SpinArgs {
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    /// Direct g/e field shift; overrides mu, nu, g
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
}

fn floats(xs: &[f64]) -> Value {
    match xs {
        [x] => Value::Float(*x),
        _ => Value::Array(xs.iter().map(|&x| Value::Float(x)).collect()),
    }
}

#[derive(Default)]
struct Doc(Table);

impl Doc {
    fn set(&mut self, section: &str, key: &str, value: Option<Value>) {
        if let Some(v) = value {
            self.0
                .entry(section)
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .expect("section table")
                .insert(key.into(), v);
        }
    }

    fn chain(&mut self, c: ChainArgs) {
        self.set("chain", "gamma", c.gamma.map(|g| floats(&g)));
        self.set("chain", "lambda", c.lambda.map(|l| floats(&l)));
        self.set(
            "chain",
            "n_sites",
            c.n_sites
                .map(|n| Value::Array(n.into_iter().map(Value::Integer).collect())),
        );
    }

    fn spin(&mut self, s: SpinArgs) {
        self.set("central_spin", "mu", s.mu.map(Value::Float));
        self.set("central_spin", "nu", s.nu.map(Value::Float));
        self.set("central_spin", "g", s.g.map(Value::Float));
        self.set("central_spin", "delta", s.delta.map(Value::Float));
    }
}

fn build_document(command: Command) -> Result<Table, ConfigError> {
    let mut doc = Doc::default();
    let experiment = match command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| ConfigError {
                violations: vec![format!("cannot read {}: {e}", config.display())],
            })?;
            return text.parse::<Table>().map_err(|e| ConfigError {
                violations: vec![format!(
                    "{}: not a valid TOML document: {}",
                    config.display(),
                    e.message()
                )],
            });
        }
        Command::Le {
            experiment,
            chain,
            spin,
            time,
        } => {
            doc.chain(chain);
            doc.spin(spin);
            doc.set("grid", "time", time.map(|t| floats(&t)));
            experiment
        }
        Command::Berry {
            experiment,
            chain,
            spin,
            quantity,
            thermodynamic,
        } => {
            doc.chain(chain);
            doc.spin(spin);
            doc.set("berry", "quantity", quantity.map(Value::String));
            doc.set("berry", "thermodynamic", thermodynamic.map(Value::Boolean));
            experiment
        }
        Command::Scaling {
            chain,
            spin,
            quantity,
            bracket,
        } => {
            doc.chain(chain);
            doc.spin(spin);
            doc.set("berry", "quantity", quantity.map(Value::String));
            doc.set(
                "berry",
                "bracket",
                bracket.map(|b| Value::Array(b.into_iter().map(Value::Float).collect())),
            );
            "dbeta_scaling".into()
        }
        Command::Oracle { samples, seed } => {
            doc.set("oracle", "samples", samples.map(Value::Integer));
            doc.set("oracle", "seed", seed.map(Value::Integer));
            "oracle_check".into()
        }
    };
    doc.0.insert("experiment".into(), Value::String(experiment));
    Ok(doc.0)
}

fn thread_count(flag: usize) -> Result<usize, ConfigError> {
    match std::env::var("ECHO_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| ConfigError {
            violations: vec![format!(
                "ECHO_THREADS must be a non-negative integer (got {v:?})"
            )],
        }),
        Err(_) => Ok(flag),
    }
}

fn configure(cli: Cli) -> Result<(SweepConfig, usize), ConfigError> {
    let threads = thread_count(cli.threads)?;
    let doc = build_document(cli.command)?;
    let mut config = validate_config(&doc)?;
    if let Some(f) = cli.format {
        config.format = f.parse().expect("restricted by clap");
    }
    if cli.output.is_some() {
        config.output = cli.output;
    }
    Ok((config, threads))
}

fn emit(config: &SweepConfig, rows: &[xyecho_cli::ResultRow]) -> io::Result<()> {
    match &config.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_rows(rows, config.format, &mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_rows(rows, config.format, &mut w)?;
            w.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (config, threads) = match configure(cli) {
        Ok(c) => c,
        Err(e) => {
            eprint!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    for w in &config.warnings {
        eprintln!("warning: {w}");
    }
    let rows = match run_with_threads(&config, threads) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    if let Err(e) = emit(&config, &rows) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::SUCCESS
}
